"""Adaptive frameless sampling controller.

The image is tiled by the leaves (the *cut*) of a K-D tree. Each leaf keeps
exponentially decayed luminance statistics plus spatial and temporal
luminance gradients. New samples go to a uniformly chosen leaf, so small
leaves are sampled densely; periodic rebalancing splits the most important
leaf and merges the least important sibling pair, while a proportional
controller sets the cut size from the balance of spatial and temporal
gradients.

The tree lives in flat arrays (see :class:`Tiling`) so the whole per-sample
loop can run inside one numba kernel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from numba import njit

from . import deep_buffer as db
from .deep_buffer import DeepBuffer
from .scene import CameraPath, Sample, Scene, camera_basis_into, trace_pixel

# per-node statistics layout
N, MEAN, VAR, GS, GT, LAST, WS, WT = range(8)
NSTAT = 8

# Tiling.info slots
_NCUT, _NFREE, _NTARGET = range(3)

# SamplerParams packed order, shared with the kernels
(P_TAU, P_RGRAD, P_RMATCH, P_REPROJ, P_EVERY, P_OPS, P_NMIN, P_NMAX, P_LAM,
 P_CEPS, P_HYST, P_KAPPA, P_EPSIMP, P_RHO) = range(14)


@dataclass
class SamplerParams:
    tau_stats: float = 0.25
    r_grad: float = 3.0
    r_match: float = 1.0
    reproject_per_sample: int = 4
    rebalance_every: int = 64
    rebalance_ops: int = 8
    n_min: int = 16
    n_max: int = 1024
    lam: float = 1.0
    controller_eps: float = 1e-9
    hysteresis: float = 0.1
    kappa: float = 1.0
    eps_imp: float = 1e-4
    rho: float = 1.5
    buffer_capacity: int = db.DEFAULT_CAPACITY

    def __post_init__(self):
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.tau_stats <= 0 or self.rebalance_every < 1 or self.buffer_capacity < 1:
            raise ValueError("tau_stats, rebalance_every and buffer_capacity must be positive")

    def packed(self) -> np.ndarray:
        vals = asdict(self)
        order = [f.name for f in fields(self)][:14]
        return np.array([float(vals[k]) for k in order])


def luminance(c) -> float:
    return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]


@njit(cache=True)
def _lum(r, g, b):
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


# ---------------------------------------------------------------- statistics


@dataclass
class TileStats:
    n: float = 0.0
    mean_L: float = 0.0
    var_L: float = 0.0
    g_s: float = 0.0
    g_t: float = 0.0
    last_t: float = 0.0
    w_s: float = 0.0
    w_t: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.n, self.mean_L, self.var_L, self.g_s, self.g_t,
                         self.last_t, self.w_s, self.w_t])

    @classmethod
    def from_array(cls, a) -> "TileStats":
        return cls(*(float(x) for x in a))


@njit(cache=True)
def _accumulate(st, lum, t_now, gs_obs, has_gs, gt_obs, has_gt, tau):
    """Fold one sample's observations into a stats row (decayed running moments)."""
    a = math.exp(-(t_now - st[LAST]) / tau) if st[N] > 0.0 else 0.0
    w = a * st[N] + 1.0
    d = lum - st[MEAN]
    mean = st[MEAN] + d / w
    st[VAR] = max(0.0, (a * st[N] * st[VAR] + d * (lum - mean)) / w)
    st[MEAN] = mean
    st[N] = w
    ws = a * st[WS]
    if has_gs:
        ws += 1.0
        st[GS] += (gs_obs - st[GS]) / ws
    st[WS] = ws
    wt = a * st[WT]
    if has_gt:
        wt += 1.0
        st[GT] += (gt_obs - st[GT]) / wt
    st[WT] = wt
    st[LAST] = t_now


@njit(cache=True)
def _pair_observations(lum, u, v, t, n_lum, n_u, n_v, n_t, r_match):
    """Spatial and temporal gradient observations from one sample's neighbors.

    Spatial: mean of |dL| / max(|duv|, 0.5) over all neighbors.
    Temporal: |dL| / max(|dt|, 1 ms) against the nearest neighbor within
    ``r_match`` (most recent on distance ties).
    """
    gs_sum = 0.0
    m = n_lum.shape[0]
    best_d = 1e300
    best = -1
    for k in range(m):
        du = n_u[k] - u
        dv = n_v[k] - v
        dist = math.sqrt(du * du + dv * dv)
        gs_sum += abs(lum - n_lum[k]) / max(dist, 0.5)
        if dist <= r_match and (dist < best_d or (dist == best_d and n_t[k] >= n_t[best])):
            best_d = dist
            best = k
    gs = gs_sum / m if m > 0 else 0.0
    gt = 0.0
    if best >= 0:
        gt = abs(lum - n_lum[best]) / max(abs(t - n_t[best]), 1e-3)
    return gs, m > 0, gt, best >= 0


@njit(cache=True)
def _scan_neighbors(data, count, width, height, u, v, t, lum, radius, r_match):
    """Same observations as :func:`_pair_observations` over a buffer neighborhood.

    Visits samples in gather order without materializing them.
    """
    x0 = max(0, int(math.floor(u - radius)))
    x1 = min(width - 1, int(math.floor(u + radius)))
    y0 = max(0, int(math.floor(v - radius)))
    y1 = min(height - 1, int(math.floor(v + radius)))
    r2 = radius * radius
    m = 0
    gs_sum = 0.0
    best_d = 1e300
    best_t = 0.0
    best_l = 0.0
    found = False
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            b = y * width + x
            for s in range(count[b]):
                du = data[b, s, db.U] - u
                dv = data[b, s, db.V] - v
                d2 = du * du + dv * dv
                if d2 > r2:
                    continue
                dist = math.sqrt(d2)
                nl = _lum(data[b, s, db.R], data[b, s, db.G], data[b, s, db.B])
                gs_sum += abs(lum - nl) / max(dist, 0.5)
                m += 1
                if dist <= r_match:
                    nt = data[b, s, db.T]
                    if dist < best_d or (dist == best_d and nt >= best_t):
                        best_d = dist
                        best_t = nt
                        best_l = nl
                        found = True
    gs = gs_sum / m if m > 0 else 0.0
    gt = abs(lum - best_l) / max(abs(t - best_t), 1e-3) if found else 0.0
    return gs, m > 0, gt, found


def update_stats(tile: TileStats, sample: Sample, neighbors: list[Sample], t_now: float,
                 params: SamplerParams | None = None) -> None:
    """Update ``tile`` in place with ``sample`` and its gathered neighbors."""
    p = params or SamplerParams()
    lum = luminance(sample.color)
    arr = lambda f: np.array([f(s) for s in neighbors], dtype=np.float64)
    gs, has_gs, gt, has_gt = _pair_observations(
        lum, sample.u, sample.v, sample.t,
        arr(lambda s: luminance(s.color)), arr(lambda s: s.u), arr(lambda s: s.v),
        arr(lambda s: s.t), p.r_match)
    st = tile.to_array()
    _accumulate(st, lum, float(t_now), gs, has_gs, gt, has_gt, p.tau_stats)
    for f, x in zip(fields(tile), st):
        setattr(tile, f.name, float(x))


def importance(rect, stats: TileStats, params: SamplerParams | None = None) -> float:
    p = params or SamplerParams()
    x0, y0, x1, y1 = rect
    return (x1 - x0) * (y1 - y0) * (stats.var_L + p.kappa * stats.g_t * p.tau_stats + p.eps_imp)


@njit(cache=True)
def _importance(rect, stats, node, kappa, tau, eps):
    area = (rect[node, 2] - rect[node, 0]) * (rect[node, 3] - rect[node, 1])
    return area * (stats[node, VAR] + kappa * stats[node, GT] * tau + eps)


@njit(cache=True)
def _target_count(g_s, g_t, n_min, n_max, lam, eps):
    x = n_min + (n_max - n_min) * g_s / (g_s + lam * g_t + eps)
    return int(math.floor(x + 0.5))


def target_tile_count(g_s: float, g_t: float, params: SamplerParams | None = None) -> int:
    """Cut size from gradient dominance: N_max when spatial dominates, N_min when temporal."""
    p = params or SamplerParams()
    if g_s < 0 or g_t < 0:
        raise ValueError("gradients must be nonnegative")
    return _target_count(float(g_s), float(g_t), p.n_min, p.n_max, p.lam, p.controller_eps)


# ---------------------------------------------------------------- K-D tiling


class Tiling:
    """K-D tree over ``[0, W) x [0, H)`` stored in flat arrays.

    ``cut[:ncut]`` lists the current leaves in a stable order; ``pix`` maps
    each pixel to the id of the leaf that covers it.
    """

    def __init__(self, width: int, height: int, n_target: int = 1):
        self.width = width
        self.height = height
        cap = 2 * width * height + 1
        self.rect = np.zeros((cap, 4), dtype=np.int64)
        self.parent = np.full(cap, -1, dtype=np.int64)
        self.left = np.full(cap, -1, dtype=np.int64)
        self.right = np.full(cap, -1, dtype=np.int64)
        self.stats = np.zeros((cap, NSTAT))
        self.cut = np.zeros(cap, dtype=np.int64)
        self.cutpos = np.full(cap, -1, dtype=np.int64)
        self.free = np.arange(cap - 1, 0, -1, dtype=np.int64)
        self.info = np.array([1, cap - 1, n_target], dtype=np.int64)
        self.pix = np.zeros((height, width), dtype=np.int64)
        self.rect[0] = (0, 0, width, height)
        self.cutpos[0] = 0

    @property
    def arrays(self):
        return (self.rect, self.parent, self.left, self.right, self.stats,
                self.cut, self.cutpos, self.free, self.info, self.pix)

    @property
    def n_target(self) -> int:
        return int(self.info[_NTARGET])

    def leaves(self) -> np.ndarray:
        return self.cut[: self.info[_NCUT]].copy()

    def __len__(self) -> int:
        return int(self.info[_NCUT])

    def leaf_rects(self) -> list[tuple[int, int, int, int]]:
        return [tuple(int(c) for c in self.rect[n]) for n in self.leaves()]

    def leaf_stats(self, node: int) -> TileStats:
        return TileStats.from_array(self.stats[node])

    def set_leaf_stats(self, node: int, stats: TileStats) -> None:
        self.stats[node] = stats.to_array()

    def leaf_importances(self, params: SamplerParams | None = None) -> np.ndarray:
        p = params or SamplerParams()
        return np.array([_importance(self.rect, self.stats, n, p.kappa, p.tau_stats, p.eps_imp)
                         for n in self.leaves()])


@njit(cache=True)
def _alloc(free, info):
    info[_NFREE] -= 1
    return free[info[_NFREE]]


@njit(cache=True)
def _release(free, info, node):
    free[info[_NFREE]] = node
    info[_NFREE] += 1


@njit(cache=True)
def _splittable(rect, node):
    return rect[node, 2] - rect[node, 0] > 1 or rect[node, 3] - rect[node, 1] > 1


@njit(cache=True)
def _split(tl, node):
    rect, parent, left, right, stats, cut, cutpos, free, info, pix = tl
    x0, y0, x1, y1 = rect[node, 0], rect[node, 1], rect[node, 2], rect[node, 3]
    a = _alloc(free, info)
    b = _alloc(free, info)
    if x1 - x0 >= y1 - y0:
        xm = x0 + (x1 - x0) // 2
        rect[a, 0], rect[a, 1], rect[a, 2], rect[a, 3] = x0, y0, xm, y1
        rect[b, 0], rect[b, 1], rect[b, 2], rect[b, 3] = xm, y0, x1, y1
    else:
        ym = y0 + (y1 - y0) // 2
        rect[a, 0], rect[a, 1], rect[a, 2], rect[a, 3] = x0, y0, x1, ym
        rect[b, 0], rect[b, 1], rect[b, 2], rect[b, 3] = x0, ym, x1, y1
    for c in (a, b):
        parent[c] = node
        left[c] = -1
        right[c] = -1
        stats[c, :] = stats[node, :]
        stats[c, N] *= 0.5
        stats[c, WS] *= 0.5
        stats[c, WT] *= 0.5
        pix[rect[c, 1]:rect[c, 3], rect[c, 0]:rect[c, 2]] = c
    left[node] = a
    right[node] = b
    pos = cutpos[node]
    cutpos[node] = -1
    cut[pos] = a
    cutpos[a] = pos
    n = info[_NCUT]
    cut[n] = b
    cutpos[b] = n
    info[_NCUT] = n + 1


@njit(cache=True)
def _pool(out, sa, sb, tau):
    last = max(sa[LAST], sb[LAST])
    fa = math.exp(-(last - sa[LAST]) / tau)
    fb = math.exp(-(last - sb[LAST]) / tau)
    na, nb = sa[N] * fa, sb[N] * fb
    n = na + nb
    if n > 0.0:
        mean = (na * sa[MEAN] + nb * sb[MEAN]) / n
        var = (na * (sa[VAR] + (sa[MEAN] - mean) ** 2) + nb * (sb[VAR] + (sb[MEAN] - mean) ** 2)) / n
    else:
        mean = 0.5 * (sa[MEAN] + sb[MEAN])
        var = 0.5 * (sa[VAR] + sb[VAR])
    wsa, wsb = sa[WS] * fa, sb[WS] * fb
    wta, wtb = sa[WT] * fa, sb[WT] * fb
    gs = (wsa * sa[GS] + wsb * sb[GS]) / (wsa + wsb) if wsa + wsb > 0 else 0.5 * (sa[GS] + sb[GS])
    gt = (wta * sa[GT] + wtb * sb[GT]) / (wta + wtb) if wta + wtb > 0 else 0.5 * (sa[GT] + sb[GT])
    out[N], out[MEAN], out[VAR], out[GS], out[GT] = n, mean, var, gs, gt
    out[LAST], out[WS], out[WT] = last, wsa + wsb, wta + wtb


@njit(cache=True)
def _merge(tl, node, tau):
    rect, parent, left, right, stats, cut, cutpos, free, info, pix = tl
    a, b = left[node], right[node]
    _pool(stats[node], stats[a], stats[b], tau)
    pa, pb = cutpos[a], cutpos[b]
    keep, drop = min(pa, pb), max(pa, pb)
    cut[keep] = node
    cutpos[node] = keep
    n = info[_NCUT]
    for k in range(drop, n - 1):
        cut[k] = cut[k + 1]
        cutpos[cut[k]] = k
    info[_NCUT] = n - 1
    for c in (a, b):
        cutpos[c] = -1
        parent[c] = -1
        _release(free, info, c)
    left[node] = -1
    right[node] = -1
    pix[rect[node, 1]:rect[node, 3], rect[node, 0]:rect[node, 2]] = node


@njit(cache=True)
def _rebalance(tl, n_target, max_ops, kappa, tau, eps, rho, log):
    """Split/merge toward ``n_target`` leaves. ``log`` rows: (kind, node); kind 1 split, 2 merge."""
    rect, parent, left, right, stats, cut, cutpos, free, info, pix = tl
    ops = 0
    nlog = 0
    imp = np.empty(cut.shape[0])
    while ops < max_ops:
        n = info[_NCUT]
        g_arg = -1
        s_arg = -1
        for k in range(n):
            node = cut[k]
            imp[node] = _importance(rect, stats, node, kappa, tau, eps)
            if g_arg < 0 or imp[node] > imp[g_arg]:
                g_arg = node
            if _splittable(rect, node) and (s_arg < 0 or imp[node] > imp[s_arg]):
                s_arg = node
        p_arg = -1
        p_imp = 0.0
        for k in range(n):
            node = cut[k]
            par = parent[node]
            if par < 0 or left[par] != node:
                continue
            sib = right[par]
            if left[sib] >= 0 or sib == g_arg or node == g_arg or sib == s_arg or node == s_arg:
                continue
            pi = imp[node] + imp[sib]
            if p_arg < 0 or pi < p_imp:
                p_arg = par
                p_imp = pi
        if n < n_target:
            if s_arg < 0:
                break
            _split(tl, s_arg)
            if log.shape[0] > nlog:
                log[nlog, 0], log[nlog, 1] = 1, s_arg
                nlog += 1
        elif n > n_target:
            if p_arg < 0:
                break
            _merge(tl, p_arg, tau)
            if log.shape[0] > nlog:
                log[nlog, 0], log[nlog, 1] = 2, p_arg
                nlog += 1
        else:
            if s_arg < 0 or p_arg < 0 or not imp[s_arg] > rho * p_imp:
                break
            _merge(tl, p_arg, tau)
            _split(tl, s_arg)
            if log.shape[0] > nlog + 1:
                log[nlog, 0], log[nlog, 1] = 2, p_arg
                log[nlog + 1, 0], log[nlog + 1, 1] = 1, s_arg
                nlog += 2
        ops += 1
    return nlog


def rebalance(tiling: Tiling, n_target: int, max_ops: int,
              params: SamplerParams | None = None, log: np.ndarray | None = None) -> int:
    """Run up to ``max_ops`` split/merge steps; returns the number of logged actions."""
    if max_ops < 0:
        raise ValueError("max_ops must be nonnegative")
    p = params or SamplerParams()
    if log is None:
        log = np.zeros((0, 2), dtype=np.int64)
    return _rebalance(tiling.arrays, int(n_target), int(max_ops),
                      p.kappa, p.tau_stats, p.eps_imp, p.rho, log)


@njit(cache=True)
def _pick(tl, d0, d1, d2):
    rect, cut, info = tl[0], tl[5], tl[8]
    n = info[_NCUT]
    k = min(int(d0 * n), n - 1)
    node = cut[k]
    x0, y0, x1, y1 = rect[node, 0], rect[node, 1], rect[node, 2], rect[node, 3]
    u = min(x0 + d1 * (x1 - x0), np.nextafter(x1, -np.inf))
    v = min(y0 + d2 * (y1 - y0), np.nextafter(y1, -np.inf))
    return u, v


DRAWS_PER_LOCATION = 3


def next_location(tiling: Tiling, rng: np.random.Generator) -> tuple[float, float]:
    """Uniform leaf, then a uniform point in it; exactly three draws per call."""
    d = rng.random(DRAWS_PER_LOCATION)
    u, v = _pick(tiling.arrays, d[0], d[1], d[2])
    return float(u), float(v)


@njit(cache=True)
def _cut_gradients(tl, width, height):
    rect, stats, cut, info = tl[0], tl[4], tl[5], tl[8]
    gs = 0.0
    gt = 0.0
    for k in range(info[_NCUT]):
        node = cut[k]
        area = (rect[node, 2] - rect[node, 0]) * (rect[node, 3] - rect[node, 1])
        gs += area * stats[node, GS]
        gt += area * stats[node, GT]
    tot = float(width * height)
    return gs / tot, gt / tot


# ---------------------------------------------------------------- per-sample loop


@njit(cache=True)
def _advance(i0, i1, budget, draws, scene, cam, width, height,
             data, count, tl, prm, state, last_row):
    """Process samples i0 .. i1-1. ``state`` = [reprojection cursor, trace calls]."""
    fw, fh = float(width), float(height)
    nb = width * height
    pix, stats, info = tl[9], tl[4], tl[8]
    tau = prm[P_TAU]
    rg = prm[P_RGRAD]
    nrep = int(prm[P_REPROJ])
    every = int(prm[P_EVERY])
    row = np.empty(db.NFIELDS)
    scratch = np.empty(db.NFIELDS)
    basis = np.empty((5, 3))
    no_log = np.zeros((0, 2), dtype=np.int64)
    for i in range(i0, i1):
        t = i / budget
        d = draws[i - i0]
        u, v = _pick(tl, d[0], d[1], d[2])
        camera_basis_into(cam, t, basis)
        res = trace_pixel(scene, basis, fw, fh, u, v, t)
        state[1] += 1
        row[db.U] = u
        row[db.V] = v
        row[db.R] = res[2]
        row[db.G] = res[3]
        row[db.B] = res[4]
        row[db.DEPTH] = res[1]
        row[db.WX] = res[5]
        row[db.WY] = res[6]
        row[db.WZ] = res[7]
        row[db.T] = t
        row[db.TVIEW] = t
        row[db.BG] = 1.0 if res[0] else 0.0
        lum = _lum(res[2], res[3], res[4])

        gs, has_gs, gt, has_gt = _scan_neighbors(data, count, width, height, u, v, t, lum,
                                                 rg, prm[P_RMATCH])
        db.bucket_insert(data, count, width, height, row)
        node = pix[int(v), int(u)]
        _accumulate(stats[node], lum, t, gs, has_gs, gt, has_gt, tau)
        last_row[:] = row

        for _ in range(nrep):
            b = state[0]
            state[0] = (b + 1) % nb
            c = count[b]
            if c == 0:
                continue
            j = 0
            for s in range(1, c):
                if data[b, s, db.TVIEW] < data[b, j, db.TVIEW]:
                    j = s
            if data[b, j, db.TVIEW] < t:
                db.reproject_in_place(data, count, width, height, b, j, basis, t, scratch)

        if (i + 1) % every == 0:
            g_s, g_t = _cut_gradients(tl, width, height)
            raw = _target_count(g_s, g_t, prm[P_NMIN], prm[P_NMAX], prm[P_LAM], prm[P_CEPS])
            raw = min(raw, nb)
            cur = info[_NTARGET]
            if abs(raw - cur) > prm[P_HYST] * cur:
                info[_NTARGET] = raw
            _rebalance(tl, info[_NTARGET], int(prm[P_OPS]), prm[P_KAPPA], tau,
                       prm[P_EPSIMP], prm[P_RHO], no_log)


@dataclass(frozen=True)
class TileRecord:
    rect: tuple[int, int, int, int]
    g_s: float
    g_t: float
    density: float


@dataclass(frozen=True)
class RefreshMetadata:
    """Immutable snapshot of the cut handed to the reconstructor."""

    rects: np.ndarray
    g_s: np.ndarray
    g_t: np.ndarray
    density: np.ndarray
    record_of_pixel: np.ndarray

    def __len__(self) -> int:
        return len(self.rects)

    @property
    def records(self) -> list[TileRecord]:
        return [TileRecord(tuple(int(c) for c in r), float(a), float(b), float(d))
                for r, a, b, d in zip(self.rects, self.g_s, self.g_t, self.density)]

    @classmethod
    def uniform(cls, width: int, height: int, density: float, g_s: float = 0.0, g_t: float = 0.0):
        """Single-tile snapshot; handy for driving the reconstructor directly."""
        return cls(np.array([[0, 0, width, height]]), np.array([g_s]), np.array([g_t]),
                   np.array([density]), np.zeros((height, width), dtype=np.int64))


def refresh_metadata(tiling: Tiling, t_now: float | None = None,
                     params: SamplerParams | None = None) -> RefreshMetadata:
    """Snapshot the cut. With ``t_now`` the sample counts are decayed to that instant."""
    p = params or SamplerParams()
    leaves = tiling.leaves()
    rects = tiling.rect[leaves].copy()
    st = tiling.stats[leaves]
    n = st[:, N].copy()
    if t_now is not None:
        n *= np.exp(-(t_now - st[:, LAST]) / p.tau_stats)
    area = (rects[:, 2] - rects[:, 0]) * (rects[:, 3] - rects[:, 1])
    lookup = np.empty(tiling.rect.shape[0], dtype=np.int64)
    lookup[leaves] = np.arange(len(leaves))
    for arr in (rects, n):
        arr.setflags(write=False)
    return RefreshMetadata(rects, st[:, GS].copy(), st[:, GT].copy(), n / area,
                           lookup[tiling.pix])


class AdaptiveSampler:
    """Drives sample generation, buffering, statistics and rebalancing on a virtual clock."""

    chunk = 1 << 16

    def __init__(self, scene: Scene, path: CameraPath, width: int, height: int,
                 budget: float, params: SamplerParams | None = None,
                 rng: np.random.Generator | None = None, seed: int = 0):
        self.params = params or SamplerParams()
        self.width, self.height = width, height
        self.budget = float(budget)
        self.scene = scene
        self.path = path
        self._scene = scene.packed()
        self._cam = path.packed()
        self._prm = self.params.packed()
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.buffer = DeepBuffer(width, height, self.params.buffer_capacity)
        self.tiling = Tiling(width, height, n_target=self.params.n_min)
        self.index = 0
        self._state = np.zeros(2, dtype=np.int64)
        self._last = np.zeros(db.NFIELDS)

    @property
    def trace_calls(self) -> int:
        return int(self._state[1])

    def advance_to(self, n: int) -> None:
        """Consume samples until ``n`` have been taken in total."""
        while self.index < n:
            stop = min(n, self.index + self.chunk)
            draws = self.rng.random((stop - self.index, DRAWS_PER_LOCATION))
            _advance(self.index, stop, self.budget, draws, self._scene, self._cam,
                     self.width, self.height, self.buffer.data, self.buffer.count,
                     self.tiling.arrays, self._prm, self._state, self._last)
            self.index = stop

    def step(self) -> Sample:
        """Take sample number ``self.index`` and return it."""
        self.advance_to(self.index + 1)
        return db.row_to_sample(self._last)

    def metadata(self, t_now: float) -> RefreshMetadata:
        return refresh_metadata(self.tiling, t_now, self.params)
