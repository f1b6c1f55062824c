"""Adaptive space-time reconstruction of a display image from the deep buffer.

Every stored sample is reprojected into the current view and splatted with a
separable Gaussian: spatial width from the local sampling density, temporal
width from the balance of spatial and temporal gradients of its tile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import deep_buffer as db
from .deep_buffer import DeepBuffer
from .sampler import RefreshMetadata
from .scene import CameraPath, camera_basis, project_point


@dataclass
class ReconParams:
    c_s: float = 0.35
    c_t: float = 0.5
    sigma_s_min: float = 0.5
    sigma_s_max: float = 4.0
    sigma_t_min: float = 0.01
    sigma_t_max: float = 1.0
    d_floor: float = 1e-3
    eps_g: float = 1e-3
    w_floor: float = 1e-4
    r_fallback: float = 8.0
    support: float = 3.0
    occlusion_band: float = 0.01
    # occluders must land this close to the sample they hide (pixels; < 0 disables)
    occlusion_radius: float = 0.5

    def __post_init__(self):
        if not (0 < self.sigma_s_min <= self.sigma_s_max and 0 < self.sigma_t_min <= self.sigma_t_max):
            raise ValueError("filter width bounds must satisfy 0 < min <= max")


@dataclass(frozen=True)
class FilterParams:
    sigma_s: float
    sigma_t: float


def _clamp(x, lo, hi):
    return min(max(x, lo), hi)


def filter_widths(density, g_s, g_t, p: ReconParams):
    """Vectorized form of :func:`local_filter_params` (arrays in, arrays out)."""
    sigma_s = np.clip(p.c_s / np.sqrt(np.maximum(density, p.d_floor)), p.sigma_s_min, p.sigma_s_max)
    sigma_t = np.clip(p.c_t * (g_s + p.eps_g) / (g_t + p.eps_g), p.sigma_t_min, p.sigma_t_max)
    return sigma_s, sigma_t


def local_filter_params(density: float, g_s: float, g_t: float,
                        params: ReconParams | None = None) -> FilterParams:
    """Spatial width shrinks with density; temporal width shrinks as g_t grows."""
    p = params or ReconParams()
    if density < 0 or g_s < 0 or g_t < 0:
        raise ValueError("density and gradients must be nonnegative")
    s, t = filter_widths(np.float64(density), np.float64(g_s), np.float64(g_t), p)
    return FilterParams(float(s), float(t))


@njit(cache=True)
def splat_weight(du, dv, age, sigma_s, sigma_t):
    return (math.exp(-(du * du + dv * dv) / (2.0 * sigma_s * sigma_s))
            * math.exp(-(age * age) / (2.0 * sigma_t * sigma_t)))


@dataclass(frozen=True)
class Contribution:
    depth: float
    t: float
    weight: float
    color: tuple[float, float, float]
    # reprojected image position of the contributing sample; None = unknown
    u: float | None = None
    v: float | None = None


def _near(a: Contribution, b: Contribution, radius: float) -> bool:
    if radius < 0 or a.u is None or b.u is None:
        return True
    return (a.u - b.u) ** 2 + (a.v - b.v) ** 2 <= radius * radius


def occlusion_reject(contribs: list[Contribution], band: float = 0.01,
                     radius: float = -1.0) -> list[Contribution]:
    """Drop contributions hidden behind a strictly newer, nearer one at the same pixel.

    With ``radius >= 0`` and known positions, an occluder only counts when its
    sample lies within ``radius`` pixels of the hidden one.
    """
    return [c for c in contribs
            if not any(o.t > c.t and o.depth < (1.0 - band) * c.depth and _near(o, c, radius)
                       for o in contribs)]


@njit(cache=True)
def _reproject_all(data, count, width, height, basis):
    total = 0
    for b in range(count.shape[0]):
        total += count[b]
    pu = np.empty(total)
    pv = np.empty(total)
    pd = np.empty(total)
    src = np.empty((total, 2), dtype=np.int64)
    m = 0
    fw, fh = float(width), float(height)
    for b in range(count.shape[0]):
        for s in range(count[b]):
            ok, u, v, d = project_point(basis, fw, fh, data[b, s, db.WX], data[b, s, db.WY],
                                        data[b, s, db.WZ])
            if ok:
                pu[m] = u
                pv[m] = v
                pd[m] = d
                src[m, 0] = b
                src[m, 1] = s
                m += 1
    return pu[:m], pv[:m], pd[:m], src[:m]


@njit(cache=True)
def _pixel_span(p, radius, n):
    lo = max(0, int(math.ceil(p - radius - 0.5)))
    hi = min(n - 1, int(math.floor(p + radius - 0.5)))
    return lo, hi


@njit(cache=True)
def _scatter(width, height, t_now, pu, pv, pd, pt, col, sig_s, sig_t,
             support, band, r_occ, w_floor, r_fallback, background):
    """Scatter samples into an image. All per-sample arrays are in stored order."""
    m = pu.shape[0]
    npx = width * height
    start = np.zeros(npx + 1, dtype=np.int64)
    for i in range(m):
        r = support * sig_s[i]
        x0, x1 = _pixel_span(pu[i], r, width)
        y0, y1 = _pixel_span(pv[i], r, height)
        r2 = r * r
        for y in range(y0, y1 + 1):
            dv = y + 0.5 - pv[i]
            for x in range(x0, x1 + 1):
                du = x + 0.5 - pu[i]
                if du * du + dv * dv <= r2:
                    start[y * width + x + 1] += 1
    for k in range(npx):
        start[k + 1] += start[k]
    fill = start[:-1].copy()
    who = np.empty(start[npx], dtype=np.int32)
    for i in range(m):
        r = support * sig_s[i]
        x0, x1 = _pixel_span(pu[i], r, width)
        y0, y1 = _pixel_span(pv[i], r, height)
        r2 = r * r
        for y in range(y0, y1 + 1):
            dv = y + 0.5 - pv[i]
            for x in range(x0, x1 + 1):
                du = x + 0.5 - pu[i]
                if du * du + dv * dv <= r2:
                    k = y * width + x
                    who[fill[k]] = i
                    fill[k] += 1

    img = np.empty((height, width, 3))
    need_fallback = np.zeros(npx, dtype=np.bool_)
    keep = 1.0 - band
    r_occ2 = r_occ * r_occ
    for k in range(npx):
        y = k // width
        x = k - y * width
        a, e = start[k], start[k + 1]
        dmin = 1e308
        for q in range(a, e):
            dmin = min(dmin, pd[who[q]])
        wsum = 0.0
        ar = ag = ab = 0.0
        ref = -1
        for q in range(a, e):
            i = who[q]
            if dmin < keep * pd[i]:
                hidden = False
                for q2 in range(a, e):
                    j = who[q2]
                    if (pt[j] > pt[i] and pd[j] < keep * pd[i]
                            and (r_occ < 0 or (pu[j] - pu[i]) ** 2 + (pv[j] - pv[i]) ** 2 <= r_occ2)):
                        hidden = True
                        break
                if hidden:
                    continue
            w = splat_weight(x + 0.5 - pu[i], y + 0.5 - pv[i], t_now - pt[i], sig_s[i], sig_t[i])
            if ref < 0:
                ref = i
            wsum += w
            ar += w * (col[i, 0] - col[ref, 0])
            ag += w * (col[i, 1] - col[ref, 1])
            ab += w * (col[i, 2] - col[ref, 2])
        if ref >= 0 and wsum >= w_floor:
            img[y, x, 0] = col[ref, 0] + ar / wsum
            img[y, x, 1] = col[ref, 1] + ag / wsum
            img[y, x, 2] = col[ref, 2] + ab / wsum
        else:
            need_fallback[k] = True

    # nearest reprojected sample for pixels the filters barely reach
    cell = np.zeros(npx + 1, dtype=np.int64)
    for i in range(m):
        cell[int(pv[i]) * width + int(pu[i]) + 1] += 1
    for k in range(npx):
        cell[k + 1] += cell[k]
    cfill = cell[:-1].copy()
    order = np.empty(m, dtype=np.int64)
    for i in range(m):
        k = int(pv[i]) * width + int(pu[i])
        order[cfill[k]] = i
        cfill[k] += 1
    reach = int(math.ceil(r_fallback))
    rf2 = r_fallback * r_fallback
    for k in range(npx):
        if not need_fallback[k]:
            continue
        y = k // width
        x = k - y * width
        cx, cy = x + 0.5, y + 0.5
        best = -1
        best_d = 0.0
        for yy in range(max(0, y - reach), min(height, y + reach + 1)):
            for xx in range(max(0, x - reach), min(width, x + reach + 1)):
                c = yy * width + xx
                for q in range(cell[c], cell[c + 1]):
                    i = order[q]
                    d2 = (pu[i] - cx) ** 2 + (pv[i] - cy) ** 2
                    if d2 <= rf2 and (best < 0 or d2 < best_d or (d2 == best_d and i < best)):
                        best = i
                        best_d = d2
        for ch in range(3):
            img[y, x, ch] = col[best, ch] if best >= 0 else background[ch]
    return img


def reconstruct(buf: DeepBuffer, meta: RefreshMetadata, path: CameraPath, t_now: float,
                params: ReconParams | None = None,
                background=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Reconstruct the ``(H, W, 3)`` linear-RGB image seen at ``t_now``."""
    p = params or ReconParams()
    basis = camera_basis(path.packed(), float(t_now))
    pu, pv, pd, src = _reproject_all(buf.data, buf.count, buf.width, buf.height, basis)
    rows = buf.data[src[:, 0], src[:, 1]]
    rec = meta.record_of_pixel[pv.astype(np.int64), pu.astype(np.int64)]
    sig_s_tile, sig_t_tile = filter_widths(meta.density, meta.g_s, meta.g_t, p)
    return _scatter(buf.width, buf.height, float(t_now), pu, pv, pd,
                    np.ascontiguousarray(rows[:, db.T]),
                    np.ascontiguousarray(rows[:, db.R:db.B + 1]),
                    sig_s_tile[rec], sig_t_tile[rec],
                    p.support, p.occlusion_band, p.occlusion_radius, p.w_floor, p.r_fallback,
                    np.asarray(background, dtype=np.float64))
