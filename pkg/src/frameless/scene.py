"""Animated sphere scenes, keyframed cameras and a small deterministic ray tracer.

Everything that runs per ray is a numba kernel operating on packed arrays
(see :meth:`Scene.packed` and :meth:`CameraPath.packed`); the dataclasses and
wrappers here are the Python-facing surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError

D_FAR = 1.0e6
SPECULAR_EXPONENT = 32.0
_EPS_HIT = 1e-9

Vec3 = tuple[float, float, float]
Color = tuple[float, float, float]


@dataclass(frozen=True)
class Keyframe:
    t: float
    center: Vec3


@dataclass(frozen=True)
class Sphere:
    radius: float
    albedo: Color
    keys: tuple[Keyframe, ...]
    specular: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"sphere radius must be positive, got {self.radius}")
        if not self.keys:
            raise ConfigError("sphere needs at least one center keyframe")
        ts = [k.t for k in self.keys]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("sphere keyframe times must be strictly increasing")


@dataclass(frozen=True)
class Triangle:
    """Static triangle; an optional extra primitive handy for straight edges."""

    v0: Vec3
    v1: Vec3
    v2: Vec3
    albedo: Color
    specular: float = 0.0


@dataclass(frozen=True)
class Scene:
    spheres: tuple[Sphere, ...] = ()
    triangles: tuple[Triangle, ...] = ()
    light_direction: Vec3 = (0.0, 0.0, 1.0)
    light_intensity: float = 0.8
    ambient: float = 0.2
    background: Color = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "light_direction", _normalize(self.light_direction))
        if self.light_intensity < 0 or self.ambient < 0:
            raise ConfigError("light intensity and ambient must be nonnegative")
        if not all(math.isfinite(c) for c in self.background):
            raise ConfigError("background color must be finite")

    @property
    def is_static(self) -> bool:
        return all(len(s.keys) == 1 for s in self.spheres)

    def packed(self) -> "PackedScene":
        ns = len(self.spheres)
        radius = np.array([s.radius for s in self.spheres], dtype=np.float64)
        albedo = np.array([s.albedo for s in self.spheres], dtype=np.float64).reshape(ns, 3)
        spec = np.array([s.specular for s in self.spheres], dtype=np.float64)
        counts = np.array([len(s.keys) for s in self.spheres], dtype=np.int64)
        offsets = np.zeros(ns, dtype=np.int64)
        if ns:
            offsets[1:] = np.cumsum(counts)[:-1]
        keys = [k for s in self.spheres for k in s.keys]
        key_t = np.array([k.t for k in keys], dtype=np.float64)
        key_c = np.array([k.center for k in keys], dtype=np.float64).reshape(len(keys), 3)
        nt = len(self.triangles)
        tri_v = np.array(
            [[t.v0, t.v1, t.v2] for t in self.triangles], dtype=np.float64
        ).reshape(nt, 3, 3)
        tri_albedo = np.array([t.albedo for t in self.triangles], dtype=np.float64).reshape(nt, 3)
        tri_spec = np.array([t.specular for t in self.triangles], dtype=np.float64)
        env = np.array(
            [*self.light_direction, self.light_intensity, self.ambient, *self.background],
            dtype=np.float64,
        )
        return PackedScene(radius, albedo, spec, offsets, counts, key_t, key_c,
                           tri_v, tri_albedo, tri_spec, env)


class PackedScene(NamedTuple):
    radius: np.ndarray
    albedo: np.ndarray
    spec: np.ndarray
    key_offset: np.ndarray
    key_count: np.ndarray
    key_t: np.ndarray
    key_c: np.ndarray
    tri_v: np.ndarray
    tri_albedo: np.ndarray
    tri_spec: np.ndarray
    env: np.ndarray  # light dir (3), intensity, ambient, background (3)


@dataclass(frozen=True)
class CameraKey:
    t: float
    eye: Vec3
    look_at: Vec3
    up: Vec3 = (0.0, 1.0, 0.0)
    vfov: float = 45.0


@dataclass(frozen=True)
class CameraPath:
    keyframes: tuple[CameraKey, ...]

    def __post_init__(self):
        if not self.keyframes:
            raise ConfigError("camera path is empty")
        ts = [k.t for k in self.keyframes]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("camera keyframe times must be strictly increasing")
        for k in self.keyframes:
            if not 0.0 < k.vfov < 180.0:
                raise ConfigError(f"vfov must lie in (0, 180), got {k.vfov}")
            if math.dist(k.eye, k.look_at) <= 0.0:
                raise ConfigError("camera eye and look_at coincide")

    @classmethod
    def still(cls, eye: Vec3, look_at: Vec3, up: Vec3 = (0.0, 1.0, 0.0), vfov: float = 45.0):
        return cls((CameraKey(0.0, eye, look_at, up, vfov),))

    def packed(self) -> "PackedCamera":
        ks = self.keyframes
        return PackedCamera(
            np.array([k.t for k in ks], dtype=np.float64),
            np.array([k.eye for k in ks], dtype=np.float64),
            np.array([k.look_at for k in ks], dtype=np.float64),
            np.array([k.up for k in ks], dtype=np.float64),
            np.array([k.vfov for k in ks], dtype=np.float64),
        )


class PackedCamera(NamedTuple):
    t: np.ndarray
    eye: np.ndarray
    look: np.ndarray
    up: np.ndarray
    vfov: np.ndarray


@dataclass(frozen=True)
class Camera:
    """An orthonormal pinhole camera frame at one instant."""

    eye: Vec3
    look_at: Vec3
    forward: Vec3
    right: Vec3
    up: Vec3
    vfov: float

    def _basis(self) -> np.ndarray:
        b = np.zeros((5, 3))
        b[0], b[1], b[2], b[3] = self.eye, self.forward, self.right, self.up
        b[4, 0] = math.tan(math.radians(self.vfov) / 2.0)
        return b


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        object.__setattr__(self, "direction", _normalize(self.direction))


@dataclass(frozen=True)
class Hit:
    color: Color
    depth: float
    world_point: Vec3
    is_background: bool


def _normalize(v: Sequence[float]) -> Vec3:
    n = math.sqrt(sum(c * c for c in v))
    if not n > 0:
        raise ConfigError(f"cannot normalize zero vector {tuple(v)}")
    return (v[0] / n, v[1] / n, v[2] / n)


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _segment(ts, t):
    """Bracketing keyframe index and blend weight, clamped at both ends."""
    n = ts.shape[0]
    if n == 1 or t <= ts[0]:
        return 0, 0.0
    if t >= ts[n - 1]:
        return n - 1, 0.0
    i = np.searchsorted(ts, t, side="right") - 1
    return i, (t - ts[i]) / (ts[i + 1] - ts[i])


@njit(cache=True)
def camera_basis_into(cam, t, out):
    """Rows of ``out``: eye, forward, right, up, (tan(vfov/2), 0, 0)."""
    ts, eyes, looks, ups, vfovs = cam
    i, a = _segment(ts, t)
    j = min(i + 1, ts.shape[0] - 1)
    b = 1.0 - a
    ex = b * eyes[i, 0] + a * eyes[j, 0]
    ey = b * eyes[i, 1] + a * eyes[j, 1]
    ez = b * eyes[i, 2] + a * eyes[j, 2]
    fx = b * looks[i, 0] + a * looks[j, 0] - ex
    fy = b * looks[i, 1] + a * looks[j, 1] - ey
    fz = b * looks[i, 2] + a * looks[j, 2] - ez
    ux = b * ups[i, 0] + a * ups[j, 0]
    uy = b * ups[i, 1] + a * ups[j, 1]
    uz = b * ups[i, 2] + a * ups[j, 2]
    vfov = b * vfovs[i] + a * vfovs[j]
    n = math.sqrt(fx * fx + fy * fy + fz * fz)
    fx, fy, fz = fx / n, fy / n, fz / n
    rx = fy * uz - fz * uy
    ry = fz * ux - fx * uz
    rz = fx * uy - fy * ux
    n = math.sqrt(rx * rx + ry * ry + rz * rz)
    rx, ry, rz = rx / n, ry / n, rz / n
    out[0, 0], out[0, 1], out[0, 2] = ex, ey, ez
    out[1, 0], out[1, 1], out[1, 2] = fx, fy, fz
    out[2, 0], out[2, 1], out[2, 2] = rx, ry, rz
    out[3, 0] = ry * fz - rz * fy
    out[3, 1] = rz * fx - rx * fz
    out[3, 2] = rx * fy - ry * fx
    out[4, 0] = math.tan(math.radians(vfov) * 0.5)
    out[4, 1] = 0.0
    out[4, 2] = 0.0
    return out


@njit(cache=True)
def camera_basis(cam, t):
    return camera_basis_into(cam, t, np.empty((5, 3)))


@njit(cache=True)
def ray_direction(basis, width, height, u, v):
    th = basis[4, 0]
    aspect = width / height
    x = (2.0 * u / width - 1.0) * th * aspect
    y = (1.0 - 2.0 * v / height) * th
    dx = basis[1, 0] + x * basis[2, 0] + y * basis[3, 0]
    dy = basis[1, 1] + x * basis[2, 1] + y * basis[3, 1]
    dz = basis[1, 2] + x * basis[2, 2] + y * basis[3, 2]
    n = math.sqrt(dx * dx + dy * dy + dz * dz)
    return dx / n, dy / n, dz / n


@njit(cache=True)
def project_point(basis, width, height, px, py, pz):
    """World point to (visible, u, v, distance) for the camera in ``basis``."""
    dx = px - basis[0, 0]
    dy = py - basis[0, 1]
    dz = pz - basis[0, 2]
    z = dx * basis[1, 0] + dy * basis[1, 1] + dz * basis[1, 2]
    if z <= 0.0:
        return False, 0.0, 0.0, 0.0
    x = (dx * basis[2, 0] + dy * basis[2, 1] + dz * basis[2, 2]) / z
    y = (dx * basis[3, 0] + dy * basis[3, 1] + dz * basis[3, 2]) / z
    th = basis[4, 0]
    u = (x / (th * (width / height)) + 1.0) * 0.5 * width
    v = (1.0 - y / th) * 0.5 * height
    if not (0.0 <= u < width and 0.0 <= v < height):
        return False, u, v, 0.0
    return True, u, v, math.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True)
def sphere_center(scene, k, t):
    off = scene.key_offset[k]
    cnt = scene.key_count[k]
    ts = scene.key_t[off:off + cnt]
    i, a = _segment(ts, t)
    j = min(i + 1, cnt - 1)
    c0 = scene.key_c[off + i]
    c1 = scene.key_c[off + j]
    return (
        (1.0 - a) * c0[0] + a * c1[0],
        (1.0 - a) * c0[1] + a * c1[1],
        (1.0 - a) * c0[2] + a * c1[2],
    )


@njit(cache=True)
def trace_ray(scene, ox, oy, oz, dx, dy, dz, t):
    """Returns (is_background, depth, r, g, b, wx, wy, wz)."""
    best = D_FAR
    kind = -1
    idx = -1
    nx = ny = nz = 0.0
    for k in range(scene.radius.shape[0]):
        cx, cy, cz = sphere_center(scene, k, t)
        rad = scene.radius[k]
        qx, qy, qz = ox - cx, oy - cy, oz - cz
        b = qx * dx + qy * dy + qz * dz
        c = qx * qx + qy * qy + qz * qz - rad * rad
        disc = b * b - c
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        s = -b - sq
        if s <= _EPS_HIT:
            s = -b + sq
        if _EPS_HIT < s < best:
            best = s
            kind = 0
            idx = k
            nx = (ox + s * dx - cx) / rad
            ny = (oy + s * dy - cy) / rad
            nz = (oz + s * dz - cz) / rad
    for k in range(scene.tri_v.shape[0]):
        v0 = scene.tri_v[k, 0]
        e1x = scene.tri_v[k, 1, 0] - v0[0]
        e1y = scene.tri_v[k, 1, 1] - v0[1]
        e1z = scene.tri_v[k, 1, 2] - v0[2]
        e2x = scene.tri_v[k, 2, 0] - v0[0]
        e2y = scene.tri_v[k, 2, 1] - v0[1]
        e2z = scene.tri_v[k, 2, 2] - v0[2]
        px = dy * e2z - dz * e2y
        py = dz * e2x - dx * e2z
        pz = dx * e2y - dy * e2x
        det = e1x * px + e1y * py + e1z * pz
        if abs(det) < 1e-14:
            continue
        inv = 1.0 / det
        sx, sy, sz = ox - v0[0], oy - v0[1], oz - v0[2]
        bu = (sx * px + sy * py + sz * pz) * inv
        if bu < 0.0 or bu > 1.0:
            continue
        qx = sy * e1z - sz * e1y
        qy = sz * e1x - sx * e1z
        qz = sx * e1y - sy * e1x
        bv = (dx * qx + dy * qy + dz * qz) * inv
        if bv < 0.0 or bu + bv > 1.0:
            continue
        s = (e2x * qx + e2y * qy + e2z * qz) * inv
        if _EPS_HIT < s < best:
            best = s
            kind = 1
            idx = k
            fx = e1y * e2z - e1z * e2y
            fy = e1z * e2x - e1x * e2z
            fz = e1x * e2y - e1y * e2x
            fn = math.sqrt(fx * fx + fy * fy + fz * fz)
            sgn = -1.0 if fx * dx + fy * dy + fz * dz > 0.0 else 1.0
            nx, ny, nz = sgn * fx / fn, sgn * fy / fn, sgn * fz / fn
    env = scene.env
    wx, wy, wz = ox + best * dx, oy + best * dy, oz + best * dz
    if kind < 0:
        return True, D_FAR, env[5], env[6], env[7], wx, wy, wz
    if kind == 0:
        al = scene.albedo[idx]
        ks = scene.spec[idx]
    else:
        al = scene.tri_albedo[idx]
        ks = scene.tri_spec[idx]
    lx, ly, lz, li, amb = env[0], env[1], env[2], env[3], env[4]
    ndl = nx * lx + ny * ly + nz * lz
    diffuse = min(1.0, max(0.0, amb + li * max(0.0, ndl)))
    spec = 0.0
    if ks > 0.0 and ndl > 0.0:
        rx = 2.0 * ndl * nx - lx
        ry = 2.0 * ndl * ny - ly
        rz = 2.0 * ndl * nz - lz
        rv = -(rx * dx + ry * dy + rz * dz)
        if rv > 0.0:
            spec = ks * rv ** SPECULAR_EXPONENT * li
    return (False, best, diffuse * al[0] + spec, diffuse * al[1] + spec,
            diffuse * al[2] + spec, wx, wy, wz)


@njit(cache=True)
def trace_pixel(scene, basis, width, height, u, v, t):
    dx, dy, dz = ray_direction(basis, width, height, u, v)
    return trace_ray(scene, basis[0, 0], basis[0, 1], basis[0, 2], dx, dy, dz, t)


@njit(cache=True)
def render_image(scene, cam, width, height, t_scene, t_camera, ss):
    """Box average of ss x ss regular sub-samples per pixel.

    Sums offsets from the first sub-sample, so uniform pixels come out exact.
    """
    basis = camera_basis(cam, t_camera)
    img = np.zeros((height, width, 3))
    n = float(ss * ss)
    for y in range(height):
        for x in range(width):
            r0 = g0 = b0 = 0.0
            r = g = b = 0.0
            for sy in range(ss):
                for sx in range(ss):
                    res = trace_pixel(scene, basis, width, height,
                                      x + (sx + 0.5) / ss, y + (sy + 0.5) / ss, t_scene)
                    if sx == 0 and sy == 0:
                        r0, g0, b0 = res[2], res[3], res[4]
                    r += res[2] - r0
                    g += res[3] - g0
                    b += res[4] - b0
            img[y, x, 0] = r0 + r / n
            img[y, x, 1] = g0 + g / n
            img[y, x, 2] = b0 + b / n
    return img


# ---------------------------------------------------------------- Python surface


def camera_at(path: CameraPath, t: float) -> Camera:
    """Piecewise-linear camera at time ``t``, held constant outside the keyframes."""
    packed = path.packed()
    b = camera_basis(packed, float(t))

    def vec(row):
        return (float(row[0]), float(row[1]), float(row[2]))

    i, a = _segment(packed.t, float(t))
    j = min(i + 1, len(path.keyframes) - 1)
    k0, k1 = path.keyframes[i], path.keyframes[j]
    if a == 0.0:
        look, vfov = k0.look_at, k0.vfov
    else:
        look = tuple((1 - a) * p + a * q for p, q in zip(k0.look_at, k1.look_at))
        vfov = (1 - a) * k0.vfov + a * k1.vfov
    return Camera(vec(b[0]), vec(look), vec(b[1]), vec(b[2]), vec(b[3]), float(vfov))


def trace(scene: Scene, ray: Ray, t: float) -> Hit:
    res = trace_ray(scene.packed(), *ray.origin, *ray.direction, float(t))
    return Hit(color=(res[2], res[3], res[4]), depth=float(res[1]),
               world_point=(res[5], res[6], res[7]), is_background=bool(res[0]))


def primary_ray(camera: Camera, width: int, height: int, u: float, v: float) -> Ray:
    d = ray_direction(camera._basis(), float(width), float(height), float(u), float(v))
    return Ray(camera.eye, d)


@dataclass(frozen=True)
class Sample:
    """One timestamped measurement of the scene at a continuous image location."""

    u: float
    v: float
    color: Color
    depth: float
    world_point: Vec3
    t: float
    is_background: bool = False


def generate_sample(scene: Scene, path: CameraPath, u: float, v: float, t: float,
                    width: int, height: int) -> Sample:
    """Trace the pinhole primary ray through image location (u, v) at time t."""
    if not (0.0 <= u < width and 0.0 <= v < height):
        raise ValueError(f"sample location ({u}, {v}) outside {width}x{height} image")
    basis = camera_basis(path.packed(), float(t))
    res = trace_pixel(scene.packed(), basis, float(width), float(height), float(u), float(v), float(t))
    return Sample(float(u), float(v), (res[2], res[3], res[4]), res[1],
                  (res[5], res[6], res[7]), float(t), bool(res[0]))


# ---------------------------------------------------------------- file formats


def _floats(text: str, n: int, where: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise ConfigError(f"{where}: expected {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{where}: bad number in {text!r}") from None


def _kv(token: str, where: str) -> tuple[str, str]:
    key, sep, val = token.partition("=")
    if not sep:
        raise ConfigError(f"{where}: expected key=value, got {token!r}")
    return key, val


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_scene(text: str, source: str = "<scene>") -> Scene:
    spheres: list[Sphere] = []
    triangles: list[Triangle] = []
    light: dict = {}
    background = (0.0, 0.0, 0.0)
    for lineno, tokens in _lines(text):
        where = f"{source}:{lineno}"
        head, rest = tokens[0], tokens[1:]
        if head == "sphere":
            props: dict[str, str] = {}
            keys: list[Keyframe] = []
            cur: dict[str, str] | None = None
            for tok in rest:
                if tok == "key":
                    if cur is not None:
                        keys.append(_keyframe(cur, where))
                    cur = {}
                    continue
                k, v = _kv(tok, where)
                (props if cur is None else cur)[k] = v
            if cur is not None:
                keys.append(_keyframe(cur, where))
            unknown = set(props) - {"r", "albedo", "spec"}
            if unknown or "r" not in props:
                raise ConfigError(f"{where}: sphere needs r= (unknown: {sorted(unknown)})")
            try:
                spheres.append(Sphere(
                    radius=_floats(props["r"], 1, where)[0],
                    albedo=_floats(props.get("albedo", "1,1,1"), 3, where),
                    specular=_floats(props.get("spec", "0"), 1, where)[0],
                    keys=tuple(keys),
                ))
            except ConfigError as e:
                raise ConfigError(f"{where}: {e}") from None
        elif head == "triangle":
            props = dict(_kv(tok, where) for tok in rest)
            if not {"v0", "v1", "v2"} <= set(props) or set(props) - {"v0", "v1", "v2", "albedo", "spec"}:
                raise ConfigError(f"{where}: triangle needs exactly v0=, v1=, v2= [albedo=] [spec=]")
            triangles.append(Triangle(
                *(_floats(props[k], 3, where) for k in ("v0", "v1", "v2")),
                albedo=_floats(props.get("albedo", "1,1,1"), 3, where),
                specular=_floats(props.get("spec", "0"), 1, where)[0],
            ))
        elif head == "light":
            props = dict(_kv(tok, where) for tok in rest)
            if set(props) - {"dir", "intensity", "ambient"}:
                raise ConfigError(f"{where}: unknown light property")
            if "dir" in props:
                light["light_direction"] = _floats(props["dir"], 3, where)
            if "intensity" in props:
                light["light_intensity"] = _floats(props["intensity"], 1, where)[0]
            if "ambient" in props:
                light["ambient"] = _floats(props["ambient"], 1, where)[0]
        elif head == "background":
            if len(rest) != 1:
                raise ConfigError(f"{where}: background takes one r,g,b value")
            background = _floats(rest[0], 3, where)
        else:
            raise ConfigError(f"{where}: unknown directive {head!r}")
    return Scene(tuple(spheres), tuple(triangles), background=background, **light)


def _keyframe(props: dict[str, str], where: str) -> Keyframe:
    if set(props) != {"t", "c"}:
        raise ConfigError(f"{where}: keyframe needs exactly t= and c=")
    return Keyframe(_floats(props["t"], 1, where)[0], _floats(props["c"], 3, where))


def parse_camera_path(text: str, source: str = "<path>") -> CameraPath:
    keys = []
    for lineno, tokens in _lines(text):
        where = f"{source}:{lineno}"
        props = dict(_kv(tok, where) for tok in tokens)
        if not {"t", "eye", "look"} <= set(props) or set(props) - {"t", "eye", "look", "up", "vfov"}:
            raise ConfigError(f"{where}: keyframe needs t=, eye=, look= [up=] [vfov=]")
        keys.append(CameraKey(
            t=_floats(props["t"], 1, where)[0],
            eye=_floats(props["eye"], 3, where),
            look_at=_floats(props["look"], 3, where),
            up=_floats(props.get("up", "0,1,0"), 3, where),
            vfov=_floats(props.get("vfov", "45"), 1, where)[0],
        ))
    try:
        return CameraPath(tuple(keys))
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from None


ASSET_DIR = Path(__file__).parent / "assets"


def bundled_assets() -> list[str]:
    return sorted(p.stem for p in ASSET_DIR.glob("*.scene"))


def load_scene(ref: str | Path) -> Scene:
    """Load a scene file, or a bundled scene by name (``orbit``, ``flyby``, ...)."""
    p = _resolve(ref, ".scene")
    return parse_scene(p.read_text(encoding="utf-8"), str(p))


def load_camera_path(ref: str | Path) -> CameraPath:
    p = _resolve(ref, ".path")
    return parse_camera_path(p.read_text(encoding="utf-8"), str(p))


def _resolve(ref: str | Path, suffix: str) -> Path:
    p = Path(ref)
    if p.exists():
        return p
    bundled = ASSET_DIR / f"{ref}{suffix}"
    if bundled.exists():
        return bundled
    raise ConfigError(f"no such file or bundled asset: {ref}")
