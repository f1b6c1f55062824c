import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frameless.errors import ConfigError
from frameless.scene import (
    D_FAR, CameraKey, CameraPath, Keyframe, Ray, Scene, Sphere, bundled_assets, camera_at,
    generate_sample, load_camera_path, load_scene, parse_camera_path, parse_scene, primary_ray,
    trace,
)

from conftest import static_sphere


def test_camera_clamped_before_first_key():
    p = CameraPath((CameraKey(1.0, (0, 0, 5), (0, 0, 0)), CameraKey(2.0, (3, 0, 5), (0, 0, 0))))
    assert camera_at(p, -4.0).eye == (0.0, 0.0, 5.0)
    assert camera_at(p, 9.0).eye == (3.0, 0.0, 5.0)


def test_camera_linear_midpoint():
    p = CameraPath((CameraKey(0.0, (0, 0, 0), (0, 0, -1)), CameraKey(1.0, (2, 0, 0), (2, 0, -1))))
    assert camera_at(p, 0.5).eye == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)


def test_camera_exact_key():
    p = CameraPath((CameraKey(0.0, (0, 1, 0), (0, 0, -1), vfov=30),
                    CameraKey(1.0, (2, 0, 0), (2, 0, -1), vfov=60)))
    c = camera_at(p, 1.0)
    assert c.eye == (2.0, 0.0, 0.0) and c.vfov == 60.0


def test_camera_up_orthonormal():
    p = CameraPath.still((1, 2, 3), (0, 0, 0), up=(0.3, 1.0, 0.1))
    c = camera_at(p, 0.0)
    f, r, u = map(np.array, (c.forward, c.right, c.up))
    for a in (f, r, u):
        assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)
    assert abs(f @ r) < 1e-12 and abs(f @ u) < 1e-12 and abs(r @ u) < 1e-12


def test_camera_path_validation():
    with pytest.raises(ConfigError):
        CameraPath(())
    with pytest.raises(ConfigError):
        CameraPath.still((0, 0, 0), (0, 0, 0))
    with pytest.raises(ConfigError):
        CameraPath.still((0, 0, 1), (0, 0, 0), vfov=180)
    with pytest.raises(ConfigError):
        CameraPath((CameraKey(1.0, (0, 0, 1), (0, 0, 0)), CameraKey(1.0, (0, 0, 2), (0, 0, 0))))


def test_trace_unit_sphere(unit_scene):
    h = trace(unit_scene, Ray((0, 0, 5), (0, 0, -1)), 0.0)
    assert not h.is_background
    assert h.depth == pytest.approx(4.0, abs=1e-12)
    assert h.world_point == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)


def test_trace_miss(unit_scene):
    h = trace(unit_scene, Ray((0, 0, 5), (0, 0, 1)), 0.0)
    assert h.is_background and h.depth == D_FAR
    assert h.color == unit_scene.background


def test_trace_moving_center():
    s = Sphere(1.0, (1, 1, 1), (Keyframe(0.0, (0, 0, 0)), Keyframe(1.0, (1, 0, 0))))
    sc = Scene((s,))
    ray = Ray((0.5, 0, 5), (0, 0, -1))
    h0, h1 = trace(sc, ray, 0.0), trace(sc, ray, 1.0)
    # x offset 0.5 from the center either way, so the hit height is the same
    assert h0.world_point[2] == pytest.approx(math.sqrt(0.75))
    assert h1.world_point[2] == pytest.approx(math.sqrt(0.75))
    h = trace(sc, Ray((1.0, 0, 5), (0, 0, -1)), 1.0)
    assert h.world_point == pytest.approx((1.0, 0.0, 1.0))


def test_shading_formula(unit_scene):
    # normal (0,0,1) parallel to the light: diffuse = clamp(0.2 + 0.8) = 1
    h = trace(unit_scene, Ray((0, 0, 5), (0, 0, -1)), 0.0)
    assert h.color == pytest.approx((0.8, 0.3, 0.2))


def _march(o, d, center, radius, step=1e-3, far=40.0):
    ts = np.arange(0.0, far, step)
    p = o[None, :] + ts[:, None] * d[None, :]
    inside = np.linalg.norm(p - center, axis=1) <= radius
    if not inside.any():
        return None
    k = int(np.argmax(inside))
    lo, hi = ts[max(k - 1, 0)], ts[k]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(o + mid * d - center) <= radius:
            hi = mid
        else:
            lo = mid
    return hi


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.3, 2.0),
       st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_intersection_matches_march(cx, cy, cz, r, dx, dy):
    center = np.array([cx, cy, cz])
    o = np.array([0.0, 0.0, 8.0])
    d = np.array([dx, dy, -1.0])
    d /= np.linalg.norm(d)
    h = trace(Scene((static_sphere(tuple(center), r),)), Ray(tuple(o), tuple(d)), 0.0)
    ref = _march(o, d, center, r)
    if ref is None:
        # a grazing hit can fall between march steps; only a real miss may disagree
        assert h.is_background or h.depth == pytest.approx(
            -(o - center) @ d, abs=2e-3)
    else:
        assert not h.is_background
        assert h.depth == pytest.approx(ref, abs=1e-3)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_shading_bounds(amb_frac, ks_frac, ks, lx, ly, lz):
    if lx * lx + ly * ly + lz * lz < 1e-6:
        return
    amb = amb_frac
    li = 1.0 - amb
    albedo = (1.0 - ks, (1.0 - ks) * ks_frac, 0.0)
    sc = Scene((static_sphere((0, 0, 0), 1.0, albedo, ks),), light_direction=(lx, ly, lz),
               light_intensity=li, ambient=amb)
    p = CameraPath.still((0, 0, 3), (0, 0, 0))
    for u in np.linspace(2.0, 30.0, 8):
        for v in np.linspace(2.0, 30.0, 8):
            c = generate_sample(sc, p, u, v, 0.0, 32, 32).color
            assert all(-1e-12 <= x <= 1.0 + 1e-12 for x in c)


def test_static_scene_time_invariant(unit_scene):
    ray = Ray((0.2, 0.1, 5), (0, 0, -1))
    assert trace(unit_scene, ray, 0.0) == trace(unit_scene, ray, 123.456)


def test_ray_direction_is_unit():
    r = Ray((0, 0, 0), (3, 4, 0))
    assert math.hypot(*r.direction) == pytest.approx(1.0, abs=1e-15)


def test_generate_sample_center_hits_sphere(unit_scene, front_path):
    s = generate_sample(unit_scene, front_path, 16.0, 16.0, 0.0, 32, 32)
    assert s.color == pytest.approx((0.8, 0.3, 0.2))
    assert s.depth == pytest.approx(4.0)
    assert not s.is_background


def test_generate_sample_empty_scene(front_path):
    s = generate_sample(Scene((), background=(0.5, 0.5, 0.5)), front_path, 3.2, 7.9, 0.1, 32, 32)
    assert s.is_background and s.color == (0.5, 0.5, 0.5) and s.depth == D_FAR


def test_generate_sample_deterministic(unit_scene, front_path):
    a = generate_sample(unit_scene, front_path, 12.3, 4.5, 0.7, 32, 32)
    b = generate_sample(unit_scene, front_path, 12.3, 4.5, 0.7, 32, 32)
    assert a == b


def test_generate_sample_bounds(unit_scene, front_path):
    with pytest.raises(ValueError):
        generate_sample(unit_scene, front_path, 32.0, 1.0, 0.0, 32, 32)
    with pytest.raises(ValueError):
        generate_sample(unit_scene, front_path, 1.0, -0.1, 0.0, 32, 32)


def test_primary_ray_through_center(front_path):
    r = primary_ray(camera_at(front_path, 0.0), 64, 48, 32.0, 24.0)
    assert r.direction == pytest.approx((0.0, 0.0, -1.0), abs=1e-15)


def test_parse_scene_roundtrip():
    sc = parse_scene("""
        light dir=0,1,0 intensity=0.5 ambient=0.25   # comment
        background 0.1,0.2,0.3
        sphere r=2 albedo=1,0,0 spec=0.1 key t=0 c=0,0,0 key t=1 c=1,2,3
        triangle v0=0,0,0 v1=1,0,0 v2=0,1,0 albedo=0.5,0.5,0.5
    """)
    assert sc.light_direction == (0.0, 1.0, 0.0)
    assert sc.light_intensity == 0.5 and sc.ambient == 0.25
    assert sc.background == (0.1, 0.2, 0.3)
    (s,) = sc.spheres
    assert s.radius == 2 and s.specular == 0.1 and s.keys[1] == Keyframe(1.0, (1.0, 2.0, 3.0))
    assert len(sc.triangles) == 1


@pytest.mark.parametrize("text", [
    "sphere albedo=1,1,1 key t=0 c=0,0,0",
    "sphere r=1 key t=0 c=0,0",
    "sphere r=1 key t=1 c=0,0,0 key t=0 c=1,1,1",
    "cube r=1",
    "background 1,1",
    "light dir=0,0,0",
])
def test_parse_scene_errors(text):
    with pytest.raises(ConfigError):
        parse_scene(text)


def test_parse_camera_path():
    p = parse_camera_path("t=0 eye=0,0,5 look=0,0,0 up=0,1,0 vfov=40\n"
                          "t=2 eye=1,0,5 look=0,0,0\n")
    assert len(p.keyframes) == 2 and p.keyframes[0].vfov == 40.0
    with pytest.raises(ConfigError):
        parse_camera_path("t=0 eye=0,0,5\n")


def test_bundled_assets_load():
    names = bundled_assets()
    for n in ("orbit", "flyby", "stop"):
        assert n in names
        load_scene(n), load_camera_path(n)
    assert load_scene("orbit").is_static
    assert not load_scene("flyby").is_static
    assert len(load_camera_path("flyby").keyframes) == 1
    assert load_camera_path("stop").keyframes[-1].t == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        load_scene("no-such-scene")
