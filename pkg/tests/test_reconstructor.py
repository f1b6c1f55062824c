import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frameless import deep_buffer as db
from frameless.baselines import AdaptiveRenderer
from frameless.deep_buffer import DeepBuffer
from frameless.evaluation import ground_truth, refresh_count, rms, samples_before
from frameless.reconstructor import (
    Contribution, ReconParams, _reproject_all, filter_widths, local_filter_params,
    occlusion_reject, reconstruct, splat_weight,
)
from frameless.sampler import RefreshMetadata
from frameless.scene import (
    CameraKey, CameraPath, Scene, camera_basis, generate_sample, load_camera_path, load_scene,
)

from conftest import static_sphere

P = ReconParams()


# ---------------------------------------------------------------- filters


def test_sigma_t_upper_clamp_when_static():
    assert local_filter_params(1.0, 0.3, 0.0).sigma_t == P.sigma_t_max


def test_sigma_s_lower_clamp_when_dense():
    d = (P.c_s / P.sigma_s_min) ** 2
    assert local_filter_params(d, 0, 0).sigma_s == P.sigma_s_min
    assert local_filter_params(10 * d, 0, 0).sigma_s == P.sigma_s_min


def test_unit_density_balanced_gradients():
    p = ReconParams(c_s=1.0, c_t=0.05)
    f = local_filter_params(1.0, 2.0, 2.0, p)
    assert f.sigma_s == p.c_s
    assert f.sigma_t == pytest.approx(p.c_t)


def test_sparse_density_upper_clamp():
    assert local_filter_params(0.0, 0, 0).sigma_s == P.sigma_s_max


def test_filter_params_reject_negative():
    with pytest.raises(ValueError):
        local_filter_params(-1.0, 0, 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 50), st.floats(0, 20), st.floats(0, 20), st.floats(0, 5))
def test_sigma_t_monotone(density, g_s, g_t, d):
    f = local_filter_params(density, g_s, g_t)
    assert P.sigma_s_min <= f.sigma_s <= P.sigma_s_max
    assert P.sigma_t_min <= f.sigma_t <= P.sigma_t_max
    assert local_filter_params(density, g_s, g_t + d).sigma_t <= f.sigma_t
    assert local_filter_params(density, g_s + d, g_t).sigma_t >= f.sigma_t
    assert local_filter_params(density + d, g_s, g_t).sigma_s <= f.sigma_s


def test_temporal_emphasis():
    s_min = P.sigma_t_min
    new, old = splat_weight(0.3, 0.1, 0.01, 1.0, s_min), splat_weight(0.3, 0.1, 1.0, 1.0, s_min)
    assert new > 0
    # the bound overflows a double here, so compare in multiplied form
    assert old <= new * math.exp(-(1.0 - 0.01 ** 2) / (2 * s_min ** 2))
    for sig in (0.1, 0.3, 1.0):
        new, old = splat_weight(0, 0, 0.01, 1.0, sig), splat_weight(0, 0, 1.0, 1.0, sig)
        assert new / old == pytest.approx(math.exp((1.0 - 0.01 ** 2) / (2 * sig ** 2)), rel=1e-12)


# ---------------------------------------------------------------- occlusion


def c(depth, t, color=(1, 1, 1), u=None, v=None):
    return Contribution(depth, t, 1.0, color, u, v)


def test_single_contribution_kept():
    one = [c(3.0, 0.5)]
    assert occlusion_reject(one) == one


def test_newer_nearer_hides_older():
    old, new = c(10.0, 0.0), c(5.0, 1.0)
    assert occlusion_reject([old, new]) == [new]


def test_within_band_kept():
    old, new = c(10.05, 0.0), c(10.0, 1.0)
    assert occlusion_reject([old, new]) == [old, new]


def test_older_nearer_does_not_hide_newer():
    old, new = c(5.0, 0.0), c(10.0, 1.0)
    assert occlusion_reject([old, new]) == [old, new]


def test_equal_time_never_hides():
    a, b = c(10.0, 1.0), c(2.0, 1.0)
    assert occlusion_reject([a, b]) == [a, b]


def test_radius_limits_occluders():
    old = c(10.0, 0.0, u=4.0, v=4.0)
    near = c(5.0, 1.0, u=4.3, v=4.0)
    far = c(5.0, 1.0, u=6.0, v=4.0)
    assert occlusion_reject([old, far], radius=0.5) == [old, far]
    assert occlusion_reject([old, near], radius=0.5) == [near]
    assert occlusion_reject([old, far]) == [far]


# ---------------------------------------------------------------- reconstruction


def _buffer_with(samples, w, h, capacity=8):
    buf = DeepBuffer(w, h, capacity)
    for s in samples:
        buf.insert(s)
    return buf


def test_single_sample_exact(unit_scene, front_path):
    s = generate_sample(unit_scene, front_path, 7.3, 9.6, 0.2, 16, 16)
    buf = _buffer_with([s], 16, 16)
    for density in (0.0, 0.5, 100.0):
        img = reconstruct(buf, RefreshMetadata.uniform(16, 16, density), front_path, 0.9,
                          background=unit_scene.background)
        assert tuple(img[9, 7]) == s.color


def test_empty_buffer_is_background(front_path):
    img = reconstruct(DeepBuffer(8, 8), RefreshMetadata.uniform(8, 8, 0.0), front_path, 0.0,
                      background=(0.1, 0.2, 0.3))
    assert (img == np.array([0.1, 0.2, 0.3])).all()


def test_constant_scene_exact(front_path):
    color = (0.3, 0.61, 0.87)
    scene = Scene((static_sphere((0, 0, 0), 3.0, color),), light_direction=(0, 0, 1),
                  light_intensity=0.0, ambient=1.0, background=color)
    r = AdaptiveRenderer(scene, front_path, 24, 24, 20_000.0, seed=3)
    r.advance_to(20_000)
    img = r.display(1.0)
    assert (img == np.array(color)).all()


def _oracle(pu, pv, pd, pt, col, sig_s, sig_t, t_now, w, h, p, background):
    """For every pixel, loop over all samples; same rules as the scatter path."""
    img = np.empty((h, w, 3))
    for y in range(h):
        for x in range(w):
            cx, cy = x + 0.5, y + 0.5
            contribs = []
            for i in range(len(pu)):
                r = p.support * sig_s[i]
                if (cx - pu[i]) ** 2 + (cy - pv[i]) ** 2 <= r * r:
                    wgt = splat_weight(cx - pu[i], cy - pv[i], t_now - pt[i], sig_s[i], sig_t[i])
                    contribs.append((i, Contribution(pd[i], pt[i], wgt, tuple(col[i]), pu[i], pv[i])))
            kept = occlusion_reject([cb for _, cb in contribs], p.occlusion_band, p.occlusion_radius)
            kept_ids = {id(cb) for cb in kept}
            kept = [(i, cb) for i, cb in contribs if id(cb) in kept_ids]
            wsum = 0.0
            acc = [0.0, 0.0, 0.0]
            if kept:
                ref = kept[0][1].color
                for _, cb in kept:
                    wsum += cb.weight
                    for ch in range(3):
                        acc[ch] += cb.weight * (cb.color[ch] - ref[ch])
            if kept and wsum >= p.w_floor:
                img[y, x] = [ref[ch] + acc[ch] / wsum for ch in range(3)]
                continue
            best, best_d = -1, 0.0
            for i in range(len(pu)):
                d2 = (pu[i] - cx) ** 2 + (pv[i] - cy) ** 2
                if d2 <= p.r_fallback ** 2 and (best < 0 or d2 < best_d):
                    best, best_d = i, d2
            img[y, x] = col[best] if best >= 0 else background
    return img


def _layered_scene():
    return Scene((static_sphere((0.3, 0.2, 0.0), 1.0, (0.9, 0.2, 0.1)),
                  static_sphere((-0.6, -0.3, 1.5), 0.5, (0.1, 0.8, 0.3)),
                  static_sphere((0, 0, -8), 6.0, (0.3, 0.3, 0.9))),
                 light_direction=(0.4, 0.6, 1.0), background=(0.05, 0.05, 0.05))


@pytest.mark.parametrize("support", [3.0, 100.0])
@pytest.mark.parametrize("seed", range(6))
def test_scatter_matches_gather_oracle(seed, support):
    rng = np.random.default_rng(seed)
    w, h = int(rng.integers(4, 17)), int(rng.integers(4, 17))
    path = CameraPath((CameraKey(0.0, (0, 0, 5), (0, 0, 0)), CameraKey(1.0, (0.4, 0.1, 5), (0, 0, 0))))
    scene = _layered_scene()
    n = int(rng.integers(1, 51))
    samples = [generate_sample(scene, path, float(rng.random() * w), float(rng.random() * h),
                               float(rng.random() * 0.9), w, h) for _ in range(n)]
    buf = _buffer_with(samples, w, h, capacity=50)
    # a two-tile cut with different densities and gradients
    split = w // 2
    rec = np.zeros((h, w), dtype=np.int64)
    rec[:, split:] = 1
    meta = RefreshMetadata(np.array([[0, 0, split, h], [split, 0, w, h]]),
                           np.array([0.2, 1.5]), np.array([0.0, 3.0]),
                           np.array([0.05, 2.0]), rec)
    p = ReconParams(support=support, r_fallback=3.0)
    t_now = 1.0
    img = reconstruct(buf, meta, path, t_now, p, scene.background)

    basis = camera_basis(path.packed(), t_now)
    pu, pv, pd, src = _reproject_all(buf.data, buf.count, w, h, basis)
    rows = buf.data[src[:, 0], src[:, 1]]
    ss_tile, st_tile = filter_widths(meta.density, meta.g_s, meta.g_t, p)
    r = meta.record_of_pixel[pv.astype(int), pu.astype(int)]
    want = _oracle(pu, pv, pd, rows[:, db.T], rows[:, db.R:db.B + 1], ss_tile[r], st_tile[r],
                   t_now, w, h, p, np.array(scene.background))
    np.testing.assert_array_equal(img, want)


def test_reconstruct_deterministic(unit_scene, front_path):
    r = AdaptiveRenderer(unit_scene, front_path, 32, 32, 30_000.0, seed=4)
    r.advance_to(15_000)
    a = r.display(0.5)
    b = r.display(0.5)
    assert a.tobytes() == b.tobytes()
    assert np.isfinite(a).all()


def test_edge_scene_accuracy():
    scene, path = load_scene("edge"), load_camera_path("edge")
    w = h = 128
    budget = 4.0 * w * h
    r = AdaptiveRenderer(scene, path, w, h, budget, seed=0)
    r.advance_to(samples_before(budget, 120, 60))
    err = rms(r.display(2.0), ground_truth(scene, path, 2.0, w, h, ss=4))
    assert err <= 0.03


def test_static_sharpening_after_motion_stop():
    scene, path = load_scene("stop"), load_camera_path("stop")
    w = h = 128
    budget, hz = 400_000.0, 60
    truth = ground_truth(scene, path, 2.0, w, h, ss=4)
    r = AdaptiveRenderer(scene, path, w, h, budget, seed=0)
    errs = []
    for k in range(120, refresh_count(4.0, hz) + 1, 15):
        r.advance_to(samples_before(budget, k, hz))
        errs.append(rms(r.display(k / hz), truth))
    for a, b in zip(errs, errs[1:]):
        assert b <= a * 1.05
    assert errs[-1] < errs[0]
