"""Ground truth, RMS error, response latency and the three-way comparison run."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .baselines import MODES, make_renderer
from .scene import CameraPath, Scene, render_image

log = logging.getLogger(__name__)


def ground_truth(scene: Scene, path: CameraPath, t: float, width: int, height: int,
                 ss: int = 4) -> np.ndarray:
    """Box average of an ss x ss regular grid per pixel, scene and camera both at ``t``."""
    if ss < 1:
        raise ValueError("supersampling factor must be >= 1")
    return render_image(scene.packed(), path.packed(), width, height, float(t), float(t), int(ss))


def rms(a: np.ndarray, b: np.ndarray) -> float:
    """Root-mean-square difference over pixels and channels of clamped images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    d = np.abs(np.clip(a, 0.0, 1.0) - np.clip(b, 0.0, 1.0))
    # scale by the largest difference so tiny ones cannot underflow to zero
    m = d.max(initial=0.0)
    if m == 0.0:
        return 0.0
    d /= m
    return float(m * np.sqrt(np.mean(d * d)))


def samples_before(budget: float, k: int, hz: float) -> int:
    """Samples consumed before refresh k: floor(S * k / Hz), computed exactly."""
    return math.floor(Fraction(budget) * k / Fraction(hz))


def refresh_count(duration: float, hz: float) -> int:
    return math.floor(Fraction(duration) * Fraction(hz) + Fraction(1, 10**9))


def response_latency(times, frames, event_t: float, pre_truth: np.ndarray, post_truth: np.ndarray,
                     threshold: float = 0.05, fraction: float = 0.9) -> float | None:
    """Delay until ``fraction`` of the pixels the event changes have visibly changed.

    ``frames[i]`` is what was displayed at ``times[i]``. A pixel counts as
    affected when pre- and post-event truth differ by more than ``threshold``
    in some channel, and as changed when the display differs from the last
    pre-event display by more than ``threshold``. Returns None if the event
    affects no pixel or the fraction is never reached.
    """
    affected = np.abs(np.asarray(post_truth) - np.asarray(pre_truth)).max(axis=2) > threshold
    n_aff = int(affected.sum())
    if n_aff == 0:
        return None
    before = [i for i, t in enumerate(times) if t <= event_t]
    ref = np.asarray(frames[before[-1] if before else 0])
    for t, img in zip(times, frames):
        if t <= event_t:
            continue
        changed = np.abs(np.asarray(img) - ref).max(axis=2) > threshold
        if (changed & affected).sum() >= fraction * n_aff:
            return float(t - event_t)
    return None


@dataclass
class TraceRow:
    refresh_index: int
    t: float
    mode: str
    rms: float


def dynamic_mask(now: np.ndarray, before: np.ndarray, threshold: float = 0.02) -> np.ndarray:
    """Pixels whose ground truth changed by more than ``threshold`` in some channel."""
    return np.abs(np.asarray(now) - np.asarray(before)).max(axis=2) > threshold


def masked_rms(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    d = np.clip(a, 0.0, 1.0)[mask] - np.clip(b, 0.0, 1.0)[mask]
    return float(np.sqrt(np.mean(d * d)))


@dataclass
class ComparisonReport:
    mean_rms: dict[str, float]
    ratios: dict[str, float]
    trace_calls: dict[str, int]
    config: dict
    seed: int
    # same statistics restricted to pixels whose truth changed over the
    # preceding window; empty when nothing in the run moves
    dynamic_rms: dict[str, float] = field(default_factory=dict)
    dynamic_ratios: dict[str, float] = field(default_factory=dict)

    def summary(self) -> str:
        lines = [f"seed        {self.seed}"]
        for k in ("scene", "camera_path", "width", "height", "budget", "refresh_hz", "duration", "ss"):
            if k in self.config:
                lines.append(f"{k:<12}{self.config[k]}")
        lines.append("")
        lines.append(f"{'mode':<12}{'mean_rms':>12}{'traces':>12}")
        for m, v in self.mean_rms.items():
            lines.append(f"{m:<12}{v:>12.6f}{self.trace_calls[m]:>12d}")
        if self.ratios:
            lines.append("")
            for name, r in self.ratios.items():
                lines.append(f"{name:<22}{r:>10.3f}")
        if self.dynamic_rms:
            lines.append("")
            lines.append(f"{'dynamic':<12}{'mean_rms':>12}")
            for m, v in self.dynamic_rms.items():
                lines.append(f"{m:<12}{v:>12.6f}")
            for name, r in self.dynamic_ratios.items():
                lines.append(f"{name:<22}{r:>10.3f}")
        return "\n".join(lines) + "\n"


@dataclass
class ComparisonResult:
    report: ComparisonReport
    trace: list[TraceRow]
    images: dict[tuple[str, int], np.ndarray] = field(default_factory=dict)

    def csv(self) -> str:
        out = ["refresh_index,time_s,mode,rms"]
        out += [f"{r.refresh_index},{r.t:.9g},{r.mode},{r.rms:.9g}" for r in self.trace]
        return "\n".join(out) + "\n"

    def series(self, mode: str) -> tuple[np.ndarray, np.ndarray]:
        rows = [r for r in self.trace if r.mode == mode]
        return np.array([r.t for r in rows]), np.array([r.rms for r in rows])


class TruthCache:
    """Ground-truth images keyed by refresh time; reusable across modes and budgets."""

    def __init__(self, scene: Scene, path: CameraPath, width: int, height: int, ss: int):
        self.key = (id(scene), id(path), width, height, ss)
        self.scene, self.path = scene, path
        self.width, self.height, self.ss = width, height, ss
        self._imgs: dict[float, np.ndarray] = {}

    def __call__(self, t: float) -> np.ndarray:
        img = self._imgs.get(t)
        if img is None:
            img = ground_truth(self.scene, self.path, t, self.width, self.height, self.ss)
            self._imgs[t] = img
        return img


def _ratios(means: dict[str, float]) -> dict[str, float]:
    out = {}
    if means.get("adaptive", 0.0) > 0:
        for m in ("framed", "frameless"):
            if m in means:
                out[f"{m}/adaptive"] = means[m] / means["adaptive"]
    return out


def run_comparison(config, scene: Scene | None = None, path: CameraPath | None = None,
                   truth: TruthCache | None = None, keep_images=(),
                   dynamic_window: float = 0.1, dynamic_threshold: float = 0.02) -> ComparisonResult:
    """Run every requested mode on the virtual clock and score each refresh.

    ``keep_images`` lists refresh indices whose displayed images are kept in
    the result (the CLI turns ``dump_every`` into this list). Refresh k also
    gets a dynamic score over the pixels whose truth changed since refresh
    k - round(dynamic_window * Hz).
    """
    from .scene import load_camera_path, load_scene

    scene = scene or load_scene(config.scene)
    path = path or load_camera_path(config.camera_path)
    w, h = config.width, config.height
    if truth is None or truth.key != (id(scene), id(path), w, h, config.ss):
        truth = TruthCache(scene, path, w, h, config.ss)
    n_ref = refresh_count(config.duration, config.refresh_hz)
    keep = set(keep_images)
    trace: list[TraceRow] = []
    images: dict[tuple[str, int], np.ndarray] = {}
    means: dict[str, float] = {}
    dyn_means: dict[str, float] = {}
    calls: dict[str, int] = {}
    lag = max(1, round(dynamic_window * config.refresh_hz))
    masks: dict[int, np.ndarray] = {}
    for mode in config.modes:
        r = make_renderer(mode, scene, path, w, h, config.budget, config.seed,
                          config.sampler, config.recon)
        errs, dyn = [], []
        for k in range(1, n_ref + 1):
            t = k / config.refresh_hz
            r.advance_to(samples_before(config.budget, k, config.refresh_hz))
            img = r.display(t)
            gt = truth(t)
            e = rms(img, gt)
            errs.append(e)
            trace.append(TraceRow(k, t, mode, e))
            if k not in masks:
                masks[k] = dynamic_mask(gt, truth(max(k - lag, 0) / config.refresh_hz),
                                        dynamic_threshold)
            if masks[k].any():
                dyn.append(masked_rms(img, gt, masks[k]))
            if k in keep:
                images[(mode, k)] = img
        means[mode] = float(np.mean(errs)) if errs else 0.0
        if dyn:
            dyn_means[mode] = float(np.mean(dyn))
        calls[mode] = r.trace_calls
        log.info("%s: mean rms %.5f over %d refreshes", mode, means[mode], n_ref)
    for k in sorted(keep):
        if 1 <= k <= n_ref:
            images[("truth", k)] = truth(k / config.refresh_hz)
    report = ComparisonReport(means, _ratios(means), calls, config.echo(), config.seed,
                              dyn_means, _ratios(dyn_means))
    return ComparisonResult(report, trace, images)


def measure_latency(scene: Scene, path: CameraPath, mode: str, width: int, height: int,
                    budget: float, refresh_hz: float, event_t: float, duration: float,
                    threshold: float = 0.05, fraction: float = 0.9, seed: int = 0,
                    ss: int = 1, **renderer_kw) -> float | None:
    """Run one mode across a camera event and return its response latency."""
    r = make_renderer(mode, scene, path, width, height, budget, seed, **renderer_kw)
    times, frames = [], []
    for k in range(1, refresh_count(duration, refresh_hz) + 1):
        t = k / refresh_hz
        r.advance_to(samples_before(budget, k, refresh_hz))
        times.append(t)
        frames.append(r.display(t))
    pre = ground_truth(scene, path, event_t, width, height, ss)
    post = ground_truth(scene, path, duration, width, height, ss)
    return response_latency(times, frames, event_t, pre, post, threshold, fraction)


def write_artifacts(result: ComparisonResult, out_dir: str | Path, plot: bool = True) -> list[Path]:
    """CSV trace, aligned summary, PPM dumps and (optionally) an RMS-vs-time figure."""
    from .imageio import write_image

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "trace.csv"
    p.write_text(result.csv(), encoding="utf-8")
    written.append(p)
    p = out / "summary.txt"
    p.write_text(result.report.summary(), encoding="utf-8")
    written.append(p)
    for (mode, k), img in sorted(result.images.items()):
        p = out / f"{mode}_{k:05d}.ppm"
        write_image(img, p)
        written.append(p)
    if plot:
        from .plotting import plot_rms_trace

        written.append(plot_rms_trace(result, out / "rms.png"))
    return written
