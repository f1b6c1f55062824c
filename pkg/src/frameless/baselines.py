"""Comparison renderers sharing the adaptive renderer's virtual sample clock.

All three modes expose ``advance_to(n)`` (consume samples until n have been
taken, sample i at time i/S) and ``display(t)`` (what is on screen at t).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .reconstructor import ReconParams, reconstruct
from .sampler import AdaptiveSampler, SamplerParams
from .scene import CameraPath, Scene, camera_basis_into, trace_pixel

MODES = ("framed", "frameless", "adaptive")


def _background_image(scene: Scene, width: int, height: int) -> np.ndarray:
    img = np.empty((height, width, 3))
    img[:] = scene.background
    return img


@njit(cache=True)
def _framed_advance(i0, i1, budget, scene, cam, width, height, front, back, state, tstate):
    """``state`` = [pixels filled, trace calls]; ``tstate`` = [frame start time]."""
    npx = width * height
    basis = np.empty((5, 3))
    camera_basis_into(cam, tstate[0], basis)
    for i in range(i0, i1):
        p = state[0]
        y = p // width
        x = p - y * width
        res = trace_pixel(scene, basis, float(width), float(height), x + 0.5, y + 0.5, tstate[0])
        state[1] += 1
        back[y, x, 0] = res[2]
        back[y, x, 1] = res[3]
        back[y, x, 2] = res[4]
        state[0] = p + 1
        if p + 1 == npx:
            front[:] = back
            state[0] = 0
            tstate[0] = (i + 1) / budget
            camera_basis_into(cam, tstate[0], basis)


class FramedRenderer:
    """Double-buffered: one sample per pixel in scanline order, camera frozen per frame."""

    mode = "framed"

    def __init__(self, scene: Scene, path: CameraPath, width: int, height: int, budget: float):
        self.scene, self.path = scene, path
        self.width, self.height = width, height
        self.budget = float(budget)
        self._scene, self._cam = scene.packed(), path.packed()
        self.front = _background_image(scene, width, height)
        self.back = self.front.copy()
        self._state = np.zeros(2, dtype=np.int64)
        self._tstate = np.zeros(1)
        self.index = 0

    @property
    def frame_start_t(self) -> float:
        return float(self._tstate[0])

    @property
    def frame_time(self) -> float:
        return self.width * self.height / self.budget

    @property
    def trace_calls(self) -> int:
        return int(self._state[1])

    def advance_to(self, n: int) -> None:
        if n > self.index:
            _framed_advance(self.index, n, self.budget, self._scene, self._cam,
                            self.width, self.height, self.front, self.back,
                            self._state, self._tstate)
            self.index = n

    def step(self) -> None:
        self.advance_to(self.index + 1)

    def display(self, t: float | None = None) -> np.ndarray:
        return self.front.copy()


@njit(cache=True)
def _frameless_advance(i0, i1, budget, draws, scene, cam, width, height, img, state):
    npx = width * height
    basis = np.empty((5, 3))
    for i in range(i0, i1):
        t = i / budget
        p = min(int(draws[i - i0] * npx), npx - 1)
        y = p // width
        x = p - y * width
        camera_basis_into(cam, t, basis)
        res = trace_pixel(scene, basis, float(width), float(height), x + 0.5, y + 0.5, t)
        state[1] += 1
        img[y, x, 0] = res[2]
        img[y, x, 1] = res[3]
        img[y, x, 2] = res[4]


class FramelessRenderer:
    """Single-buffered: each sample overwrites one uniformly random pixel in place."""

    mode = "frameless"
    chunk = 1 << 16

    def __init__(self, scene: Scene, path: CameraPath, width: int, height: int, budget: float,
                 rng: np.random.Generator | None = None, seed: int = 0):
        self.scene, self.path = scene, path
        self.width, self.height = width, height
        self.budget = float(budget)
        self._scene, self._cam = scene.packed(), path.packed()
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.image = _background_image(scene, width, height)
        self._state = np.zeros(2, dtype=np.int64)
        self.index = 0

    @property
    def trace_calls(self) -> int:
        return int(self._state[1])

    def advance_to(self, n: int) -> None:
        while self.index < n:
            stop = min(n, self.index + self.chunk)
            draws = self.rng.random(stop - self.index)
            _frameless_advance(self.index, stop, self.budget, draws, self._scene, self._cam,
                               self.width, self.height, self.image, self._state)
            self.index = stop

    def step(self) -> None:
        self.advance_to(self.index + 1)

    def display(self, t: float | None = None) -> np.ndarray:
        return self.image.copy()


class AdaptiveRenderer:
    """Adaptive sampler plus space-time reconstruction at each display request."""

    mode = "adaptive"

    def __init__(self, scene: Scene, path: CameraPath, width: int, height: int, budget: float,
                 rng: np.random.Generator | None = None, seed: int = 0,
                 sampler_params: SamplerParams | None = None,
                 recon_params: ReconParams | None = None):
        self.scene, self.path = scene, path
        self.width, self.height = width, height
        self.budget = float(budget)
        self.sampler = AdaptiveSampler(scene, path, width, height, budget,
                                       sampler_params, rng=rng, seed=seed)
        self.recon_params = recon_params or ReconParams()

    @property
    def index(self) -> int:
        return self.sampler.index

    @property
    def trace_calls(self) -> int:
        return self.sampler.trace_calls

    def advance_to(self, n: int) -> None:
        self.sampler.advance_to(n)

    def step(self):
        return self.sampler.step()

    def display(self, t: float) -> np.ndarray:
        meta = self.sampler.metadata(t)
        return reconstruct(self.sampler.buffer, meta, self.path, t,
                           self.recon_params, self.scene.background)


def make_renderer(mode: str, scene: Scene, path: CameraPath, width: int, height: int,
                  budget: float, seed: int = 0, sampler_params: SamplerParams | None = None,
                  recon_params: ReconParams | None = None):
    # distinct, stable streams per mode so modes never share draws
    rng = np.random.default_rng([seed, MODES.index(mode)]) if mode in MODES else None
    if mode == "framed":
        return FramedRenderer(scene, path, width, height, budget)
    if mode == "frameless":
        return FramelessRenderer(scene, path, width, height, budget, rng=rng)
    if mode == "adaptive":
        return AdaptiveRenderer(scene, path, width, height, budget, rng=rng,
                                sampler_params=sampler_params, recon_params=recon_params)
    raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
