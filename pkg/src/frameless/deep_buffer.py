"""Per-pixel bucketed store of recent timestamped samples.

Storage is a dense float array of shape ``(W*H, K, NFIELDS)`` plus a per-bucket
fill count, so the sampler and reconstructor kernels can walk it directly.
Slots within a bucket are kept in insertion order.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np
from numba import njit

from .scene import CameraPath, Sample, camera_basis, project_point

# field layout of one stored sample
U, V, R, G, B, DEPTH, WX, WY, WZ, T, TVIEW, BG = range(12)
NFIELDS = 12

DEFAULT_CAPACITY = 8


@njit(cache=True)
def bucket_insert(data, count, width, height, row):
    """Append ``row`` to its bucket, evicting the oldest sample on overflow.

    Returns False only when the row itself was the one evicted.
    """
    x = int(math.floor(row[U]))
    y = int(math.floor(row[V]))
    b = y * width + x
    k = data.shape[1]
    n = count[b]
    if n < k:
        for f in range(NFIELDS):
            data[b, n, f] = row[f]
        count[b] = n + 1
        return True
    j = 0
    for s in range(1, n):
        if data[b, s, T] < data[b, j, T]:
            j = s
    # an existing sample with equal t was inserted earlier, so it loses the tie
    if row[T] < data[b, j, T]:
        return False
    for s in range(j, n - 1):
        for f in range(NFIELDS):
            data[b, s, f] = data[b, s + 1, f]
    for f in range(NFIELDS):
        data[b, n - 1, f] = row[f]
    return True


@njit(cache=True)
def bucket_remove(data, count, b, j):
    n = count[b]
    for s in range(j, n - 1):
        for f in range(NFIELDS):
            data[b, s, f] = data[b, s + 1, f]
    count[b] = n - 1


@njit(cache=True)
def gather_indices(data, count, width, height, u, v, radius):
    """(bucket, slot) pairs of every sample within ``radius`` of (u, v)."""
    x0 = max(0, int(math.floor(u - radius)))
    x1 = min(width - 1, int(math.floor(u + radius)))
    y0 = max(0, int(math.floor(v - radius)))
    y1 = min(height - 1, int(math.floor(v + radius)))
    r2 = radius * radius
    nmax = 0
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            nmax += count[y * width + x]
    out = np.empty((nmax, 2), dtype=np.int64)
    m = 0
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            b = y * width + x
            for s in range(count[b]):
                du = data[b, s, U] - u
                dv = data[b, s, V] - v
                if du * du + dv * dv <= r2:
                    out[m, 0] = b
                    out[m, 1] = s
                    m += 1
    return out[:m]


@njit(cache=True)
def reproject_in_place(data, count, width, height, b, j, basis, t_now, row):
    """Move sample (b, j) to where ``basis`` sees its world point.

    Dropped samples are deleted; ``row`` is scratch space. Returns 1 if kept.
    """
    for f in range(NFIELDS):
        row[f] = data[b, j, f]
    ok, u, v, depth = project_point(basis, float(width), float(height),
                                    row[WX], row[WY], row[WZ])
    bucket_remove(data, count, b, j)
    if not ok:
        return 0
    row[U] = u
    row[V] = v
    row[DEPTH] = depth
    row[TVIEW] = t_now
    bucket_insert(data, count, width, height, row)
    return 1


def sample_to_row(s: Sample) -> np.ndarray:
    row = np.empty(NFIELDS)
    row[U], row[V] = s.u, s.v
    row[R:B + 1] = s.color
    row[DEPTH] = s.depth
    row[WX:WZ + 1] = s.world_point
    row[T] = row[TVIEW] = s.t
    row[BG] = 1.0 if s.is_background else 0.0
    return row


def row_to_sample(row: np.ndarray) -> Sample:
    return Sample(
        u=float(row[U]), v=float(row[V]),
        color=(float(row[R]), float(row[G]), float(row[B])),
        depth=float(row[DEPTH]),
        world_point=(float(row[WX]), float(row[WY]), float(row[WZ])),
        t=float(row[T]),
        is_background=bool(row[BG]),
    )


class DeepBuffer:
    """Bucket grid holding at most ``capacity`` samples per pixel.

    Single writer; concurrent readers are fine between writes.
    """

    def __init__(self, width: int, height: int, capacity: int = DEFAULT_CAPACITY):
        if width < 1 or height < 1 or capacity < 1:
            raise ValueError("buffer dimensions and capacity must be positive")
        self.width = width
        self.height = height
        self.capacity = capacity
        self.data = np.zeros((width * height, capacity, NFIELDS))
        self.count = np.zeros(width * height, dtype=np.int64)

    def __len__(self) -> int:
        return int(self.count.sum())

    def _check(self, u: float, v: float):
        if not (0.0 <= u < self.width and 0.0 <= v < self.height):
            raise ValueError(f"sample at ({u}, {v}) outside {self.width}x{self.height} buffer")

    def insert(self, sample: Sample) -> None:
        self._check(sample.u, sample.v)
        bucket_insert(self.data, self.count, self.width, self.height, sample_to_row(sample))

    def bucket(self, x: int, y: int) -> list[Sample]:
        b = y * self.width + x
        return [row_to_sample(self.data[b, s]) for s in range(self.count[b])]

    def gather(self, u: float, v: float, radius: float) -> list[Sample]:
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        idx = gather_indices(self.data, self.count, self.width, self.height,
                             float(u), float(v), float(radius))
        return [row_to_sample(self.data[b, s]) for b, s in idx]

    def __iter__(self) -> Iterator[Sample]:
        for b in range(self.width * self.height):
            for s in range(self.count[b]):
                yield row_to_sample(self.data[b, s])

    def rows(self) -> np.ndarray:
        """All stored rows in bucket-major, insertion order."""
        mask = np.arange(self.capacity)[None, :] < self.count[:, None]
        return self.data[mask]

    def copy(self) -> "DeepBuffer":
        out = DeepBuffer(self.width, self.height, self.capacity)
        out.data[:] = self.data
        out.count[:] = self.count
        return out


def reproject(sample: Sample, path: CameraPath, t_now: float, width: int, height: int) -> Sample | None:
    """Re-position a sample for the camera at ``t_now``; None if it leaves the view."""
    if t_now < sample.t:
        raise ValueError("cannot reproject a sample into the past")
    basis = camera_basis(path.packed(), float(t_now))
    ok, u, v, depth = project_point(basis, float(width), float(height), *map(float, sample.world_point))
    if not ok:
        return None
    return Sample(float(u), float(v), sample.color, float(depth), sample.world_point,
                  sample.t, sample.is_background)
