"""Binary PPM output with the standard sRGB transfer curve."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.clip(np.asarray(c, dtype=np.float64), 0.0, 1.0)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * np.power(c, 1.0 / 2.4) - 0.055)


def encode_srgb8(img: np.ndarray) -> np.ndarray:
    # values are nonnegative, so floor(x + 0.5) rounds half away from zero
    return np.floor(linear_to_srgb(img) * 255.0 + 0.5).astype(np.uint8)


def write_image(img: np.ndarray, path: str | Path) -> None:
    """Write an ``(H, W, 3)`` linear image as P6 with maxval 255."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    h, w = img.shape[:2]
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(encode_srgb8(img).tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    """Read back a P6 file written by :func:`write_image` as uint8 ``(H, W, 3)``."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or parts[2] != b"255":
        raise ValueError(f"{path}: not a maxval-255 P6 file")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
