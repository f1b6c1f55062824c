"""Display bandwidth arithmetic: pixel counts for wall displays and link rates.

Decimal SI prefixes throughout (1 Tb/s = 1e12 bits per second).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DisplaySpec:
    width: float           # inches
    height: float          # inches
    dpi: float
    refresh: float = 60.0  # Hz
    bits_per_pixel: float = 24.0

    def __post_init__(self):
        for name in ("width", "height", "dpi", "refresh", "bits_per_pixel"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be strictly positive, got {v!r}")


@dataclass(frozen=True)
class LinkRate:
    pixels_per_s: float
    bits_per_s: float


def pixel_count(spec: DisplaySpec) -> int:
    """round(width * dpi) * round(height * dpi)."""
    return round(spec.width * spec.dpi) * round(spec.height * spec.dpi)


def link_rate(pixels: float, refresh: float, bits_per_pixel: float) -> LinkRate:
    if pixels < 0 or refresh < 0 or bits_per_pixel < 0:
        raise ValueError("link_rate inputs must be nonnegative")
    px = pixels * refresh
    return LinkRate(pixels_per_s=px, bits_per_s=px * bits_per_pixel)


def dpi_scale(dpi_from: float, dpi_to: float) -> float:
    """Pixel-count factor when the same wall is rebuilt at another resolution."""
    return (dpi_to / dpi_from) ** 2


_PREFIXES = [(1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "k")]


def si(value: float, unit: str) -> str:
    for scale, p in _PREFIXES:
        if abs(value) >= scale:
            return f"{value / scale:.4g} {p}{unit}"
    return f"{value:.4g} {unit}"


def table(spec: DisplaySpec) -> str:
    """Labeled two-column table for one display."""
    n = pixel_count(spec)
    rate = link_rate(n, spec.refresh, spec.bits_per_pixel)
    rows = [
        ("width", f"{spec.width:g} in ({round(spec.width * spec.dpi)} px)"),
        ("height", f"{spec.height:g} in ({round(spec.height * spec.dpi)} px)"),
        ("dpi", f"{spec.dpi:g}"),
        ("refresh", f"{spec.refresh:g} Hz"),
        ("bits/pixel", f"{spec.bits_per_pixel:g}"),
        ("pixels", f"{n} ({si(n, 'px')})"),
        ("pixel rate", si(rate.pixels_per_s, "px/s")),
        ("link rate", si(rate.bits_per_s, "b/s")),
    ]
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{w}}  {v}" for k, v in rows) + "\n"
