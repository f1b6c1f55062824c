"""Adaptive frameless rendering simulator.

A deterministic virtual-time renderer that scatters ray samples over a deep
buffer, adapts sampling density with a K-D tiling, and reconstructs each
displayed image with space-time filters. Framed and frameless baselines plus
ground-truth scoring live alongside.
"""

from .bandwidth import DisplaySpec, link_rate, pixel_count
from .baselines import AdaptiveRenderer, FramedRenderer, FramelessRenderer, make_renderer
from .config import SimConfig, parse_config
from .deep_buffer import DeepBuffer, reproject
from .errors import ConfigError
from .evaluation import ground_truth, measure_latency, rms, run_comparison
from .reconstructor import ReconParams, reconstruct
from .sampler import AdaptiveSampler, SamplerParams, Tiling
from .scene import CameraPath, Sample, Scene, generate_sample, load_camera_path, load_scene

__all__ = [
    "AdaptiveRenderer", "AdaptiveSampler", "CameraPath", "ConfigError", "DeepBuffer",
    "DisplaySpec", "FramedRenderer", "FramelessRenderer", "ReconParams", "Sample",
    "SamplerParams", "Scene", "SimConfig", "Tiling", "generate_sample", "ground_truth",
    "link_rate", "load_camera_path", "load_scene", "make_renderer", "measure_latency",
    "parse_config", "pixel_count", "reconstruct", "reproject", "rms", "run_comparison",
]
