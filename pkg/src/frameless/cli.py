"""Command-line driver: ``render``, ``compare``, ``gt`` and ``bandwidth``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError

log = logging.getLogger("frameless")


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="sectioned key = value file")
    p.add_argument("--scene", help="scene file or bundled asset name")
    p.add_argument("--camera-path", dest="camera_path", help="camera path file or bundled asset name")
    p.add_argument("--mode", dest="modes", help="comma list of framed,frameless,adaptive")
    p.add_argument("--budget", type=float, help="samples per second")
    p.add_argument("--refresh-hz", dest="refresh_hz", type=float)
    p.add_argument("--duration", type=float, help="seconds of virtual time")
    p.add_argument("--seed", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--ss", type=int, help="ground-truth supersampling per axis")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--dump-every", dest="dump_every", type=int, metavar="N",
                   help="write displayed images every N refreshes (0 = final only)")
    p.add_argument("--no-plot", action="store_true", help="skip the RMS figure")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frameless",
                                 description="Adaptive frameless rendering simulator.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("render", "run one or more modes and dump displayed images"),
                        ("compare", "score modes against ground truth, write CSV and summary")):
        _sim_flags(sub.add_parser(name, help=help_))
    g = sub.add_parser("gt", help="write one supersampled ground-truth image")
    _sim_flags(g)
    g.add_argument("--t", type=float, help="virtual time of the image")
    b = sub.add_parser("bandwidth", help="pixel count and link rate of a display")
    b.add_argument("--width-in", type=float, required=True)
    b.add_argument("--height-in", type=float, required=True)
    b.add_argument("--dpi", type=float, required=True)
    b.add_argument("--hz", type=float, default=60.0)
    b.add_argument("--bpp", type=float, default=24.0)
    return ap


def _config(args):
    from .config import parse_config

    keys = ("scene", "camera_path", "modes", "budget", "refresh_hz", "duration", "seed",
            "width", "height", "ss", "out_dir", "dump_every", "t")
    overrides = {k: getattr(args, k, None) for k in keys}
    return parse_config(args.config, overrides)


def _keep_schedule(cfg) -> list[int]:
    from .evaluation import refresh_count

    n = refresh_count(cfg.duration, cfg.refresh_hz)
    if cfg.dump_every > 0:
        return list(range(cfg.dump_every, n + 1, cfg.dump_every))
    return [n]


def _cmd_compare(args, with_truth: bool) -> int:
    from .evaluation import run_comparison, write_artifacts

    cfg = _config(args)
    result = run_comparison(cfg, keep_images=_keep_schedule(cfg))
    if not with_truth:
        result.images = {k: v for k, v in result.images.items() if k[0] != "truth"}
    written = write_artifacts(result, cfg.out_dir, plot=not args.no_plot)
    sys.stdout.write(result.report.summary())
    for p in written:
        log.info("wrote %s", p)
    return 0


def _cmd_render(args) -> int:
    from .evaluation import refresh_count, samples_before
    from .baselines import make_renderer
    from .imageio import write_image
    from .scene import load_camera_path, load_scene

    cfg = _config(args)
    scene, path = load_scene(cfg.scene), load_camera_path(cfg.camera_path)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keep = set(_keep_schedule(cfg))
    n = refresh_count(cfg.duration, cfg.refresh_hz)
    for mode in cfg.modes:
        r = make_renderer(mode, scene, path, cfg.width, cfg.height, cfg.budget, cfg.seed,
                          cfg.sampler, cfg.recon)
        for k in range(1, n + 1):
            r.advance_to(samples_before(cfg.budget, k, cfg.refresh_hz))
            if k in keep:
                p = out / f"{mode}_{k:05d}.ppm"
                write_image(r.display(k / cfg.refresh_hz), p)
                print(p)
    return 0


def _cmd_gt(args) -> int:
    from .evaluation import ground_truth
    from .imageio import write_image
    from .scene import load_camera_path, load_scene

    cfg = _config(args)
    img = ground_truth(load_scene(cfg.scene), load_camera_path(cfg.camera_path), cfg.t,
                       cfg.width, cfg.height, cfg.ss)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = out / f"gt_t{cfg.t:.6f}.ppm"
    write_image(img, p)
    print(p)
    return 0


def _cmd_bandwidth(args) -> int:
    from .bandwidth import DisplaySpec, table

    spec = DisplaySpec(args.width_in, args.height_in, args.dpi, args.hz, args.bpp)
    sys.stdout.write(table(spec))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            return _cmd_compare(args, with_truth=True)
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "gt":
            return _cmd_gt(args)
        return _cmd_bandwidth(args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"frameless: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
