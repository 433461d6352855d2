"""Command-line front end: ``fastellipse detect | bench | synth``.

Exit codes: 0 success, 2 unreadable input, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench, synth
from .detector import DetectorConfig, detect
from .edges import read_image
from .errors import ConfigError, DatasetFormatError, UnsupportedFormat

ENV_CONFIG = "ELLIPSE_DETECT_CONFIG"
EXIT_INPUT = 2
EXIT_CONFIG = 3

# flag dest -> DetectorConfig field
_FIELDS = {
    "sigma": float,
    "canny_low": float,
    "canny_high": float,
    "th_length": int,
    "th_cnl": float,
    "th_cnc": float,
    "n_d": int,
    "th_fit": float,
    "th_len": float,
    "th_overlap": float,
    "seed": int,
}
_ALIASES = {"nd": "n_d"}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines (``#`` comments, blank lines ignored)."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        key = _ALIASES.get(key, key)
        if not sep or key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown or malformed entry {line!r}")
        value = value.strip()
        if key in ("canny_low", "canny_high") and value.lower() in ("none", "auto"):
            out[key] = None
            continue
        try:
            out[key] = _FIELDS[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def build_config(args) -> DetectorConfig:
    values = {}
    env = os.environ.get(ENV_CONFIG)
    if env:
        values.update(read_config_file(env))
    for key in _FIELDS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return DetectorConfig(**values)


def _config_flags(p):
    g = p.add_argument_group("detector settings")
    g.add_argument("--sigma", type=float, help="Gaussian smoothing before Canny (default 1.0)")
    g.add_argument("--canny-low", type=float, help="low hysteresis threshold (default: automatic)")
    g.add_argument("--canny-high", type=float, help="high hysteresis threshold (default: automatic)")
    g.add_argument("--th-length", type=int, help="minimum arc length in pixels (default 16)")
    g.add_argument("--th-cnl", type=float, help="line-pruning threshold (default 3.0)")
    g.add_argument("--th-cnc", type=float, help="arc-pair CNC tolerance (default 0.2)")
    g.add_argument("--nd", dest="n_d", type=int, help="parallel chords per arc pair (default 16)")
    g.add_argument("--th-fit", type=float, help="minimum share of supporting points (default 0.7)")
    g.add_argument("--th-len", type=float, help="minimum arc length over 3(a+b) (default 0.4)")
    g.add_argument("--th-overlap", type=float, help="overlap needed to count a match (default 0.8)")
    g.add_argument("--seed", type=int, help="seed for randomised steps (default 0)")
    g.add_argument("--print-config", action="store_true", help="print the effective settings and exit")


def _svg(width, height, ellipses, arcs=()):
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for arc in arcs:
        pts = " ".join(f"{x},{y}" for x, y in zip(arc.xs.tolist(), arc.ys.tolist()))
        out.append(f'<polyline points="{pts}" fill="none" stroke="gray" stroke-width="1"/>')
    for e in ellipses:
        out.append(
            f'<ellipse cx="{e.cx:.3f}" cy="{e.cy:.3f}" rx="{e.a:.3f}" ry="{e.b:.3f}" '
            f'transform="rotate({e.theta_deg:.3f} {e.cx:.3f} {e.cy:.3f})" '
            'fill="none" stroke="green" stroke-width="1.5"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_detect(args, cfg):
    try:
        img = read_image(args.image)
    except (UnsupportedFormat, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep = detect(img, cfg, keep_arcs=args.debug_arcs)
    if args.json:
        doc = rep.as_dict()
        doc["image"] = str(args.image)
        print(json.dumps(doc, indent=2))
    else:
        for d in rep.ellipses:
            print(" ".join(f"{v:.3f}" for v in d.as_row()))
    if args.overlay:
        arcs = rep.kept_arcs if args.debug_arcs else ()
        Path(args.overlay).write_text(_svg(img.width, img.height, rep.params, arcs))
    return 0


def cmd_bench(args, cfg):
    try:
        if args.ablate:
            items = bench.dataset_items(args.dataset)
            from .truth import read_truth

            scenes = [(read_image(i), read_truth(t), i.name) for i, t in items]
            rows = bench.ablation(scenes, cfg)
            table = bench.format_ablation(rows)
            print(table)
            if args.output:
                Path(args.output).write_text(json.dumps(rows, indent=2) + "\n")
            return 0
        agg, rows = bench.run_benchmark(args.dataset, cfg, args.jobs)
    except DatasetFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UnsupportedFormat, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.output:
        bench.write_json(args.output, agg, rows, cfg)
    if args.csv:
        bench.write_csv(args.csv, rows)
    if args.json:
        print(json.dumps(bench.report_dict(agg, rows, cfg), indent=2))
    else:
        print(f"images {len(rows)}  P {agg.precision:.4f}  R {agg.recall:.4f}  F {agg.f_measure:.4f}  CC {agg.cc:.1f}")
        for stage, ms in agg.stage_times.items():
            print(f"  {stage:<28}{ms:9.2f} ms")
    return 0


def _sweep_specs(args):
    if args.sweep == "ratio-orientation":
        ratios = [k / 100 for k in range(1, 101, args.step)]
        return synth.sweep_ratio_orientation(ratios, range(1, 91, args.step))
    if args.sweep == "axis-ratio":
        ratios = [k / 100 for k in range(1, 101, args.step)]
        return synth.sweep_axis_ratio(range(1, 101, args.step), ratios)
    base = [synth.random_scene(args.seed_base + i) for i in range(args.scenes)]
    return synth.noise_series(base)


def _materialize_one(job):
    spec, out, fmt = job
    return synth.materialize([spec], out, fmt)[0]


def cmd_synth(args, cfg):
    specs = _sweep_specs(args)
    if args.jobs > 1 and len(specs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            paths = list(pool.map(_materialize_one, [(s, args.out_dir, args.format) for s in specs], chunksize=16))
    else:
        paths = synth.materialize(specs, args.out_dir, args.format)
    print(f"wrote {len(paths)} images to {args.out_dir}")
    return 0


def make_parser():
    p = argparse.ArgumentParser(prog="fastellipse", description="Ellipse detection with projective-invariant arc selection.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect ellipses in one image")
    d.add_argument("image")
    d.add_argument("--json", action="store_true", help="JSON output with stage timings and CC")
    d.add_argument("--overlay", metavar="PATH", help="write an SVG overlay of the detections")
    d.add_argument("--debug-arcs", action="store_true", help="also draw the arcs kept after pruning")
    _config_flags(d)
    d.set_defaults(func=cmd_detect)

    b = sub.add_parser("bench", help="score a directory of images with ground-truth sidecars")
    b.add_argument("dataset")
    b.add_argument("--output", "-o", metavar="PATH", help="write the JSON report here")
    b.add_argument("--csv", metavar="PATH", help="write per-image rows as CSV")
    b.add_argument("--json", action="store_true", help="print the JSON report")
    b.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    b.add_argument("--ablate", action="store_true", help="run the Th_CNL and Th_CNC sweeps instead")
    _config_flags(b)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("synth", help="generate synthetic images with ground truth")
    s.add_argument("sweep", choices=("ratio-orientation", "axis-ratio", "noise"))
    s.add_argument("out_dir")
    s.add_argument("--step", type=int, default=1, help="subsample the sweep grids (default 1 = full grid)")
    s.add_argument("--scenes", type=int, default=30, help="base scenes for the noise series (default 30)")
    s.add_argument("--seed-base", type=int, default=0, help="first scene seed for the noise series")
    s.add_argument("--format", choices=("png", "pgm"), default="png")
    s.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TypeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "print_config", False):
        for k, v in cfg.as_dict().items():
            print(f"{k} = {v}")
        return 0
    if getattr(args, "jobs", 1) < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args, cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
