"""Command-line front end: ``masort {filter,track,eval,synth}``.

Exit codes: 0 success, 2 usage error, 3 input or schema error,
4 undefined metric. Option values resolve as command-line flag, then
``--config`` file, then built-in default. ``MASORT_OUT_DIR`` supplies
``--out`` when the flag is absent.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from .config import normalize_key, parse_bool, parse_groups, parse_tuple, read_config
from .errors import MasortError, UndefinedMetricError
from .geometry import Detection
from .metrics import evaluate
from .mot_io import (
    attach_features,
    read_detections,
    read_features,
    read_proposals,
    read_tracks,
    write_detections,
    write_features,
    write_results,
)
from .qgm import FilterConfig, filter_proposals
from .synth import ScenarioConfig, generate
from .tracker import TrackerConfig, run

log = logging.getLogger("masort")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_METRIC = 4

OUT_ENV = "MASORT_OUT_DIR"


class UsageError(Exception):
    pass


# option name -> (type, default); names double as config-file keys
FILTER_OPTS = {"kappa": (int, 5), "t_gen": (float, 0.3), "tau_sim": (float, 0.85)}
TRACK_OPTS = {
    "theta": (float, 67.5), "lambda": (float, 0.2), "gate": (float, 0.25), "iou_min": (float, 0.1),
    "min_hits": (int, 3), "max_age": (int, 30), "delta_t": (int, 3), "alpha_ema": (float, 0.95),
    "clamp_weights": (parse_bool, True), "use_oru": (parse_bool, True),
}
EVAL_OPTS = {"iou_thresh": (float, 0.5)}


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _add_opts(p: argparse.ArgumentParser, opts: dict) -> None:
    for name, (typ, default) in opts.items():
        flag = "--" + name.replace("_", "-")
        kind = str if typ is parse_bool else typ
        p.add_argument(flag, dest=name, type=kind, default=None,
                       help=f"(default: {default})")


def _resolve(args: argparse.Namespace, opts: dict) -> dict:
    """Effective options: flags > config file > defaults."""
    from_file: dict[str, str] = {}
    if args.config is not None:
        from_file = read_config(args.config)
        unknown = sorted(set(from_file) - set(opts))
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {unknown}; allowed: {sorted(opts)}")
    out = {}
    for name, (typ, default) in opts.items():
        flag_val = getattr(args, name)
        try:
            if flag_val is not None:
                out[name] = typ(flag_val) if typ is parse_bool else flag_val
            elif name in from_file:
                out[name] = typ(from_file[name])
            else:
                out[name] = default
        except ValueError as exc:
            raise UsageError(f"bad value for {name}: {exc}") from None
    return out


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        raise UsageError(f"no output directory: pass --out or set {OUT_ENV}")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out_dir: Path, command: str, config: dict, inputs: dict, outputs: dict,
                    started: float, extra: Optional[dict] = None) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {k: {"path": str(v), "sha256": sha256(v)} for k, v in inputs.items() if v is not None},
        "outputs": {k: {"path": Path(v).name, "sha256": sha256(v)} for k, v in outputs.items()},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    # wall-clock time lives beside the manifest so the manifest stays byte-reproducible
    timing = {"command": command, "duration_s": round(time.perf_counter() - started, 6)}
    (out_dir / "timing.json").write_text(json.dumps(timing) + "\n", encoding="utf-8", newline="\n")
    return path


def cmd_filter(args) -> int:
    started = time.perf_counter()
    opts = _resolve(args, FILTER_OPTS)
    cfg = FilterConfig(kappa=opts["kappa"], t_gen=opts["t_gen"], tau_sim=opts["tau_sim"])
    props = read_proposals(args.proposals)
    kept = filter_proposals(props, cfg)
    out_dir = _out_dir(args)
    dets = {f: [Detection(p.bbox, p.s_gen, p.feature) for p in ps] for f, ps in kept.items()}
    det_path, feat_path = out_dir / "det.txt", out_dir / "feat.txt"
    write_detections(det_path, dets)
    write_features(feat_path, dets)
    _write_manifest(out_dir, "filter", opts, {"proposals": args.proposals},
                    {"det": det_path, "feat": feat_path}, started,
                    {"counts": {"proposals": len(props), "kept": sum(len(v) for v in dets.values())}})
    print(f"kept {sum(len(v) for v in dets.values())} of {len(props)} proposals -> {det_path}")
    return EXIT_OK


def cmd_track(args) -> int:
    started = time.perf_counter()
    opts = _resolve(args, TRACK_OPTS)
    cfg = TrackerConfig(
        theta=opts["theta"], lambda_=opts["lambda"], gate=opts["gate"], iou_min=opts["iou_min"],
        min_hits=opts["min_hits"], max_age=opts["max_age"], delta_t=opts["delta_t"],
        alpha_ema=opts["alpha_ema"], clamp_weights=opts["clamp_weights"], use_oru=opts["use_oru"],
    )
    dets = read_detections(args.detections)
    mode = "motion-only"
    if args.features is not None:
        dets = attach_features(dets, read_features(args.features))
        mode = "appearance"
    out_dir = _out_dir(args)
    outputs = run(dets, cfg)
    res_path = out_dir / "results.txt"
    write_results(res_path, outputs)
    _write_manifest(out_dir, "track", opts, {"detections": args.detections, "features": args.features},
                    {"results": res_path}, started,
                    {"mode": mode, "frames": len(dets), "skipped_rows": getattr(dets, "skipped", 0)})
    print(f"tracked {len(dets)} frames ({mode}) -> {res_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    started = time.perf_counter()
    opts = _resolve(args, EVAL_OPTS)
    gt = read_tracks(args.gt)
    pred = read_tracks(args.results)
    report = evaluate(gt, pred, iou_thresh=opts["iou_thresh"])
    sys.stdout.write(report.table())
    out = args.out or os.environ.get(OUT_ENV)
    if out:
        out_dir = _out_dir(args)
        path = out_dir / "metrics.json"
        path.write_text(report.to_json(), encoding="utf-8", newline="\n")
        _write_manifest(out_dir, "eval", opts, {"gt": args.gt, "results": args.results},
                        {"metrics": path}, started)
    else:
        sys.stdout.write(report.to_json())
    return EXIT_OK


def scenario_from_file(path) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from a flat key = value file."""
    raw = read_config(path)
    parsers: dict[str, Callable[[str], object]] = {
        "arena": parse_tuple, "min_size": parse_tuple, "max_size": parse_tuple,
        "occlusion_windows": lambda v: parse_groups(v, int),
        "waypoints": lambda v: tuple(((g[0], g[1]), (g[2], g[3])) for g in parse_groups(v, float)),
        "motion": str, "feature_mode": str,
    }
    kwargs = {}
    known = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    for key, value in raw.items():
        if key not in known:
            raise UsageError(f"{path}: unknown scenario key {key!r}; allowed: {sorted(known)}")
        default = known[key].default
        if key in parsers:
            parse = parsers[key]
        elif isinstance(default, bool):
            parse = parse_bool
        elif isinstance(default, int):
            parse = int
        else:
            parse = float
        try:
            kwargs[key] = parse(value)
        except (ValueError, IndexError) as exc:
            raise UsageError(f"{path}: bad value for {key}: {exc}") from None
    return ScenarioConfig(**kwargs)


def cmd_synth(args) -> int:
    started = time.perf_counter()
    if args.config is not None:
        raise UsageError("synth takes its settings from the scenario file, not --config")
    cfg = scenario_from_file(args.scenario)
    scenario = generate(cfg)
    out_dir = _out_dir(args)
    paths = scenario.write(out_dir)
    _write_manifest(out_dir, "synth", cfg.to_dict(), {"scenario_config": args.scenario},
                    {k: v for k, v in paths.items()}, started)
    print(f"wrote {cfg.n_frames} frames, {cfg.n_objects} objects -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masort", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="output directory"):
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--out", default=None, help=f"{out_help} (env {OUT_ENV})")

    p = sub.add_parser("filter", help="query-guided filtering of grounding proposals", allow_abbrev=False)
    p.add_argument("proposals", help="proposal file")
    _add_opts(p, FILTER_OPTS)
    common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("track", help="run the tracker over a detection file", allow_abbrev=False)
    p.add_argument("detections", help="MOT detection file")
    p.add_argument("--features", default=None, help="feature sidecar; omit for motion-only tracking")
    _add_opts(p, TRACK_OPTS)
    common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="HOTA / MOTA / IDF1 of a result file", allow_abbrev=False)
    p.add_argument("gt", help="MOT ground-truth file")
    p.add_argument("results", help="MOT result file")
    _add_opts(p, EVAL_OPTS)
    common(p, "directory for metrics.json; without it JSON goes to stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic sequence", allow_abbrev=False)
    p.add_argument("scenario", help="scenario config file (key = value)")
    common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"masort: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UndefinedMetricError as exc:
        print(f"masort: undefined metric: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except (MasortError, OSError) as exc:
        print(f"masort: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
