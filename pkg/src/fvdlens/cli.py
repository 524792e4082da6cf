"""Command-line surface: compute, distort, freeze, extract, sensitivity,
probe, chunks.

Every run writes a ``run.json`` sidecar holding the fully resolved
configuration; rerunning a command with ``--config <run.json>`` reproduces
the primary outputs byte for byte. Exit codes: 0 success, 2 input/IO error,
3 numeric error, with a machine-readable error JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .clips import ClipSet
from .distortion import DistortionSpec, distort_clipset, freeze_clipset
from .errors import FvdLensError, InputError, NumericError
from .feature_io import load_clipset, read_features, resolve_extractor, save_clipset, write_features
from .frechet import compute_fvd
from .protocols import (
    REPORT_VERSION,
    ChunkSchedule,
    canonical_json,
    probe_report_dict,
    run_long_video,
    run_null_space_probe,
    run_sensitivity,
)
from .resampler import ResampleConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _default_threads() -> int:
    env = os.environ.get("FVDLENS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _parse_levels(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fvdlens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--output", type=str, default=None)
        p.add_argument("--format", choices=("json", "table", "csv"), default="json")
        p.add_argument("--config", type=str, default=None, help="JSON config file overriding flags")

    p = sub.add_parser("compute", help="FVD/FID between two feature sets or manifests")
    p.add_argument("--ref", type=str)
    p.add_argument("--gen", type=str)
    p.add_argument("--extractor", type=str, default="toy-v1-128")
    add_common(p)

    p = sub.add_parser("distort", help="corrupt a clip set")
    p.add_argument("--input", type=str)
    p.add_argument("--family", choices=("elastic", "motion_blur"), default="elastic")
    p.add_argument("--severity", type=int, default=3)
    p.add_argument("--mode", choices=("spatial", "spatiotemporal"), default="spatial")
    add_common(p)

    p = sub.add_parser("freeze", help="repeat each clip's first frame")
    p.add_argument("--input", type=str)
    add_common(p)

    p = sub.add_parser("extract", help="extract features from a manifest")
    p.add_argument("--input", type=str)
    p.add_argument("--extractor", type=str, default="toy-v1-128")
    add_common(p)

    p = sub.add_parser("sensitivity", help="spatial vs spatiotemporal corruption analysis")
    p.add_argument("--ref", type=str)
    p.add_argument("--family", choices=("elastic", "motion_blur"), default="elastic")
    p.add_argument("--levels", type=str, default="1..5")
    p.add_argument("--extractor", type=str, default="toy-v1-128")
    p.add_argument("--frame-extractor", dest="frame_extractor", type=str, default="toy-frame-v1-64")
    add_common(p)

    p = sub.add_parser("probe", help="perceptual null-space probe via resampling weights")
    p.add_argument("--ref", type=str)
    p.add_argument("--candidates", type=str)
    p.add_argument("--extractor", type=str, default="toy-v1-128")
    p.add_argument("--freeze", action="store_true", default=False)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--lr0", type=float, default=0.01)
    p.add_argument("--decay-factor", dest="decay_factor", type=float, default=0.1)
    p.add_argument("--decay-every", dest="decay_every", type=int, default=100)
    p.add_argument("--sample-size", dest="sample_size", type=int, default=2048)
    p.add_argument("--candidate-multiple", dest="candidate_multiple", type=int, default=8)
    add_common(p)

    p = sub.add_parser("chunks", help="strided chunk FVD over long videos")
    p.add_argument("--ref", type=str)
    p.add_argument("--gen", type=str)
    p.add_argument("--extractor", type=str, default="toy-v1-128")
    p.add_argument("--chunk-length", dest="chunk_length", type=int, default=16)
    p.add_argument("--stride", type=int, default=64)
    p.add_argument("--offsets", type=str, default=None, help="comma-separated chunk offsets")
    p.add_argument("--full", action="store_true", default=False, help="also compute full-length FVD")
    add_common(p)

    return parser


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not args.config:
        return
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if isinstance(raw, dict) and "config" in raw and "command" in raw:
        if raw["command"] != args.command:
            raise InputError(f"config file is for command {raw['command']!r}, not {args.command!r}")
        raw = raw["config"]
    if not isinstance(raw, dict):
        raise InputError("config file must hold a JSON object")
    known = set(vars(args))
    for key, value in raw.items():
        if key == "command":
            continue
        if key not in known:
            raise InputError(f"unknown config key {key!r}")
        setattr(args, key, value)


def _resolved_config(args: argparse.Namespace) -> dict:
    out = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    return out


def _load_features(path: str, extractor: str):
    p = Path(path)
    if p.suffix == ".fvdf":
        return read_features(p)
    manifest = p if p.suffix == ".json" else p / "manifest.json"
    clips = load_clipset(manifest)
    return resolve_extractor(extractor)(clips)


def _load_clips(path: str) -> ClipSet:
    p = Path(path)
    manifest = p if p.suffix == ".json" else p / "manifest.json"
    return load_clipset(manifest)


def _write_sidecar(args: argparse.Namespace, primary_output: str | None) -> None:
    sidecar = {"command": args.command, "config": _resolved_config(args)}
    if primary_output:
        target = Path(primary_output)
        path = target / "run.json" if target.is_dir() else target.with_name(target.name + ".run.json")
    else:
        path = Path("run.json")
    path.write_text(canonical_json(sidecar), encoding="utf-8")


def _emit(args: argparse.Namespace, payload: dict, text: str | None = None, csv: str | None = None) -> None:
    if args.format == "json":
        rendered = canonical_json(payload)
    elif args.format == "csv" and csv is not None:
        rendered = csv
    elif args.format == "table" and text is not None:
        rendered = text
    else:
        rendered = canonical_json(payload)
    if args.output:
        Path(args.output).write_text(rendered, encoding="utf-8")
    sys.stdout.write(rendered)


def _cmd_compute(args) -> None:
    ref = _load_features(args.ref, args.extractor)
    gen = _load_features(args.gen, args.extractor)
    result = compute_fvd(ref, gen)
    payload = {
        "report_version": REPORT_VERSION,
        "kind": "compute",
        "value": result.value,
        "mean_term": result.mean_term,
        "trace_term": result.trace_term,
        "clamped": result.clamped,
        "ref_rows": ref.rows,
        "gen_rows": gen.rows,
        "dim": ref.dim,
        "extractor_tag": ref.extractor_tag,
    }
    text = (
        f"value       {result.value:.6g}\n"
        f"mean_term   {result.mean_term:.6g}\n"
        f"trace_term  {result.trace_term:.6g}\n"
        f"clamped     {result.clamped}\n"
    )
    _emit(args, payload, text=text)
    _write_sidecar(args, args.output)


def _cmd_distort(args) -> None:
    clips = _load_clips(args.input)
    spec = DistortionSpec(family=args.family, severity=args.severity, mode=args.mode, seed=args.seed)
    threads = args.threads if args.threads else _default_threads()
    distorted = distort_clipset(clips, spec, threads=threads)
    out_dir = Path(args.output or "distorted")
    save_clipset(distorted, out_dir, name=f"{args.family}-l{args.severity}-{args.mode}")
    sys.stdout.write(f"wrote {len(distorted)} clips to {out_dir}\n")
    _write_sidecar(args, str(out_dir))


def _cmd_freeze(args) -> None:
    clips = _load_clips(args.input)
    frozen = freeze_clipset(clips)
    out_dir = Path(args.output or "frozen")
    save_clipset(frozen, out_dir, name="frozen")
    sys.stdout.write(f"wrote {len(frozen)} clips to {out_dir}\n")
    _write_sidecar(args, str(out_dir))


def _cmd_extract(args) -> None:
    clips = _load_clips(args.input)
    features = resolve_extractor(args.extractor)(clips)
    out_path = Path(args.output or "features.fvdf")
    write_features(features, out_path)
    sys.stdout.write(f"wrote {features.rows} x {features.dim} features to {out_path}\n")
    _write_sidecar(args, str(out_path))


def _cmd_sensitivity(args) -> None:
    clips = _load_clips(args.ref)
    threads = args.threads if args.threads else _default_threads()
    report = run_sensitivity(
        clips,
        family=args.family,
        levels=_parse_levels(args.levels),
        seed=args.seed,
        video_extractor=args.extractor,
        frame_extractor=args.frame_extractor,
        threads=threads,
    )
    _emit(args, report.as_dict(), text=report.to_text(), csv=report.to_csv())
    _write_sidecar(args, args.output)


def _cmd_probe(args) -> None:
    ref_clips = _load_clips(args.ref)
    candidate_clips = _load_clips(args.candidates)
    config = ResampleConfig(
        steps=args.steps,
        lr0=args.lr0,
        decay_factor=args.decay_factor,
        decay_every=args.decay_every,
        sample_size=args.sample_size,
        candidate_multiple=args.candidate_multiple,
        seed=args.seed,
    )
    report = run_null_space_probe(
        ref_clips, candidate_clips, config, video_extractor=args.extractor, freeze=args.freeze
    )
    payload = probe_report_dict(report, frozen=args.freeze)
    text = (
        f"fvd_uniform  {report.fvd_uniform:.6g}\n"
        f"fvd_star     {report.fvd_star:.6g}\n"
        f"change       {payload['pct_change_formatted']}\n"
    )
    _emit(args, payload, text=text)
    _write_sidecar(args, args.output)


def _cmd_chunks(args) -> None:
    ref_clips = _load_clips(args.ref)
    gen_clips = _load_clips(args.gen)
    offsets = [int(x) for x in args.offsets.split(",")] if args.offsets else None
    schedule = ChunkSchedule(chunk_length=args.chunk_length, stride=args.stride, offsets=offsets)
    report = run_long_video(
        ref_clips, gen_clips, schedule, video_extractor=args.extractor, include_full=args.full
    )
    _emit(args, report.as_dict(), text=report.to_text(), csv=report.to_csv())
    _write_sidecar(args, args.output)


_COMMANDS = {
    "compute": _cmd_compute,
    "distort": _cmd_distort,
    "freeze": _cmd_freeze,
    "extract": _cmd_extract,
    "sensitivity": _cmd_sensitivity,
    "probe": _cmd_probe,
    "chunks": _cmd_chunks,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, parser)
        _COMMANDS[args.command](args)
    except NumericError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_NUMERIC
    except (FvdLensError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
