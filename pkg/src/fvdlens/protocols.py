"""Experiment protocols: temporal sensitivity, null-space probe, long videos.

Reports are plain dataclasses that serialize to canonical JSON (stable key
order, floats at 6 significant digits) so reruns are byte-comparable, plus
aligned text tables and optional CSV.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .clips import Clip, ClipSet
from .distortion import DEFAULT_SEVERITY, DistortionSpec, SeverityTable, distort_clipset, freeze_clipset
from .errors import ChunkOutOfRange, ExtractorLengthUnsupported, InputError
from .feature_io import resolve_extractor
from .frechet import compute_fvd
from .resampler import ResampleConfig, ResampleReport, probe_null_space

REPORT_VERSION = 1


# -- canonical serialization ---------------------------------------------------


def round_sig(x: float, digits: int = 6) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))


def _canonicalize(obj):
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, (np.floating,)):
        return round_sig(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonicalize(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    """Stable-order JSON with floats rounded to 6 significant digits."""
    return json.dumps(_canonicalize(obj), indent=2, allow_nan=False) + "\n"


def format_pct(value: float, decimals: int = 1) -> str:
    return f"{value:+.{decimals}f}%"


def delta_pct(base: float, other: float) -> float | None:
    """(other - base) / base * 100; None when the base is zero and they differ."""
    if base > 0:
        return (other - base) / base * 100.0
    return 0.0 if other == base else None


# -- temporal sensitivity -------------------------------------------------------


@dataclass
class SensitivityLevel:
    level: int
    fid_spatial: float
    fid_spatiotemporal: float
    fid_delta_pct: float | None
    fvd_spatial: float
    fvd_spatiotemporal: float
    fvd_delta_pct: float | None


@dataclass
class SensitivityReport:
    family: str
    levels: list[SensitivityLevel]
    average: SensitivityLevel
    extractor_tag: str
    frame_extractor_tag: str
    severity_table: dict
    seed: int
    clip_count: int
    report_version: int = REPORT_VERSION

    def as_dict(self) -> dict:
        def level_dict(entry: SensitivityLevel) -> dict:
            return {
                "level": entry.level,
                "fid_spatial": entry.fid_spatial,
                "fid_spatiotemporal": entry.fid_spatiotemporal,
                "fid_delta_pct": entry.fid_delta_pct,
                "fvd_spatial": entry.fvd_spatial,
                "fvd_spatiotemporal": entry.fvd_spatiotemporal,
                "fvd_delta_pct": entry.fvd_delta_pct,
            }

        return {
            "report_version": self.report_version,
            "kind": "sensitivity",
            "family": self.family,
            "extractor_tag": self.extractor_tag,
            "frame_extractor_tag": self.frame_extractor_tag,
            "seed": self.seed,
            "clip_count": self.clip_count,
            "severity_table": self.severity_table,
            "levels": [level_dict(entry) for entry in self.levels],
            "average": level_dict(self.average),
        }

    def to_text(self) -> str:
        header = ["level", "fid_s", "fid_st", "fid_d%", "fvd_s", "fvd_st", "fvd_d%"]
        rows = [header]
        for entry in self.levels + [self.average]:
            rows.append(
                [
                    str(entry.level) if entry is not self.average else "avg",
                    f"{entry.fid_spatial:.6g}",
                    f"{entry.fid_spatiotemporal:.6g}",
                    format_pct(entry.fid_delta_pct) if entry.fid_delta_pct is not None else "n/a",
                    f"{entry.fvd_spatial:.6g}",
                    f"{entry.fvd_spatiotemporal:.6g}",
                    format_pct(entry.fvd_delta_pct) if entry.fvd_delta_pct is not None else "n/a",
                ]
            )
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in rows]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["level,fid_spatial,fid_spatiotemporal,fid_delta_pct,fvd_spatial,fvd_spatiotemporal,fvd_delta_pct"]
        for entry in self.levels + [self.average]:
            label = entry.level if entry is not self.average else "avg"
            fid_d = "" if entry.fid_delta_pct is None else f"{entry.fid_delta_pct:.6g}"
            fvd_d = "" if entry.fvd_delta_pct is None else f"{entry.fvd_delta_pct:.6g}"
            lines.append(
                f"{label},{entry.fid_spatial:.6g},{entry.fid_spatiotemporal:.6g},{fid_d},"
                f"{entry.fvd_spatial:.6g},{entry.fvd_spatiotemporal:.6g},{fvd_d}"
            )
        return "\n".join(lines) + "\n"


def run_sensitivity(
    ref_clips: ClipSet,
    family: str,
    levels: list[int],
    seed: int,
    video_extractor,
    frame_extractor,
    severity_table: SeverityTable | None = None,
    threads: int = 1,
) -> SensitivityReport:
    """Distort at each level in both modes, then score FVD and frame FID
    against the clean originals."""
    table = severity_table or DEFAULT_SEVERITY
    vex = resolve_extractor(video_extractor)
    fex = resolve_extractor(frame_extractor)
    ref_video_feats = vex(ref_clips)
    ref_frame_feats = fex(ref_clips)

    records = []
    for level in levels:
        per_mode = {}
        for mode in ("spatial", "spatiotemporal"):
            spec = DistortionSpec(family=family, severity=level, mode=mode, seed=seed, table=table)
            distorted = distort_clipset(ref_clips, spec, threads=threads)
            per_mode[mode] = (
                compute_fvd(ref_video_feats, vex(distorted)).value,
                compute_fvd(ref_frame_feats, fex(distorted)).value,
            )
        fvd_s, fid_s = per_mode["spatial"]
        fvd_st, fid_st = per_mode["spatiotemporal"]
        records.append(
            SensitivityLevel(
                level=level,
                fid_spatial=fid_s,
                fid_spatiotemporal=fid_st,
                fid_delta_pct=delta_pct(fid_s, fid_st),
                fvd_spatial=fvd_s,
                fvd_spatiotemporal=fvd_st,
                fvd_delta_pct=delta_pct(fvd_s, fvd_st),
            )
        )

    fid_s_avg = float(np.mean([r.fid_spatial for r in records]))
    fid_st_avg = float(np.mean([r.fid_spatiotemporal for r in records]))
    fvd_s_avg = float(np.mean([r.fvd_spatial for r in records]))
    fvd_st_avg = float(np.mean([r.fvd_spatiotemporal for r in records]))
    average = SensitivityLevel(
        level=0,
        fid_spatial=fid_s_avg,
        fid_spatiotemporal=fid_st_avg,
        fid_delta_pct=delta_pct(fid_s_avg, fid_st_avg),
        fvd_spatial=fvd_s_avg,
        fvd_spatiotemporal=fvd_st_avg,
        fvd_delta_pct=delta_pct(fvd_s_avg, fvd_st_avg),
    )
    return SensitivityReport(
        family=family,
        levels=records,
        average=average,
        extractor_tag=ref_video_feats.extractor_tag,
        frame_extractor_tag=ref_frame_feats.extractor_tag,
        severity_table=table.as_dict(),
        seed=seed,
        clip_count=len(ref_clips),
    )


# -- null-space probe -----------------------------------------------------------


def probe_report_dict(report: ResampleReport, frozen: bool | None = None) -> dict:
    out = {
        "report_version": REPORT_VERSION,
        "kind": "null_space_probe",
        "fvd_uniform": report.fvd_uniform,
        "fvd_weighted_objective": report.fvd_weighted_objective,
        "fvd_star": report.fvd_star,
        "pct_change": report.pct_change,
        "pct_change_formatted": format_pct(report.pct_change),
        "candidate_count": report.candidate_count,
        "sample_size": report.sample_size,
        "steps": report.steps,
        "lr0": report.lr0,
        "decay_factor": report.decay_factor,
        "decay_every": report.decay_every,
        "seed": report.seed,
        "sampling": report.sampling,
        "top_ids": report.top_ids,
        "bottom_ids": report.bottom_ids,
        "objective_trace": report.objective_trace,
    }
    if frozen is not None:
        out["frozen"] = frozen
    return out


def run_null_space_probe(
    ref_clips: ClipSet,
    candidate_clips: ClipSet,
    config: ResampleConfig,
    video_extractor,
    freeze: bool = False,
) -> ResampleReport:
    """Optionally freeze candidates, extract features, and run the probe."""
    expected = config.candidate_multiple * config.sample_size
    if len(candidate_clips) != expected:
        warnings.warn(
            f"candidate count {len(candidate_clips)} != candidate_multiple x sample_size = {expected}",
            stacklevel=2,
        )
    if freeze:
        candidate_clips = freeze_clipset(candidate_clips)
    vex = resolve_extractor(video_extractor)
    ref_feats = vex(ref_clips)
    cand_feats = vex(candidate_clips)
    return probe_null_space(ref_feats, cand_feats, config)


# -- long-video evaluation --------------------------------------------------------


@dataclass
class ChunkSchedule:
    """16-frames-at-a-stride chunking; explicit offsets override the stride."""

    chunk_length: int = 16
    stride: int = 64
    offsets: list[int] | None = None

    def __post_init__(self):
        if self.chunk_length < 1:
            raise InputError("chunk_length must be >= 1")
        if self.offsets is None and self.stride < 1:
            raise InputError("stride must be >= 1")
        if self.offsets is not None:
            if not self.offsets:
                raise InputError("offsets list is empty")
            if any(o < 0 for o in self.offsets):
                raise InputError("offsets must be >= 0")
            if any(b <= a for a, b in zip(self.offsets, self.offsets[1:])):
                raise InputError("offsets must be strictly increasing")

    def resolve(self, total_length: int) -> list[int]:
        if self.offsets is not None:
            last_end = self.offsets[-1] + self.chunk_length
            if last_end > total_length:
                raise ChunkOutOfRange(
                    f"chunk at offset {self.offsets[-1]} ends at {last_end}, clips have {total_length} frames"
                )
            return list(self.offsets)
        if self.chunk_length > total_length:
            raise ChunkOutOfRange(
                f"chunk_length {self.chunk_length} exceeds clip length {total_length}"
            )
        return list(range(0, total_length - self.chunk_length + 1, self.stride))


@dataclass
class LongVideoReport:
    chunk_length: int
    offsets: list[int]
    chunk_fvd: dict[int, float]
    pct_change_vs_first: dict[int, float | None]
    full_fvd: float | None
    extractor_tag: str
    report_version: int = REPORT_VERSION

    def as_dict(self) -> dict:
        return {
            "report_version": self.report_version,
            "kind": "long_video",
            "extractor_tag": self.extractor_tag,
            "chunk_length": self.chunk_length,
            "chunks": [
                {
                    "offset": offset,
                    "fvd": self.chunk_fvd[offset],
                    "pct_change_vs_first": self.pct_change_vs_first[offset],
                    "pct_change_formatted": (
                        format_pct(self.pct_change_vs_first[offset], decimals=2)
                        if self.pct_change_vs_first[offset] is not None
                        else None
                    ),
                }
                for offset in self.offsets
            ],
            "full_fvd": self.full_fvd,
        }

    def to_text(self) -> str:
        rows = [["offset", "fvd", "change_vs_first"]]
        for offset in self.offsets:
            pct = self.pct_change_vs_first[offset]
            rows.append(
                [
                    str(offset),
                    f"{self.chunk_fvd[offset]:.6g}",
                    format_pct(pct, decimals=2) if pct is not None else "n/a",
                ]
            )
        if self.full_fvd is not None:
            rows.append(["full", f"{self.full_fvd:.6g}", ""])
        widths = [max(len(row[i]) for row in rows) for i in range(3)]
        return "\n".join("  ".join(c.rjust(widths[i]) for i, c in enumerate(r)) for r in rows) + "\n"

    def to_csv(self) -> str:
        lines = ["offset,fvd,pct_change_vs_first"]
        for offset in self.offsets:
            pct = self.pct_change_vs_first[offset]
            lines.append(f"{offset},{self.chunk_fvd[offset]:.6g},{'' if pct is None else f'{pct:.6g}'}")
        if self.full_fvd is not None:
            lines.append(f"full,{self.full_fvd:.6g},")
        return "\n".join(lines) + "\n"


def _slice_clips(clips: ClipSet, start: int, length: int) -> ClipSet:
    sliced = [Clip(id=c.id, frames=c.frames[start : start + length]) for c in clips]
    return ClipSet(sliced)


def run_long_video(
    ref_clips: ClipSet,
    gen_clips: ClipSet,
    schedule: ChunkSchedule,
    video_extractor,
    include_full: bool = False,
) -> LongVideoReport:
    """FVD per strided chunk, plus full-length FVD when requested."""
    vex = resolve_extractor(video_extractor)
    if getattr(vex, "file_backed", False):
        # precomputed rows cannot be recomputed per chunk; they would silently
        # repeat the same features at every offset
        raise ExtractorLengthUnsupported(
            "file-backed features cannot drive chunked evaluation; use a callable extractor"
        )
    total = min(min(c.frame_count for c in ref_clips), min(c.frame_count for c in gen_clips))
    offsets = schedule.resolve(total)
    chunk_fvd = {}
    tag = ""
    for offset in offsets:
        ref_feats = vex(_slice_clips(ref_clips, offset, schedule.chunk_length))
        gen_feats = vex(_slice_clips(gen_clips, offset, schedule.chunk_length))
        tag = tag or ref_feats.extractor_tag
        chunk_fvd[offset] = compute_fvd(ref_feats, gen_feats).value
    first = chunk_fvd[offsets[0]]
    pct = {o: delta_pct(first, chunk_fvd[o]) for o in offsets}
    full_fvd = None
    if include_full:
        ref_full = _slice_clips(ref_clips, 0, total)
        gen_full = _slice_clips(gen_clips, 0, total)
        full_fvd = compute_fvd(vex(ref_full), vex(gen_full)).value
    return LongVideoReport(
        chunk_length=schedule.chunk_length,
        offsets=offsets,
        chunk_fvd=chunk_fvd,
        pct_change_vs_first=pct,
        full_fvd=full_fvd,
        extractor_tag=tag,
    )
