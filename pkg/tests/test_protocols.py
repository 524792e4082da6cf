import json

import numpy as np
import pytest

from fvdlens.clips import Clip, ClipSet, make_synthetic_clipset
from fvdlens.distortion import DistortionSpec, SeverityTable, distort_clipset, freeze_clipset
from fvdlens.errors import ChunkOutOfRange, InputError
from fvdlens.feature_io import ToyExtractorConfig, toy_extract
from fvdlens.frechet import FeatureMatrix
from fvdlens.protocols import (
    ChunkSchedule,
    canonical_json,
    delta_pct,
    format_pct,
    probe_report_dict,
    run_long_video,
    run_null_space_probe,
    run_sensitivity,
)
from fvdlens.resampler import ResampleConfig
from fvdlens.schemas import validate_report

IDENTITY_TABLE = SeverityTable(elastic={1: (0.0, 0.05)}, motion_blur={1: (1, np.pi)})


class TestReportArithmetic:
    def test_table_style_delta_formats_one_decimal(self):
        # report arithmetic on the published shape: 1460.18 -> 1705.27 is +16.8%
        assert format_pct(delta_pct(1460.18, 1705.27)) == "+16.8%"

    def test_chunk_style_delta_formats_two_decimals(self):
        # 155.58 -> 141.82 is -8.84%
        assert format_pct(delta_pct(155.58, 141.82), decimals=2) == "-8.84%"

    def test_probe_style_delta(self):
        assert format_pct(delta_pct(1303.13, 715.96)) == "-45.1%"

    def test_zero_base(self):
        assert delta_pct(0.0, 0.0) == 0.0
        assert delta_pct(0.0, 1.0) is None


class TestCanonicalJson:
    def test_six_significant_digits(self):
        out = canonical_json({"x": 1234.56789, "y": 0.000123456789})
        doc = json.loads(out)
        assert doc["x"] == 1234.57
        assert doc["y"] == 0.000123457

    def test_stable_bytes(self):
        payload = {"b": [1.0 / 3.0, 2.0 / 7.0], "a": {"k": 1}}
        assert canonical_json(payload) == canonical_json(payload)

    def test_numpy_scalars_handled(self):
        out = canonical_json({"v": np.float64(1.5), "n": np.int64(3)})
        assert json.loads(out) == {"v": 1.5, "n": 3}


class TestRunSensitivity:
    def test_identity_distortion_zero_everything(self):
        clips = make_synthetic_clipset(6, 4, 32, 32, seed=3)
        report = run_sensitivity(
            clips,
            family="motion_blur",
            levels=[1],
            seed=0,
            video_extractor="toy-v1-128",
            frame_extractor="toy-frame-v1-64",
            severity_table=IDENTITY_TABLE,
        )
        entry = report.levels[0]
        assert entry.fvd_spatial < 1e-9 and entry.fvd_spatiotemporal < 1e-9
        assert entry.fid_spatial < 1e-9 and entry.fid_spatiotemporal < 1e-9
        assert entry.fvd_delta_pct == 0.0 and entry.fid_delta_pct == 0.0

    def test_desk_run_temporal_sensitivity(self):
        clips = make_synthetic_clipset(24, 8, 48, 48, seed=51)
        report = run_sensitivity(
            clips,
            family="elastic",
            levels=[1, 3, 5],
            seed=7,
            video_extractor="toy-v1-128",
            frame_extractor="toy-frame-v1-64",
        )
        for entry in report.levels:
            assert entry.fvd_delta_pct > 0
            assert entry.fvd_spatiotemporal > entry.fvd_spatial
        assert report.average.fvd_delta_pct > 0
        assert report.severity_table == SeverityTable().as_dict()
        assert report.extractor_tag == "toy-v1-128"

    def test_delta_recomputable_from_absolutes(self):
        clips = make_synthetic_clipset(8, 6, 32, 32, seed=9)
        report = run_sensitivity(
            clips, "motion_blur", [2, 4], seed=3,
            video_extractor="toy-v1-128", frame_extractor="toy-frame-v1-64",
        )
        doc = json.loads(canonical_json(report.as_dict()))
        for row in doc["levels"] + [doc["average"]]:
            recomputed = (row["fvd_spatiotemporal"] - row["fvd_spatial"]) / row["fvd_spatial"] * 100
            assert abs(recomputed - row["fvd_delta_pct"]) < 0.05
            recomputed = (row["fid_spatiotemporal"] - row["fid_spatial"]) / row["fid_spatial"] * 100
            assert abs(recomputed - row["fid_delta_pct"]) < 0.05

    def test_report_validates_and_serializes_deterministically(self):
        clips = make_synthetic_clipset(4, 4, 32, 32, seed=2)
        kwargs = dict(
            family="elastic", levels=[2], seed=5,
            video_extractor="toy-v1-128", frame_extractor="toy-frame-v1-64",
        )
        a = run_sensitivity(clips, **kwargs)
        b = run_sensitivity(clips, **kwargs)
        assert canonical_json(a.as_dict()) == canonical_json(b.as_dict())
        validate_report(a.as_dict())

    def test_unknown_extractor_rejected(self):
        clips = make_synthetic_clipset(2, 2, 16, 16, seed=1)
        from fvdlens.errors import ExtractorUnavailable

        with pytest.raises(ExtractorUnavailable):
            run_sensitivity(clips, "elastic", [1], 0, "missing-tag", "toy-frame-v1-64")


class TestRunNullSpaceProbe:
    def test_freeze_idempotent_reports_identical(self):
        ref = make_synthetic_clipset(16, 6, 32, 32, seed=31)
        static = freeze_clipset(make_synthetic_clipset(32, 6, 32, 32, seed=32))
        config = ResampleConfig(steps=30, sample_size=8, candidate_multiple=4, seed=4)
        frozen = run_null_space_probe(ref, static, config, "toy-v1-128", freeze=True)
        plain = run_null_space_probe(ref, static, config, "toy-v1-128", freeze=False)
        assert canonical_json(probe_report_dict(frozen)) == canonical_json(probe_report_dict(plain))

    def test_candidate_multiple_mismatch_warns(self):
        ref = make_synthetic_clipset(8, 4, 16, 16, seed=1)
        candidates = make_synthetic_clipset(9, 4, 16, 16, seed=2)
        config = ResampleConfig(steps=2, sample_size=4, candidate_multiple=2, seed=0)
        with pytest.warns(UserWarning, match="candidate count"):
            run_null_space_probe(ref, candidates, config, "toy-v1-128")

    def test_defaults_echo_protocol_constants(self):
        config = ResampleConfig()
        assert config.candidate_multiple * config.sample_size == 16384
        assert config.sample_size == 2048

    def test_planted_candidates_recovered(self):
        # 25% matching-population candidates + 75% heavily corrupted ones
        config24 = ToyExtractorConfig(output_dim=24)

        def vex(clipset):
            feats = toy_extract(clipset, config24)
            return FeatureMatrix(8.0 * feats.data, ids=feats.ids, extractor_tag=feats.extractor_tag)

        ref = make_synthetic_clipset(128, 16, 32, 32, seed=100)
        matching = make_synthetic_clipset(128, 16, 32, 32, seed=200)
        raw = make_synthetic_clipset(384, 16, 32, 32, seed=300)
        heavy = SeverityTable(elastic={5: (0.25, 0.05)}, motion_blur={5: (21, np.pi)})
        blurred = distort_clipset(raw, DistortionSpec("motion_blur", 5, "spatial", seed=7, table=heavy))
        corrupted = distort_clipset(blurred, DistortionSpec("elastic", 5, "spatiotemporal", seed=8, table=heavy))
        candidates = ClipSet(
            [Clip(id=f"m{c.id}", frames=c.frames) for c in matching] + list(corrupted)
        )
        config = ResampleConfig(steps=300, sample_size=128, candidate_multiple=4, seed=17)
        report = run_null_space_probe(ref, candidates, config, vex)
        assert report.fvd_star < 0.6 * report.fvd_uniform
        matching_top = sum(1 for cid in report.top_ids if cid.startswith("msynth"))
        assert matching_top >= 0.8 * len(report.top_ids)
        validate_report(probe_report_dict(report, frozen=False))


class TestChunkSchedule:
    def test_stride_derivation(self):
        schedule = ChunkSchedule(chunk_length=16, stride=64)
        assert schedule.resolve(144) == [0, 64, 128]
        assert schedule.resolve(143) == [0, 64]

    def test_explicit_offsets(self):
        schedule = ChunkSchedule(chunk_length=16, offsets=[0, 10, 40])
        assert schedule.resolve(56) == [0, 10, 40]

    def test_out_of_range(self):
        with pytest.raises(ChunkOutOfRange):
            ChunkSchedule(chunk_length=16, offsets=[0, 90]).resolve(100)
        with pytest.raises(ChunkOutOfRange):
            ChunkSchedule(chunk_length=32, stride=8).resolve(16)

    def test_rejects_bad_offsets(self):
        with pytest.raises(InputError):
            ChunkSchedule(offsets=[5, 5])
        with pytest.raises(InputError):
            ChunkSchedule(offsets=[])


class TestRunLongVideo:
    def test_identical_sets_all_zero(self):
        clips = make_synthetic_clipset(6, 40, 32, 32, seed=8)
        report = run_long_video(clips, clips, ChunkSchedule(chunk_length=8, stride=16), "toy-v1-128")
        assert report.offsets == [0, 16, 32]
        assert all(v < 1e-9 for v in report.chunk_fvd.values())

    def test_periodic_artifact_toy(self):
        ref = make_synthetic_clipset(16, 96, 32, 32, seed=5)
        gen_clips = []
        for clip in ref:
            frames = clip.frames.copy()
            for t in range(16, 96):
                frames[t] = clip.frames[t % 5]
            gen_clips.append(Clip(id=clip.id + "_gen", frames=frames))
        gen = ClipSet(gen_clips)
        schedule = ChunkSchedule(chunk_length=16, stride=40)
        report = run_long_video(ref, gen, schedule, "toy-v1-128", include_full=True)
        assert report.offsets == [0, 40, 80]
        first = report.chunk_fvd[0]
        assert first < 1e-9
        assert all(report.chunk_fvd[o] > 1e-4 for o in report.offsets[1:])
        assert report.full_fvd is not None and report.full_fvd > 1e-4
        validate_report(report.as_dict())

    def test_file_backed_extractor_rejected(self, tmp_path):
        from fvdlens.errors import ExtractorLengthUnsupported
        from fvdlens.feature_io import write_features

        clips = make_synthetic_clipset(3, 24, 32, 32, seed=1)
        path = tmp_path / "pre.fvdf"
        write_features(toy_extract(clips), path)
        with pytest.raises(ExtractorLengthUnsupported):
            run_long_video(clips, clips, ChunkSchedule(chunk_length=8, stride=8), f"file:{path}")

    def test_report_format_and_determinism(self):
        clips = make_synthetic_clipset(5, 24, 32, 32, seed=14)
        other = make_synthetic_clipset(5, 24, 32, 32, seed=15)
        schedule = ChunkSchedule(chunk_length=8, stride=8)
        a = run_long_video(clips, other, schedule, "toy-v1-128")
        b = run_long_video(clips, other, schedule, "toy-v1-128")
        assert canonical_json(a.as_dict()) == canonical_json(b.as_dict())
        doc = json.loads(canonical_json(a.as_dict()))
        for chunk in doc["chunks"][1:]:
            recomputed = (chunk["fvd"] - doc["chunks"][0]["fvd"]) / doc["chunks"][0]["fvd"] * 100
            assert abs(recomputed - chunk["pct_change_vs_first"]) < 0.05
