import numpy as np
import pytest

from fvdlens import _kernels
from fvdlens.clips import Clip, ClipSet, make_synthetic_clipset
from fvdlens.distortion import (
    DistortionSpec,
    SeverityTable,
    blur_frame,
    distort_clipset,
    elastic_field,
    freeze_clipset,
    motion_blur_kernel,
    warp_frame,
)
from fvdlens.errors import DimensionMismatch, InputError


def frozen_clip(seed=0, frames=8, size=16):
    rng = np.random.default_rng(seed)
    frame = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    return Clip(id="frozen", frames=np.repeat(frame[None], frames, axis=0))


class TestElasticField:
    def test_alpha_zero_gives_zero_field(self):
        fld = elastic_field(16, 16, alpha=0.0, sigma=0.05, seed=3)
        assert np.all(fld == 0.0)

    def test_deterministic(self):
        a = elastic_field(32, 24, alpha=0.1, sigma=0.05, seed=7)
        b = elastic_field(32, 24, alpha=0.1, sigma=0.05, seed=7)
        assert a.tobytes() == b.tobytes()

    def test_max_magnitude_equals_alpha_scale(self):
        alpha = 0.08
        fld = elastic_field(40, 60, alpha=alpha, sigma=0.05, seed=1)
        magnitude = np.sqrt(fld[0] ** 2 + fld[1] ** 2)
        assert abs(magnitude.max() - alpha * 40) < 1e-6

    def test_rejects_bad_parameters(self):
        with pytest.raises(InputError):
            elastic_field(8, 8, alpha=-0.1, sigma=0.05, seed=0)
        with pytest.raises(InputError):
            elastic_field(8, 8, alpha=0.1, sigma=0.0, seed=0)


class TestWarpFrame:
    def test_zero_field_bit_exact(self):
        rng = np.random.default_rng(5)
        frame = rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)
        out = warp_frame(frame, np.zeros((2, 12, 12)))
        assert np.array_equal(out, frame)

    def test_unit_shift_hand_oracle(self):
        # dx = 1: output (y, x) samples input (y, x-1); x = 0 reflects to column 0
        frame = (np.arange(16, dtype=np.uint8).reshape(4, 4) * 10 + 10)[:, :, None]
        fld = np.zeros((2, 4, 4))
        fld[0] = 1.0
        out = warp_frame(frame, fld)[:, :, 0]
        expected = np.array(
            [
                [10, 10, 20, 30],
                [50, 50, 60, 70],
                [90, 90, 100, 110],
                [130, 130, 140, 150],
            ],
            dtype=np.uint8,
        )
        assert np.array_equal(out, expected)

    def test_uniform_frame_invariant(self):
        frame = np.full((10, 10, 3), 77, dtype=np.uint8)
        fld = elastic_field(10, 10, alpha=0.2, sigma=0.1, seed=2)
        assert np.array_equal(warp_frame(frame, fld), frame)

    def test_field_shape_mismatch(self):
        frame = np.zeros((8, 8, 3), dtype=np.uint8)
        with pytest.raises(DimensionMismatch):
            warp_frame(frame, np.zeros((2, 4, 4)))


class TestMotionBlurKernel:
    def test_length_one_identity(self):
        assert np.array_equal(motion_blur_kernel(1, 0.7), np.array([[1.0]]))

    def test_horizontal_line(self):
        kernel = motion_blur_kernel(5, 0.0)
        expected = np.zeros((5, 5))
        expected[2, :] = 0.2
        assert np.allclose(kernel, expected)

    @pytest.mark.parametrize("length,angle", [(3, 0.3), (5, 1.1), (9, 2.7), (13, 0.9), (21, 3.0)])
    def test_normalized_and_nonnegative(self, length, angle):
        kernel = motion_blur_kernel(length, angle)
        assert kernel.shape == (length, length)
        assert abs(kernel.sum() - 1.0) < 1e-9
        assert (kernel >= 0).all()

    def test_rejects_even_length(self):
        with pytest.raises(InputError):
            motion_blur_kernel(4, 0.0)


class TestDistortClipset:
    def test_spatial_mode_keeps_frozen_clips_frozen(self):
        clips = ClipSet([frozen_clip()])
        spec = DistortionSpec(family="elastic", severity=3, mode="spatial", seed=5)
        out = distort_clipset(clips, spec)
        frames = out.clips[0].frames
        assert all(np.array_equal(frames[0], frames[t]) for t in range(1, len(frames)))

    def test_blur_length_one_is_identity(self):
        clips = make_synthetic_clipset(2, 4, 32, 32, seed=3)
        table = SeverityTable(elastic={1: (0.0, 0.05)}, motion_blur={1: (1, np.pi)})
        spec = DistortionSpec(family="motion_blur", severity=1, mode="spatiotemporal", seed=9, table=table)
        out = distort_clipset(clips, spec)
        for original, distorted in zip(clips, out):
            assert np.array_equal(original.frames, distorted.frames)

    def test_elastic_alpha_zero_is_identity(self):
        clips = make_synthetic_clipset(2, 4, 32, 32, seed=3)
        table = SeverityTable(elastic={1: (0.0, 0.05)}, motion_blur={1: (1, np.pi)})
        spec = DistortionSpec(family="elastic", severity=1, mode="spatial", seed=9, table=table)
        out = distort_clipset(clips, spec)
        for original, distorted in zip(clips, out):
            assert np.array_equal(original.frames, distorted.frames)

    def test_spatiotemporal_breaks_frozen_consistency(self):
        clips = ClipSet([frozen_clip(seed=2, frames=6, size=32)])
        spatial = distort_clipset(clips, DistortionSpec("elastic", 3, "spatial", seed=4))
        temporal = distort_clipset(clips, DistortionSpec("elastic", 3, "spatiotemporal", seed=4))

        def inter_frame_mad(clip):
            frames = clip.frames.astype(np.float64)
            return np.abs(np.diff(frames, axis=0)).mean()

        assert inter_frame_mad(spatial.clips[0]) == 0.0
        assert inter_frame_mad(temporal.clips[0]) > 0.0

    def test_deterministic_and_thread_invariant(self):
        clips = make_synthetic_clipset(4, 4, 32, 32, seed=1)
        spec = DistortionSpec(family="motion_blur", severity=2, mode="spatiotemporal", seed=21)
        a = distort_clipset(clips, spec, threads=1)
        b = distort_clipset(clips, spec, threads=4)
        c = distort_clipset(clips, spec, threads=1)
        for x, y, z in zip(a, b, c):
            assert x.frames.tobytes() == y.frames.tobytes() == z.frames.tobytes()

    def test_output_ids_carry_suffix(self):
        clips = make_synthetic_clipset(1, 2, 16, 16, seed=0)
        out = distort_clipset(clips, DistortionSpec("elastic", 2, "spatial", seed=0))
        assert out.clips[0].id == "synth0000__elastic-l2-spatial"

    def test_severity_monotone_pixel_deviation(self):
        clips = make_synthetic_clipset(16, 8, 32, 32, seed=6)
        for family in ("elastic", "motion_blur"):
            deviations = []
            for level in range(1, 6):
                spec = DistortionSpec(family=family, severity=level, mode="spatial", seed=13)
                out = distort_clipset(clips, spec)
                mad = np.mean(
                    [
                        np.abs(o.frames.astype(np.float64) - d.frames.astype(np.float64)).mean()
                        for o, d in zip(clips, out)
                    ]
                )
                deviations.append(mad)
            assert all(b >= a for a, b in zip(deviations, deviations[1:])), (family, deviations)


class TestFreezeClipset:
    def test_all_frames_equal_first(self):
        clips = make_synthetic_clipset(3, 8, 16, 16, seed=2)
        out = freeze_clipset(clips)
        for original, frozen in zip(clips, out):
            assert frozen.frame_count == original.frame_count
            for t in range(frozen.frame_count):
                assert np.array_equal(frozen.frames[t], original.frames[0])

    def test_idempotent(self):
        clips = make_synthetic_clipset(2, 5, 16, 16, seed=2)
        once = freeze_clipset(clips)
        twice = freeze_clipset(once)
        for a, b in zip(once, twice):
            assert a.frames.tobytes() == b.frames.tobytes()


@pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")
class TestKernelPathEquality:
    def test_warp_paths_agree_bitwise(self):
        rng = np.random.default_rng(0)
        frame = rng.uniform(0, 255, size=(24, 20, 3))
        dx = rng.uniform(-3, 3, size=(24, 20))
        dy = rng.uniform(-3, 3, size=(24, 20))
        a = _kernels.warp_bilinear(frame, dx, dy, force="numba")
        b = _kernels.warp_bilinear(frame, dx, dy, force="numpy")
        assert a.tobytes() == b.tobytes()

    def test_conv2d_paths_agree_bitwise(self):
        rng = np.random.default_rng(1)
        img = rng.uniform(0, 255, size=(32, 32))
        kernel = motion_blur_kernel(9, 1.2)
        a = _kernels.conv2d_reflect(img, kernel, force="numba")
        b = _kernels.conv2d_reflect(img, kernel, force="numpy")
        assert a.tobytes() == b.tobytes()

    def test_smooth_paths_agree_bitwise(self):
        rng = np.random.default_rng(2)
        img = rng.uniform(-1, 1, size=(40, 28))
        a = _kernels.smooth_gaussian_reflect(img, 2.5, force="numba")
        b = _kernels.smooth_gaussian_reflect(img, 2.5, force="numpy")
        assert a.tobytes() == b.tobytes()


class TestSeverityTable:
    def test_default_monotone(self):
        table = SeverityTable()
        alphas = [table.elastic[k][0] for k in sorted(table.elastic)]
        lengths = [table.motion_blur[k][0] for k in sorted(table.motion_blur)]
        assert alphas == sorted(alphas) and len(set(alphas)) == 5
        assert lengths == sorted(lengths) and len(set(lengths)) == 5

    def test_rejects_non_monotone(self):
        with pytest.raises(InputError):
            SeverityTable(elastic={1: (0.1, 0.05), 2: (0.05, 0.05)})

    def test_blur_frame_identity_kernel(self):
        rng = np.random.default_rng(3)
        frame = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
        assert np.array_equal(blur_frame(frame, np.array([[1.0]])), frame)
