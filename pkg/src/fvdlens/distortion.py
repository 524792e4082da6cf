"""Paired video corruptions: elastic warps and motion blur at five severities.

Spatial mode draws one parameter set per clip and applies it to every frame,
degrading frames while keeping them temporally consistent. Spatiotemporal
mode redraws the parameters for every frame at the same severity, adding
temporal inconsistency at matched per-frame corruption strength. The two
modes differ only in whether the frame index enters the RNG derivation
(SeedSequence spawn keys (clip,) vs. (clip, frame)), which is what makes the
pairing auditable.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import conv2d_reflect, smooth_gaussian_reflect, warp_bilinear
from .clips import Clip, ClipSet
from .errors import DimensionMismatch, EmptyClipSet, InputError

FAMILIES = ("elastic", "motion_blur")
MODES = ("spatial", "spatiotemporal")


@dataclass
class SeverityTable:
    """Per-family corruption parameters for levels 1..5.

    elastic: (alpha, sigma), both fractions of min(H, W); alpha is the max
    displacement magnitude, sigma the smoothing radius of the field.
    motion_blur: (kernel_length in pixels, angle_range in radians).
    These values are configuration, not constants.
    """

    elastic: dict[int, tuple[float, float]] = field(
        default_factory=lambda: {
            1: (0.02, 0.05),
            2: (0.04, 0.05),
            3: (0.06, 0.05),
            4: (0.08, 0.05),
            5: (0.10, 0.05),
        }
    )
    motion_blur: dict[int, tuple[int, float]] = field(
        default_factory=lambda: {
            1: (5, np.pi),
            2: (9, np.pi),
            3: (13, np.pi),
            4: (17, np.pi),
            5: (21, np.pi),
        }
    )

    def __post_init__(self):
        alphas = [self.elastic[k][0] for k in sorted(self.elastic)]
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise InputError("elastic alpha must be strictly increasing in level")
        lengths = [self.motion_blur[k][0] for k in sorted(self.motion_blur)]
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise InputError("motion blur kernel_length must be strictly increasing in level")
        for length, _ in self.motion_blur.values():
            if length < 1 or length % 2 == 0:
                raise InputError(f"kernel_length must be odd and >= 1, got {length}")

    def as_dict(self) -> dict:
        return {
            "elastic": {str(k): list(v) for k, v in sorted(self.elastic.items())},
            "motion_blur": {str(k): [int(v[0]), float(v[1])] for k, v in sorted(self.motion_blur.items())},
        }


DEFAULT_SEVERITY = SeverityTable()


@dataclass
class DistortionSpec:
    family: str
    severity: int
    mode: str
    seed: int
    table: SeverityTable = field(default_factory=SeverityTable)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        levels = self.table.elastic if self.family == "elastic" else self.table.motion_blur
        if self.severity not in levels:
            raise InputError(f"severity {self.severity} not in table levels {sorted(levels)}")


def elastic_field(height: int, width: int, alpha: float, sigma: float, seed) -> np.ndarray:
    """Smoothed random displacement field, shape (2, H, W): [dx, dy].

    Uniform [-1, 1] noise per axis, Gaussian-smoothed (radius 3*sigma*min(H,W)),
    normalized to unit max magnitude, then scaled to alpha*min(H,W) pixels.
    """
    if alpha < 0:
        raise InputError("alpha must be >= 0")
    if sigma <= 0:
        raise InputError("sigma must be > 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=(2, height, width))
    sigma_px = sigma * min(height, width)
    smooth = np.stack([smooth_gaussian_reflect(noise[0], sigma_px), smooth_gaussian_reflect(noise[1], sigma_px)])
    magnitude = np.sqrt(smooth[0] ** 2 + smooth[1] ** 2)
    peak = magnitude.max()
    if peak == 0.0:
        return np.zeros((2, height, width))
    return smooth * (alpha * min(height, width) / peak)


def warp_frame(frame: np.ndarray, fld: np.ndarray) -> np.ndarray:
    """Warp one H x W x C uint8 frame by a (2, H, W) field: output pixel (y, x)
    samples the input at (y - dy, x - dx) bilinearly with reflected borders."""
    frame = np.asarray(frame)
    if fld.shape != (2, frame.shape[0], frame.shape[1]):
        raise DimensionMismatch(f"field shape {fld.shape} does not match frame {frame.shape}")
    warped = warp_bilinear(frame.astype(np.float64), fld[0], fld[1])
    return np.clip(np.rint(warped), 0, 255).astype(np.uint8)


def motion_blur_kernel(length: int, angle: float) -> np.ndarray:
    """Anti-aliased line kernel of the given pixel length through the center.

    ``length`` sample points along direction (cos a, sin a) are bilinearly
    splatted onto a length x length grid and normalized to sum 1.
    """
    if length < 1 or length % 2 == 0:
        raise InputError(f"kernel length must be odd and >= 1, got {length}")
    kernel = np.zeros((length, length))
    center = (length - 1) / 2.0
    cos_a = np.cos(angle)
    sin_a = np.sin(angle)
    for step in range(length):
        t = step - center
        x = center + t * cos_a
        y = center + t * sin_a
        x0 = int(np.floor(x))
        y0 = int(np.floor(y))
        fx = x - x0
        fy = y - y0
        for dy, wy in ((0, 1.0 - fy), (1, fy)):
            for dx, wx in ((0, 1.0 - fx), (1, fx)):
                w = wy * wx
                if w == 0.0:
                    continue
                yy, xx = y0 + dy, x0 + dx
                if 0 <= yy < length and 0 <= xx < length:
                    kernel[yy, xx] += w
    return kernel / kernel.sum()


def blur_frame(frame: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    out = np.empty_like(frame)
    as_float = frame.astype(np.float64)
    for ch in range(frame.shape[2]):
        blurred = conv2d_reflect(np.ascontiguousarray(as_float[:, :, ch]), kernel)
        out[:, :, ch] = np.clip(np.rint(blurred), 0, 255).astype(np.uint8)
    return out


def _clip_rng(seed: int, clip_index: int, frame_index: int | None) -> np.random.Generator:
    key = (clip_index,) if frame_index is None else (clip_index, frame_index)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _distort_one(clip: Clip, index: int, spec: DistortionSpec) -> Clip:
    h, w = clip.height, clip.width
    per_frame = spec.mode == "spatiotemporal"
    frames = np.empty_like(clip.frames)

    if spec.family == "elastic":
        alpha, sigma = spec.table.elastic[spec.severity]
        shared = None if per_frame else elastic_field(h, w, alpha, sigma, _clip_rng(spec.seed, index, None))
        for t in range(clip.frame_count):
            fld = (
                elastic_field(h, w, alpha, sigma, _clip_rng(spec.seed, index, t))
                if per_frame
                else shared
            )
            frames[t] = warp_frame(clip.frames[t], fld)
    else:
        length, angle_range = spec.table.motion_blur[spec.severity]
        if per_frame:
            kernels = [
                motion_blur_kernel(length, _clip_rng(spec.seed, index, t).uniform(0.0, angle_range))
                for t in range(clip.frame_count)
            ]
        else:
            angle = _clip_rng(spec.seed, index, None).uniform(0.0, angle_range)
            kernels = [motion_blur_kernel(length, angle)] * clip.frame_count
        for t in range(clip.frame_count):
            frames[t] = blur_frame(clip.frames[t], kernels[t])

    suffix = f"{spec.family}-l{spec.severity}-{spec.mode}"
    return Clip(id=f"{clip.id}__{suffix}", frames=frames)


def distort_clipset(clips: ClipSet, spec: DistortionSpec, threads: int = 1) -> ClipSet:
    """Apply the corruption to every clip. Pure in (clips, spec): identical
    seeds yield bit-identical outputs regardless of thread count."""
    if len(clips) == 0:
        raise EmptyClipSet("cannot distort an empty clip set")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(lambda pair: _distort_one(pair[1], pair[0], spec), enumerate(clips)))
    else:
        out = [_distort_one(clip, i, spec) for i, clip in enumerate(clips)]
    return ClipSet(out)


def freeze_clipset(clips: ClipSet) -> ClipSet:
    """Replace every clip by its first frame repeated for the full length."""
    if len(clips) == 0:
        raise EmptyClipSet("cannot freeze an empty clip set")
    frozen = []
    for clip in clips:
        frames = np.repeat(clip.frames[0:1], clip.frame_count, axis=0)
        frozen.append(Clip(id=clip.id, frames=frames))
    return ClipSet(frozen)
