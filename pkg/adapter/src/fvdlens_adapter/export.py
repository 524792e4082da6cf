"""Batch feature export: manifest clips -> model -> FeatureFile on disk."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .errors import ClipTooLong, ShapeMismatch
from .featurefile import write_feature_file
from .manifest import load_manifest
from .models import resolve_model


@dataclass
class AdapterConfig:
    model_tag: str
    manifest_path: str
    output_path: str
    clip_length: int | None = None
    resize: int = 224
    batch_size: int = 8
    device: str = "cpu"
    interpolate_positional: bool = False
    weights_dir: str | None = None


def _prepare_clip(frames: np.ndarray, size: int, device: str) -> torch.Tensor:
    """uint8 T x H x W x C -> float32 (C, T, size, size) in [0, 1]."""
    if frames.shape[3] == 1:
        frames = np.repeat(frames, 3, axis=3)
    x = torch.from_numpy(frames.astype(np.float32) / 255.0)
    x = x.permute(3, 0, 1, 2)  # C, T, H, W
    if x.shape[2] != size or x.shape[3] != size:
        x = torch.nn.functional.interpolate(
            x, size=(size, size), mode="bilinear", align_corners=False
        )
    return x.to(device)


def _check_length(model, frame_count: int, interpolate: bool, clip_id: str) -> None:
    native = getattr(model, "clip_length", None)
    if native is None or frame_count == native:
        return
    if interpolate and getattr(model, "supports_interpolation", False):
        return
    raise ClipTooLong(
        f"clip {clip_id!r} has {frame_count} frames, model expects {native} "
        "(enable positional-encoding interpolation to accept other lengths)"
    )


def export_features(config: AdapterConfig) -> str:
    """Run the model over every manifest clip and write one feature row per
    clip, ids preserved in manifest order. Returns the extractor tag."""
    model, tag = resolve_model(config.model_tag, config.weights_dir)
    model = model.to(config.device)
    size = config.resize if config.resize else getattr(model, "input_size", 224)
    size = getattr(model, "input_size", size) or size

    clips = load_manifest(config.manifest_path)
    if config.clip_length is not None:
        for clip in clips:
            if clip.frames.shape[0] != config.clip_length:
                raise ClipTooLong(
                    f"clip {clip.id!r} has {clip.frames.shape[0]} frames, "
                    f"config expects {config.clip_length}"
                )
    for clip in clips:
        _check_length(model, clip.frames.shape[0], config.interpolate_positional, clip.id)

    rows = []
    with torch.no_grad():
        for start in range(0, len(clips), config.batch_size):
            batch_clips = clips[start : start + config.batch_size]
            # clips in one batch may differ in length; group by length
            by_length: dict[int, list] = {}
            for clip in batch_clips:
                by_length.setdefault(clip.frames.shape[0], []).append(clip)
            feats_by_id = {}
            for group in by_length.values():
                batch = torch.stack([_prepare_clip(c.frames, size, config.device) for c in group])
                feats = model.forward_features(batch)
                if feats.ndim != 2 or feats.shape[0] != len(group):
                    raise ShapeMismatch(
                        f"model returned shape {tuple(feats.shape)} for a batch of {len(group)}"
                    )
                for clip, row in zip(group, feats.cpu().numpy()):
                    feats_by_id[clip.id] = row
            rows.extend(feats_by_id[c.id] for c in batch_clips)

    data = np.vstack(rows).astype(np.float32)
    write_feature_file(config.output_path, data, [c.id for c in clips], tag)
    return tag
