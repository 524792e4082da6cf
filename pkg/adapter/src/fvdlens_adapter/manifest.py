"""DatasetManifest reader: JSON manifest + per-clip PNG frame directories."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ManifestError


@dataclass
class ManifestClip:
    id: str
    frames: np.ndarray  # T x H x W x C uint8


def load_manifest(manifest_path) -> list[ManifestClip]:
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {manifest_path}: {exc}") from exc
    root = manifest_path.parent
    clips = []
    for entry in doc.get("clips", []):
        clip_dir = root / entry["path"]
        frames = []
        for t in range(entry["frame_count"]):
            frame_path = clip_dir / f"{t + 1:04d}.png"
            if not frame_path.exists():
                raise ManifestError(f"clip {entry['id']!r}: frame {t + 1} missing at {frame_path}")
            arr = np.asarray(Image.open(frame_path))
            if arr.ndim == 2:
                arr = arr[:, :, None]
            frames.append(arr)
        stacked = np.stack(frames).astype(np.uint8)
        expected = (entry["frame_count"], entry["height"], entry["width"], entry["channels"])
        if stacked.shape != expected:
            raise ManifestError(
                f"clip {entry['id']!r}: frames are {stacked.shape}, manifest declares {expected}"
            )
        clips.append(ManifestClip(id=entry["id"], frames=stacked))
    if not clips:
        raise ManifestError(f"manifest {manifest_path} lists no clips")
    return clips
