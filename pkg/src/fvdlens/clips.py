"""Video clip containers and a seeded synthetic clip generator for offline runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyClipSet


@dataclass
class Clip:
    """One video clip: frames are T x H x W x C uint8."""

    id: str
    frames: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.frames)
        if arr.ndim != 4:
            raise DimensionMismatch(f"clip frames must be T x H x W x C, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatch("clip must contain at least one frame")
        if arr.shape[3] not in (1, 3):
            raise DimensionMismatch(f"channels must be 1 or 3, got {arr.shape[3]}")
        if arr.dtype != np.uint8:
            raise DimensionMismatch(f"frames must be uint8, got {arr.dtype}")
        self.frames = arr

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return self.frames.shape[3]


@dataclass
class ClipSet:
    """Ordered clips sharing height, width, and channel count."""

    clips: list[Clip]

    def __post_init__(self):
        if not self.clips:
            raise EmptyClipSet("clip set is empty")
        h, w, c = self.clips[0].height, self.clips[0].width, self.clips[0].channels
        for clip in self.clips[1:]:
            if (clip.height, clip.width, clip.channels) != (h, w, c):
                raise DimensionMismatch(
                    f"clip {clip.id!r} is {clip.height}x{clip.width}x{clip.channels}, "
                    f"set is {h}x{w}x{c}"
                )

    def __len__(self) -> int:
        return len(self.clips)

    def __iter__(self):
        return iter(self.clips)

    @property
    def height(self) -> int:
        return self.clips[0].height

    @property
    def width(self) -> int:
        return self.clips[0].width

    @property
    def channels(self) -> int:
        return self.clips[0].channels

    def ids(self) -> list[str]:
        return [c.id for c in self.clips]


def make_synthetic_clipset(
    n_clips: int,
    frame_count: int = 16,
    height: int = 64,
    width: int = 64,
    channels: int = 3,
    seed: int = 0,
) -> ClipSet:
    """Deterministic moving-pattern clips: a drifting bright block over a
    textured sinusoidal background, one independent RNG stream per clip."""
    clips = []
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    for i in range(n_clips):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        freq_x = rng.uniform(0.5, 2.5)
        freq_y = rng.uniform(0.5, 2.5)
        phase = rng.uniform(0, 2 * np.pi, size=channels)
        texture = rng.normal(0.0, 12.0, size=(height, width))
        block = max(4, height // 4)
        pos = rng.uniform(0, [height - block, width - block])
        vel = rng.uniform(-3.0, 3.0, size=2)
        brightness = rng.uniform(200, 255)

        frames = np.empty((frame_count, height, width, channels), dtype=np.uint8)
        wave = 2 * np.pi * (freq_x * xx / width + freq_y * yy / height)
        for t in range(frame_count):
            frame = np.empty((height, width, channels), dtype=np.float64)
            for ch in range(channels):
                frame[:, :, ch] = 128.0 + 60.0 * np.sin(wave + phase[ch]) + texture
            py = int(pos[0] + vel[0] * t) % max(1, height - block)
            px = int(pos[1] + vel[1] * t) % max(1, width - block)
            frame[py : py + block, px : px + block, :] = brightness
            frames[t] = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
        clips.append(Clip(id=f"synth{i:04d}", frames=frames))
    return ClipSet(clips)
