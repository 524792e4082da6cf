"""On-disk contracts and the extractor registry.

FeatureFile binary layout (all little-endian):

    magic            4 bytes  b"FVDF"
    format_version   u32      currently 1
    dtype            u8       0 = f32, 1 = f64
    rows             u64
    dim              u32
    has_ids          u8       0 or 1
    ids              rows x (u32 byte length + UTF-8 bytes), when has_ids
    extractor_tag    u32 byte length + UTF-8 bytes
    payload          rows * dim * dtype_size bytes, row-major

Clips are stored as lossless PNG frame sequences named %04d.png starting at
0001 inside one directory per clip, listed by a JSON manifest.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .clips import Clip, ClipSet
from .errors import (
    BadMagic,
    ChecksumMismatch,
    DimensionMismatch,
    DuplicateTag,
    EmptyClipSet,
    ExtractorUnavailable,
    IdMismatch,
    InputError,
    MissingFrame,
    TruncatedPayload,
    UnsupportedVersion,
)
from .frechet import FeatureMatrix

MAGIC = b"FVDF"
FORMAT_VERSION = 1
_DTYPE_CODES = {"f32": 0, "f64": 1}
_DTYPE_NUMPY = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def write_features(features: FeatureMatrix, path, dtype: str = "f64") -> None:
    """Serialize a feature matrix; f32 payloads are promoted back to f64 on read."""
    if dtype not in _DTYPE_CODES:
        raise InputError(f"dtype must be f32 or f64, got {dtype!r}")
    code = _DTYPE_CODES[dtype]
    payload = features.data.astype(_DTYPE_NUMPY[code]).tobytes(order="C")
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<B", code),
        struct.pack("<Q", features.rows),
        struct.pack("<I", features.dim),
        struct.pack("<B", 1 if features.ids is not None else 0),
    ]
    if features.ids is not None:
        for rid in features.ids:
            encoded = rid.encode("utf-8")
            parts.append(struct.pack("<I", len(encoded)))
            parts.append(encoded)
    tag = features.extractor_tag.encode("utf-8")
    parts.append(struct.pack("<I", len(tag)))
    parts.append(tag)
    parts.append(payload)
    Path(path).write_bytes(b"".join(parts))


class _Cursor:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedPayload(f"file ends {self.pos + n - len(self.blob)} bytes early")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def remaining(self) -> int:
        return len(self.blob) - self.pos


def read_features(path) -> FeatureMatrix:
    blob = Path(path).read_bytes()
    cur = _Cursor(blob)
    if cur.take(4) != MAGIC:
        raise BadMagic(f"{path}: not a feature file")
    (version,) = struct.unpack("<I", cur.take(4))
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: format version {version}")
    (code,) = struct.unpack("<B", cur.take(1))
    if code not in _DTYPE_NUMPY:
        raise UnsupportedVersion(f"{path}: unknown dtype code {code}")
    (rows,) = struct.unpack("<Q", cur.take(8))
    (dim,) = struct.unpack("<I", cur.take(4))
    (has_ids,) = struct.unpack("<B", cur.take(1))
    ids = None
    if has_ids:
        ids = []
        for _ in range(rows):
            (n,) = struct.unpack("<I", cur.take(4))
            ids.append(cur.take(n).decode("utf-8"))
    (tag_len,) = struct.unpack("<I", cur.take(4))
    tag = cur.take(tag_len).decode("utf-8")
    expected = rows * dim * _DTYPE_NUMPY[code].itemsize
    if cur.remaining() != expected:
        raise TruncatedPayload(
            f"{path}: payload is {cur.remaining()} bytes, header declares {expected}"
        )
    data = np.frombuffer(cur.take(expected), dtype=_DTYPE_NUMPY[code]).reshape(rows, dim)
    return FeatureMatrix(data.astype(np.float64), ids=ids, extractor_tag=tag)


# -- clip storage -------------------------------------------------------------


def _clip_checksum(frame_bytes: list[bytes]) -> str:
    digest = hashlib.sha256()
    for chunk in frame_bytes:
        digest.update(chunk)
    return digest.hexdigest()


def _frame_png_bytes(frame: np.ndarray) -> bytes:
    import io

    if frame.shape[2] == 1:
        image = Image.fromarray(frame[:, :, 0], mode="L")
    else:
        image = Image.fromarray(frame, mode="RGB")
    buf = io.BytesIO()
    image.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def save_clipset(clips: ClipSet, directory, name: str = "clipset") -> Path:
    """Write PNG frame sequences plus a manifest; returns the manifest path."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for clip in clips:
        clip_dir = root / clip.id
        clip_dir.mkdir(parents=True, exist_ok=True)
        frame_bytes = []
        for t in range(clip.frame_count):
            png = _frame_png_bytes(clip.frames[t])
            (clip_dir / f"{t + 1:04d}.png").write_bytes(png)
            frame_bytes.append(png)
        entries.append(
            {
                "id": clip.id,
                "path": clip.id,
                "frame_count": clip.frame_count,
                "height": clip.height,
                "width": clip.width,
                "channels": clip.channels,
                "checksum": _clip_checksum(frame_bytes),
            }
        )
    manifest = {"name": name, "clips": entries}
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def load_clipset(manifest_path) -> ClipSet:
    """Load clips in manifest order, checking dimensions and checksums."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    root = manifest_path.parent
    clips = []
    for entry in manifest["clips"]:
        clip_dir = root / entry["path"]
        frames = []
        frame_bytes = []
        for t in range(entry["frame_count"]):
            frame_path = clip_dir / f"{t + 1:04d}.png"
            if not frame_path.exists():
                raise MissingFrame(f"clip {entry['id']!r}: frame {t + 1} missing at {frame_path}")
            raw = frame_path.read_bytes()
            frame_bytes.append(raw)
            import io

            arr = np.asarray(Image.open(io.BytesIO(raw)))
            if arr.ndim == 2:
                arr = arr[:, :, None]
            frames.append(arr)
        stacked = np.stack(frames)
        expected = (entry["frame_count"], entry["height"], entry["width"], entry["channels"])
        if stacked.shape != expected:
            raise DimensionMismatch(
                f"clip {entry['id']!r}: frames are {stacked.shape}, manifest declares {expected}"
            )
        if "checksum" in entry and entry["checksum"] is not None:
            actual = _clip_checksum(frame_bytes)
            if actual != entry["checksum"]:
                raise ChecksumMismatch(f"clip {entry['id']!r}: checksum {actual} != {entry['checksum']}")
        clips.append(Clip(id=entry["id"], frames=stacked.astype(np.uint8)))
    return ClipSet(clips)


# -- toy extractor ------------------------------------------------------------


@dataclass
class ToyExtractorConfig:
    """Deterministic stand-in for pretrained video extractors.

    Content block: per-frame grayscale G x G downsample averaged over frames.
    Temporal block: mean absolute difference of consecutive downsampled frames.
    Both blocks are concatenated and passed through a fixed seeded projection.
    """

    patch_grid: int = 8
    include_temporal_block: bool = True
    projection_seed: int = 0
    output_dim: int = 128

    @property
    def tag(self) -> str:
        return f"toy-v1-{self.output_dim}"


def _to_gray(frames: np.ndarray) -> np.ndarray:
    """uint8 T x H x W x C -> float64 T x H x W in [0, 1].

    Integer Rec.601: (77 R + 150 G + 29 B) >> 8, identical on every platform.
    """
    if frames.shape[3] == 1:
        gray = frames[:, :, :, 0].astype(np.uint16)
    else:
        wide = frames.astype(np.uint32)
        gray = (77 * wide[:, :, :, 0] + 150 * wide[:, :, :, 1] + 29 * wide[:, :, :, 2]) >> 8
    return gray.astype(np.float64) / 255.0


def _downsample(gray: np.ndarray, grid: int) -> np.ndarray:
    """Block-mean T x H x W down to T x G x G (bin edges from linspace)."""
    t, h, w = gray.shape
    row_edges = np.linspace(0, h, grid + 1).astype(np.int64)
    col_edges = np.linspace(0, w, grid + 1).astype(np.int64)
    rows = np.add.reduceat(gray, row_edges[:-1], axis=1)
    both = np.add.reduceat(rows, col_edges[:-1], axis=2)
    counts = np.diff(row_edges)[:, None] * np.diff(col_edges)[None, :]
    return both / counts


def toy_blocks(clips: ClipSet, config: ToyExtractorConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Unprojected (content, temporal) blocks, one row per clip, G*G dims each."""
    config = config or ToyExtractorConfig()
    g = config.patch_grid
    content = np.empty((len(clips), g * g))
    temporal = np.empty((len(clips), g * g))
    for i, clip in enumerate(clips):
        down = _downsample(_to_gray(clip.frames), g)
        content[i] = down.mean(axis=0).ravel()
        if clip.frame_count > 1:
            temporal[i] = np.abs(np.diff(down, axis=0)).mean(axis=0).ravel()
        else:
            temporal[i] = 0.0
    return content, temporal


def _projection(in_dim: int, out_dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(in_dim, out_dim)))
    gauss = rng.standard_normal((in_dim, max(in_dim, out_dim)))
    if out_dim <= in_dim:
        q, _ = np.linalg.qr(gauss[:, :out_dim])
        return q
    return gauss[:, :out_dim] / np.sqrt(in_dim)


def toy_extract(clips: ClipSet, config: ToyExtractorConfig | None = None) -> FeatureMatrix:
    """One feature row per clip; deterministic for equal inputs and config."""
    config = config or ToyExtractorConfig()
    if len(clips) == 0:
        raise EmptyClipSet("cannot extract from an empty clip set")
    content, temporal = toy_blocks(clips, config)
    blocks = np.hstack([content, temporal]) if config.include_temporal_block else content
    proj = _projection(blocks.shape[1], config.output_dim, config.projection_seed)
    return FeatureMatrix(blocks @ proj, ids=clips.ids(), extractor_tag=config.tag)


def toy_extract_frames(clips: ClipSet, config: ToyExtractorConfig | None = None) -> FeatureMatrix:
    """Frame-level features for FID: one row per frame of every clip.

    Rows are G x G block means of the gradient-energy map |dI/dx| + |dI/dy|,
    projected by a fixed seeded orthogonal matrix. Sharpness responds to how
    strongly a frame is corrupted but not to which way a warp field points,
    so matched-severity corruption modes score near-identical FID, the way
    perceptual frame extractors behave.
    """
    config = config or ToyExtractorConfig()
    if len(clips) == 0:
        raise EmptyClipSet("cannot extract from an empty clip set")
    g = config.patch_grid
    rows = []
    ids = []
    for clip in clips:
        gray = _to_gray(clip.frames)
        gx = np.abs(np.diff(gray, axis=2, append=gray[:, :, -1:]))
        gy = np.abs(np.diff(gray, axis=1, append=gray[:, -1:, :]))
        down = _downsample(gx + gy, g).reshape(clip.frame_count, g * g)
        rows.append(down)
        ids.extend(f"{clip.id}:f{t:04d}" for t in range(clip.frame_count))
    stacked = np.vstack(rows)
    proj = _projection(g * g, g * g, config.projection_seed)
    return FeatureMatrix(stacked @ proj, ids=ids, extractor_tag=f"toy-frame-v1-{g * g}")


# -- extractor registry -------------------------------------------------------

_REGISTRY: dict[str, object] = {}


def register_extractor(tag: str, extractor) -> None:
    """Register a ClipSet -> FeatureMatrix callable under a unique tag."""
    if tag in _REGISTRY:
        raise DuplicateTag(f"extractor tag {tag!r} already registered")
    _REGISTRY[tag] = extractor


def _file_extractor(path: str):
    def extract(clips: ClipSet) -> FeatureMatrix:
        features = read_features(path)
        by_id = {rid: i for i, rid in enumerate(features.row_ids())}
        missing = [cid for cid in clips.ids() if cid not in by_id]
        if missing:
            raise IdMismatch(f"feature file {path} lacks ids: {', '.join(missing)}")
        picks = [by_id[cid] for cid in clips.ids()]
        return FeatureMatrix(
            features.data[picks], ids=clips.ids(), extractor_tag=features.extractor_tag
        )

    extract.file_backed = True
    return extract


def resolve_extractor(tag_or_fn):
    """Resolve a registry tag, a ``file:<path>`` pseudo-tag, or a callable."""
    if callable(tag_or_fn):
        return tag_or_fn
    tag = str(tag_or_fn)
    if tag.startswith("file:"):
        return _file_extractor(tag[len("file:") :])
    if tag not in _REGISTRY:
        raise ExtractorUnavailable(f"no extractor registered under tag {tag!r}")
    return _REGISTRY[tag]


def registered_tags() -> list[str]:
    return sorted(_REGISTRY)


register_extractor("toy-v1-128", toy_extract)
register_extractor("toy-frame-v1-64", toy_extract_frames)
