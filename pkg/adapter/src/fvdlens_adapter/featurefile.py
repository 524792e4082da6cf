"""Writer for the fvdlens FeatureFile binary layout.

The adapter talks to the metric toolkit only through this on-disk format:

    magic "FVDF" | format_version u32 | dtype u8 (0=f32) | rows u64 | dim u32
    | has_ids u8 | rows x (u32 len + UTF-8 id) | u32 len + UTF-8 tag
    | row-major little-endian payload

Payloads are written float32; the reader on the other side promotes to
float64. Writes are atomic (temp file + rename).
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"FVDF"
FORMAT_VERSION = 1
DTYPE_F32 = 0


def write_feature_file(path, data: np.ndarray, ids: list[str], extractor_tag: str) -> None:
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2:
        raise ValueError(f"feature payload must be 2-D, got shape {data.shape}")
    if len(ids) != data.shape[0]:
        raise ValueError(f"{len(ids)} ids for {data.shape[0]} rows")
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<B", DTYPE_F32),
        struct.pack("<Q", data.shape[0]),
        struct.pack("<I", data.shape[1]),
        struct.pack("<B", 1),
    ]
    for row_id in ids:
        encoded = str(row_id).encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
    tag = extractor_tag.encode("utf-8")
    parts.append(struct.pack("<I", len(tag)))
    parts.append(tag)
    parts.append(data.tobytes(order="C"))

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"".join(parts))
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
