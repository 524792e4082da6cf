"""Model registry: pretrained checkpoints and stand-in networks.

Known tags name real pretrained extractors; their checkpoints must exist
locally under the configured weights directory (we never download). Tests
and offline runs register small stand-in networks exposing the same
interface:

    input_size: int            square spatial input
    clip_length: int | None    native frame count (None = any length)
    feature_dim: int
    forward_features(x)        (B, C, T, H, W) float32 in [0, 1] -> (B, D)

The ViT-style stand-in mirrors the conventions of the real extractors: the
feature is the penultimate encoder output averaged across all patch tokens,
and positional encodings can be temporally interpolated to accept clips
longer than the native length.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import torch
from torch import nn

from .errors import ModelUnavailable

KNOWN_TAGS = (
    "i3d-logits",
    "videomae-k710",
    "videomae-ssv2",
    "videomae-pt",
    "timesformer-k400",
)

_STANDINS: dict[str, nn.Module] = {}


def register_standin(tag: str, model: nn.Module) -> None:
    """Register a stand-in network for a tag (replaces any previous one)."""
    model.eval()
    _STANDINS[tag] = model


def clear_standins() -> None:
    _STANDINS.clear()


def resolve_model(tag: str, weights_dir=None) -> tuple[nn.Module, str]:
    """Return (model, extractor_tag). Stand-ins win; otherwise a local
    checkpoint <weights_dir>/<tag>.pt is required and its hash is recorded
    in the tag."""
    if tag in _STANDINS:
        return _STANDINS[tag], tag
    if weights_dir is not None:
        checkpoint = Path(weights_dir) / f"{tag}.pt"
        if checkpoint.exists():
            blob = checkpoint.read_bytes()
            digest = hashlib.sha256(blob).hexdigest()[:12]
            model = torch.load(checkpoint, map_location="cpu", weights_only=False)
            if not isinstance(model, nn.Module):
                raise ModelUnavailable(f"checkpoint {checkpoint} does not hold a torch module")
            model.eval()
            return model, f"{tag}@{digest}"
    if tag in KNOWN_TAGS:
        raise ModelUnavailable(
            f"no stand-in registered and no local checkpoint for {tag!r}"
            + (f" under {weights_dir}" if weights_dir else " (no --weights-dir given)")
        )
    raise ModelUnavailable(f"unknown model tag {tag!r}")


class TinyVideoViT(nn.Module):
    """Small ViT-style video encoder used as a stand-in for the MAE-style
    extractors: tubelet patch embedding, learned positional encoding, one
    transformer block, mean over patch tokens (the patch-averaging
    convention). Temporal positional-encoding interpolation accepts clips
    of other lengths when enabled."""

    def __init__(self, clip_length=16, input_size=32, feature_dim=48, patch=8, tubelet=2, seed=0):
        super().__init__()
        torch.manual_seed(seed)
        self.clip_length = clip_length
        self.input_size = input_size
        self.feature_dim = feature_dim
        self.supports_interpolation = True
        self.tubelet = tubelet
        self.grid = input_size // patch
        self.t_tokens = clip_length // tubelet
        self.embed = nn.Conv3d(3, feature_dim, kernel_size=(tubelet, patch, patch),
                               stride=(tubelet, patch, patch))
        self.pos = nn.Parameter(torch.randn(self.t_tokens, self.grid * self.grid, feature_dim) * 0.02)
        self.block = nn.TransformerEncoderLayer(
            d_model=feature_dim, nhead=4, dim_feedforward=2 * feature_dim,
            batch_first=True, dropout=0.0,
        )
        self.norm = nn.LayerNorm(feature_dim)
        self.eval()

    def _positional(self, t_tokens: int) -> torch.Tensor:
        if t_tokens == self.t_tokens:
            return self.pos
        # linear interpolation along the temporal token axis
        pos = self.pos.permute(1, 2, 0)  # (S, D, T)
        pos = torch.nn.functional.interpolate(pos, size=t_tokens, mode="linear", align_corners=False)
        return pos.permute(2, 0, 1)

    def forward_features(self, x: torch.Tensor) -> torch.Tensor:
        tokens = self.embed(x)  # (B, D, T', G, G)
        b, d, tt, gh, gw = tokens.shape
        tokens = tokens.permute(0, 2, 3, 4, 1).reshape(b, tt, gh * gw, d)
        tokens = tokens + self._positional(tt)[None]
        tokens = tokens.reshape(b, tt * gh * gw, d)
        tokens = self.block(tokens)
        tokens = self.norm(tokens)
        return tokens.mean(dim=1)


class TinyI3D(nn.Module):
    """Small inflated-conv stand-in: strided 3-D convs, global average
    pooling, then a logit head. Pooling makes it length-agnostic."""

    def __init__(self, input_size=32, num_logits=40, seed=0):
        super().__init__()
        torch.manual_seed(seed)
        self.clip_length = None
        self.input_size = input_size
        self.feature_dim = num_logits
        self.body = nn.Sequential(
            nn.Conv3d(3, 16, kernel_size=3, stride=(1, 2, 2), padding=1),
            nn.ReLU(),
            nn.Conv3d(16, 32, kernel_size=3, stride=2, padding=1),
            nn.ReLU(),
            nn.AdaptiveAvgPool3d(1),
        )
        self.head = nn.Linear(32, num_logits)
        self.eval()

    def forward_features(self, x: torch.Tensor) -> torch.Tensor:
        pooled = self.body(x).flatten(1)
        return self.head(pooled)
