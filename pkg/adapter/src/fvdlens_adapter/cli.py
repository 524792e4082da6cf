"""CLI: export pretrained-network features to a FeatureFile.

    fvdlens-adapter export --manifest clips/manifest.json \\
        --model videomae-k710 --output feats.fvdf [--weights-dir WEIGHTS] \\
        [--clip-length 16] [--resize 224] [--batch-size 8] [--device cpu] \\
        [--interpolate-pos]
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import AdapterError
from .export import AdapterConfig, export_features
from .models import KNOWN_TAGS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fvdlens-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="export features for every clip in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True, help=f"one of {', '.join(KNOWN_TAGS)}")
    p.add_argument("--output", required=True)
    p.add_argument("--weights-dir", dest="weights_dir", default=None)
    p.add_argument("--clip-length", dest="clip_length", type=int, default=None)
    p.add_argument("--resize", type=int, default=224)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=8)
    p.add_argument("--device", default="cpu")
    p.add_argument("--interpolate-pos", dest="interpolate_positional", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = AdapterConfig(
        model_tag=args.model,
        manifest_path=args.manifest,
        output_path=args.output,
        clip_length=args.clip_length,
        resize=args.resize,
        batch_size=args.batch_size,
        device=args.device,
        interpolate_positional=args.interpolate_positional,
        weights_dir=args.weights_dir,
    )
    try:
        tag = export_features(config)
    except (AdapterError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    sys.stdout.write(f"wrote features tagged {tag} to {args.output}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
