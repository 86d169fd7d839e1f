"""Command line interface.

    maskspeech synth   --config cfg.ini [--out DIR] [--seed N]
    maskspeech extract --config cfg.ini [--manifest PATH] [--feature KIND]
    maskspeech train   --config cfg.ini [--manifest PATH] [--feature KIND] [--seed N]
    maskspeech score   --config cfg.ini [--manifest PATH] [--feature KIND]
    maskspeech fuse    --config cfg.ini [--manifest PATH]
    maskspeech eval    --config cfg.ini [--manifest PATH]
    maskspeech render WAV --config cfg.ini [--out DIR]

Exit codes: 0 success, 1 I/O failure, 2 validation/contract failure.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .config import load_config
from .errors import ValidationError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskspeech",
        description="Mask/no-mask speech classification pipeline over 1-second segments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, manifest=True, feature=False, seed=False, out=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="pipeline config (INI)")
        if manifest:
            p.add_argument("--manifest", default=None, help="override [paths] manifest")
        if feature:
            p.add_argument("--feature", default="all",
                           choices=[*pipeline.ALL_KINDS, "all"],
                           help="restrict to one feature kind")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if out:
            p.add_argument("--out", default=None, help="output directory override")
        return p

    add("synth", "generate the synthetic corpus", manifest=False, seed=True, out=True)
    add("extract", "extract features for every manifest entry", feature=True)
    add("train", "fit per-class mixture models on the train partition",
        feature=True, seed=True)
    add("score", "score dev/test utterances against the trained models", feature=True)
    add("fuse", "train score fusion on dev and apply it")
    add("eval", "print and save the UAR table")
    p_render = add("render", "spectrogram + pyknogram panels for one WAV",
                   manifest=False, out=True)
    p_render.add_argument("wav", help="input WAV file")
    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = load_config(args.config)
    if args.command == "synth":
        pipeline.run_synth(cfg, out_dir=args.out, seed=args.seed)
    elif args.command == "extract":
        pipeline.run_extract(cfg, args.manifest, args.feature)
    elif args.command == "train":
        pipeline.run_train(cfg, args.manifest, args.feature, seed=args.seed)
    elif args.command == "score":
        pipeline.run_score(cfg, args.manifest, args.feature)
    elif args.command == "fuse":
        pipeline.run_fuse(cfg, args.manifest)
    elif args.command == "eval":
        pipeline.run_eval(cfg, args.manifest)
    elif args.command == "render":
        pipeline.run_render(cfg, args.wav, out_dir=args.out)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
