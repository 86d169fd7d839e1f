#!/usr/bin/env python3
"""Render spectrogram and pyknogram panels for a WAV file.

Without an input file, synthesizes one clean/masked utterance pair first
so the two conditions can be compared side by side.

    python3 scripts/render_panels.py --out /tmp/panels [wav ...]
"""

import argparse
import sys
from pathlib import Path

from maskspeech.config import FramingConfig, IfccConfig, SynthConfig
from maskspeech.corpus import MaskFilterSpec, load_wav, synth_corpus
from maskspeech.viz import compute_pyknogram, compute_spectrogram, render


def demo_pair(out_dir: Path, seed: int) -> list:
    """One speaker's first utterance in both conditions."""
    corpus = out_dir / "demo-corpus"
    cfg = SynthConfig(n_speakers=2, utterances_per_speaker=1, seed=seed)
    manifest = synth_corpus(corpus, cfg, MaskFilterSpec(additive_noise_db=-20.0))
    first_speaker = manifest.entries[0].utt_id.split("-")[0]
    return [
        corpus / e.path
        for e in manifest.entries
        if e.utt_id.startswith(first_speaker)
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("wavs", nargs="*", help="input WAV files (16 kHz mono)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="seed for the demo pair")
    ap.add_argument("--threshold", type=float, default=0.05,
                    help="pyknogram amplitude threshold as a fraction of the peak")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wav_paths = [Path(p) for p in args.wavs] or demo_pair(out, args.seed)

    framing = FramingConfig()
    subbands = IfccConfig()
    for path in wav_paths:
        w = load_wav(path)
        grid = compute_spectrogram(w, framing)
        pyk = compute_pyknogram(w, framing, subbands, amp_threshold_frac=args.threshold)
        spec_png = render(grid, out / f"{path.stem}-spectrogram.png")
        pyk_png = render(pyk, out / f"{path.stem}-pyknogram.png")
        print(f"{path.name}: {spec_png.with_suffix('')} {pyk_png.with_suffix('')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
