"""End-to-end pipeline stages, each usable from code or via the CLI.

Work directory layout (fixed so tests can assert paths):

    work/
      features/<kind>/<utt_id>.fm
      models/<kind>.cm            per-class mixture models
      models/fusion.txt
      scores/<kind>_<partition>.scores / .pred
      scores/fused_<partition>.scores / .pred
      reports/uar.txt

Stages raise ValidationError for contract violations (the CLI maps those
to exit 2) and let OSError from genuine I/O failures escape (exit 1).
A missing upstream artifact is a contract violation, not an I/O accident,
so it is reported as ValidationError naming the path.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import features as feats
from .config import PipelineConfig
from .corpus import Manifest, MaskFilterSpec, load_manifest, load_wav, synth_corpus
from .errors import ValidationError
from .fusion import (
    ScoreTable,
    apply_fusion,
    build_score_table,
    load_predictions,
    load_scores,
    majority_vote,
    save_fusion_model,
    save_predictions,
    save_scores,
    train_fusion,
)
from .gmm import ClassModels, classify, em_train, load_class_models, save_class_models
from .labels import LABEL_MASK, LABEL_NO_MASK
from .metrics import ConfusionMatrix, format_uar_table, uar
from .viz import compute_pyknogram, compute_spectrogram, render

ALL_KINDS = list(feats.FEATURE_KINDS)


def _resolve(cfg: PipelineConfig, p: str | Path) -> Path:
    p = Path(p)
    return p if p.is_absolute() else Path(cfg.base_dir) / p


def work_dir(cfg: PipelineConfig) -> Path:
    return _resolve(cfg, cfg.paths.work_dir)


def manifest_path(cfg: PipelineConfig, override: str | None = None) -> Path:
    return _resolve(cfg, override or cfg.paths.manifest)


def feature_path(cfg: PipelineConfig, kind: str, utt_id: str) -> Path:
    return work_dir(cfg) / "features" / kind / f"{utt_id}.fm"


def models_path(cfg: PipelineConfig, kind: str) -> Path:
    return work_dir(cfg) / "models" / f"{kind}.cm"


def fusion_model_path(cfg: PipelineConfig) -> Path:
    return work_dir(cfg) / "models" / "fusion.txt"


def scores_path(cfg: PipelineConfig, system: str, partition: str) -> Path:
    return work_dir(cfg) / "scores" / f"{system}_{partition}.scores"


def predictions_path(cfg: PipelineConfig, system: str, partition: str) -> Path:
    return work_dir(cfg) / "scores" / f"{system}_{partition}.pred"


def report_path(cfg: PipelineConfig) -> Path:
    return work_dir(cfg) / "reports" / "uar.txt"


def _load_manifest(cfg: PipelineConfig, override: str | None = None) -> tuple[Manifest, Path]:
    path = manifest_path(cfg, override)
    if not path.exists():
        raise ValidationError(f"manifest not found: {path}")
    return load_manifest(path), path.parent


def _kinds_arg(feature: str | None) -> list:
    if feature is None or feature == "all":
        return ALL_KINDS
    if feature not in ALL_KINDS:
        raise ValidationError(f"unknown feature kind {feature!r}")
    return [feature]


# -- stages ---------------------------------------------------------------

def run_synth(cfg: PipelineConfig, out_dir: str | None = None, seed: int | None = None) -> Path:
    """Generate the synthetic corpus; returns the corpus directory."""
    synth_cfg = cfg.synth
    if seed is not None:
        synth_cfg.seed = seed
    target = _resolve(cfg, out_dir or cfg.paths.corpus_dir)
    manifest = synth_corpus(target, synth_cfg, MaskFilterSpec.from_config(cfg.mask))
    print(f"synthesized {len(manifest.entries)} segments under {target}")
    return target


@dataclass
class ExtractStats:
    extracted: int = 0
    skipped: int = 0
    failures: list = None

    def __post_init__(self):
        if self.failures is None:
            self.failures = []


def run_extract(
    cfg: PipelineConfig,
    manifest_override: str | None = None,
    feature: str | None = None,
) -> ExtractStats:
    """Extract 90-dim features for every manifest entry, with hash caching.

    A feature file is rewritten only when the stored hash of (audio bytes +
    feature-relevant config) no longer matches.
    """
    manifest, base = _load_manifest(cfg, manifest_override)
    kinds = _kinds_arg(feature)
    stats = ExtractStats()
    for kind in kinds:
        fingerprint = cfg.feature_fingerprint(kind)
        out_root = work_dir(cfg) / "features" / kind
        out_root.mkdir(parents=True, exist_ok=True)
        for entry in manifest.entries:
            wav_path = base / entry.path
            out_path = out_root / f"{entry.utt_id}.fm"
            try:
                wav_bytes = wav_path.read_bytes()
                digest = hashlib.sha256(wav_bytes + fingerprint.encode()).digest()
                if out_path.exists():
                    head = feats.read_feature_header(out_path)
                    if head["source_hash"] == digest and head["kind"] == kind:
                        stats.skipped += 1
                        continue
                fm = feats.extract_full(kind, load_wav(wav_path), cfg)
                fm.source_hash = digest
                feats.save_feature_matrix(fm, out_path)
                stats.extracted += 1
            except (ValidationError, OSError) as exc:
                stats.failures.append((entry.utt_id, exc))
    print(f"extracted {stats.extracted}, skipped {stats.skipped}, "
          f"failed {len(stats.failures)}")
    for utt_id, exc in stats.failures:
        print(f"  FAILED {utt_id}: {exc}")
    if stats.failures:
        # All-validation failures are a data problem (exit 2); any genuine
        # I/O error in the batch makes the run an I/O failure (exit 1).
        if all(isinstance(exc, ValidationError) for _, exc in stats.failures):
            raise ValidationError(f"{len(stats.failures)} of "
                                  f"{len(stats.failures) + stats.extracted + stats.skipped} "
                                  f"extractions failed")
        raise OSError(f"{len(stats.failures)} extractions failed with I/O errors")
    return stats


def _load_features(cfg: PipelineConfig, kind: str, utt_id: str) -> feats.FeatureMatrix:
    path = feature_path(cfg, kind, utt_id)
    if not path.exists():
        raise ValidationError(f"missing feature file {path}; run extract first")
    return feats.load_feature_matrix(path)


def run_train(
    cfg: PipelineConfig,
    manifest_override: str | None = None,
    feature: str | None = None,
    seed: int | None = None,
):
    """Fit the per-class mixtures on the train partition for each kind."""
    manifest, _ = _load_manifest(cfg, manifest_override)
    if seed is not None:
        cfg.gmm.seed = seed
    train_entries = manifest.partition("train")
    if not train_entries:
        raise ValidationError("manifest has no train entries")
    (work_dir(cfg) / "models").mkdir(parents=True, exist_ok=True)
    for kind in _kinds_arg(feature):
        per_label = {}
        for label in (LABEL_NO_MASK, LABEL_MASK):
            rows = [
                _load_features(cfg, kind, e.utt_id).rows
                for e in train_entries
                if e.label == label
            ]
            if not rows:
                raise ValidationError(f"no train entries labeled {label!r}")
            per_label[label] = em_train(np.vstack(rows), cfg.gmm.n_mixtures, cfg.gmm)
        models = ClassModels(
            mask=per_label[LABEL_MASK],
            no_mask=per_label[LABEL_NO_MASK],
            feature_kind=kind,
            config_fingerprint=cfg.feature_fingerprint(kind),
        )
        save_class_models(models, models_path(cfg, kind))
        print(f"trained {kind}: M={cfg.gmm.n_mixtures}, "
              f"final ll no_mask={per_label[LABEL_NO_MASK].train_ll_history[-1]:.4f} "
              f"mask={per_label[LABEL_MASK].train_ll_history[-1]:.4f}")


def _partitions_present(manifest: Manifest) -> list:
    return [p for p in ("dev", "test") if manifest.partition(p)]


def run_score(
    cfg: PipelineConfig,
    manifest_override: str | None = None,
    feature: str | None = None,
):
    """Score dev/test utterances against each kind's class models."""
    manifest, _ = _load_manifest(cfg, manifest_override)
    (work_dir(cfg) / "scores").mkdir(parents=True, exist_ok=True)
    for kind in _kinds_arg(feature):
        mpath = models_path(cfg, kind)
        if not mpath.exists():
            raise ValidationError(f"missing model file {mpath}; run train first")
        models = load_class_models(mpath)
        for partition in _partitions_present(manifest):
            records = [
                classify(models, _load_features(cfg, kind, e.utt_id), e.utt_id)
                for e in manifest.partition(partition)
            ]
            save_scores(records, scores_path(cfg, kind, partition))
            save_predictions(records, predictions_path(cfg, kind, partition))
            print(f"scored {kind} {partition}: {len(records)} utterances")


def _score_table(cfg: PipelineConfig, manifest: Manifest, partition: str) -> ScoreTable:
    per_system = []
    for kind in ALL_KINDS:
        path = scores_path(cfg, kind, partition)
        if not path.exists():
            raise ValidationError(f"missing score file {path}; run score first")
        per_system.append(load_scores(path))
    return build_score_table(ALL_KINDS, per_system, manifest.labels())


def run_fuse(cfg: PipelineConfig, manifest_override: str | None = None):
    """Train score fusion on dev, apply it to every scored partition."""
    manifest, _ = _load_manifest(cfg, manifest_override)
    if not manifest.partition("dev"):
        raise ValidationError("manifest has no dev entries to train fusion on")
    dev_table = _score_table(cfg, manifest, "dev")
    model = train_fusion(dev_table, cfg.fusion)
    save_fusion_model(model, fusion_model_path(cfg))
    for partition in _partitions_present(manifest):
        table = _score_table(cfg, manifest, partition)
        records = apply_fusion(model, table)
        save_scores(records, scores_path(cfg, "fused", partition))
        save_predictions(records, predictions_path(cfg, "fused", partition))
    weights = ", ".join(f"{k}={v:.3f}" for k, v in zip(model.systems, model.weights))
    print(f"fusion weights: {weights}, bias={model.bias:.3f}")


def _partition_uar(cfg: PipelineConfig, manifest: Manifest, system: str, partition: str):
    """UAR percent for one system file on one partition, None if not computable."""
    entries = [e for e in manifest.partition(partition) if e.label is not None]
    if not entries:
        return None
    path = predictions_path(cfg, system, partition)
    if not path.exists():
        raise ValidationError(f"missing prediction file {path}")
    preds = load_predictions(path)
    missing = [e.utt_id for e in entries if e.utt_id not in preds]
    if missing:
        raise ValidationError(f"{path}: no prediction for {missing[0]!r}")
    truth = [e.label for e in entries]
    predicted = [preds[e.utt_id] for e in entries]
    return uar(ConfusionMatrix.from_labels(truth, predicted)).uar_percent


def _majority_uar(cfg: PipelineConfig, manifest: Manifest, partition: str):
    entries = [e for e in manifest.partition(partition) if e.label is not None]
    if not entries:
        return None
    per_system = []
    for kind in ALL_KINDS:
        path = predictions_path(cfg, kind, partition)
        if not path.exists():
            raise ValidationError(f"missing prediction file {path}")
        preds = load_predictions(path)
        per_system.append([preds[e.utt_id] for e in entries])
    voted = majority_vote(per_system)
    truth = [e.label for e in entries]
    return uar(ConfusionMatrix.from_labels(truth, voted)).uar_percent


def run_eval(cfg: PipelineConfig, manifest_override: str | None = None) -> str:
    """Build the UAR table over dev/test, write the report, return the text."""
    manifest, _ = _load_manifest(cfg, manifest_override)
    rows = []
    for kind in ALL_KINDS:
        rows.append((
            kind.upper(),
            _partition_uar(cfg, manifest, kind, "dev"),
            _partition_uar(cfg, manifest, kind, "test"),
        ))
    rows.append((
        "Majority vote",
        _majority_uar(cfg, manifest, "dev"),
        _majority_uar(cfg, manifest, "test"),
    ))
    rows.append((
        "Score fusion",
        _partition_uar(cfg, manifest, "fused", "dev"),
        _partition_uar(cfg, manifest, "fused", "test"),
    ))
    table = format_uar_table(rows)
    out = report_path(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(table, encoding="utf-8")
    print(table, end="")
    return table


def run_render(cfg: PipelineConfig, wav: str, out_dir: str | None = None) -> list:
    """Spectrogram and pyknogram panels (plus dumps) for one WAV file."""
    wav_path = _resolve(cfg, wav)
    if not wav_path.exists():
        raise ValidationError(f"input WAV not found: {wav_path}")
    target = _resolve(cfg, out_dir) if out_dir else work_dir(cfg) / "reports"
    target.mkdir(parents=True, exist_ok=True)
    w = load_wav(wav_path)
    stem = wav_path.stem
    outputs = []
    grid = compute_spectrogram(w, cfg.framing)
    outputs.append(render(grid, target / f"{stem}-spectrogram.png"))
    pyk = compute_pyknogram(w, cfg.framing, cfg.ifcc)
    outputs.append(render(pyk, target / f"{stem}-pyknogram.png"))
    print(f"rendered panels for {wav_path.name} under {target}")
    return outputs
