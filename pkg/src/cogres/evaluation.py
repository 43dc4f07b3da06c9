"""Cross-validated evaluation of group templates."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .cognition import mc_suite
from .connectome import aggregate_cbt, subject_connectomes
from .core import (
    Classification,
    CognitiveConfig,
    Connectome,
    EvalReport,
    ReservoirConfig,
    SubjectManifest,
    TimeSeries,
)
from .errors import (
    CogresError,
    ConfigError,
    DimensionError,
    EvaluationError,
    InsufficientDataError,
    ValidationError,
)
from .graphmetrics import MEASURES, topology_report
from .reservoir import check_echo_state, init_reservoir

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: dict
    seed: int

    def test_ids(self, fold: int) -> list:
        return sorted(sid for sid, f in self.assignments.items() if f == fold)

    def train_ids(self, fold: int) -> list:
        return sorted(sid for sid, f in self.assignments.items() if f != fold)


def make_folds(manifest: SubjectManifest, k: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffled k-fold partition, stratified by group.

    Within each group, subjects are shuffled and dealt round-robin; each
    group starts dealing where the previous one stopped so overall fold
    sizes stay balanced too.
    """
    if k < 2:
        raise ConfigError(f"k must be at least 2 to separate train and test, got {k}")
    rng = np.random.default_rng(seed)
    assignments = {}
    offset = 0
    for group in manifest.groups:
        ids = sorted(s.id for s in manifest.by_group(group))
        if len(ids) < k:
            raise InsufficientDataError(f"group {group!r} has {len(ids)} subjects, fewer than k={k}")
        order = rng.permutation(len(ids))
        for pos, i in enumerate(order):
            assignments[ids[i]] = (offset + pos) % k
        offset += len(ids)
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def centeredness(cbt: Connectome, test_subjects: Sequence[Connectome]) -> float:
    """Mean Frobenius distance from the template to each held-out connectome."""
    test_subjects = list(test_subjects)
    if not test_subjects:
        raise InsufficientDataError("centeredness needs at least one test subject")
    for m in test_subjects:
        if m.size != cbt.size:
            raise DimensionError(f"subject has {m.size} regions, template has {cbt.size}")
    return float(np.mean([np.linalg.norm(cbt.weights - m.weights) for m in test_subjects]))


def _rate(num: int, den: int) -> float:
    return num / den if den else 0.0


def classify_cbt_shot(
    cbt_a: Connectome,
    cbt_b: Connectome,
    subjects: Sequence[Tuple[Connectome, str]],
    labels: Optional[Tuple[str, str]] = None,
) -> Classification:
    """Classify subjects by their nearest template.

    A maximum-margin linear classifier trained on only the two templates is
    the perpendicular bisector between them, so this is nearest-template in
    the space of upper-triangle edge weights. Ties go to ``cbt_a``, whose
    class counts as positive for sensitivity and F1.
    """
    label_a, label_b = labels if labels is not None else (cbt_a.label, cbt_b.label)
    if label_a is None or label_b is None or label_a == label_b:
        raise ValidationError("two distinct class labels are required")
    subjects = list(subjects)
    if not subjects:
        raise InsufficientDataError("no subjects to classify")
    fa, fb = cbt_a.upper_triangle(), cbt_b.upper_triangle()
    tp = tn = fp = fn = 0
    for conn, truth in subjects:
        if truth not in (label_a, label_b):
            raise ValidationError(f"label {truth!r} is neither {label_a!r} nor {label_b!r}")
        f = conn.upper_triangle()
        pred_a = np.linalg.norm(f - fa) <= np.linalg.norm(f - fb)
        if truth == label_a:
            tp, fn = (tp + 1, fn) if pred_a else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if pred_a else (fp, tn + 1)
    precision = _rate(tp, tp + fp)
    recall = _rate(tp, tp + fn)
    f1 = _rate(2 * precision * recall, precision + recall)
    return Classification(
        accuracy=_rate(tp + tn, tp + tn + fp + fn),
        sensitivity=recall,
        specificity=_rate(tn, tn + fp),
        f1=f1,
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        positive=label_a,
        negative=label_b,
    )


@dataclass
class EvaluationResult:
    folds: list
    summary: dict


def run_full_evaluation(
    manifest: SubjectManifest,
    cfg: ReservoirConfig,
    cogcfg: CognitiveConfig,
    modalities: Sequence[Tuple[str, TimeSeries]] = (),
    k: int = 5,
    seed: int = 0,
    groups: Optional[Sequence[str]] = None,
    threads: int = 1,
) -> EvaluationResult:
    """Per fold: group templates from the training subjects, then centeredness
    and topology against each group's own test subjects, nearest-template
    classification of all test subjects, and memory capacity of each template.

    One reservoir (``cfg.seed``) encodes every subject in every fold, so each
    subject's connectome is computed once and reused.
    """
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    groups = list(groups) if groups is not None else manifest.groups
    if len(groups) != 2:
        raise ValidationError(f"evaluation needs exactly two groups, got {groups}")
    plan = make_folds(manifest, k, seed)
    weights = init_reservoir(cfg, manifest.atlas_dim)
    conns = subject_connectomes(manifest, manifest.ids, cfg, weights=weights, threads=threads)
    group_of = {s.id: s.group for s in manifest.subjects}

    folds = []
    for fold in range(k):
        try:
            folds.append(_evaluate_fold(fold, plan, conns, group_of, groups, cogcfg, modalities))
        except CogresError as exc:
            raise EvaluationError(f"fold {fold}: {exc}", fold) from exc
    ok, gap = check_echo_state(weights, cfg, seed=cfg.seed)
    summary = summarize(folds)
    summary["reservoir"] = {
        "achieved_radius": weights.achieved_radius,
        "echo_state_contracting": ok,
        "echo_state_gap": gap if np.isfinite(gap) else None,
    }
    return EvaluationResult(folds=folds, summary=summary)


def _evaluate_fold(fold, plan, conns, group_of, groups, cogcfg, modalities) -> EvalReport:
    train, test = plan.train_ids(fold), plan.test_ids(fold)
    cbts, cent, kl, train_ids, test_ids = {}, {}, {}, {}, {}
    for g in groups:
        train_ids[g] = [sid for sid in train if group_of[sid] == g]
        test_ids[g] = [sid for sid in test if group_of[sid] == g]
        cbts[g] = aggregate_cbt([conns[sid] for sid in train_ids[g]], label=g)
        held_out = [conns[sid] for sid in test_ids[g]]
        cent[g] = centeredness(cbts[g], held_out)
        kl[g] = topology_report(cbts[g], held_out)
    classification = classify_cbt_shot(
        cbts[groups[0]], cbts[groups[1]], [(conns[sid], group_of[sid]) for sid in test]
    )
    mc = {g: mc_suite(cbts[g], modalities, cogcfg) for g in groups}
    return EvalReport(
        fold_index=fold,
        centeredness=float(np.mean([cent[g] for g in groups])),
        kl_by_measure={m: float(np.mean([kl[g][m] for g in groups])) for m in MEASURES},
        classification=classification,
        centeredness_by_group=cent,
        kl_by_group=kl,
        mc_by_group=mc,
        train_ids=train_ids,
        test_ids=test_ids,
    )


def summarize(folds: Sequence[EvalReport]) -> dict:
    """Arithmetic means of the per-fold metrics."""
    n = len(folds)

    def mean(vals):
        return float(sum(vals) / n)

    groups = list(folds[0].centeredness_by_group)
    cls_fields = ("accuracy", "sensitivity", "specificity", "f1")
    mc = {}
    for g in groups:
        names = [r.modality for r in folds[0].mc_by_group.get(g, [])]
        mc[g] = {
            name: mean([f.mc_by_group[g][i].mc for f in folds]) for i, name in enumerate(names)
        }
    return {
        "n_folds": n,
        "centeredness": mean([f.centeredness for f in folds]),
        "centeredness_by_group": {g: mean([f.centeredness_by_group[g] for f in folds]) for g in groups},
        "kl_by_measure": {m: mean([f.kl_by_measure[m] for f in folds]) for m in MEASURES},
        "kl_by_group": {
            g: {m: mean([f.kl_by_group[g][m] for f in folds]) for m in MEASURES} for g in groups
        },
        "classification": {c: mean([getattr(f.classification, c) for f in folds]) for c in cls_fields},
        "mc_by_group": mc,
    }
