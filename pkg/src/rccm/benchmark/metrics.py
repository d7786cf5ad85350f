"""Clustering agreement and edge-detection metrics."""

from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, rand_score

from ..exceptions import InvalidInputError
from ..selection.stars import edge_set

Edge = Tuple[int, int]


class EdgeRates(BaseModel):
    tpr: float = Field(..., description="True positive rate (recall)")
    fpr: float = Field(..., description="False positive rate over absent pairs")
    ppv: float = Field(..., description="Positive predictive value (precision)")


class EvaluationResult(BaseModel):
    """Agreement of an estimate with the truth; group rates are null when a method has no group estimates."""

    rand_index: float = Field(..., description="Rand index")
    adjusted_rand_index: float = Field(..., description="Adjusted Rand index")
    tpr_subject: float = Field(..., description="Mean subject-level TPR")
    fpr_subject: float = Field(..., description="Mean subject-level FPR")
    ppv_subject: float = Field(..., description="Mean subject-level PPV")
    tpr_group: Optional[float] = Field(None, description="Mean group-level TPR")
    fpr_group: Optional[float] = Field(None, description="Mean group-level FPR")
    ppv_group: Optional[float] = Field(None, description="Mean group-level PPV")


METRIC_NAMES = list(EvaluationResult.model_fields)


def _check_labels(a, b) -> Tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInputError(f"Label vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise InvalidInputError("Rand indices need at least two labels")
    return a, b


def rand_index(a, b) -> float:
    """Fraction of subject pairs on which two partitions agree."""
    a, b = _check_labels(a, b)
    return float(rand_score(a, b))


def adjusted_rand_index(a, b) -> float:
    """Rand index corrected for chance agreement."""
    a, b = _check_labels(a, b)
    return float(adjusted_rand_score(a, b))


def edge_metrics(true_net: Iterable[Edge], est_net: Iterable[Edge], p: int) -> EdgeRates:
    """
    Edge-detection rates of an estimated network.

    Empty denominators resolve to: TPR 1 when the true network is empty, FPR 0
    when no pair is absent, PPV 1 when both networks are empty and 0 when only
    the estimate is empty.

    Args:
        true_net: True edges as pairs
        est_net: Estimated edges as pairs
        p: Number of nodes

    Returns:
        The TPR, FPR and PPV
    """
    true_set = {tuple(sorted(e)) for e in true_net}
    est_set = {tuple(sorted(e)) for e in est_net}
    for i, j in true_set | est_set:
        if not (0 <= i < j < p):
            raise InvalidInputError(f"Pair ({i}, {j}) is not a node pair within p = {p}")
    hits = len(true_set & est_set)
    absent = comb(p, 2) - len(true_set)
    tpr = hits / len(true_set) if true_set else 1.0
    fpr = len(est_set - true_set) / absent if absent else 0.0
    if est_set:
        ppv = hits / len(est_set)
    else:
        ppv = 1.0 if not true_set else 0.0
    return EdgeRates(tpr=tpr, fpr=fpr, ppv=ppv)


def match_clusters(true_labels, est_labels, G_true: int, G_est: int) -> Dict[int, int]:
    """
    Map estimated clusters to true clusters by maximum overlap (Hungarian assignment).

    Returns:
        Mapping from estimated cluster index to true cluster index
    """
    table = np.zeros((G_est, G_true))
    for e, t in zip(np.asarray(est_labels, dtype=int), np.asarray(true_labels, dtype=int)):
        table[e, t] += 1
    rows, cols = linear_sum_assignment(table, maximize=True)
    return {int(r): int(c) for r, c in zip(rows, cols)}


def _mean_rates(pairs: List[Tuple[Iterable[Edge], Iterable[Edge]]], p: int) -> EdgeRates:
    rates = [edge_metrics(true, est, p) for true, est in pairs]
    return EdgeRates(
        tpr=float(np.mean([r.tpr for r in rates])),
        fpr=float(np.mean([r.fpr for r in rates])),
        ppv=float(np.mean([r.ppv for r in rates])),
    )


def evaluate_fit(
    true_labels,
    true_subject_networks: Sequence[Iterable[Edge]],
    est_labels,
    est_subject_precisions: Sequence[np.ndarray],
    true_group_networks: Optional[Sequence[Iterable[Edge]]] = None,
    est_group_precisions: Optional[Sequence[np.ndarray]] = None,
    threshold: float = 1e-8,
) -> EvaluationResult:
    """
    Score an estimate against the truth.

    Subject rates are averaged over subjects. Group rates, when group estimates
    exist, pair each estimated cluster with its matched true cluster and are
    averaged over matched pairs.
    """
    p = np.shape(est_subject_precisions[0])[0]
    subject = _mean_rates(
        [(true, edge_set(est, threshold)) for true, est in zip(true_subject_networks, est_subject_precisions)], p
    )
    result = dict(
        rand_index=rand_index(true_labels, est_labels),
        adjusted_rand_index=adjusted_rand_index(true_labels, est_labels),
        tpr_subject=subject.tpr,
        fpr_subject=subject.fpr,
        ppv_subject=subject.ppv,
    )
    if est_group_precisions is not None and true_group_networks is not None:
        mapping = match_clusters(true_labels, est_labels, len(true_group_networks), len(est_group_precisions))
        group = _mean_rates(
            [
                (true_group_networks[t], edge_set(est_group_precisions[e], threshold))
                for e, t in sorted(mapping.items())
            ],
            p,
        )
        result.update(tpr_group=group.tpr, fpr_group=group.fpr, ppv_group=group.ppv)
    return EvaluationResult(**result)
