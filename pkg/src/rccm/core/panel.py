"""Multi-subject time-series panels."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..exceptions import DegenerateColumnError, InvalidInputError


@dataclass(frozen=True)
class ObservationMatrix:
    """One subject's centered observations and cached sample covariance S = Y'Y / n."""

    data: np.ndarray
    sample_cov: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_centered(cls, data: np.ndarray) -> "ObservationMatrix":
        data = np.ascontiguousarray(data, dtype=float)
        cov = data.T @ data / data.shape[0]
        return cls(data=data, sample_cov=0.5 * (cov + cov.T))


@dataclass(frozen=True)
class TimeSeriesPanel:
    """K subjects sharing the same p variables."""

    subjects: List[ObservationMatrix]
    p: int
    roi_names: List[str]
    standardized: bool = True

    @property
    def K(self) -> int:
        return len(self.subjects)

    @property
    def sample_sizes(self) -> List[int]:
        return [subject.n for subject in self.subjects]

    @property
    def sample_covariances(self) -> List[np.ndarray]:
        return [subject.sample_cov for subject in self.subjects]


def default_roi_names(p: int) -> List[str]:
    return [f"roi_{j}" for j in range(p)]


def build_panel(
    raw_subject_matrices: Sequence,
    standardize: bool = True,
    roi_names: Optional[Sequence[str]] = None,
) -> TimeSeriesPanel:
    """
    Center (and optionally scale) every subject's columns and cache sample covariances.

    Standardization uses the (n - 1) sample standard deviation.

    Args:
        raw_subject_matrices: One n_k x p array per subject
        standardize: Scale columns to unit sample standard deviation
        roi_names: Variable names; defaults to roi_0..roi_{p-1}

    Returns:
        The panel

    Raises:
        InvalidInputError: On an empty panel, mismatched column counts, n_k < 2,
            non-finite values or a wrong number of names
        DegenerateColumnError: On a constant column when standardizing
    """
    if len(raw_subject_matrices) == 0:
        raise InvalidInputError("A panel needs at least one subject")

    matrices = [np.asarray(matrix, dtype=float) for matrix in raw_subject_matrices]
    p = matrices[0].shape[1] if matrices[0].ndim == 2 else -1
    subjects = []
    for k, Y in enumerate(matrices):
        if Y.ndim != 2:
            raise InvalidInputError(f"Subject {k} data must be a 2-D array, got {Y.ndim} dimensions")
        if Y.shape[1] != p:
            raise InvalidInputError(f"Subject {k} has {Y.shape[1]} columns, expected {p}")
        if Y.shape[0] < 2:
            raise InvalidInputError(f"Subject {k} has {Y.shape[0]} observations; at least 2 are required")
        if not np.all(np.isfinite(Y)):
            raise InvalidInputError(f"Subject {k} contains non-finite values")

        centered = Y - Y.mean(axis=0)
        if standardize:
            sd = centered.std(axis=0, ddof=1)
            degenerate = np.flatnonzero(sd <= 1e-12 * max(1.0, float(np.max(np.abs(Y)))))
            if degenerate.size:
                column = int(degenerate[0])
                name = roi_names[column] if roi_names is not None else None
                raise DegenerateColumnError(k, column, name)
            centered = centered / sd
            centered = centered - centered.mean(axis=0)
        subjects.append(ObservationMatrix.from_centered(centered))

    names = list(roi_names) if roi_names is not None else default_roi_names(p)
    if len(names) != p:
        raise InvalidInputError(f"Got {len(names)} ROI names for {p} variables")
    return TimeSeriesPanel(subjects=subjects, p=p, roi_names=names, standardized=standardize)
