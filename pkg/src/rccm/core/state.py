"""Model state carried through the EM iterations."""

from dataclasses import dataclass, field, replace
from typing import List

import numpy as np


@dataclass
class ModelState:
    """
    Current RCCM iterate.

    Attributes:
        subject_precisions: K subject-level precision matrices
        group_precisions: G cluster-level precision matrices
        weights: Mixture weights, length G
        responsibilities: G x K posterior membership probabilities
        iteration: Completed EM iterations (0 after initialization)
        max_entry_change: Largest absolute entry change in the last iteration
        converged: Whether the change fell below epsilon
        objective_trace: Penalized objective after initialization and each iteration
    """

    subject_precisions: List[np.ndarray]
    group_precisions: List[np.ndarray]
    weights: np.ndarray
    responsibilities: np.ndarray
    iteration: int = 0
    max_entry_change: float = float("inf")
    converged: bool = False
    objective_trace: List[float] = field(default_factory=list)

    @property
    def G(self) -> int:
        return len(self.group_precisions)

    @property
    def K(self) -> int:
        return len(self.subject_precisions)

    @property
    def p(self) -> int:
        return self.subject_precisions[0].shape[0]

    def copy(self) -> "ModelState":
        return replace(
            self,
            subject_precisions=[m.copy() for m in self.subject_precisions],
            group_precisions=[m.copy() for m in self.group_precisions],
            weights=self.weights.copy(),
            responsibilities=self.responsibilities.copy(),
            objective_trace=list(self.objective_trace),
        )


def hard_assignments(state: ModelState) -> np.ndarray:
    """
    Assign each subject to the cluster with the largest responsibility.

    ``numpy.argmax`` returns the first maximum, so ties go to the smaller
    cluster index.
    """
    return np.argmax(state.responsibilities, axis=0).astype(int)
