"""Configuration models for the RCCM toolkit."""

from enum import Enum
from itertools import product
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..exceptions import InvalidTuningError


class Magnitude(str, Enum):
    """Magnitude setting of simulated precision-matrix entries."""
    HIGH = "high"
    LOW = "low"


class Method(str, Enum):
    """Methods compared by the benchmark harness."""
    RCCM = "rccm"
    GLASSO_KMEANS = "glasso-kmeans"
    WARD_POOLED = "ward-pooled"


class FitterType(str, Enum):
    """Estimators the stability selection procedure can wrap."""
    RCCM = "rccm"
    GLASSO = "glasso-per-subject"


class SelectionMode(str, Enum):
    """How the benchmark chooses tuning parameters."""
    STARS = "stars"
    FIXED = "fixed"


class InitMethod(str, Enum):
    """Hard initial assignment used by the EM loop."""
    WARD = "ward"
    RANDOM = "random"


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SolverOptions(_StrictModel):
    """Iteration controls for the convex subproblem solvers."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_iterations: int = Field(500, ge=1, description="Maximum outer iterations")
    tolerance: float = Field(1e-6, gt=0, description="Stationarity residual tolerance")


class TuningParams(_StrictModel):
    """Penalties, Wishart degrees of freedom and number of clusters."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda1: float = Field(..., ge=0, description="Subject-level lasso penalty")
    lambda2: float = Field(..., gt=0, description="Wishart degrees of freedom (subject/cluster similarity)")
    lambda3: float = Field(..., ge=0, description="Cluster-level lasso penalty")
    G: int = Field(1, ge=1, description="Number of clusters")

    def check_panel(self, p: int, sample_sizes: List[int]) -> None:
        """
        Verify the model constraints for a panel.

        Args:
            p: Number of variables
            sample_sizes: Observation count of every subject

        Raises:
            InvalidTuningError: If lambda2 <= p - 1 or n_k + lambda2 - p - 1 <= 0
        """
        if self.lambda2 <= p - 1:
            raise InvalidTuningError(
                f"lambda2 = {self.lambda2} must exceed p - 1 = {p - 1}; the Wishart density "
                f"requires lambda2 > p - 1 and every subject needs n_k + lambda2 - p - 1 > 0"
            )
        for k, n_k in enumerate(sample_sizes):
            if n_k + self.lambda2 - p - 1 <= 0:
                raise InvalidTuningError(
                    f"Subject {k}: n_k + lambda2 - p - 1 = {n_k + self.lambda2 - p - 1} "
                    "must be positive; increase lambda2",
                    subject=k,
                )

    def with_groups(self, G: int) -> "TuningParams":
        return self.model_copy(update={"G": G})


class FitOptions(_StrictModel):
    """Controls for the EM loop."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = Field(1e-3, gt=0, description="Largest entry change that counts as converged")
    max_em_iterations: int = Field(200, ge=1, description="Maximum EM iterations")
    init_glasso_lambda: float = Field(1e-3, gt=0, description="GLasso penalty of the initial estimates")
    init_method: InitMethod = Field(InitMethod.WARD, description="Initial hard assignment")
    seed: int = Field(0, ge=0, description="Seed for random initialization")
    solver: SolverOptions = Field(default_factory=SolverOptions, description="Subproblem solver controls")


class TuningGrid(_StrictModel):
    """
    Ordered candidate tuning parameters for a fixed number of clusters.

    Accepts either an explicit ``candidates`` list or the axes form
    ``{"G": 2, "lambda1": [...], "lambda2": [...], "lambda3": [...]}``, which
    expands to the Cartesian product. Candidates are kept in lexicographic
    (lambda1, lambda2, lambda3) order.
    """

    candidates: List[TuningParams] = Field(..., min_length=1, description="Candidate tuning parameters")

    @model_validator(mode="before")
    @classmethod
    def expand_axes(cls, data: Any) -> Any:
        if isinstance(data, dict) and "candidates" not in data:
            axes = {key: data.get(key) for key in ("lambda1", "lambda2", "lambda3")}
            unknown = set(data) - {"G", "lambda1", "lambda2", "lambda3"}
            if unknown:
                raise ValueError(f"Unknown grid keys: {sorted(unknown)}")
            if any(value is None for value in axes.values()):
                raise ValueError("Grid needs 'candidates' or all of lambda1, lambda2, lambda3")
            G = data.get("G", 1)
            return {
                "candidates": [
                    {"lambda1": l1, "lambda2": l2, "lambda3": l3, "G": G}
                    for l1, l2, l3 in product(axes["lambda1"], axes["lambda2"], axes["lambda3"])
                ]
            }
        return data

    @field_validator("candidates")
    @classmethod
    def order_candidates(cls, v: List[TuningParams]) -> List[TuningParams]:
        if len({c.G for c in v}) > 1:
            raise ValueError("All grid candidates must share the same G")
        return sorted(v, key=lambda c: (c.lambda1, c.lambda2, c.lambda3))

    @classmethod
    def from_axes(
        cls,
        lambda1: List[float],
        lambda2: List[float],
        lambda3: List[float],
        G: int = 1,
    ) -> "TuningGrid":
        return cls.model_validate({"G": G, "lambda1": lambda1, "lambda2": lambda2, "lambda3": lambda3})

    @property
    def G(self) -> int:
        return self.candidates[0].G


class StarsConfig(_StrictModel):
    """Stability selection settings."""

    num_subsamples: int = Field(20, ge=2, description="Subsamples per subject (N)")
    beta: float = Field(0.05, gt=0, le=0.5, description="Instability bound")
    seed: int = Field(0, ge=0, description="Seed of the subsample stream")
    edge_threshold: float = Field(1e-8, ge=0, description="Magnitude above which an entry is an edge")


class GapConfig(_StrictModel):
    """Gap statistic settings."""

    G_max: int = Field(4, ge=2, description="Largest number of clusters considered")
    B: int = Field(10, ge=1, description="Number of reference datasets")
    reference_glasso_lambda: float = Field(1e-16, gt=0, description="GLasso penalty for dispersion estimates")
    seed: int = Field(0, ge=0, description="Seed of the reference stream")


class SimulationConfig(_StrictModel):
    """Synthetic hub-network panel settings."""

    G: int = Field(2, ge=1, description="Number of clusters")
    K: int = Field(..., ge=1, description="Number of subjects")
    p: int = Field(10, ge=4, description="Number of variables (at least two hubs)")
    n: int = Field(177, ge=2, description="Observations per subject")
    rho: float = Field(0.2, ge=0, le=1, description="Proportion of shared group edges")
    magnitude: Magnitude = Field(Magnitude.HIGH, description="Magnitude of precision entries")
    cluster_sizes: Optional[List[int]] = Field(None, description="Subjects per cluster (sum to K)")
    subject_perturbation_rate: float = Field(0.20, ge=0, le=1, description="Share of E toggled per subject")
    noise_sd: float = Field(0.05, ge=0, description="Standard deviation of subject-level noise")
    seed: int = Field(0, ge=0, description="Seed for values, labels and samples")
    network_seed: Optional[int] = Field(None, ge=0, description="Seed fixing group networks across replicates")

    @model_validator(mode="after")
    def check_cluster_sizes(self) -> "SimulationConfig":
        if self.G > self.K:
            raise ValueError(f"G = {self.G} exceeds K = {self.K}")
        if self.cluster_sizes is None:
            base, extra = divmod(self.K, self.G)
            sizes = [base + (1 if g < extra else 0) for g in range(self.G)]
            self.cluster_sizes = sizes
        sizes = self.cluster_sizes
        if len(sizes) != self.G:
            raise ValueError(f"cluster_sizes has {len(sizes)} entries for G = {self.G}")
        if any(size < 1 for size in sizes):
            raise ValueError("Every cluster needs at least one subject")
        if sum(sizes) != self.K:
            raise ValueError(f"cluster_sizes sum to {sum(sizes)}, expected K = {self.K}")
        return self


class BenchmarkConfig(_StrictModel):
    """Benchmark harness settings."""

    settings: List[SimulationConfig] = Field(..., min_length=1, description="Simulation settings (table rows)")
    replicates: int = Field(10, ge=1, description="Datasets per setting")
    methods: List[Method] = Field(
        default_factory=lambda: [Method.RCCM, Method.GLASSO_KMEANS, Method.WARD_POOLED],
        min_length=1,
        description="Methods to evaluate",
    )
    selection: SelectionMode = Field(SelectionMode.FIXED, description="Tuning parameter selection")
    rccm: TuningParams = Field(
        default_factory=lambda: TuningParams(lambda1=0.05, lambda2=30.0, lambda3=0.05),
        description="Fixed RCCM tuning (G taken from each setting)",
    )
    glasso_lambda: float = Field(0.1, ge=0, description="Fixed GLasso penalty for the two-step baselines")
    rccm_grid: Optional[TuningGrid] = Field(None, description="RCCM grid searched when selection is stars")
    glasso_grid: List[float] = Field(
        default_factory=lambda: [0.05, 0.1, 0.2, 0.3, 0.45, 0.6],
        description="GLasso penalties searched when selection is stars",
    )
    stars: StarsConfig = Field(default_factory=StarsConfig, description="Stability selection settings")
    fit: FitOptions = Field(default_factory=FitOptions, description="EM settings")
    kmeans_restarts: int = Field(10, ge=1, description="K-means restarts")
    seed: int = Field(0, ge=0, description="Master seed")
