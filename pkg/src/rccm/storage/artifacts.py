"""JSON documents: fit artifacts, simulation truth and manifests."""

import hashlib
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .. import __version__
from ..benchmark.simulate import NetworkTruth
from ..config.models import FitOptions, SimulationConfig, TuningParams
from ..core.state import ModelState, hard_assignments
from ..exceptions import ConfigurationError

DocumentT = TypeVar("DocumentT", bound=BaseModel)


class MatrixPayload(BaseModel):
    """Square matrix stored row-major."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., ge=1, description="Number of rows and columns")
    data: List[float] = Field(..., description="Entries in row-major order")

    @model_validator(mode="after")
    def check_size(self) -> "MatrixPayload":
        if len(self.data) != self.dim * self.dim:
            raise ValueError(f"Expected {self.dim * self.dim} entries, got {len(self.data)}")
        return self

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "MatrixPayload":
        matrix = np.asarray(matrix, dtype=float)
        return cls(dim=matrix.shape[0], data=[float(x) for x in matrix.ravel()])

    def to_array(self) -> np.ndarray:
        return np.array(self.data, dtype=float).reshape(self.dim, self.dim)


class ConvergenceRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    converged: bool
    iterations: int
    max_entry_change: Optional[float] = Field(None, description="Largest entry change in the last iteration")
    epsilon: float
    objective_trace: List[Optional[float]] = Field(default_factory=list, description="Objective per iteration")


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


class FitArtifact(BaseModel):
    """Everything needed to reload and inspect an RCCM fit; labels are 0-based."""

    model_config = ConfigDict(extra="forbid")

    version: str = Field(..., description="Software version that wrote the artifact")
    seed: int = Field(..., description="Seed of the fit")
    tuning: TuningParams
    fit_options: FitOptions
    convergence: ConvergenceRecord
    roi_names: List[str]
    subject_files: List[str] = Field(default_factory=list, description="Input files in subject order")
    assignments: List[int] = Field(..., description="Hard cluster label per subject")
    weights: List[float] = Field(..., description="Mixture weights")
    responsibilities: List[List[float]] = Field(..., description="G x K responsibilities")
    subject_precisions: List[MatrixPayload]
    group_precisions: List[MatrixPayload]

    @classmethod
    def from_state(
        cls,
        state: ModelState,
        tuning: TuningParams,
        fit_options: FitOptions,
        roi_names: Sequence[str],
        subject_files: Sequence[str] = (),
    ) -> "FitArtifact":
        return cls(
            version=__version__,
            seed=fit_options.seed,
            tuning=tuning,
            fit_options=fit_options,
            convergence=ConvergenceRecord(
                converged=state.converged,
                iterations=state.iteration,
                max_entry_change=_finite_or_none(state.max_entry_change),
                epsilon=fit_options.epsilon,
                objective_trace=[_finite_or_none(v) for v in state.objective_trace],
            ),
            roi_names=list(roi_names),
            subject_files=list(subject_files),
            assignments=hard_assignments(state).tolist(),
            weights=[float(w) for w in state.weights],
            responsibilities=np.asarray(state.responsibilities, dtype=float).tolist(),
            subject_precisions=[MatrixPayload.from_array(m) for m in state.subject_precisions],
            group_precisions=[MatrixPayload.from_array(m) for m in state.group_precisions],
        )

    def to_state(self) -> ModelState:
        record = self.convergence
        return ModelState(
            subject_precisions=[m.to_array() for m in self.subject_precisions],
            group_precisions=[m.to_array() for m in self.group_precisions],
            weights=np.array(self.weights),
            responsibilities=np.array(self.responsibilities),
            iteration=record.iterations,
            max_entry_change=record.max_entry_change if record.max_entry_change is not None else float("inf"),
            converged=record.converged,
            objective_trace=[v if v is not None else float("inf") for v in record.objective_trace],
        )


def _edges(network) -> List[Tuple[int, int]]:
    return [tuple(edge) for edge in sorted(network)]


class TruthDocument(BaseModel):
    """Ground truth of a simulation; labels are 0-based."""

    model_config = ConfigDict(extra="forbid")

    version: str
    config: SimulationConfig
    labels: List[int]
    shared_edges: List[Tuple[int, int]]
    hubs: List[List[int]]
    group_networks: List[List[Tuple[int, int]]]
    subject_networks: List[List[Tuple[int, int]]]
    group_precisions: List[MatrixPayload]
    subject_precisions: List[MatrixPayload]

    @classmethod
    def from_truth(cls, truth: NetworkTruth, config: SimulationConfig) -> "TruthDocument":
        return cls(
            version=__version__,
            config=config,
            labels=[int(g) for g in truth.labels],
            shared_edges=_edges(truth.shared_edges),
            hubs=[list(h) for h in truth.hubs],
            group_networks=[_edges(n) for n in truth.group_networks],
            subject_networks=[_edges(n) for n in truth.subject_networks],
            group_precisions=[MatrixPayload.from_array(m) for m in truth.group_precisions],
            subject_precisions=[MatrixPayload.from_array(m) for m in truth.subject_precisions],
        )

    def to_truth(self) -> NetworkTruth:
        return NetworkTruth(
            group_networks=[frozenset(map(tuple, n)) for n in self.group_networks],
            subject_networks=[frozenset(map(tuple, n)) for n in self.subject_networks],
            group_precisions=[m.to_array() for m in self.group_precisions],
            subject_precisions=[m.to_array() for m in self.subject_precisions],
            labels=np.array(self.labels, dtype=int),
            shared_edges=frozenset(map(tuple, self.shared_edges)),
            hubs=[list(h) for h in self.hubs],
        )


class Manifest(BaseModel):
    """Files written by a command with their SHA-256 digests."""

    model_config = ConfigDict(extra="forbid")

    version: str
    command: str
    seed: int
    files: Dict[str, str] = Field(..., description="Relative path to SHA-256 hex digest")


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(root: Union[str, Path], paths: Sequence[Path], command: str, seed: int) -> Manifest:
    root = Path(root)
    files = {Path(p).relative_to(root).as_posix(): sha256_file(p) for p in sorted(paths)}
    return Manifest(version=__version__, command=command, seed=seed, files=files)


def write_json(path: Union[str, Path], document: BaseModel) -> Path:
    """Write a document as indented JSON with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(document.model_dump_json(indent=2))
        handle.write("\n")
    return path


def read_json(path: Union[str, Path], model: Type[DocumentT]) -> DocumentT:
    """
    Read and validate a JSON document.

    Raises:
        ConfigurationError: If the file is unreadable or fails validation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read {path}: {e}") from e
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        errors = e.errors(include_url=False)
        keys = ", ".join(".".join(str(part) for part in err["loc"]) or "<root>" for err in errors)
        raise ConfigurationError(f"Invalid {model.__name__} in {path}: offending keys {keys}", errors=errors) from e
