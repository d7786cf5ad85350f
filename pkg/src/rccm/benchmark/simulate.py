"""Synthetic hub-network panels with known cluster structure."""

from dataclasses import dataclass
from math import comb, floor, isqrt
from typing import FrozenSet, List, Optional, Set, Tuple

import numpy as np

from ..config.models import Magnitude, SimulationConfig
from ..core.linalg import cholesky_or_none, inv_pd, make_positive_definite, min_eigenvalue, symmetrize
from ..core.panel import TimeSeriesPanel, build_panel
from ..exceptions import InvalidInputError
from ..utils.logging import get_logger
from ..utils.random import substream

logger = get_logger(__name__)

Edge = Tuple[int, int]


HIGH_RANGE = (0.5, 1.0)
MAGNITUDE_SCALE = {
    Magnitude.HIGH: 1.0,
    Magnitude.LOW: 1.0 / 3.0,
}
# Smallest eigenvalue a generated precision may keep without the row-division repair
CONDITION_FLOOR = 0.1
MAX_NETWORK_TRIES = 1000
SHIFT_FLOOR = 1e-3


@dataclass
class NetworkTruth:
    """Ground truth of a simulated panel; labels are 0-based."""

    group_networks: List[FrozenSet[Edge]]
    subject_networks: List[FrozenSet[Edge]]
    group_precisions: List[np.ndarray]
    subject_precisions: List[np.ndarray]
    labels: np.ndarray
    shared_edges: FrozenSet[Edge]
    hubs: List[List[int]]

    @property
    def G(self) -> int:
        return len(self.group_networks)

    @property
    def K(self) -> int:
        return len(self.subject_networks)

    @property
    def p(self) -> int:
        return self.group_precisions[0].shape[0]


def hub_count(p: int) -> int:
    return isqrt(p)


def edge_count(p: int) -> int:
    return p - hub_count(p)


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def _contiguous_hub_network(p: int) -> Tuple[FrozenSet[Edge], List[int]]:
    blocks = np.array_split(np.arange(p), hub_count(p))
    edges = {_edge(int(block[0]), int(leaf)) for block in blocks for leaf in block[1:]}
    return frozenset(edges), [int(block[0]) for block in blocks]


def _hub_network_with_shared(
    p: int,
    shared: FrozenSet[Edge],
    shared_hubs: Set[int],
    rng: np.random.Generator,
) -> Tuple[FrozenSet[Edge], List[int]]:
    """Random star forest with ``floor(sqrt(p))`` hubs containing every shared (hub, leaf) edge."""
    h = hub_count(p)
    shared_leaves = {j if i in shared_hubs else i for i, j in shared}
    pool = np.array(sorted(set(range(p)) - shared_hubs - shared_leaves))
    extra = rng.choice(pool, size=h - len(shared_hubs), replace=False) if h > len(shared_hubs) else []
    hubs = sorted(shared_hubs | {int(x) for x in extra})
    edges = set(shared)
    for node in range(p):
        if node in hubs or node in shared_leaves:
            continue
        edges.add(_edge(int(rng.choice(hubs)), node))
    return frozenset(edges), hubs


def _shared_hubs(shared: FrozenSet[Edge], hubs: List[int]) -> Set[int]:
    hub_set = set(hubs)
    return {i if i in hub_set else j for i, j in shared}


def generate_networks(
    G: int, p: int, rho: float, rng: np.random.Generator
) -> Tuple[List[FrozenSet[Edge]], List[List[int]], FrozenSet[Edge]]:
    """
    Group hub networks where any two share exactly the designated ``floor(rho E)`` edges.

    The first network partitions the nodes into contiguous blocks with the
    first node of each block as hub. Later networks keep the shared edges and
    their hubs, draw the remaining hubs and spokes at random, and are redrawn
    until they overlap no earlier network outside the shared set.
    """
    E = edge_count(p)
    s = floor(rho * E)
    first, first_hubs = _contiguous_hub_network(p)
    ordered = sorted(first)
    picks = rng.choice(len(ordered), size=s, replace=False) if s else []
    shared = frozenset(ordered[int(i)] for i in picks)
    hubs_of_shared = _shared_hubs(shared, first_hubs)

    networks, hubs = [first], [first_hubs]
    for g in range(1, G):
        for _ in range(MAX_NETWORK_TRIES):
            candidate, candidate_hubs = _hub_network_with_shared(p, shared, hubs_of_shared, rng)
            extra = candidate - shared
            if all(not (extra & (network - shared)) for network in networks):
                break
        else:
            raise InvalidInputError(
                f"Could not draw group network {g} sharing only the {s} designated edges "
                f"in {MAX_NETWORK_TRIES} attempts (G={G}, p={p}, rho={rho})"
            )
        networks.append(candidate)
        hubs.append(candidate_hubs)
    return networks, hubs, shared


def _signed_uniform(rng: np.random.Generator, magnitude: Magnitude, size=None):
    low, high = HIGH_RANGE
    values = rng.uniform(low, high, size=size) * MAGNITUDE_SCALE[magnitude]
    signs = np.where(rng.random(size=size) < 0.5, -1.0, 1.0)
    return values * signs


def needs_repair(M: np.ndarray) -> bool:
    return min_eigenvalue(M) < CONDITION_FLOOR


def row_division_repair(M: np.ndarray) -> np.ndarray:
    """
    Divide every off-diagonal entry by the larger nonzero count of its row and column.

    Counts include the diagonal and the diagonal itself is kept, so a matrix
    with unit diagonal and off-diagonal entries of magnitude at most one comes
    out strictly diagonally dominant and symmetric.
    """
    M = symmetrize(M)
    counts = np.maximum(np.count_nonzero(M, axis=1), 1).astype(float)
    repaired = M / np.maximum.outer(counts, counts)
    np.fill_diagonal(repaired, np.diag(M))
    return repaired


def _ensure_positive_definite(M: np.ndarray, name: str) -> np.ndarray:
    if cholesky_or_none(M) is not None:
        return M
    logger.warning(f"{name} is not positive definite after row division; shifting its spectrum")
    return make_positive_definite(M, SHIFT_FLOOR)


def _scale_off_diagonal(M: np.ndarray, factor: float) -> np.ndarray:
    scaled = M * factor
    np.fill_diagonal(scaled, np.diag(M))
    return scaled


def _group_precisions(
    networks: List[FrozenSet[Edge]],
    shared: FrozenSet[Edge],
    p: int,
    magnitude: Magnitude,
    rng: np.random.Generator,
) -> List[np.ndarray]:
    """
    Unit-diagonal group precisions drawn on the high-magnitude scale.

    If any group is poorly conditioned every group gets the row-division
    repair, and shared entries are then set to their smallest repaired
    magnitude so they stay identical across groups. Low magnitude scales the
    result's off-diagonal entries by one third.
    """
    shared_values = {edge: float(_signed_uniform(rng, Magnitude.HIGH)) for edge in sorted(shared)}
    precisions = []
    for network in networks:
        M = np.eye(p)
        for edge in sorted(network):
            value = shared_values[edge] if edge in shared else float(_signed_uniform(rng, Magnitude.HIGH))
            M[edge] = M[edge[::-1]] = value
        precisions.append(M)

    if any(needs_repair(M) for M in precisions):
        precisions = [row_division_repair(M) for M in precisions]
        for i, j in sorted(shared):
            common = min((M[i, j] for M in precisions), key=abs)
            for M in precisions:
                M[i, j] = M[j, i] = common

    factor = MAGNITUDE_SCALE[magnitude]
    return [
        _ensure_positive_definite(_scale_off_diagonal(M, factor), f"Group precision {g}")
        for g, M in enumerate(precisions)
    ]


def _toggle_pairs(p: int, count: int, rng: np.random.Generator) -> List[Edge]:
    rows, cols = np.triu_indices(p, k=1)
    picks = rng.choice(comb(p, 2), size=count, replace=False)
    return [(int(rows[i]), int(cols[i])) for i in picks]


def _subject_precision(
    group_precision: np.ndarray,
    group_network: FrozenSet[Edge],
    toggles: List[Edge],
    cfg: SimulationConfig,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, FrozenSet[Edge]]:
    """Group values plus noise on nonzero entries, with toggled pairs; repaired only when poorly conditioned."""
    p = cfg.p
    network = set(group_network)
    M = group_precision.copy()
    noise = rng.normal(0.0, cfg.noise_sd, size=(p, p))
    noise = np.triu(noise) + np.triu(noise, k=1).T
    keep = M != 0.0
    M = np.where(keep, M + noise, 0.0)
    for edge in toggles:
        if edge in network:
            network.remove(edge)
            M[edge] = M[edge[::-1]] = 0.0
        else:
            network.add(edge)
            M[edge] = M[edge[::-1]] = float(_signed_uniform(rng, cfg.magnitude))
    if needs_repair(M):
        M = _ensure_positive_definite(row_division_repair(M), "Subject precision")
    return M, frozenset(network)


def generate_truth(cfg: SimulationConfig) -> NetworkTruth:
    """
    Draw group hub networks, group and subject precision matrices and labels.

    Group networks come from ``cfg.network_seed`` when set (so they stay fixed
    across replicates), otherwise from ``cfg.seed``; values, labels and subject
    perturbations always come from ``cfg.seed``.

    Args:
        cfg: Simulation settings

    Returns:
        The ground truth
    """
    p, E = cfg.p, edge_count(cfg.p)
    network_seed = cfg.network_seed if cfg.network_seed is not None else cfg.seed
    networks, hubs, shared = generate_networks(cfg.G, p, cfg.rho, substream(network_seed, "networks"))

    value_rng = substream(cfg.seed, "simulate")
    group_precisions = _group_precisions(networks, shared, p, cfg.magnitude, value_rng)
    labels = value_rng.permutation(np.repeat(np.arange(cfg.G), cfg.cluster_sizes))

    toggles_per_subject = floor(cfg.subject_perturbation_rate * E)
    subject_precisions, subject_networks = [], []
    for k in range(cfg.K):
        rng = substream(cfg.seed, "simulate", k + 1)
        g = int(labels[k])
        toggles = _toggle_pairs(p, toggles_per_subject, rng)
        precision, network = _subject_precision(group_precisions[g], networks[g], toggles, cfg, rng)
        subject_precisions.append(precision)
        subject_networks.append(network)

    logger.debug(f"Generated truth: G={cfg.G}, K={cfg.K}, p={p}, E={E}, shared={len(shared)}")
    return NetworkTruth(
        group_networks=networks,
        subject_networks=subject_networks,
        group_precisions=group_precisions,
        subject_precisions=subject_precisions,
        labels=labels.astype(int),
        shared_edges=shared,
        hubs=hubs,
    )


def sample_panel(
    truth: NetworkTruth,
    n: int,
    seed: int,
    roi_names: Optional[List[str]] = None,
) -> TimeSeriesPanel:
    """Draw n zero-mean Gaussian observations per subject with covariance Omega_k^{-1}, then standardize."""
    matrices = []
    for k, precision in enumerate(truth.subject_precisions):
        rng = substream(seed, "sample", k)
        covariance = inv_pd(precision)
        matrices.append(rng.multivariate_normal(np.zeros(truth.p), covariance, size=n, method="cholesky"))
    return build_panel(matrices, standardize=True, roi_names=roi_names)


def simulate(cfg: SimulationConfig) -> Tuple[NetworkTruth, TimeSeriesPanel]:
    """Generate the truth and sample a panel from it."""
    truth = generate_truth(cfg)
    return truth, sample_panel(truth, cfg.n, cfg.seed)
