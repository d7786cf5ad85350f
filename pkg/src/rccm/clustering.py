"""Clustering of precision matrices: Ward agglomeration, Frobenius distances, vectorized k-means."""

from typing import List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform
from sklearn.cluster import KMeans

from .exceptions import InvalidInputError
from .utils.logging import get_logger
from .utils.random import derive_seed

logger = get_logger(__name__)


def frobenius_distance_matrix(precisions: Sequence[np.ndarray]) -> np.ndarray:
    """
    Pairwise Frobenius norms of differences between matrices.

    Args:
        precisions: K matrices of a common dimension

    Returns:
        Symmetric K x K distance matrix with zero diagonal
    """
    if len(precisions) == 0:
        raise InvalidInputError("Need at least one matrix")
    shapes = {np.shape(m) for m in precisions}
    if len(shapes) != 1:
        raise InvalidInputError(f"Matrices have differing shapes: {sorted(shapes)}")
    if len(precisions) == 1:
        return np.zeros((1, 1))
    flat = np.stack([np.asarray(m, dtype=float).ravel() for m in precisions])
    return squareform(pdist(flat, metric="euclidean"))


def ward_merges(distances) -> List[Tuple[int, int, float, int]]:
    """
    Full Ward (D2) merge sequence by the Lance-Williams recurrence on squared distances.

    The closest pair is found in row-major order over the upper triangle, so
    ties go to the smallest index pair. The merged cluster keeps the smaller slot.

    Args:
        distances: Symmetric K x K nonnegative matrix with zero diagonal

    Returns:
        List of (kept_slot, absorbed_slot, height, merged_size) in merge order
    """
    D = np.asarray(distances, dtype=float)
    K = D.shape[0]
    if D.ndim != 2 or D.shape[1] != K:
        raise InvalidInputError(f"Distance matrix must be square, got shape {D.shape}")
    if np.any(D < 0) or not np.all(np.isfinite(D)):
        raise InvalidInputError("Distances must be finite and nonnegative")
    if np.max(np.abs(D - D.T), initial=0.0) > 1e-10 or np.max(np.abs(np.diag(D)), initial=0.0) > 1e-10:
        raise InvalidInputError("Distance matrix must be symmetric with zero diagonal")

    D2 = np.square(D)
    sizes = np.ones(K)
    active = np.ones(K, dtype=bool)
    upper = np.triu(np.ones((K, K), dtype=bool), k=1)
    merges = []
    for _ in range(K - 1):
        mask = upper & active[:, None] & active[None, :]
        candidates = np.where(mask, D2, np.inf)
        flat = int(np.argmin(candidates))
        i, j = divmod(flat, K)
        height = float(np.sqrt(max(D2[i, j], 0.0)))
        n_i, n_j = sizes[i], sizes[j]
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        n_k = sizes[others]
        updated = ((n_i + n_k) * D2[i, others] + (n_j + n_k) * D2[j, others] - n_k * D2[i, j]) / (
            n_i + n_j + n_k
        )
        D2[i, others] = updated
        D2[others, i] = updated
        sizes[i] = n_i + n_j
        active[j] = False
        merges.append((i, j, height, int(sizes[i])))
    return merges


def ward_cluster(distances, G: int) -> np.ndarray:
    """
    Cut the Ward (D2) hierarchy at G clusters.

    Args:
        distances: Symmetric K x K nonnegative matrix with zero diagonal
        G: Number of clusters

    Returns:
        Length-K array of 0-based labels, numbered by each cluster's smallest member

    Raises:
        InvalidInputError: If G < 1 or G > K
    """
    D = np.asarray(distances, dtype=float)
    K = D.shape[0]
    if G < 1 or G > K:
        raise InvalidInputError(f"Cannot form G = {G} clusters from K = {K} subjects")

    parent = np.arange(K)
    for kept, absorbed, _, _ in ward_merges(D)[: K - G]:
        parent[parent == absorbed] = kept
    roots = sorted(set(parent.tolist()))
    relabel = {root: g for g, root in enumerate(roots)}
    return np.array([relabel[root] for root in parent], dtype=int)


def vectorize_upper(precisions: Sequence[np.ndarray]) -> np.ndarray:
    """Stack the upper triangles (diagonal included) of the matrices as rows."""
    p = np.shape(precisions[0])[0]
    rows, cols = np.triu_indices(p)
    return np.stack([np.asarray(m, dtype=float)[rows, cols] for m in precisions])


def relabel_by_first_appearance(labels) -> np.ndarray:
    mapping = {}
    for label in labels:
        mapping.setdefault(int(label), len(mapping))
    return np.array([mapping[int(label)] for label in labels], dtype=int)


def kmeans_vectorized(
    precisions: Sequence[np.ndarray],
    G: int,
    seed: int,
    restarts: int = 10,
) -> np.ndarray:
    """
    K-means on vectorized matrices with k-means++ seeding and the best of ``restarts`` runs.

    Args:
        precisions: K matrices
        G: Number of clusters
        seed: Seed; scikit-learn receives a value derived from it
        restarts: Number of k-means++ initializations

    Returns:
        Length-K array of 0-based labels numbered by first appearance
    """
    K = len(precisions)
    if G < 1 or G > K:
        raise InvalidInputError(f"Cannot form G = {G} clusters from K = {K} subjects")
    if G == 1:
        return np.zeros(K, dtype=int)
    X = vectorize_upper(precisions)
    model = KMeans(
        n_clusters=G,
        init="k-means++",
        n_init=restarts,
        random_state=derive_seed(seed, "kmeans"),
    )
    labels = model.fit_predict(X)
    logger.debug(f"K-means with G={G}: inertia {model.inertia_:.4g}")
    return relabel_by_first_appearance(labels)


def edge_presence_variability(
    precisions: Sequence[np.ndarray],
    labels,
    G: int,
    threshold: float = 1e-8,
) -> List[np.ndarray]:
    """
    Per-cluster variability of edge presence across members.

    For each cluster, ``q_ij`` is the fraction of members whose matrix has
    ``|omega_ij| > threshold``; the result is ``q_ij * (1 - q_ij)`` with a zero
    diagonal. Empty clusters give a zero matrix.

    Args:
        precisions: K subject-level matrices
        labels: 0-based cluster labels
        G: Number of clusters
        threshold: Edge threshold

    Returns:
        G matrices of shape p x p
    """
    labels = np.asarray(labels, dtype=int)
    presence = np.stack([np.abs(np.asarray(m)) > threshold for m in precisions]).astype(float)
    p = presence.shape[1]
    result = []
    for g in range(G):
        members = presence[labels == g]
        if members.shape[0] == 0:
            result.append(np.zeros((p, p)))
            continue
        q = members.mean(axis=0)
        variability = q * (1.0 - q)
        np.fill_diagonal(variability, 0.0)
        result.append(variability)
    return result
