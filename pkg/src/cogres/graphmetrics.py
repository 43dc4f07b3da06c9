"""Node-level topology of weighted connectomes and KL comparison of their distributions.

Every measure works on the absolute off-diagonal weights |w_ij|; the
diagonal (self-correlation) is ignored.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import Connectome
from .errors import InsufficientDataError, NumericalError

MEASURES = (
    "information_centrality",
    "laplacian_centrality",
    "eigenvector_centrality",
    "pagerank",
    "node_strength",
)


def adjacency(c) -> np.ndarray:
    """|W| with a zero diagonal."""
    w = c.weights if isinstance(c, Connectome) else np.asarray(c, dtype=np.float64)
    a = np.abs(w)
    np.fill_diagonal(a, 0.0)
    return a


def node_strength(c) -> np.ndarray:
    return adjacency(c).sum(axis=1)


def eigenvector_centrality(c, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Perron vector of |W| with unit 2-norm.

    Iterates with A + I, which shares A's eigenvectors but has no negative
    eigenvalue of the same magnitude as the dominant one (bipartite graphs
    would otherwise oscillate).
    """
    a = adjacency(c)
    n = a.shape[0]
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        y = a @ x + x
        y /= np.linalg.norm(y)
        if np.abs(y - x).max() < tol:
            return y
        x = y
    raise NumericalError(f"eigenvector centrality did not converge in {max_iter} iterations", x)


def pagerank(c, damping: float = 0.85, tol: float = 1e-13, max_iter: int = 10_000) -> np.ndarray:
    """PageRank with row-normalized |W| transitions; zero-strength nodes jump uniformly."""
    a = adjacency(c)
    n = a.shape[0]
    strength = a.sum(axis=1)
    dangling = strength == 0
    p = np.divide(a, strength[:, None], out=np.zeros_like(a), where=~dangling[:, None])
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = damping * (x @ p + x[dangling].sum() / n) + (1.0 - damping) / n
        y /= y.sum()
        if np.abs(y - x).sum() < tol:
            return y
        x = y
    raise NumericalError(f"pagerank did not converge in {max_iter} iterations", x)


def laplacian_energy(a: np.ndarray) -> float:
    """sum_i s_i^2 + 2 sum_{i<j} w_ij^2 for a zero-diagonal weight matrix."""
    s = a.sum(axis=1)
    return float(np.dot(s, s) + np.sum(a * a))


def laplacian_centrality(c) -> np.ndarray:
    """Drop in Laplacian energy when each node (and its edges) is removed."""
    a = adjacency(c)
    n = a.shape[0]
    total = laplacian_energy(a)
    out = np.empty(n)
    keep = np.ones(n, dtype=bool)
    for v in range(n):
        keep[v] = False
        out[v] = total - laplacian_energy(a[np.ix_(keep, keep)])
        keep[v] = True
    return out


def information_centrality(c) -> np.ndarray:
    """Stephenson-Zelen information centrality, per connected component.

    For a component of n nodes with Laplacian L, C = (L + J)^-1 and
    IC(u) = n / sum_v (C_uu + C_vv - 2 C_uv). Isolated nodes score 0.
    """
    a = adjacency(c)
    n = a.shape[0]
    n_comp, labels = connected_components(a > 0, directed=False)
    out = np.zeros(n)
    for k in range(n_comp):
        idx = np.flatnonzero(labels == k)
        if idx.size < 2:
            continue
        sub = a[np.ix_(idx, idx)]
        lap = np.diag(sub.sum(axis=1)) - sub
        cmat = np.linalg.inv(lap + 1.0)
        diag = np.diag(cmat)
        resist = diag[:, None] + diag[None, :] - 2.0 * cmat
        np.fill_diagonal(resist, 0.0)
        out[idx] = idx.size / resist.sum(axis=1)
    return out


_MEASURE_FUNCS = {
    "information_centrality": information_centrality,
    "laplacian_centrality": laplacian_centrality,
    "eigenvector_centrality": eigenvector_centrality,
    "pagerank": pagerank,
    "node_strength": node_strength,
}


def node_measures(c) -> dict:
    return {name: _MEASURE_FUNCS[name](c) for name in MEASURES}


def kl_divergence(samples_p, samples_q, bins: int = 20, smoothing: float = 1e-10) -> float:
    """KL(P || Q) between histograms of two samples on shared bins.

    The bins evenly span the pooled range; ``smoothing`` is added to every
    bin probability before renormalizing so empty bins stay finite.
    """
    p_s = np.asarray(samples_p, dtype=np.float64).ravel()
    q_s = np.asarray(samples_q, dtype=np.float64).ravel()
    if p_s.size == 0 or q_s.size == 0:
        raise InsufficientDataError("KL divergence needs non-empty samples")
    lo = min(p_s.min(), q_s.min())
    hi = max(p_s.max(), q_s.max())
    if not hi > lo:
        return 0.0
    edges = np.linspace(lo, hi, bins + 1)
    p = np.histogram(p_s, edges)[0] / p_s.size + smoothing
    q = np.histogram(q_s, edges)[0] / q_s.size + smoothing
    p /= p.sum()
    q /= q.sum()
    return float(max(0.0, np.sum(p * np.log(p / q))))


def topology_report(cbt: Connectome, test_subjects, bins: int = 20) -> dict:
    """Mean over subjects of KL(subject || template) for each node measure."""
    test_subjects = list(test_subjects)
    if not test_subjects:
        raise InsufficientDataError("topology report needs at least one test subject")
    ref = node_measures(cbt)
    sums = dict.fromkeys(MEASURES, 0.0)
    for subj in test_subjects:
        vals = node_measures(subj)
        for name in MEASURES:
            sums[name] += kl_divergence(vals[name], ref[name], bins=bins)
    return {name: sums[name] / len(test_subjects) for name in MEASURES}
