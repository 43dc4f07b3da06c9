"""Cognitive reservoir built on a connectome, and its delayed-recall memory capacity."""

from __future__ import annotations

import warnings
from typing import Iterable, Sequence, Tuple

import numpy as np

from .core import CognitiveConfig, Connectome, MCReport, ReservoirWeights, TimeSeries
from .errors import DimensionError, InsufficientDataError, NumericalError
from .reservoir import StateSequence, run_reservoir, scale_to_radius, uniform_weights


def build_cognitive_reservoir(cbt: Connectome, cfg: CognitiveConfig, input_dim: int) -> ReservoirWeights:
    """Use the template as the recurrent matrix, rescaled to ``cfg.spectral_target``.

    The input matrix is drawn from U[-1, 1] with ``cfg.seed`` and scaled by
    ``cfg.input_scaling``; W_res depends only on the template.
    """
    if input_dim < 1:
        raise DimensionError(f"input_dim must be positive, got {input_dim}")
    w_res, achieved = scale_to_radius(cbt.weights, cfg.spectral_target)
    rng = np.random.default_rng(cfg.seed)
    w_in = uniform_weights(rng, (cbt.size, input_dim)) * cfg.input_scaling
    return ReservoirWeights(w_in, w_res, cfg.spectral_target, achieved)


def make_delay_target(series: TimeSeries, tau: int) -> TimeSeries:
    """Shift the series ``tau`` steps into the future, zero-filling the start.

    [3, 4, 5, 6] with tau=1 becomes [0, 3, 4, 5].
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    x = series.data if isinstance(series, TimeSeries) else np.asarray(series, dtype=np.float64)
    out = np.zeros_like(x)
    if tau < x.shape[0]:
        out[tau:] = x[: x.shape[0] - tau]
    return TimeSeries(out)


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, StateSequence):
        return a.states
    if isinstance(a, TimeSeries):
        return a.data
    return np.asarray(a, dtype=np.float64)


def train_readout(states, target, ridge: float = 1e-8, washout: int = 0) -> np.ndarray:
    """Ridge regression readout W (D_out x M) minimizing
    ||H W^T - Y||^2 + ridge * ||W||^2 over the post-washout rows.

    Solved as an augmented least-squares problem ``[H; sqrt(ridge) I]``
    rather than through the normal equations, which squares the
    condition number.
    """
    h = _as_matrix(states)
    y = _as_matrix(target)
    if h.shape[0] != y.shape[0]:
        raise DimensionError(f"states have {h.shape[0]} rows but target has {y.shape[0]}")
    if not 0 <= washout < h.shape[0]:
        raise InsufficientDataError(f"washout {washout} leaves no training rows out of {h.shape[0]}")
    h = h[washout:]
    y = y[washout:]
    m = h.shape[1]
    if h.shape[0] <= m:
        warnings.warn(
            f"only {h.shape[0]} training rows for {m} reservoir units; readout is underdetermined "
            "without regularization",
            RuntimeWarning,
            stacklevel=2,
        )
    if ridge > 0:
        a = np.vstack([h, np.sqrt(ridge) * np.eye(m)])
        b = np.vstack([y, np.zeros((m, y.shape[1]))])
    else:
        a, b = h, y
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if ridge == 0 and rank < m:
        raise NumericalError(
            f"readout system is singular (rank {rank} < {m}); use a positive ridge parameter"
        )
    return sol.T


def predict_readout(w_out, states) -> TimeSeries:
    """Apply the linear readout to every state: y(t) = W_out h(t)."""
    w = np.asarray(w_out, dtype=np.float64)
    h = _as_matrix(states)
    if w.ndim != 2 or w.shape[1] != h.shape[1]:
        raise DimensionError(f"readout of shape {w.shape} cannot map states with {h.shape[1]} units")
    return TimeSeries(h @ w.T)


def squared_correlation(truth: np.ndarray, pred: np.ndarray) -> float:
    """Mean over output dimensions of the squared Pearson correlation.

    Dimensions where either sequence is constant contribute 0.
    """
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64).T).T
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64).T).T
    scores = np.zeros(truth.shape[1])
    for d in range(truth.shape[1]):
        a, b = truth[:, d], pred[:, d]
        if np.ptp(a) == 0 or np.ptp(b) == 0:
            continue
        a = a - a.mean()
        b = b - b.mean()
        denom = np.sqrt(np.dot(a, a) * np.dot(b, b))
        if denom == 0:
            continue
        scores[d] = min(1.0, (np.dot(a, b) / denom) ** 2)
    return float(scores.mean())


def score_memory(
    weights: ReservoirWeights, modality: TimeSeries, cfg: CognitiveConfig, name: str = "input"
) -> MCReport:
    """Memory capacity of an already-built reservoir.

    The sequence is split in time (first ``train_fraction`` for training).
    States are computed once over the whole sequence; for each lag a separate
    ridge readout is fit on the post-washout training rows and scored on the
    test rows. Delayed targets take their history from the whole sequence, so
    only the first ``tau`` timepoints of the sequence are zero-filled.
    """
    x = modality.data
    t_total, d = x.shape
    n_train = int(cfg.train_fraction * t_total)
    n_test = t_total - n_train
    if n_test <= cfg.tau_max + 2:
        raise InsufficientDataError(
            f"test split has {n_test} timepoints; need more than tau_max + 2 = {cfg.tau_max + 2}"
        )
    washout = cfg.resolved_washout(n_train)
    if washout >= n_train:
        raise InsufficientDataError(f"washout {washout} consumes all {n_train} training rows")
    rcfg = cfg.reservoir_config(weights.size)
    states = run_reservoir(weights, modality, rcfg).states

    lags = range(1, cfg.tau_max + 1)
    targets = np.hstack([make_delay_target(modality, tau).data for tau in lags])
    # one solve for all lags; least-squares columns are independent
    w_all = train_readout(states[:n_train], targets[:n_train], cfg.ridge, washout)
    pred_all = states[n_train:] @ w_all.T
    truth_all = targets[n_train:]
    per_lag = {}
    for i, tau in enumerate(lags):
        cols = slice(i * d, (i + 1) * d)
        per_lag[tau] = squared_correlation(truth_all[:, cols], pred_all[:, cols])
    metadata = {
        "config": cfg.to_dict(),
        "washout": washout,
        "n_train": n_train,
        "n_test": n_test,
        "input_dim": d,
        "achieved_radius": weights.achieved_radius,
    }
    return MCReport(
        modality=name,
        per_lag_rho2=per_lag,
        mc=float(sum(per_lag[tau] for tau in lags)),
        tau_max=cfg.tau_max,
        metadata=metadata,
    )


def readout_per_lag(states, modality: TimeSeries, taus: Iterable[int], ridge: float, washout: int) -> dict:
    """Independent readout matrices, one per lag."""
    return {
        tau: train_readout(states, make_delay_target(modality, tau), ridge, washout) for tau in taus
    }


def memory_capacity(cbt: Connectome, modality: TimeSeries, cfg: CognitiveConfig, name: str = "input") -> MCReport:
    """Sum over lags 1..tau_max of the squared correlation between the delayed
    input and its reconstruction by a template-based reservoir."""
    weights = build_cognitive_reservoir(cbt, cfg, modality.n_channels)
    return score_memory(weights, modality, cfg, name=name)


def mc_suite(
    cbt: Connectome, modalities: Sequence[Tuple[str, TimeSeries]], cfg: CognitiveConfig
) -> list:
    """Memory capacity for each named modality, in the given order."""
    return [memory_capacity(cbt, series, cfg, name=name) for name, series in modalities]
