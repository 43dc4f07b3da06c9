"""Seeded random reservoirs and their state updates.

Two update rules are supported:

``leak_outside``
    h(t) = (1 - a) h(t-1) + a * f(W_in x(t) + W_res h(t-1))
``leak_inside``
    h(t) = f(a * W_in x(t) + (1 - a) * W_res h(t-1))

where ``f`` is tanh or the identity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ReservoirConfig, ReservoirWeights, TimeSeries
from .errors import (
    DegenerateReservoirError,
    DimensionError,
    DivergenceError,
    NumericalError,
)

log = logging.getLogger(__name__)

RADIUS_TOL = 1e-10
RADIUS_MAX_ITER = 10_000
DIVERGENCE_LIMIT = 1e100
_BLOCK = 6
_STABLE_STEPS = 5


@dataclass(frozen=True, eq=False)
class StateSequence:
    """Row t holds h(t) after consuming input t (1-indexed in the maths, 0-indexed here)."""

    states: np.ndarray
    initial_state: np.ndarray

    def __post_init__(self):
        for name in ("states", "initial_state"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_timepoints(self) -> int:
        return self.states.shape[0]

    def as_timeseries(self) -> TimeSeries:
        return TimeSeries(self.states)


def uniform_weights(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. draws from U[-1, 1]."""
    return rng.uniform(-1.0, 1.0, size=shape)


def estimate_spectral_radius(
    m, tol: float = RADIUS_TOL, max_iter: int = RADIUS_MAX_ITER, seed: int = 0
) -> float:
    """Largest eigenvalue magnitude of a square matrix.

    Block power iteration: a small orthonormal block is repeatedly multiplied
    by ``m`` and re-orthonormalized, and the radius is read off the Ritz values
    of the projected block. Using a block rather than one vector copes with
    complex-conjugate or near-degenerate dominant eigenvalues, which are the
    norm for random non-symmetric matrices. Converged when the estimate's
    relative change stays below ``tol`` for several consecutive steps; the
    iteration is restarted from a fresh random block (twice) if it stalls.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix contains non-finite entries")
    n = a.shape[0]
    if n == 0 or not np.any(a):
        return 0.0
    p = min(n, _BLOCK)
    rng = np.random.default_rng(seed)
    estimate = None
    for attempt in range(3):
        q, _ = np.linalg.qr(rng.standard_normal((n, p)))
        prev = None
        stable = 0
        for _ in range(max_iter):
            z = a @ q
            ritz = np.linalg.eigvals(q.T @ z)
            estimate = float(np.max(np.abs(ritz)))
            if not np.any(z):
                return 0.0
            q, _ = np.linalg.qr(z)
            if prev is not None:
                scale = max(estimate, prev)
                if scale == 0.0 or abs(estimate - prev) <= tol * scale:
                    stable += 1
                    if stable >= _STABLE_STEPS:
                        return estimate
                else:
                    stable = 0
            prev = estimate
        log.debug("spectral radius iteration stalled (attempt %d), restarting", attempt + 1)
    raise NumericalError(
        f"spectral radius did not converge after {max_iter} iterations and 2 restarts "
        f"(last estimate {estimate!r})",
        last_estimate=estimate,
    )


def scale_to_radius(w: np.ndarray, target: float, seed: int = 0):
    """Rescale ``w`` to spectral radius ``target``.

    Returns the scaled matrix and its re-estimated radius.
    """
    raw = estimate_spectral_radius(w, seed=seed)
    if raw == 0.0:
        raise DegenerateReservoirError("recurrent matrix has zero spectral radius; cannot rescale")
    scaled = w * (target / raw)
    return scaled, estimate_spectral_radius(scaled, seed=seed)


def init_reservoir(cfg: ReservoirConfig, input_dim: int) -> ReservoirWeights:
    """Draw W_res (M x M) then W_in (M x D) from U[-1, 1] with ``cfg.seed``.

    W_in is multiplied by the input scaling and W_res is rescaled to the
    configured spectral radius.
    """
    if input_dim < 1:
        raise DimensionError(f"input_dim must be positive, got {input_dim}")
    rng = np.random.default_rng(cfg.seed)
    w_res = uniform_weights(rng, (cfg.size, cfg.size))
    w_in = uniform_weights(rng, (cfg.size, input_dim)) * cfg.input_scaling
    w_res, achieved = scale_to_radius(w_res, cfg.spectral_target)
    return ReservoirWeights(w_in, w_res, cfg.spectral_target, achieved)


def _activation(name: str):
    if name == "tanh":
        return np.tanh
    return lambda x: x


def run_reservoir(
    w: ReservoirWeights,
    inputs: TimeSeries,
    cfg: ReservoirConfig,
    h0: Optional[np.ndarray] = None,
) -> StateSequence:
    """Drive the reservoir with ``inputs`` one timepoint at a time, starting at ``h0`` (default 0)."""
    x = inputs.data if isinstance(inputs, TimeSeries) else np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != w.input_dim:
        raise DimensionError(
            f"input has shape {x.shape}, reservoir expects {w.input_dim} channels"
        )
    m = w.size
    h = np.zeros(m) if h0 is None else np.array(h0, dtype=np.float64)
    if h.shape != (m,):
        raise DimensionError(f"initial state must have {m} entries, got shape {h.shape}")
    h_init = h.copy()
    f = _activation(cfg.activation)
    alpha = cfg.leak
    w_res = w.w_res
    drive = x @ w.w_in.T
    out = np.empty((x.shape[0], m))
    if cfg.update_form == "leak_outside":
        for t in range(x.shape[0]):
            h = (1.0 - alpha) * h + alpha * f(drive[t] + w_res @ h)
            out[t] = h
            if cfg.activation != "tanh":
                _guard(h, t)
    else:
        drive = alpha * drive
        w_res = (1.0 - alpha) * w_res
        for t in range(x.shape[0]):
            h = f(drive[t] + w_res @ h)
            out[t] = h
            if cfg.activation != "tanh":
                _guard(h, t)
    return StateSequence(out, h_init)


def _guard(h: np.ndarray, t: int) -> None:
    if not np.all(np.isfinite(h)) or np.max(np.abs(h)) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"reservoir state diverged at timestep {t + 1}", timestep=t + 1)


def check_echo_state(
    w: ReservoirWeights,
    cfg: ReservoirConfig,
    probe_len: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
):
    """Empirical echo-state test.

    Feeds one random input sequence from two random initial states and
    returns ``(contracted, final_gap)`` where ``final_gap`` is the Euclidean
    distance between the two final states. A diverging run counts as not
    contracting, with an infinite gap.
    """
    if probe_len < 10:
        raise ValueError(f"probe_len must be >= 10, got {probe_len}")
    rng = np.random.default_rng(seed)
    x = uniform_weights(rng, (probe_len, w.input_dim))
    h_a = uniform_weights(rng, w.size)
    h_b = uniform_weights(rng, w.size)
    try:
        s_a = run_reservoir(w, TimeSeries(x), cfg, h_a).states[-1]
        s_b = run_reservoir(w, TimeSeries(x), cfg, h_b).states[-1]
    except DivergenceError:
        return False, float("inf")
    gap = float(np.linalg.norm(s_a - s_b))
    if not np.isfinite(gap):
        return False, float("inf")
    return gap < tol, gap
