"""Functional connectomes from reservoir-encoded BOLD signals, and their group template."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Connectome, ReservoirConfig, ReservoirWeights, SubjectManifest, TimeSeries
from .errors import ConfigError, DimensionError, InsufficientDataError, ValidationError
from .reservoir import init_reservoir, run_reservoir

log = logging.getLogger(__name__)


def learn_signals(w: ReservoirWeights, bold: TimeSeries, cfg: ReservoirConfig) -> TimeSeries:
    """Encode a T x R BOLD series as the T x R reservoir state sequence.

    The learned signal at time t is the state h(t) itself, with no washout,
    so the reservoir must have exactly one neuron per region.
    """
    if cfg.size != bold.n_channels or w.size != bold.n_channels:
        raise ConfigError(
            f"reservoir size ({w.size}) must equal the number of regions ({bold.n_channels})"
        )
    return run_reservoir(w, bold, cfg).as_timeseries()


def pearson_connectome(signals: TimeSeries, label: Optional[str] = None) -> Connectome:
    """Pairwise Pearson correlation between channels over time.

    Channels with zero variance get correlation 0 against every other
    channel and 1 on the diagonal.
    """
    x = signals.data if isinstance(signals, TimeSeries) else np.asarray(signals, dtype=np.float64)
    t, r = x.shape
    if t < 2:
        raise InsufficientDataError(f"need at least 2 timepoints for correlation, got {t}")
    constant = np.ptp(x, axis=0) == 0
    z = x - x.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", z, z))
    norms[constant] = 1.0
    z = z / norms
    c = z.T @ z
    c[constant, :] = 0.0
    c[:, constant] = 0.0
    if constant.any():
        log.info("%d zero-variance channel(s) set to zero correlation", int(constant.sum()))
    c = np.clip(0.5 * (c + c.T), -1.0, 1.0)
    np.fill_diagonal(c, 1.0)
    return Connectome(c, label=label)


def _exact_mean(values: Sequence[float]) -> float:
    """Mean of ``values`` rounded from the exact sum, independent of input order.

    ``fsum(values) / n`` alone can miss by an ulp (so the mean of n copies of
    x need not be x); the neighbours of that first guess are compared by
    their exact residual n*c - sum(values).
    """
    n = len(values)
    guess = math.fsum(values) / n
    if not math.isfinite(guess):
        return guess
    best, best_res = guess, None
    for c in (math.nextafter(guess, -math.inf), guess, math.nextafter(guess, math.inf)):
        res = abs(math.fsum([*values, *([-c] * n)]))
        if best_res is None or res < best_res:
            best, best_res = c, res
    return best


def aggregate_cbt(connectomes: Iterable[Connectome], label: Optional[str] = None) -> Connectome:
    """Elementwise mean of subject connectomes.

    Every entry is rounded from the exact sum, so the result does not depend
    on the order of the inputs and the mean of identical inputs is that input.
    """
    mats = [c.weights for c in connectomes]
    if not mats:
        raise ValidationError("cannot aggregate an empty list of connectomes")
    r = mats[0].shape[0]
    if any(m.shape != (r, r) for m in mats):
        raise DimensionError("connectomes have mixed dimensions")
    if len(mats) == 1:
        return Connectome(mats[0], label=label)
    iu = np.triu_indices(r, k=1)
    columns = np.stack([m[iu] for m in mats], axis=1).tolist()
    upper = np.array([_exact_mean(col) for col in columns])
    out = np.eye(r)
    out[iu] = upper
    out[(iu[1], iu[0])] = upper
    return Connectome(out, label=label)


def subject_connectome(
    w: ReservoirWeights, bold: TimeSeries, cfg: ReservoirConfig, label: Optional[str] = None
) -> Connectome:
    return pearson_connectome(learn_signals(w, bold, cfg), label=label)


def subject_connectomes(
    manifest: SubjectManifest,
    ids: Sequence[str],
    cfg: ReservoirConfig,
    weights: Optional[ReservoirWeights] = None,
    threads: int = 1,
) -> dict:
    """Connectomes of the given subjects, all encoded by one shared reservoir."""
    if weights is None:
        weights = init_reservoir(cfg, manifest.atlas_dim)

    def one(sid):
        s = manifest.subject(sid)
        return subject_connectome(weights, manifest.timeseries(sid), cfg, label=s.group)

    ids = list(ids)
    if threads > 1 and len(ids) > 1:
        # load serially: the manifest cache is not meant for concurrent writers
        for sid in ids:
            manifest.timeseries(sid)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, ids))
    else:
        results = [one(sid) for sid in ids]
    return dict(zip(ids, results))


def build_group_cbt(
    manifest: SubjectManifest,
    group: str,
    cfg: ReservoirConfig,
    ids: Optional[Iterable[str]] = None,
    threads: int = 1,
) -> Connectome:
    """Template of ``group``: every member is encoded by the same seeded reservoir,
    correlated, and the connectomes are averaged.

    ``ids`` restricts the group to a subset (e.g. a training fold).
    """
    members = [s.id for s in manifest.by_group(group)]
    if ids is not None:
        allowed = set(ids)
        members = [sid for sid in members if sid in allowed]
    if not members:
        raise ValidationError(f"no subjects in group {group!r}")
    conns = subject_connectomes(manifest, sorted(members), cfg, threads=threads)
    return aggregate_cbt(conns.values(), label=group)
