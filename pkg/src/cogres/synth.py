"""Seeded synthetic stand-ins for BOLD cohorts and sensory feature sequences."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Subject, SubjectManifest, TimeSeries
from .errors import ConfigError, DimensionError
from .io import save_manifest, save_timeseries

MODALITY_KINDS = ("visual-like", "text-like", "audio-like")

N_LATENT = 6
LATENT_AR = 0.8


@dataclass(frozen=True)
class GroupProfile:
    """Generative structure shared by the members of one group.

    Mixing matrices are ``shared + effect * specific`` where ``shared`` comes
    from ``cohort_seed`` and ``specific`` from ``base_seed``; groups with the
    same cohort seed but different base seeds differ by ``effect``.
    """

    base_seed: int
    noise: float = 0.5
    cohort_seed: int = 0
    effect: float = 1.0


def group_mixing(profile: GroupProfile, rois: int, n_latent: int = N_LATENT) -> np.ndarray:
    shared = np.random.default_rng([profile.cohort_seed, 0]).standard_normal((rois, n_latent))
    specific = np.random.default_rng([profile.base_seed, 1]).standard_normal((rois, n_latent))
    return shared + profile.effect * specific


def synth_bold(n_subjects: int, rois: int = 111, timepoints: int = 200, profile: GroupProfile = GroupProfile(0), seed: int = 0) -> list:
    """BOLD-like series: AR(1) latent factors mixed into ``rois`` channels plus white noise.

    Subject ``i`` draws from the stream ``(seed, i)``, so any subset can be
    regenerated independently of the others.
    """
    if rois < 2 or timepoints < 10:
        raise DimensionError(f"need rois >= 2 and timepoints >= 10, got {rois}, {timepoints}")
    if n_subjects < 0 or profile.noise < 0:
        raise ConfigError("n_subjects and noise must be non-negative")
    mixing = group_mixing(profile, rois)
    return [_one_subject(mixing, timepoints, profile.noise, (seed, i)) for i in range(n_subjects)]


def _one_subject(mixing, timepoints, noise, stream) -> TimeSeries:
    rng = np.random.default_rng(list(stream))
    k = mixing.shape[1]
    innov = rng.standard_normal((timepoints, k))
    z = np.empty((timepoints, k))
    z[0] = innov[0]
    scale = np.sqrt(1 - LATENT_AR**2)
    for t in range(1, timepoints):
        z[t] = LATENT_AR * z[t - 1] + scale * innov[t]
    x = z @ mixing.T
    x = x + noise * rng.standard_normal(x.shape)
    return TimeSeries(x)


def synth_cohort(
    out_dir,
    n_subjects: int,
    rois: int = 111,
    timepoints: int = 200,
    groups=("ASD", "TD"),
    seed: int = 0,
    noise: float = 0.5,
    effect: float = 1.0,
) -> SubjectManifest:
    """Write a multi-group cohort (CSV per subject plus ``manifest.json``) to ``out_dir``.

    Subjects are dealt to groups in contiguous blocks, earlier groups taking
    the remainder.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = [n_subjects // len(groups) + (1 if g < n_subjects % len(groups) else 0) for g in range(len(groups))]
    subjects = []
    idx = 0
    for g, (group, count) in enumerate(zip(groups, counts)):
        profile = GroupProfile(base_seed=seed * 1000 + g + 1, noise=noise, cohort_seed=seed, effect=effect)
        mixing = group_mixing(profile, rois)
        for _ in range(count):
            sid = f"sub-{idx + 1:04d}"
            ts = _one_subject(mixing, timepoints, noise, (seed, idx))
            path = out / f"{sid}.csv"
            save_timeseries(ts, path)
            subjects.append(Subject(sid, path, group))
            idx += 1
    manifest = SubjectManifest(subjects=subjects, atlas_dim=rois)
    save_manifest(manifest, out / "manifest.json")
    return manifest


def _normalize(x: np.ndarray) -> np.ndarray:
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    y = 2.0 * (x - lo) / safe - 1.0
    y[:, span == 0] = 0.0
    return np.clip(y, -1.0, 1.0)


def synth_modality(kind: str, timepoints: int, dims: int, seed: int = 0) -> TimeSeries:
    """Feature sequence mimicking one sensory input class, scaled to [-1, 1] per dimension.

    visual-like
        piecewise-constant: a random vector held for 10-20 steps at a time.
    text-like
        reflected random walk; each step depends on the previous one.
    audio-like
        a few sinusoids per dimension with slowly drifting phase, plus a
        little noise.
    """
    if kind not in MODALITY_KINDS:
        raise ConfigError(f"unknown modality kind {kind!r}; choose from {MODALITY_KINDS}")
    if timepoints < 50 or dims < 1:
        raise DimensionError(f"need timepoints >= 50 and dims >= 1, got {timepoints}, {dims}")
    rng = np.random.default_rng([seed, MODALITY_KINDS.index(kind)])
    if kind == "visual-like":
        x = np.empty((timepoints, dims))
        t = 0
        while t < timepoints:
            hold = int(rng.integers(10, 21))
            x[t : t + hold] = rng.uniform(-1, 1, dims)
            t += hold
    elif kind == "text-like":
        steps = rng.normal(0.0, 0.25, (timepoints, dims))
        x = np.empty((timepoints, dims))
        cur = rng.uniform(-1, 1, dims)
        for t in range(timepoints):
            cur = cur + steps[t]
            # reflect into [-1, 1]
            cur = np.where(cur > 1, 2 - cur, cur)
            cur = np.where(cur < -1, -2 - cur, cur)
            x[t] = cur
    else:
        n_tones = 3
        periods = rng.uniform(4.0, 30.0, (n_tones, dims))
        amps = rng.uniform(0.3, 1.0, (n_tones, dims))
        phase0 = rng.uniform(0, 2 * np.pi, (n_tones, dims))
        drift = np.cumsum(rng.normal(0.0, 0.02, (timepoints, n_tones, dims)), axis=0)
        t = np.arange(timepoints)[:, None, None]
        x = (amps * np.sin(2 * np.pi * t / periods + phase0 + drift)).sum(axis=1)
        x = x + 0.02 * rng.standard_normal((timepoints, dims))
    return TimeSeries(_normalize(x))
