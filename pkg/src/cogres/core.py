"""Domain types shared by the whole pipeline.

All arrays held by these types are copied on construction and marked
read-only, so instances can be passed between threads freely.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .errors import ConfigError, DataError, DimensionError, ValidationError

SYMMETRY_TOL = 1e-12
RANGE_TOL = 1e-12

ACTIVATIONS = ("tanh", "linear")
UPDATE_FORMS = ("leak_outside", "leak_inside")


def _frozen_array(a, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A T x D sequence of real vectors, one row per timepoint."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.data, 2, "TimeSeries data")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"TimeSeries needs T >= 1 and D >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            t, d = np.argwhere(~np.isfinite(arr))[0]
            raise DataError(f"non-finite value at timepoint {t}, channel {d}")
        object.__setattr__(self, "data", arr)

    @property
    def n_timepoints(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_roi_major(cls, a) -> "TimeSeries":
        """Build from an R x T (region-major) array."""
        return cls(np.asarray(a, dtype=np.float64).T)


@dataclass(frozen=True, eq=False)
class Connectome:
    """Symmetric R x R matrix of pairwise couplings, optionally tagged with a group."""

    weights: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        w = _frozen_array(self.weights, 2, "Connectome weights")
        validate_connectome_matrix(w)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def upper_triangle(self) -> np.ndarray:
        """Strict upper triangle, row-major, as a flat vector."""
        return self.weights[np.triu_indices(self.size, k=1)]


def validate_connectome_matrix(w: np.ndarray) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionError(f"connectome must be square, got shape {w.shape}")
    if w.shape[0] < 2:
        raise DimensionError("connectome needs at least 2 regions")
    if not np.all(np.isfinite(w)):
        raise DataError("connectome contains non-finite values")
    asym = np.abs(w - w.T)
    if asym.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValidationError(
            f"connectome is not symmetric: |w[{i},{j}] - w[{j},{i}]| = {asym[i, j]:.3g}"
        )
    if np.abs(w).max() > 1 + RANGE_TOL:
        i, j = np.unravel_index(np.argmax(np.abs(w)), w.shape)
        raise ValidationError(f"connectome entry w[{i},{j}] = {w[i, j]!r} outside [-1, 1]")


@dataclass(frozen=True, eq=False)
class ReservoirWeights:
    """Input and recurrent matrices of a reservoir, plus scaling metadata.

    ``w_in`` is M x D and ``w_res`` is M x M. ``achieved_radius`` is the
    spectral radius of ``w_res`` as estimated after rescaling.
    """

    w_in: np.ndarray
    w_res: np.ndarray
    spectral_target: float
    achieved_radius: float

    def __post_init__(self):
        w_in = _frozen_array(self.w_in, 2, "w_in")
        w_res = _frozen_array(self.w_res, 2, "w_res")
        if w_res.shape[0] != w_res.shape[1]:
            raise DimensionError(f"w_res must be square, got {w_res.shape}")
        if w_in.shape[0] != w_res.shape[0]:
            raise DimensionError(
                f"w_in has {w_in.shape[0]} rows but reservoir has {w_res.shape[0]} neurons"
            )
        if not (np.all(np.isfinite(w_in)) and np.all(np.isfinite(w_res))):
            raise DataError("reservoir weights contain non-finite values")
        object.__setattr__(self, "w_in", w_in)
        object.__setattr__(self, "w_res", w_res)

    @property
    def size(self) -> int:
        return self.w_res.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_in.shape[1]


def _check_choice(name, value, choices):
    if value not in choices:
        raise ConfigError(f"{name} must be one of {choices}, got {value!r}")


class _ConfigMixin:
    @classmethod
    def from_dict(cls, d: Mapping[str, Any]):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
        try:
            return cls(**dict(d))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ReservoirConfig(_ConfigMixin):
    """Hyperparameters of the phase-1 (BOLD encoding) reservoir.

    Defaults are the published settings: 111 neurons, leak 0.5,
    spectral radius 1.45, weights uniform on [-1, 1].
    """

    size: int = 111
    leak: float = 0.5
    spectral_target: float = 1.45
    input_scaling: float = 1.0
    activation: str = "tanh"
    update_form: str = "leak_outside"
    seed: int = 0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ConfigError(f"size must be a positive integer, got {self.size!r}")
        if not 0.0 <= self.leak <= 1.0:
            raise ConfigError(f"leak must lie in [0, 1], got {self.leak!r}")
        if not self.spectral_target > 0:
            raise ConfigError(f"spectral_target must be positive, got {self.spectral_target!r}")
        if not self.input_scaling > 0:
            raise ConfigError(f"input_scaling must be positive, got {self.input_scaling!r}")
        _check_choice("activation", self.activation, ACTIVATIONS)
        _check_choice("update_form", self.update_form, UPDATE_FORMS)
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")


@dataclass(frozen=True)
class CognitiveConfig(_ConfigMixin):
    """Hyperparameters of the phase-2 cognitive reservoir and memory task.

    ``washout=None`` means floor(0.1 * T_train).
    """

    spectral_target: float = 0.99
    input_scaling: float = 1.0
    leak: float = 1.0
    tau_max: int = 20
    train_fraction: float = 0.8
    washout: Optional[int] = None
    ridge: float = 1e-8
    update_form: str = "leak_inside"
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        if not self.spectral_target > 0:
            raise ConfigError(f"spectral_target must be positive, got {self.spectral_target!r}")
        if not self.input_scaling > 0:
            raise ConfigError(f"input_scaling must be positive, got {self.input_scaling!r}")
        if not 0.0 <= self.leak <= 1.0:
            raise ConfigError(f"leak must lie in [0, 1], got {self.leak!r}")
        if int(self.tau_max) != self.tau_max or self.tau_max < 1:
            raise ConfigError(f"tau_max must be >= 1, got {self.tau_max!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction!r}")
        if self.washout is not None and (int(self.washout) != self.washout or self.washout < 0):
            raise ConfigError(f"washout must be a non-negative integer, got {self.washout!r}")
        if not self.ridge >= 0:
            raise ConfigError(f"ridge must be non-negative, got {self.ridge!r}")
        _check_choice("activation", self.activation, ACTIVATIONS)
        _check_choice("update_form", self.update_form, UPDATE_FORMS)
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")

    def resolved_washout(self, n_train: int) -> int:
        return int(0.1 * n_train) if self.washout is None else int(self.washout)

    def reservoir_config(self, size: int) -> ReservoirConfig:
        """The equivalent ReservoirConfig for a reservoir of ``size`` neurons."""
        return ReservoirConfig(
            size=size,
            leak=self.leak,
            spectral_target=self.spectral_target,
            input_scaling=self.input_scaling,
            activation=self.activation,
            update_form=self.update_form,
            seed=self.seed,
        )


@dataclass(frozen=True)
class Subject:
    id: str
    path: Path
    group: str


@dataclass(frozen=True, eq=False)
class SubjectManifest:
    """Subjects of a cohort and the atlas dimension their CSVs must match."""

    subjects: tuple
    atlas_dim: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))
        if int(self.atlas_dim) != self.atlas_dim or self.atlas_dim < 1:
            raise ValidationError(f"atlas_dim must be a positive integer, got {self.atlas_dim!r}")
        seen = set()
        for s in self.subjects:
            if s.id in seen:
                raise ValidationError(f"duplicate subject id {s.id!r}")
            seen.add(s.id)

    @property
    def ids(self) -> list:
        return [s.id for s in self.subjects]

    @property
    def groups(self) -> list:
        """Distinct group names, sorted."""
        return sorted({s.group for s in self.subjects})

    def by_group(self, group: str) -> list:
        return [s for s in self.subjects if s.group == group]

    def subject(self, sid: str) -> Subject:
        for s in self.subjects:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def timeseries(self, sid: str) -> TimeSeries:
        """Load (and memoize) the time series of subject ``sid``."""
        ts = self._cache.get(sid)
        if ts is None:
            from .io import load_timeseries

            ts = load_timeseries(self.subject(sid).path, expected_channels=self.atlas_dim)
            self._cache[sid] = ts
        return ts


@dataclass(frozen=True)
class MCReport:
    """Per-lag squared correlations and their sum for one input modality."""

    modality: str
    per_lag_rho2: dict
    mc: float
    tau_max: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "modality": self.modality,
            "tau_max": self.tau_max,
            "mc": self.mc,
            "per_lag_rho2": {str(k): v for k, v in sorted(self.per_lag_rho2.items())},
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MCReport":
        return cls(
            modality=d["modality"],
            per_lag_rho2={int(k): float(v) for k, v in d["per_lag_rho2"].items()},
            mc=float(d["mc"]),
            tau_max=int(d["tau_max"]),
            metadata=dict(d.get("metadata", {})),
        )


@dataclass(frozen=True)
class Classification:
    accuracy: float
    sensitivity: float
    specificity: float
    f1: float
    tp: int
    tn: int
    fp: int
    fn: int
    positive: Optional[str] = None
    negative: Optional[str] = None


@dataclass(frozen=True)
class EvalReport:
    """Everything measured on one cross-validation fold."""

    fold_index: int
    centeredness: float
    kl_by_measure: dict
    classification: Classification
    centeredness_by_group: dict = field(default_factory=dict)
    kl_by_group: dict = field(default_factory=dict)
    mc_by_group: dict = field(default_factory=dict)
    train_ids: dict = field(default_factory=dict)
    test_ids: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["mc_by_group"] = {
            g: [r.to_dict() for r in reports] for g, reports in self.mc_by_group.items()
        }
        return d
