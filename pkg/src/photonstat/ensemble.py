"""Emitter geometry: positions, structure factors, seeded cloud generation.

Positions are stored in units of the transition wavelength; observation wave
vectors in units of 2 pi / lambda.  A phase is then exp(2 pi i k . R) with a
dimensionless dot product, which keeps every downstream formula unit-free.

Cloud generation uses a counter-based RNG (Philox) keyed by
(seed, realization index), so realization r of a sweep is reproducible
independently of evaluation order or worker count.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DEFAULT_CUBE_SIDE = 100.0  # wavelengths; large enough for fully developed speckle
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Ensemble:
    """Immutable emitter positions plus generation provenance."""

    positions: np.ndarray  # (N, 3), wavelength units
    provenance: dict = field(default_factory=lambda: {"kind": "explicit"})

    def __post_init__(self):
        pos = np.ascontiguousarray(np.atleast_2d(np.asarray(self.positions, dtype=float)))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must have shape (N, 3)")
        if pos.shape[0] < 1:
            raise ValueError("an ensemble needs at least one emitter")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def to_config(self) -> dict:
        if self.provenance.get("kind") == "random":
            return {
                "n": self.n,
                "seed": self.provenance["seed"],
                "distribution": self.provenance["distribution"],
            }
        return {"positions": self.positions.tolist()}


def structure_factor(ensemble: Ensemble, k) -> complex:
    """S(k) = sum_mu exp(2 pi i k . R_mu); S(0) = N exactly, |S(k)| <= N."""
    k = np.asarray(k, dtype=float)
    if not np.any(k):
        return complex(ensemble.n)
    phase = _TWO_PI * (ensemble.positions @ k)
    return complex(np.sum(np.exp(1j * phase)))


def phase_matrix(ensemble: Ensemble, wave_vectors) -> np.ndarray:
    """exp(2 pi i k_j . R_mu) as an (N, n_slots) complex array."""
    kk = np.atleast_2d(np.asarray(wave_vectors, dtype=float))
    return np.exp(1j * _TWO_PI * (ensemble.positions @ kk.T))


def _parse_distribution(distribution) -> dict:
    if isinstance(distribution, str):
        if distribution == "uniform-cube":
            return {"kind": "uniform-cube", "side": DEFAULT_CUBE_SIDE}
        if distribution == "gaussian":
            return {"kind": "gaussian", "sigma": DEFAULT_CUBE_SIDE / 2.0}
        raise ValueError(f"unknown distribution {distribution!r}")
    dist = dict(distribution)
    kind = dist.get("kind")
    if kind == "uniform-cube":
        side = float(dist.get("side", DEFAULT_CUBE_SIDE))
        if side <= 0.0:
            raise ValueError("cube side must be positive")
        return {"kind": kind, "side": side}
    if kind == "gaussian":
        sigma = float(dist.get("sigma", DEFAULT_CUBE_SIDE / 2.0))
        if sigma <= 0.0:
            raise ValueError("gaussian sigma must be positive")
        return {"kind": kind, "sigma": sigma}
    raise ValueError(f"unknown distribution kind {kind!r}")


def _rng_for(seed: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def random_cloud(
    n: int,
    seed: int,
    distribution="uniform-cube",
    realization: int = 0,
) -> Ensemble:
    """Seeded random cloud; deterministic for fixed (seed, realization).

    The default geometry is a uniform cube of side 100 wavelengths.  Sizes
    comparable to the wavelength leave the speckle regime, which is worth a
    warning but not a rejection.
    """
    if n < 1:
        raise ValueError("atom count must be positive")
    dist = _parse_distribution(distribution)
    extent = dist.get("side", dist.get("sigma"))
    if extent < 10.0:
        warnings.warn(
            f"cloud extent {extent} wavelengths is small; off-axis structure-factor "
            "phases may not be speckle-like",
            stacklevel=2,
        )
    rng = _rng_for(seed, realization)
    if dist["kind"] == "uniform-cube":
        pos = rng.uniform(-0.5 * dist["side"], 0.5 * dist["side"], size=(n, 3))
    else:
        pos = rng.normal(0.0, dist["sigma"], size=(n, 3))
    return Ensemble(
        positions=pos,
        provenance={
            "kind": "random",
            "seed": seed,
            "realization": realization,
            "distribution": dist,
        },
    )


def cloud_factory(n: int, seed: int, distribution="uniform-cube") -> Callable[[int], Ensemble]:
    """Realization index -> deterministic cloud, safe under parallel maps."""

    def make(realization: int) -> Ensemble:
        return random_cloud(n, seed, distribution, realization=realization)

    return make


def speckle_moments(make_cloud: Callable[[int], Ensemble], k, realizations: int) -> dict:
    """Sample means (with standard errors) of the speckle moments used by the
    off-axis expansions: |S(k)|^2, |S(k)|^4, |S(2k)|^2 and S(2k) S(-k)^2.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    k = np.asarray(k, dtype=float)
    s2 = np.empty(realizations)
    s4 = np.empty(realizations)
    s2k = np.empty(realizations)
    cross = np.empty(realizations, dtype=complex)
    for r in range(realizations):
        ens = make_cloud(r)
        s_k = structure_factor(ens, k)
        s_2k = structure_factor(ens, 2.0 * k)
        a2 = abs(s_k) ** 2
        s2[r] = a2
        s4[r] = a2 * a2
        s2k[r] = abs(s_2k) ** 2
        cross[r] = s_2k * s_k.conjugate() ** 2

    def _mean_se(x):
        mean = x.mean()
        if realizations == 1:
            return mean, 0.0
        se = x.std(ddof=1) / math.sqrt(realizations)
        return mean, se

    out = {}
    out["abs_S_sq"], out["abs_S_sq_se"] = _mean_se(s2)
    out["abs_S_4th"], out["abs_S_4th_se"] = _mean_se(s4)
    out["abs_S2k_sq"], out["abs_S2k_sq_se"] = _mean_se(s2k)
    mean = cross.mean()
    if realizations == 1:
        se = 0.0
    else:
        se = math.sqrt(
            cross.real.std(ddof=1) ** 2 + cross.imag.std(ddof=1) ** 2
        ) / math.sqrt(realizations)
    out["S2k_Smk_sq"], out["S2k_Smk_sq_se"] = mean, se
    out["realizations"] = realizations
    return out


@dataclass(frozen=True)
class DirectionSet:
    """Ordered observation wave vectors for one correlator evaluation.

    The first ``n_minus`` rows feed negative-frequency (E-) slots, the rest
    positive-frequency (E+) slots; vectors are in units of 2 pi / lambda.
    """

    vectors: np.ndarray  # (n_minus + n_plus, 3)
    n_minus: int

    def __post_init__(self):
        vecs = np.ascontiguousarray(np.atleast_2d(np.asarray(self.vectors, dtype=float)))
        if vecs.ndim != 2 or vecs.shape[1] != 3:
            raise ValueError("direction vectors must have shape (n_slots, 3)")
        if not 0 <= self.n_minus <= vecs.shape[0]:
            raise ValueError("minus-slot count outside the vector list")
        vecs.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)

    @property
    def n_plus(self) -> int:
        return self.vectors.shape[0] - self.n_minus

    def minus(self) -> np.ndarray:
        return self.vectors[: self.n_minus]

    def plus(self) -> np.ndarray:
        return self.vectors[self.n_minus :]

    @classmethod
    def forward(cls, n_minus: int, n_plus: int) -> "DirectionSet":
        return cls(vectors=np.zeros((n_minus + n_plus, 3)), n_minus=n_minus)

    @classmethod
    def autocorrelation(cls, k, n_minus: int, n_plus: int) -> "DirectionSet":
        return cls(
            vectors=np.tile(np.asarray(k, dtype=float), (n_minus + n_plus, 1)),
            n_minus=n_minus,
        )


def forward_directions(n_slots: int) -> np.ndarray:
    """All observation vectors along the drive axis: k = 0 after absorbing k_L."""
    return np.zeros((n_slots, 3))


def off_axis_direction(angle: float = 0.0) -> np.ndarray:
    """Unit observation vector orthogonal to the nominal drive axis z.

    Magnitude 1 in units of 2 pi / lambda; ``angle`` rotates it in the
    transverse plane for seeded averaging studies.
    """
    return np.array([math.cos(angle), math.sin(angle), 0.0])


def equal_directions(k, n_slots: int) -> np.ndarray:
    """The same observation vector in every slot (autocorrelation geometry)."""
    return np.tile(np.asarray(k, dtype=float), (n_slots, 1))


def ensemble_from_config(cfg: dict) -> Ensemble:
    if "positions" in cfg:
        return Ensemble(positions=np.asarray(cfg["positions"], dtype=float))
    n = int(cfg["n"])
    seed = int(cfg.get("seed", 0))
    distribution = cfg.get("distribution", "uniform-cube")
    realization = int(cfg.get("realization", 0))
    return random_cloud(n, seed, distribution, realization=realization)


def export_positions_csv(ensemble: Ensemble, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "z"])
        for row in ensemble.positions:
            writer.writerow([repr(float(v)) for v in row])
