"""Monte Carlo verification of zero-forcing corners and interference localization.

Rates are ergodic Gaussian-input log-det rates averaged over independent
channel draws; degrees of freedom are estimated as least-squares slopes of
the mean rate against ``log2(P)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fading import (
    ChannelDraw,
    FadingModel,
    draw_channel,
    draw_haar_unitary,
    draw_iid_rayleigh,
    orth_complement,
)
from .regions import AntennaConfig, Regime, UnsupportedRegime, classify

DEFAULT_GRID_DB = (30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0)
THREADS_ENV = "DOF_ATLAS_THREADS"


class SimConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one Monte Carlo experiment.

    ``model`` is a fading-model tag.  For ``"correlated-rayleigh"`` the
    fixed rotations are drawn as Haar unitaries from a stream reserved
    for them, so the seed still determines everything.
    """

    config: AntennaConfig
    model: str = "iid-rayleigh"
    snr_grid_db: tuple[float, ...] = DEFAULT_GRID_DB
    trials: int = 200
    seed: int = 0
    alpha: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(x) for x in self.snr_grid_db))
        grid = self.snr_grid_db
        if self.model not in FadingModel.KINDS:
            raise SimConfigError(f"unknown fading model {self.model!r}")
        if len(grid) < 3:
            raise SimConfigError("snr_grid_db needs at least 3 points")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise SimConfigError("snr_grid_db must be strictly ascending")
        if grid[-1] - grid[0] < 20:
            raise SimConfigError("snr_grid_db must span at least 20 dB")
        if self.trials < 50:
            raise SimConfigError("trials must be >= 50")
        if not 0 <= self.seed < 2**64:
            raise SimConfigError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.alpha <= 0.5:
            raise SimConfigError(f"alpha must lie in [0, 1/2], got {self.alpha}")

    KEYS = ("config", "model", "snr_grid_db", "trials", "seed", "alpha")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        unknown = set(data) - set(cls.KEYS)
        if unknown:
            raise SimConfigError(f"unknown keys: {sorted(unknown)}")
        if "config" not in data:
            raise SimConfigError("missing key 'config'")
        kwargs = dict(data)
        try:
            kwargs["config"] = AntennaConfig.from_dict(data["config"])
        except (TypeError, ValueError, KeyError) as exc:
            raise SimConfigError(f"bad config: {exc}") from None
        for key, typ in (("trials", int), ("seed", int)):
            if key in kwargs and (isinstance(kwargs[key], bool) or not isinstance(kwargs[key], typ)):
                raise SimConfigError(f"{key} must be an integer")
        if "alpha" in kwargs and not isinstance(kwargs["alpha"], (int, float)):
            raise SimConfigError("alpha must be a number")
        if "snr_grid_db" in kwargs and not isinstance(kwargs["snr_grid_db"], list):
            raise SimConfigError("snr_grid_db must be a list")
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "model": self.model,
            "snr_grid_db": list(self.snr_grid_db),
            "trials": self.trials,
            "seed": self.seed,
            "alpha": self.alpha,
        }

    @property
    def powers(self) -> np.ndarray:
        return 10.0 ** (np.asarray(self.snr_grid_db) / 10.0)


@dataclass
class SlopeEstimate:
    snr_grid_db: list[float]
    mean_rates_bits: list[float]
    slope: float
    stderr: float
    r_squared: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr, "r_squared": self.r_squared}


@dataclass
class LocalizationReport:
    """Interference power inside a receive subspace of R2.

    ``per_snr_interference_power`` is the mean ``trace(B^* K_int B)``;
    ``occupancy_slope`` is the fitted slope of
    ``log2(1 + power / subspace_dim)`` against ``log2(P)``.
    """

    subspace_dim: int
    snr_grid_db: list[float]
    per_snr_interference_power: list[float]
    occupancy_slope: float
    stderr: float = 0.0


@dataclass
class ExperimentResult:
    """Everything one experiment writes out (CSV rows + JSON summary)."""

    scheme: str
    sim: SimConfig
    r1: SlopeEstimate | None = None
    r2: SlopeEstimate | None = None
    localization: LocalizationReport | None = None
    extra: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        out = []
        for i, snr in enumerate(self.sim.snr_grid_db):
            out.append({
                "snr_db": snr,
                "mean_rate_r1_bits": self.r1.mean_rates_bits[i] if self.r1 else None,
                "mean_rate_r2_bits": self.r2.mean_rates_bits[i] if self.r2 else None,
                "interference_power_subspace": (
                    self.localization.per_snr_interference_power[i] if self.localization else None
                ),
            })
        return out

    def summary(self) -> dict:
        slopes = {
            "r1": self.r1.slope if self.r1 else None,
            "r2": self.r2.slope if self.r2 else None,
            "occupancy": self.localization.occupancy_slope if self.localization else None,
        }
        stderr = {
            "r1": self.r1.stderr if self.r1 else None,
            "r2": self.r2.stderr if self.r2 else None,
            "occupancy": self.localization.stderr if self.localization else None,
        }
        out = {
            "scheme": self.scheme,
            "config": self.sim.config.to_dict(),
            "slopes": slopes,
            "stderr": stderr,
            "trials": self.sim.trials,
            "seed": self.sim.seed,
        }
        if self.scheme.startswith("uniform"):
            out["alpha"] = self.sim.alpha
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# Rates and slope fitting
# ---------------------------------------------------------------------------


def _logdet2_pd(a: np.ndarray) -> float:
    chol = np.linalg.cholesky(a)
    return float(2.0 * np.sum(np.log2(np.abs(np.diagonal(chol)))))


def gaussian_rate(h_desired: np.ndarray, q_signal: np.ndarray, s_noise_plus_interference: np.ndarray) -> float:
    """``log2 det(I + S^{-1/2} H Q H^* S^{-1/2})`` in bits per channel use.

    Uses the Cholesky factor ``L`` of ``S`` (``S^{-1/2}`` replaced by
    ``L^{-1}``, which leaves the determinant unchanged).  A non-PD ``S``
    raises :class:`numpy.linalg.LinAlgError`.
    """
    h = np.atleast_2d(np.asarray(h_desired, dtype=complex))
    q = np.atleast_2d(np.asarray(q_signal, dtype=complex))
    s = np.atleast_2d(np.asarray(s_noise_plus_interference, dtype=complex))
    if h.shape[0] != s.shape[0] or h.shape[1] != q.shape[0]:
        raise ValueError(f"non-conformable shapes H{h.shape}, Q{q.shape}, S{s.shape}")
    if not np.any(q) or not np.any(h):
        return 0.0
    chol = np.linalg.cholesky(s)
    a = np.linalg.solve(chol, h)
    m = a @ q @ a.conj().T
    m = 0.5 * (m + m.conj().T) + np.eye(m.shape[0])
    return max(0.0, _logdet2_pd(m))


def fit_slope(snr_grid_db: Sequence[float], rates: Sequence[float]) -> SlopeEstimate:
    """Ordinary least squares of ``rates`` against ``log2(P)``."""
    db = np.asarray(snr_grid_db, dtype=float)
    y = np.asarray(rates, dtype=float)
    if db.shape != y.shape:
        raise ValueError("grid and rates differ in length")
    if db.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(np.diff(db) <= 0):
        raise ValueError("grid must be strictly ascending")
    x = db / 10.0 * np.log2(10.0)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    intercept = y.mean() - slope * x.mean()
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    stderr = float(np.sqrt(ss_res / (db.size - 2) / sxx))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return SlopeEstimate(db.tolist(), y.tolist(), slope, stderr, float(r2))


# ---------------------------------------------------------------------------
# Trial machinery
# ---------------------------------------------------------------------------


def trial_rng(seed: int, snr_index: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one (SNR point, trial) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_index, trial)))


def _fading_model(sim: SimConfig) -> FadingModel:
    if sim.model != "correlated-rayleigh":
        return FadingModel(sim.model)
    # Reserved spawn key: never collides with (snr_index, trial) pairs.
    rng = np.random.default_rng(np.random.SeedSequence(sim.seed, spawn_key=(2**32,)))
    c = sim.config
    return FadingModel(sim.model, draw_haar_unitary(c.n1, rng), draw_haar_unitary(c.n2, rng))


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


TrialFn = Callable[[ChannelDraw, float, np.random.Generator], tuple[float, ...]]


def run_trials(sim: SimConfig, trial_fn: TrialFn) -> np.ndarray:
    """Average ``trial_fn`` outputs per SNR point; shape (len(grid), n_outputs).

    Every trial owns its stream, so the result does not depend on the
    number of worker threads.
    """
    model = _fading_model(sim)
    powers = sim.powers

    def one_point(i: int) -> np.ndarray:
        acc = []
        for t in range(sim.trials):
            rng = trial_rng(sim.seed, i, t)
            ch = draw_channel(sim.config, model, rng)
            acc.append(trial_fn(ch, float(powers[i]), rng))
        return np.mean(np.asarray(acc, dtype=float), axis=0)

    workers = min(_max_workers(), len(powers))
    if workers == 1:
        return np.array([one_point(i) for i in range(len(powers))])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(one_point, range(len(powers)))))


def _require_ic(config: AntennaConfig) -> None:
    if classify(config, "ic") is not Regime.ASYMMETRIC_IC:
        raise UnsupportedRegime(
            f"unsupported regime: {config.as_tuple()} does not satisfy min(M1,N1) > N2 > M2"
        )


def _zf_rate(h_desired: np.ndarray, h_interf: np.ndarray, power_per_stream: float) -> float:
    """Rate after projecting onto the orthogonal complement of ``range(h_interf)``."""
    basis = orth_complement(h_interf)
    if basis.shape[1] == 0:
        return 0.0
    g = basis.conj().T @ h_desired
    q = power_per_stream * np.eye(h_desired.shape[1])
    return gaussian_rate(g, q, np.eye(basis.shape[1]))


def _occupancy(power: np.ndarray, dim: int, grid: Sequence[float]) -> LocalizationReport:
    est = fit_slope(grid, np.log2(1.0 + np.asarray(power) / dim))
    return LocalizationReport(dim, list(map(float, grid)), [float(p) for p in power], est.slope, est.stderr)


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------


def zf_corner_scheme(sim: SimConfig) -> tuple[SlopeEstimate, SlopeEstimate]:
    """Receive zero-forcing at the corner ``(N2 - M2, M2)``.

    T1 sends ``N2 - M2`` streams on its first antennas, T2 sends ``M2``
    streams; both receivers null the other transmitter's signal space.
    """
    _require_ic(sim.config)
    c = sim.config
    k1 = c.n2 - c.m2

    def trial(ch: ChannelDraw, p: float, rng) -> tuple[float, float]:
        r1 = _zf_rate(ch.h11[:, :k1], ch.h12, p / k1)
        r2 = _zf_rate(ch.h22, ch.h21[:, :k1], p / c.m2)
        return r1, r2

    means = run_trials(sim, trial)
    return fit_slope(sim.snr_grid_db, means[:, 0]), fit_slope(sim.snr_grid_db, means[:, 1])


def single_user_scheme(sim: SimConfig) -> SlopeEstimate:
    """T2 silent; T1 sends ``min(M1, N1)`` equal-power streams to R1."""
    c = sim.config
    k = min(c.m1, c.n1)

    def trial(ch: ChannelDraw, p: float, rng) -> tuple[float]:
        return (gaussian_rate(ch.h11[:, :k], p / k * np.eye(k), np.eye(c.n1)),)

    means = run_trials(sim, trial)
    return fit_slope(sim.snr_grid_db, means[:, 0])


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = draw_iid_rayleigh(dim, 1, rng)
    return g / np.linalg.norm(g)


@dataclass
class UniformSignalingResult:
    r2_slope: SlopeEstimate
    localization: LocalizationReport
    r1_slope: SlopeEstimate


def uniform_signaling_experiment(sim: SimConfig) -> UniformSignalingResult:
    """T1 spreads ``M1`` streams of power ``P**alpha`` over all its antennas.

    R2 decodes treating interference as noise; the interference power in a
    random one-dimensional subspace of R2 is tracked; R1 zero-forces T2.
    """
    _require_ic(sim.config)
    c = sim.config
    alpha = sim.alpha

    def trial(ch: ChannelDraw, p: float, rng) -> tuple[float, float, float]:
        p1 = p ** alpha
        k_int = p1 * ch.h21 @ ch.h21.conj().T
        r2 = gaussian_rate(ch.h22, p / c.m2 * np.eye(c.m2), np.eye(c.n2) + k_int)
        b = random_unit_vector(c.n2, rng)
        occ = float(np.real(b.conj().T @ k_int @ b)[0, 0])
        r1 = _zf_rate(ch.h11, ch.h12, p1)
        return r1, r2, occ

    means = run_trials(sim, trial)
    grid = sim.snr_grid_db
    return UniformSignalingResult(
        r2_slope=fit_slope(grid, means[:, 1]),
        localization=_occupancy(means[:, 2], 1, grid),
        r1_slope=fit_slope(grid, means[:, 0]),
    )


SUBSPACES = ("complement-of-desired", "random-1d")


def localization_probe(
    sim: SimConfig,
    scheme: str = "zf-corner",
    subspace: str | np.ndarray = "complement-of-desired",
) -> LocalizationReport:
    """Mean interference power ``trace(B^* K_int B)`` in a subspace of R2.

    ``scheme`` is ``"zf-corner"`` or ``"uniform"`` (power ``P**sim.alpha``
    per T1 antenna).  ``subspace`` is

    * ``"complement-of-desired"``: the M2-dimensional zero-forcing receive
      subspace R2 decodes from at the corner, i.e. the orthogonal
      complement of the zf-corner interference span;
    * ``"random-1d"``: an isotropic random line, redrawn every trial;
    * an ``N2 x k`` array whose columns are orthonormalized.
    """
    _require_ic(sim.config)
    c = sim.config
    if scheme == "zf-corner":
        cols = c.n2 - c.m2
        tx_power = lambda p: p / cols
    elif scheme == "uniform":
        cols = c.m1
        tx_power = lambda p: p ** sim.alpha
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    fixed = None
    if isinstance(subspace, str):
        if subspace not in SUBSPACES:
            raise ValueError(f"unknown subspace {subspace!r}")
        dim = c.m2 if subspace == "complement-of-desired" else 1
    else:
        basis = np.atleast_2d(np.asarray(subspace, dtype=complex))
        if basis.shape[0] != c.n2:
            raise ValueError(f"basis must have {c.n2} rows, got {basis.shape[0]}")
        fixed = orth_complement(orth_complement(basis))
        dim = fixed.shape[1]
    if dim > c.n2:
        raise ValueError(f"subspace dimension {dim} exceeds N2 = {c.n2}")
    if dim == 0:
        raise ValueError("subspace is empty")

    def trial(ch: ChannelDraw, p: float, rng) -> tuple[float]:
        h = ch.h21[:, :cols]
        if fixed is not None:
            b = fixed
        elif subspace == "random-1d":
            b = random_unit_vector(c.n2, rng)
        else:
            b = orth_complement(ch.h21[:, : c.n2 - c.m2])
            if b.shape[1] != dim:
                raise ValueError("interference span is rank deficient")
        proj = b.conj().T @ h
        return (float(tx_power(p) * np.sum(np.abs(proj) ** 2)),)

    means = run_trials(sim, trial)
    return _occupancy(means[:, 0], dim, sim.snr_grid_db)


# ---------------------------------------------------------------------------
# Experiment dispatch (used by the CLI and scripts)
# ---------------------------------------------------------------------------


def run_experiment(name: str, sim: SimConfig, scheme: str = "zf-corner", subspace: str = "complement-of-desired") -> ExperimentResult:
    if name == "corner":
        r1, r2 = zf_corner_scheme(sim)
        return ExperimentResult("zf-corner", sim, r1=r1, r2=r2)
    if name == "single-user":
        return ExperimentResult("single-user", sim, r1=single_user_scheme(sim))
    if name == "uniform":
        res = uniform_signaling_experiment(sim)
        return ExperimentResult("uniform", sim, r1=res.r1_slope, r2=res.r2_slope, localization=res.localization)
    if name == "probe":
        rep = localization_probe(sim, scheme, subspace)
        label = "probe-" + ("uniform" if scheme == "uniform" else scheme)
        return ExperimentResult(label, sim, localization=rep, extra={"subspace": subspace})
    raise ValueError(f"unknown experiment {name!r}")
