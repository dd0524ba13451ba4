"""Channel generators, structured decompositions and their statistical checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .regions import AntennaConfig

RANK_RTOL = 1e-10


# ---------------------------------------------------------------------------
# Random draws
# ---------------------------------------------------------------------------


def draw_iid_rayleigh(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix of i.i.d. CN(0, 1) entries."""
    if rows < 1 or cols < 1:
        raise ValueError(f"shape must be positive, got ({rows}, {cols})")
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def draw_haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix.

    QR of a complex Gaussian matrix with the phases of R's diagonal moved
    into Q; without that correction Q is not Haar.
    """
    z = draw_iid_rayleigh(dim, dim, rng)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * ph[np.newaxis, :]


@dataclass(frozen=True)
class FadingModel:
    """Fading model tag plus the fixed rotations of correlated Rayleigh fading.

    ``kind`` is one of ``"iid-rayleigh"``, ``"isotropic"`` or
    ``"correlated-rayleigh"``.  ``u12`` (N1 x N1) and ``u22`` (N2 x N2) are
    only used by the correlated model.
    """

    kind: str = "iid-rayleigh"
    u12: np.ndarray | None = None
    u22: np.ndarray | None = None

    KINDS = ("iid-rayleigh", "isotropic", "correlated-rayleigh")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown fading model {self.kind!r}; expected one of {self.KINDS}")


@dataclass
class ChannelDraw:
    """One realization of ``H^{11}, H^{12}, H^{21}, H^{22}``."""

    h11: np.ndarray
    h12: np.ndarray
    h21: np.ndarray
    h22: np.ndarray

    def check_shapes(self, config: AntennaConfig) -> None:
        expected = {
            "h11": (config.n1, config.m1),
            "h12": (config.n1, config.m2),
            "h21": (config.n2, config.m1),
            "h22": (config.n2, config.m2),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")


def _check_unitary(u: np.ndarray | None, dim: int, name: str) -> np.ndarray:
    if u is None:
        raise ValueError(f"correlated-rayleigh needs {name}")
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}, got {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(dim)) > 1e-8:
        raise ValueError(f"{name} is not unitary")
    return u


def structured_factor(rows: int, cols: int, zero_rows: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian ``rows x cols`` matrix whose last ``zero_rows`` rows are exactly zero."""
    h = np.zeros((rows, cols), dtype=complex)
    h[: rows - zero_rows] = draw_iid_rayleigh(rows - zero_rows, cols, rng)
    return h


def draw_channel(config: AntennaConfig, model: FadingModel | str, rng: np.random.Generator) -> ChannelDraw:
    if isinstance(model, str):
        model = FadingModel(model)
    m1, m2, n1, n2 = config.as_tuple()
    if model.kind in ("iid-rayleigh", "isotropic"):
        # i.i.d. Rayleigh is one realization of isotropic fading.
        return ChannelDraw(
            draw_iid_rayleigh(n1, m1, rng),
            draw_iid_rayleigh(n1, m2, rng),
            draw_iid_rayleigh(n2, m1, rng),
            draw_iid_rayleigh(n2, m2, rng),
        )
    if n2 <= m2:
        raise ValueError("correlated-rayleigh fading requires N2 > M2")
    u12 = _check_unitary(model.u12, n1, "u12")
    u22 = _check_unitary(model.u22, n2, "u22")
    zero_rows = n2 - m2
    if n1 <= zero_rows:
        raise ValueError("correlated-rayleigh fading requires N1 > N2 - M2")
    h11 = draw_iid_rayleigh(n1, m1, rng)
    h12w = structured_factor(n1, m2, zero_rows, rng)
    h21 = draw_iid_rayleigh(n2, m1, rng)
    h22w = structured_factor(n2, m2, zero_rows, rng)
    return ChannelDraw(h11, u12 @ h12w, h21, u22 @ h22w)


# ---------------------------------------------------------------------------
# Decompositions
# ---------------------------------------------------------------------------


@dataclass
class SvdFactors:
    u: np.ndarray
    lam: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.lam @ self.v.conj().T

    @property
    def singular_values(self) -> np.ndarray:
        return np.diagonal(self.lam).real.copy()


@dataclass
class QrFactors:
    q: np.ndarray
    r: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.q @ self.r


def _first_nonzero_phase(vec: np.ndarray, tol: float = 1e-12) -> complex:
    idx = np.flatnonzero(np.abs(vec) > tol * max(1.0, np.abs(vec).max(initial=0.0)))
    if idx.size == 0:
        return 1.0
    x = vec[idx[0]]
    return x / abs(x)


def _make_first_real(vec: np.ndarray, tol: float = 1e-12) -> None:
    """Rotate ``vec`` in place so its first nonzero entry is exactly real positive."""
    idx = np.flatnonzero(np.abs(vec) > tol * max(1.0, np.abs(vec).max(initial=0.0)))
    if idx.size:
        vec[idx[0]] = abs(vec[idx[0]])


def svd_ordered(h: np.ndarray) -> SvdFactors:
    """SVD ``h = u @ lam @ v^*`` with a deterministic phase convention.

    ``u`` is N x N unitary, ``lam`` is N x min(N, M) with the singular
    values (descending) on the diagonal of its top square and exact zeros
    elsewhere, ``v`` is M x min(N, M).  The first nonzero entry of every
    column of ``v`` is real and positive.
    """
    h = np.asarray(h, dtype=complex)
    if h.size == 0:
        raise ValueError("empty matrix")
    n, m = h.shape
    k = min(n, m)
    u, s, vh = np.linalg.svd(h, full_matrices=True)
    v = vh.conj().T[:, :k].copy()
    u = u.copy()
    for i in range(k):
        ph = _first_nonzero_phase(v[:, i])
        v[:, i] *= np.conj(ph)
        u[:, i] *= np.conj(ph)
        _make_first_real(v[:, i])
    for i in range(k, n):
        u[:, i] *= np.conj(_first_nonzero_phase(u[:, i]))
        _make_first_real(u[:, i])
    lam = np.zeros((n, k))
    lam[np.arange(k), np.arange(k)] = s
    return SvdFactors(u, lam, v)


def qr_tall(h: np.ndarray, rng: np.random.Generator | None = None) -> QrFactors:
    """QR of a tall N2 x M2 matrix, ``r`` with real nonnegative diagonal.

    ``r`` is N2 x M2, upper triangular with exact zeros below the diagonal
    (so its bottom ``N2 - M2`` rows are exactly zero).

    The last ``N2 - M2`` columns of ``q`` only need to span the orthogonal
    complement of ``range(h)``.  By default their first nonzero entry is
    made real positive, which is deterministic but not Haar.  Passing
    ``rng`` rotates them by an independent Haar unitary instead, so that
    ``q`` is Haar for i.i.d. Gaussian ``h``.
    """
    h = np.asarray(h, dtype=complex)
    n, m = h.shape
    if n < m:
        raise ValueError(f"qr_tall needs rows >= cols, got {h.shape}")
    q, r = np.linalg.qr(h, mode="complete")
    d = np.diagonal(r)[:m]
    mag = np.abs(d)
    ph = np.ones(m, dtype=complex)
    nz = mag > 0
    ph[nz] = d[nz] / mag[nz]
    q = q.copy()
    q[:, :m] *= ph[np.newaxis, :]
    r = r.copy()
    r[:m] *= np.conj(ph)[:, np.newaxis]
    if rng is not None and n > m:
        q[:, m:] = q[:, m:] @ draw_haar_unitary(n - m, rng)
    else:
        for j in range(m, n):
            q[:, j] *= np.conj(_first_nonzero_phase(q[:, j]))
            _make_first_real(q[:, j])
    r = np.triu(r)
    r[m:] = 0.0
    idx = np.arange(m)
    r[idx, idx] = mag
    return QrFactors(q, r)


def numerical_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def orth_complement(a: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of ``range(a)``."""
    u, s, _ = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return u[:, rank:]


def unitarity_error(x: np.ndarray) -> float:
    """``||X^* X - I||_F``."""
    return float(np.linalg.norm(x.conj().T @ x - np.eye(x.shape[1])))


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    denom = np.linalg.norm(exact)
    err = np.linalg.norm(approx - exact)
    return float(err if denom == 0 else err / denom)


# ---------------------------------------------------------------------------
# Statistical checks
# ---------------------------------------------------------------------------


@dataclass
class TestReport:
    test: str
    samples: int
    statistic: float
    p_value: float | None
    passed: bool
    details: dict | None = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        out = {
            "test": self.test,
            "samples": self.samples,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "pass": self.passed,
        }
        if self.details:
            out["details"] = self.details
        return out


def pooled_parts(mats: np.ndarray) -> np.ndarray:
    """Real and imaginary parts of every entry, flattened into one sample."""
    return np.concatenate([mats.real.ravel(), mats.imag.ravel()])


def ks_compare(features_a: dict, features_b: dict, threshold: float = 0.01) -> tuple[float, float, dict]:
    """Two-sample KS on each named feature; returns (max statistic, min p, per-feature)."""
    per = {}
    for name in features_a:
        res = stats.ks_2samp(features_a[name], features_b[name])
        per[name] = {"statistic": float(res.statistic), "p_value": float(res.pvalue)}
    stat = max(v["statistic"] for v in per.values())
    p = min(v["p_value"] for v in per.values())
    return stat, p, per


def test_isotropy(
    sampler: Callable[[np.random.Generator], np.ndarray],
    u: np.ndarray,
    samples: int,
    rng: np.random.Generator,
    threshold: float = 0.01,
) -> TestReport:
    """Two-sample check that ``H`` and ``H @ u`` share a distribution.

    Draws independent sets ``{H_k}`` and ``{H'_k @ u}`` and compares the
    pooled real/imaginary entry parts and the singular values with KS
    tests.  Passes iff every p-value exceeds ``threshold``.
    """
    if samples < 1000:
        raise ValueError("isotropy test needs at least 10^3 samples")
    first = np.stack([sampler(rng) for _ in range(samples)])
    if first.shape[2] != u.shape[0] or u.shape[0] != u.shape[1]:
        raise ValueError(f"u of shape {u.shape} does not match samples of shape {first.shape[1:]}")
    second = np.stack([sampler(rng) for _ in range(samples)]) @ u
    feats = lambda x: {
        "entries": pooled_parts(x),
        "singular_values": np.linalg.svd(x, compute_uv=False).ravel(),
    }
    stat, p, per = ks_compare(feats(first), feats(second))
    return TestReport("isotropy", samples, stat, p, p > threshold, per)


test_isotropy.__test__ = False


def haar_features(mats: np.ndarray) -> dict:
    """Entry parts plus eigenphases; naive (uncorrected) QR fails the latter."""
    return {
        "entries": pooled_parts(mats),
        "eigenphases": np.angle(np.linalg.eigvals(mats)).ravel(),
    }


def haar_check(
    matrix_sampler: Callable[[np.random.Generator], np.ndarray],
    dim: int,
    samples: int,
    rng: np.random.Generator,
    threshold: float = 0.01,
    name: str = "haar",
) -> TestReport:
    """KS comparison of a unitary sampler against :func:`draw_haar_unitary`."""
    got = np.stack([matrix_sampler(rng) for _ in range(samples)])
    ref = np.stack([draw_haar_unitary(dim, rng) for _ in range(samples)])
    stat, p, per = ks_compare(haar_features(got), haar_features(ref))
    return TestReport(name, samples, stat, p, p > threshold, per)


def qr_haar_check(n2: int, m2: int, samples: int, rng: np.random.Generator) -> TestReport:
    """Q from :func:`qr_tall` of i.i.d. Gaussian input must be Haar.

    Checks the full Q with randomized completion, and the first ``m2``
    columns of the deterministic Q against those of a Haar matrix.
    """
    full = haar_check(
        lambda g: qr_tall(draw_iid_rayleigh(n2, m2, g), rng=g).q, n2, samples, rng, name="qr-haar"
    )
    got = np.stack([qr_tall(draw_iid_rayleigh(n2, m2, rng)).q[:, :m2] for _ in range(samples)])
    ref = np.stack([draw_haar_unitary(n2, rng)[:, :m2] for _ in range(samples)])
    res = stats.ks_2samp(pooled_parts(got), pooled_parts(ref))
    details = dict(full.details)
    details["leading_columns"] = {"statistic": float(res.statistic), "p_value": float(res.pvalue)}
    stat = max(full.statistic, float(res.statistic))
    p = min(full.p_value, float(res.pvalue))
    return TestReport("qr-haar", samples, stat, p, p > 0.01, details)


def haar_invariance_check(a: np.ndarray, samples: int, rng: np.random.Generator) -> TestReport:
    """``a @ U`` against ``U`` for Haar ``U`` and fixed unitary ``a``."""
    dim = a.shape[0]
    left = np.stack([a @ draw_haar_unitary(dim, rng) for _ in range(samples)])
    right = np.stack([draw_haar_unitary(dim, rng) for _ in range(samples)])
    stat, p, per = ks_compare(haar_features(left), haar_features(right))
    return TestReport("haar-invariance", samples, stat, p, p > 0.01, per)


def qr_independence(n2: int, m2: int, samples: int, rng: np.random.Generator) -> float:
    """Largest |sample correlation| between entries of R and entries of Q."""
    qs, rs = [], []
    for _ in range(samples):
        f = qr_tall(draw_iid_rayleigh(n2, m2, rng))
        qs.append(f.q.ravel())
        rs.append(f.r[np.triu_indices(m2)].ravel())
    q = np.abs(np.array(qs)) ** 2
    r = np.abs(np.array(rs)) ** 2
    q = (q - q.mean(0)) / q.std(0)
    r = (r - r.mean(0)) / r.std(0)
    corr = q.T @ r / samples
    return float(np.abs(corr).max())


# ---------------------------------------------------------------------------
# Step III.a partition and the G_k construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionPlan:
    """Grouping of R1's outputs ``[1:N1]`` into sets padded to ``N2`` outputs.

    ``actual_sets[0]`` is ``S_0``; ``actual_sets[i]`` for ``i >= 1`` is
    ``S_i``.  Indices are 1-based as in the construction.
    """

    config: AntennaConfig
    m: int
    n: int
    actual_sets: tuple[tuple[int, ...], ...]
    fictitious_counts: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "m": self.m,
            "n": self.n,
            "actual_sets": [list(s) for s in self.actual_sets],
            "fictitious_counts": list(self.fictitious_counts),
        }


PARTITION_NOTE = (
    "For (5,2,7,3) a grouping of R1's outputs into two singleton sets plus "
    "one pair set corresponds to (m, n) = (1, 2); the floor formula used "
    "here gives (m, n) = (2, 0).  Both satisfy n + m*M2 = N1 - N2 and lead "
    "to the same bound."
)


def _check_crc_square(config: AntennaConfig) -> None:
    if config.n1 != config.m1 + config.m2:
        raise ValueError(f"requires N1 = M1 + M2, got {config.as_tuple()}")
    if not config.n1 > config.n2 > config.m2:
        raise ValueError(f"requires N1 > N2 > M2, got {config.as_tuple()}")


def partition_plan(config: AntennaConfig) -> PartitionPlan:
    _check_crc_square(config)
    n1, n2, m2 = config.n1, config.n2, config.m2
    m = (n1 - n2) // m2
    n = (n1 - n2) - m * m2
    sets: list[tuple[int, ...]] = [tuple(range(n1 - n2 + 1, n1 + 1))]
    counts = [0]
    for i in range(1, n + 1):
        sets.append((i,))
        counts.append(n2 - 1)
    for j in range(1, m + 1):
        sets.append(tuple(range(n + (j - 1) * m2 + 1, n + j * m2 + 1)))
        counts.append(n2 - m2)
    return PartitionPlan(config, m, n, tuple(sets), tuple(counts))


def build_gk(config: AntennaConfig, k: int, rng: np.random.Generator) -> np.ndarray:
    """Assemble the N1 x N1 matrix ``G_k`` from independent QR draws.

    Left N1 x M1 block: i.i.d. Rayleigh.  Right N1 x M2 block: row ``k``
    of R for each singleton set, the first M2 rows of R for each M2-sized
    set and the first N2 rows of R for ``S_0``, every R coming from the QR
    of a fresh N2 x M2 i.i.d. Rayleigh matrix.
    """
    plan = partition_plan(config)
    m2, n2 = config.m2, config.n2
    if not 1 <= k <= m2:
        raise ValueError(f"k must lie in [1:{m2}], got {k}")
    left = draw_iid_rayleigh(config.n1, config.m1, rng)
    blocks = []
    for _ in range(plan.n):
        blocks.append(qr_tall(draw_iid_rayleigh(n2, m2, rng)).r[k - 1 : k])
    for _ in range(plan.m):
        blocks.append(qr_tall(draw_iid_rayleigh(n2, m2, rng)).r[:m2])
    blocks.append(qr_tall(draw_iid_rayleigh(n2, m2, rng)).r[:n2])
    return np.hstack([left, np.vstack(blocks)])


def gk_rank_check(config: AntennaConfig, samples: int, rng: np.random.Generator) -> TestReport:
    """Count rank-deficient ``G_k`` draws over every ``k`` in ``[1:M2]``."""
    deficient = {}
    worst = np.inf
    for k in range(1, config.m2 + 1):
        bad = 0
        for _ in range(samples):
            s = np.linalg.svd(build_gk(config, k, rng), compute_uv=False)
            ratio = s[-1] / s[0]
            worst = min(worst, ratio)
            if not ratio > RANK_RTOL:
                bad += 1
        deficient[str(k)] = bad
    total = sum(deficient.values())
    return TestReport(
        "gk-rank", samples, float(total), None, total == 0,
        {"rank_deficient_per_k": deficient, "min_sigma_ratio": float(worst)},
    )


# ---------------------------------------------------------------------------
# JSON matrices
# ---------------------------------------------------------------------------


def matrix_to_json(a: np.ndarray) -> list:
    """Row-major list of ``[re, im]`` pairs."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_json(data: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)
