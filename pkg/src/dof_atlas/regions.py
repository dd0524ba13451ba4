"""Exact degrees-of-freedom region polytopes for two-user MIMO IC / CRC.

Every region is a bounded convex polygon in the nonnegative (d1, d2)
quadrant.  Coefficients and vertices are :class:`fractions.Fraction`
values, so membership, containment and vertex enumeration are exact.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]

SCENARIOS = ("ic-nocsit", "crc-nocsit-iid", "crc-nocsit-corr")
SCHEMA_VERSION = 1


class RegionError(ValueError):
    """Base class for region construction failures."""


class UnsupportedRegime(RegionError):
    """The antenna configuration is outside the regime its region formula covers."""


class Unbounded(RegionError):
    pass


class Infeasible(RegionError):
    pass


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts (M1, M2, N1, N2) at T1, T2, R1 and R2."""

    m1: int
    m2: int
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("m1", "m2", "n1", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an int, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")

    def swapped(self) -> "AntennaConfig":
        """Exchange the roles of the two user pairs."""
        return AntennaConfig(self.m2, self.m1, self.n2, self.n1)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m1, self.m2, self.n1, self.n2)

    def to_dict(self) -> dict:
        return {"m1": self.m1, "m2": self.m2, "n1": self.n1, "n2": self.n2}

    @classmethod
    def from_dict(cls, data: dict) -> "AntennaConfig":
        keys = {"m1", "m2", "n1", "n2"}
        if set(data) != keys:
            raise ValueError(f"config needs exactly the keys {sorted(keys)}, got {sorted(data)}")
        return cls(data["m1"], data["m2"], data["n1"], data["n2"])


class Regime(enum.Enum):
    ASYMMETRIC_IC = "AsymmetricIC"
    ASYMMETRIC_IC_SWAPPED = "AsymmetricICSwapped"
    ASYMMETRIC_CRC = "AsymmetricCRC"
    ASYMMETRIC_CRC_SWAPPED = "AsymmetricCRCSwapped"
    GENERAL = "General"


def _as_fraction(value: Rational | str) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floating point values are not allowed in exact regions")
    return Fraction(value)


@dataclass(frozen=True)
class HalfSpace:
    """The constraint ``a1*d1 + a2*d2 <= c``.

    ``label`` is presentation-only (e.g. ``"L_o1"``) and does not take
    part in equality or serialization.
    """

    a1: Fraction
    a2: Fraction
    c: Fraction
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a1", _as_fraction(self.a1))
        object.__setattr__(self, "a2", _as_fraction(self.a2))
        object.__setattr__(self, "c", _as_fraction(self.c))
        if self.a1 == 0 and self.a2 == 0:
            raise ValueError("half-space normal (a1, a2) must be nonzero")

    def value(self, p: "DofPoint") -> Fraction:
        return self.a1 * p.d1 + self.a2 * p.d2

    def satisfied_by(self, p: "DofPoint") -> bool:
        return self.value(p) <= self.c

    def tight_at(self, p: "DofPoint") -> bool:
        return self.value(p) == self.c

    def __str__(self) -> str:
        return format_halfspace(self)


@dataclass(frozen=True, order=True)
class DofPoint:
    d1: Fraction
    d2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "d1", _as_fraction(self.d1))
        object.__setattr__(self, "d2", _as_fraction(self.d2))
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError(f"DoF must be nonnegative, got ({self.d1}, {self.d2})")

    def mirrored(self) -> "DofPoint":
        return DofPoint(self.d2, self.d1)

    def __str__(self) -> str:
        return f"({_fmt(self.d1)}, {_fmt(self.d2)})"


@dataclass(frozen=True)
class DofRegion:
    config: AntennaConfig
    scenario: str
    halfspaces: tuple[HalfSpace, ...]
    vertices: tuple[DofPoint, ...]

    def contains(self, p: DofPoint) -> bool:
        return contains(self, p)

    def minimal(self) -> tuple[HalfSpace, ...]:
        """Half-spaces that support an edge of the polygon, redundant ones dropped."""
        return minimal_halfspaces(self.halfspaces, self.vertices)

    def first_violated(self, p: DofPoint) -> HalfSpace | None:
        for h in self.halfspaces:
            if not h.satisfied_by(p):
                return h
        return None

    def to_json(self) -> str:
        return region_to_json(self)


# ---------------------------------------------------------------------------
# Regime classification and bounds
# ---------------------------------------------------------------------------


def is_asymmetric_ic(c: AntennaConfig) -> bool:
    return min(c.m1, c.n1) > c.n2 > c.m2


def is_asymmetric_crc(c: AntennaConfig) -> bool:
    return min(c.m1 + c.m2, c.n1) > c.n2 > c.m2


def classify(config: AntennaConfig, channel: str = "ic") -> Regime:
    """Regime tag of ``config`` for the interference (``"ic"``) or
    cognitive radio (``"crc"``) channel."""
    if channel == "ic":
        if is_asymmetric_ic(config):
            return Regime.ASYMMETRIC_IC
        if is_asymmetric_ic(config.swapped()):
            return Regime.ASYMMETRIC_IC_SWAPPED
    elif channel == "crc":
        if is_asymmetric_crc(config):
            return Regime.ASYMMETRIC_CRC
        if is_asymmetric_crc(config.swapped()):
            return Regime.ASYMMETRIC_CRC_SWAPPED
    else:
        raise ValueError(f"channel must be 'ic' or 'crc', got {channel!r}")
    return Regime.GENERAL


def bound_L(config: AntennaConfig, n1prime: int) -> HalfSpace:
    """The cross bound ``d1 + (N1' + M2 - N2)/M2 * d2 <= N1'``."""
    if n1prime < 1:
        raise ValueError(f"n1prime must be >= 1, got {n1prime}")
    if config.n2 <= config.m2:
        raise UnsupportedRegime(
            f"bound L requires N2 > M2, got N2={config.n2}, M2={config.m2}"
        )
    slope = Fraction(n1prime + config.m2 - config.n2, config.m2)
    return HalfSpace(Fraction(1), slope, Fraction(n1prime), label="L")


def _nonnegativity() -> list[HalfSpace]:
    return [
        HalfSpace(-1, 0, 0, label="nonneg"),
        HalfSpace(0, -1, 0, label="nonneg"),
    ]


def _asymmetric_region(config: AntennaConfig, n1prime: int, scenario: str) -> DofRegion:
    halfspaces = _nonnegativity() + [
        HalfSpace(1, 0, n1prime, label="L_o1"),
        HalfSpace(0, 1, config.m2, label="L_o2"),
        bound_L(config, n1prime),
    ]
    return DofRegion(config, scenario, tuple(halfspaces), tuple(enumerate_vertices(halfspaces)))


def _mirror_region(region: DofRegion, config: AntennaConfig) -> DofRegion:
    halfspaces = [HalfSpace(h.a2, h.a1, h.c, label=h.label) for h in region.halfspaces]
    vertices = sort_ccw(v.mirrored() for v in region.vertices)
    return DofRegion(config, region.scenario, tuple(halfspaces), tuple(vertices))


def region_ic_nocsit(config: AntennaConfig) -> DofRegion:
    """No-CSIT IC region under isotropic fading, asymmetric regime only.

    Configurations in the index-swapped regime are solved with the users
    exchanged and the result mirrored back.
    """
    regime = classify(config, "ic")
    if regime is Regime.ASYMMETRIC_IC:
        return _asymmetric_region(config, min(config.n1, config.m1), "ic-nocsit")
    if regime is Regime.ASYMMETRIC_IC_SWAPPED:
        return _mirror_region(region_ic_nocsit(config.swapped()), config)
    raise UnsupportedRegime(
        f"unsupported regime: {config.as_tuple()} does not satisfy min(M1,N1) > N2 > M2"
    )


def region_crc_asym(config: AntennaConfig, scenario: str = "crc-nocsit-iid") -> DofRegion:
    """No-CSIT CRC region for i.i.d. or correlated Rayleigh fading.

    Both fading models give the same polygon; ``scenario`` only records
    which assumption the caller made.
    """
    if scenario not in ("crc-nocsit-iid", "crc-nocsit-corr"):
        raise ValueError(f"unknown CRC scenario {scenario!r}")
    if classify(config, "crc") is not Regime.ASYMMETRIC_CRC:
        raise UnsupportedRegime(
            f"unsupported regime: {config.as_tuple()} does not satisfy min(M1+M2,N1) > N2 > M2"
        )
    return _asymmetric_region(config, min(config.n1, config.m1 + config.m2), scenario)


def region_crc_full(config: AntennaConfig) -> DofRegion:
    """No-CSIT CRC region with i.i.d. Rayleigh fading, valid for every config."""
    m1, m2, n1, n2 = config.as_tuple()
    n1prime = min(n1, m1 + m2)
    halfspaces = _nonnegativity() + [
        HalfSpace(1, 0, n1prime, label="L_o1"),
        HalfSpace(0, 1, min(m2, n2), label="L_o2"),
    ]
    if n1 <= n2:
        halfspaces.append(HalfSpace(
            Fraction(1, min(n1, m2)),
            Fraction(1, min(n2, m2)),
            Fraction(n1prime, min(n1, m2)),
            label="cross",
        ))
    elif is_asymmetric_crc(config):
        halfspaces.append(bound_L(config, n1prime))
    else:
        halfspaces.append(HalfSpace(
            Fraction(1, n1prime),
            Fraction(1, min(n2, m1 + m2)),
            1,
            label="cross",
        ))
    return DofRegion(config, "crc-nocsit-iid", tuple(halfspaces), tuple(enumerate_vertices(halfspaces)))


def corner_points(config: AntennaConfig, channel: str = "ic") -> tuple[DofPoint, DofPoint]:
    """The two zero-forcing corners ``(N1', 0)`` and ``(N2 - M2, M2)``."""
    if channel == "ic":
        if not is_asymmetric_ic(config):
            raise UnsupportedRegime(f"unsupported regime: {config.as_tuple()}")
        n1prime = min(config.n1, config.m1)
    else:
        if not is_asymmetric_crc(config):
            raise UnsupportedRegime(f"unsupported regime: {config.as_tuple()}")
        n1prime = min(config.n1, config.m1 + config.m2)
    return DofPoint(n1prime, 0), DofPoint(config.n2 - config.m2, config.m2)


# ---------------------------------------------------------------------------
# Polygon machinery
# ---------------------------------------------------------------------------


def _integer_rows(halfspaces: Sequence[HalfSpace]) -> list[tuple[int, int, int]]:
    """Scale each constraint to integer coefficients, dropping exact repeats."""
    rows = []
    for h in halfspaces:
        den = h.a1.denominator * h.a2.denominator * h.c.denominator
        row = (
            h.a1.numerator * (den // h.a1.denominator),
            h.a2.numerator * (den // h.a2.denominator),
            h.c.numerator * (den // h.c.denominator),
        )
        if row not in rows:
            rows.append(row)
    return rows


def _recession_directions(rows: Sequence[tuple[int, int, int]]) -> list[tuple[int, int]]:
    # Extreme rays of a 2-D cone inside the quadrant lie on an axis or on
    # the boundary line of some constraint.
    candidates = [(1, 0), (0, 1)]
    for a1, a2, _ in rows:
        if a1 * a2 < 0:
            candidates.append((abs(a2), abs(a1)))
    return [r for r in candidates if all(a1 * r[0] + a2 * r[1] <= 0 for a1, a2, _ in rows)]


def sort_ccw(points: Iterable[DofPoint]) -> list[DofPoint]:
    """Sort quadrant points counterclockwise around the origin.

    Angles are compared through the exact ratio ``d2/d1``; points on the
    same ray are ordered by ``(d1, d2)``.
    """
    def key(p: DofPoint):
        if p.d1 == 0 and p.d2 == 0:
            return (0, Fraction(0), p.d1, p.d2)
        if p.d1 == 0:
            return (2, Fraction(0), p.d1, p.d2)
        return (1, p.d2 / p.d1, p.d1, p.d2)

    return sorted(set(points), key=key)


def enumerate_vertices(halfspaces: Sequence[HalfSpace]) -> list[DofPoint]:
    """Vertices of ``{d >= 0} ∩ halfspaces``, deduplicated and sorted CCW.

    Nonnegativity is always imposed, whether or not it is listed.
    """
    system = list(halfspaces) + _nonnegativity()
    for h in system:
        if h.c < 0:
            raise Infeasible(f"origin violates {format_halfspace(h)}")
    rows = _integer_rows(system)
    if _recession_directions(rows):
        raise Unbounded("half-space system does not bound both d1 and d2")

    found = set()
    for (a1, a2, c), (b1, b2, e) in combinations(rows, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        x = c * b2 - a2 * e
        y = a1 * e - c * b1
        if det < 0:
            det, x, y = -det, -x, -y
        # Feasibility of (x/det, y/det) checked in integers.
        if x < 0 or y < 0:
            continue
        if all(k1 * x + k2 * y <= kc * det for k1, k2, kc in rows):
            found.add((Fraction(x, det), Fraction(y, det)))
    return sort_ccw(DofPoint(d1, d2) for d1, d2 in found)


def minimal_halfspaces(
    halfspaces: Sequence[HalfSpace], vertices: Sequence[DofPoint]
) -> tuple[HalfSpace, ...]:
    """Constraints tight at two or more vertices, first occurrence kept."""
    kept: list[HalfSpace] = []
    for h in halfspaces:
        if h in kept:
            continue
        # Normalized duplicates (e.g. 2*d1 <= 2 vs d1 <= 1) count once.
        if any(_same_line(h, k) for k in kept):
            continue
        if sum(1 for v in vertices if h.tight_at(v)) >= 2:
            kept.append(h)
    return tuple(kept)


def _same_line(h: HalfSpace, g: HalfSpace) -> bool:
    if h.a1 * g.a2 != h.a2 * g.a1:
        return False
    ratio = g.a1 / h.a1 if h.a1 != 0 else g.a2 / h.a2
    return ratio > 0 and g.c == ratio * h.c


def supporting_halfspaces(vertices: Sequence[DofPoint]) -> list[HalfSpace]:
    """Edge half-spaces of the convex hull of CCW-sorted ``vertices``.

    Each is scaled so its first nonzero coefficient has magnitude one.
    """
    pts = list(vertices)
    out = []
    for i, p in enumerate(pts):
        q = pts[(i + 1) % len(pts)]
        # Outward normal of edge p -> q for a CCW polygon.
        a1, a2 = q.d2 - p.d2, p.d1 - q.d1
        if a1 == 0 and a2 == 0:
            continue
        scale = abs(a1) if a1 != 0 else abs(a2)
        a1, a2 = a1 / scale, a2 / scale
        out.append(HalfSpace(a1, a2, a1 * p.d1 + a2 * p.d2))
    return out


def same_polytope(a: DofRegion, b: DofRegion) -> bool:
    return set(a.vertices) == set(b.vertices)


def contains(region: DofRegion, p: DofPoint) -> bool:
    return all(h.satisfied_by(p) for h in region.halfspaces)


def is_subset(a: DofRegion, b: DofRegion) -> bool:
    """``a ⊆ b``; checking a's vertices suffices by convexity."""
    return all(contains(b, v) for v in a.vertices)


def weighted_sum_max(region: DofRegion, w1: Rational, w2: Rational) -> Fraction:
    """Maximum of ``w1*d1 + w2*d2`` over the region (attained at a vertex)."""
    w1, w2 = _as_fraction(w1), _as_fraction(w2)
    if w1 < 0 or w2 < 0:
        raise ValueError("weights must be nonnegative")
    return max(w1 * v.d1 + w2 * v.d2 for v in region.vertices)


# ---------------------------------------------------------------------------
# Formatting and JSON
# ---------------------------------------------------------------------------


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_rational(x: Rational) -> str:
    """Canonical ``"p/q"`` string; ``q > 0`` and ``gcd(p, q) = 1``."""
    x = _as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or an integer string.  Decimal notation is refused."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"not a rational 'p/q' or integer: {text!r}") from None
    if q == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(p, q)


def format_halfspace(h: HalfSpace) -> str:
    """Human-readable form, e.g. ``d1 + 2 d2 <= 3`` or ``d1 >= 0``."""
    if h.c == 0 and h.a1 <= 0 and h.a2 <= 0:
        return _linear(-h.a1, -h.a2) + " >= 0"
    return _linear(h.a1, h.a2) + f" <= {_fmt(h.c)}"


def _linear(a1: Fraction, a2: Fraction) -> str:
    terms = []
    for coef, var in ((a1, "d1"), (a2, "d2")):
        if coef == 0:
            continue
        mag = abs(coef)
        body = var if mag == 1 else f"{_fmt(mag)} {var}"
        if not terms:
            terms.append(body if coef > 0 else f"-{body}")
        else:
            terms.append(("+ " if coef > 0 else "- ") + body)
    return " ".join(terms)


def region_to_dict(region: DofRegion) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": region.config.to_dict(),
        "scenario": region.scenario,
        "halfspaces": [
            {"a1": format_rational(h.a1), "a2": format_rational(h.a2), "c": format_rational(h.c)}
            for h in region.halfspaces
        ],
        "vertices": [[format_rational(v.d1), format_rational(v.d2)] for v in region.vertices],
    }


def region_to_json(region: DofRegion) -> str:
    return json.dumps(region_to_dict(region), indent=2) + "\n"


def region_from_dict(data: dict) -> DofRegion:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}")
    if data["scenario"] not in SCENARIOS:
        raise ValueError(f"unknown scenario {data['scenario']!r}")
    halfspaces = tuple(
        HalfSpace(parse_rational(h["a1"]), parse_rational(h["a2"]), parse_rational(h["c"]))
        for h in data["halfspaces"]
    )
    vertices = tuple(DofPoint(parse_rational(a), parse_rational(b)) for a, b in data["vertices"])
    return DofRegion(AntennaConfig.from_dict(data["config"]), data["scenario"], halfspaces, vertices)


def region_from_json(text: str) -> DofRegion:
    return region_from_dict(json.loads(text))


def format_table(region: DofRegion) -> str:
    c = region.config
    lines = [
        f"scenario: {region.scenario}",
        f"(M1, M2, N1, N2) = ({c.m1}, {c.m2}, {c.n1}, {c.n2})",
        "half-spaces:",
    ]
    width = max(len(h.label) for h in region.halfspaces)
    for h in region.halfspaces:
        lines.append(f"  {h.label:<{width}}  {format_halfspace(h)}")
    lines.append("vertices:")
    for v in region.vertices:
        lines.append(f"  {_fmt(v.d1):>6}  {_fmt(v.d2):>6}")
    return "\n".join(lines) + "\n"
