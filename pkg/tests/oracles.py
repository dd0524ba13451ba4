"""Independent reference computations used by the tests.

Nothing here imports the polygon machinery of ``dof_atlas.regions``; the
oracles work on plain ``(a1, a2, c)`` Fraction triples.
"""

from fractions import Fraction
from itertools import combinations


def asym_lines(m1, m2, n1, n2, n1prime):
    """Constraint triples of the asymmetric-regime region, typed out by hand."""
    return [
        (Fraction(-1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(-1), Fraction(0)),
        (Fraction(1), Fraction(0), Fraction(n1prime)),
        (Fraction(0), Fraction(1), Fraction(m2)),
        (Fraction(1), Fraction(n1prime + m2 - n2, m2), Fraction(n1prime)),
    ]


def crc_full_lines(m1, m2, n1, n2):
    n1p = min(n1, m1 + m2)
    lines = [
        (Fraction(-1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(-1), Fraction(0)),
        (Fraction(1), Fraction(0), Fraction(n1p)),
        (Fraction(0), Fraction(1), Fraction(min(m2, n2))),
    ]
    if n1 <= n2:
        lines.append((Fraction(1, min(n1, m2)), Fraction(1, min(n2, m2)), Fraction(n1p, min(n1, m2))))
    elif min(m1 + m2, n1) > n2 > m2:
        lines.append((Fraction(1), Fraction(n1p + m2 - n2, m2), Fraction(n1p)))
    else:
        lines.append((Fraction(1, n1p), Fraction(1, min(n2, m1 + m2)), Fraction(1)))
    return lines


def brute_force_vertices(lines):
    """Every feasible pairwise intersection (Cramer's rule), as a set of pairs."""
    lines = list(lines) + [(Fraction(-1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(-1), Fraction(0))]
    out = set()
    for (a, b, c), (d, e, f) in combinations(lines, 2):
        det = a * e - b * d
        if det == 0:
            continue
        x = (c * e - b * f) / det
        y = (a * f - c * d) / det
        if all(p * x + q * y <= r for p, q, r in lines):
            out.add((x, y))
    return out


def grid_weighted_max(lines, w1, w2, step):
    """Max of w1*d1 + w2*d2 over feasible points of a rational grid."""
    xmax = min(r / p for p, q, r in lines if p > 0 and q == 0)
    ymax = min(r / q for p, q, r in lines if q > 0 and p == 0)
    best = Fraction(0)
    i = 0
    while i * step <= xmax:
        x = i * step
        j = 0
        while j * step <= ymax:
            y = j * step
            if all(p * x + q * y <= r for p, q, r in lines):
                best = max(best, w1 * x + w2 * y)
            j += 1
        i += 1
    return best
