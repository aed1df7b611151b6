"""Integer-relation detection via exact-integer LLL.

One engine serves three jobs: raw relations among real/complex numbers,
minimal polynomials, and expressing a number over a known basis with rational
coefficients. The reduction is the all-integer variant (Gram determinants d_i
and scaled Gram-Schmidt coefficients lambda_{i,j}), so no precision is lost
inside the lattice step itself; floating point only enters through the scaled
input column and the residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath as mp

from .bignum import BigComplex, BigReal, guarded
from .errors import PrecisionError, RelationError

# Lovasz parameter delta = SWAP_P / SWAP_Q; 0.99 trades a little speed for
# shorter vectors, which matters when the true relation is barely inside the
# detection radius.
SWAP_P = 99
SWAP_Q = 100

# Residual must beat 10^(-TIGHT*prec) while the relation norm stays below
# 10^(LOOSE*prec); the gap between the two is the spurious-relation margin.
TIGHT = 0.7
LOOSE = 0.3


def scaling_guard(prec: int) -> int:
    return max(20, prec // 10)


# ---------------------------------------------------------------------------
# exact-integer LLL


def lll_reduce(rows: Sequence[Sequence[int]], delta=(SWAP_P, SWAP_Q)) -> list[list[int]]:
    """LLL-reduce integer row vectors; returns a new list of reduced rows.

    All arithmetic is exact. Input rows must be linearly independent.
    """
    p, q = delta
    b = [list(r) for r in rows]
    n = len(b)
    if n == 0:
        return []
    d = [1] * (n + 1)  # d[i] = Gram determinant of first i rows, d[0] = 1
    lam = [[0] * n for _ in range(n)]

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lam_ = lam[k][k - 1]
        bb = (d[k - 1] * d[k + 1] + lam_ * lam_) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lam_ * t) // d[k]
            lam[i][k - 1] = (bb * t + lam_ * lam[i][k]) // d[k + 1]
        d[k] = bb

    kmax = 0
    # incremental Gram-Schmidt for row 0
    d[1] = dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("zero row in lattice basis")
    k = 1
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("rows not linearly independent")
                    d[k + 1] = u
        red(k, k - 1)
        if q * d[k + 1] * d[k - 1] < p * d[k] * d[k] - q * lam[k][k - 1] ** 2:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


# ---------------------------------------------------------------------------
# relation detection


@dataclass(frozen=True)
class RelationResult:
    """Integers m_0..m_n with m_0*x_0 - sum_{j>=1} m_j*x_j ~ 0."""
    coefficients: tuple
    residual: mp.mpf
    precision: int

    def __iter__(self):
        return iter(self.coefficients)


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, ascending coefficients, content 1, positive leading
    coefficient."""
    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        g = math.gcd(*(abs(x) for x in c)) if any(c) else 1
        if g == 0:
            g = 1
        c = [x // g for x in c]
        if c[-1] < 0:
            c = [-x for x in c]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = mp.mpf(0) if not isinstance(x, (mp.mpc, complex)) else mp.mpc(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_exact(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative_coeffs(self) -> tuple:
        """Exact derivative coefficients (NOT content-normalized, so they stay
        usable inside Newton quotients)."""
        return tuple(i * c for i, c in enumerate(self.coeffs))[1:] or (0,)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                x = "x" if i == 1 else f"x^{i}"
                terms.append(x if c == 1 else f"-{x}" if c == -1 else f"{c}{x}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def _as_mpc(x) -> tuple[mp.mpc, int | None]:
    if isinstance(x, BigReal):
        return mp.mpc(x.value), x.prec
    if isinstance(x, BigComplex):
        return x.value, x.prec
    return mp.mpc(x), None


def _prepare(xs, precision):
    raw, precs = [], []
    for x in xs:
        if isinstance(x, (BigReal, BigComplex)):
            raw.append(x.value)
            precs.append(x.prec)
        else:
            raw.append(x)
    if precision is None:
        if not precs:
            raise ValueError("precision required for raw inputs")
        precision = min(precs)
    # conversion must happen above working precision or mpc() rounds the
    # inputs to the ambient (possibly default-15-digit) context
    with mp.workdps(guarded(precision) + 15):
        vals = [mp.mpc(v) for v in raw]
    return vals, precision


def _candidate_rows(vals, prec):
    """Relation lattice: identity block plus one (real) or two (complex)
    scaled value columns."""
    g = scaling_guard(prec)
    n = len(vals)
    with mp.workdps(prec + 10):
        scale = mp.mpf(10) ** (prec - g)
        complex_input = any(abs(v.imag) > mp.mpf(10) ** (-(prec - g)) for v in vals)
        rows = []
        for i, v in enumerate(vals):
            row = [1 if j == i else 0 for j in range(n)]
            row.append(int(mp.nint(v.real * scale)))
            if complex_input:
                row.append(int(mp.nint(v.imag * scale)))
            rows.append(row)
    return rows, complex_input


def _scan_reduced(reduced, vals, n, prec, max_height_digits):
    """Pick the smallest acceptable relation among reduced rows.

    Junk relations (they always exist) have height around 10^((prec-g)/n);
    accepted relations must sit several orders of magnitude below that floor,
    on top of the blanket 10^(LOOSE*prec) cap. When the floor leaves no room,
    nothing is accepted and the caller sees an honest None.
    """
    junk_floor = (prec - scaling_guard(prec)) / n
    cap_digits = junk_floor - max(5.0, 0.15 * junk_floor)
    with mp.workdps(prec + 10):
        tight = mp.mpf(10) ** (-TIGHT * prec)
        loose = min(mp.mpf(10) ** (LOOSE * prec), mp.mpf(10) ** cap_digits)
        height_cap = (mp.mpf(10) ** max_height_digits if max_height_digits else None)
        best = None
        for row in reduced:
            coeffs = row[:n]
            if not any(coeffs):
                continue
            norm = mp.sqrt(mp.fsum(mp.mpf(c) ** 2 for c in coeffs))
            if norm >= loose:
                continue
            if height_cap is not None and max(abs(c) for c in coeffs) > height_cap:
                continue
            resid = abs(mp.fsum((c * v for c, v in zip(coeffs, vals)), absolute=False))
            if resid >= tight:
                continue
            if best is None or norm < best[0]:
                best = (norm, coeffs, resid)
    return best


def _normalize(coeffs):
    g = math.gcd(*(abs(c) for c in coeffs))
    if g > 1:
        coeffs = [c // g for c in coeffs]
    lead = next(c for c in coeffs if c != 0)
    if lead < 0:
        coeffs = [-c for c in coeffs]
    return coeffs


def integer_relation(xs, precision: int | None = None,
                     max_height_digits: int | None = None) -> RelationResult | None:
    """Find integers m with m_0*x_0 = sum_{j>=1} m_j*x_j, or None.

    Refuses to run when the precision cannot support the requested coefficient
    height (roughly height_digits * count, plus margin), since an undersized
    lattice happily produces junk relations.
    """
    vals, prec = _prepare(xs, precision)
    n = len(vals)
    if n < 2:
        raise ValueError("need at least two numbers")
    if max_height_digits is not None:
        need = math.ceil(1.1 * max_height_digits * n) + scaling_guard(prec)
        if prec < need:
            raise PrecisionError(
                f"precision {prec} below ~{need} required for height "
                f"10^{max_height_digits} over {n} numbers")
    rows, _ = _candidate_rows(vals, prec)
    reduced = lll_reduce(rows)
    best = _scan_reduced(reduced, vals, n, prec, max_height_digits)
    if best is None:
        return None
    coeffs = _normalize(best[1])
    # store in the m_0*x_0 - sum m_j*x_j convention
    signed = [coeffs[0]] + [-c for c in coeffs[1:]]
    with mp.workdps(prec + 10):
        resid = abs(mp.fsum((c * v for c, v in zip(coeffs, vals)), absolute=False))
    return RelationResult(tuple(signed), resid, prec)


def raw_relation(xs, precision: int | None = None) -> RelationResult:
    """Best-effort relation with NO acceptance gates, for comparative scoring.

    Always returns the minimum-norm nonzero row of the reduced lattice. When
    no true relation exists the norm sits near the junk floor 10^((prec-g)/n),
    so score ratios between candidate hypotheses stay meaningful even though
    the losing rows would never pass integer_relation's gates.
    """
    vals, prec = _prepare(xs, precision)
    n = len(vals)
    if n < 2:
        raise ValueError("need at least two numbers")
    rows, _ = _candidate_rows(vals, prec)
    reduced = lll_reduce(rows)
    best = None
    with mp.workdps(prec + 10):
        for row in reduced:
            coeffs = row[:n]
            if not any(coeffs):
                continue
            norm = mp.sqrt(mp.fsum(mp.mpf(c) ** 2 for c in coeffs))
            if best is None or norm < best[0]:
                best = (norm, coeffs)
        coeffs = _normalize(best[1])
        signed = [coeffs[0]] + [-c for c in coeffs[1:]]
        resid = abs(mp.fsum((c * v for c, v in zip(coeffs, vals)), absolute=False))
    return RelationResult(tuple(signed), resid, prec)


def relation_norm(rel: RelationResult) -> mp.mpf:
    return mp.sqrt(mp.fsum(mp.mpf(c) ** 2 for c in rel.coefficients))


def verify_relation(rel: RelationResult, xs, precision: int) -> bool:
    """Re-check a relation against (higher-precision) values of the same
    numbers; threshold scales with the verification precision."""
    vals, _ = _prepare(xs, precision)
    m = rel.coefficients
    with mp.workdps(precision + 10):
        resid = abs(mp.fsum([m[0] * vals[0]] + [-c * v for c, v in zip(m[1:], vals[1:])],
                            absolute=False))
        bound = mp.mpf(10) ** (-TIGHT * precision) * max(1, max(abs(c) for c in m))
    return resid < bound


def minimal_polynomial(a, max_degree: int, precision: int | None = None
                       ) -> IntPolynomial | None:
    """Lowest-degree integer polynomial vanishing at `a`, or None.

    Searches degrees in ascending order, so an accepted polynomial admits no
    lower-degree integer factor vanishing at `a`; together with the residual
    gate that is the irreducibility guarantee for genuinely algebraic input.
    """
    vals, prec = _prepare([a], precision)
    val = vals[0]
    with mp.workdps(guarded(prec)):
        powers = [mp.mpc(1)]
        for _ in range(max_degree):
            powers.append(powers[-1] * val)
        for deg in range(1, max_degree + 1):
            xs = powers[:deg + 1]
            rows, _ = _candidate_rows(xs, prec)
            reduced = lll_reduce(rows)
            best = _scan_reduced(reduced, xs, deg + 1, prec, None)
            if best is None:
                continue
            coeffs = _normalize(best[1])
            if coeffs[-1] == 0:
                continue  # degenerate: really a lower-degree relation
            poly = IntPolynomial(tuple(coeffs))
            # confirmation pass at the input's native precision
            if abs(poly(val)) < mp.mpf(10) ** (-0.8 * prec) * max(
                    abs(c) for c in poly.coeffs):
                return poly
    return None


def express_in_basis(a, basis, denominator_bound: int | None = None,
                     precision: int | None = None):
    """Rational coefficients q with a = sum q_j * basis_j, or None.

    Returns (list of Fraction, residual). Raises RelationError if the found
    relation does not involve `a` at all (m_0 = 0).
    """
    rel = integer_relation([a] + list(basis), precision=precision)
    if rel is None:
        return None
    m = rel.coefficients
    if m[0] == 0:
        raise RelationError("relation does not involve the target number")
    if denominator_bound is not None and abs(m[0]) > denominator_bound:
        return None
    qs = [Fraction(mj, m[0]) for mj in m[1:]]
    return qs, rel.residual
