"""Weyl-Heisenberg displacement operators, symplectic unitaries and overlap
tables.

Conventions, fixed once here and relied on everywhere downstream:
  X|r> = |r+1>,  Z|r> = w^r |r>,  w = exp(2 pi i/d),  tau = -exp(i pi/d),
  D_p = tau^(p1 p2) X^p1 Z^p2, so (D_p)_{r,s} = tau^(p1 p2 + 2 p2 s) for
  r = s + p1 mod d. Then D_p D_q = tau^<p,q> D_{p+q} with <p,q> = p2 q1 - p1 q2,
  and D_p^dagger = D_{-p}. Indices live mod d' (= d for odd d, 2d for even d).

Overlaps are chi_p = Tr(D_p Pi) = <psi|D_p|psi> for Pi = |psi><psi|; the
adjoint index flip chi_{-p} = conj(chi_p) is what operator reconstruction
uses internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .bignum import CMatrix, CVector, format_decimal, guarded, parse_decimal
from .modring import ModMatrix, dprime

# Memo caches. Construction is deterministic and idempotent, so a racing
# double-insert is harmless; CPython dict assignment is atomic.
_DISP_CACHE: dict = {}
_SYMP_CACHE: dict = {}
_TAU_CACHE: dict = {}


def tau_powers(d: int, prec: int) -> list:
    """[tau^0 .. tau^{2d-1}] at guarded precision, cached."""
    key = (d, prec)
    tab = _TAU_CACHE.get(key)
    if tab is None:
        with mp.workdps(guarded(prec)):
            t = -mp.expjpi(mp.mpf(1) / d)
            tab = [mp.mpc(1)]
            for _ in range(2 * d - 1):
                tab.append(tab[-1] * t)
        _TAU_CACHE[key] = tab = tuple(tab)
    return tab


@dataclass(frozen=True)
class DisplacementOp:
    p: tuple
    d: int
    precision: int

    @property
    def matrix(self) -> CMatrix:
        key = (self.p, self.d, self.precision)
        m = _DISP_CACHE.get(key)
        if m is None:
            _DISP_CACHE[key] = m = _displacement_matrix(self.p, self.d, self.precision)
        return m

    def dagger_index(self) -> tuple:
        dp = dprime(self.d)
        return ((-self.p[0]) % dp, (-self.p[1]) % dp)


@dataclass(frozen=True)
class CliffordOp:
    """Unitary U_F, or the antiunitary U_{F.J} composed with complex
    conjugation when antiunitary=True."""
    F: ModMatrix
    d: int
    precision: int
    antiunitary: bool = False

    @property
    def matrix(self) -> CMatrix:
        key = (self.F.entries, self.F.m, self.d, self.precision, self.antiunitary)
        m = _SYMP_CACHE.get(key)
        if m is None:
            G = self.F * _jmat(self.d) if self.antiunitary else self.F
            _SYMP_CACHE[key] = m = _symplectic_matrix(G, self.d, self.precision)
        return m

    def apply(self, v: CVector) -> CVector:
        if self.antiunitary:
            v = v.conj()
        return self.matrix.matvec(v)

    def conjugate_matrix(self, A: CMatrix) -> CMatrix:
        """U A U^{-1} (with the entrywise conjugation first if antiunitary)."""
        if self.antiunitary:
            with mp.workdps(guarded(A.prec)):
                A = CMatrix([[mp.conj(e) for e in row] for row in A.rows], A.prec)
        U = self.matrix
        return U * A * U.dagger()


def _displacement_matrix(p: tuple, d: int, prec: int) -> CMatrix:
    taus = tau_powers(d, prec)
    p1, p2 = p
    n = 2 * d
    rows = [[mp.mpc(0)] * d for _ in range(d)]
    for s in range(d):
        rows[(s + p1) % d][s] = taus[(p1 * p2 + 2 * p2 * s) % n]
    return CMatrix(rows, prec)


def displacement(p: tuple, d: int, precision: int) -> DisplacementOp:
    if d < 4:
        raise ValueError("d must be >= 4")
    dp = dprime(d)
    return DisplacementOp((p[0] % dp, p[1] % dp), d, precision)


def _jmat(d: int) -> ModMatrix:
    return ModMatrix(1, 0, 0, -1, dprime(d))


def _require_modulus(F: ModMatrix, d: int) -> ModMatrix:
    """Matrices must arrive mod d'. A mod-d matrix for even d has no canonical
    mod-2d lift, so that is the caller's mistake, not something to guess."""
    dp = dprime(d)
    if F.m != dp:
        raise ValueError(f"matrix modulus {F.m} != d' = {dp}")
    return F


def _canonical_scale(d: int, prec: int):
    """e^{i theta}/sqrt(d) with the phase that puts all entries in Q(tau):
    1, i, e^{i pi/4} for d = 1, 3 mod 4 and even d respectively."""
    with mp.workdps(guarded(prec)):
        if d % 2 == 0:
            ph = mp.expjpi(mp.mpf(1) / 4)
        elif d % 4 == 1:
            ph = mp.mpc(1)
        else:
            ph = mp.mpc(0, 1)
        return ph / mp.sqrt(d)


def _uf_direct(F: ModMatrix, d: int, prec: int) -> CMatrix:
    """Direct formula, valid iff gcd(beta, d') = 1."""
    dp = dprime(d)
    a, b, c, dd = F.entries
    binv = pow(b, -1, dp)
    taus = tau_powers(d, prec)
    scale = _canonical_scale(d, prec)
    n = 2 * d
    with mp.workdps(guarded(prec)):
        rows = [[scale * taus[(binv * (dd * r * r - 2 * r * s + a * s * s)) % n]
                 for s in range(d)] for r in range(d)]
    return CMatrix(rows, prec)


def split_symplectic(F: ModMatrix) -> tuple[ModMatrix, ModMatrix]:
    """Write F = A*B with gcd(beta(A), m) = gcd(beta(B), m) = 1.

    Right factors [[0,-1],[1,k]] are tried first; they leave beta(A) = alpha(F)
    and so fail whenever gcd(alpha, m) > 1 too, in which case a left factor
    [[0,-1],[1,k]] works: beta(B) = k*beta + delta hits a unit mod m for some
    k because delta is a unit mod every prime dividing gcd(beta, m).
    """
    m = F.m
    for k in range(m):
        right = ModMatrix(0, -1, 1, k, m)
        left_part = F * right.inv()
        if math.gcd(left_part.b, m) == 1:
            return left_part, right
    for k in range(m):
        left = ModMatrix(0, -1, 1, k, m)
        right_part = left.inv() * F
        if math.gcd(right_part.b, m) == 1:
            return left, right_part
    raise AssertionError(f"no two-factor splitting for {F!r}")  # unreachable


def _symplectic_matrix(F: ModMatrix, d: int, prec: int) -> CMatrix:
    dp = dprime(d)
    if math.gcd(F.b, dp) == 1:
        return _uf_direct(F, d, prec)
    A, B = split_symplectic(F)
    return _uf_direct(A, d, prec) * _uf_direct(B, d, prec)


def symplectic_unitary(F: ModMatrix, d: int, precision: int) -> CliffordOp:
    F = _require_modulus(F, d)
    if F.det() != 1 % F.m:
        raise ValueError("symplectic matrix must have det 1 mod d'")
    return CliffordOp(F, d, precision)


def antiunitary_extend(F: ModMatrix, d: int, precision: int) -> CliffordOp:
    F = _require_modulus(F, d)
    if F.det() != (-1) % F.m:
        raise ValueError("antisymplectic matrix must have det -1 mod d'")
    return CliffordOp(F, d, precision, antiunitary=True)


# ---------------------------------------------------------------------------
# overlaps


class OverlapTable:
    """chi_p over p in (Z/d')^2; chi_0 is pinned to exactly 1 for tables
    sourced from a state vector."""

    __slots__ = ("d", "precision", "values")

    def __init__(self, d: int, precision: int, values: dict, normalized: bool = True):
        self.d = d
        self.precision = precision
        dp = dprime(d)
        if len(values) != dp * dp:
            raise ValueError(f"need {dp * dp} entries, got {len(values)}")
        if normalized:
            z0 = values[(0, 0)]
            with mp.workdps(guarded(precision)):
                values = {p: v / z0 for p, v in values.items()}
            values[(0, 0)] = mp.mpc(1)
        self.values = values

    def chi(self, p: tuple):
        dp = dprime(self.d)
        return self.values[(p[0] % dp, p[1] % dp)]

    def items(self):
        return self.values.items()

    def abs_squared_multiset(self, digits: int = 30) -> tuple:
        with mp.workdps(guarded(self.precision)):
            return tuple(sorted(mp.nstr(abs(v) ** 2, digits) for v in
                                self.values.values()))

    def sic_error(self):
        """max over p not = 0 mod d of |(d+1)|chi_p|^2 - 1|."""
        d = self.d
        with mp.workdps(guarded(self.precision)):
            worst = mp.mpf(0)
            for (p1, p2), v in self.values.items():
                if p1 % d == 0 and p2 % d == 0:
                    continue
                worst = max(worst, abs((d + 1) * abs(v) ** 2 - 1))
        return worst

    def transported(self, F: ModMatrix) -> "OverlapTable":
        """Overlaps of V Pi V^{-1} for V the (anti)unitary attached to F:
        chi'_q = chi_{F^{-1} q} for det +1, conj(chi_{F^{-1} q}) for det -1."""
        dp = dprime(self.d)
        F = _require_modulus(F, self.d)
        det = F.det()
        anti = det == (-1) % dp
        if not anti and det != 1 % dp:
            raise ValueError("det must be +-1 mod d'")
        Finv = F.inv()
        out = {}
        with mp.workdps(guarded(self.precision)):
            for q in self.values:
                src = Finv.apply(q)
                v = self.values[src]
                out[q] = mp.conj(v) if anti else v
        return OverlapTable(self.d, self.precision, out, normalized=False)

    def displaced(self, s: tuple) -> "OverlapTable":
        """Overlaps of D_s Pi D_s^dagger: chi'_q = w^{<q,s>} chi_q."""
        d, dp = self.d, dprime(self.d)
        taus = tau_powers(d, self.precision)
        out = {}
        with mp.workdps(guarded(self.precision)):
            for (q1, q2), v in self.values.items():
                e = (2 * (q2 * s[0] - q1 * s[1])) % (2 * d)
                out[(q1, q2)] = taus[e] * v
        return OverlapTable(d, self.precision, out, normalized=False)

    def save(self, path: str):
        lines = [f"SIC-OVERLAPS v1 d={self.d} prec={self.precision}"]
        dp = dprime(self.d)
        for p1 in range(dp):
            for p2 in range(dp):
                v = self.values[(p1, p2)]
                re = format_decimal(v.real, self.precision)
                im = format_decimal(v.imag, self.precision)
                lines.append(f"{p1} {p2} {re} {im}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str) -> "OverlapTable":
        with open(path) as fh:
            header = fh.readline().split()
            if header[:2] != ["SIC-OVERLAPS", "v1"]:
                raise ValueError("not an overlap table file")
            fields = dict(kv.split("=") for kv in header[2:])
            d, prec = int(fields["d"]), int(fields["prec"])
            values = {}
            with mp.workdps(guarded(prec)):
                for line in fh:
                    if not line.strip():
                        continue
                    p1, p2, re, im = line.split()
                    values[(int(p1), int(p2))] = mp.mpc(parse_decimal(re, prec),
                                                        parse_decimal(im, prec))
        return cls(d, prec, values, normalized=False)


def overlaps(fid, d: int | None = None, precision: int | None = None) -> OverlapTable:
    """chi_p = Tr(D_p Pi) for all p mod d'. Accepts a Fiducial or a CVector."""
    if hasattr(fid, "vector"):
        v, d, precision = fid.vector, fid.d, fid.precision
    else:
        v = fid
        if d is None:
            d = len(v)
        if precision is None:
            precision = v.prec
    dp = dprime(d)
    taus = tau_powers(d, precision)
    n = 2 * d
    values = {}
    with mp.workdps(guarded(precision)):
        psi = v.entries
        conj_psi = [mp.conj(x) for x in psi]
        for p1 in range(dp):
            for p2 in range(dp):
                acc = mp.fsum((conj_psi[(s + p1) % d] * taus[(p1 * p2 + 2 * p2 * s) % n]
                               * psi[s] for s in range(d)), absolute=False)
                values[(p1, p2)] = acc
    return OverlapTable(d, precision, values, normalized=True)


def overlaps_of_matrix(A: CMatrix, d: int | None = None,
                       precision: int | None = None) -> OverlapTable:
    """chi_p = Tr(D_p A) for a general operator (no chi_0 normalization)."""
    if d is None:
        d = A.nrows
    if precision is None:
        precision = A.prec
    dp = dprime(d)
    taus = tau_powers(d, precision)
    n = 2 * d
    values = {}
    with mp.workdps(guarded(precision)):
        for p1 in range(dp):
            for p2 in range(dp):
                # Tr(D_p A) = sum_s (D_p)_{s+p1, s} A_{s, s+p1}
                acc = mp.fsum((taus[(p1 * p2 + 2 * p2 * s) % n]
                               * A.rows[s][(s + p1) % d] for s in range(d)),
                              absolute=False)
                values[(p1, p2)] = acc
    return OverlapTable(d, precision, values, normalized=False)


def reconstruct_operator(table: OverlapTable) -> CMatrix:
    """A = (1/d) sum_{p in (Z/d)^2} chi_{-p} D_p, one period only."""
    d, prec = table.d, table.precision
    dp = dprime(d)
    taus = tau_powers(d, prec)
    n = 2 * d
    with mp.workdps(guarded(prec)):
        rows = [[mp.mpc(0)] * d for _ in range(d)]
        for p1 in range(d):
            for p2 in range(d):
                c = table.values[((-p1) % dp, (-p2) % dp)]
                for s in range(d):
                    rows[(s + p1) % d][s] += c * taus[(p1 * p2 + 2 * p2 * s) % n]
        inv_d = 1 / mp.mpf(d)
        rows = [[e * inv_d for e in row] for row in rows]
    return CMatrix(rows, prec)
