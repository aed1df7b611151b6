"""Arbitrary-precision scalars, vectors and dense matrices on top of mpmath.

Precision is tracked in decimal digits everywhere user-facing. The wrapped
scalar types (BigReal / BigComplex) carry a claimed-accurate digit count that
shrinks by OP_GUARD_LOSS per arithmetic operation; heavy inner loops elsewhere
in the package work on raw mpmath numbers inside an explicit working-precision
context instead, which is what CVector / CMatrix store.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

import mpmath as mp

from .errors import SingularMatrixError

# Per-operation precision loss charged to wrapped scalars. Generous for
# non-cancelling operations; catastrophic cancellation is the caller's
# problem, as usual.
OP_GUARD_LOSS = 2

# Pipeline stages request 20% more digits than the consumer needs.
GUARD_FRACTION = 0.2
MIN_GUARD_DIGITS = 10


def guarded(digits: int) -> int:
    """Working digits for a stage that must deliver `digits` to its consumer."""
    return digits + max(MIN_GUARD_DIGITS, math.ceil(GUARD_FRACTION * digits))


def working(digits: int):
    """mpmath context manager at guarded working precision."""
    return mp.workdps(guarded(digits))


Scalar = Union[int, "BigReal", "BigComplex"]


@dataclass(frozen=True)
class BigReal:
    value: mp.mpf
    prec: int

    @classmethod
    def make(cls, x, prec: int) -> "BigReal":
        with mp.workdps(guarded(prec)):
            return cls(mp.mpf(x), prec)

    def _binop(self, other, fn) -> "BigReal":
        o = other if isinstance(other, BigReal) else BigReal.make(other, self.prec)
        prec = min(self.prec, o.prec) - OP_GUARD_LOSS
        with mp.workdps(guarded(prec)):
            return BigReal(fn(self.value, o.value), prec)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    def __truediv__(self, other):
        o = other if isinstance(other, BigReal) else BigReal.make(other, self.prec)
        if abs(o.value) < mp.mpf(10) ** (-o.prec):
            raise ZeroDivisionError("divisor below precision floor")
        return self._binop(o, lambda a, b: a / b)

    def __neg__(self):
        with mp.workdps(guarded(self.prec)):
            return BigReal(-self.value, self.prec)

    def __float__(self):
        return float(self.value)

    def to_decimal(self) -> str:
        return format_decimal(self.value, self.prec)


@dataclass(frozen=True)
class BigComplex:
    value: mp.mpc
    prec: int

    @classmethod
    def make(cls, x, prec: int) -> "BigComplex":
        with mp.workdps(guarded(prec)):
            return cls(mp.mpc(x), prec)

    @property
    def real(self) -> BigReal:
        return BigReal(self.value.real, self.prec)

    @property
    def imag(self) -> BigReal:
        return BigReal(self.value.imag, self.prec)

    def conjugate(self) -> "BigComplex":
        # even conj/neg round to the ambient context in mpmath
        with mp.workdps(guarded(self.prec)):
            return BigComplex(mp.conj(self.value), self.prec)

    def _binop(self, other, fn) -> "BigComplex":
        o = other if isinstance(other, BigComplex) else BigComplex.make(other, self.prec)
        prec = min(self.prec, o.prec) - OP_GUARD_LOSS
        with mp.workdps(guarded(prec)):
            return BigComplex(fn(self.value, o.value), prec)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    def __truediv__(self, other):
        o = other if isinstance(other, BigComplex) else BigComplex.make(other, self.prec)
        if abs(o.value) < mp.mpf(10) ** (-o.prec):
            raise ZeroDivisionError("divisor below precision floor")
        return self._binop(o, lambda a, b: a / b)

    def __neg__(self):
        with mp.workdps(guarded(self.prec)):
            return BigComplex(-self.value, self.prec)

    def __abs__(self) -> BigReal:
        with mp.workdps(guarded(self.prec)):
            return BigReal(abs(self.value), self.prec)

    def to_decimal_pair(self) -> tuple[str, str]:
        return (format_decimal(self.value.real, self.prec),
                format_decimal(self.value.imag, self.prec))


def format_decimal(x, digits: int) -> str:
    """Serialize to `digits` significant decimal digits; round-trips to the
    stated precision with parse_decimal."""
    with mp.workdps(digits + 5):
        return mp.nstr(mp.mpf(x), digits, strip_zeros=False)


def parse_decimal(s: str, digits: int) -> mp.mpf:
    with mp.workdps(guarded(digits)):
        return mp.mpf(s)


def root_of_unity(k: int, m: int, prec: int) -> BigComplex:
    """e^{2 pi i k / m} at `prec` digits."""
    if m < 1:
        raise ValueError("m must be >= 1")
    with mp.workdps(guarded(prec)):
        # expjpi evaluates exp(i*pi*x) accurately for rational x
        return BigComplex(mp.expjpi(mp.mpf(2 * (k % m)) / m), prec)


def tau(d: int, prec: int) -> BigComplex:
    """tau = -e^{i pi / d}, the 2d-th root of unity fixed by the displacement
    convention (equals a primitive d-th root for odd d)."""
    with mp.workdps(guarded(prec)):
        return BigComplex(-mp.expjpi(mp.mpf(1) / d), prec)


def tau_power_table(d: int, prec: int) -> list[mp.mpc]:
    """[tau^0, ..., tau^{2d-1}] as raw mpc at guarded precision."""
    with mp.workdps(guarded(prec)):
        t = -mp.expjpi(mp.mpf(1) / d)
        out = [mp.mpc(1)]
        for _ in range(2 * d - 1):
            out.append(out[-1] * t)
        return out


class CVector:
    """Dense complex vector with uniform declared precision.

    Entries are raw mpmath numbers; wrap via entry() when a tracked scalar is
    wanted.
    """

    __slots__ = ("entries", "prec")

    def __init__(self, entries: Iterable, prec: int):
        # convert under guarded precision: mpc() rounds to the *ambient*
        # context, which silently truncates high-precision inputs
        with mp.workdps(guarded(prec)):
            self.entries: tuple = tuple(mp.mpc(e) for e in entries)
        self.prec = prec

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int):
        return self.entries[i]

    def entry(self, i: int) -> BigComplex:
        return BigComplex(self.entries[i], self.prec)

    def norm(self):
        with mp.workdps(guarded(self.prec)):
            return mp.sqrt(mp.fsum(abs(e) ** 2 for e in self.entries))

    def dot(self, other: "CVector"):
        """Hermitian inner product, conjugate-linear in self."""
        with mp.workdps(guarded(self.prec)):
            return mp.fsum((mp.conj(a) * b for a, b in zip(self.entries, other.entries)),
                           absolute=False)

    def __add__(self, other: "CVector") -> "CVector":
        prec = min(self.prec, other.prec)
        with mp.workdps(guarded(prec)):
            return CVector([a + b for a, b in zip(self.entries, other.entries)], prec)

    def __sub__(self, other: "CVector") -> "CVector":
        prec = min(self.prec, other.prec)
        with mp.workdps(guarded(prec)):
            return CVector([a - b for a, b in zip(self.entries, other.entries)], prec)

    def scale(self, c) -> "CVector":
        with mp.workdps(guarded(self.prec)):
            c = mp.mpc(c)
            return CVector([c * a for a in self.entries], self.prec)

    def conj(self) -> "CVector":
        with mp.workdps(guarded(self.prec)):
            return CVector([mp.conj(a) for a in self.entries], self.prec)

    def max_abs(self):
        with mp.workdps(guarded(self.prec)):
            return max(abs(e) for e in self.entries)


class CMatrix:
    """Dense complex matrix, row-major, uniform declared precision."""

    __slots__ = ("rows", "nrows", "ncols", "prec")

    def __init__(self, rows: Sequence[Sequence], prec: int):
        with mp.workdps(guarded(prec)):
            self.rows: tuple = tuple(tuple(mp.mpc(e) for e in row) for row in rows)
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.ncols for r in self.rows):
            raise ValueError("ragged rows")
        self.prec = prec

    @classmethod
    def identity(cls, n: int, prec: int) -> "CMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], prec)

    def __getitem__(self, ij: tuple[int, int]):
        return self.rows[ij[0]][ij[1]]

    def entry(self, i: int, j: int) -> BigComplex:
        return BigComplex(self.rows[i][j], self.prec)

    def __mul__(self, other: "CMatrix") -> "CMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        prec = min(self.prec, other.prec)
        cols = list(zip(*other.rows))
        with mp.workdps(guarded(prec)):
            rows = [[mp.fsum(a * b for a, b in zip(row, col)) for col in cols]
                    for row in self.rows]
        return CMatrix(rows, prec)

    def matvec(self, v: CVector) -> CVector:
        prec = min(self.prec, v.prec)
        with mp.workdps(guarded(prec)):
            return CVector([mp.fsum(a * b for a, b in zip(row, v.entries))
                            for row in self.rows], prec)

    def __add__(self, other: "CMatrix") -> "CMatrix":
        prec = min(self.prec, other.prec)
        with mp.workdps(guarded(prec)):
            return CMatrix([[a + b for a, b in zip(r1, r2)]
                            for r1, r2 in zip(self.rows, other.rows)], prec)

    def __sub__(self, other: "CMatrix") -> "CMatrix":
        prec = min(self.prec, other.prec)
        with mp.workdps(guarded(prec)):
            return CMatrix([[a - b for a, b in zip(r1, r2)]
                            for r1, r2 in zip(self.rows, other.rows)], prec)

    def scale(self, c) -> "CMatrix":
        with mp.workdps(guarded(self.prec)):
            c = mp.mpc(c)
            return CMatrix([[c * a for a in row] for row in self.rows], self.prec)

    def dagger(self) -> "CMatrix":
        with mp.workdps(guarded(self.prec)):
            return CMatrix([[mp.conj(self.rows[i][j]) for i in range(self.nrows)]
                            for j in range(self.ncols)], self.prec)

    def trace(self):
        with mp.workdps(guarded(self.prec)):
            return mp.fsum(self.rows[i][i] for i in range(min(self.nrows, self.ncols)))

    def max_abs(self):
        with mp.workdps(guarded(self.prec)):
            return max(abs(e) for row in self.rows for e in row)

    def norm_inf(self):
        with mp.workdps(guarded(self.prec)):
            return max(mp.fsum(abs(e) for e in row) for row in self.rows)


class LinearSolution(NamedTuple):
    x: CVector
    residual: mp.mpf      # max-norm of Bx - v at working precision
    condition: mp.mpf     # pivot-growth estimate, order of magnitude only


def solve_linear(B: CMatrix, v: CVector, prec: int | None = None) -> LinearSolution:
    """Solve Bx = v by Gaussian elimination with partial pivoting.

    Raises SingularMatrixError when the best available pivot is below the
    precision floor; the reported condition number is the max/min pivot
    magnitude ratio, a cheap growth estimate rather than a true kappa.
    """
    n = B.nrows
    if B.ncols != n or len(v) != n:
        raise ValueError("solve_linear needs a square system")
    if prec is None:
        prec = min(B.prec, v.prec)
    with mp.workdps(guarded(prec)):
        a = [list(row) for row in B.rows]
        b = list(v.entries)
        floor = mp.mpf(10) ** (-(guarded(prec) - 5)) * max(B.max_abs(), mp.mpf(1))
        pivots = []
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if abs(a[piv][col]) < floor:
                raise SingularMatrixError(f"pivot {col} below precision floor")
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                b[col], b[piv] = b[piv], b[col]
            pivots.append(abs(a[col][col]))
            inv = 1 / a[col][col]
            for r in range(col + 1, n):
                f = a[r][col] * inv
                if f == 0:
                    continue
                a[r][col] = mp.mpc(0)
                for c in range(col + 1, n):
                    a[r][c] -= f * a[col][c]
                b[r] -= f * b[col]
        x = [mp.mpc(0)] * n
        for r in range(n - 1, -1, -1):
            s = b[r] - mp.fsum(a[r][c] * x[c] for c in range(r + 1, n))
            x[r] = s / a[r][r]
        sol = CVector(x, prec)
        res = (B.matvec(sol) - v).max_abs()
        cond = max(pivots) / min(pivots)
    return LinearSolution(sol, res, cond)
