import random

import mpmath as mp
import pytest

from siclift import bignum as bn
from siclift.errors import SingularMatrixError


def close(a, b, digits):
    return abs(mp.mpc(a) - mp.mpc(b)) < mp.mpf(10) ** (-digits)


class TestScalars:
    def test_root_of_unity_d5(self):
        z = bn.root_of_unity(1, 5, 100)
        with mp.workdps(130):
            ref = mp.exp(2j * mp.pi / 5)
            assert close(z.value, ref, 99)
            # independent structure checks: fifth power is 1, all five sum to 0
            assert close(z.value ** 5, 1, 95)
            s = mp.fsum((bn.root_of_unity(k, 5, 100).value for k in range(5)),
                        absolute=False)
            assert abs(s) < mp.mpf(10) ** -95

    def test_root_of_unity_reduction(self):
        a = bn.root_of_unity(7, 5, 60).value
        b = bn.root_of_unity(2, 5, 60).value
        assert close(a, b, 59)

    @pytest.mark.parametrize("d", [3, 4, 5, 8, 13])
    def test_tau(self, d):
        t = bn.tau(d, 80).value
        with mp.workdps(100):
            assert close(t ** (2 * d), 1, 75)
            assert close(t ** d, 1 if d % 2 == 1 else -1, 75)
        table = bn.tau_power_table(d, 60)
        assert len(table) == 2 * d
        assert close(table[3], t ** 3, 55)

    def test_arithmetic_and_precision_tracking(self):
        a = bn.BigReal.make("1.5", 100)
        b = bn.BigReal.make(3, 80)
        c = a * b + a
        assert c.prec == 80 - 2 * bn.OP_GUARD_LOSS
        assert close(c.value, mp.mpf("6.0"), 70)
        z = bn.BigComplex.make(1j, 50) * bn.BigComplex.make(1j, 50)
        assert close(z.value, -1, 45)
        assert z.conjugate().value == z.value  # real result
        with pytest.raises(ZeroDivisionError):
            a / bn.BigReal.make(0, 100)

    def test_precision_bookkeeping_property(self):
        # k random ops at P digits agree with a (P+50)-digit recomputation
        # to at least P - OP_GUARD_LOSS*k digits
        rng = random.Random(11)
        P, k = 60, 12
        ops = [rng.choice("+-*") for _ in range(k)]
        vals = [rng.randint(1, 9) / mp.mpf(rng.randint(1, 7)) for _ in range(k + 1)]

        def run(prec):
            acc = bn.BigReal.make(vals[0], prec)
            for op, v in zip(ops, vals[1:]):
                w = bn.BigReal.make(v, prec)
                acc = acc + w if op == "+" else acc - w if op == "-" else acc * w
            return acc

        lo, hi = run(P), run(P + 50)
        assert lo.prec >= P - bn.OP_GUARD_LOSS * k
        assert close(lo.value, hi.value, lo.prec)


class TestSerialization:
    @pytest.mark.parametrize("digits", [30, 200])
    def test_round_trip(self, digits):
        with mp.workdps(digits + 10):
            x = mp.sqrt(mp.mpf(2)) * mp.mpf(10) ** -3
            s = bn.format_decimal(x, digits)
            y = bn.parse_decimal(s, digits)
            assert close(x, y, digits - 1)

    def test_bigcomplex_pair(self):
        z = bn.BigComplex.make(mp.mpc("1.25", "-0.5"), 40)
        re, im = z.to_decimal_pair()
        assert bn.parse_decimal(re, 40) == mp.mpf("1.25")
        assert bn.parse_decimal(im, 40) == mp.mpf("-0.5")


class TestVectorsMatrices:
    def test_vector_ops(self):
        v = bn.CVector([1, 1j, -2], 50)
        assert close(v.norm(), mp.sqrt(6), 45)
        w = bn.CVector([1, 0, 0], 50)
        assert close(v.dot(w), 1, 45)          # conjugate-linear in first slot
        assert close(v.dot(v), 6, 45)
        assert close((v - v).max_abs(), 0, 45)
        assert close(v.scale(2j)[1], -2, 45)

    def test_matrix_ops(self):
        A = bn.CMatrix([[1, 1j], [0, 2]], 60)
        I2 = bn.CMatrix.identity(2, 60)
        assert close((A * I2 - A).max_abs(), 0, 55)
        assert close(A.dagger()[0, 1], 0, 55)
        assert close(A.dagger()[1, 0], -1j, 55)
        assert close(A.trace(), 3, 55)
        v = bn.CVector([1, 1], 60)
        assert close(A.matvec(v)[0], 1 + 1j, 55)

    def test_solve_identity(self):
        I3 = bn.CMatrix.identity(3, 80)
        v = bn.CVector([2, -1j, mp.mpf(1) / 3], 80)
        sol = bn.solve_linear(I3, v)
        assert all(close(a, b, 75) for a, b in zip(sol.x.entries, v.entries))
        assert sol.residual < mp.mpf(10) ** -75

    def test_solve_known_inverse(self):
        # [[1,2],[3,4]] x = (1,1) has x = (-1, 1)
        B = bn.CMatrix([[1, 2], [3, 4]], 60)
        sol = bn.solve_linear(B, bn.CVector([1, 1], 60))
        assert close(sol.x[0], -1, 55) and close(sol.x[1], 1, 55)

    def test_solve_random_8x8_300_digits(self):
        rng = random.Random(3)
        with mp.workdps(360):
            rows = [[mp.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(8)]
                    for _ in range(8)]
            v = bn.CVector([mp.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1))
                            for _ in range(8)], 300)
        B = bn.CMatrix(rows, 300)
        sol = bn.solve_linear(B, v)
        assert sol.residual < mp.mpf(10) ** -280
        assert sol.condition < mp.mpf(10) ** 6

    def test_solve_singular(self):
        B = bn.CMatrix([[1, 2], [2, 4]], 50)
        with pytest.raises(SingularMatrixError):
            bn.solve_linear(B, bn.CVector([1, 0], 50))

    def test_guarded(self):
        assert bn.guarded(100) == 120
        assert bn.guarded(10) == 20  # floor of MIN_GUARD_DIGITS
