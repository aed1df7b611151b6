import math
import random
from fractions import Fraction

import mpmath as mp
import pytest

from siclift import lattice as lat
from siclift.errors import PrecisionError


def det3(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


class TestLLL:
    def test_classic_3d_basis(self):
        rows = [[1, 1, 1], [-1, 0, 2], [3, 5, 6]]
        red = lat.lll_reduce(rows)
        assert abs(det3(red)) == abs(det3(rows))  # same lattice volume
        norms = sorted(sum(x * x for x in r) for r in red)
        assert norms[0] == 1 and norms[-1] <= 6

    def test_already_reduced_identity(self):
        rows = [[1, 0], [0, 1]]
        assert lat.lll_reduce(rows) == [[1, 0], [0, 1]]

    def test_dependent_rows_rejected(self):
        with pytest.raises(ValueError):
            lat.lll_reduce([[1, 2], [2, 4]])

    def test_shortens_skewed_basis(self):
        rows = [[201, 37], [1648, 297]]
        red = lat.lll_reduce(rows)
        assert max(sum(x * x for x in r) for r in red) < 201 ** 2 + 37 ** 2


def mpf_at(expr, dps):
    with mp.workdps(dps):
        return expr()


class TestIntegerRelation:
    def test_sqrt2_duplicate(self):
        with mp.workdps(60):
            s = mp.sqrt(2)
            rel = lat.integer_relation([s, mp.mpf(1), s], precision=50)
        assert rel is not None
        assert rel.coefficients == (1, 0, 1)
        assert rel.residual < mp.mpf(10) ** -30

    def test_pi_has_no_small_relation(self):
        with mp.workdps(120):
            rel = lat.integer_relation([mp.pi, mp.mpf(1)], precision=100,
                                       max_height_digits=10)
        assert rel is None

    def test_golden_ratio_identity(self):
        with mp.workdps(70):
            phi = (1 + mp.sqrt(5)) / 2
            rel = lat.integer_relation([phi, mp.mpf(1), phi], precision=60)
            assert rel.coefficients == (1, 0, 1)
            # and the quadratic relation through powers
            rel2 = lat.integer_relation([mp.mpf(1), phi, phi ** 2], precision=60)
        # m0*x0 - m1*x1 - m2*x2 = 0 with x=(1, phi, phi^2): 1 + phi - phi^2 = 0
        assert rel2.coefficients == (1, -1, 1)

    def test_precision_refusal(self):
        with mp.workdps(40):
            xs = [mp.sqrt(2), mp.mpf(1), mp.sqrt(3)]
            with pytest.raises(PrecisionError):
                lat.integer_relation(xs, precision=30, max_height_digits=30)

    def test_pslq_cross_check(self):
        # same relations out of an independent engine, mapped between sign
        # conventions c_0 = m_0, c_j = -m_j
        with mp.workdps(80):
            phi = (1 + mp.sqrt(5)) / 2
            alpha = mp.sqrt(2) + mp.sqrt(3)
            for xs in ([mp.mpf(1), phi, phi ** 2],
                       [alpha ** k for k in range(5)]):
                ours = lat.integer_relation(xs, precision=60)
                theirs = mp.pslq(xs, maxcoeff=10 ** 6, maxsteps=10 ** 4)
                assert ours is not None and theirs is not None
                m = ours.coefficients
                c = [m[0]] + [-x for x in m[1:]]
                g = math.gcd(*(abs(t) for t in theirs))
                theirs = [t // g for t in theirs]
                if theirs[0] * c[0] < 0 or (theirs[0] == 0 and theirs != c):
                    theirs = [-t for t in theirs]
                assert c == theirs

    def test_random_reals_yield_nothing(self):
        # junk relations near the lattice floor must not be reported; note the
        # entropy must exceed the working precision (53-bit floats are
        # rationals with honest small relations!)
        rng = random.Random(41)
        with mp.workdps(200):
            for _ in range(5):
                xs = [mp.mpf(rng.getrandbits(600)) / 2 ** 600 + rng.randint(0, 3)
                      for _ in range(5)]
                assert lat.integer_relation(xs, precision=150) is None

    def test_verify_relation_at_higher_precision(self):
        with mp.workdps(200):
            s = mp.sqrt(2)
            rel = lat.integer_relation([s, mp.mpf(1), s], precision=50)
            assert lat.verify_relation(rel, [mp.sqrt(2), mp.mpf(1), mp.sqrt(2)], 180)
            # junk relation fails verification
            junk = lat.RelationResult((3, 1, 2), mp.mpf(0), 50)
            assert not lat.verify_relation(junk, [mp.sqrt(2), mp.mpf(1), mp.sqrt(2)],
                                           180)


class TestRawRelation:
    def test_true_relation_small_norm(self):
        with mp.workdps(120):
            phi = (1 + mp.sqrt(5)) / 2
            rel = lat.raw_relation([mp.mpf(1), phi, phi ** 2], precision=100)
        assert rel.coefficients == (1, -1, 1)
        assert lat.relation_norm(rel) < 3

    def test_junk_norm_near_floor(self):
        # pi has no small relation: the raw row sits near 10^((prec-g)/n)
        with mp.workdps(120):
            rel = lat.raw_relation([mp.pi, mp.mpf(1), mp.sqrt(2)],
                                   precision=100)
            norm = lat.relation_norm(rel)
        floor = (100 - lat.scaling_guard(100)) / 3
        assert norm > mp.mpf(10) ** (floor - 8)

    def test_score_separation(self):
        # the ratio junk/true spans many orders of magnitude
        with mp.workdps(220):
            s3 = mp.sqrt(3)
            true_rel = lat.raw_relation([s3 + 2, mp.mpf(1), s3], precision=200)
            junk_rel = lat.raw_relation([mp.exp(1), mp.mpf(1), s3],
                                        precision=200)
            ratio = lat.relation_norm(junk_rel) / lat.relation_norm(true_rel)
        assert ratio > mp.mpf(10) ** 40


class TestMinimalPolynomial:
    def cube_root_real_part(self, re, im, dps):
        with mp.workdps(dps):
            return 2 * (mp.mpc(re, im) ** mp.mpf("1/3")).real

    def test_cubic_from_100_digits_case_a(self):
        b = self.cube_root_real_part(10, 30, 120)
        poly = lat.minimal_polynomial(b, max_degree=6, precision=100)
        assert poly.coeffs == (-20, -30, 0, 1)

    def test_cubic_from_100_digits_case_b(self):
        with mp.workdps(120):
            z = 38 * mp.mpc(13, 3 * mp.sqrt(15))
            b = 2 * (z ** mp.mpf("1/3")).real
        poly = lat.minimal_polynomial(b, max_degree=6, precision=100)
        assert poly.coeffs == (-988, -228, 0, 1)

    def test_cubic_from_100_digits_case_c(self):
        with mp.workdps(120):
            b = 2 * (mp.mpc(7, mp.sqrt(15)) ** mp.mpf("1/3")).real
        poly = lat.minimal_polynomial(b, max_degree=6, precision=100)
        assert poly.coeffs == (-14, -12, 0, 1)

    def test_trivial_cases(self):
        poly = lat.minimal_polynomial(mp.mpf(3), max_degree=4, precision=40)
        assert poly.coeffs == (-3, 1)
        with mp.workdps(60):
            seven_thirds = mp.mpf(7) / 3
        poly = lat.minimal_polynomial(seven_thirds, max_degree=4, precision=40)
        assert poly.coeffs == (-7, 3)

    def test_complex_inputs(self):
        with mp.workdps(80):
            poly = lat.minimal_polynomial(mp.mpc(0, 1), max_degree=4, precision=60)
            assert poly.coeffs == (1, 0, 1)
            z7 = mp.expjpi(mp.mpf(2) / 7)
            poly = lat.minimal_polynomial(z7, max_degree=8, precision=60)
            assert poly.coeffs == (1, 1, 1, 1, 1, 1, 1)

    def test_none_for_transcendental(self):
        assert lat.minimal_polynomial(mp.pi, max_degree=4, precision=60) is None

    def test_poly_repr_and_eval(self):
        p = lat.IntPolynomial((-20, -30, 0, 1))
        assert str(p) == "-20 - 30x + x^3"
        assert p.eval_exact(Fraction(1)) == -49
        assert p.derivative_coeffs() == (-30, 0, 3)
        # normalization: content and sign
        assert lat.IntPolynomial((4, 0, -2)).coeffs == (-2, 0, 1)


# catalog of generators with known minimal polynomials (degree <= 12)
CATALOG = [
    ((-2, 0, 1), lambda: mp.sqrt(2)),
    ((-1, -1, 1), lambda: (1 + mp.sqrt(5)) / 2),
    ((-2, 0, 0, 1), lambda: mp.cbrt(2)),
    ((-1, -2, 1, 1), lambda: 2 * mp.cos(2 * mp.pi / 7)),
    ((1, 0, -10, 0, 1), lambda: mp.sqrt(2) + mp.sqrt(3)),
    ((-2, 0, 0, 0, 0, 1), lambda: mp.root(2, 5)),
    ((-1, 3, 6, -4, -5, 1, 1), lambda: 2 * mp.cos(2 * mp.pi / 13)),
    ((-2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1), lambda: mp.root(2, 12)),
]


def shifted_minpoly(coeffs, q0: Fraction, q1: Fraction):
    """Exact minimal polynomial of q0 + q1*alpha from that of alpha."""
    k = len(coeffs) - 1
    # P((x - q0)/q1) * q1^k, coefficients via binomial expansion
    out = [Fraction(0)] * (k + 1)
    for i, c in enumerate(coeffs):
        # c * (x - q0)^i * q1^(k-i)
        for j in range(i + 1):
            out[j] += c * math.comb(i, j) * (-q0) ** (i - j) * q1 ** (k - i)
    lcm = 1
    for f in out:
        lcm = lcm * f.denominator // math.gcd(lcm, f.denominator)
    return lat.IntPolynomial(tuple(int(f * lcm) for f in out))


class TestDegreeMinimality:
    def test_known_degree_corpus(self):
        rng = random.Random(23)
        for _ in range(20):
            coeffs, mk = CATALOG[rng.randrange(len(CATALOG))]
            q0 = Fraction(rng.randint(-9, 9), rng.randint(1, 7))
            q1 = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 7))
            expected = shifted_minpoly(coeffs, q0, q1)
            # heights reach ~10^11 over 13 values, so the s(n+1) heuristic
            # wants ~170 digits minimum; 400 leaves honest margin
            with mp.workdps(460):
                val = q0.numerator / mp.mpf(q0.denominator) + \
                    q1.numerator / mp.mpf(q1.denominator) * mk()
            got = lat.minimal_polynomial(val, max_degree=12, precision=400)
            assert got is not None and got.coeffs == expected.coeffs
            # soundness: confirm at twice the precision
            with mp.workdps(820):
                val2 = q0.numerator / mp.mpf(q0.denominator) + \
                    q1.numerator / mp.mpf(q1.denominator) * mk()
                assert abs(got(val2)) < mp.mpf(10) ** -700 * max(
                    abs(c) for c in got.coeffs)


class TestExpressInBasis:
    def test_golden_over_1_sqrt5(self):
        with mp.workdps(70):
            phi = (1 + mp.sqrt(5)) / 2
            out = lat.express_in_basis(phi, [mp.mpf(1), mp.sqrt(5)], precision=60)
        assert out is not None
        qs, resid = out
        assert qs == [Fraction(1, 2), Fraction(1, 2)]
        assert resid < mp.mpf(10) ** -40

    def test_unit_vector(self):
        with mp.workdps(70):
            basis = [mp.mpf(1), mp.sqrt(2), mp.sqrt(3)]
            qs, _ = lat.express_in_basis(mp.sqrt(3), basis, precision=60)
        assert qs == [Fraction(0), Fraction(0), Fraction(1)]

    def test_random_biquadratic_roundtrip(self):
        rng = random.Random(5)
        with mp.workdps(140):
            basis = [mp.mpf(1), mp.sqrt(3), mp.sqrt(5), mp.sqrt(15)]
            for _ in range(5):
                qs_true = [Fraction(rng.randint(-50, 50), rng.randint(1, 100))
                           for _ in range(4)]
                val = mp.fsum(q.numerator / mp.mpf(q.denominator) * b
                              for q, b in zip(qs_true, basis))
                out = lat.express_in_basis(val, basis, denominator_bound=10 ** 8,
                                           precision=120)
                assert out is not None and out[0] == qs_true

    def test_complex_element(self):
        with mp.workdps(90):
            i_ = mp.mpc(0, 1)
            basis = [mp.mpc(1), i_, mp.sqrt(2) * i_]
            val = mp.mpc(1, 2) / 3 + mp.sqrt(2) * i_ / 5
            out = lat.express_in_basis(val, basis, precision=70)
        assert out is not None
        assert out[0] == [Fraction(1, 3), Fraction(2, 3), Fraction(1, 5)]
