import math
from fractions import Fraction

import numpy as np
import pytest

from newton_lab import (ConvexBody, DiffOperator, Polynomial, TrigPolynomial,
                        bernstein_product_constant, chebyshev_T,
                        coefficient_bound_check, faa_di_bruno_c,
                        labelle_constant, lattice_points,
                        lift_derivative_at_zero, mu, trig_lift)


def random_poly(rng, body, a, m, coeff_scale=2.0):
    pts = lattice_points(body, a)
    terms = {b: complex(rng.integers(-3, 4), 0) for b in pts}
    terms = {b: c * coeff_scale / 2 for b, c in terms.items() if c != 0}
    if not terms:
        terms = {(0,) * m: 1.0}
    return Polynomial(m, terms)


class TestPolynomial:
    def test_eval_examples(self):
        P = Polynomial(2, {(0, 0): 1.0, (1, 1): 1.0})
        assert P.eval((2.0, 3.0)) == 7.0
        T3 = chebyshev_T(3)
        assert T3.eval((0.5,)) == pytest.approx(-1.0, abs=1e-15)
        assert Polynomial.zero(3).eval((1.0, 2.0, 3.0)) == 0.0

    def test_eval_many_matches_eval(self):
        rng = np.random.default_rng(0)
        P = random_poly(rng, ConvexBody.octahedron(2), 3.0, 2)
        X = rng.uniform(-1, 1, size=(40, 2))
        got = P.eval_many(X)
        want = np.array([P.eval(x) for x in X])
        assert np.max(np.abs(got - want)) < 1e-12

    def test_algebra(self):
        x = Polynomial.monomial(1, (1,))
        one = Polynomial.constant(1, 1.0)
        prod = (one + x) * (one - x)
        assert prod.terms == {(0,): 1.0, (2,): -1.0}
        assert (x - x).is_zero()
        scaled = prod.scale_argument(2.0)
        assert scaled.terms == {(0,): 1.0, (2,): -4.0}

    def test_zero_coeffs_pruned(self):
        P = Polynomial(1, {(0,): 0.0, (2,): 1.0})
        assert (0,) not in P.terms

    def test_grlex_support(self):
        P = Polynomial(2, {(0, 1): 1.0, (1, 0): 1.0, (0, 0): 1.0, (2, 0): 1.0})
        assert P.support() == [(0, 0), (1, 0), (0, 1), (2, 0)]

    def test_json_round_trip(self):
        P = Polynomial(2, {(1, 2): 0.5 - 1.5j, (0, 0): 2.0})
        Q = Polynomial.from_json(P.to_json())
        assert Q == P


class TestDiffOperator:
    def test_second_derivative(self):
        D = DiffOperator.d_dx(2)
        P = Polynomial(1, {(2,): 5.0})
        assert D.apply_at_zero(P) == 10.0

    def test_mixed_partial(self):
        D = DiffOperator.partial((1, 1))
        P = Polynomial(2, {(1, 1): 1.0, (3, 0): 1.0})
        assert D.apply_at_zero(P) == 1.0

    def test_identity(self):
        D = DiffOperator.identity(2)
        P = Polynomial(2, {(0, 0): 3.5, (1, 1): 2.0})
        assert D.apply_at_zero(P) == 3.5
        assert D.order == 0

    def test_homogeneity_enforced(self):
        with pytest.raises(ValueError):
            DiffOperator(2, {(1, 0): 1.0, (2, 0): 1.0})

    def test_symbol(self):
        D = DiffOperator.partial((1, 1))
        assert D.symbol((2.0, 3.0)) == pytest.approx(-6.0)
        sp = D.symbol_polynomial()
        assert sp.terms == {(1, 1): -1.0}


class TestChebyshev:
    def test_low_degrees(self):
        assert chebyshev_T(0).terms == {(0,): 1.0}
        assert chebyshev_T(1).terms == {(1,): 1.0}
        assert chebyshev_T(3).terms == {(3,): 4.0, (1,): -3.0}
        assert chebyshev_T(4).terms == {(4,): 8.0, (2,): -8.0, (0,): 1.0}

    @pytest.mark.parametrize("n", [2, 7, 12, 15])
    def test_cosine_identity_oracle(self, n):
        # independent oracle: T_n(cos t) = cos(n t); moderate degrees only,
        # monomial evaluation near |x| = 1 is ill-conditioned beyond that
        t = np.linspace(0.05, math.pi - 0.05, 100)
        got = chebyshev_T(n).eval_many(np.cos(t)[:, None])
        assert np.max(np.abs(got - np.cos(n * t))) < 1e-9

    @pytest.mark.parametrize("n", [5, 18, 25, 40])
    def test_exact_coefficients_against_numpy(self, n):
        # numpy's basis conversion runs the same integer recurrence in
        # float64; all intermediates stay below 2^53, so it is exact too
        e = np.zeros(n + 1)
        e[n] = 1.0
        mono = np.polynomial.chebyshev.cheb2poly(e)
        ours = chebyshev_T(n)
        for k, c in enumerate(mono):
            assert ours.coefficient((k,)) == c

    def test_cap(self):
        with pytest.raises(ValueError):
            chebyshev_T(41)


class TestMu:
    def test_identity_order(self):
        for n in range(1, 9):
            assert mu(0, n) == 1.0

    def test_first_derivative(self):
        assert mu(1, 3) == 1.0
        assert mu(1, 4) == 0.75

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            mu(5, 4)

    def test_bounded_by_one(self):
        for n in range(1, 41):
            for N in range(0, n + 1):
                assert mu(N, n) <= 1.0 + 1e-15


class TestLabelle:
    def test_n2_against_legendre_sum_oracle(self):
        # oracle: sqrt(sum over even k <= 2 of (2k+1)/2 * P_k(0)^2) * 2^{-1/2}
        pk0 = [1.0, 0.0, -0.5]
        s = sum((2 * k + 1) / 2 * pk0[k] ** 2 for k in range(3))
        want = math.sqrt(s) / math.sqrt(2.0)
        assert want == pytest.approx(0.75, abs=1e-15)
        assert labelle_constant(0, 2) == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("N", [0, 1, 2, 3])
    def test_limit(self, N):
        lim = 1.0 / math.sqrt(math.pi * (2 * N + 1))
        assert labelle_constant(N, 40000) == pytest.approx(lim, rel=1e-3)

    def test_diagonal_finite(self):
        for n in (1, 3, 10):
            v = labelle_constant(n, n)
            assert 0 < v < math.inf


class TestBernsteinProduct:
    def test_mixed_case_mu_oracle(self):
        # (1/4) * (2 mu(1,2))^2 with mu(1,2) = 1/2
        assert mu(1, 2) == 0.5
        got = bernstein_product_constant((1, 1), 2.0, (1.0, 1.0))
        assert got == pytest.approx(0.25, abs=1e-15)

    def test_zero_order(self):
        assert bernstein_product_constant((0, 0, 0), 3.0, (1.0, 2.0, 0.5)) == 1.0

    def test_product_upper_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            sigma = tuple(rng.uniform(0.5, 3.0, 2))
            a = float(rng.uniform(1.0, 5.0))
            nmax = [math.floor(a * s) for s in sigma]
            if min(nmax) < 1:
                continue
            alpha = tuple(int(rng.integers(0, n + 1)) for n in nmax)
            got = bernstein_product_constant(alpha, a, sigma)
            bound = 1.0
            for aj, sj in zip(alpha, sigma):
                bound *= sj ** aj
            assert got <= bound * (1 + 1e-12)

    def test_order_exceeds_degree(self):
        with pytest.raises(ValueError):
            bernstein_product_constant((3,), 2.0, (1.0,))


class TestCoefficientBound:
    def test_constant(self):
        P = Polynomial.constant(1, 4.2)
        assert coefficient_bound_check(P, ConvexBody.interval(), 1.0, 1.0, 1.0)

    def test_linear_tight(self):
        P = Polynomial.monomial(1, (1,))
        assert coefficient_bound_check(P, ConvexBody.interval(), 1.0, 1.0, 1.0)

    def test_random_class(self):
        rng = np.random.default_rng(17)
        body = ConvexBody.octahedron(2)
        for _ in range(25):
            P = random_poly(rng, body, 3.0, 2)
            assert coefficient_bound_check(P, body, 3.0, 1.0, 1.0)

    def test_support_violation(self):
        P = Polynomial.monomial(2, (3, 3))
        with pytest.raises(ValueError):
            coefficient_bound_check(P, ConvexBody.octahedron(2), 3.0, 1.0, 1.0)


def _partitions_into_odd_parts(k, l):
    """Independent enumeration: all multisets of l odd parts summing to k."""
    def rec(remaining, count, largest):
        if count == 0:
            if remaining == 0:
                yield ()
            return
        part = min(largest, remaining)
        if part % 2 == 0:
            part -= 1
        while part >= 1:
            if part * count >= remaining:
                for rest in rec(remaining - part, count - 1, part):
                    yield (part,) + rest
            part -= 2
    return list(rec(k, l, k if k % 2 == 1 else k - 1))


def _c_oracle(l, k):
    total = Fraction(0)
    for parts in _partitions_into_odd_parts(k, l):
        counts = {}
        for p in parts:
            counts[p] = counts.get(p, 0) + 1
        num = Fraction(1)
        den = 1
        for size, cnt in counts.items():
            j = (size - 1) // 2
            num *= Fraction((-1) ** (j * cnt))
            den *= math.factorial(cnt) * math.factorial(size) ** cnt
        total += num / den
    return math.factorial(k) * total


class TestFaaDiBruno:
    def test_diagonal(self):
        for k in range(13):
            assert faa_di_bruno_c(k, k) == 1

    def test_single_odd_part(self):
        assert faa_di_bruno_c(1, 3) == Fraction(-1)
        assert faa_di_bruno_c(1, 2) == 0

    def test_parity_vanishing(self):
        for k in range(13):
            for l in range(k + 1):
                if (k - l) % 2 == 1:
                    assert faa_di_bruno_c(l, k) == 0

    def test_against_partition_oracle(self):
        for k in range(11):
            for l in range(k + 1):
                assert faa_di_bruno_c(l, k) == _c_oracle(l, k)

    def test_domain(self):
        with pytest.raises(ValueError):
            faa_di_bruno_c(3, 2)


class TestTrigLift:
    def test_sine(self):
        T = trig_lift(Polynomial.monomial(1, (1,)), 1.0)
        assert T.terms[(1,)] == pytest.approx(-0.5j)
        assert T.terms[(-1,)] == pytest.approx(0.5j)

    def test_sine_squared(self):
        T = trig_lift(Polynomial.monomial(1, (2,)), 1.0)
        assert T.terms[(0,)] == pytest.approx(0.5)
        assert T.terms[(2,)] == pytest.approx(-0.25)
        assert T.terms[(-2,)] == pytest.approx(-0.25)

    def test_spectrum_containment(self):
        rng = np.random.default_rng(23)
        for body in (ConvexBody.octahedron(2), ConvexBody.ball(2)):
            a = 3.0
            P = random_poly(rng, body, a, 2)
            T = trig_lift(P, 2.0)
            for theta in T.terms:
                assert body.contains(theta, scale=a)

    def test_eval_identity(self):
        rng = np.random.default_rng(29)
        P = random_poly(rng, ConvexBody.cube(2), 2.0, 2)
        b = 1.7
        T = trig_lift(P, b)
        for _ in range(100):
            t = rng.uniform(-3, 3, 2)
            want = P.eval(tuple(b * math.sin(tj) for tj in t))
            assert abs(T.eval(t) - want) < 1e-10

    def test_period_scaling_relation(self):
        # R(t) = P(b sin(t_j / b)) equals the lifted spectrum at t / b
        P = Polynomial(1, {(2,): 1.0, (1,): 0.5})
        b = 2.0
        T = trig_lift(P, b)
        for t in (0.3, 1.1, -0.8):
            want = P.eval((b * math.sin(t / b),))
            assert abs(T.eval((t / b,)) - want) < 1e-12


class TestLiftDerivative:
    def test_cubic_any_b(self):
        P = Polynomial.monomial(1, (3,))
        for b in (1.0, 2.0, 7.5):
            assert lift_derivative_at_zero(P, b, (3,)) == pytest.approx(6.0)

    def test_first_order_exact(self):
        rng = np.random.default_rng(31)
        P = random_poly(rng, ConvexBody.octahedron(2), 3.0, 2)
        for alpha in ((1, 0), (0, 1)):
            want = P.derivative_at_zero(alpha)
            got = lift_derivative_at_zero(P, 3.0, alpha)
            assert got == pytest.approx(want, abs=1e-12)

    def test_error_decays_in_b(self):
        P = Polynomial(1, {(1,): 1.0, (3,): 1.0})
        alpha = (3,)
        exact = P.derivative_at_zero(alpha)
        errs = [abs(lift_derivative_at_zero(P, b, alpha) - exact)
                for b in (2.0, 4.0, 8.0)]
        assert errs[0] > 0
        assert errs[1] <= errs[0] / 1.9
        assert errs[2] <= errs[1] / 1.9

    def test_matches_composition_oracle(self):
        # oracle: truncated sine series, polynomial composition, exact D^alpha
        rng = np.random.default_rng(37)
        body = ConvexBody.cube(2)
        for _ in range(20):
            P = random_poly(rng, body, 2.0, 2)
            alpha = tuple(int(rng.integers(0, 4)) for _ in range(2))
            b = float(rng.choice([2.0, 4.0]))
            got = lift_derivative_at_zero(P, b, alpha)
            want = _composition_oracle(P, b, alpha)
            assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def _composition_oracle(P, b, alpha):
    """R = P(b sin(t_1/b), ...) via truncated series composition; D^alpha R(0)."""
    m = P.m
    maxdeg = max(P.total_degree(), 1)
    cut = 2 * maxdeg + 1
    # univariate series of b sin(t/b) up to degree cut
    series = {}
    j = 0
    while 2 * j + 1 <= cut:
        series[2 * j + 1] = (-1) ** j / (math.factorial(2 * j + 1)
                                         * b ** (2 * j))
        j += 1

    def mul(u, v, cap):
        out = {}
        for du, cu in u.items():
            for dv, cv in v.items():
                d = tuple(x + y for x, y in zip(du, dv))
                if all(dj <= cj for dj, cj in zip(d, cap)):
                    out[d] = out.get(d, 0) + cu * cv
        return out

    cap = tuple(max(a, 0) for a in alpha)
    acc = {(0,) * m: 0.0}
    for beta, cb in P.terms.items():
        term = {(0,) * m: cb}
        for ax, bj in enumerate(beta):
            g = {tuple(d if k == ax else 0 for k in range(m)): c
                 for d, c in series.items()}
            for _ in range(bj):
                term = mul(term, g, cap)
        for d, c in term.items():
            acc[d] = acc.get(d, 0) + c
    coef = acc.get(tuple(alpha), 0.0)
    fact = 1
    for aj in alpha:
        fact *= math.factorial(aj)
    return coef * fact


class TestTrigPolynomial:
    def test_derivative_at_zero(self):
        T = TrigPolynomial(1, {(2,): 1.0, (-2,): 1.0})
        # second derivative of 2 cos(2t) at 0 is -8
        assert T.derivative_at_zero((2,)) == pytest.approx(-8.0)

    def test_l2_norm(self):
        T = TrigPolynomial(1, {(0,): 1.0, (3,): 2.0})
        want = math.sqrt(2 * math.pi) * math.sqrt(5.0)
        assert T.l2_norm_period() == pytest.approx(want, rel=1e-12)

    def test_eval_many(self):
        T = TrigPolynomial(2, {(1, -1): 1.5j, (0, 2): 1.0})
        X = np.array([[0.2, 0.4], [1.0, -0.3]])
        got = T.eval_many(X)
        want = np.array([T.eval(x) for x in X])
        assert np.max(np.abs(got - want)) < 1e-12
