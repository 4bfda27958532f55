import math

import numpy as np
import pytest

from newton_lab import (ConvexBody, GridSpec, IllConditionedGramError,
                        Polynomial, chebyshev_T, gram_matrix, lattice_points,
                        lp_norm_body, lp_norm_cube, lp_norm_cube_fn,
                        sup_norm_cube)
from newton_lab.quadrature import leggauss


class TestGridSpec:
    def test_cap(self):
        with pytest.raises(ValueError):
            GridSpec(points_per_axis=1025, refinement_levels=10)

    def test_p_validated(self):
        with pytest.raises(ValueError):
            GridSpec(p=0.0)

    def test_defaults_ok(self):
        g = GridSpec()
        assert g.points_per_axis == 33


class TestGaussLegendre:
    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
    def test_exactness_up_to_2k_minus_1(self, k):
        x, w = leggauss(k)
        for d in range(0, 2 * k):
            got = float(w @ x ** d)
            want = 0.0 if d % 2 else 2.0 / (d + 1)
            assert got == pytest.approx(want, abs=5e-15)


class TestCubeNorms:
    def test_constant_l2(self):
        v = lp_norm_cube(Polynomial.constant(1, 1.0), 1.0, 2.0)
        assert float(v) == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_monomial_l2(self):
        v = lp_norm_cube(Polynomial.monomial(1, (1,)), 1.0, 2.0)
        assert float(v) == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-14)

    def test_abs_x_l1_closed_form(self):
        v = lp_norm_cube(Polynomial.monomial(1, (1,)), 1.0, 1.0)
        assert float(v) == pytest.approx(1.0, rel=1e-12)
        assert v.converged

    def test_fractional_p(self):
        # oracle: int_{-1}^{1} |x|^(1/2) dx = 4/3, norm = (4/3)^2
        v = lp_norm_cube(Polynomial.monomial(1, (1,)), 1.0, 0.5)
        assert float(v) == pytest.approx((4.0 / 3.0) ** 2, rel=1e-8)

    def test_sup_chebyshev(self):
        assert float(sup_norm_cube(chebyshev_T(4), 1.0)) == \
            pytest.approx(1.0, rel=1e-8)

    def test_sup_corner(self):
        P = Polynomial.monomial(2, (1, 1))
        assert float(sup_norm_cube(P, 1.0)) == pytest.approx(1.0, rel=1e-10)

    def test_sup_constant(self):
        P = Polynomial.constant(2, -2.5 + 0j)
        assert float(sup_norm_cube(P, 3.0)) == pytest.approx(2.5)

    def test_p_to_infinity_approaches_sup(self):
        # equioscillating choice: the L64 mass concentrates at the extrema
        P = chebyshev_T(4)
        v64 = float(lp_norm_cube(P, 1.0, 64.0))
        sup = float(sup_norm_cube(P, 1.0))
        assert abs(v64 - sup) / sup < 0.05

    def test_callable_version(self):
        v = lp_norm_cube_fn(lambda X: np.cos(X[:, 0]), 1, math.pi, 2.0)
        assert float(v) == pytest.approx(math.sqrt(math.pi), rel=1e-10)


class TestBodyNorms:
    def test_octahedron_area(self):
        v = lp_norm_body(Polynomial.constant(2, 1.0), ConvexBody.octahedron(2),
                         1.0)
        assert float(v) == pytest.approx(2.0, rel=1e-6)

    def test_ball_l2_of_one(self):
        v = lp_norm_body(Polynomial.constant(2, 1.0), ConvexBody.ball(2), 2.0)
        assert float(v) == pytest.approx(math.sqrt(math.pi), rel=1e-6)

    def test_interval_matches_cube(self):
        P = Polynomial.monomial(1, (1,))
        v = lp_norm_body(P, ConvexBody.interval(), 2.0)
        assert float(v) == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)

    def test_sup_over_ball(self):
        P = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0})
        v = lp_norm_body(P, ConvexBody.ball(2), math.inf)
        assert float(v) == pytest.approx(math.sqrt(2.0), rel=1e-8)

    def test_box_even_p_exact(self):
        P = Polynomial.monomial(2, (1, 1))
        v = lp_norm_body(P, ConvexBody.box((1.0, 2.0)), 2.0)
        want = math.sqrt((2.0 / 3.0) * (16.0 / 3.0))
        assert float(v) == pytest.approx(want, rel=1e-13)


class TestQuasinormTriangle:
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, math.inf])
    def test_power_triangle(self, p):
        rng = np.random.default_rng(41)
        for _ in range(10):
            F1 = Polynomial(1, {(k,): rng.normal() for k in range(4)})
            F2 = Polynomial(1, {(k,): rng.normal() for k in range(4)})
            pt = min(1.0, p if not math.isinf(p) else 1.0)
            n1 = float(lp_norm_cube(F1, 1.0, p))
            n2 = float(lp_norm_cube(F2, 1.0, p))
            ns = float(lp_norm_cube(F1 + F2, 1.0, p))
            assert ns ** pt <= n1 ** pt + n2 ** pt + 1e-6


class TestGram:
    def test_closed_form_1d(self):
        G = gram_matrix([(0,), (1,)], ("cube", 1, 1.0))
        assert np.allclose(G.matrix, [[2.0, 0.0], [0.0, 2.0 / 3.0]])

    def test_closed_form_2d(self):
        G = gram_matrix([(0, 0), (1, 1)], ("cube", 2, 1.0))
        assert np.allclose(G.matrix, np.diag([4.0, 4.0 / 9.0]))

    def test_even_coupling(self):
        G = gram_matrix([(0,), (1,), (2,)], ("cube", 1, 1.0))
        assert G.matrix[0, 2] == pytest.approx(2.0 / 3.0)

    def test_body_matches_cube(self):
        basis = [(0, 0), (1, 0), (0, 1), (2, 0)]
        Gc = gram_matrix(basis, ("cube", 2, 1.0))
        Gb = gram_matrix(basis, ConvexBody.cube(2))
        assert np.allclose(Gc.matrix, Gb.matrix, rtol=1e-12)

    @pytest.mark.parametrize("body", [ConvexBody.octahedron(2),
                                      ConvexBody.ball(2)])
    def test_positive_definite_on_lattice_bases(self, body):
        basis = lattice_points(body, 3.0)
        G = gram_matrix(basis, body)
        assert G.min_eigenvalue > 0

    def test_solve_and_guard(self):
        G = gram_matrix([(0,), (1,), (2,)], ("cube", 1, 1.0))
        x = G.solve(np.array([1.0, 0.0, 0.0]))
        assert np.allclose(G.matrix @ x, [1.0, 0.0, 0.0])
        Gbad = gram_matrix([(k,) for k in range(26)], ("cube", 1, 1.0))
        with pytest.raises(IllConditionedGramError):
            Gbad.solve(np.zeros(26))

    def test_validation(self):
        with pytest.raises(ValueError):
            gram_matrix([], ("cube", 1, 1.0))
        with pytest.raises(ValueError):
            gram_matrix([(0,), (0,)], ("cube", 1, 1.0))
