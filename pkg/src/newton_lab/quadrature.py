"""Norm evaluation: Lp quasinorms and sup-norms over cubes and bodies, Gram matrices.

Tensor Gauss-Legendre everywhere.  |P|^p is a polynomial for even integer p,
so those integrals use exact node counts; other exponents refine the rule
until two levels agree.  Integrals over curved bodies run the same tensor
rule through a nested-section change of variables (axis j scaled by the
section half-width given the previous coordinates), which keeps every node
inside the body and converges fast for all exponents lam; for lam = inf it
reduces to the plain cube rule.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody


class IllConditionedGramError(RuntimeError):
    """Gram solve rejected: eigenvalue below the relative floor."""


@dataclass(frozen=True)
class GridSpec:
    """Quadrature resolution: base points per axis plus doubling levels."""

    points_per_axis: int = 33
    refinement_levels: int = 6
    p: float | None = None
    max_points_per_axis: int = 16385

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be >= 2")
        if self.refinement_levels < 0:
            raise ValueError("refinement_levels must be >= 0")
        if self.points_per_axis * 2 ** self.refinement_levels \
                > self.max_points_per_axis:
            raise ValueError("grid cap exceeded: points_per_axis * 2^levels "
                             f"> {self.max_points_per_axis}")
        if self.p is not None and not (self.p > 0):
            raise ValueError("exponent p must be positive (or None)")


DEFAULT_GRID = GridSpec()


class NormValue(float):
    """A float norm value carrying quadrature-convergence metadata."""

    def __new__(cls, value, converged=True, levels_used=1):
        obj = super().__new__(cls, value)
        obj.converged = bool(converged)
        obj.levels_used = int(levels_used)
        return obj


_leg_lock = threading.Lock()
_leg_cache = {}


def leggauss(n):
    """Cached Gauss-Legendre nodes/weights on [-1, 1] (read-mostly cache)."""
    tab = _leg_cache.get(n)
    if tab is None:
        with _leg_lock:
            tab = _leg_cache.get(n)
            if tab is None:
                tab = np.polynomial.legendre.leggauss(n)
                _leg_cache[n] = tab
    return tab


def cheb_extrema(n, half=1.0):
    """n Chebyshev extreme points on [-half, half], endpoints included."""
    if n < 2:
        raise ValueError("need at least 2 points")
    j = np.arange(n)
    return half * np.sin(np.pi * (2 * j - (n - 1)) / (2 * (n - 1)))


def monomial_matrix(exponents, X):
    """Matrix of monomial values: rows = points of X, columns = exponents."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[1]
    degs = [0] * m
    for e in exponents:
        for j in range(m):
            degs[j] = max(degs[j], e[j])
    pows = []
    for j in range(m):
        pj = np.ones((degs[j] + 1, len(X)))
        for d in range(1, degs[j] + 1):
            pj[d] = pj[d - 1] * X[:, j]
        pows.append(pj)
    cols = np.empty((len(exponents), len(X)))
    for k, e in enumerate(exponents):
        t = pows[0][e[0]].copy()
        for j in range(1, m):
            if e[j]:
                t *= pows[j][e[j]]
        cols[k] = t
    return cols.T


def _tensor_gl_nodes(m, half_widths, n_per_axis):
    axes = []
    wts = []
    for j in range(m):
        x, w = leggauss(n_per_axis)
        axes.append(half_widths[j] * x)
        wts.append(half_widths[j] * w)
    if m == 1:
        return axes[0][:, None], wts[0]
    grids = np.meshgrid(*axes, indexing="ij")
    X = np.column_stack([g.ravel() for g in grids])
    W = wts[0]
    for j in range(1, m):
        W = np.multiply.outer(W, wts[j])
    return X, W.ravel()


def _real_square_modulus_coeffs(P):
    """|P|^2 as a real coefficient array (univariate), low degree first."""
    d = P.degrees_per_axis()[0]
    re = np.zeros(d + 1)
    im = np.zeros(d + 1)
    for (k,), c in P.terms.items():
        re[k] = c.real
        im[k] = c.imag
    return np.polynomial.polynomial.polymul(re, re) + \
        np.polynomial.polynomial.polymul(im, im)


def _interval_pieces(P, M):
    """Split [-M, M] at the real zeros of |P|^2 (univariate smoothness split)."""
    c2 = _real_square_modulus_coeffs(P)
    if len(c2) <= 1:
        return [(-M, M)]
    roots = np.polynomial.polynomial.polyroots(c2)
    scale = max(1.0, M)
    cuts = sorted({float(r.real) for r in roots
                   if abs(r.imag) < 1e-9 * scale and -M < r.real < M})
    pts = [-M] + cuts + [M]
    return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)
            if pts[i + 1] - pts[i] > 1e-14 * scale]


def lp_norm_cube(P, M, p, grid=None):
    """Lp quasinorm of a polynomial over the cube of half-width M.

    Even integer p integrates exactly (|P|^p is a polynomial); p = inf
    delegates to the sup norm; other exponents refine until two levels agree
    to 1e-8 relative, returning the best value with a convergence flag.
    In one variable the interval is first split at the zeros of |P|.
    """
    grid = grid or DEFAULT_GRID
    if math.isinf(p):
        return sup_norm_cube(P, M, grid=grid)
    if p <= 0:
        raise ValueError("exponent p must be positive")
    degs = P.degrees_per_axis()
    if P.is_zero():
        return NormValue(0.0)
    half = (M,) * P.m

    if float(p).is_integer() and int(p) % 2 == 0:
        n = max(int(p) * max(degs) // 2 + 1, 2)
        X, W = _tensor_gl_nodes(P.m, half, n)
        v = float(np.sum(W * np.abs(P.eval_many(X)) ** p)) ** (1.0 / p)
        return NormValue(v)

    if P.m == 1:
        pieces = _interval_pieces(P, M)

        def level_value(n):
            x, w = leggauss(n)
            tot = 0.0
            for lo, hi in pieces:
                mid, rad = (lo + hi) / 2, (hi - lo) / 2
                vals = np.abs(P.eval_many((mid + rad * x)[:, None])) ** p
                tot += rad * float(w @ vals)
            return tot ** (1.0 / p)
    else:
        def level_value(n):
            X, W = _tensor_gl_nodes(P.m, half, n)
            return float(np.sum(W * np.abs(P.eval_many(X)) ** p)) ** (1.0 / p)

    return _refine(level_value, grid, rtol=1e-8)


def _refine(level_value, grid, rtol):
    n = grid.points_per_axis
    prev = level_value(n)
    levels = 1
    for _ in range(grid.refinement_levels):
        n *= 2
        cur = level_value(n)
        levels += 1
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return NormValue(cur, converged=True, levels_used=levels)
        prev = cur
    return NormValue(prev, converged=(grid.refinement_levels == 0),
                     levels_used=levels)


def lp_norm_cube_fn(f, m, M, p, grid=None, rtol=1e-8):
    """Lp quasinorm of a vectorized callable f(X)->values over the cube Q^m(M)."""
    grid = grid or DEFAULT_GRID
    if math.isinf(p):
        return sup_norm_cube_fn(f, m, M, grid=grid)
    if p <= 0:
        raise ValueError("exponent p must be positive")
    half = (M,) * m

    def level_value(n):
        X, W = _tensor_gl_nodes(m, half, n)
        return float(np.sum(W * np.abs(f(X)) ** p)) ** (1.0 / p)

    return _refine(level_value, grid, rtol=rtol)


def _golden_polish(fun, x0, radii, half_widths, sweeps=2, iters=60):
    """Coordinate-wise golden-section maximization of fun around x0."""
    g = (math.sqrt(5.0) - 1) / 2
    x = np.array(x0, dtype=float)
    for _ in range(sweeps):
        for j in range(len(x)):
            a = max(-half_widths[j], x[j] - radii[j])
            b = min(half_widths[j], x[j] + radii[j])
            c, d = b - g * (b - a), a + g * (b - a)
            xc = x.copy()
            xd = x.copy()
            for _ in range(iters):
                xc[j], xd[j] = c, d
                if fun(xc) > fun(xd):
                    b, d = d, c
                    c = b - g * (b - a)
                else:
                    a, c = c, d
                    d = a + g * (b - a)
            x[j] = (a + b) / 2
    return x


def sup_norm_cube(P, M, grid=None):
    """Sup norm of |P| over the cube: dense extrema grid plus local refinement."""
    if P.is_zero():
        return NormValue(0.0)
    return sup_norm_cube_fn(lambda X: P.eval_many(X), P.m, M, grid=grid,
                            degrees=P.degrees_per_axis())


def sup_norm_cube_fn(f, m, M, grid=None, degrees=None):
    grid = grid or DEFAULT_GRID
    if degrees is None:
        degrees = (grid.points_per_axis,) * m
    sizes = [min(max(33, 8 * (d + 1) + 1), grid.max_points_per_axis)
             for d in degrees]
    axes = [cheb_extrema(s, M) for s in sizes]
    if m == 1:
        X = axes[0][:, None]
    else:
        grids = np.meshgrid(*axes, indexing="ij")
        X = np.column_stack([g.ravel() for g in grids])
    vals = np.abs(f(X))
    k = int(np.argmax(vals))
    x0 = X[k]
    radii = [3.0 * M / s for s in sizes]

    def fun(x):
        return float(np.abs(f(np.asarray(x, dtype=float)[None, :]))[0])

    xb = _golden_polish(fun, x0, radii, (M,) * m)
    return NormValue(max(float(vals[k]), fun(xb)))


# ---------------------------------------------------------------------------
# Bodies: nested-section tensor rule
# ---------------------------------------------------------------------------

def body_nodes(body, n_per_axis):
    """Tensor Gauss-Legendre nodes mapped into the body, with weights.

    Axis j is scaled by the section half-width given the previous
    coordinates; all nodes are genuine interior points of the body.
    """
    lam, sig = body.lam, body.sigma
    x, w = leggauss(n_per_axis)
    X = (sig[0] * x)[:, None]
    W = sig[0] * w
    for j in range(1, body.m):
        if math.isinf(lam):
            h = np.full(len(X), sig[j])
        else:
            s = np.sum((np.abs(X) / np.asarray(sig[:j])) ** lam, axis=1)
            h = sig[j] * np.maximum(1.0 - s, 0.0) ** (1.0 / lam)
        Xnew = np.empty((len(X) * n_per_axis, j + 1))
        Xnew[:, :j] = np.repeat(X, n_per_axis, axis=0)
        Xnew[:, j] = (h[:, None] * x[None, :]).ravel()
        W = (W * h)[:, None] * w[None, :]
        X, W = Xnew, W.ravel()
    return X, W


def _body_point_from_unit(body, u):
    """Map a point of [-1,1]^m into the body through the section scaling."""
    lam, sig = body.lam, body.sigma
    x = np.zeros(body.m)
    s = 0.0
    for j in range(body.m):
        h = sig[j] if math.isinf(lam) else sig[j] * max(1.0 - s, 0.0) ** (1 / lam)
        x[j] = h * u[j]
        if not math.isinf(lam):
            s += abs(x[j] / sig[j]) ** lam
    return x


def lp_norm_body(P, body, p, grid=None):
    """Lp quasinorm of a polynomial over a body (nested-section tensor rule).

    p = inf takes the max of |P| over mapped grid points with local
    refinement in the unit-cube parametrization (which stays inside the
    body).  Finite p refines until 1e-6 relative agreement; even integer p
    over a box body is exact at the first adequate level.
    """
    grid = grid or DEFAULT_GRID
    if P.m != body.m:
        raise ValueError("dimension mismatch")
    if P.is_zero():
        return NormValue(0.0)
    degs = P.degrees_per_axis()

    if math.isinf(p):
        sizes = [min(max(33, 8 * (d + 1) + 1), grid.max_points_per_axis)
                 for d in degs]
        axes = [cheb_extrema(s) for s in sizes]
        if body.m == 1:
            U = axes[0][:, None]
        else:
            grids = np.meshgrid(*axes, indexing="ij")
            U = np.column_stack([g.ravel() for g in grids])
        X = np.array([_body_point_from_unit(body, u) for u in U]) \
            if not math.isinf(body.lam) else U * np.asarray(body.sigma)
        vals = np.abs(P.eval_many(X))
        k = int(np.argmax(vals))

        def fun(u):
            pt = _body_point_from_unit(body, np.asarray(u))
            return abs(P.eval_many(pt[None, :])[0])

        ub = _golden_polish(fun, U[k], [3.0 / s for s in sizes], (1.0,) * body.m)
        return NormValue(max(float(vals[k]), fun(ub)))

    if p <= 0:
        raise ValueError("exponent p must be positive")

    exact_even = (math.isinf(body.lam) and float(p).is_integer()
                  and int(p) % 2 == 0)
    if exact_even:
        n = max(int(p) * max(degs) // 2 + 1, 2)
        X, W = body_nodes(body, n)
        v = float(np.sum(W * np.abs(P.eval_many(X)) ** p)) ** (1.0 / p)
        return NormValue(v)

    def level_value(n):
        X, W = body_nodes(body, n)
        return float(np.sum(W * np.abs(P.eval_many(X)) ** p)) ** (1.0 / p)

    return _refine(level_value, grid, rtol=1e-6)


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------

EIG_FLOOR_REL = 1e-13


@dataclass
class GramMatrix:
    """Inner products of monomials over a domain, with a conditioning guard."""

    basis: list
    matrix: np.ndarray
    domain: object

    def __post_init__(self):
        self._eigvals = None

    def _eigs(self):
        if self._eigvals is None:
            self._eigvals = np.linalg.eigvalsh(self.matrix)
        return self._eigvals

    @property
    def min_eigenvalue(self):
        return float(self._eigs()[0])

    @property
    def condition_estimate(self):
        e = self._eigs()
        return float(e[-1] / max(e[0], 1e-300))

    def solve(self, rhs):
        """Solve G x = rhs through the symmetric eigen-decomposition.

        Raises IllConditionedGramError when any eigenvalue falls below
        1e-13 times the largest (no silent regularization).
        """
        vals, vecs = np.linalg.eigh(self.matrix)
        floor = EIG_FLOOR_REL * vals[-1]
        if vals[0] < floor:
            raise IllConditionedGramError(
                f"Gram eigenvalue {vals[0]:.3e} below floor {floor:.3e} "
                f"(condition estimate {self.condition_estimate:.3e})")
        y = vecs.T @ np.asarray(rhs)
        return vecs @ (y / vals)


def gram_matrix(basis, domain, grid=None):
    """Gram matrix of monomials x^beta over a cube ("cube", m, M) or a body.

    Cube entries use the closed form prod_j M^(b+b'+1) (1+(-1)^(b+b')) / (b+b'+1);
    body entries run the nested-section rule at an exactness-adequate level
    (box bodies) or with refinement.
    """
    basis = [tuple(b) for b in basis]
    if len(set(basis)) != len(basis):
        raise ValueError("basis exponents must be distinct")
    if not basis:
        raise ValueError("basis must be nonempty")

    if isinstance(domain, tuple) and domain and domain[0] == "cube":
        _, m, M = domain
        G = np.empty((len(basis), len(basis)))
        for i, b1 in enumerate(basis):
            for j in range(i, len(basis)):
                b2 = basis[j]
                v = 1.0
                for k in range(m):
                    s = b1[k] + b2[k]
                    v *= M ** (s + 1) * (1 + (-1) ** s) / (s + 1)
                G[i, j] = G[j, i] = v
        return GramMatrix(basis, G, domain)

    if not isinstance(domain, ConvexBody):
        raise ValueError("domain must be ('cube', m, M) or a ConvexBody")
    body = domain
    grid = grid or DEFAULT_GRID
    maxdeg = max(max(b) for b in basis)

    def level_matrix(n):
        X, W = body_nodes(body, n)
        Phi = monomial_matrix(basis, X)
        return (Phi * W[:, None]).T @ Phi

    if math.isinf(body.lam):
        G = level_matrix(maxdeg + 1)  # exact for polynomial entries
        return GramMatrix(basis, G, domain)

    n = max(grid.points_per_axis, maxdeg + 1)
    prev = level_matrix(n)
    for _ in range(grid.refinement_levels):
        n *= 2
        cur = level_matrix(n)
        if np.max(np.abs(cur - prev)) <= 1e-6 * max(np.max(np.abs(cur)), 1e-300):
            return GramMatrix(basis, cur, domain)
        prev = cur
    return GramMatrix(basis, prev, domain)
