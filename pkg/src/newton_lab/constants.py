"""Sharp constants for derivative-at-zero functionals over polynomial classes.

Four families are computed, all normalized by scale^(N + m/p):

* tilde_m   -- polynomials with exponents in a dilated body, norm on the unit cube;
* markov_m  -- total-degree polynomials, norm on the polar of the body;
* trig_p_constant -- trigonometric polynomials with spectrum in the dilated
  body, norms over the period cube;
* entire_e2 -- the p = 2 constant for band-limited functions (the a -> inf
  limit of the others), from the Fourier-representation argument below.

Method dispatch by exponent p:

* p = 2: the supremum of |L(P)| / ||P||_2 over a coefficient space equals
  the l2 norm of L on any orthonormal basis of that space.  Over the unit
  cube with a downward-closed exponent set, tensor products of normalized
  Legendre polynomials are such a basis, so the generalized Rayleigh
  quotient sqrt(L^H G^-1 L) is evaluated exactly through the Legendre
  change of basis (coefficients kept as exact rationals).  Over a body
  domain the same quantity comes from a QR factorization of the
  weight-scaled node matrix, which is the numerically stable form of the
  Gram solve.
* p = inf: a discretized Chebyshev problem: maximize the linear functional
  subject to |P(x)| <= 1 on a growing constraint set (base grid plus
  polished local maxima of each iterate).  Each round's LP value is an
  upper bound for the true constant and decreases; dividing by the polished
  global maximum of |P| gives a feasible lower bound, so the returned value
  carries a certified bracket.  Complex coefficient searches rotate the
  objective to be real and approximate each modulus constraint by a
  regular polygon of supporting half-planes.
* other p: non-certified multistart ascent on the normalized coefficient
  sphere (the quasinorm range p < 1 is nonconvex).

For entire_e2: a band-limited square-integrable function is the inverse
Fourier transform of a density on the body V, so |D_N f(x)| is at most
(2 pi)^{-m/2} ||density||_2 ||symbol||_{L2(V)} by Cauchy-Schwarz, with
equality at x = 0 for the density conj(symbol); hence
E_2 = (2 pi)^{-m/2} * || sum b_alpha (i t)^alpha ||_{L2(V)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.linalg import solve_triangular
from scipy.optimize import linprog, minimize

from .bodies import ConvexBody, lattice_points
from .polycore import DiffOperator, Polynomial, TrigPolynomial, grlex_key
from .quadrature import (DEFAULT_GRID, GridSpec, NormValue, cheb_extrema,
                         lp_norm_body, lp_norm_cube, monomial_matrix,
                         sup_norm_cube, lp_norm_cube_fn)
from . import quadrature as _quad


class DegenerateFunctionalError(ValueError):
    """The operator annihilates every member of the class."""


class SolverError(RuntimeError):
    """An internal optimization failed unexpectedly."""


# ---------------------------------------------------------------------------
# Exact Legendre tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _legendre_coeffs(k):
    """Monomial coefficients of the Legendre polynomial P_k, exact rationals."""
    if k == 0:
        return (Fraction(1),)
    if k == 1:
        return (Fraction(0), Fraction(1))
    a = _legendre_coeffs(k - 1)
    b = _legendre_coeffs(k - 2)
    out = [Fraction(0)] * (k + 1)
    for j, c in enumerate(a):
        out[j + 1] += Fraction(2 * k - 1, k) * c
    for j, c in enumerate(b):
        out[j] -= Fraction(k - 1, k) * c
    return tuple(out)


@lru_cache(maxsize=None)
def legendre_derivative_at_zero(k, l):
    """(d^l P_k / dx^l)(0) as an exact rational."""
    if l > k:
        return Fraction(0)
    return _legendre_coeffs(k)[l] * math.factorial(l)


@lru_cache(maxsize=None)
def _q(l, k):
    """l-th derivative at 0 of the L2([-1,1])-normalized Legendre polynomial."""
    return math.sqrt((2 * k + 1) / 2.0) * float(legendre_derivative_at_zero(k, l))


# ---------------------------------------------------------------------------
# Result type
# ---------------------------------------------------------------------------

@dataclass
class SharpConstantResult:
    """A computed sharp constant with its extremal object and solver metadata."""

    value: float
    extremal: object  # Polynomial | TrigPolynomial | None
    kind: str  # tildeM | markovM | trigP | entireE
    p: float
    a_or_n: float
    operator: DiffOperator
    body: ConvexBody
    method: str  # closed_form | gram_rayleigh | lp_discretized | multistart
    tolerance: float
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def to_json_dict(self):
        d = {
            "kind": self.kind,
            "p": "inf" if math.isinf(self.p) else self.p,
            "a": "inf" if math.isinf(self.a_or_n) else self.a_or_n,
            "N": self.operator.order,
            "body": self.body.descriptor(),
            "value": self.value,
            "method": self.method,
            "tolerance": None if math.isnan(self.tolerance) else self.tolerance,
            "extremal": None,
        }
        if isinstance(self.extremal, Polynomial):
            d["extremal"] = self.extremal.to_json_dict()
        elif isinstance(self.extremal, TrigPolynomial):
            d["extremal"] = {
                "m": self.extremal.m,
                "spectrum": [
                    {"theta": list(t), "re": c.real, "im": c.imag}
                    for t, c in sorted(self.extremal.terms.items())
                ],
            }
        return d


def _functional_vector(D, exponents):
    """L_beta = D_N applied at 0 to the monomial x^beta (zero off the order shell)."""
    L = np.zeros(len(exponents), dtype=complex)
    for k, beta in enumerate(exponents):
        b = D.terms.get(tuple(beta))
        if b is not None:
            f = 1
            for bj in beta:
                f *= math.factorial(bj)
            L[k] = b * f
    return L


# ---------------------------------------------------------------------------
# p = 2: Rayleigh quotient paths
# ---------------------------------------------------------------------------

def _rayleigh_cube(D, exponents):
    """sup |D_N(P)(0)| / ||P||_{L2(unit cube)} over span{x^beta}.

    Exact through the tensor-Legendre orthonormal basis; requires the
    exponent set to be downward closed (true for every dilate of a
    coordinate-symmetric body).  Returns (value, extremal polynomial).
    """
    m = D.m
    sq = Fraction(0)
    Lvals = np.zeros(len(exponents), dtype=complex)
    for k, beta in enumerate(exponents):
        tot = 0j
        for alpha, b in D.terms.items():
            w = 1.0
            for aj, bj in zip(alpha, beta):
                w *= _q(aj, bj)
                if w == 0.0:
                    break
            if w:
                tot += b * w
        Lvals[k] = tot
    s = math.fsum(abs(v) ** 2 for v in Lvals)
    value = math.sqrt(s)
    if value == 0.0:
        raise DegenerateFunctionalError(
            "operator vanishes on the whole class (no exponent of its order)")

    # extremal: sum over beta of conj(L(phi_beta)) * phi_beta, in monomials
    terms = {}
    for k, beta in enumerate(exponents):
        cb = Lvals[k].conjugate()
        if cb == 0:
            continue
        # expand the normalized tensor-Legendre polynomial for beta
        factors = []
        for bj in beta:
            norm = math.sqrt((2 * bj + 1) / 2.0)
            factors.append([(g, norm * float(c))
                            for g, c in enumerate(_legendre_coeffs(bj)) if c])
        stack = [((), 1.0)]
        for fac in factors:
            stack = [(g + (gj,), w * wj) for g, w in stack for gj, wj in fac]
        for gamma, w in stack:
            terms[gamma] = terms.get(gamma, 0) + cb * w
    return value, Polynomial(m, terms)


def _rayleigh_body(D, exponents, domain_body, grid):
    """Same supremum with the L2 norm over a body, via QR of the node matrix.

    With nodes x_i and weights w_i, G = Phi^T diag(w) Phi and
    sqrt(L^H G^-1 L) = ||R^-T L|| for the QR factor R of sqrt(w) Phi.
    Box bodies are exact at the first adequate level; curved bodies refine.
    """
    L = _functional_vector(D, exponents)
    if not L.any():
        raise DegenerateFunctionalError(
            "operator vanishes on the whole class (no exponent of its order)")
    maxdeg = max(max(b) for b in exponents)

    def level(n):
        X, W = _quad.body_nodes(domain_body, n)
        A = np.sqrt(W)[:, None] * monomial_matrix(exponents, X)
        R = np.linalg.qr(A, mode="r")
        d = np.abs(np.diag(R))
        if d.min() < 1e-13 * d.max():
            raise _quad.IllConditionedGramError(
                f"rank-deficient node matrix (diag ratio {d.min()/d.max():.2e})")
        y = solve_triangular(R, L, trans="T")
        c = solve_triangular(R, y.conjugate())
        return float(np.linalg.norm(y)), c

    if math.isinf(domain_body.lam):
        v, c = level(maxdeg + 1)
        conv, levels = True, 1
    else:
        n = max(grid.points_per_axis, 2 * maxdeg + 1)
        v, c = level(n)
        conv, levels = False, 1
        for _ in range(grid.refinement_levels):
            n *= 2
            v2, c2 = level(n)
            levels += 1
            done = abs(v2 - v) <= 1e-8 * abs(v2)
            v, c = v2, c2
            if done:
                conv = True
                break
    extremal = Polynomial(domain_body.m,
                          {tuple(b): c[k] for k, b in enumerate(exponents)})
    return v, extremal, conv, levels


# ---------------------------------------------------------------------------
# p = inf: discretized Chebyshev problem
# ---------------------------------------------------------------------------

def _local_maxima_points(vals_nd):
    """Boolean mask of grid-local maxima (compared over axis neighbors)."""
    mask = np.ones_like(vals_nd, dtype=bool)
    for ax in range(vals_nd.ndim):
        v = np.moveaxis(vals_nd, ax, 0)
        m = np.moveaxis(mask, ax, 0)
        m[:-1] &= v[:-1] >= v[1:]
        m[1:] &= v[1:] >= v[:-1]
    return mask


def _golden_polish_batch(evalfn, X0, radii, lo, hi, iters=42, sweeps=2):
    """Vectorized coordinate-wise golden-section ascent of evalfn on rows of X0.

    `radii` is a (k, m) array of per-candidate bracket half-widths (grid
    neighbor distances); brackets are clipped to [lo, hi] per axis.
    """
    g = (math.sqrt(5.0) - 1) / 2
    X = np.array(X0, dtype=float)
    radii = np.asarray(radii, dtype=float)
    mdim = X.shape[1]
    for _ in range(sweeps):
        for j in range(mdim):
            a = np.maximum(lo[j], X[:, j] - radii[:, j])
            b = np.minimum(hi[j], X[:, j] + radii[:, j])
            Xt = X.copy()
            for _ in range(iters):
                c = b - g * (b - a)
                d = a + g * (b - a)
                Xt[:, j] = c
                fc = evalfn(Xt)
                Xt[:, j] = d
                fd = evalfn(Xt)
                keep_left = fc > fd
                b = np.where(keep_left, d, b)
                a = np.where(keep_left, a, c)
            X[:, j] = (a + b) / 2
    return X


def _tensor_from_axes(axes):
    if len(axes) == 1:
        return axes[0][:, None]
    G = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in G])


def _neighbor_radii(axes, flat_idx, shape):
    """Per-candidate per-axis bracket half-widths: distance to grid neighbors."""
    multi = np.unravel_index(flat_idx, shape)
    out = np.empty((len(flat_idx), len(axes)))
    for j, ax in enumerate(axes):
        gaps = np.diff(ax)
        left = gaps[np.maximum(multi[j] - 1, 0)]
        right = gaps[np.minimum(multi[j], len(gaps) - 1)]
        out[:, j] = np.maximum(left, right)
    return out


class _CubeDomain:
    """Constraint domain |P| <= 1 over an axis box (half-widths per axis)."""

    def __init__(self, half_widths):
        self.half = tuple(float(h) for h in half_widths)
        self.m = len(self.half)

    def grid(self, sizes):
        axes = [cheb_extrema(s, h) for s, h in zip(sizes, self.half)]
        return _tensor_from_axes(axes), axes

    def polish(self, evalfn, X0, radii):
        lo = [-h for h in self.half]
        return _golden_polish_batch(evalfn, X0, radii, lo, self.half)


class _BodyDomain:
    """Constraint domain |P| <= 1 over a curved body, parametrized by the unit cube."""

    def __init__(self, body):
        self.body = body
        self.m = body.m

    def _map(self, U):
        lam, sig = self.body.lam, self.body.sigma
        U = np.asarray(U, dtype=float)
        X = np.empty_like(U)
        s = np.zeros(len(U))
        for j in range(self.m):
            h = sig[j] * np.maximum(1.0 - s, 0.0) ** (1.0 / lam)
            X[:, j] = h * U[:, j]
            s = s + np.abs(X[:, j] / sig[j]) ** lam
        return X

    def unit_grid(self, sizes):
        return _tensor_from_axes([cheb_extrema(s) for s in sizes]), \
            [cheb_extrema(s) for s in sizes]

    def grid(self, sizes):
        U, axes = self.unit_grid(sizes)
        return self._map(U), axes

    def polish(self, evalfn, U0, radii):
        # ascent in the unit-cube parameters keeps iterates inside the body
        fn = lambda U: evalfn(self._map(U))
        lo = [-1.0] * self.m
        hi = [1.0] * self.m
        return self._map(_golden_polish_batch(fn, U0, radii, lo, hi))


_HIGHS_OPTS = {"primal_feasibility_tolerance": 1e-10,
               "dual_feasibility_tolerance": 1e-10}


def _linprog_robust(cvec, A_ub, b_ub, A_eq=None, b_eq=None, nvars=None):
    """linprog with fallbacks: tight tolerances, defaults, then no presolve."""
    for opts in (_HIGHS_OPTS, {}, {"presolve": False}):
        res = linprog(cvec, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=[(None, None)] * (nvars or len(cvec)),
                      method="highs", options=opts)
        if res.status == 0:
            return res
    raise SolverError(f"LP failed: {res.message}")


def _linf_lp(exponents, L, domain, tol=1e-6, facets=32, max_rounds=40,
             feas_tol=None):
    """Maximize |L . c| subject to |P_c| <= 1 on the domain (cutting planes).

    Returns (value, coefficients, meta).  The value is the final LP optimum
    (an upper bound for the true constant); meta carries the certified
    lower bound value/worst and the per-round value history.  When the
    value-optimal face is degenerate the raw LP vertex wanders and keeps
    producing fresh overshoots, so a second "flattening" solve re-selects,
    among the value-optimal coefficient vectors, the one minimizing the sup
    over the detection grid and the accumulated polished maxima (the
    discrete extremal polynomial).
    """
    n = len(exponents)
    m = domain.m
    if feas_tol is None:
        feas_tol = max(1e-9, 0.5 * tol)
    degs = [0] * m
    for e in exponents:
        for j in range(m):
            degs[j] = max(degs[j], e[j])

    # complex objective: factor out a global phase; fall back to polygon mode
    k0 = int(np.argmax(np.abs(L)))
    phase = L[k0] / abs(L[k0])
    Lrot = L / phase
    real_mode = float(np.max(np.abs(Lrot.imag))) <= 1e-12 * float(
        np.max(np.abs(Lrot)))

    base_sizes = [min(4 * (d + 1) + 9, 257) for d in degs]
    detect_sizes = [min(8 * (d + 1) + 1, 1025) for d in degs]
    pts, _ = domain.grid(base_sizes)

    if isinstance(domain, _BodyDomain):
        polish_seeds, detect_axes = domain.unit_grid(detect_sizes)
        detectX = domain._map(polish_seeds)
    else:
        detectX, detect_axes = domain.grid(detect_sizes)
        polish_seeds = detectX
    detect_shape = tuple(detect_sizes)
    Mdet = monomial_matrix(exponents, detectX)
    Mdet_sp = sparse.csr_matrix(Mdet)

    # polygon approximation of the modulus allows |P| up to 1/cos(pi/K)
    allowance = 1.0 if real_mode else 1.0 / math.cos(math.pi / facets)

    if real_mode:
        obj = Lrot.real
    else:
        angles = 2 * math.pi * np.arange(facets) / facets
        cosf, sinf = np.cos(angles), np.sin(angles)
        obj = np.concatenate([Lrot.real, -Lrot.imag])

    def constraint_rows(P):
        A = sparse.csr_matrix(monomial_matrix(exponents, P))
        if real_mode:
            return sparse.vstack([A, -A], format="csr")
        return sparse.vstack([sparse.hstack([ck * A, sk * A])
                              for ck, sk in zip(cosf, sinf)], format="csr")

    def to_complex(x):
        return x.astype(complex) if real_mode else x[:n] + 1j * x[n:]

    def survey(c):
        """Polished local maxima of |P_c|: (points, values, worst)."""
        vals = np.abs(Mdet @ c)
        mask = _local_maxima_points(vals.reshape(detect_shape)).ravel()
        cand_idx = np.flatnonzero(mask)
        if len(cand_idx) > 512:
            cand_idx = cand_idx[np.argsort(vals[cand_idx])[::-1][:512]]
        # spikes can hide between grid points below any value threshold:
        # keep the top sampled values as extra seeds regardless of maskiness
        top = np.argsort(vals)[::-1][:64]
        cand_idx = np.unique(np.concatenate([cand_idx, top]))
        evalfn = lambda X: np.abs(monomial_matrix(exponents, X) @ c)
        radii = _neighbor_radii(detect_axes, cand_idx, detect_shape)
        polished = domain.polish(evalfn, polish_seeds[cand_idx], radii)
        pv = evalfn(polished)
        worst = max(float(pv.max()), float(vals.max()))
        return polished, pv, worst

    def flatten(Aub, v, cuts):
        """Among value-optimal vectors minimize the sup over detection
        points and accumulated cuts."""
        rows = [Mdet_sp]
        if len(cuts):
            rows.append(sparse.csr_matrix(monomial_matrix(exponents, cuts)))
        D = sparse.vstack(rows, format="csr")
        if not real_mode:
            D = sparse.vstack([sparse.hstack([ck * D, sk * D])
                               for ck, sk in zip(cosf, sinf)], format="csr")
        nd = D.shape[0]
        zero = sparse.csr_matrix((Aub.shape[0], 1))
        mone = sparse.csr_matrix(-np.ones((2 * nd if real_mode else nd, 1)))
        body_rows = sparse.vstack([D, -D]) if real_mode else D
        Af = sparse.vstack([sparse.hstack([Aub, zero]),
                            sparse.hstack([body_rows, mone])], format="csr")
        bf = np.concatenate([np.ones(Aub.shape[0]),
                             np.zeros(body_rows.shape[0])])
        nv = len(obj)
        cf = np.zeros(nv + 1)
        cf[-1] = 1.0
        Aeq = sparse.csr_matrix(np.concatenate([obj, [0.0]])[None, :])
        res = _linprog_robust(cf, Af, bf, A_eq=Aeq, b_eq=np.array([v]),
                              nvars=nv + 1)
        return res.x[:nv]

    history = []
    converged = False
    value = math.inf
    worst = math.inf
    cuts = np.empty((0, m))
    c = None

    def gate(v, w):
        bracket = v - v / max(w, 1.0)
        small = len(history) < 2 or abs(history[-2] - v) <= tol * v
        return (w <= allowance * (1.0 + feas_tol)
                and bracket <= (tol + (allowance - 1.0)) * v and small)

    for rnd in range(max_rounds):
        Aub = constraint_rows(pts)
        res = _linprog_robust(-obj, Aub, np.ones(Aub.shape[0]),
                              nvars=len(obj))
        value = float(obj @ res.x)
        history.append(value)
        c = to_complex(res.x)
        polished, pv, worst = survey(c)
        if gate(value, worst):
            converged = True
            break
        # re-select the flattest value-optimal vector and try again
        try:
            cflat = to_complex(flatten(Aub, value, cuts))
            polished2, pv2, worst2 = survey(cflat)
            if worst2 < worst:
                c, polished, pv, worst = cflat, polished2, pv2, worst2
            if gate(value, worst):
                converged = True
                break
        except SolverError:
            pass
        add = polished[pv > allowance * (1.0 + 1e-12)]
        if len(add) == 0:
            # constraints satisfied everywhere found but the bracket is not
            # yet tight: densify the base grid
            base_sizes = [min(2 * s - 1, 2049) for s in base_sizes]
            gp, _ = domain.grid(base_sizes)
            pts = np.vstack([pts, gp])
        else:
            cuts = np.vstack([cuts, add])
            pts = np.unique(np.vstack([pts, add]), axis=0)

    lower = value / max(worst, 1.0)
    meta = {
        "rounds": len(history),
        "history": history,
        "mode": "real" if real_mode else f"polygon{facets}",
        "certified_lower": lower,
        "worst_modulus": worst,
        "constraint_points": len(pts),
    }
    return value, c, converged, meta


# ---------------------------------------------------------------------------
# general p: multistart ascent (non-certified)
# ---------------------------------------------------------------------------

def _multistart_general(exponents, L, p, m, norm_of_coeffs, starts, seed):
    rng = np.random.default_rng(seed)
    n = len(exponents)
    Lr = np.concatenate([L.real, L.imag])

    def objective(x):
        c = x[:n] + 1j * x[n:]
        num = abs(L @ c)
        if num == 0:
            return 0.0
        den = norm_of_coeffs(c)
        return -num / den

    best = None
    for _ in range(max(1, starts)):
        x0 = rng.standard_normal(2 * n)
        if abs(Lr @ x0) < 1e-12:
            x0 += Lr / max(np.linalg.norm(Lr), 1e-300)
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10,
                                "fatol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    c = best.x[:n] + 1j * best.x[n:]
    return -best.fun, c, bool(best.success)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _check_common(p, a, body, D):
    if not (p > 0):
        raise ValueError("p must be positive (use math.inf for sup norm)")
    if a < 1:
        raise ValueError("scale parameter must be >= 1")
    if body.m != D.m:
        raise ValueError("operator and body dimension mismatch")


def _scale_exp(p, N, m):
    return N if math.isinf(p) else N + m / p


def tilde_m(p, D, a, body, grid=None, tol=1e-6, facets=32, starts=16, seed=0):
    """Sharp constant a^{-N-m/p} sup |D_N(P)(0)| / ||P||_{Lp(unit cube)}.

    P ranges over polynomials with exponents in the dilated body a*V.
    """
    grid = grid or DEFAULT_GRID
    _check_common(p, a, body, D)
    exps = lattice_points(body, a)
    if not exps:
        raise ValueError("empty exponent lattice")
    scale = a ** (-_scale_exp(p, D.order, body.m))

    if p == 2:
        sup, extremal = _rayleigh_cube(D, exps)
        return SharpConstantResult(
            value=scale * sup, extremal=extremal, kind="tildeM", p=p,
            a_or_n=a, operator=D, body=body, method="gram_rayleigh",
            tolerance=1e-12, meta={"basis_size": len(exps)})

    L = _functional_vector(D, exps)
    if not L.any():
        raise DegenerateFunctionalError(
            "operator vanishes on the whole class (no exponent of its order)")

    if math.isinf(p):
        dom = _CubeDomain((1.0,) * body.m)
        sup, c, conv, meta = _linf_lp(exps, L, dom, tol=tol, facets=facets)
        extremal = Polynomial(body.m,
                              {tuple(b): c[k] for k, b in enumerate(exps)})
        return SharpConstantResult(
            value=scale * sup, extremal=extremal, kind="tildeM", p=p,
            a_or_n=a, operator=D, body=body, method="lp_discretized",
            tolerance=tol, converged=conv, meta=meta)

    norm_fn = lambda c: float(lp_norm_cube(
        Polynomial(body.m, {tuple(b): c[k] for k, b in enumerate(exps)}),
        1.0, p, grid=grid))
    sup, c, ok = _multistart_general(exps, L, p, body.m, norm_fn, starts, seed)
    extremal = Polynomial(body.m, {tuple(b): c[k] for k, b in enumerate(exps)})
    return SharpConstantResult(
        value=scale * sup, extremal=extremal, kind="tildeM", p=p, a_or_n=a,
        operator=D, body=body, method="multistart", tolerance=math.nan,
        converged=ok, meta={"starts": starts, "seed": seed,
                            "certified": False})


def markov_m(p, D, n, body, grid=None, tol=1e-6, facets=32, starts=16, seed=0):
    """Sharp constant n^{-N-m/p} sup |D_N(P)(0)| / ||P||_{Lp(polar body)}.

    P ranges over polynomials of total degree at most n.
    """
    grid = grid or DEFAULT_GRID
    _check_common(p, n, body, D)
    exps = lattice_points(ConvexBody.octahedron(body.m, 1.0), n)
    polar = body.polar()
    scale = n ** (-_scale_exp(p, D.order, body.m))

    if p == 2:
        sup, extremal, conv, levels = _rayleigh_body(D, exps, polar, grid)
        return SharpConstantResult(
            value=scale * sup, extremal=extremal, kind="markovM", p=p,
            a_or_n=n, operator=D, body=body, method="gram_rayleigh",
            tolerance=1e-8, converged=conv,
            meta={"basis_size": len(exps), "levels": levels})

    L = _functional_vector(D, exps)
    if not L.any():
        raise DegenerateFunctionalError(
            "operator vanishes on the whole class (no exponent of its order)")

    if math.isinf(p):
        if math.isinf(polar.lam):
            dom = _CubeDomain(polar.sigma)
        else:
            dom = _BodyDomain(polar)
        sup, c, conv, meta = _linf_lp(exps, L, dom, tol=tol, facets=facets)
        extremal = Polynomial(body.m,
                              {tuple(b): c[k] for k, b in enumerate(exps)})
        return SharpConstantResult(
            value=scale * sup, extremal=extremal, kind="markovM", p=p,
            a_or_n=n, operator=D, body=body, method="lp_discretized",
            tolerance=tol, converged=conv, meta=meta)

    norm_fn = lambda c: float(lp_norm_body(
        Polynomial(body.m, {tuple(b): c[k] for k, b in enumerate(exps)}),
        polar, p, grid=grid))
    sup, c, ok = _multistart_general(exps, L, p, body.m, norm_fn, starts, seed)
    extremal = Polynomial(body.m, {tuple(b): c[k] for k, b in enumerate(exps)})
    return SharpConstantResult(
        value=scale * sup, extremal=extremal, kind="markovM", p=p, a_or_n=n,
        operator=D, body=body, method="multistart", tolerance=math.nan,
        converged=ok, meta={"starts": starts, "seed": seed,
                            "certified": False})


# -- trigonometric class -----------------------------------------------------

def _canonical_half(freqs):
    """Split +-theta pairs: returns (has_zero, list of representatives)."""
    reps = []
    for t in freqs:
        if all(x == 0 for x in t):
            continue
        for x in t:
            if x > 0:
                reps.append(t)
                break
            if x < 0:
                break
    return reps


def _trig_linf_lp(D, freqs, m, tol=1e-6, max_rounds=40, feas_tol=None):
    """sup |D_N(T)(0)| / ||T||_inf over real-valued T with the given spectrum.

    Real-valued parametrization a_0 + sum 2(a cos + b sin); requires the
    operator coefficients to share a global phase so the objective is real.
    """
    k0 = max(D.terms, key=lambda al: abs(D.terms[al]))
    phase = D.terms[k0] / abs(D.terms[k0])
    rot = {al: b / phase for al, b in D.terms.items()}
    if max(abs(b.imag) for b in rot.values()) > 1e-12 * max(
            abs(b) for b in rot.values()):
        raise NotImplementedError(
            "mixed-phase operator coefficients in the sup-norm trigonometric "
            "problem are not supported")
    Drot = DiffOperator(m, rot)

    reps = _canonical_half(freqs)
    has_zero = any(all(x == 0 for x in t) for t in freqs)
    ncols = (1 if has_zero else 0) + 2 * len(reps)

    obj = np.zeros(ncols)
    col = 0
    if has_zero:
        obj[0] = Drot.symbol((0,) * m).real
        col = 1
    for t in reps:
        s = Drot.symbol(t)
        obj[col] = 2 * s.real
        obj[col + 1] = 2 * s.imag
        col += 2

    fmax = [max((abs(t[j]) for t in freqs), default=0) for j in range(m)]

    def design(X):
        cols = []
        if has_zero:
            cols.append(np.ones(len(X)))
        for t in reps:
            ph = X @ np.array(t, dtype=float)
            cols.append(2 * np.cos(ph))
            cols.append(2 * np.sin(ph))
        return np.column_stack(cols)

    def uniform_grid(sizes):
        axes = [np.linspace(-math.pi, math.pi, s, endpoint=False)
                for s in sizes]
        if m == 1:
            return axes[0][:, None]
        G = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([g.ravel() for g in G])

    base_sizes = [min(8 * (f + 1), 512) for f in fmax]
    detect_sizes = [min(16 * (f + 1), 1024) for f in fmax]
    pts = uniform_grid(base_sizes)
    detectX = uniform_grid(detect_sizes)
    Mdet = design(detectX)
    Mdet_sp = sparse.csr_matrix(Mdet)
    spacing = np.array([2 * math.pi / s for s in detect_sizes])
    if feas_tol is None:
        feas_tol = max(1e-9, 0.5 * tol)

    def survey(x):
        vals = np.abs(Mdet @ x)
        mask = _local_maxima_points(vals.reshape(tuple(detect_sizes))).ravel()
        cand = np.flatnonzero(mask)
        if len(cand) > 512:
            cand = cand[np.argsort(vals[cand])[::-1][:512]]
        cand = np.unique(np.concatenate([cand, np.argsort(vals)[::-1][:64]]))
        evalfn = lambda X: np.abs(design(X) @ x)
        radii = np.broadcast_to(spacing, (len(cand), m))
        polished = _golden_polish_batch(evalfn, detectX[cand], radii,
                                        [-2 * math.pi] * m, [2 * math.pi] * m)
        pv = evalfn(polished)
        return polished, pv, max(float(pv.max()), float(vals.max()))

    def flatten(Aub, v, cuts):
        rows = [Mdet_sp]
        if len(cuts):
            rows.append(sparse.csr_matrix(design(cuts)))
        D = sparse.vstack(rows, format="csr")
        nd = D.shape[0]
        zero = sparse.csr_matrix((Aub.shape[0], 1))
        mone = sparse.csr_matrix(-np.ones((2 * nd, 1)))
        Af = sparse.vstack([sparse.hstack([Aub, zero]),
                            sparse.hstack([sparse.vstack([D, -D]), mone])],
                           format="csr")
        bf = np.concatenate([np.ones(Aub.shape[0]), np.zeros(2 * nd)])
        cf = np.zeros(ncols + 1)
        cf[-1] = 1.0
        Aeq = sparse.csr_matrix(np.concatenate([obj, [0.0]])[None, :])
        res = _linprog_robust(cf, Af, bf, A_eq=Aeq, b_eq=np.array([v]),
                              nvars=ncols + 1)
        return res.x[:ncols]

    history = []
    converged = False
    value = math.inf
    worst = math.inf
    x = None
    cuts = np.empty((0, m))

    def gate(v, w):
        small = len(history) < 2 or abs(history[-2] - v) <= tol * v
        return (w <= 1.0 + feas_tol
                and v - v / max(w, 1.0) <= tol * v and small)

    for rnd in range(max_rounds):
        A = sparse.csr_matrix(design(pts))
        Aub = sparse.vstack([A, -A], format="csr")
        res = _linprog_robust(-obj, Aub, np.ones(2 * len(pts)))
        x = res.x
        value = float(obj @ x)
        history.append(value)
        polished, pv, worst = survey(x)
        if gate(value, worst):
            converged = True
            break
        try:
            x2 = flatten(Aub, value, cuts)
            polished2, pv2, worst2 = survey(x2)
            if worst2 < worst:
                x, polished, pv, worst = x2, polished2, pv2, worst2
            if gate(value, worst):
                converged = True
                break
        except SolverError:
            pass
        add = polished[pv > 1.0 + 1e-12]
        if len(add) == 0:
            base_sizes = [min(2 * s, 4096) for s in base_sizes]
            pts = np.vstack([pts, uniform_grid(base_sizes)])
        else:
            cuts = np.vstack([cuts, add])
            pts = np.vstack([pts, add])

    # rebuild the trig coefficients
    terms = {}
    col = 0
    if has_zero:
        terms[(0,) * m] = complex(x[0])
        col = 1
    for t in reps:
        a_c, b_c = x[col], x[col + 1]
        c = complex(a_c, -b_c)
        terms[t] = terms.get(t, 0) + c
        tneg = tuple(-v for v in t)
        terms[tneg] = terms.get(tneg, 0) + c.conjugate()
        col += 2
    meta = {"rounds": len(history), "history": history,
            "mode": "real_trig", "worst_modulus": worst,
            "certified_lower": value / max(worst, 1.0)}
    return value, TrigPolynomial(m, terms), converged, meta


def trig_p_constant(p, D, a, body, grid=None, tol=1e-6):
    """Sharp constant a^{-N-m/p} sup ||D_N(T)||_inf / ||T||_p (period cube).

    T ranges over trigonometric polynomials with spectrum in the dilated
    body.  Only p = 2 (closed form via Parseval and phase alignment) and
    p = inf (discretized problem) are supported.

    For p = 2: ||T||_2^2 = (2 pi)^m sum |c_theta|^2 while
    ||D_N T||_inf <= sum |c_theta| |symbol(theta)| with equality at 0 after
    aligning coefficient phases, so Cauchy-Schwarz gives the closed form
    a^{-N-m/2} (2 pi)^{-m/2} sqrt(sum |symbol(theta)|^2).
    """
    _check_common(p, a, body, D)
    freqs = lattice_points(body, a, nonnegative_only=False)
    if not freqs:
        raise ValueError("empty spectrum")
    m = body.m

    if p == 2:
        s = math.fsum(abs(D.symbol(t)) ** 2 for t in freqs)
        if s == 0.0:
            raise DegenerateFunctionalError("operator symbol vanishes on the "
                                            "whole spectrum")
        value = (a ** (-(D.order + m / 2)) * (2 * math.pi) ** (-m / 2)
                 * math.sqrt(s))
        extremal = TrigPolynomial(
            m, {t: D.symbol(t).conjugate() for t in freqs})
        return SharpConstantResult(
            value=value, extremal=extremal, kind="trigP", p=p, a_or_n=a,
            operator=D, body=body, method="closed_form", tolerance=1e-12,
            meta={"spectrum_size": len(freqs)})

    if math.isinf(p):
        sup, extremal, conv, meta = _trig_linf_lp(D, freqs, m, tol=tol)
        return SharpConstantResult(
            value=a ** (-D.order) * sup, extremal=extremal, kind="trigP",
            p=p, a_or_n=a, operator=D, body=body, method="lp_discretized",
            tolerance=tol, converged=conv, meta=meta)

    raise ValueError("trigonometric constants support p = 2 or p = inf only")


def entire_e2(D, body, grid=None):
    """The p = 2 constant for functions band-limited to the body.

    (2 pi)^{-m/2} times the L2 norm of the operator symbol over the body;
    see the module docstring for the Fourier-representation derivation.
    """
    grid = grid or DEFAULT_GRID
    sym = D.symbol_polynomial()
    nrm = lp_norm_body(sym, body, 2.0, grid=grid)
    value = (2 * math.pi) ** (-body.m / 2) * float(nrm)
    return SharpConstantResult(
        value=value, extremal=None, kind="entireE", p=2.0, a_or_n=math.inf,
        operator=D, body=body, method="closed_form", tolerance=1e-9,
        converged=getattr(nrm, "converged", True),
        meta={"norm_levels": getattr(nrm, "levels_used", 1)})


def extremal_polynomial(p, D, a, body, grid=None, tol=1e-6):
    """Extremal rescaled to the dilated cube with unit derivative functional.

    Returns P_a(x) = U(x/a) normalized so D_N(P_a)(0) = 1; its Lp norm over
    the cube of half-width a is then 1/constant.
    """
    res = tilde_m(p, D, a, body, grid=grid, tol=tol)
    U = res.extremal
    P_a = U.scale_argument(1.0 / a)
    z = D.apply_at_zero(P_a)
    if z == 0:
        raise DegenerateFunctionalError("degenerate extremal: functional "
                                        "vanishes after rescale")
    return P_a * (1.0 / z)


def lift_norm_inequality_check(P, a, tau, M, p, grid=None, rtol=1e-8):
    """Check ||P||_{Lp(cube a)} >= (1 - m M^2 (a tau)^-2)^{1/p} ||R||_{Lp(cube M)}.

    R(t) = P(a tau sin(t_1/(a tau)), ...) is the sine substitution of P.
    For p = inf the prefactor is 1 (exponent-zero convention).
    """
    if not (0 < tau < 1):
        raise ValueError("tau must lie in (0, 1)")
    b = a * tau
    if not (0 < M <= b / math.sqrt(P.m)):
        raise ValueError("require 0 < M <= a tau / sqrt(m)")
    lhs = float(lp_norm_cube(P, a, p, grid=grid))

    def lifted(T):
        return P.eval_many(b * np.sin(np.asarray(T) / b))

    if math.isinf(p):
        factor = 1.0
        rhs = float(lp_norm_cube_fn(lifted, P.m, M, math.inf, grid=grid))
    else:
        factor = (1.0 - P.m * M ** 2 / b ** 2) ** (1.0 / p)
        rhs = float(lp_norm_cube_fn(lifted, P.m, M, p, grid=grid))
    return lhs >= factor * rhs * (1.0 - rtol)


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceStudy:
    """Rows of (a, constant, reference, relative gap) plus trend statistics."""

    rows: list
    reference_kind: str

    @property
    def gaps(self):
        return [r["rel_gap"] for r in self.rows if r["rel_gap"] is not None]

    @property
    def monotone_fraction(self):
        g = self.gaps
        if len(g) < 2:
            return 1.0
        dec = sum(1 for i in range(len(g) - 1) if g[i + 1] < g[i])
        return dec / (len(g) - 1)

    @property
    def final_gap(self):
        g = self.gaps
        return g[-1] if g else None

    def summary(self):
        return {"final_gap": self.final_gap,
                "monotone_fraction": self.monotone_fraction,
                "rows": len(self.rows),
                "reference": self.reference_kind}


def _closed_form_sup_reference(D, body):
    """Limit constant for p = inf: |b| prod sigma_j^alpha_j for one-term
    operators over box bodies; None when no closed form applies."""
    if not math.isinf(body.lam) or len(D.terms) != 1:
        return None
    (alpha, b), = D.terms.items()
    val = abs(b)
    for aj, sj in zip(alpha, body.sigma):
        val *= sj ** aj
    return val


def convergence_study(p, D, body, a_values, grid=None, jobs=1, tol=1e-6):
    """Constants along increasing a, with the limiting reference when known.

    p = 2 compares against entire_e2; p = inf against the closed-form
    product limit for one-term operators over box bodies.  Values between
    consecutive lattice thresholds change only through the power-of-a
    normalization (the underlying supremum is piecewise constant in a).
    """
    a_values = list(a_values)
    if not a_values:
        raise ValueError("a_values must be nonempty")
    if any(a2 <= a1 for a1, a2 in zip(a_values, a_values[1:])):
        raise ValueError("a_values must be strictly increasing")
    if a_values[0] < 1:
        raise ValueError("a_values must start at 1 or above")

    if p == 2:
        ref = entire_e2(D, body, grid=grid).value
        ref_kind = "entire_e2"
    elif math.isinf(p):
        ref = _closed_form_sup_reference(D, body)
        ref_kind = "product_limit" if ref is not None else "none"
    else:
        ref, ref_kind = None, "none"

    def one(a):
        r = tilde_m(p, D, a, body, grid=grid, tol=tol)
        gap = abs(r.value - ref) / ref if ref else None
        return {"a": a, "tilde_m": r.value, "e_value": ref, "rel_gap": gap,
                "converged": r.converged}

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(one, a_values))
    else:
        rows = [one(a) for a in a_values]
    return ConvergenceStudy(rows, ref_kind)
