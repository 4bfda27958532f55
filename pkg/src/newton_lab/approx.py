"""Best uniform polynomial approximation (Remez exchange) and exponential targets.

The driver application approximates e^{i lam x} on expanding intervals by
polynomials of matching degree, where the error decays exponentially with
explicit rate constants:

    C1(tau) = 2 (1 + 1/sqrt(1 - tau^2)),
    C2(tau) = log(1 + sqrt(1 - tau^2)) - log(tau) - sqrt(1 - tau^2) > 0,

for intervals [-a tau/|lam|, a tau/|lam|] and degree floor(a).  Complex
targets are split into real and imaginary Remez problems; the combined
error stays far below the rate bound, and a violation raises (it signals a
solver bug, not an unlucky input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polycore import Polynomial


class RateBoundError(RuntimeError):
    """Measured approximation error exceeded the guaranteed rate bound."""


class RemezError(RuntimeError):
    """The exchange iteration could not establish an equioscillating reference."""


@dataclass
class ApproxResult:
    """Best-approximation output: polynomial, error, and the alternation set."""

    polynomial: Polynomial
    gamma: float
    measured_error: float
    equioscillation_points: np.ndarray
    converged: bool
    iterations: int
    cheb_coeffs: np.ndarray  # in y = x/gamma; kept for stable evaluation

    def eval(self, x):
        """Stable (Clenshaw) evaluation at points x."""
        y = np.asarray(x, dtype=float) / self.gamma
        return np.polynomial.chebyshev.chebval(y, self.cheb_coeffs)


def _cheb_points(n):
    j = np.arange(n)
    return np.sin(np.pi * (2 * j - (n - 1)) / (2 * (n - 1)))


def _trim_alternation(idx, r, need):
    """Trim an alternating candidate list to `need` points, keeping large residuals."""
    idx = list(idx)
    while len(idx) > need:
        vals = [abs(r[i]) for i in idx]
        if len(idx) - need == 1:
            # drop the weaker endpoint
            if vals[0] <= vals[-1]:
                idx.pop(0)
            else:
                idx.pop()
        else:
            # drop the adjacent pair with the smallest larger member
            k = min(range(len(idx) - 1),
                    key=lambda i: max(vals[i], vals[i + 1]))
            del idx[k:k + 2]
    return idx


def remez_best_approx(f, degree, gamma, tol=1e-10, max_iter=100):
    """Best uniform approximation of f on [-gamma, gamma] by degree-`degree` polynomials.

    Exchange iteration on degree+2 reference points initialized at Chebyshev
    points; all references are replaced each step by the alternating extrema
    of the residual.  Converged when the reference residuals equalize to
    `tol` relative (or the residual is at rounding level).
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d = int(degree)
    g = lambda y: np.asarray(f(gamma * np.asarray(y, dtype=float)), dtype=float)

    refs = _cheb_points(d + 2)
    dense = np.linspace(-1.0, 1.0, max(4097, 64 * (d + 2) + 1))
    gdense = g(dense)
    fscale = max(float(np.max(np.abs(gdense))), 1e-300)
    phi = (math.sqrt(5.0) - 1) / 2

    def _polish_ref(coefs, k):
        """Golden-section sharpening of |r| around dense-grid index k."""
        a = dense[max(k - 1, 0)]
        b = dense[min(k + 1, len(dense) - 1)]
        rf = lambda y: abs(float(g(np.array([y]))[0]
                                 - np.polynomial.chebyshev.chebval(y, coefs)))
        c, dd = b - phi * (b - a), a + phi * (b - a)
        for _ in range(48):
            if rf(c) > rf(dd):
                b, dd = dd, c
                c = b - phi * (b - a)
            else:
                a, c = c, dd
                dd = a + phi * (b - a)
        return (a + b) / 2

    coefs = np.zeros(d + 1)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        V = np.polynomial.chebyshev.chebvander(refs, d)
        alt = ((-1.0) ** np.arange(d + 2))[:, None]
        A = np.hstack([V, alt])
        sol = np.linalg.solve(A, g(refs))
        coefs, h = sol[:-1], sol[-1]

        r = gdense - np.polynomial.chebyshev.chebval(dense, coefs)
        emax = float(np.max(np.abs(r)))
        if emax <= 1e-13 * fscale:
            converged = True  # interpolation is exact to rounding
            break

        # alternating extrema: one argmax of |r| per sign run
        signs = np.sign(r)
        signs[signs == 0] = 1
        run_starts = np.flatnonzero(np.diff(signs)) + 1
        bounds = np.concatenate([[0], run_starts, [len(dense)]])
        cand = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            k = lo + int(np.argmax(np.abs(r[lo:hi])))
            cand.append(k)
        # degenerate residuals (few sign changes) are padded outward with the
        # most opposite-signed points so the leveled solve can re-seed
        while len(cand) < d + 2:
            if cand[-1] < len(dense) - 1:
                seg = r[cand[-1] + 1:]
                want = -signs[cand[-1]]
                cand.append(cand[-1] + 1 + int(np.argmax(want * seg)))
            elif cand[0] > 0:
                seg = r[:cand[0]]
                want = -signs[cand[0]]
                cand.insert(0, int(np.argmax(want * seg)))
            else:
                raise RemezError(
                    f"residual oscillates only {len(cand)} times "
                    f"(need {d + 2})")
        cand = _trim_alternation(cand, r, d + 2)
        new_refs = np.array([_polish_ref(coefs, k) for k in cand])
        rref = np.abs(g(new_refs)
                      - np.polynomial.chebyshev.chebval(new_refs, coefs))
        if float(rref.max() - rref.min()) <= tol * float(rref.max()):
            refs = new_refs
            converged = True
            break
        refs = new_refs

    # polish the measured error on the dense grid with one local pass
    r = gdense - np.polynomial.chebyshev.chebval(dense, coefs)
    k = int(np.argmax(np.abs(r)))
    lo = dense[max(k - 1, 0)]
    hi = dense[min(k + 1, len(dense) - 1)]
    phi = (math.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    err = lambda y: abs(float(g(np.array([y]))[0]
                              - np.polynomial.chebyshev.chebval(y, coefs)))
    c, dd = b - phi * (b - a), a + phi * (b - a)
    for _ in range(60):
        if err(c) > err(dd):
            b, dd = dd, c
            c = b - phi * (b - a)
        else:
            a, c = c, dd
            dd = a + phi * (b - a)
    measured = max(float(np.max(np.abs(r))), err((a + b) / 2))

    mono_y = np.polynomial.chebyshev.cheb2poly(coefs) if len(coefs) else [0.0]
    terms = {(j,): cj / gamma ** j for j, cj in enumerate(mono_y) if cj}
    return ApproxResult(
        polynomial=Polynomial(1, terms),
        gamma=float(gamma),
        measured_error=measured,
        equioscillation_points=gamma * refs,
        converged=converged,
        iterations=it,
        cheb_coeffs=coefs,
    )


def scaling_identity_check(f, mu, degree, gamma, n_samples=50, tol=1e-8):
    """Check R(f(mu .), gamma/|mu|, v) = R(f, gamma, mu v), plus the 2||f|| bound.

    The best approximation commutes with argument scaling; verified at
    sampled points.  Also verifies ||R|| <= 2 sup |f| on the interval.
    """
    if mu == 0:
        raise ValueError("mu must be nonzero")
    r_big = remez_best_approx(f, degree, gamma)
    r_small = remez_best_approx(lambda v: f(mu * v), degree, gamma / abs(mu))
    v = np.linspace(-gamma / abs(mu), gamma / abs(mu), n_samples)
    lhs = r_small.eval(v)
    rhs = r_big.eval(mu * v)
    dense = np.linspace(-gamma, gamma, 4097)
    fsup = float(np.max(np.abs(f(dense))))
    rsup = float(np.max(np.abs(r_big.eval(dense))))
    scale = max(fsup, 1.0)
    return bool(np.max(np.abs(lhs - rhs)) <= tol * scale
                and rsup <= 2 * fsup * (1 + tol))


@dataclass(frozen=True)
class RateConstants:
    """Exponential approximation rate: error <= C1 exp(-C2 a)."""

    tau: float
    C1: float
    C2: float


def rate_constants(tau):
    """Rate constants for the interval fraction tau in (0, 1)."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    s = math.sqrt(1.0 - tau * tau)
    c1 = 2.0 * (1.0 + 1.0 / s)
    c2 = math.log(1.0 + s) - math.log(tau) - s
    if c2 <= 0:
        raise AssertionError("rate exponent must be positive")
    return RateConstants(tau, c1, c2)


@dataclass
class ExpApproxResult:
    """Polynomial approximation of e^{i lam x} with its measured error and bound."""

    polynomial: Polynomial
    measured_error: float
    bound: float
    gamma: float
    degree: int
    cos_part: ApproxResult
    sin_part: ApproxResult

    def eval(self, x):
        return self.cos_part.eval(x) + 1j * self.sin_part.eval(x)


def best_approx_exp(lam, a, tau, grid_points=10_001):
    """Approximate e^{i lam x} on [-a tau/|lam|, a tau/|lam|] at degree floor(a).

    cos(lam x) and sin(lam x) are approximated separately by Remez and
    combined; the measured complex sup-error must stay within
    C1(tau) exp(-C2(tau) a) (a violation raises RateBoundError).
    """
    if lam == 0:
        raise ValueError("lam must be nonzero")
    if a < 1:
        raise ValueError("a must be >= 1")
    rc = rate_constants(tau)
    gamma = a * tau / abs(lam)
    degree = math.floor(a)
    cos_part = remez_best_approx(lambda x: np.cos(lam * x), degree, gamma)
    sin_part = remez_best_approx(lambda x: np.sin(lam * x), degree, gamma)
    x = np.linspace(-gamma, gamma, grid_points)
    err = np.abs(np.exp(1j * lam * x)
                 - (cos_part.eval(x) + 1j * sin_part.eval(x)))
    k = int(np.argmax(err))
    # one refinement pass around the grid maximum
    lo, hi = x[max(k - 1, 0)], x[min(k + 1, grid_points - 1)]
    fine = np.linspace(lo, hi, 257)
    efine = np.abs(np.exp(1j * lam * fine)
                   - (cos_part.eval(fine) + 1j * sin_part.eval(fine)))
    measured = max(float(err[k]), float(np.max(efine)))
    bound = rc.C1 * math.exp(-rc.C2 * a)
    if measured > bound:
        raise RateBoundError(
            f"measured error {measured:.3e} exceeds rate bound {bound:.3e} "
            f"(lam={lam}, a={a}, tau={tau})")
    poly = cos_part.polynomial + sin_part.polynomial * 1j
    return ExpApproxResult(poly, measured, bound, gamma, degree,
                           cos_part, sin_part)


@dataclass
class TensorExpResult:
    """Product approximation of e^{i t.x} over a box class."""

    polynomial: Polynomial
    measured_error: float
    bound: float
    factors: dict  # axis -> ExpApproxResult


def tensor_exp_approx(t, u, a, tau, axis_grid=201):
    """Approximate e^{i t.x} on the cube of half-width a*tau by a box-class polynomial.

    One Remez factor per axis with t_j != 0 (degree floor(a u_j)); axes with
    t_j = 0 contribute the constant factor 1.  The product's support lies in
    the box with half-widths a u_j.  The measured sup error over the cube
    must stay within m 2^{m-1} C1(tau) exp(-min_j u_j C2(tau) a).
    """
    t = [float(v) for v in t]
    u = [float(v) for v in u]
    m = len(t)
    if len(u) != m:
        raise ValueError("t and u length mismatch")
    if any(uj <= 0 for uj in u):
        raise ValueError("half-widths must be positive")
    if any(abs(tj) > uj * (1 + 1e-12) for tj, uj in zip(t, u)):
        raise ValueError("need |t_j| <= u_j")
    rc = rate_constants(tau)

    factors = {}
    poly = Polynomial.constant(m, 1.0)
    for j, tj in enumerate(t):
        if tj == 0.0:
            continue
        fj = best_approx_exp(tj, a * u[j], tau)
        factors[j] = fj
        emb = Polynomial(m, {
            tuple(kk if ax == j else 0 for ax in range(m)): c
            for (kk,), c in fj.polynomial.terms.items()})
        poly = poly * emb

    # measured error on a tensor grid over the cube of half-width a*tau
    axes = [np.linspace(-a * tau, a * tau, axis_grid) for _ in range(m)]
    vals = np.ones([axis_grid] * m, dtype=complex)
    target = np.ones([axis_grid] * m, dtype=complex)
    for j in range(m):
        shape = [1] * m
        shape[j] = axis_grid
        if j in factors:
            fj = factors[j].eval(axes[j])
        else:
            fj = np.ones(axis_grid, dtype=complex)
        vals = vals * fj.reshape(shape)
        target = target * np.exp(1j * t[j] * axes[j]).reshape(shape)
    measured = float(np.max(np.abs(target - vals)))
    bound = (m * 2 ** (m - 1) * rc.C1
             * math.exp(-min(u) * rc.C2 * a))
    if measured > bound:
        raise RateBoundError(
            f"measured tensor error {measured:.3e} exceeds bound {bound:.3e}")
    return TensorExpResult(poly, measured, bound, factors)
