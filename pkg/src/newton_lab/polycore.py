"""Sparse multivariate polynomials, differential operators, and trigonometric lifts.

Exponent multi-indices are plain tuples of nonnegative ints, ordered by the
graded-lexicographic key (total degree first, then lexicographic with the
first variable most significant).  Trigonometric frequency vectors reuse the
same tuple representation but allow negative entries.

Also provides the classical closed-form sharp constants used as golden
references: the Chebyshev-derivative constants ``mu``, the L2 constants
``labelle_constant``, and the box-class product constants
``bernstein_product_constant``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

MultiIndex = tuple  # tuple[int, ...]


def grlex_key(beta):
    """Sort key for graded-lex order: grade, then x1 > x2 > ... precedence."""
    return (sum(beta), tuple(-b for b in beta))


def _as_index(beta, m):
    beta = tuple(int(b) for b in beta)
    if len(beta) != m:
        raise ValueError(f"multi-index length {len(beta)} != dimension {m}")
    return beta


class Polynomial:
    """Sparse polynomial with complex coefficients keyed by exponent tuples.

    Zero coefficients are never stored.  Instances are treated as immutable;
    arithmetic returns new objects.
    """

    __slots__ = ("m", "terms")

    def __init__(self, m, terms=None, _clean=True):
        self.m = int(m)
        if terms is None:
            terms = {}
        if _clean:
            clean = {}
            for beta, c in terms.items():
                beta = _as_index(beta, self.m)
                if any(b < 0 for b in beta):
                    raise ValueError(f"negative exponent in {beta}")
                c = complex(c)
                if c != 0:
                    clean[beta] = clean.get(beta, 0) + c
            terms = {b: c for b, c in clean.items() if c != 0}
        self.terms = terms

    @classmethod
    def zero(cls, m):
        return cls(m, {})

    @classmethod
    def constant(cls, m, c):
        return cls(m, {(0,) * m: c})

    @classmethod
    def monomial(cls, m, beta, c=1.0):
        return cls(m, {tuple(beta): c})

    def support(self):
        """Exponent tuples in graded-lex order."""
        return sorted(self.terms, key=grlex_key)

    def coefficient(self, beta):
        return self.terms.get(tuple(beta), 0j)

    def total_degree(self):
        return max((sum(b) for b in self.terms), default=0)

    def degrees_per_axis(self):
        degs = [0] * self.m
        for beta in self.terms:
            for j, b in enumerate(beta):
                degs[j] = max(degs[j], b)
        return tuple(degs)

    def is_zero(self):
        return not self.terms

    # -- evaluation ---------------------------------------------------------

    def eval(self, x):
        """Value at a single point, with compensated (fsum) accumulation."""
        x = tuple(x)
        if len(x) != self.m:
            raise ValueError(f"point length {len(x)} != dimension {self.m}")
        re, im = [], []
        for beta, c in self.terms.items():
            t = c
            for xj, bj in zip(x, beta):
                if bj:
                    t = t * xj ** bj
            t = complex(t)
            re.append(t.real)
            im.append(t.imag)
        return complex(math.fsum(re), math.fsum(im))

    def eval_many(self, X):
        """Vectorized values at X (k, m) -> complex array (k,)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        pows = []
        degs = self.degrees_per_axis()
        for j in range(self.m):
            pj = np.ones((degs[j] + 1, len(X)))
            for d in range(1, degs[j] + 1):
                pj[d] = pj[d - 1] * X[:, j]
            pows.append(pj)
        out = np.zeros(len(X), dtype=complex)
        for beta, c in self.terms.items():
            t = np.full(len(X), c)
            for j, bj in enumerate(beta):
                if bj:
                    t = t * pows[j][bj]
            out += t
        return out

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.m, other)
        if other.m != self.m:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for beta, c in other.terms.items():
            terms[beta] = terms.get(beta, 0) + c
        return Polynomial(self.m, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.m, {b: -c for b, c in self.terms.items()},
                          _clean=False)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.m, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = complex(other)
            return Polynomial(self.m, {b: v * c for b, v in self.terms.items()})
        if other.m != self.m:
            raise ValueError("dimension mismatch")
        terms = {}
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                b = tuple(x + y for x, y in zip(b1, b2))
                terms[b] = terms.get(b, 0) + c1 * c2
        return Polynomial(self.m, terms)

    __rmul__ = __mul__

    def scale_argument(self, factor):
        """P(factor * x): coefficients pick up factor**|beta|."""
        return Polynomial(
            self.m,
            {b: c * factor ** sum(b) for b, c in self.terms.items()})

    def derivative_at_zero(self, s):
        """D^s(P)(0) = s! * c_s."""
        s = _as_index(s, self.m)
        c = self.terms.get(s)
        if c is None:
            return 0j
        f = 1
        for sj in s:
            f *= math.factorial(sj)
        return c * f

    def conjugate(self):
        return Polynomial(self.m,
                          {b: c.conjugate() for b, c in self.terms.items()},
                          _clean=False)

    def __repr__(self):
        parts = [f"{c:.6g}*x^{b}" for b, c in
                 sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))]
        body = " + ".join(parts) if parts else "0"
        return f"Polynomial(m={self.m}, {body})"

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and self.m == other.m
                and self.terms == other.terms)

    # -- serialization ------------------------------------------------------

    def to_json_dict(self):
        return {
            "m": self.m,
            "terms": [
                {"beta": list(b), "re": c.real, "im": c.imag}
                for b, c in sorted(self.terms.items(),
                                   key=lambda kv: grlex_key(kv[0]))
            ],
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d):
        return cls(d["m"], {tuple(t["beta"]): complex(t["re"], t["im"])
                            for t in d["terms"]})

    @classmethod
    def from_json(cls, s):
        return cls.from_json_dict(json.loads(s))


class DiffOperator:
    """Homogeneous constant-coefficient operator: sum of b_alpha D^alpha, |alpha| = N.

    Order 0 is the identity (single empty-derivative term).
    """

    __slots__ = ("m", "order", "terms")

    def __init__(self, m, terms):
        self.m = int(m)
        clean = {}
        order = None
        for alpha, b in terms.items():
            alpha = _as_index(alpha, self.m)
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative order in {alpha}")
            if order is None:
                order = sum(alpha)
            elif sum(alpha) != order:
                raise ValueError("operator is not homogeneous in order")
            b = complex(b)
            if b != 0:
                clean[alpha] = b
        if order is None:
            raise ValueError("operator needs at least one term")
        self.order = order
        self.terms = clean

    @classmethod
    def identity(cls, m):
        return cls(m, {(0,) * m: 1.0})

    @classmethod
    def partial(cls, alpha, coeff=1.0):
        return cls(len(alpha), {tuple(alpha): coeff})

    @classmethod
    def d_dx(cls, N, m=1):
        """d^N/dx^N in one variable (or N-th pure derivative along axis 0)."""
        alpha = (N,) + (0,) * (m - 1)
        return cls(m, {alpha: 1.0})

    def apply_at_zero(self, P):
        """D_N(P)(0) = sum of b_alpha * alpha! * c_alpha."""
        if isinstance(P, TrigPolynomial):
            return sum(c * self.symbol(theta)
                       for theta, c in P.terms.items())
        if P.m != self.m:
            raise ValueError("dimension mismatch")
        re, im = [], []
        for alpha, b in self.terms.items():
            c = P.terms.get(alpha)
            if c is None:
                continue
            f = 1
            for aj in alpha:
                f *= math.factorial(aj)
            t = b * f * c
            re.append(t.real)
            im.append(t.imag)
        return complex(math.fsum(re), math.fsum(im))

    def symbol(self, t):
        """sum of b_alpha * (i t)^alpha at a frequency/point t."""
        out = 0j
        it = [1j * tj for tj in t]
        for alpha, b in self.terms.items():
            v = b
            for itj, aj in zip(it, alpha):
                if aj:
                    v = v * itj ** aj
            out += v
        return out

    def symbol_polynomial(self):
        """The symbol as a Polynomial in t: coefficients b_alpha * i^|alpha|."""
        return Polynomial(
            self.m,
            {alpha: b * (1j ** sum(alpha)) for alpha, b in self.terms.items()})

    def scaled(self, c):
        return DiffOperator(self.m, {a: c * b for a, b in self.terms.items()})

    def __repr__(self):
        return f"DiffOperator(m={self.m}, order={self.order}, terms={self.terms})"


class TrigPolynomial:
    """Trigonometric polynomial: complex coefficients keyed by integer frequencies."""

    __slots__ = ("m", "terms")

    def __init__(self, m, terms=None):
        self.m = int(m)
        clean = {}
        for theta, c in (terms or {}).items():
            theta = _as_index(theta, self.m)
            c = complex(c)
            if c != 0:
                clean[theta] = clean.get(theta, 0) + c
        self.terms = {t: c for t, c in clean.items() if c != 0}

    def spectrum(self):
        return sorted(self.terms, key=lambda t: (sum(abs(x) for x in t), t))

    def eval(self, t):
        t = tuple(t)
        return sum(c * np.exp(1j * sum(th * tj for th, tj in zip(theta, t)))
                   for theta, c in self.terms.items())

    def eval_many(self, T):
        T = np.asarray(T, dtype=float)
        if T.ndim == 1:
            T = T[:, None]
        out = np.zeros(len(T), dtype=complex)
        for theta, c in self.terms.items():
            out += c * np.exp(1j * (T @ np.array(theta, dtype=float)))
        return out

    def derivative_at_zero(self, alpha):
        """D^alpha(T)(0) = sum of c_theta * (i theta)^alpha."""
        out = 0j
        for theta, c in self.terms.items():
            v = c
            for th, aj in zip(theta, alpha):
                if aj:
                    v = v * (1j * th) ** aj
            out += v
        return out

    def l2_norm_period(self):
        """L2 norm over the period cube [-pi, pi]^m: (2 pi)^{m/2} sqrt(sum |c|^2)."""
        s = math.fsum(abs(c) ** 2 for c in self.terms.values())
        return (2 * math.pi) ** (self.m / 2) * math.sqrt(s)

    def __repr__(self):
        return f"TrigPolynomial(m={self.m}, {len(self.terms)} frequencies)"


# ---------------------------------------------------------------------------
# Chebyshev machinery and closed-form constants
# ---------------------------------------------------------------------------

CHEB_EXACT_MAX = 40  # sum of |coeffs| stays below 2^53 here; hard contract cap


@lru_cache(maxsize=None)
def _cheb_int_coeffs(n):
    """Exact integer monomial coefficients of T_n (length n+1)."""
    if n == 0:
        return (1,)
    if n == 1:
        return (0, 1)
    a, b = _cheb_int_coeffs(n - 2), _cheb_int_coeffs(n - 1)
    out = [0] * (n + 1)
    for j, c in enumerate(b):
        out[j + 1] += 2 * c
    for j, c in enumerate(a):
        out[j] -= c
    return tuple(out)


def chebyshev_T(n):
    """Chebyshev polynomial of the first kind, exact coefficients (n <= 40)."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > CHEB_EXACT_MAX:
        raise ValueError(
            f"exact Chebyshev coefficients capped at n={CHEB_EXACT_MAX}")
    coeffs = _cheb_int_coeffs(n)
    return Polynomial(1, {(k,): float(c) for k, c in enumerate(coeffs) if c})


def mu(N, n):
    """Chebyshev-derivative constant: n^{-N} |T_k^{(N)}(0)|, k = n or n-1 by parity.

    k is chosen with k = N (mod 2) so the derivative at 0 is nonzero:
    n - N odd uses T_{n-1}, n - N even uses T_n.
    """
    if not 0 <= N <= n:
        raise ValueError(f"require 0 <= N <= n, got N={N}, n={n}")
    k = n - 1 if (n - N) % 2 == 1 else n
    coeffs = _cheb_int_coeffs(k)
    c = abs(coeffs[N]) if N < len(coeffs) else 0
    return math.factorial(N) * c / n ** N


def labelle_constant(N, n):
    """Sharp L2 constant for the N-th derivative at 0 over degree-n polynomials.

    ((2N)!/(2^N N!)) sqrt(N + 1/2) n^{-(N+1/2)}
    * binom(floor((n-N)/2) + N + 1/2, N + 1/2),
    the generalized binomial evaluated through log-gamma (all arguments
    positive, no reflection needed).
    """
    if not 0 <= N <= n:
        raise ValueError(f"require 0 <= N <= n, got N={N}, n={n}")
    K = (n - N) // 2
    logbinom = (math.lgamma(K + N + 1.5) - math.lgamma(N + 1.5)
                - math.lgamma(K + 1))
    lead = math.factorial(2 * N) / (2 ** N * math.factorial(N))
    return (lead * math.sqrt(N + 0.5) * n ** (-(N + 0.5))
            * math.exp(logbinom))


def bernstein_product_constant(alpha, a, sigma):
    """Sharp sup-norm constant for D^alpha over the box class a*Pi^m(sigma).

    a^{-|alpha|} * prod_j n_j^{alpha_j} mu(alpha_j, n_j) with n_j = floor(a sigma_j).
    """
    alpha = tuple(int(x) for x in alpha)
    sigma = tuple(float(s) for s in sigma)
    if len(alpha) != len(sigma):
        raise ValueError("alpha and sigma length mismatch")
    val = 1.0
    for aj, sj in zip(alpha, sigma):
        nj = math.floor(a * sj)
        if nj < 1:
            raise ValueError(f"floor(a*sigma)={nj} < 1")
        if not 0 <= aj <= nj:
            raise ValueError(f"alpha_j={aj} exceeds floor(a*sigma_j)={nj}")
        val *= nj ** aj * mu(aj, nj)
    return a ** (-sum(alpha)) * val


def coefficient_bound_check(P, body, a, M, A, grid=None):
    """Check |c_beta| <= (prod beta_j!)^{-1} (A a / M)^{|beta|} * sup-norm on Q^m(M).

    Requires support(P) inside a*body and body inside the cube of half-width A.
    """
    from .quadrature import sup_norm_cube

    for beta in P.terms:
        if not body.contains(beta, scale=a):
            raise ValueError(f"support point {beta} outside the scaled body")
    if max(body.sigma) > A * (1 + 1e-12):
        raise ValueError("body not contained in the comparison cube")
    sup = float(sup_norm_cube(P, M, grid=grid))
    for beta, c in P.terms.items():
        fact = 1.0
        for bj in beta:
            fact *= math.factorial(bj)
        bound = (A * a / M) ** sum(beta) * sup / fact
        if abs(c) > bound * (1 + 1e-9):
            return False
    return True


# ---------------------------------------------------------------------------
# Sine substitution: derivative transport and the trigonometric lift
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def faa_di_bruno_c(l, k):
    """Exact weight c(l, k) transporting derivatives through x = b sin(t/b).

    Sum over multisets of l odd parts (sizes 1, 3, 5, ...) summing to k of

        k! * prod_parts ((-1)^j)^{count_{2j+1}}
           / prod_parts (count_{2j+1}! * ((2j+1)!)^{count_{2j+1}}),

    where the sign per part of size 2j+1 is the Taylor sign of sin.
    Returns a Fraction; zero whenever k - l is odd.
    """
    if l < 0 or k < 0 or l > k:
        raise ValueError(f"require 0 <= l <= k, got l={l}, k={k}")
    if l == 0:
        return Fraction(1 if k == 0 else 0)
    total = Fraction(0)

    def rec(rem_k, rem_l, size, acc):
        nonlocal total
        if rem_l == 0:
            if rem_k == 0:
                total += acc
            return
        if size > rem_k or rem_k < rem_l:  # parts are >= 1
            return
        # count copies of this odd size
        maxc = min(rem_l, rem_k // size)
        j = (size - 1) // 2
        for cnt in range(0, maxc + 1):
            term = acc
            if cnt:
                term = (acc * Fraction((-1) ** (j * cnt),
                                       math.factorial(cnt)
                                       * math.factorial(size) ** cnt))
            rec(rem_k - size * cnt, rem_l - cnt, size + 2, term)

    rec(k, l, 1, Fraction(1))
    return math.factorial(k) * total


def _sin_power_spectrum(k):
    """Frequency expansion of sin^k t: dict freq -> complex coefficient."""
    # sin^k t = (2i)^{-k} sum_r binom(k, r) (-1)^{k-r} e^{i(2r-k)t}
    scale = (2j) ** (-k)
    out = {}
    for r in range(k + 1):
        out[2 * r - k] = scale * math.comb(k, r) * (-1) ** (k - r)
    return out


def trig_lift(P, b):
    """Spectrum of t -> P(b sin t_1, ..., b sin t_m).

    This is the period-rescaled form of the lift
    R(t) = P(b sin(t_1/b), ..., b sin(t_m/b)); the returned object T
    satisfies R(t) = T(t/b).  Frequencies stay within the support box:
    |theta_j| <= beta_j for the originating exponent beta, with matching parity.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    terms = {}
    for beta, c in P.terms.items():
        factor_specs = [_sin_power_spectrum(bj) for bj in beta]
        acc = {(): c * b ** sum(beta)}
        for spec in factor_specs:
            nxt = {}
            for prefix, cp in acc.items():
                for f, cf in spec.items():
                    key = prefix + (f,)
                    nxt[key] = nxt.get(key, 0) + cp * cf
            acc = nxt
        for theta, ct in acc.items():
            terms[theta] = terms.get(theta, 0) + ct
    return TrigPolynomial(P.m, terms)


def lift_derivative_at_zero(P, b, alpha):
    """D^alpha at 0 of R(t) = P(b sin(t_1/b), ...), via exact derivative transport.

    Sums b^{|s|-|alpha|} D^s(P)(0) prod_j c(s_j, alpha_j) over s with
    1 <= s_j <= alpha_j (s_j = 0 exactly when alpha_j = 0).
    """
    alpha = _as_index(alpha, P.m)
    if b <= 0:
        raise ValueError("b must be positive")
    ranges = [range(1, aj + 1) if aj > 0 else range(0, 1) for aj in alpha]
    tot_alpha = sum(alpha)
    out = 0j

    def rec(j, s_acc, w_acc):
        nonlocal out
        if j == len(alpha):
            d = P.derivative_at_zero(s_acc)
            if d:
                out += b ** (sum(s_acc) - tot_alpha) * w_acc * d
            return
        for sj in ranges[j]:
            w = float(faa_di_bruno_c(sj, alpha[j]))
            if w == 0.0:
                continue
            rec(j + 1, s_acc + (sj,), w_acc * w)

    rec(0, (), 1.0)
    return out
