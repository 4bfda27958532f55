"""Coordinate-symmetric convex bodies, polars, lattice points, and coverings.

The body family is the weighted-lp family: half-widths sigma per axis and an
exponent lam in [1, inf].  Cubes, balls, octahedra, and boxes are the special
cases lam = inf, 2, 1, inf.  Every member is symmetric about all coordinate
hyperplanes, so it contains the axis-aligned box spanned by each of its
points (the parallelepiped property used throughout).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

BOUNDARY_RTOL = 1e-12


class CoverageError(RuntimeError):
    """Raised when the greedy covering exhausts its budget."""

    def __init__(self, message, witnesses):
        super().__init__(message)
        self.witnesses = witnesses


class ConvexBody:
    """Weighted-lp body: gauge(t) = (sum |t_j/sigma_j|^lam)^(1/lam) <= 1."""

    __slots__ = ("m", "lam", "sigma")

    def __init__(self, m, lam, sigma):
        self.m = int(m)
        if not (lam >= 1):
            raise ValueError("lam must lie in [1, inf]")
        self.lam = float(lam)
        sigma = tuple(float(s) for s in sigma)
        if len(sigma) != self.m:
            raise ValueError("sigma length != dimension")
        if any(s <= 0 for s in sigma):
            raise ValueError("semi-axes must be positive")
        self.sigma = sigma

    # -- constructors --------------------------------------------------------

    @classmethod
    def cube(cls, m, half_width=1.0):
        return cls(m, math.inf, (half_width,) * m)

    @classmethod
    def ball(cls, m, radius=1.0):
        return cls(m, 2.0, (radius,) * m)

    @classmethod
    def octahedron(cls, m, half_width=1.0):
        return cls(m, 1.0, (half_width,) * m)

    @classmethod
    def box(cls, sigma):
        return cls(len(sigma), math.inf, sigma)

    @classmethod
    def interval(cls, half_width=1.0):
        return cls(1, math.inf, (half_width,))

    # -- membership ----------------------------------------------------------

    def gauge(self, t):
        t = np.asarray(t, dtype=float)
        r = np.abs(t) / self.sigma
        if math.isinf(self.lam):
            return float(np.max(r))
        return float(np.sum(r ** self.lam) ** (1.0 / self.lam))

    def gauge_many(self, X):
        X = np.asarray(X, dtype=float)
        r = np.abs(X) / np.asarray(self.sigma)
        if math.isinf(self.lam):
            return r.max(axis=-1)
        return np.sum(r ** self.lam, axis=-1) ** (1.0 / self.lam)

    def contains(self, t, scale=1.0, rtol=BOUNDARY_RTOL):
        if len(t) != self.m:
            raise ValueError("point length != dimension")
        if scale <= 0:
            raise ValueError("scale must be positive")
        return self.gauge(t) <= scale * (1.0 + rtol)

    def contains_many(self, X, scale=1.0, rtol=BOUNDARY_RTOL):
        return self.gauge_many(X) <= scale * (1.0 + rtol)

    def bounding_half_widths(self, scale=1.0):
        return tuple(scale * s for s in self.sigma)

    # -- duality -------------------------------------------------------------

    def polar(self):
        """Polar body: dual exponent, reciprocal semi-axes."""
        if math.isinf(self.lam):
            dual = 1.0
        elif self.lam == 1.0:
            dual = math.inf
        else:
            dual = self.lam / (self.lam - 1.0)
        return ConvexBody(self.m, dual, tuple(1.0 / s for s in self.sigma))

    def support_function(self, y):
        """sup over the body of t . y  (Hoelder closed form for real y)."""
        y = np.asarray(y, dtype=float)
        w = np.abs(y) * np.asarray(self.sigma)
        if math.isinf(self.lam):  # dual exponent 1
            return float(w.sum())
        if self.lam == 1.0:
            return float(w.max())
        dual = self.lam / (self.lam - 1.0)
        return float(np.sum(w ** dual) ** (1.0 / dual))

    def dual_norm(self, z, rtol=1e-6):
        """sup over the body of |sum t_j z_j| for complex z.

        Real z has a closed form.  A genuinely complex z reduces by
        |t . z| = max over rotations phi of t . (x cos phi + y sin phi),
        so the supremum is a smooth 1-d maximization of closed-form support
        values over phi in [0, pi); solved by a dense sweep plus
        golden-section refinement (accuracy far below rtol).
        """
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.m,):
            raise ValueError("vector length != dimension")
        x, y = z.real, z.imag
        if not y.any():
            return self.support_function(x)
        if not x.any():
            return self.support_function(y)

        def val(phi):
            return self.support_function(math.cos(phi) * x + math.sin(phi) * y)

        grid = np.linspace(0.0, math.pi, 512, endpoint=False)
        vals = [val(p) for p in grid]
        k = int(np.argmax(vals))
        lo = grid[k] - math.pi / 512
        hi = grid[k] + math.pi / 512
        g = (math.sqrt(5.0) - 1) / 2
        a, b = lo, hi
        c, d = b - g * (b - a), a + g * (b - a)
        for _ in range(80):
            if val(c) > val(d):
                b, d = d, c
                c = b - g * (b - a)
            else:
                a, c = c, d
                d = a + g * (b - a)
        return val((a + b) / 2)

    # -- sampling ------------------------------------------------------------

    def sample_points(self, count, seed=0):
        """Deterministic rejection sample of `count` points inside the body."""
        rng = np.random.default_rng(seed)
        sig = np.asarray(self.sigma)
        out = []
        need = count
        while need > 0:
            batch = rng.uniform(-1.0, 1.0, size=(max(4 * need, 256), self.m)) * sig
            keep = batch[self.contains_many(batch)]
            out.append(keep[:need])
            need -= len(keep[:need])
        return np.vstack(out)

    def __repr__(self):
        lam = "inf" if math.isinf(self.lam) else f"{self.lam:g}"
        return f"ConvexBody(m={self.m}, lam={lam}, sigma={self.sigma})"

    def __eq__(self, other):
        return (isinstance(other, ConvexBody) and self.m == other.m
                and self.lam == other.lam and self.sigma == other.sigma)

    def descriptor(self):
        return {"m": self.m,
                "lambda": "inf" if math.isinf(self.lam) else self.lam,
                "sigma": list(self.sigma)}


@dataclass(frozen=True)
class Parallelepiped:
    """Axis-aligned box of half-widths u, centered at the origin."""

    u: tuple

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))
        if any(x <= 0 for x in self.u):
            raise ValueError("half-widths must be positive")

    @property
    def m(self):
        return len(self.u)

    def contains(self, t, rtol=BOUNDARY_RTOL):
        return all(abs(tj) <= uj * (1 + rtol) for tj, uj in zip(t, self.u))

    def contains_many(self, X, rtol=BOUNDARY_RTOL):
        X = np.asarray(X, dtype=float)
        return (np.abs(X) <= np.asarray(self.u) * (1 + rtol)).all(axis=-1)

    def corners(self):
        for signs in itertools.product((-1.0, 1.0), repeat=self.m):
            yield tuple(s * uj for s, uj in zip(signs, self.u))

    def body(self):
        return ConvexBody(self.m, math.inf, self.u)


def lattice_points(body, a, nonnegative_only=True, cap=10 ** 6):
    """Integer points of the dilate a*body, in graded-lex order.

    Boundary points are included (relative tolerance on the gauge).  The
    candidate box is size-guarded: enumeration refuses when it would exceed
    `cap` points.
    """
    if a < 0:
        raise ValueError("scale must be nonnegative")
    if a == 0:
        return [(0,) * body.m] if nonnegative_only else [(0,) * body.m]
    tops = [int(math.floor(a * s * (1 + BOUNDARY_RTOL))) for s in body.sigma]
    ranges = [range(0, t + 1) if nonnegative_only else range(-t, t + 1)
              for t in tops]
    size = 1
    for r in ranges:
        size *= len(r)
    if size > cap:
        raise ValueError(f"candidate box has {size} points, above cap {cap}")
    pts = [beta for beta in itertools.product(*ranges)
           if body.contains(beta, scale=a)]
    pts.sort(key=lambda b: (sum(abs(x) for x in b), tuple(-x for x in b)))
    return pts


def check_pi_condition(body, sample_count, seed=0):
    """Sampled check that every sign-flip of a member point stays inside."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    X = body.sample_points(sample_count, seed=seed)
    for signs in itertools.product((-1.0, 1.0), repeat=body.m):
        if not body.contains_many(X * np.asarray(signs)).all():
            return False
    return True


@dataclass
class CoverResult:
    pieces: list
    min_half_width: float
    sample_count: int


def _slab_pieces(body, delta):
    """Axis slabs: long half-width C6 along one axis, C7 across the others.

    C6 = sqrt((1+delta)/2) * min_l sigma_l; C7 is found by bisection so the
    slab corner (C7, ..., C6, ..., C7) sits on the boundary of sqrt(delta)
    times the body.  The emitted pieces are the slabs inflated by
    sqrt(delta), so their corners reach at most delta times the body.
    """
    rd = math.sqrt(delta)
    c6 = math.sqrt((1 + delta) / 2.0) * min(body.sigma)
    pieces = []
    c7s = []
    for l in range(body.m):
        def corner_gauge(c):
            corner = [c] * body.m
            corner[l] = c6
            return body.gauge(corner)

        lo, hi = 0.0, c6
        if corner_gauge(hi) <= rd:
            c7 = c6
        else:
            for _ in range(100):
                mid = (lo + hi) / 2
                if corner_gauge(mid) <= rd:
                    lo = mid
                else:
                    hi = mid
            c7 = lo
        c7s.append(c7)
    c7 = min(c7s)
    for l in range(body.m):
        u = [rd * c7] * body.m
        u[l] = rd * c6
        pieces.append(Parallelepiped(tuple(u)))
    return pieces, c7


def cover_with_parallelepipeds(body, delta, sample_count=10_000,
                               max_pieces=4096, seed=0):
    """Cover the body by origin-centered boxes whose corners stay in delta*body.

    Axis slabs are laid first; remaining sample points are covered greedily
    by inflated boxes spanned by the point itself.  Small coordinates are
    floored at eps0 * sigma_j before inflation so every piece keeps half-widths
    bounded below (raw point-spanned boxes degenerate near the coordinate
    hyperplanes for m >= 3).
    """
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    if math.isinf(body.lam):
        # the body is itself a box: it covers itself and its corner is inside
        return CoverResult([Parallelepiped(body.sigma)], min(body.sigma),
                           sample_count)

    samples = body.sample_points(sample_count, seed=seed)
    pieces, _ = _slab_pieces(body, delta)

    sig = np.asarray(body.sigma)
    eps0 = (delta - 1) / (2.0 * body.m ** (1.0 / body.lam))
    kappa = 2.0 * delta / (delta + 1.0)  # = delta / (1 + eps0 * m^{1/lam})

    covered = np.zeros(len(samples), dtype=bool)
    for piece in pieces:
        covered |= piece.contains_many(samples)
    while not covered.all():
        if len(pieces) >= max_pieces:
            raise CoverageError(
                f"covering budget {max_pieces} exhausted with "
                f"{int((~covered).sum())} samples uncovered",
                samples[~covered][:16])
        x = samples[int(np.argmax(~covered))]
        u = np.maximum(np.abs(x), eps0 * sig)
        piece = Parallelepiped(tuple(kappa * u))
        if body.gauge(piece.u) > delta * (1 + BOUNDARY_RTOL):
            raise CoverageError("constructed piece leaves the inflated body",
                                [tuple(x)])
        pieces.append(piece)
        covered |= piece.contains_many(samples)

    min_hw = min(min(p.u) for p in pieces)
    return CoverResult(pieces, min_hw, sample_count)
