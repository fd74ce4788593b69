"""Kolmogorov and Wasserstein-1 distances between one-dimensional laws.

Discrete laws are atoms with masses.  Continuous laws expose ``cdf``, ``pdf``
and the partial first moment ``partial_mean(x) = E[Y; Y <= x]``; the latter
makes the Wasserstein distance to a discrete law exact up to root finding.
"""
from __future__ import annotations


import numpy as np
from scipy import integrate, optimize

__all__ = [
    "DiscreteLaw",
    "ContinuousLaw",
    "ScipyLaw",
    "d_K",
    "d_W",
    "rate_fit",
]


class DiscreteLaw:
    """Finitely supported law.

    Parameters
    ----------
    atoms : array_like
        Locations; duplicates are merged.
    masses : array_like, optional
        Non-negative weights, normalized to one.  Uniform when omitted.
    """

    kind = "discrete"

    def __init__(self, atoms, masses=None):
        atoms = np.asarray(atoms, dtype=float).ravel()
        if masses is None:
            masses = np.full(atoms.size, 1.0 / max(atoms.size, 1))
        masses = np.asarray(masses, dtype=float).ravel()
        if atoms.size == 0 or atoms.size != masses.size:
            raise ValueError("atoms and masses must be non-empty and of equal length")
        if np.any(masses < 0):
            raise ValueError("masses must be non-negative")
        total = masses.sum()
        if not total > 0:
            raise ValueError("masses must not all vanish")
        order = np.argsort(atoms, kind="stable")
        atoms, masses = atoms[order], masses[order] / total
        uniq, inv = np.unique(atoms, return_inverse=True)
        if uniq.size != atoms.size:
            masses = np.bincount(inv, weights=masses)
            atoms = uniq
        self.atoms = atoms
        self.masses = masses
        self._cum = np.cumsum(masses)
        self._cum[-1] = 1.0

    @classmethod
    def empirical(cls, samples):
        return cls(samples)

    def cdf(self, x):
        i = np.searchsorted(self.atoms, x, side="right")
        return np.where(i > 0, self._cum[np.maximum(i - 1, 0)], 0.0)

    def cdf_left(self, x):
        i = np.searchsorted(self.atoms, x, side="left")
        return np.where(i > 0, self._cum[np.maximum(i - 1, 0)], 0.0)

    def mean(self) -> float:
        return float(np.dot(self.atoms, self.masses))

    def support(self):
        return float(self.atoms[0]), float(self.atoms[-1])


class ContinuousLaw:
    """Interface for absolutely continuous laws (an atom may be added by subclasses).

    Subclasses provide ``cdf`` and ``pdf``; ``partial_mean``, ``mean`` and
    ``support`` have quadrature-based defaults.
    """

    kind = "continuous"

    def cdf(self, x):
        raise NotImplementedError

    def cdf_left(self, x):
        return self.cdf(x)

    def pdf(self, x):
        raise NotImplementedError

    def support(self):
        """Interval outside which the cdf is within 1e-10 of 0 or 1."""
        lo, hi = -1.0, 1.0
        while self.cdf(lo) > 1e-10:
            lo *= 2.0
        while self.cdf(hi) < 1.0 - 1e-10:
            hi *= 2.0
        return lo, hi

    def partial_mean(self, x):
        lo, _ = self.support()
        f = lambda y: y * self.pdf(y)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([integrate.quad(f, min(lo, v), v, epsabs=1e-13, limit=200)[0] for v in xs])
        return out if np.ndim(x) else float(out[0])

    def mean(self) -> float:
        _, hi = self.support()
        return float(self.partial_mean(hi))


class ScipyLaw(ContinuousLaw):
    """Adapter for a frozen ``scipy.stats`` continuous distribution."""

    def __init__(self, dist):
        self.dist = dist

    def cdf(self, x):
        return self.dist.cdf(x)

    def pdf(self, x):
        return self.dist.pdf(x)

    def support(self):
        return float(self.dist.ppf(1e-12)), float(self.dist.isf(1e-12))

    def mean(self):
        return float(self.dist.mean())


def _is_discrete(P):
    return getattr(P, "kind", None) == "discrete"


def d_K(P, Q) -> float:
    """Kolmogorov distance ``sup_t |F_P(t) - F_Q(t)|``.

    Exact when at least one argument is discrete; for two continuous laws the
    supremum is taken over a 10^4-point grid refined around its maximum.
    """
    if not _is_discrete(P) and _is_discrete(Q):
        P, Q = Q, P
    if _is_discrete(P):
        x = P.atoms
        if _is_discrete(Q):
            x = np.union1d(P.atoms, Q.atoms)
        right = np.abs(P.cdf(x) - Q.cdf(x))
        left = np.abs(P.cdf_left(x) - Q.cdf_left(x))
        return float(max(right.max(), left.max()))
    lo1, hi1 = P.support()
    lo2, hi2 = Q.support()
    lo, hi = min(lo1, lo2), max(hi1, hi2)
    x = np.linspace(lo, hi, 10_000)
    diff = np.abs(P.cdf(x) - Q.cdf(x))
    i = int(np.argmax(diff))
    a, b = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    res = optimize.minimize_scalar(lambda t: -abs(float(P.cdf(t) - Q.cdf(t))),
                                   bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12})
    return float(max(diff[i], -res.fun))


def _psi(Q, x):
    # x F(x) - E[Y; Y <= x], whose increments integrate the cdf
    return x * Q.cdf(x) - Q.partial_mean(x)


def _dw_discrete_continuous(P, Q) -> float:
    x = P.atoms
    cum = P._cum
    Fq = np.asarray(Q.cdf(x), dtype=float)
    psi = np.asarray(_psi(Q, x), dtype=float)
    total = psi[0] + (Q.mean() - x[-1] + psi[-1])
    if x.size == 1:
        return float(total)
    a, b = x[:-1], x[1:]
    p = cum[:-1]
    Fa, Fb = Fq[:-1], Fq[1:]
    pa, pb = psi[:-1], psi[1:]
    seg = np.where(Fb <= p, p * (b - a) - (pb - pa), (pb - pa) - p * (b - a))
    cross = (Fa < p) & (Fb > p)
    if np.any(cross):
        ca, cb, cp = a[cross], b[cross], p[cross]
        cFa, cFb = Fa[cross], Fb[cross]
        xs = ca + (cb - ca) * (cp - cFa) / (cFb - cFa)
        for _ in range(6):
            f = np.asarray(Q.cdf(xs), dtype=float) - cp
            d = np.asarray(Q.pdf(xs), dtype=float)
            step = np.where(d > 0, f / np.where(d > 0, d, 1.0), 0.0)
            xs = np.clip(xs - step, ca, cb)
        ps = np.asarray(_psi(Q, xs), dtype=float)
        pa_c, pb_c = pa[cross], pb[cross]
        seg[cross] = (cp * (xs - ca) - (ps - pa_c)) + ((pb_c - ps) - cp * (cb - xs))
    return float(total + seg.sum())


def d_W(P, Q) -> float:
    """Wasserstein-1 distance ``int |F_P - F_Q| dx``.

    Discrete pairs are integrated exactly.  A discrete law against a
    continuous one uses the partial first moment of the continuous law on each
    gap between atoms, splitting the gap where the two cdfs cross.  Two
    continuous laws are integrated by adaptive quadrature over the union of
    their supports.
    """
    if not _is_discrete(P) and _is_discrete(Q):
        P, Q = Q, P
    if _is_discrete(P) and _is_discrete(Q):
        x = np.union1d(P.atoms, Q.atoms)
        diff = np.abs(P.cdf(x[:-1]) - Q.cdf(x[:-1]))
        return float(np.sum(diff * np.diff(x)))
    if _is_discrete(P):
        return _dw_discrete_continuous(P, Q)
    lo1, hi1 = P.support()
    lo2, hi2 = Q.support()
    lo, hi = min(lo1, lo2), max(hi1, hi2)
    pts = np.linspace(lo, hi, 65)[1:-1]
    val, _ = integrate.quad(lambda t: abs(float(P.cdf(t) - Q.cdf(t))), lo, hi,
                            points=pts, epsabs=1e-11, limit=1000)
    return float(val)


def rate_fit(points):
    """Least-squares slope of ``log d`` against ``log n``.

    Parameters
    ----------
    points : sequence of (n, d)
        At least three pairs with increasing n and positive d.

    Returns
    -------
    slope : float
    r2 : float
        Coefficient of determination of the linear fit.
    """
    pts = [(float(n), float(d)) for n, d in points]
    if len(pts) < 3:
        raise ValueError("rate_fit needs at least three points")
    ns = np.array([n for n, _ in pts])
    ds = np.array([d for _, d in pts])
    if np.any(np.diff(ns) <= 0):
        raise ValueError("n must be increasing")
    if np.any(ds <= 0):
        raise ValueError("distances must be positive")
    lx, ly = np.log(ns), np.log(ds)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(r2)
