"""Continuous limit laws, mixture weights and the MLE limit distribution.

``TiltedLaw(c, m, b)`` has density proportional to ``exp(c x^{2m} + b x)``
with ``c < 0``.  Mixture weights over surviving maximizers are proportional
to ``q_j e^{nu_j}`` where ``q_j`` is the normalizer of the j-th tilted law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp

from .exceptions import HypothesisViolation
from .landscape import Landscape, PerturbationSets
from .metrics import ContinuousLaw
from .smoothfn import SmoothFunction

__all__ = [
    "normalizer",
    "log_normalizer",
    "TiltedLaw",
    "NormalLaw",
    "HalfNormal",
    "MixtureWeights",
    "theorem1_weights",
    "MleLimit",
    "mle_limit",
    "u_cdf",
    "half_normal",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_LOG_CUT = 40.0


def _peak(c, m, b):
    if b == 0.0:
        return 0.0
    return math.copysign((abs(b) / (2.0 * m * abs(c))) ** (1.0 / (2 * m - 1)), b)


def _radius(c, m, b):
    # |c| R^{2m} - |b| R = 40, at least 8
    g = lambda r: abs(c) * r ** (2 * m) - abs(b) * r - _LOG_CUT
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    r = optimize.brentq(g, 0.0, hi, xtol=1e-14)
    return max(r, 8.0)


def _check_c(c):
    if not c < 0:
        raise ValueError(f"the quartic-type coefficient c must be negative, got {c}")


def log_normalizer(c: float, m: int, b: float = 0.0) -> float:
    """``log int exp(c x^{2m} + b x) dx`` by adaptive quadrature."""
    _check_c(c)
    m = int(m)
    xp = _peak(c, m, b)
    lp = c * xp ** (2 * m) + b * xp
    R = _radius(c, m, b)
    f = lambda x: math.exp(c * x ** (2 * m) + b * x - lp)
    val, _ = integrate.quad(f, -R, R, points=[xp], epsabs=1e-14, epsrel=1e-13, limit=400)
    return lp + math.log(val)


def normalizer(c: float, m: int, b: float = 0.0) -> float:
    """``q = int exp(c x^{2m} + b x) dx`` for ``c < 0``.

    The integrand is shifted by its peak value and integrated with adaptive
    Gauss-Kronrod quadrature on ``[-R, R]`` where ``|c| R^{2m} - |b| R = 40``
    (``R >= 8``); the neglected tails are below ``e^{-40}`` relative.
    """
    return math.exp(log_normalizer(c, m, b))


class NormalLaw(ContinuousLaw):
    """Gaussian law with closed-form cdf and partial first moment."""

    def __init__(self, mean: float = 0.0, var: float = 1.0):
        if not var > 0:
            raise ValueError("variance must be positive")
        self.mu = float(mean)
        self.var = float(var)
        self.sd = math.sqrt(var)

    def cdf(self, x):
        return stats.norm.cdf((np.asarray(x, dtype=float) - self.mu) / self.sd)

    def pdf(self, x):
        return stats.norm.pdf((np.asarray(x, dtype=float) - self.mu) / self.sd) / self.sd

    def partial_mean(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sd
        return self.mu * stats.norm.cdf(z) - self.sd * stats.norm.pdf(z)

    def mean(self):
        return self.mu

    def variance(self):
        return self.var

    def quantile(self, u):
        return self.mu + self.sd * stats.norm.ppf(u)

    def support(self):
        z = 6.5
        return self.mu - z * self.sd, self.mu + z * self.sd


class TiltedLaw(ContinuousLaw):
    """Law with density proportional to ``exp(c x^{2m} + b x)``, ``c < 0``.

    Queries use a table of Gauss-Legendre cells covering the region where the
    log density is within 40 of its peak; partial cells are integrated with
    the same rule, so cdf and partial moments are accurate to roughly 1e-13.
    For ``m = 1`` the Gaussian closed forms are used unless
    ``force_quadrature`` is set.

    Parameters
    ----------
    c : float
        Negative leading coefficient.
    m : int
        Half the power of the leading term.
    b : float
        Linear tilt.
    force_quadrature : bool
        Use the cell table even when ``m = 1``.
    """

    def __init__(self, c: float, m: int, b: float = 0.0, force_quadrature: bool = False):
        _check_c(c)
        self.c, self.m, self.b = float(c), int(m), float(b)
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        self._normal = None
        if self.m == 1 and not force_quadrature:
            self._normal = NormalLaw(self.b / (2.0 * abs(self.c)), 1.0 / (2.0 * abs(self.c)))
            self.log_q = 0.5 * math.log(math.pi / abs(self.c)) + self.b**2 / (4.0 * abs(self.c))
        else:
            self._build_table()
        self._qtable = None

    @property
    def q(self) -> float:
        return math.exp(self.log_q)

    # -- cell table -----------------------------------------------------------
    def _logdens(self, x):
        return self.c * x ** (2 * self.m) + self.b * x - self._lp

    def _build_table(self):
        c, m, b = self.c, self.m, self.b
        xp = _peak(c, m, b)
        self._lp = c * xp ** (2 * m) + b * xp
        R = _radius(c, m, b)
        width = abs(c) ** (-1.0 / (2 * m))
        ncell = int(min(20000, max(256, math.ceil(2 * R / (width / 16.0)))))
        self._lo, self._hi = -R, R
        self._edges = np.linspace(-R, R, ncell + 1)
        self._h = self._edges[1] - self._edges[0]
        mid = 0.5 * (self._edges[:-1] + self._edges[1:])
        pts = mid[:, None] + 0.5 * self._h * _GL_X[None, :]
        dens = np.exp(self._logdens(pts))
        mass = 0.5 * self._h * (dens @ _GL_W)
        mom1 = 0.5 * self._h * ((dens * pts) @ _GL_W)
        mom2 = 0.5 * self._h * ((dens * pts * pts) @ _GL_W)
        self._Z = float(mass.sum())
        self.log_q = self._lp + math.log(self._Z)
        self._cum = np.concatenate([[0.0], np.cumsum(mass)]) / self._Z
        self._cum1 = np.concatenate([[0.0], np.cumsum(mom1)]) / self._Z
        self._m1 = float(mom1.sum() / self._Z)
        self._m2 = float(mom2.sum() / self._Z)

    def _partial(self, x, power):
        x = np.asarray(x, dtype=float)
        xs = np.clip(x, self._lo, self._hi)
        i = np.clip(((xs - self._lo) // self._h).astype(int), 0, len(self._edges) - 2)
        left = self._edges[i]
        half = 0.5 * (xs - left)
        pts = left[..., None] + half[..., None] * (1.0 + _GL_X)
        vals = np.exp(self._logdens(pts)) / self._Z
        if power == 1:
            vals = vals * pts
        part = half * (vals @ _GL_W)
        base = self._cum if power == 0 else self._cum1
        return base[i] + part

    def cdf(self, x):
        if self._normal is not None:
            return self._normal.cdf(x)
        out = self._partial(x, 0)
        return np.clip(out, 0.0, 1.0)

    def pdf(self, x):
        if self._normal is not None:
            return self._normal.pdf(x)
        x = np.asarray(x, dtype=float)
        return np.exp(self._logdens(x)) / self._Z

    def partial_mean(self, x):
        if self._normal is not None:
            return self._normal.partial_mean(x)
        return self._partial(x, 1)

    def mean(self) -> float:
        if self._normal is not None:
            return self._normal.mu
        return self._m1

    def variance(self) -> float:
        if self._normal is not None:
            return self._normal.var
        return self._m2 - self._m1**2

    def support(self):
        if self._normal is not None:
            return self._normal.support()
        return self._lo, self._hi

    def quantile(self, u):
        """Inverse cdf by bisection (Brent) on the cdf."""
        u = float(u)
        if not 0.0 < u < 1.0:
            raise ValueError("quantile level must lie in (0, 1)")
        if self._normal is not None:
            return float(self._normal.quantile(u))
        lo, hi = self.support()
        return optimize.brentq(lambda x: float(self.cdf(x)) - u, lo, hi, xtol=1e-14)

    def _quantile_table(self):
        if self._qtable is None:
            # tabulate between the 1e-12 and 1 - 1e-12 quantiles; flat tails
            # would give the inverse spline infinite slopes
            lo, hi = self.quantile(1e-12), self.quantile(1.0 - 1e-12)
            x = np.linspace(lo, hi, 4096)
            F = np.asarray(self.cdf(x), dtype=float)
            keep = [0]
            for i in range(1, x.size):
                if F[i] > F[keep[-1]] + 1e-15:
                    keep.append(i)
            self._qtable = (PchipInterpolator(F[keep], x[keep], extrapolate=True), lo, hi)
        return self._qtable

    def sample(self, seed, count: int) -> np.ndarray:
        """Inverse-cdf sampling; a monotone spline of the quantile is cached."""
        rng = np.random.default_rng(seed)
        u = rng.random(int(count))
        if self._normal is not None:
            return self._normal.quantile(u)
        spline, lo, hi = self._quantile_table()
        return np.clip(spline(u), lo, hi)


class HalfNormal(ContinuousLaw):
    """Law of ``sign * |Z|`` with ``Z ~ N(0, variance)``."""

    def __init__(self, sign: int, variance: float):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not variance > 0:
            raise ValueError("variance must be positive")
        self.sign = sign
        self.var = float(variance)
        self.sd = math.sqrt(self.var)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        z = np.abs(x) / self.sd
        inner = 2.0 * stats.norm.cdf(z) - 1.0
        if self.sign > 0:
            return np.where(x <= 0, 0.0, inner)
        return np.where(x >= 0, 1.0, 1.0 - inner)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        on = (x > 0) if self.sign > 0 else (x < 0)
        return np.where(on, 2.0 * stats.norm.pdf(x / self.sd) / self.sd, 0.0)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if self.sign > 0:
            return self.sd * stats.norm.ppf(0.5 + 0.5 * u)
        return -self.sd * stats.norm.ppf(1.0 - 0.5 * u)

    def sample(self, seed, count: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return self.quantile(rng.random(int(count)))

    def mean(self):
        return self.sign * self.sd * math.sqrt(2.0 / math.pi)

    def support(self):
        s = 7.0 * self.sd
        return (0.0, s) if self.sign > 0 else (-s, 0.0)


def half_normal(sign: int, variance: float) -> HalfNormal:
    """Positive (``sign=+1``) or negative (``sign=-1``) half-normal law."""
    return HalfNormal(sign, variance)


@dataclass(frozen=True)
class MixtureWeights:
    """Limiting probabilities of the neighbourhoods of surviving maximizers."""

    weights: dict

    def __getitem__(self, j):
        return self.weights[j]

    def as_array(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        for j, p in self.weights.items():
            out[j] = p
        return out


def theorem1_weights(L: Landscape, S: PerturbationSets | None = None) -> MixtureWeights:
    """Weights ``p_j = q_j e^{nu_j} / sum_{k in J2} q_k e^{nu_k}`` over ``J2``.

    With ``S=None`` the perturbation is absent: ``J2 = J_star`` and all tilts
    vanish.
    """
    if S is None:
        J2 = L.J_star
        b = {j: 0.0 for j in J2}
    else:
        J2, b = S.J2, S.b
    if not J2:
        raise ValueError("J2 is empty")
    logs = []
    for j in J2:
        mx = L.maximizers[j]
        logs.append(log_normalizer(mx.c, mx.m, b.get(j, 0.0)) + mx.nu)
    logs = np.array(logs)
    p = np.exp(logs - logsumexp(logs))
    return MixtureWeights({int(j): float(v) for j, v in zip(J2, p)})


class MleLimit(ContinuousLaw):
    """Limit law U of the rescaled MLE error: two branches plus an atom at 0.

    Attributes
    ----------
    atom0 : float
        ``P[U = 0]``.
    p_neg, p_pos : float
        ``P[U < 0]`` and ``P[U > 0]``.
    """

    def __init__(self, L: Landscape, fvals, fprimes, weights: dict, J2m, J2p,
                 zero_tol: float):
        self.L = L
        self.fvals = tuple(fvals)
        self.fprimes = tuple(fprimes)
        self.weights = dict(weights)
        self.J2m, self.J2p = tuple(J2m), tuple(J2p)
        self.zero_tol = zero_tol
        nz = lambda j: abs(self.fprimes[j]) > zero_tol
        self.p_neg = 0.5 * sum(self.weights[j] for j in self.J2m if nz(j))
        self.p_pos = 0.5 * sum(self.weights[j] for j in self.J2p if nz(j))
        self.atom0 = 1.0 - self.p_neg - self.p_pos
        self._Y0 = {j: TiltedLaw(L[j].c, L[j].m, 0.0) for j in set(self.J2m) | set(self.J2p)}

    def _e(self, t, J):
        # sum_k f'_k E[Y_k(t)] p_k(t), p_k(t) proportional to q_k(t) e^{nu_k}
        logw, means = [], []
        for k in J:
            mx = self.L[k]
            Y = TiltedLaw(mx.c, mx.m, t * self.fprimes[k])
            logw.append(Y.log_q + mx.nu)
            means.append(self.fprimes[k] * Y.mean())
        logw = np.array(logw)
        w = np.exp(logw - logsumexp(logw))
        return float(np.dot(w, means))

    def _branch(self, t, J):
        e = self._e(t, J)
        tot = 0.0
        for j in J:
            fp = self.fprimes[j]
            if abs(fp) <= self.zero_tol:
                continue
            # P[f' Y <= e] = P[Y <= e/|f'|] by symmetry of the untilted law
            tot += self.weights[j] * float(self._Y0[j].cdf(e / abs(fp)))
        return tot

    def cdf_scalar(self, t: float) -> float:
        t = float(t)
        if t < 0:
            return self._branch(t, self.J2m)
        if t > 0:
            # P[U > t] = sum p_j P[f' Y_j > e_+(t)] = sum p_j P[Y_j <= -e_+/|f'|]
            e = self._e(t, self.J2p)
            tail = 0.0
            for j in self.J2p:
                fp = self.fprimes[j]
                if abs(fp) > self.zero_tol:
                    tail += self.weights[j] * float(self._Y0[j].cdf(-e / abs(fp)))
            return 1.0 - tail
        return self.p_neg + self.atom0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array([self.cdf_scalar(v) for v in x.ravel()]).reshape(x.shape)
        return out if out.ndim else float(out)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array([self.p_neg if v == 0 else self.cdf_scalar(v) for v in x.ravel()])
        out = out.reshape(x.shape)
        return out if out.ndim else float(out)

    def support(self):
        lo, hi = -1.0, 1.0
        while self.cdf_scalar(lo) > 1e-10:
            lo *= 2.0
        while self.cdf_scalar(hi) < 1.0 - 1e-10:
            hi *= 2.0
        return lo, hi

    def to_dict(self) -> dict:
        return {"atom0": self.atom0, "p_neg": self.p_neg, "p_pos": self.p_pos,
                "J2_minus": list(self.J2m), "J2_plus": list(self.J2p),
                "weights": {str(j): p for j, p in self.weights.items()},
                "f_prime": list(self.fprimes)}


def mle_limit(L: Landscape, f: SmoothFunction, tol: float = 1e-9) -> MleLimit:
    """Build the limit law U for the MLE of the coefficient of ``f``.

    Raises
    ------
    HypothesisViolation
        When ``J2-`` or ``J2+`` leaves ``J_star`` or when no pair
        ``j in J2-``, ``k in J2+`` has ``f'(a_j) f'(a_k) != 0``.
    """
    fv = [float(f.eval(mx.a)) for mx in L.maximizers]
    fp = [float(f.eval(mx.a, 1, "left")) for mx in L.maximizers]
    fv_arr = np.array(fv)

    def second(J1):
        mm = max(L[j].m for j in J1)
        return tuple(j for j in J1 if L[j].m == mm)

    J1m = tuple(int(j) for j in np.nonzero(fv_arr <= fv_arr.min() + tol)[0])
    J1p = tuple(int(j) for j in np.nonzero(fv_arr >= fv_arr.max() - tol)[0])
    J2m, J2p = second(J1m), second(J1p)
    bad = [j for j in set(J2m) | set(J2p) if j not in L.J_star]
    if bad:
        raise HypothesisViolation(
            f"maximizers {bad} are in J2-/J2+ but not of the top order 2m*={2 * L.m_star}"
        )
    zero_tol = tol * max(1.0, max(abs(v) for v in fp))
    nzm = [j for j in J2m if abs(fp[j]) > zero_tol]
    nzp = [j for j in J2p if abs(fp[j]) > zero_tol]
    if not nzm or not nzp:
        where = [f"a={L[j].a:.6g}" for j in (set(J2m) | set(J2p)) if abs(fp[j]) <= zero_tol]
        raise HypothesisViolation(
            "f' vanishes at every relevant maximizer on one side "
            f"({', '.join(where)}); the non-degeneracy condition fails"
        )
    weights = theorem1_weights(L).weights
    return MleLimit(L, fv, fp, weights, J2m, J2p, zero_tol)


def u_cdf(U: MleLimit, t: float) -> float:
    """``P[U <= t]``."""
    return U.cdf_scalar(t)
