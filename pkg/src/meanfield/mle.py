"""Maximum likelihood for one coefficient of a mean-field linear model.

The model is ``H_n = n (beta f(X/n) + g(X/n))``.  The score equation is
``u(beta) = f(k/n)`` with ``u(beta) = E_beta f(X/n)`` strictly increasing, so
the estimator is found by monotone root finding on an exact ``(n+1)``-point
law.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _validation
from .exceptions import UnbracketableError
from .gibbs import log_binom
from .landscape import find_maximizers, build_A
from .limitlaw import mle_limit
from .metrics import DiscreteLaw, d_K
from .smoothfn import Combination, Constant, SmoothFunction

__all__ = ["MleProblem", "u_of_beta", "estimate", "mc_experiment", "McResult", "MeanFieldMLE"]


class MleProblem:
    """Estimation problem for the coefficient of ``f``.

    Parameters
    ----------
    f : SmoothFunction
        Direction of the estimated coefficient; must be non-constant.
    g : SmoothFunction, optional
        Known remainder of the interaction (zero when omitted).
    n : int
        Number of spins.
    true_beta : float, optional
        Coefficient used to generate data in experiments.
    """

    def __init__(self, f: SmoothFunction, g: SmoothFunction | None, n: int,
                 true_beta: float | None = None):
        self.f = f
        self.g = g if g is not None else Constant(0.0)
        self.n = _validation.check_n(n)
        self.true_beta = true_beta
        x = np.arange(self.n + 1) / self.n
        self._fk = np.asarray(f.eval(x), dtype=float)
        if np.ptp(self._fk) == 0.0:
            raise ValueError("f must be non-constant on the lattice {k/n}")
        self._base = self.n * np.asarray(self.g.eval(x), dtype=float) + log_binom(self.n, np.arange(self.n + 1))
        self._cache: dict = {}

    def log_weights(self, beta: float) -> np.ndarray:
        return self.n * beta * self._fk + self._base

    def u(self, beta: float) -> float:
        lw = self.log_weights(beta)
        p = np.exp(lw - logsumexp(lw))
        return float(np.dot(p, self._fk))

    def pmf(self, beta: float) -> np.ndarray:
        lw = self.log_weights(beta)
        return np.exp(lw - logsumexp(lw))

    def F(self, beta: float) -> SmoothFunction:
        """Interaction ``beta f + g`` at the given coefficient."""
        return Combination([(beta, self.f), (1.0, self.g)])

    def statistic(self, k) -> np.ndarray:
        return self._fk[np.asarray(k)]


def u_of_beta(P: MleProblem, beta: float) -> float:
    """``E_beta f(X/n)`` computed exactly."""
    return P.u(beta)


def _solve(P: MleProblem, target: float, bracket: float, max_doublings: int) -> float:
    # u maps the real line onto the open interval (min f_k, max f_k)
    fmin, fmax = float(P._fk.min()), float(P._fk.max())
    if not fmin < target < fmax:
        raise UnbracketableError(
            f"f(k/n)={target:.17g} is outside the attainable range ({fmin:.17g}, {fmax:.17g})",
            target=target, attainable=(fmin, fmax),
        )
    B = float(bracket)
    for _ in range(max_doublings + 1):
        lo, hi = P.u(-B) - target, P.u(B) - target
        if lo < 0.0 < hi:
            return brentq(lambda b: P.u(b) - target, -B, B, xtol=1e-14, rtol=1e-15, maxiter=400)
        if lo == 0.0:
            return -B
        if hi == 0.0:
            return B
        B *= 2.0
    raise UnbracketableError(
        f"f(k/n)={target:.17g} is outside the attainable range "
        f"({P.u(-B / 2):.17g}, {P.u(B / 2):.17g}) for |beta| <= {B / 2:g}",
        target=target, attainable=(P.u(-B / 2), P.u(B / 2)),
    )


def estimate_statistic(P: MleProblem, target: float, bracket: float = 50.0,
                       max_doublings: int = 10) -> float:
    """Solve ``u(beta) = target``."""
    return _solve(P, float(target), bracket, max_doublings)


def estimate(P: MleProblem, k_observed: int, bracket: float = 50.0,
             max_doublings: int = 10) -> float:
    """MLE from one observed count ``k``.

    The root of ``u(beta) - f(k/n)`` is bracketed in ``[-50, 50]``; the bracket
    doubles up to ten times before :class:`UnbracketableError` is raised.
    Results are cached per ``k``.
    """
    k = int(k_observed)
    if k < 0 or k > P.n:
        raise IndexError(f"k={k} outside 0..{P.n}")
    key = (k, bracket, max_doublings)
    if key not in P._cache:
        try:
            P._cache[key] = _solve(P, float(P._fk[k]), bracket, max_doublings)
        except UnbracketableError as err:
            P._cache[key] = err
    out = P._cache[key]
    if isinstance(out, Exception):
        raise out
    return out


@dataclass
class McResult:
    """Outcome of a Monte Carlo run of the rescaled MLE error."""

    errors: np.ndarray
    failures: int
    reps: int
    m_star: int
    scale: float
    limit: object = field(repr=False)
    runtime: float = 0.0
    ks: np.ndarray | None = None
    estimates: np.ndarray | None = None

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.reps

    def empirical(self) -> DiscreteLaw:
        return DiscreteLaw(self.errors)

    def d_K_to_limit(self) -> float:
        return d_K(self.empirical(), self.limit)

    def summary(self) -> dict:
        return {
            "reps": self.reps,
            "failures": self.failures,
            "failure_fraction": self.failure_fraction,
            "m_star": self.m_star,
            "scale": self.scale,
            "d_K": self.d_K_to_limit() if self.errors.size else None,
            "atom0": self.limit.atom0,
            "runtime": self.runtime,
        }


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replicate, keyed by ``(seed, index)``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


def mc_experiment(P: MleProblem, reps: int, seed: int, landscape=None) -> McResult:
    """Sample the rescaled error ``(beta_hat - beta) n^{1 - 1/(2 m_star)}``.

    Each replicate draws X from the exact law at ``P.true_beta`` with its own
    random stream, estimates beta and rescales.  The limit law is built first,
    so a landscape violating the non-degeneracy hypothesis raises
    :class:`~meanfield.exceptions.HypothesisViolation` before any sampling.
    """
    t0 = time.perf_counter()
    reps = _validation.check_positive_int(reps, "reps")
    seed = _validation.check_seed(seed)
    if P.true_beta is None:
        raise ValueError("true_beta must be set for an experiment")
    beta = float(P.true_beta)
    L = landscape if landscape is not None else find_maximizers(build_A(P.F(beta)))
    U = mle_limit(L, P.f)
    scale = P.n ** (1.0 - 1.0 / (2 * L.m_star))
    cdf = np.cumsum(P.pmf(beta))
    cdf[-1] = 1.0
    ks = np.array([np.searchsorted(cdf, replicate_rng(seed, i).random(), side="right")
                   for i in range(reps)])
    errs, ests, fails = [], [], 0
    for k in ks:
        try:
            b = estimate(P, int(k))
        except UnbracketableError:
            fails += 1
            ests.append(math.nan)
            continue
        ests.append(b)
        errs.append((b - beta) * scale)
    return McResult(errors=np.array(errs), failures=fails, reps=reps, m_star=L.m_star,
                    scale=scale, limit=U, runtime=time.perf_counter() - t0,
                    ks=ks, estimates=np.array(ests))


class MeanFieldMLE(BaseEstimator):
    """Scikit-learn style estimator for the coefficient of ``f``.

    Parameters
    ----------
    f : SmoothFunction
        Direction of the estimated coefficient.
    g : SmoothFunction, optional
        Known remainder.
    n : int
        Number of spins per observation.
    bracket : float
        Initial half-width of the search interval.
    max_doublings : int
        How many times the bracket may double.

    Attributes
    ----------
    beta_ : float
        Fitted coefficient.
    statistic_ : float
        Mean of ``f(k_i/n)`` over the observations.
    n_observations_ : int
    """

    def __init__(self, f=None, g=None, n=100, bracket=50.0, max_doublings=10):
        self.f = f
        self.g = g
        self.n = n
        self.bracket = bracket
        self.max_doublings = max_doublings

    def _problem(self):
        if self.f is None:
            raise ValueError("f must be given")
        return MleProblem(self.f, self.g, self.n)

    def fit(self, X, y=None):
        """Fit from observed counts of up spins (one per independent sample)."""
        n = _validation.check_n(self.n)
        ks = _validation.check_counts(X, n)
        P = self._problem()
        self.statistic_ = float(np.mean(P.statistic(ks)))
        self.beta_ = estimate_statistic(P, self.statistic_, self.bracket, self.max_doublings)
        self.n_observations_ = int(ks.size)
        self.problem_ = P
        return self

    def score(self, X, y=None):
        """Mean log-likelihood of the counts at the fitted coefficient."""
        check_is_fitted(self, "beta_")
        ks = _validation.check_counts(X, self.problem_.n)
        lw = self.problem_.log_weights(self.beta_)
        return float(np.mean(lw[ks] - logsumexp(lw)))

    def u(self, beta: float) -> float:
        return self._problem().u(beta)
