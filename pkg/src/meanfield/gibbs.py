"""Exact law of the number of up spins under a mean-field Gibbs measure.

For ``0 <= k <= n`` the log-weight is ``H_n(k/n) = n F(k/n) + log C(n, k)``,
optionally plus ``n sigma B(k/n)`` with ``sigma = n^(-1 + 1/(2 m_star))``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln, logsumexp

from .exceptions import EmptyWindowError
from .metrics import DiscreteLaw
from .smoothfn import Entropy, SmoothFunction

__all__ = [
    "FiniteGibbs",
    "Window",
    "build",
    "log_binom",
    "sigma_star",
    "make_window",
    "window_mass",
    "conditional_moment",
    "scaled_conditional_law",
    "sample",
    "window_partition",
    "stirling_residual",
    "brute_force_oracle",
]

MAX_N = 10**7


def log_binom(n: int, k):
    """``log C(n, k)`` through log-gamma."""
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def sigma_star(n: int, m_star: int) -> float:
    """Perturbation scale ``n^(-1 + 1/(2 m_star))``."""
    return float(n) ** (-1.0 + 1.0 / (2.0 * m_star))


@dataclass(frozen=True)
class FiniteGibbs:
    """Exact law of X_n on ``{0, ..., n}``.

    Attributes
    ----------
    n : int
    log_weights : ndarray
        ``H_n(k/n)`` for ``k = 0..n``.
    log_Z : float
        Log normalizer.
    provenance : dict
        Description of F and of the perturbation, if any.
    """

    n: int
    log_weights: np.ndarray = field(repr=False)
    log_Z: float
    provenance: dict = field(default_factory=dict)
    F: SmoothFunction | None = field(default=None, repr=False, compare=False)

    @cached_property
    def pmf_array(self) -> np.ndarray:
        # normalize by an explicit sum so the masses add to one at double precision
        w = np.exp(self.log_weights - self.log_weights.max())
        p = w / w.sum()
        p.flags.writeable = False
        return p

    @property
    def cdf_array(self) -> np.ndarray:
        c = np.cumsum(self.pmf_array)
        return np.minimum(c, 1.0)

    def _check(self, k):
        k = int(k)
        if k < 0 or k > self.n:
            raise IndexError(f"k={k} outside 0..{self.n}")
        return k

    def pmf(self, k: int) -> float:
        k = self._check(k)
        return float(math.exp(self.log_weights[k] - self.log_Z))

    def cdf(self, k: int) -> float:
        k = self._check(k)
        return float(min(1.0, np.exp(logsumexp(self.log_weights[: k + 1]) - self.log_Z)))

    def moment(self, r: int = 1) -> float:
        """``E[(X/n)^r]``."""
        x = np.arange(self.n + 1) / self.n
        return float(np.dot(self.pmf_array, x**r))

    def variance(self) -> float:
        m1 = self.moment(1)
        return float(self.moment(2) - m1 * m1)

    def expect(self, g) -> float:
        """``E[g(X/n)]`` for a vectorized callable g."""
        x = np.arange(self.n + 1) / self.n
        return float(np.dot(self.pmf_array, g(x)))

    def A_n(self, k):
        """``F(k/n) + log C(n, k) / n`` (perturbation excluded)."""
        k = np.asarray(k)
        return self.F.eval(k / self.n) + log_binom(self.n, k) / self.n

    def law(self) -> DiscreteLaw:
        """Law of ``X/n``."""
        return DiscreteLaw(np.arange(self.n + 1) / self.n, self.pmf_array)

    def to_csv(self, fh=None) -> str | None:
        """Write columns ``k, k_over_n, pmf, cdf`` with 17 significant digits."""
        own = fh is None
        buf = io.StringIO() if own else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "k_over_n", "pmf", "cdf"])
        pmf, cdf = self.pmf_array, self.cdf_array
        for k in range(self.n + 1):
            w.writerow([k, f"{k / self.n:.17g}", f"{pmf[k]:.17g}", f"{cdf[k]:.17g}"])
        return buf.getvalue() if own else None


def build(F: SmoothFunction, n: int, perturbation=None) -> FiniteGibbs:
    """Exact finite-n law for the model ``n F`` plus an optional perturbation.

    Parameters
    ----------
    F : SmoothFunction
        Interaction function on [0, 1].
    n : int
        Number of spins, ``1 <= n <= 10**7``.
    perturbation : (SmoothFunction, int), optional
        ``(B, m_star)``; adds ``n sigma B(k/n)`` with
        ``sigma = n^(-1 + 1/(2 m_star))``.
    """
    n = int(n)
    if n < 1 or n > MAX_N:
        raise ValueError(f"n must be in 1..{MAX_N}")
    k = np.arange(n + 1)
    x = k / n
    H = n * F.eval(x) + log_binom(n, k)
    prov = {"F": F.label, "n": n}
    if perturbation is not None:
        B, m_star = perturbation
        m_star = int(m_star)
        if m_star < 1:
            raise ValueError("m_star must be at least 1")
        H = H + n * sigma_star(n, m_star) * B.eval(x)
        prov.update({"B": B.label, "m_star": m_star})
    return FiniteGibbs(n=n, log_weights=H, log_Z=float(logsumexp(H)), provenance=prov, F=F)


@dataclass(frozen=True)
class Window:
    """Lattice window ``ceil(n(a - delta)) <= k <= floor(n(a + delta))``."""

    j: int
    a: float
    delta: float
    k_lo: int
    k_hi: int

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_hi + 1)


def make_window(n: int, a: float, delta: float, j: int = 0) -> Window:
    """Window around ``a`` of half-width ``delta``, clipped to ``[0, n]``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    lo = max(0, math.ceil(n * (a - delta) - 1e-9))
    hi = min(n, math.floor(n * (a + delta) + 1e-9))
    if lo > hi:
        raise EmptyWindowError(f"window around a={a} with delta={delta} is empty at n={n}")
    return Window(j=j, a=float(a), delta=float(delta), k_lo=int(lo), k_hi=int(hi))


def window_mass(G: FiniteGibbs, w: Window) -> float:
    """``P[k_lo <= X <= k_hi]``."""
    return float(np.exp(logsumexp(G.log_weights[w.k_lo : w.k_hi + 1]) - G.log_Z))


def _window_probs(G, w):
    lw = G.log_weights[w.k_lo : w.k_hi + 1]
    if lw.size == 0:
        raise EmptyWindowError("empty window")
    p = np.exp(lw - logsumexp(lw))
    return p


def conditional_moment(G: FiniteGibbs, w: Window, l: int) -> float:
    """``E[|X/n - a|^l | X in window]``."""
    p = _window_probs(G, w)
    return float(np.dot(p, np.abs(w.ks / G.n - w.a) ** l))


def scaled_conditional_law(G: FiniteGibbs, w: Window, m: int) -> DiscreteLaw:
    """Conditional law of ``n^(1/(2m)) (X/n - a)`` given the window."""
    p = _window_probs(G, w)
    atoms = G.n ** (1.0 / (2 * m)) * (w.ks / G.n - w.a)
    return DiscreteLaw(atoms, p)


def window_partition(G: FiniteGibbs, w: Window) -> float:
    """``log sum_{k in window} exp(H_n(k/n))`` (unnormalized)."""
    return float(logsumexp(G.log_weights[w.k_lo : w.k_hi + 1]))


def sample(G: FiniteGibbs, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. values of X by inverse-cdf search.

    The stream is ``numpy.random.default_rng(seed)`` (PCG64), so a fixed seed
    reproduces the same draws.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.random(int(count))
    cdf = G.cdf_array
    cdf[-1] = 1.0
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def stirling_residual(n: int, k: int, band: float = 0.05) -> float:
    """``log C(n,k)/n - [log sqrt(n / (2 pi (n-k) k))/n + I(k/n)]``.

    Raises
    ------
    ValueError
        When ``k`` lies outside ``[band n, (1 - band) n]``.
    """
    if k < band * n - 1e-9 or k > (1.0 - band) * n + 1e-9:
        raise ValueError(f"k={k} outside the band [{band}n, {1 - band}n] for n={n}")
    lead = 0.5 * math.log(n / (2.0 * math.pi * (n - k) * k)) / n
    return float(log_binom(n, k) / n - lead - Entropy()(k / n))


def brute_force_oracle(F: SmoothFunction, n: int) -> np.ndarray:
    """Law of the number of up spins by enumerating all ``2^n`` spin vectors.

    Each configuration gets weight ``exp(n F(#up / n))``; weights are summed by
    the count of up spins.
    """
    n = int(n)
    if n < 1 or n > 15:
        raise ValueError("brute-force enumeration is limited to 1 <= n <= 15")
    configs = np.arange(2**n, dtype=np.int64)
    ups = np.zeros(configs.size, dtype=np.int64)
    for bit in range(n):
        ups += (configs >> bit) & 1
    logw = n * F.eval(ups / n)
    shift = logw.max()
    mass = np.bincount(ups, weights=np.exp(logw - shift), minlength=n + 1)
    return mass / mass.sum()
