"""Interaction functions, the entropy and their exact derivatives.

Every model function is a :class:`SmoothFunction` on the unit interval (or on
``[-1, 1]`` for functions of the spin variable ``t = 2a - 1``).  Derivatives are
closed form for polynomials and entropies.  The annealed random-regular-graph
term is quadrature backed for its value and closed form for its derivatives.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import xlogy

from .exceptions import DomainError, KinkError, OrderError

__all__ = [
    "SmoothFunction",
    "SpinPolynomial",
    "Polynomial",
    "Entropy",
    "BinaryEntropyT",
    "Constant",
    "Combination",
    "TScaled",
    "AnnealedG",
    "combine",
    "t_of_a_scaling",
]


class SmoothFunction:
    """Base class for a real function with derivatives up to ``max_order``.

    Subclasses implement ``_eval(a, k, side)`` on a 1-d float array that has
    already been checked against the domain and the order cap.

    Attributes
    ----------
    max_order : int
        Highest derivative that can be evaluated.
    label : str
        Human readable description.
    domain : tuple of float
        Closed interval on which the value (k = 0) is finite.
    kinks : tuple of float
        Points where derivatives are only one-sided.
    """

    max_order: int = 0
    label: str = ""
    domain: tuple = (0.0, 1.0)
    kinks: tuple = ()

    def eval(self, a, k: int = 0, side: str | None = None):
        """Evaluate the k-th derivative at ``a`` (scalar or array).

        Parameters
        ----------
        a : float or array_like
            Evaluation points.
        k : int
            Derivative order, ``0 <= k <= max_order``.
        side : {None, 'left', 'right'}
            Branch used at a kink point for ``k >= 1``.
        """
        k = int(k)
        if k < 0 or k > self.max_order:
            raise OrderError(
                f"derivative order {k} outside 0..{self.max_order} for {self.label}"
            )
        if side not in (None, "left", "right"):
            raise ValueError("side must be None, 'left' or 'right'")
        arr = np.asarray(a, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        lo, hi = self.domain
        if np.any(~np.isfinite(arr)) or np.any(arr < lo) or np.any(arr > hi):
            raise DomainError(f"{self.label}: argument outside [{lo}, {hi}]")
        if k >= 1 and side is None:
            for x0 in self.kinks:
                if np.any(arr == x0):
                    raise KinkError(
                        f"{self.label}: derivative of order {k} at the kink "
                        f"{x0} needs side='left' or side='right'"
                    )
        out = np.asarray(self._eval(arr, k, side), dtype=float)
        if scalar:
            return float(out.reshape(-1)[0])
        return out.reshape(arr.shape)

    def _eval(self, a: np.ndarray, k: int, side):
        raise NotImplementedError

    def __call__(self, a):
        return self.eval(a, 0)

    def derivative(self, k: int):
        """Return the callable ``a -> f^(k)(a)``."""
        return lambda a, side=None: self.eval(a, k, side)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Constant(float(other))
        return Combination([(1.0, self), (1.0, other)])

    __radd__ = __add__

    def __mul__(self, coef):
        return Combination([(float(coef), self)])

    __rmul__ = __mul__

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


def _falling(p: int, k: int) -> float:
    # p (p-1) ... (p-k+1)
    out = 1.0
    for i in range(k):
        out *= p - i
    return out


class SpinPolynomial(SmoothFunction):
    """Polynomial in the spin variable, ``sum_i beta_i (2a - 1)^{p_i}``.

    Parameters
    ----------
    terms : sequence of (coefficient, power)
        Powers must be distinct positive integers.
    """

    def __init__(self, terms: Iterable[Sequence[float]], max_order: int = 64):
        terms = [(float(c), int(p)) for c, p in terms]
        powers = [p for _, p in terms]
        if any(p < 1 for p in powers):
            raise ValueError("powers must be positive integers")
        if len(set(powers)) != len(powers):
            raise ValueError("powers must be distinct")
        self.terms = tuple(sorted(terms, key=lambda cp: cp[1]))
        self.max_order = int(max_order)
        self.label = " + ".join(f"{c:g}*(2a-1)^{p}" for c, p in self.terms) or "0"

    def _eval(self, a, k, side):
        t = 2.0 * a - 1.0
        out = np.zeros_like(a)
        scale = 2.0**k
        for c, p in self.terms:
            if p < k or c == 0.0:
                continue
            out += c * _falling(p, k) * scale * t ** (p - k)
        return out


class Polynomial(SmoothFunction):
    """Polynomial ``sum_i c_i x^{p_i}`` in its own variable.

    Parameters
    ----------
    terms : sequence of (coefficient, power)
        Distinct non-negative integer powers.
    domain : tuple of float
        Interval of definition, ``(0, 1)`` by default.
    """

    def __init__(self, terms, domain=(0.0, 1.0), max_order: int = 64):
        terms = [(float(c), int(p)) for c, p in terms]
        powers = [p for _, p in terms]
        if any(p < 0 for p in powers) or len(set(powers)) != len(powers):
            raise ValueError("powers must be distinct non-negative integers")
        self.terms = tuple(sorted(terms, key=lambda cp: cp[1]))
        self.domain = tuple(domain)
        self.max_order = int(max_order)
        self.label = " + ".join(f"{c:g}*x^{p}" for c, p in self.terms) or "0"

    def _eval(self, x, k, side):
        out = np.zeros_like(x)
        for c, p in self.terms:
            if p >= k and c != 0.0:
                out += c * _falling(p, k) * x ** (p - k)
        return out


class Constant(SmoothFunction):
    """The constant function."""

    def __init__(self, value: float, domain=(0.0, 1.0)):
        self.value = float(value)
        self.max_order = 64
        self.domain = tuple(domain)
        self.label = f"{self.value:g}"

    def _eval(self, a, k, side):
        return np.full_like(a, self.value if k == 0 else 0.0)


class Entropy(SmoothFunction):
    """Binary entropy in the occupation variable.

    ``I(a) = -a log a + (a - 1) log(1 - a)`` with ``0 log 0 = 0``.  Derivatives
    of order one and higher are singular at 0 and 1 and raise
    :class:`DomainError` there.
    """

    max_order = 40
    label = "I(a)"

    def _eval(self, a, k, side):
        if k == 0:
            return -xlogy(a, a) - xlogy(1.0 - a, 1.0 - a)
        if np.any((a <= 0.0) | (a >= 1.0)):
            raise DomainError("entropy derivatives are singular at a = 0 and a = 1")
        if k == 1:
            # log((1-a)/a), written to keep precision near 1/2
            return -2.0 * np.arctanh(2.0 * a - 1.0)
        f = math.factorial(k - 2)
        return -f * ((-1.0) ** (k - 2) / a ** (k - 1) + 1.0 / (1.0 - a) ** (k - 1))


class BinaryEntropyT(SmoothFunction):
    """Entropy in the spin variable on ``[-1, 1]``.

    ``E(t) = -((1+t)/2) log(1+t) - ((1-t)/2) log(1-t)`` so that
    ``I(a) = E(2a - 1) + log 2``.
    """

    max_order = 40
    label = "E(t)"
    domain = (-1.0, 1.0)

    def _eval(self, t, k, side):
        if k == 0:
            return -0.5 * xlogy(1.0 + t, 1.0 + t) - 0.5 * xlogy(1.0 - t, 1.0 - t)
        if np.any(np.abs(t) >= 1.0):
            raise DomainError("E derivatives are singular at t = -1 and t = 1")
        if k == 1:
            return -np.arctanh(t)
        f = math.factorial(k - 2)
        return -0.5 * f * (1.0 / (1.0 - t) ** (k - 1) + (-1.0) ** (k - 2) / (1.0 + t) ** (k - 1))


class Combination(SmoothFunction):
    """Linear combination ``sum_i w_i f_i`` of smooth functions."""

    def __init__(self, parts: Sequence[tuple]):
        parts = [(float(w), f) for w, f in parts]
        if not parts:
            raise ValueError("combination needs at least one part")
        self.parts = tuple(parts)
        self.max_order = min(f.max_order for _, f in parts)
        lo = max(f.domain[0] for _, f in parts)
        hi = min(f.domain[1] for _, f in parts)
        self.domain = (lo, hi)
        self.kinks = tuple(sorted({x for _, f in parts for x in f.kinks}))
        self.label = " + ".join(f"{w:g}*[{f.label}]" for w, f in parts)

    def _eval(self, a, k, side):
        out = np.zeros_like(a)
        for w, f in self.parts:
            if w != 0.0:
                out += w * f.eval(a, k, side)
        return out


def combine(parts: Sequence[tuple]) -> Combination:
    """Linear combination of ``(coefficient, function)`` pairs.

    The derivative order of the result is the minimum over the parts.
    """
    return Combination(parts)


class TScaled(SmoothFunction):
    """Wrap a function of ``t`` on ``[-1, 1]`` as a function of ``a = (1+t)/2``."""

    def __init__(self, f_t: SmoothFunction):
        self.f_t = f_t
        self.max_order = f_t.max_order
        self.domain = ((f_t.domain[0] + 1.0) / 2.0, (f_t.domain[1] + 1.0) / 2.0)
        self.kinks = tuple((x + 1.0) / 2.0 for x in f_t.kinks)
        self.label = f"[{f_t.label}](2a-1)"

    def _eval(self, a, k, side):
        return 2.0**k * self.f_t.eval(2.0 * a - 1.0, k, side)


def t_of_a_scaling(f_t: SmoothFunction, a, k: int = 0):
    """k-th a-derivative of ``f_t(2a - 1)``, i.e. ``2**k * f_t^(k)(2a - 1)``."""
    return 2.0**k * f_t.eval(2.0 * np.asarray(a, dtype=float) - 1.0, k)


# Gauss-Legendre rule used by the mesh integrator below
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


class AnnealedG(SmoothFunction):
    """Graph term of the annealed Ising model on random d-regular graphs.

    ``g(a) = int_0^{a ^ (1-a)} psi(s) ds`` with
    ``psi(s) = log phi(s)`` and
    ``phi(s) = [e^{-2b}(1-2s) + sqrt(1 + (e^{-4b}-1)(1-2s)^2)] / (2(1-s))``.

    Because ``phi(s) phi(1-s) = 1`` the function is smooth at ``a = 1/2`` and
    ``g''(1/2) = 2 - 2 e^{-2b}``.  With ``literal=True`` the integrand is
    ``phi`` itself, which gives a non-decreasing function on ``[0, 1/2]`` with
    a kink at ``1/2``.

    Parameters
    ----------
    beta : float
        Inverse temperature, must be positive.
    literal : bool
        Integrate ``phi`` rather than ``log phi``.
    """

    max_order = 5

    def __init__(self, beta: float, literal: bool = False):
        beta = float(beta)
        if not beta > 0.0:
            raise ValueError("beta must be positive")
        self.beta = beta
        self.literal = bool(literal)
        self.kinks = (0.5,) if self.literal else ()
        self.label = f"g_beta(a), beta={beta:g}" + (", literal" if literal else "")
        self._e = math.exp(-2.0 * beta)
        self._kappa = math.expm1(-4.0 * beta)

    # -- integrand and its s-derivatives on s in [0, 1/2] ---------------------
    def _log_phi_derivs(self, s, order):
        """Return [psi, psi', ..., psi^(order)] at ``s <= 1/2``."""
        e, kap = self._e, self._kappa
        u = 1.0 - 2.0 * s
        r = np.sqrt(1.0 + kap * u * u)
        n0 = e * u + r
        out = [np.log(n0) - np.log1p(u)]
        if order == 0:
            return out
        n = [
            n0,
            e + kap * u / r,
            kap / r**3,
            -3.0 * kap**2 * u / r**5,
            -3.0 * kap**2 * (1.0 - 4.0 * kap * u * u) / r**7,
        ]
        w = [None] + [n[i] / n0 for i in range(1, 5)]
        logn = [
            None,
            w[1],
            w[2] - w[1] ** 2,
            w[3] - 3.0 * w[1] * w[2] + 2.0 * w[1] ** 3,
            w[4] - 4.0 * w[1] * w[3] - 3.0 * w[2] ** 2 + 12.0 * w[1] ** 2 * w[2] - 6.0 * w[1] ** 4,
        ]
        for j in range(1, order + 1):
            log1p_j = (-1.0) ** (j - 1) * math.factorial(j - 1) / (1.0 + u) ** j
            out.append((-2.0) ** j * (logn[j] - log1p_j))
        return out

    def _integrand_derivs(self, s, order):
        psi = self._log_phi_derivs(s, order)
        if not self.literal:
            return psi
        phi = np.exp(psi[0])
        out = [phi]
        p1 = psi[1] if order >= 1 else None
        if order >= 1:
            out.append(phi * p1)
        if order >= 2:
            out.append(phi * (psi[2] + p1**2))
        if order >= 3:
            out.append(phi * (psi[3] + 3 * p1 * psi[2] + p1**3))
        if order >= 4:
            out.append(
                phi * (psi[4] + 4 * p1 * psi[3] + 3 * psi[2] ** 2 + 6 * p1**2 * psi[2] + p1**4)
            )
        return out

    def integrand(self, s):
        """Integrand at ``s`` in ``[0, 1/2]``."""
        s = np.asarray(s, dtype=float)
        return self._integrand_derivs(s, 0)[0]

    # -- values ---------------------------------------------------------------
    def _integral_quad(self, x):
        f = lambda s: float(self._integrand_derivs(np.asarray(s), 0)[0])
        val, _ = integrate.quad(f, 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def _integral_mesh(self, xs):
        # cumulative Gauss-Legendre over a mesh containing every target point,
        # refined geometrically towards s = 0 where the integrand varies fastest
        geo = 0.5 * 2.0 ** -np.arange(1, 45)
        base = np.linspace(0.0, 0.5, 129)
        nodes = np.unique(np.concatenate([xs, geo, base, [0.0]]))
        lo, hi = nodes[:-1], nodes[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = self._integrand_derivs(pts, 0)[0]
        cell = half * (vals @ _GL_W)
        cum = np.concatenate([[0.0], np.cumsum(cell)])
        idx = np.searchsorted(nodes, xs)
        return cum[idx]

    def _eval(self, a, k, side):
        if k == 0:
            x = np.minimum(a, 1.0 - a)
            if x.size <= 16:
                return np.array([self._integral_quad(v) if v > 0 else 0.0 for v in x])
            return self._integral_mesh(x)
        j = k - 1
        out = np.empty_like(a)
        left = a < 0.5
        right = a > 0.5
        mid = a == 0.5
        if side == "right":
            right = right | mid
        else:
            left = left | mid
        if np.any(left):
            out[left] = self._integrand_derivs(a[left], j)[j]
        if np.any(right):
            # g(a) = G(1 - a) for a > 1/2
            out[right] = (-1.0) ** k * self._integrand_derivs(1.0 - a[right], j)[j]
        return out
