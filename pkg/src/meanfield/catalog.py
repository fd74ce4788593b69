"""Built-in mean-field models and their phase classifiers.

All models are stored in the occupation variable ``a`` in [0, 1].  Formulas
written in the spin variable ``t = 2a - 1`` are wrapped with
:class:`~meanfield.smoothfn.SpinPolynomial` or
:class:`~meanfield.smoothfn.TScaled`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .exceptions import ClassificationError
from .landscape import Landscape, build_A, find_maximizers
from .smoothfn import (AnnealedG, BinaryEntropyT, Combination, Polynomial, SmoothFunction,
                       SpinPolynomial)

__all__ = [
    "ModelSpec",
    "FourSpinPhase",
    "p_spin",
    "p_spin_region",
    "cubic",
    "cubic_coexistence",
    "four_spin",
    "four_spin_region",
    "q_aux",
    "r_aux",
    "g_beta_t",
    "ghat_beta_t",
    "g_four",
    "ghat_four",
    "six_spin",
    "six_spin_constants",
    "six_spin_t_form",
    "annealed_ising",
    "beta_c",
    "phase_boundary_rows",
    "get_model",
    "MODEL_NAMES",
    "model_parameters",
    "inline_model",
    "rows_to_csv",
    "four_spin_structure",
    "SPECIAL_FOUR",
]

_E = BinaryEntropyT()


@dataclass
class ModelSpec:
    """A named model with its interaction function.

    Attributes
    ----------
    name : str
    F : SmoothFunction
        Interaction on [0, 1]; ``A = F + I``.
    parameters : dict
    expected : list of (a, m), optional
        Known maximizers, used by tests.
    """

    name: str
    F: SmoothFunction
    parameters: dict = field(default_factory=dict)
    expected: list | None = None

    def A(self) -> SmoothFunction:
        return build_A(self.F)

    def landscape(self, **kw) -> Landscape:
        return find_maximizers(self.A(), **kw)


def _spin_terms(pairs):
    # merge equal powers and drop zero coefficients
    acc = {}
    for c, p in pairs:
        acc[int(p)] = acc.get(int(p), 0.0) + float(c)
    return [(c, p) for p, c in sorted(acc.items()) if c != 0.0]


def _root_atanh(slope: float) -> float:
    """Positive root of ``atanh(t) = slope * t`` for ``slope > 1``."""
    return optimize.brentq(lambda t: math.atanh(t) - slope * t, 1e-12, 1 - 1e-16, xtol=1e-15)


# -- p-spin ------------------------------------------------------------------
def p_spin(p: int, beta: float, h: float = 0.0) -> ModelSpec:
    """``F(a) = beta (2a-1)^p + h (2a-1)``."""
    p = int(p)
    if p < 1:
        raise ValueError("p must be a positive integer")
    F = SpinPolynomial(_spin_terms([(beta, p), (h, 1)]))
    expected = None
    if p == 2 and h == 0 and beta >= 0:
        if beta < 0.5:
            expected = [(0.5, 1)]
        elif beta == 0.5:
            expected = [(0.5, 2)]
        else:
            t = _root_atanh(2.0 * beta)
            expected = [((1 - t) / 2, 1), ((1 + t) / 2, 1)]
    return ModelSpec("p-spin", F, {"p": p, "beta": float(beta), "h": float(h)}, expected)


def p_spin_region(p: int, beta: float, h: float = 0.0) -> str:
    """Region label from the landscape.

    ``R1``: one 2-regular maximizer; ``R2``: several maximizers; ``R3``: one
    maximizer of order 4 or more.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    L = p_spin(p, beta, h).landscape()
    if len(L) > 1:
        return "R2"
    return "R1" if L[0].m == 1 else "R3"


# -- cubic -------------------------------------------------------------------
def cubic(beta: float, h: float) -> ModelSpec:
    """``F(a) = beta (2a-1)^3 + h (2a-1)^2``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    F = SpinPolynomial(_spin_terms([(beta, 3), (h, 2)]))
    return ModelSpec("cubic", F, {"beta": float(beta), "h": float(h)})


def _cubic_ratio(t, beta):
    # F(t) = t^2 (h - ratio(t)) for F(t) = beta t^3 + h t^2 + E(t)
    return _neg_e_over_t2(t) - beta * t


def cubic_coexistence(beta: float) -> float:
    """Value ``h`` at which ``1/2`` and a second maximizer share the top value.

    Equal to ``min_{t in (0,1]} (-E(t)/t^2 - beta t)``.
    """
    return _minimize_even(lambda t: _cubic_ratio(t, beta), right_end=math.log(2.0) - beta)


# -- four-spin auxiliaries ---------------------------------------------------
def _series(x, coef, nterms=40):
    x2 = np.asarray(x, dtype=float) ** 2
    out = np.zeros_like(x2)
    for j in reversed(range(nterms)):
        out = out * x2 + coef(j)
    return out


def _neg_e_over_t2(t):
    """``-E(t)/t^2``; the series ``sum_{j>=1} t^{2j-2}/(2j(2j-1))`` near 0."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.05
    ts = np.where(small, 0.5, t)
    big = -_E.eval(ts) / ts**2
    ser = _series(t, lambda j: 1.0 / ((2 * j + 2) * (2 * j + 1)))
    out = np.where(small, ser, big)
    return out if out.ndim else float(out)


def _atanh_over_2t(t):
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.05
    ts = np.where(small, 0.5, t)
    big = np.arctanh(ts) / (2.0 * ts)
    ser = _series(t, lambda j: 1.0 / (2.0 * (2 * j + 1)))
    out = np.where(small, ser, big)
    return out if out.ndim else float(out)


def _check_open(s):
    if np.any(np.abs(np.asarray(s, dtype=float)) >= 1.0):
        raise ValueError("argument must lie in (-1, 1)")


def g_beta_t(t, beta: float):
    """``-E(t)/t^2 - beta t^2`` with the removable singularity at 0 filled."""
    _check_open(t)
    return _neg_e_over_t2(t) - beta * np.asarray(t, dtype=float) ** 2


def ghat_beta_t(t, beta: float):
    """``atanh(t)/(2t) - 2 beta t^2``."""
    _check_open(t)
    return _atanh_over_2t(t) - 2.0 * beta * np.asarray(t, dtype=float) ** 2


def q_aux(s):
    """``1/(8s^2(1-s^2)) - atanh(s)/(8s^3)``, equal to 1/12 at 0."""
    _check_open(s)
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 0.05
    ss = np.where(small, 0.5, s)
    big = 1.0 / (8 * ss**2 * (1 - ss**2)) - np.arctanh(ss) / (8 * ss**3)
    ser = _series(s, lambda j: (2 * j + 2) / (8.0 * (2 * j + 3)))
    out = np.where(small, ser, big)
    return out if out.ndim else float(out)


def r_aux(s):
    """``((s-2)log(1-s) - (s+2)log(1+s)) / (4 s^4)``, equal to 1/12 at 0."""
    _check_open(s)
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 0.05
    ss = np.where(small, 0.5, s)
    big = ((ss - 2) * np.log1p(-ss) - (ss + 2) * np.log1p(ss)) / (4 * ss**4)
    # sum_{i>=2} s^{2i-4} (i-1) / (2i (2i-1))
    ser = _series(s, lambda j: (j + 1) / ((2.0 * j + 4) * (2 * j + 3)))
    out = np.where(small, ser, big)
    return out if out.ndim else float(out)


def _minimize_even(fun, right_end=None, lo=1e-9, hi=1 - 1e-9, npts=2001):
    """Infimum over ``s in [0, 1]`` from a grid scan, golden-section polish and endpoint values."""
    s = np.linspace(lo, hi, npts)
    v = np.asarray(fun(s), dtype=float)
    i = int(np.argmin(v))
    best = float(v[i])
    if 0 < i < npts - 1:
        res = optimize.minimize_scalar(lambda x: float(fun(x)), bracket=(s[i - 1], s[i], s[i + 1]),
                                       method="golden", tol=1e-12)
        if lo <= res.x <= hi:
            best = min(best, float(res.fun))
    cands = [best, float(fun(0.0))]
    if right_end is not None:
        cands.append(right_end)
    return min(cands)


def g_four(beta: float) -> float:
    """``inf_s g_beta(s)``; equals 1/2 for ``beta <= 1/12``."""
    return _minimize_even(lambda t: _neg_e_over_t2(t) - beta * np.asarray(t) ** 2,
                          right_end=math.log(2.0) - beta)


def ghat_four(beta: float) -> float:
    """``inf_s ghat_beta(s)``."""
    return _minimize_even(lambda t: ghat_beta_t(t, beta))


# -- four-spin ---------------------------------------------------------------
SPECIAL_FOUR = (1.0 / 12.0, 0.5)


def four_spin(beta: float, h: float) -> ModelSpec:
    """``F(a) = beta (2a-1)^4 + h (2a-1)^2``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    F = SpinPolynomial(_spin_terms([(beta, 4), (h, 2)]))
    return ModelSpec("four-spin", F, {"beta": float(beta), "h": float(h)})


@dataclass(frozen=True)
class FourSpinPhase:
    """Phase label of a four-spin parameter point.

    ``consistent`` records whether the landscape of A has the maximizer
    structure the label predicts (None when not checked).
    """

    beta: float
    h: float
    region: str
    g: float
    consistent: bool | None = None


_FOUR_STRUCTURE = {
    "R1": (1, (1,)),
    "R2": (2, (1, 1)),
    "R3": (3, (1, 1, 1)),
    "R4": (1, (2,)),
    "special": (1, (3,)),
}


def four_spin_structure(L: Landscape) -> str | None:
    """Region implied by a landscape alone, or None when it matches none."""
    ms = tuple(mx.m for mx in L.maximizers)
    for region, (count, orders) in _FOUR_STRUCTURE.items():
        if len(ms) == count and ms == orders:
            return region
    return None


def four_spin_region(beta: float, h: float, tol: float = 1e-9, check: bool = False) -> FourSpinPhase:
    """Classify ``(beta, h)`` against the boundary ``h = g(beta)``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    g = g_four(beta)
    b12, h12 = SPECIAL_FOUR
    if abs(beta - b12) <= tol and abs(h - h12) <= tol:
        region = "special"
    elif abs(h - 0.5) <= tol and beta < b12:
        region = "R4"
    elif abs(h - g) <= tol and beta > b12:
        region = "R3"
    elif h < g:
        region = "R1"
    else:
        region = "R2"
    consistent = None
    if check:
        try:
            consistent = four_spin_structure(four_spin(beta, h).landscape()) == region
        except ClassificationError:
            consistent = False
    return FourSpinPhase(float(beta), float(h), region, float(g), consistent)


# -- six-spin ----------------------------------------------------------------
def six_spin_constants(t_star: float = 0.9):
    """Coefficients ``(beta, h)`` of ``t^6`` and ``t^5`` that make ``t_star`` a
    second maximizer with the same value as ``t = 0``."""
    e = float(_E.eval(t_star))
    e1 = float(_E.eval(t_star, 1))
    beta = (1.5 * t_star**2 + 5.0 * e - t_star * e1) / t_star**6
    h = (-2.0 * t_star**2 - 6.0 * e + t_star * e1) / t_star**5
    return beta, h


def six_spin_t_form(t_star: float = 0.9) -> SmoothFunction:
    """``F(t) = beta t^6 + h t^5 + t^2/2 + E(t)`` on [-1, 1]."""
    beta, h = six_spin_constants(t_star)
    poly = Polynomial([(beta, 6), (h, 5), (0.5, 2)], domain=(-1.0, 1.0))
    return Combination([(1.0, poly), (1.0, _E)])


def six_spin(t_star: float = 0.9) -> ModelSpec:
    """Six-spin model with a 4-regular maximizer at 1/2 and a 2-regular one at
    ``(1 + t_star)/2``."""
    beta, h = six_spin_constants(t_star)
    F = SpinPolynomial([(beta, 6), (h, 5), (0.5, 2)])
    return ModelSpec("six-spin", F, {"beta": beta, "h": h, "t_star": float(t_star)},
                     expected=[(0.5, 2), ((1 + t_star) / 2, 1)])


# -- annealed Ising ----------------------------------------------------------
def beta_c(d: int) -> float:
    """Critical inverse temperature ``atanh(1/(d-1))``."""
    d = int(d)
    if d < 3:
        raise ValueError("d must be at least 3")
    return math.atanh(1.0 / (d - 1))


def annealed_ising(d: int, beta: float, h: float = 0.0, literal: bool = False) -> ModelSpec:
    """``F(a) = 2 h a + d g_beta(a)`` for the random d-regular graph."""
    d = int(d)
    if d < 3:
        raise ValueError("d must be at least 3")
    F = Combination([(1.0, Polynomial([(2.0 * h, 1)])), (float(d), AnnealedG(beta, literal=literal))])
    return ModelSpec("annealed", F, {"d": d, "beta": float(beta), "h": float(h)})


# -- registry ----------------------------------------------------------------
MODEL_NAMES = ("p-spin", "cubic", "four-spin", "six-spin", "annealed")

_PARAMS = {
    "p-spin": {"p": 2, "beta": None, "h": 0.0},
    "cubic": {"beta": None, "h": None},
    "four-spin": {"beta": None, "h": None},
    "six-spin": {"t_star": 0.9},
    "annealed": {"d": 3, "beta": None, "h": 0.0},
}


def model_parameters(name: str) -> dict:
    """Accepted parameters of a named model with their defaults (None = required)."""
    if name not in _PARAMS:
        raise KeyError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    return dict(_PARAMS[name])


def get_model(name: str, **params) -> ModelSpec:
    """Build a named model, validating parameter names."""
    allowed = model_parameters(name)
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValueError(f"model {name!r} does not take {sorted(unknown)}")
    merged = {k: params.get(k, v) for k, v in allowed.items()}
    missing = [k for k, v in merged.items() if v is None]
    if missing:
        raise ValueError(f"model {name!r} needs {missing}")
    if name == "p-spin":
        return p_spin(int(merged["p"]), merged["beta"], merged["h"])
    if name == "cubic":
        return cubic(merged["beta"], merged["h"])
    if name == "four-spin":
        return four_spin(merged["beta"], merged["h"])
    if name == "six-spin":
        return six_spin(merged["t_star"])
    return annealed_ising(int(merged["d"]), merged["beta"], merged["h"])


def inline_model(terms) -> ModelSpec:
    """Model from ``(coefficient, power)`` pairs in ``(2a - 1)``."""
    return ModelSpec("inline", SpinPolynomial(_spin_terms(terms)), {"terms": [list(t) for t in terms]})


def phase_boundary_rows(model: str, betas, hs=None, d: int = 3, p: int = 2):
    """Rows for a phase CSV.

    Parameters
    ----------
    model : {'four-spin', 'cubic', 'p-spin', 'annealed'}
    betas : sequence of float
    hs : sequence of float, optional
        When given, one row per ``(beta, h)`` with a region label.

    Returns
    -------
    header : list of str
    rows : list of list
    """
    betas = [float(b) for b in betas]
    if model == "four-spin":
        if hs is None:
            return ["beta", "g", "ghat"], [[b, g_four(b), ghat_four(b)] for b in betas]
        rows = []
        for b in betas:
            for h in hs:
                ph = four_spin_region(b, float(h))
                rows.append([b, float(h), ph.region, ph.g])
        return ["beta", "h", "region", "g"], rows
    if model == "cubic":
        if hs is None:
            return ["beta", "g"], [[b, cubic_coexistence(b)] for b in betas]
        rows = []
        for b in betas:
            g = cubic_coexistence(b)
            for h in hs:
                h = float(h)
                lab = "coexistence" if abs(h - g) <= 1e-9 else ("center" if h < g else "shifted")
                rows.append([b, h, lab, g])
        return ["beta", "h", "region", "g"], rows
    if model == "p-spin":
        hs = [0.0] if hs is None else hs
        rows = [[b, float(h), p_spin_region(p, b, float(h))] for b in betas for h in hs]
        return ["beta", "h", "region"], rows
    if model == "annealed":
        bc = beta_c(d)
        hs = [0.0] if hs is None else hs
        rows = []
        for b in betas:
            for h in hs:
                h = float(h)
                if h != 0.0 or b < bc:
                    lab = "unique"
                elif b == bc:
                    lab = "critical"
                else:
                    lab = "two-wells"
                rows.append([b, h, lab, bc])
        return ["beta", "h", "region", "beta_c"], rows
    raise ValueError(f"phase diagrams are not available for model {model!r}")


def rows_to_csv(header, rows) -> str:
    """CSV with floats at 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()
