"""Maximizers of ``A = F + I`` and their regularity classification.

A maximizer ``a`` is 2m-regular when ``A^(k)(a) = 0`` for ``1 <= k <= 2m-1`` and
``A^(2m)(a) < 0``.  Numerically "vanishes" means "below ``tol_deriv * scale``",
with ``scale = max(1, max |A|)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exceptions import ClassificationError, KinkDiagnostic
from .smoothfn import Combination, Entropy, SmoothFunction

__all__ = [
    "Maximizer",
    "Landscape",
    "PerturbationSets",
    "build_A",
    "find_maximizers",
    "classify_regularity",
    "perturbation_sets",
    "landscape_of",
]

TOL_STATIONARY = 1e-10
TOL_DERIV = 1e-6
TOL_VALUE = 1e-9
EDGE = 1e-6


@dataclass(frozen=True)
class Maximizer:
    """One global maximizer of A.

    Attributes
    ----------
    a : float
        Location in (0, 1).
    m : int
        Half the regularity order.
    c : float
        ``A^(2m)(a) / (2m)!``, negative.
    nu : float
        ``-log(a (1 - a)) / 2``.
    value : float
        ``A(a)``.
    warning : str or None
        Conditioning note when lower derivatives are small but not negligible.
    """

    a: float
    m: int
    c: float
    nu: float
    value: float
    warning: str | None = None

    @property
    def order(self) -> int:
        return 2 * self.m

    def to_dict(self) -> dict:
        d = {"a": self.a, "m": self.m, "order": self.order, "c": self.c,
             "nu": self.nu, "value": self.value}
        if self.warning:
            d["warning"] = self.warning
        return d


@dataclass(frozen=True)
class Landscape:
    """All global maximizers of A with the constants derived from them."""

    maximizers: tuple
    m_star: int
    delta_star: float
    J_star: tuple
    scale: float
    A: SmoothFunction | None = field(default=None, repr=False, compare=False)
    warnings: tuple = ()

    def __len__(self):
        return len(self.maximizers)

    def __getitem__(self, j) -> Maximizer:
        return self.maximizers[j]

    @property
    def locations(self) -> np.ndarray:
        return np.array([mx.a for mx in self.maximizers])

    def to_dict(self) -> dict:
        return {
            "maximizers": [mx.to_dict() for mx in self.maximizers],
            "m_star": self.m_star,
            "delta_star": self.delta_star,
            "J_star": list(self.J_star),
            "scale": self.scale,
            "warnings": list(self.warnings),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class PerturbationSets:
    """Index sets selected by a perturbation B.

    ``J1`` maximizes ``B(a_j)``; ``J2`` keeps the highest order within ``J1``;
    ``b[j] = B'(a_j)`` for ``m_j = m_star`` and 0 otherwise.
    """

    J1: tuple
    J2: tuple
    b: dict

    def to_dict(self) -> dict:
        return {"J1": list(self.J1), "J2": list(self.J2),
                "b": {str(j): v for j, v in self.b.items()}}


def build_A(F: SmoothFunction) -> SmoothFunction:
    """Return ``A = F + I``."""
    return Combination([(1.0, F), (1.0, Entropy())])


def _scale_of(A: SmoothFunction) -> float:
    x = np.linspace(0.0, 1.0, 201)
    return max(1.0, float(np.max(np.abs(A.eval(x)))))


def _newton_polish(A, k, x, lo, hi, side=None, iters=80):
    """Newton iteration on ``A^(k)`` using ``A^(k+1)``, kept inside [lo, hi]."""
    for _ in range(iters):
        f = A.eval(x, k, side)
        df = A.eval(x, k + 1, side)
        if df == 0.0 or not np.isfinite(df):
            break
        step = f / df
        xn = x - step
        if not (lo <= xn <= hi):
            break
        x = xn
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def _classify(A, a0, scale, tol_deriv, lo, hi, side=None, polish=True):
    """Return ``(m, c, a, warning)`` for a stationary point near ``a0``."""
    x = float(a0)
    thr = tol_deriv * scale
    for m in range(1, A.max_order // 2 + 1):
        if polish:
            x = _newton_polish(A, 2 * m - 1, x, lo, hi, side)
        d = [A.eval(x, j, side) for j in range(1, 2 * m + 1)]
        big = [j for j in range(1, 2 * m) if abs(d[j - 1]) > thr]
        if big:
            j0 = big[0]
            if j0 % 2 == 1:
                raise ClassificationError(
                    f"odd derivative of order {j0} dominates at a={x:.12g}; not a local maximum"
                )
            if d[j0 - 1] > 0:
                raise ClassificationError(f"positive derivative of order {j0} at a={x:.12g}")
        top = d[2 * m - 1]
        if abs(top) > thr:
            if top > 0:
                raise ClassificationError(
                    f"A^({2 * m})(a) > 0 at a={x:.12g}; stationary point is not a maximum"
                )
            warning = None
            small = [abs(v) for v in d[: 2 * m - 1]]
            if small and max(small) > 1e-10 * scale:
                warning = (f"lower derivatives up to {max(small):.3g} treated as zero; "
                           "parameters may be near a phase boundary")
            return m, top / math.factorial(2 * m), x, warning
    raise ClassificationError(
        f"no non-vanishing even derivative up to order {A.max_order} at a={x:.12g}"
    )


def classify_regularity(A: SmoothFunction, a: float, tol_deriv: float = TOL_DERIV,
                        scale: float | None = None, side: str | None = None):
    """Regularity order of a stationary point.

    Parameters
    ----------
    A : SmoothFunction
    a : float
        Refined stationary point.
    tol_deriv : float
        Relative threshold below which a derivative counts as zero.
    scale : float, optional
        Defaults to ``max(1, max |A|)`` on a 201-point grid.

    Returns
    -------
    m : int
    c : float
        ``A^(2m)(a) / (2m)!``.

    Raises
    ------
    ClassificationError
        Odd derivative dominant, positive even derivative, or no
        non-vanishing derivative up to the order cap.
    """
    if scale is None:
        scale = _scale_of(A)
    m, c, _, _ = _classify(A, a, scale, tol_deriv, max(EDGE, a - 1e-3),
                           min(1 - EDGE, a + 1e-3), side, polish=False)
    return m, c


def _kink_classify(A, x0, scale, tol_deriv):
    out = {}
    for side in ("left", "right"):
        try:
            m, c, _, _ = _classify(A, x0, scale, tol_deriv, x0, x0, side, polish=False)
            out[side] = (m, c)
        except ClassificationError as err:
            out[side] = str(err)
    left, right = out["left"], out["right"]
    if isinstance(left, tuple) and left == right:
        return left
    if (isinstance(left, tuple) and isinstance(right, tuple) and left[0] == right[0]
            and abs(left[1] - right[1]) <= tol_deriv * scale):
        return left
    raise KinkDiagnostic(
        f"maximizer at the kink a={x0}: left classification {left!r}, right {right!r}",
        point=x0, left=left, right=right,
    )


def _delta_star(A, maxs, side_pts):
    locs = [mx.a for mx in maxs]
    gaps = [min(a, 1.0 - a) for a in locs]
    srt = sorted(locs)
    gaps += [(b - a) / 2.0 for a, b in zip(srt, srt[1:])]
    delta = min(gaps) * (1.0 - 1e-6)
    for _ in range(21):
        ok = True
        for mx in maxs:
            x = np.linspace(mx.a - delta, mx.a + delta, 1002)[1:-1]
            v = A.eval(x, 2 * mx.m, "left")
            if not np.all(v < 0):
                ok = False
                break
        if ok:
            return delta, None
        delta *= 0.5
    return delta, "delta_star negativity check did not pass after 20 halvings"


def find_maximizers(A: SmoothFunction, grid_size: int = 10001,
                    tol_deriv: float = TOL_DERIV, tol_value: float = TOL_VALUE) -> Landscape:
    """Locate and classify every global maximizer of A on (0, 1).

    The derivative ``A'`` is scanned on a uniform grid over
    ``[1e-6, 1 - 1e-6]``; each ``+`` to ``-`` sign change is refined with
    Brent's method and then polished on the first non-vanishing odd
    derivative so degenerate maximizers are located to full precision.

    Parameters
    ----------
    A : SmoothFunction
        Typically ``build_A(F)``.
    grid_size : int
        Number of scan points, at least 101.
    tol_deriv : float
        Derivative-vanishing threshold relative to ``scale``.
    tol_value : float
        Candidates within this of the best value are global maximizers.

    Returns
    -------
    Landscape
    """
    if grid_size < 101:
        raise ValueError("grid_size must be at least 101")
    scale = _scale_of(A)
    x = np.linspace(EDGE, 1.0 - EDGE, int(grid_size))
    d1 = A.eval(x, 1, "left")
    h = x[1] - x[0]
    idx = np.nonzero((d1[:-1] > 0) & (d1[1:] <= 0))[0]
    if idx.size == 0:
        raise ClassificationError("no interior maximum found")

    cands = []
    for i in idx:
        lo, hi = x[i], x[i + 1]
        if d1[i + 1] == 0.0:
            r = hi
        else:
            r = brentq(lambda s: A.eval(s, 1, "left"), lo, hi, xtol=1e-15, rtol=1e-15,
                       maxiter=200)
        cands.append((r, lo - 2 * h, hi + 2 * h))
    values = np.array([A.eval(r) for r, _, _ in cands])
    best = values.max()
    keep = [c for c, v in zip(cands, values) if v >= best - max(tol_value, 1e-6)]

    found = []
    for r, lo, hi in keep:
        lo, hi = max(lo, EDGE), min(hi, 1.0 - EDGE)
        kink = next((k0 for k0 in A.kinks if abs(r - k0) <= 1e-8), None)
        if kink is not None:
            m, c = _kink_classify(A, kink, scale, tol_deriv)
            a, warning = kink, None
        else:
            m, c, a, warning = _classify(A, r, scale, tol_deriv, lo, hi)
        if any(abs(a - b[0]) < 1e-6 for b in found):
            continue
        found.append((a, m, c, warning))

    vals = np.array([A.eval(a) for a, _, _, _ in found])
    top = vals.max()
    maxs = []
    for (a, m, c, warning), v in sorted(zip(found, vals), key=lambda z: z[0][0]):
        if v < top - tol_value:
            continue
        nu = -0.5 * math.log(a * (1.0 - a))
        maxs.append(Maximizer(a=float(a), m=int(m), c=float(c), nu=nu, value=float(v),
                              warning=warning))

    notes = []
    for mx in maxs:
        if not A.kinks and abs(A.eval(mx.a, 1)) > TOL_STATIONARY * scale:
            notes.append(f"|A'({mx.a:.12g})| exceeds the stationarity tolerance")
    m_star = max(mx.m for mx in maxs)
    J_star = tuple(j for j, mx in enumerate(maxs) if mx.m == m_star)
    delta, note = _delta_star(A, maxs, None)
    if note:
        notes.append(note)
    notes += [mx.warning for mx in maxs if mx.warning]
    return Landscape(maximizers=tuple(maxs), m_star=m_star, delta_star=float(delta),
                     J_star=J_star, scale=scale, A=A, warnings=tuple(notes))


def landscape_of(F: SmoothFunction, **kw) -> Landscape:
    """Shortcut for ``find_maximizers(build_A(F))``."""
    return find_maximizers(build_A(F), **kw)


def perturbation_sets(L: Landscape, B: SmoothFunction, tol: float = TOL_VALUE) -> PerturbationSets:
    """Index sets ``J1``, ``J2`` and tilts ``b_j`` for the perturbation B."""
    bv = np.array([B.eval(mx.a) for mx in L.maximizers])
    J1 = tuple(int(j) for j in np.nonzero(bv >= bv.max() - tol)[0])
    mmax = max(L.maximizers[j].m for j in J1)
    J2 = tuple(j for j in J1 if L.maximizers[j].m == mmax)
    b = {}
    for j, mx in enumerate(L.maximizers):
        b[j] = float(B.eval(mx.a, 1, "left")) if mx.m == L.m_star else 0.0
    return PerturbationSets(J1=J1, J2=J2, b=b)
