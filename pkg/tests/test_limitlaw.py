import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from meanfield import catalog, limitlaw, metrics
from meanfield.exceptions import HypothesisViolation
from meanfield.landscape import find_maximizers, build_A, landscape_of, perturbation_sets
from meanfield.smoothfn import SpinPolynomial


def simpson_moments(c, m, b=0.0, R=6.0, panels=10**6):
    x = np.linspace(-R, R, panels + 1)
    w = np.exp(c * x ** (2 * m) + b * x)
    q = integrate.simpson(w, x=x)
    mu = integrate.simpson(x * w, x=x) / q
    var = integrate.simpson((x - mu) ** 2 * w, x=x) / q
    return q, mu, var


@pytest.mark.parametrize("c,m,b,expect", [
    (-1.0, 1, 0.0, math.sqrt(math.pi)),
    (-1.0, 1, 2.0, math.sqrt(math.pi) * math.e),
    (-1.0, 2, 0.0, 2 * special.gamma(1.25)),
])
def test_normalizer_closed_forms(c, m, b, expect):
    assert limitlaw.normalizer(c, m, b) == pytest.approx(expect, rel=1e-10)


def test_normalizer_gaussian_formula():
    for c, b in [(-0.3, 1.5), (-2.0, -3.0), (-20.0, 0.7)]:
        want = math.sqrt(math.pi / abs(c)) * math.exp(b * b / (4 * abs(c)))
        assert limitlaw.normalizer(c, 1, b) == pytest.approx(want, rel=1e-10)


def test_normalizer_rejects_nonnegative_c():
    with pytest.raises(ValueError):
        limitlaw.normalizer(0.0, 2)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("s", [0.5, 2.0])
def test_normalizer_scaling(m, s):
    c = -0.8
    assert limitlaw.normalizer(c * s ** (2 * m), m) * s == pytest.approx(limitlaw.normalizer(c, m), rel=1e-10)


def test_normalizer_matches_simpson():
    for c, m, b in [(-4 / 3, 2, 0.0), (-2.1, 3, 0.6), (-0.5, 2, -1.0)]:
        q, _, _ = simpson_moments(c, m, b, R=8.0)
        assert limitlaw.normalizer(c, m, b) == pytest.approx(q, rel=1e-10)


def test_tilted_law_queries():
    Y = limitlaw.TiltedLaw(-1.0, 1, 2.0)
    assert Y.mean() == pytest.approx(1.0, abs=1e-10)
    Y = limitlaw.TiltedLaw(-4 / 3, 2)
    assert Y.cdf(0.0) == pytest.approx(0.5, abs=1e-12)
    assert Y.mean() == pytest.approx(0.0, abs=1e-10)
    _, _, var = simpson_moments(-4 / 3, 2)
    assert Y.variance() == pytest.approx(var, abs=1e-8)


def test_quadrature_path_matches_gaussian_closed_form():
    A = limitlaw.TiltedLaw(-0.7, 1, 0.4)
    B = limitlaw.TiltedLaw(-0.7, 1, 0.4, force_quadrature=True)
    x = np.linspace(-3, 3, 31)
    assert np.max(np.abs(A.cdf(x) - B.cdf(x))) < 1e-12
    assert A.mean() == pytest.approx(B.mean(), abs=1e-12)


def test_quantile_inverts_cdf():
    Y = limitlaw.TiltedLaw(-2.1, 3, 0.3)
    for u in (0.01, 0.3, 0.5, 0.9):
        assert Y.cdf(Y.quantile(u)) == pytest.approx(u, abs=1e-10)
    with pytest.raises(ValueError):
        Y.quantile(1.0)


@pytest.mark.parametrize("c,m,b", [(-1.0, 1, 0.0), (-4 / 3, 2, 0.0), (-2.1, 3, 0.0),
                                   (-0.5, 2, 1.0), (-3.0, 1, -2.0)])
def test_sampling_matches_cdf(c, m, b):
    Y = limitlaw.TiltedLaw(c, m, b)
    draws = Y.sample(123, 10**5)
    assert metrics.d_K(metrics.DiscreteLaw(draws), Y) <= 0.01
    assert np.array_equal(Y.sample(5, 50), Y.sample(5, 50))


def test_half_normal():
    P, N = limitlaw.half_normal(1, 1.0), limitlaw.half_normal(-1, 1.0)
    assert P.cdf(0.0) == 0.0
    assert P.quantile(0.5) == pytest.approx(stats.norm.ppf(0.75), abs=1e-12)
    assert P.quantile(0.5) == pytest.approx(0.6745, abs=1e-4)
    x = np.linspace(-3, 3, 13)
    # N- is the reflection of N+
    assert np.allclose(N.cdf(x), 1 - P.cdf(-x))


def test_weights_single_and_symmetric():
    L = landscape_of(SpinPolynomial([(0.25, 2)]))
    assert limitlaw.theorem1_weights(L).weights == {0: 1.0}
    L = landscape_of(SpinPolynomial([(1.0, 2)]))
    w = limitlaw.theorem1_weights(L).as_array(2)
    assert np.allclose(w, [0.5, 0.5], atol=1e-12)


def test_weights_on_four_spin_coexistence():
    beta = 0.2
    L = catalog.four_spin(beta, catalog.g_four(beta)).landscape()
    assert len(L) == 3
    w = limitlaw.theorem1_weights(L)
    assert sum(w.weights.values()) == pytest.approx(1.0, abs=1e-12)
    a = L.locations
    if abs(a[0] - (1 - a[2])) <= 1e-9:
        assert w[0] == pytest.approx(w[2], abs=1e-10)


def test_weights_follow_perturbation():
    L = landscape_of(SpinPolynomial([(1.0, 2)]))
    S = perturbation_sets(L, SpinPolynomial([(1.0, 1)]))
    w = limitlaw.theorem1_weights(L, S)
    assert list(w.weights.values()) == [1.0]


def test_weights_need_nonempty_set():
    L = landscape_of(SpinPolynomial([(1.0, 2)]))
    S = perturbation_sets(L, SpinPolynomial([(1.0, 1)]))
    S = type(S)(J1=[], J2=[], b={})
    with pytest.raises(ValueError):
        limitlaw.theorem1_weights(L, S)


class TestMleLimit:
    def test_single_maximizer_is_normal(self):
        F = SpinPolynomial([(0.3, 2), (0.2, 1)])
        L = find_maximizers(build_A(F))
        f = SpinPolynomial([(1.0, 1)])
        U = limitlaw.mle_limit(L, f)
        mx = L.maximizers[0]
        var = 2 * abs(mx.c) / float(f.eval(mx.a, 1)) ** 2
        N = limitlaw.NormalLaw(0.0, var)
        assert U.atom0 == pytest.approx(0.0, abs=1e-14)
        for t in (-2, -1, 1, 2):
            x = t * math.sqrt(var)
            assert limitlaw.u_cdf(U, x) == pytest.approx(float(N.cdf(x)), abs=1e-8)

    def test_double_well_half_normals(self):
        L = landscape_of(SpinPolynomial([(1.0, 2)]))
        f = SpinPolynomial([(1.0, 1)])
        U = limitlaw.mle_limit(L, f)
        # J2- = lower well, J2+ = upper well, each with weight 1/2
        assert U.p_neg == pytest.approx(0.25) and U.p_pos == pytest.approx(0.25)
        assert U.atom0 == pytest.approx(0.5)
        mx = L.maximizers[0]
        var = 2 * abs(mx.c) / float(f.eval(mx.a, 1)) ** 2
        Hm, Hp = limitlaw.half_normal(-1, var), limitlaw.half_normal(1, var)
        for x in (-2.0, -0.3, 0.4, 1.7):
            want = 0.25 * Hm.cdf(x) + 0.25 * Hp.cdf(x) + 0.5 * (x >= 0)
            assert U.cdf(x) == pytest.approx(float(want), abs=1e-8)

    def test_branch_limits_and_atom(self):
        L = landscape_of(SpinPolynomial([(1.0, 2), (0.1, 4)]))
        U = limitlaw.mle_limit(L, SpinPolynomial([(1.0, 1)]))
        below = U.cdf(-1e-9)
        above = 1 - U.cdf(1e-9)
        assert below == pytest.approx(U.p_neg, abs=1e-6)
        assert U.atom0 == pytest.approx(1 - below - above, abs=1e-6)
        assert U.p_neg + U.p_pos + U.atom0 == pytest.approx(1.0, abs=1e-10)

    def test_cdf_monotone(self):
        U = limitlaw.mle_limit(landscape_of(SpinPolynomial([(1.0, 2)])), SpinPolynomial([(1.0, 1)]))
        x = np.linspace(-4, 4, 81)
        assert np.all(np.diff(U.cdf(x)) >= -1e-12)

    def test_hypothesis_violation(self):
        # beta estimate for f = (2a-1)^2 at a single maximizer 1/2: f' = 0
        L = landscape_of(SpinPolynomial([(0.4, 2)]))
        with pytest.raises(HypothesisViolation):
            limitlaw.mle_limit(L, SpinPolynomial([(1.0, 2)]))
