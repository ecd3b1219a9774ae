from math import pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpboltz.collision import QuadratureSpec, compute_profiles, profile_rule
from lpboltz.inequalities import (CompatibilityError, L1Bounds, check_estim1, check_estim3,
                                  check_estim5, check_fonc, construct_estim3_constants,
                                  construct_estim5_constants, kappa1, lemma_constant,
                                  loss_lower_bound_violation, probe_estim4_epsilon)
from lpboltz.kernel import (CollisionKernel, constant_kernel, singular_kernel, sphere_area, split,
                            symmetrize)
from lpboltz.state import NormSpec, VelocityGrid, dilate, maxwellian, mixture

from conftest import BIMODAL

Q = QuadratureSpec(order=4, interp_order=3)


def _ker(gamma, nu=None, N=2):
    ang = constant_kernel(1.0, N) if nu is None else singular_kernel(1.0, nu, N)
    return symmetrize(CollisionKernel(gamma, ang))


@pytest.fixture(scope="module")
def setup():
    g = VelocityGrid(2, 24, 8.0)
    f = mixture(BIMODAL, g)
    h = maxwellian(g, 0.8, [0.3, -0.4], 1.2)
    prof = compute_profiles(f, [f, h], [(2.0, 1.0), (2.0, 2.0)], [0.0, 1.0], Q,
                            profile_rule(2, Q, (pi / 6,)))
    return f, h, prof


@pytest.mark.parametrize("N", [2, 3])
def test_lemma_constant_alpha1_closed_form(N):
    # R_1'' = 2 |S^{N-2}| (|v*|^2 - |v|^2): the normalized sup is 2 |S^{N-2}|
    c, _ = lemma_constant(1.0, N)
    assert c == pytest.approx(2 * sphere_area(N - 2), rel=1e-2)
    assert c <= 2 * sphere_area(N - 2) * (1 + 1e-12)


@given(p=st.floats(1.1, 4), N=st.sampled_from([2, 3]), gamma=st.floats(0, 1))
def test_kappa1_dominates_ratio(p, N, gamma):
    k = kappa1(p, N, gamma)
    e = (N + gamma) * (p - 1) / p
    t = np.linspace(1e-3, pi / 2, 500)
    ratio = (np.cos(t / 2) ** -e - 1) / (1 - np.cos(t))
    assert k >= ratio.max() * (1 - 1e-12)
    assert k >= e / 4


@pytest.mark.parametrize("N,gamma", [(2, 1.0), (3, 0.5), (3, 0.0)])
def test_loss_lower_bound(N, gamma):
    assert loss_lower_bound_violation(N, gamma) == 0.0


@settings(max_examples=40)
@given(m=st.floats(0.1, 10), g1=st.floats(0.1, 20), top=st.floats(0.1, 1e4), p=st.floats(1.2, 3),
       gamma=st.floats(0, 1), t0=st.floats(0.05, 1.5), N=st.sampled_from([2, 3]))
def test_estim3_constants_close(m, g1, top, p, gamma, t0, N):
    cut, _ = split(_ker(gamma, None, N).angular, t0)
    c = construct_estim3_constants(L1Bounds(m, g1, top), p, 1.0, gamma, N, t0, cut)
    assert c.invariant_holds(p, N, gamma)
    assert c.C_plus > 0 and c.K_minus > 0


@pytest.mark.parametrize("gamma", [0.0, 1.0])
@pytest.mark.parametrize("nu", [None, -1.5, -2.5])
def test_checks_pass_on_mixture(setup, gamma, nu):
    f, h, prof = setup
    ker = _ker(gamma, nu)
    spec = NormSpec(2.0, 2.0)
    reps = [check_estim1(f, h, spec, ker, Q, profiles=prof, g_index=1),
            check_fonc(f, h, spec, ker, Q, profiles=prof, g_index=1),
            check_estim5(f, spec, ker, Q, profiles=prof)]
    cut, _ = split(ker.angular, pi / 6)
    b = L1Bounds.of(f, spec, gamma)
    c3 = construct_estim3_constants(b, 2.0, 2.0, gamma, 2, pi / 6, cut)
    reps.append(check_estim3(f, spec, ker.with_angular(cut), c3, b, Q, profiles=prof))
    for r in reps:
        assert r.passed, r


def test_incompatible_weight_rejected(setup):
    f, h, prof = setup
    with pytest.raises(CompatibilityError):
        check_fonc(f, h, NormSpec(2.0, 1.0), _ker(1.0, -2.5), Q, profiles=prof, g_index=1)


def test_estim3_rejects_uncut_kernel(setup):
    f, _, prof = setup
    spec = NormSpec(2.0, 1.0)
    b = L1Bounds.of(f, spec, 1.0)
    cut, _ = split(_ker(1.0).angular, pi / 6)
    c3 = construct_estim3_constants(b, 2.0, 1.0, 1.0, 2, pi / 6, cut)
    with pytest.raises(ValueError):
        check_estim3(f, spec, _ker(1.0), c3, b, Q, profiles=prof)


def test_estim5_split_is_admissible(setup):
    f, _, _ = setup
    spec = NormSpec(2.0, 2.0)
    ker = _ker(1.0, -2.5)
    c = construct_estim5_constants(L1Bounds.of(f, spec, 1.0), spec, ker, 2, Q)
    assert 0 < c.theta0 < pi / 2
    assert c.fonc_remainder <= 0.5 * c.cutoff.K_minus * (1 + 1e-12)


def test_epsilon_probe_dominates_family():
    g = VelocityGrid(2, 24, 8.0)
    f = mixture(BIMODAL, g)
    fam = [dilate(f, lam) for lam in (1.0, 1.3, 1.7)] + [maxwellian(g, f.mass, f.momentum / f.mass,
                                                                   f.temperature)]
    fit = probe_estim4_epsilon(fam, NormSpec(2.0, 1.0), _ker(1.0), quad=Q)
    assert fit.fitted
    assert 0.0 <= fit.epsilon <= 1.0
    assert min(fit.residuals) >= -1e-9
