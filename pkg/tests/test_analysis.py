import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvscat import (GradientFlowState, TimeReverse, apply_symmetry,
                      estimate_delta0, gradient_flow_run,
                      inflection_diagnostics, linearization_spectrum,
                      spectrum_along)
from curvscat.analysis import g_values, potential_gradient, potential_value

moderate = st.floats(min_value=-8.0, max_value=8.0, allow_nan=False)


def test_spectrum_factorization_example():
    s = linearization_spectrum(0.0, 0.0, 0.0)
    assert math.isclose(s.mu_plus, 1.0, rel_tol=1e-15)
    assert math.isclose(s.mu_minus, -1.0, rel_tol=1e-15)
    assert math.isclose(s.lambda_real, 1.0, rel_tol=1e-15)
    assert math.isclose(s.lambda_imag, 1.0, rel_tol=1e-15)


def test_spectrum_quadratic_example():
    s = linearization_spectrum(0.0, 1.5, 0.0)
    assert math.isclose(s.mu_plus, (-3.0 + math.sqrt(13.0)) / 2.0, rel_tol=1e-14)
    assert math.isclose(s.mu_minus, (-3.0 - math.sqrt(13.0)) / 2.0, rel_tol=1e-14)
    assert math.isclose(s.lambda_real, 0.550251, abs_tol=1e-6)
    assert math.isclose(s.lambda_imag, 1.817354, abs_tol=1e-6)


@given(xi1=moderate, eta2=moderate, phi=moderate)
def test_spectrum_signs_and_vieta(xi1, eta2, phi):
    s = linearization_spectrum(xi1, eta2, phi)
    assert s.mu_plus > 0.0 > s.mu_minus
    c = math.exp(2.0 * (xi1 - phi))
    assert abs(s.nu_plus * s.nu_minus + c) <= 1e-12 * c
    # the polynomial itself is satisfied by both roots, relative to its
    # largest term
    for mu in (s.mu_plus, s.mu_minus):
        t1 = mu * mu
        t2 = 2.0 * eta2 * math.exp(2.0 * phi) * mu
        t3 = math.exp(2.0 * phi + 2.0 * xi1)
        scale = max(abs(t1), abs(t2), abs(t3))
        assert abs(t1 + t2 - t3) <= 1e-12 * scale
    assert math.isclose(s.lambda_real**2, s.mu_plus, rel_tol=1e-12)
    assert math.isclose(s.lambda_imag**2, -s.mu_minus, rel_tol=1e-12)


def test_spectrum_along_trajectory(traj8):
    samples = spectrum_along(traj8)
    assert len(samples) == len(traj8)
    for s in samples:
        assert s.mu_plus > 0.0 > s.mu_minus
        # self-linearization: xi1 = phi, so the factored product is exactly -1
        assert abs(s.nu_plus * s.nu_minus + 1.0) <= 1e-12


def test_spectrum_past_decay(traj8):
    # real eigenvalue decays like e^{xi_in + t} toward the past
    early = traj8.t <= traj8.t[0] + 2.0
    lam = np.array([linearization_spectrum(x, e, x).lambda_real
                    for x, e in zip(traj8.xi[early], traj8.eta[early])])
    t = traj8.t[early]
    slope = np.polyfit(t, np.log(lam), 1)[0]
    assert abs(slope - 1.0) < 1e-3
    growth = np.exp(0.0 + t)  # xi_in = 0
    c = lam[0] / growth[0]
    assert np.all(lam <= 2.0 * c * growth)


def test_spectrum_time_reverse_invariant(traj8):
    rev = apply_symmetry(traj8, TimeReverse())
    s_fwd = spectrum_along(traj8)
    s_rev = spectrum_along(rev)
    assert math.isclose(s_fwd[0].lambda_real, s_rev[-1].lambda_real, rel_tol=1e-15)
    assert math.isclose(s_fwd[-1].mu_minus, s_rev[0].mu_minus, rel_tol=1e-15)


# --- gradient flow -----------------------------------------------------------


def test_flow_zero_coupling_fixed_at_anchor():
    s = GradientFlowState.from_anchor(-0.6, delta=0.0, nu0=-0.8)
    res = gradient_flow_run(s)
    assert res.converged and res.stayed_in_quadrant
    assert res.iterations == 0
    assert res.fixed_point == (-0.6, -0.8)


def test_flow_near_tangent_anchor_first_order_prediction():
    mu0 = -(1.0 - 1e-6)
    s = GradientFlowState.from_anchor(mu0, delta=1e-4, epsilon=0.1)
    res = gradient_flow_run(s, tol=1e-12)
    assert res.converged and res.stayed_in_quadrant
    mu_m, nu_m = res.fixed_point
    assert mu_m > s.mu0 and nu_m < s.nu0
    pred_mu = s.mu0 - s.delta * s.nu0 / s.mu0**2
    pred_nu = s.nu0 + s.delta / s.mu0
    assert abs(mu_m - pred_mu) <= 1e-7
    assert abs(nu_m - pred_nu) <= 1e-7
    # stationarity of the potential at the fixed point
    gmu, gnu = potential_gradient(s, mu_m, nu_m)
    assert math.hypot(gmu, gnu) <= 1e-12


def test_flow_gradient_on_nu0_edge():
    s = GradientFlowState.from_anchor(-0.7, delta=1e-3)
    for mu in (-0.2, -0.7, -3.0):
        _, gnu = potential_gradient(s, mu, s.nu0)
        # the descent direction's nu component on the edge is delta/mu < 0
        assert math.isclose(-gnu, s.delta / mu, rel_tol=1e-15)
        assert -gnu < 0.0


def test_flow_large_coupling_exits_quadrant():
    s = GradientFlowState.from_anchor(-0.1, delta=1.0)
    res = gradient_flow_run(s, max_iter=10000)
    assert not res.stayed_in_quadrant
    assert not res.converged


@given(mu0=st.floats(min_value=-0.999, max_value=-0.2))
def test_flow_small_coupling_heuristic_converges(mu0):
    delta = 1e-3 * abs(mu0)**3
    s = GradientFlowState.from_anchor(mu0, delta=delta)
    res = gradient_flow_run(s, tol=1e-10)
    assert res.converged and res.stayed_in_quadrant
    assert res.fixed_point[0] < 0.0 and res.fixed_point[1] < 0.0


def test_estimate_delta0_brackets_the_exit():
    d0 = estimate_delta0(-0.5)
    assert d0 > 0.0
    s_ok = GradientFlowState.from_anchor(-0.5, delta=0.5 * d0)
    assert gradient_flow_run(s_ok).stayed_in_quadrant
    s_bad = GradientFlowState.from_anchor(-0.5, delta=2.0 * d0)
    r = gradient_flow_run(s_bad)
    assert not (r.stayed_in_quadrant and r.converged)


def test_flow_state_validation():
    with pytest.raises(ValueError, match="circle"):
        GradientFlowState(mu=-0.5, nu=-0.5, mu0=-0.5, nu0=-0.5,
                          delta=0.0, epsilon=0.1)
    with pytest.raises(ValueError, match="delta"):
        GradientFlowState.from_anchor(-0.6, delta=-1.0)
    with pytest.raises(ValueError, match="epsilon"):
        GradientFlowState.from_anchor(-0.6, delta=0.0, epsilon=1.0)
    with pytest.raises(ValueError, match="quadrant"):
        gradient_flow_run(GradientFlowState(mu=0.5, nu=-0.5, mu0=-0.6,
                                            nu0=-0.8, delta=0.0, epsilon=0.1))


def test_potential_value_matches_definition():
    s = GradientFlowState.from_anchor(-0.6, delta=2e-3, nu0=-0.8)
    w = potential_value(s, -1.0, -2.0)
    assert math.isclose(w, 0.5 * ((-1 + 0.6)**2 + (-2 + 0.8)**2) - 2e-3 * 2.0,
                        rel_tol=1e-15)


# --- inflection diagnostics ---------------------------------------------------


def test_g_starts_at_one_and_decreases(traj8):
    g = g_values(traj8)
    assert abs(g[0] - 1.0) <= 1e-6
    assert np.max(np.diff(g)) <= 1e-9


def test_inflection_unique_crossing(traj8):
    rep = inflection_diagnostics(traj8)
    g = g_values(traj8)
    crossings = np.sum((g[:-1] > 0.0) & (g[1:] <= 0.0))
    assert crossings == 1
    assert rep.eta_sim < 8.0
    assert rep.sign_pattern_ok
    assert traj8.t[0] < rep.t_inflection < traj8.t[-1]


def test_inflection_requires_crossing(trio):
    import dataclasses
    traj = trio[1]
    # truncate far before the crossing: diagnostics must refuse, not invent
    keep = traj.t < traj.events.t_m
    short = dataclasses.replace(
        traj, t=traj.t[keep], xi=traj.xi[keep], eta=traj.eta[keep],
        xi_dot=traj.xi_dot[keep], eta_dot=traj.eta_dot[keep],
        uniform_mask=traj.uniform_mask[keep])
    with pytest.raises(ValueError, match="no sign change"):
        inflection_diagnostics(short)


def test_write_spectrum_csv(tmp_path, traj8):
    from curvscat.analysis import write_spectrum_csv
    samples = spectrum_along(traj8)[:5]
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(samples, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,lambda_real,lambda_imag,mu_plus,mu_minus"
    assert len(lines) == 6
