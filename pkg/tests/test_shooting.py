import math

import numpy as np
import pytest

from curvscat import (NotConvergedError, deflection_of, shoot, sweep,
                      theta_identities)
from curvscat.shooting import BracketNotFoundError

from _reference import ORACLE_THETA_ETA8

PI = math.pi


def test_deflection_of_matches_oracle(cfg):
    assert abs(deflection_of(8.0, 0.0, cfg) - ORACLE_THETA_ETA8) < 1e-6


def test_deflection_invariant_under_xi_in_shift(cfg):
    t0 = deflection_of(8.0, 0.0, cfg)
    t1 = deflection_of(8.0, 1.0, cfg)
    t2 = deflection_of(8.0, -2.5, cfg)
    assert abs(t1 - t0) < 1e-6
    assert abs(t2 - t0) < 1e-6


def test_deflection_of_nonscattering_raises(cfg):
    with pytest.raises(NotConvergedError):
        deflection_of(-0.5, 0.0, cfg)


def test_shoot_recovers_known_eta(cfg):
    res = shoot(ORACLE_THETA_ETA8, cfg, root_tol=1e-8)
    assert abs(res.theta_achieved - ORACLE_THETA_ETA8) <= 1e-8
    assert abs(res.eta_in_found - 8.0) <= 1e-4
    assert res.eta_in_found > 0.0
    assert res.bracket[0] <= res.eta_in_found <= res.bracket[1]


def test_shoot_deterministic(cfg):
    r1 = shoot(-0.6 * PI, cfg, root_tol=1e-8)
    r2 = shoot(-0.6 * PI, cfg, root_tol=1e-8)
    assert r1.eta_in_found == r2.eta_in_found
    assert r1.theta_achieved == r2.theta_achieved
    assert r1.iterations == r2.iterations


def test_shoot_mid_target(cfg):
    res = shoot(-0.6 * PI, cfg, root_tol=1e-8)
    assert abs(res.theta_achieved + 0.6 * PI) <= 1e-8


@pytest.mark.parametrize("target, kappa_lo, kappa_hi", [
    (-0.51 * PI, 2 * PI, 2.2 * PI),   # shallow endpoint: kappa near 2*pi
    (-0.99 * PI, 3.9 * PI, 4 * PI),   # deep endpoint: kappa near 4*pi
])
def test_shoot_endpoint_stress(cfg, target, kappa_lo, kappa_hi):
    res = shoot(target, cfg, root_tol=1e-8)
    assert abs(res.theta_achieved - target) <= 1e-8
    kap, _ = theta_identities(res.theta_achieved)
    assert kappa_lo < kap < kappa_hi


def test_shoot_rejects_margin_violations(cfg):
    with pytest.raises(ValueError):
        shoot(-0.5 * PI, cfg)
    with pytest.raises(ValueError):
        shoot(-PI, cfg)
    with pytest.raises(ValueError):
        shoot(-0.999 * PI, cfg, margin=0.01 * PI)


def test_shoot_bracket_not_found_reports_scan(cfg):
    with pytest.raises(BracketNotFoundError) as e:
        shoot(-0.99 * PI, cfg, ceiling=10.0)
    assert len(e.value.scanned) >= 1
    etas = [s[0] for s in e.value.scanned]
    assert max(etas) <= 20.0


def test_sweep_rows(cfg):
    grid = [-0.8 * PI, -0.75 * PI, -0.7 * PI]
    rows = sweep(grid, cfg, root_tol=1e-8)
    assert [r.theta_target for r in rows] == grid
    kappas = []
    for r in rows:
        assert r.status == "ok"
        assert abs(r.theta - r.theta_target) <= 1e-8
        assert 2 * PI < r.kappa < 4 * PI
        assert 0.0 < r.alpha < 2.0**1.5 * PI
        assert abs(r.k_star - math.sqrt(2.0) * r.eta_in) <= 1e-6 * r.k_star
        assert abs(r.pokhozaev_residual) / (16 * PI**2) <= 1e-3
        assert r.energy_drift <= 1e-8
        kappas.append(r.kappa)
    # kappa ordering follows the grid ordering through 2*pi*(1 - cos theta)
    assert kappas[0] > kappas[1] > kappas[2]


def test_sweep_records_row_failures(cfg):
    rows = sweep([-0.99 * PI, -0.75 * PI], cfg, root_tol=1e-8, ceiling=10.0)
    assert rows[0].status.startswith("failed")
    assert math.isnan(rows[0].eta_in)
    assert rows[1].status == "ok"


def test_empirical_continuity_of_deflection_map(cfg):
    # refining an eta grid inside the scattering regime produces angles with
    # no jumps beyond the local Lipschitz estimate from neighbors
    etas = np.geomspace(2.0, 16.0, 13)
    thetas = np.array([deflection_of(e, 0.0, cfg) for e in etas])
    assert np.all(np.diff(thetas) < 0.0)  # observed monotone decrease
    d = np.abs(np.diff(thetas))
    for k in range(1, len(d) - 1):
        assert d[k] <= 4.0 * max(d[k - 1], d[k + 1])
