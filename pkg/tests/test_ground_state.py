import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, solve_ivp
from scipy.special import k0

from spikelab import ground_state as gs
from spikelab.errors import DomainError


def shoot_dop853(w0, r_end=14.0):
    """Independent shooting oracle: adaptive DOP853 from a series start."""
    r0 = 1e-4
    a = (w0 - w0 * w0) / 4
    y0 = [w0 + a * r0 ** 2, 2 * a * r0]

    def rhs(r, y):
        return [y[1], -y[1] / r + y[0] - y[0] ** 2]

    def crosses(r, y):
        return y[0]

    def rises(r, y):
        return y[1]

    crosses.terminal = rises.terminal = True
    sol = solve_ivp(rhs, (r0, r_end), y0, method="DOP853", rtol=1e-12, atol=1e-14,
                    events=(crosses, rises))
    if sol.t_events[0].size:
        return 1  # overshoot
    if sol.t_events[1].size:
        return -1
    return 0


def oracle_height():
    lo, hi = 1.5, 3.5
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if shoot_dop853(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_height_matches_adaptive_oracle(profile):
    assert abs(profile.w0 - oracle_height()) < 1e-7


def test_ode_residual(profile):
    assert profile.residual_sup <= 1e-8


def test_residual_recomputed_from_integrator_slopes(profile):
    # second derivative by differencing the slope array the integrator produced
    r, w, p, h = profile.r_grid, profile.w_values, profile.w_derivs, profile.h
    i = slice(5, len(r) - 5)
    # fourth-order stencil, a different one from the solver's own
    wpp = (-p[7:-3] + 8 * p[6:-4] - 8 * p[4:-6] + p[3:-7]) / (12 * h)
    res = wpp + p[i] / r[i] - w[i] + w[i] ** 2
    assert np.abs(res).max() < 1e-8


def test_grid_doubling_stability(profile):
    fine = gs.solve_ground_state(n=8000)
    assert abs(fine.w0 - profile.w0) <= 1e-6


def test_decay_rate(profile):
    r = profile.r_grid
    w = profile.w_values
    sel = np.where(r >= 10)[0][::200]
    for a in sel:
        for b in sel[sel > a]:
            assert w[b] / w[a] <= math.exp(-0.9 * (r[b] - r[a]))


def test_tail_is_k0_shaped(profile):
    # in the far field w is a multiple of K0, so the ratio must flatten out
    r = np.linspace(14, 19, 11)
    ratio = gs.evaluate_w(profile, r) / k0(r)
    assert np.ptp(ratio) / ratio.mean() < 1e-3


def test_c2_identity(constants):
    assert abs(constants.c2 + 0.5 * constants.int_w2) <= 1e-6 * constants.int_w2


def test_integrals_against_quadrature(profile, constants):
    f2 = lambda r: 2 * math.pi * r * gs.evaluate_w(profile, r) ** 2
    f3 = lambda r: 2 * math.pi * r * gs.evaluate_w(profile, r) ** 3
    i2 = quad(f2, 0, 40, limit=400, epsabs=1e-12)[0]
    i3 = quad(f3, 0, 40, limit=400, epsabs=1e-12)[0]
    assert i2 == pytest.approx(constants.int_w2, rel=1e-8)
    assert i3 == pytest.approx(constants.int_w3, rel=1e-8)


def test_profile_positive_and_decreasing(profile):
    assert np.all(profile.w_values > 0)
    assert np.all(np.diff(profile.w_values) < 0)


@pytest.mark.parametrize("kw", [dict(r_max=10), dict(n=500)])
def test_domain_checks(kw):
    with pytest.raises(DomainError):
        gs.solve_ground_state(**kw)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 60.0))
def test_evaluate_w_bounded_and_positive(profile, r):
    v = float(gs.evaluate_w(profile, r))
    assert 0 < v <= profile.w0 + 1e-12


def test_csv_and_json_roundtrip(profile, constants, tmp_path):
    import json

    gs.write_profile_csv(profile, tmp_path / "p.csv")
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert data.shape[0] == profile.r_grid.size
    assert np.allclose(data[:, 1], profile.w_values, rtol=1e-12)
    gs.write_constants_json(profile, constants, tmp_path / "c.json")
    d = json.loads((tmp_path / "c.json").read_text())
    assert d["w0"] == profile.w0 and "version" in d
