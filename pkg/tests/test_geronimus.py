import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmvzeros import geronimus as ger
from cmvzeros.errors import NotAZero, OnArcEndpoint, RegimeViolation, WrongRegime
from cmvzeros.perturb import PerturbationSpec, fd_continuation
from cmvzeros.poly import kernel_on_inverse_conjugate, szego_values
from cmvzeros.schur import constant
from cmvzeros.spectra import zeros

A_VALUES = [0.5, -0.5, -0.3, 0.3 + 0.4j, 0.1 - 0.7j, 0.9j]


def computed_zeros(a, n):
    return zeros(constant(a, n), n).refined


def test_w_roots_value():
    r = ger.w_roots(ger.context(0.5), 1.0)
    assert sorted([complex(r.w1).real, complex(r.w2).real]) == pytest.approx([0.5, 1.5])


@pytest.mark.parametrize("a", A_VALUES)
def test_vieta(a):
    rng = np.random.default_rng(0)
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    assert max(ger.vieta_residuals(ger.context(a), z).values()) <= 1e-12


def test_confluent_at_endpoint():
    ctx = ger.context(0.5)
    r = ger.w_roots(ctx, ctx.z_plus)
    assert bool(r.confluent)
    assert abs(r.w1 - r.w2) <= 1e-7


def test_context_rejects_outside_disk():
    with pytest.raises(ValueError):
        ger.context(1.2)


@pytest.mark.parametrize("a", A_VALUES)
def test_mass_point_identity(a):
    assert ger.mass_point_identity_residual(ger.context(a)) <= 1e-14


def test_closed_form_first_order():
    phi, _ = ger.closed_form_phi(ger.context(0.5), 1, 1.0)
    assert phi == pytest.approx(1.7320508, abs=1e-7)
    assert phi == pytest.approx(complex(szego_values(constant(0.5, 1), 1, 1.0).phi[1]), abs=1e-14)


def test_closed_form_order_zero():
    assert ger.closed_form_phi(ger.context(0.3), 0, 0.7j) == (1, 1)


def test_closed_form_order_twelve():
    a = 0.3 + 0.4j
    z = np.exp(2j * np.pi * np.random.default_rng(1).random(16))
    phi, phis = ger.closed_form_phi(ger.context(a), 12, z)
    v = szego_values(constant(a, 12), 12, z)
    assert np.max(np.abs(phi - v.phi[12])) <= 1e-9
    assert np.max(np.abs(phis - v.phistar[12])) <= 1e-9


@given(st.sampled_from(A_VALUES), st.integers(0, 30), st.complex_numbers(max_magnitude=1.5))
def test_closed_form_matches_recurrence(a, n, z):
    ctx = ger.context(a)
    if min(abs(z - ctx.z_plus), abs(z - ctx.z_minus)) < 1e-3:
        return
    phi, phis = ger.closed_form_phi(ctx, n, z)
    v = szego_values(constant(a, max(n, 1)), n, z)
    assert abs(phi - v.phi[n]) <= 1e-9 * (1 + abs(v.phi[n]))
    assert abs(phis - v.phistar[n]) <= 1e-9 * (1 + abs(v.phistar[n]))


def test_zero_equation_first_order():
    assert abs(ger.zero_equation_residual(ger.context(0.5), 1, -0.5)) <= 1e-15


def test_zero_equation_order_six():
    ctx = ger.context(-0.5)
    for z in computed_zeros(-0.5, 6):
        assert abs(ger.zero_equation_residual(ctx, 6, z)) <= 1e-8


def test_zero_equation_negative_control():
    assert abs(ger.zero_equation_residual(ger.context(-0.5), 6, 0.3 + 0.2j)) > 1e-3


def test_kernel_first_order():
    assert ger.kernel_closed_form(ger.context(0.5), 1, -0.5) == pytest.approx(1, abs=1e-14)


def test_kernel_order_six_against_sum():
    ctx = ger.context(-0.5)
    s = constant(-0.5, 6)
    for z in computed_zeros(-0.5, 6):
        direct = kernel_on_inverse_conjugate(s, 6, z).direct_sum
        assert abs(ger.kernel_closed_form(ctx, 6, z) - direct) <= 1e-8 * max(1, abs(direct))


def test_kernel_endpoint_and_non_zero():
    ctx = ger.context(0.5)
    with pytest.raises(OnArcEndpoint):
        ger.kernel_closed_form(ctx, 4, ctx.z_plus)
    with pytest.raises(NotAZero):
        ger.kernel_closed_form(ctx, 4, 0.1)


@pytest.mark.parametrize("a", [-0.5, 0.3 + 0.4j])
def test_kernel_wronskian_route(a):
    ctx = ger.context(a)
    for n in (3, 8):
        for z in computed_zeros(a, n):
            if abs(z - ctx.z0) < 1e-2:
                continue  # cancellation near z0, see kernel_wronskian
            kc = ger.kernel_closed_form(ctx, n, z)
            assert abs(ger.kernel_wronskian(ctx, n, z) - kc) <= 1e-8 * max(1, abs(kc))


def test_threshold_values():
    assert ger.simplicity_bound(ger.context(-0.5)) == pytest.approx(6)
    assert ger.simplicity_threshold(ger.context(-0.5)) == 7
    assert ger.simplicity_bound(ger.context(-0.3)) == pytest.approx(24.07, abs=0.01)
    assert ger.simplicity_threshold(ger.context(-0.3)) == 25
    with pytest.raises(WrongRegime):
        ger.simplicity_threshold(ger.context(0.5))


def test_speed_bound_values():
    b = ger.rotation_speed_bounds(0.5, 32, math.pi / 2, 3 * math.pi / 2)
    assert b.c0 == pytest.approx(0.25)
    assert b.C_interval == pytest.approx(4.0)
    assert ger.rotation_speed_bounds(0.5, 15, math.pi / 2, 3 * math.pi / 2).C_uniform is not None
    with pytest.raises(RegimeViolation):
        ger.rotation_speed_bounds(0.5, 14, math.pi / 2, 3 * math.pi / 2)
    with pytest.raises(RegimeViolation):
        ger.rotation_speed_bounds(0.5, 32, 0.1, 3)
    with pytest.raises(RegimeViolation):
        ger.rotation_speed_bounds(0.5j, 32, 1, 2)


def test_speed_bound_asymptote():
    a, c0, rho2 = 0.5, 0.25, 0.75
    limit = rho2 * (1 + a) / (a * a * c0 * c0)
    prev = None
    for n in (10**3, 10**4, 10**5):
        gap = abs(ger.rotation_speed_bounds(a, n, math.pi / 2, 3 * math.pi / 2).C_interval * n - limit)
        assert prev is None or gap < prev / 5
        prev = gap


def test_trajectory_speed_small_order():
    a, n = 0.5, 20
    bound = ger.rotation_speed_bounds(a, n, math.pi / 2, 3 * math.pi / 2).C_interval
    spec = PerturbationSpec("rotate_all", constant(a, n), n, math.pi / 2)
    c = fd_continuation(spec, np.linspace(math.pi / 2, 3 * math.pi / 2, 64))
    assert np.max(np.abs(c.grid_derivative / c.paths)) < bound


@pytest.mark.parametrize("n", [8, 16, 32])
def test_lower_bound_inside_hull_region(n):
    ctx = ger.context(-0.5)
    lam = computed_zeros(-0.5, n)
    inside = ger.in_hull_region(ctx, lam)
    bound = ger.kernel_lower_bound(ctx, n)
    for z in lam[inside]:
        assert abs(ger.kernel_closed_form(ctx, n, z)) > bound


@pytest.mark.parametrize("a", [-0.5, -0.3, 0.2 + 0.6j])
def test_single_zero_approaches_z0_when_re_a_below_modulus(a):
    ctx = ger.context(a)
    assert ctx.gap > 0
    dist = []
    for n in (8, 16, 32):
        out = ger.outlier_zeros(ctx, computed_zeros(a, n))
        assert len(out) == 1
        dist.append(abs(out[0] - ctx.z0))
    assert dist[2] < dist[1] < dist[0]
    # its kernel tends to 2 (|a|^2 - Re a) z0 / ((z0 - z+)(z0 - z-)), which stays bounded
    limit = abs(2 * ctx.gap * ctx.z0 / ((ctx.z0 - ctx.z_plus) * (ctx.z0 - ctx.z_minus)))
    out = ger.outlier_zeros(ctx, computed_zeros(a, 32))[0]
    assert abs(ger.kernel_closed_form(ctx, 32, out, check=False)) == pytest.approx(limit, rel=1e-4)


def test_no_zero_near_z0_when_re_a_above_modulus():
    ctx = ger.context(0.5)
    assert ctx.gap < 0
    for n in (8, 16, 32):
        assert np.min(np.abs(computed_zeros(0.5, n) - ctx.z0)) > 0.1


def test_literal_bound_fails_at_outlier():
    # the all-zeros reading of the kernel lower bound breaks at the zero next to z0
    ctx = ger.context(-0.5)
    out = ger.outlier_zeros(ctx, computed_zeros(-0.5, 32))[0]
    assert abs(ger.kernel_closed_form(ctx, 32, out, check=False)) < ger.kernel_lower_bound(ctx, 32)


def test_simple_spectra_past_threshold():
    for n in range(7, 18):
        assert zeros(constant(-0.5, n), n).all_simple


def test_report_json():
    r = ger.report(ger.context(-0.5), ns=(8, 32))
    assert r["n_star"] == 7
    assert r["mass_point_present"] is False
    assert len(r["C_n"]) == 2
