"""Tests for the charge density and the periodic Poisson field solve."""

import warnings

import numpy as np
import pytest

from lowrank_vlasov import (
    ChargeDensity,
    FunctionFamily,
    Grid,
    charge_density_2d,
    lowrank_field,
    solve_poisson,
)
from lowrank_vlasov.grid import spectral_derivative


def _landau_factors(r=1, alpha=0.01, k=0.5, nx=64, nv=256):
    gx = Grid(nx, 0.0, 4 * np.pi)
    gv = Grid(nv, -6.0, 6.0)
    K = FunctionFamily(gx, np.tile(1.0 + alpha * np.cos(k * gx.points), (r, 1)))
    V = FunctionFamily(gv, np.tile(np.exp(-gv.points**2 / 2) / np.sqrt(2 * np.pi), (r, 1)))
    return gx, gv, K, V


def test_charge_density_rank_one_maxwellian():
    # V integrates to ~1, so rho = -(1 + alpha cos(kx)) up to the quadrature
    # tail of the truncated Maxwellian (~2e-9).
    gx, gv, K, V = _landau_factors()
    rho = charge_density_2d(K, V)
    assert rho.values.shape == (gx.n,)
    expected = -(1.0 + 0.01 * np.cos(0.5 * gx.points))
    assert np.max(np.abs(rho.values - expected)) <= 1e-8


def test_charge_density_zero_weight_family():
    gx = Grid(32, 0.0, 2 * np.pi)
    gv = Grid(64, -6.0, 6.0)
    K = FunctionFamily(gx, np.ones((2, gx.n)))
    V = FunctionFamily(gv, np.vstack([np.sin(np.pi * gv.points / 6), np.sin(np.pi * gv.points / 3)]))
    rho = charge_density_2d(K, V)  # both members integrate to ~0
    assert np.max(np.abs(rho.values)) <= 1e-12


def test_charge_density_landau_total_charge():
    from scipy import special

    gx, gv, K, V = _landau_factors()
    rho = charge_density_2d(K, V)
    total = gx.h * rho.values.sum()
    # the Maxwellian truncated to (-6,6) carries erf(6/sqrt 2) of the mass
    oracle = -4 * np.pi * special.erf(6 / np.sqrt(2))
    assert total == pytest.approx(oracle, abs=1e-8)
    assert total == pytest.approx(-4 * np.pi, abs=5e-8)


def test_charge_density_count_mismatch():
    gx = Grid(8, 0.0, 1.0)
    gv = Grid(8, -1.0, 1.0)
    with pytest.raises(ValueError):
        charge_density_2d(FunctionFamily(gx, np.ones((2, 8))), FunctionFamily(gv, np.ones((3, 8))))


def test_poisson_uniform_neutral_plasma():
    grid = Grid(64, 0.0, 4 * np.pi)
    E = solve_poisson(ChargeDensity((grid,), -np.ones(grid.n)))
    assert np.max(np.abs(E.components[0])) <= 1e-14


def test_poisson_1d_analytic():
    # rho + 1 = -alpha cos(kx)  =>  E = -(alpha/k) sin(kx)
    grid = Grid(64, 0.0, 4 * np.pi)
    alpha, k = 0.01, 0.5
    rho = ChargeDensity((grid,), -1.0 - alpha * np.cos(k * grid.points))
    E = solve_poisson(rho).components[0]
    assert np.max(np.abs(E - (-(alpha / k) * np.sin(k * grid.points)))) <= 1e-12
    assert np.max(np.abs(E - (-0.02 * np.sin(grid.points / 2)))) <= 1e-12


def test_poisson_2d_separable_analytic():
    # rho + 1 = -alpha cos(k1 x1) cos(k2 x2):
    # phi = -alpha cos cos/(k1^2+k2^2), E_m = -d(phi)/dx_m.
    g1 = Grid(64, 0.0, 4 * np.pi)
    g2 = Grid(48, 0.0, 4 * np.pi)
    alpha, k1, k2 = 0.01, 0.5, 1.0
    x1 = g1.points[:, None]
    x2 = g2.points[None, :]
    rho1 = -alpha * np.cos(k1 * x1) * np.cos(k2 * x2)
    E = solve_poisson(ChargeDensity((g1, g2), rho1 - 1.0))
    ksq = k1**2 + k2**2
    e1 = -alpha * k1 / ksq * np.sin(k1 * x1) * np.cos(k2 * x2)
    e2 = -alpha * k2 / ksq * np.cos(k1 * x1) * np.sin(k2 * x2)
    assert np.max(np.abs(E.components[0] - e1)) <= 1e-12
    assert np.max(np.abs(E.components[1] - e2)) <= 1e-12


def test_poisson_gauss_law_spectral():
    # div E reproduces rho+1 on every mode the derivative can represent
    # (Nyquist excluded by construction); random band-limited density.
    g1 = Grid(32, 0.0, 2 * np.pi)
    g2 = Grid(32, 0.0, 4 * np.pi)
    rng = np.random.default_rng(5)
    rho1 = np.zeros((g1.n, g2.n))
    for m1, m2 in ((1, 0), (0, 1), (2, 3), (3, 1)):
        w1 = 2 * np.pi * m1 / g1.length
        w2 = 2 * np.pi * m2 / g2.length
        rho1 += rng.standard_normal() * np.cos(w1 * g1.points)[:, None] * np.cos(w2 * g2.points)[None, :]
        rho1 += rng.standard_normal() * np.sin(w1 * g1.points)[:, None] * np.sin(w2 * g2.points)[None, :]
    rho1 -= rho1.mean()
    E = solve_poisson(ChargeDensity((g1, g2), rho1 - 1.0))
    div = spectral_derivative(E.components[0].T, g1).T + spectral_derivative(E.components[1], g2)
    assert np.max(np.abs(div - rho1)) <= 1e-12 * max(1.0, np.max(np.abs(rho1)))


def test_poisson_zero_mean_components():
    g1 = Grid(32, 0.0, 2 * np.pi)
    g2 = Grid(32, 0.0, 2 * np.pi)
    rng = np.random.default_rng(17)
    rho1 = np.cos(g1.points)[:, None] * np.sin(2 * g2.points)[None, :] + 0.3 * np.sin(3 * g1.points)[:, None]
    E = solve_poisson(ChargeDensity((g1, g2), rho1 - 1.0))
    for comp in E.components:
        assert abs(comp.mean()) <= 1e-12 * np.sqrt((comp**2).mean())
    del rng


def test_poisson_curl_free():
    g1 = Grid(32, 0.0, 2 * np.pi)
    g2 = Grid(48, 0.0, 4 * np.pi)
    rho1 = np.cos(g1.points)[:, None] * np.cos(np.pi * g2.points / (2 * np.pi))[None, :]
    rho1 = rho1 - rho1.mean()
    E = solve_poisson(ChargeDensity((g1, g2), rho1 - 1.0))
    curl = spectral_derivative(E.components[1].T, g1).T - spectral_derivative(E.components[0], g2)
    assert np.max(np.abs(curl)) <= 1e-12


def test_poisson_non_neutral_warns_and_zeroes_mean():
    grid = Grid(64, 0.0, 2 * np.pi)
    rho = ChargeDensity((grid,), -1.0 + 0.5 + 0.1 * np.cos(grid.points))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        E = solve_poisson(rho)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert abs(E.components[0].mean()) <= 1e-13


def test_poisson_neutral_does_not_warn():
    grid = Grid(64, 0.0, 2 * np.pi)
    rho = ChargeDensity((grid,), -1.0 + 0.1 * np.cos(grid.points))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_poisson(rho)


def test_electric_energy_quadrature():
    grid = Grid(64, 0.0, 4 * np.pi)
    E = solve_poisson(ChargeDensity((grid,), -1.0 - 0.01 * np.cos(0.5 * grid.points)))
    # (1/2) integral of (alpha/k)^2 sin^2(kx) = (alpha/k)^2 L / 4
    assert E.electric_energy() == pytest.approx((0.02) ** 2 * np.pi, rel=1e-12)


def _random_smooth_field(seed=3):
    g1 = Grid(64, 0.0, 2 * np.pi)
    g2 = Grid(64, 0.0, 2 * np.pi)
    rng = np.random.default_rng(seed)
    comp = np.zeros((g1.n, g2.n))
    for m1 in range(4):
        for m2 in range(4):
            amp = rng.standard_normal() * np.exp(-0.8 * (m1 + m2))
            comp += amp * np.cos(m1 * g1.points + 0.3 * m1)[:, None] * np.cos(m2 * g2.points - 0.2 * m2)[None, :]
    from lowrank_vlasov.field import ElectricField

    return ElectricField((g1, g2), (comp, comp[::-1, :].copy()))


def test_lowrank_field_separable_rank_one():
    g1 = Grid(32, 0.0, 2 * np.pi)
    g2 = Grid(32, 0.0, 2 * np.pi)
    a = np.sin(g1.points)
    b = 1.0 + 0.5 * np.cos(g2.points)
    from lowrank_vlasov.field import ElectricField

    E = lowrank_field(ElectricField((g1, g2), (np.outer(a, b), np.outer(b[:32], a))), r_E=1)
    for comp, (A, B) in zip(E.components, E.lowrank):
        assert A.shape[0] == 1
        recon = A.T @ B
        assert np.max(np.abs(recon - comp)) <= 1e-12


def test_lowrank_field_nonaligned_charge_rank_two():
    # cos(k1 x) cos(k2 y) charge: each field component is exactly one
    # separable term, so rank <= 2 captures it to rounding.
    g1 = Grid(64, 0.0, 5 * np.pi)
    g2 = Grid(64, 0.0, 5 * np.pi)
    alpha, k1, k2 = 0.01, 0.4, 0.4
    rho1 = -alpha * np.cos(k1 * g1.points)[:, None] * np.cos(k2 * g2.points)[None, :]
    E = lowrank_field(solve_poisson(ChargeDensity((g1, g2), rho1 - 1.0)), r_E=2)
    for comp, (A, B) in zip(E.components, E.lowrank):
        assert np.max(np.abs(A.T @ B - comp)) <= 1e-12


def test_lowrank_field_tolerance_mode():
    E = lowrank_field(_random_smooth_field(), tol=1e-10)
    for comp, (A, B) in zip(E.components, E.lowrank):
        err = np.linalg.norm(A.T @ B - comp)
        assert err <= 1e-10


def test_lowrank_field_rank_monotonicity():
    E0 = _random_smooth_field(seed=11)
    errs = []
    for r in (1, 2, 3, 4, 6):
        E = lowrank_field(E0, r_E=r)
        A, B = E.lowrank[0]
        errs.append(np.linalg.norm(A.T @ B - E.components[0]))
    assert all(e2 <= e1 + 1e-15 for e1, e2 in zip(errs, errs[1:]))


def test_lowrank_field_requires_2d():
    grid = Grid(16, 0.0, 1.0)
    from lowrank_vlasov.field import ElectricField

    with pytest.raises(ValueError):
        lowrank_field(ElectricField((grid,), (np.zeros(grid.n),)))
