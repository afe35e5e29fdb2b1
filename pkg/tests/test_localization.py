import math
from dataclasses import replace

import numpy as np
import pytest

from shearlab import (
    MaterialParams,
    ScalingParams,
    ParameterError,
    RangeError,
    PlanarParams,
    LocalizedSolution,
    shoot_heteroclinic,
    reparametrize,
    reconstruct,
    uniform_shear,
    pde_residual,
    residual_convergence,
    band_diagnostics,
)

N, ALPHA, THETA0, LAM, SIGMA0 = 0.1, 0.5, 10.0, 0.1, 1.88


@pytest.fixture(scope="module")
def showcase_solution():
    p = PlanarParams(n=N, alpha=ALPHA, nu=LAM)
    prof = reconstruct(reparametrize(shoot_heteroclinic(p), SIGMA0))
    params = MaterialParams(n=N, alpha=ALPHA, kappa=0.0, theta0=THETA0)
    return LocalizedSolution(params=params,
                             scaling=ScalingParams(lam=LAM, sigma0=SIGMA0),
                             profile=prof)


class _ConstantProfile:
    """Uniform-shear stand-in: U = 1, Sigma = 1, Theta = 0."""

    def __init__(self, nu):
        self.nu = nu
        self.xi_max = np.inf

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.ones_like(xi), np.ones_like(xi), np.zeros_like(xi)


def test_constructor_guards(showcase_solution):
    prof = showcase_solution.profile
    with pytest.raises(ParameterError):
        LocalizedSolution(params=MaterialParams(n=N, alpha=ALPHA, kappa=0.5,
                                                theta0=THETA0),
                          scaling=ScalingParams(lam=LAM, sigma0=SIGMA0),
                          profile=prof)
    with pytest.raises(ParameterError):
        LocalizedSolution(params=MaterialParams(n=N, alpha=ALPHA, kappa=0.0,
                                                theta0=THETA0),
                          scaling=ScalingParams(lam=0.2, sigma0=SIGMA0),
                          profile=prof)
    with pytest.raises(ParameterError):
        ScalingParams(lam=0.0, sigma0=1.0)


def test_initial_data_reduction(showcase_solution):
    # at t = 0 the solution reduces to (U(sqrt(lam) x), sigma_s(0) Sigma(...),
    # theta_s(0) + Theta(...))
    sol = showcase_solution
    xs = np.linspace(-3.0, 3.0, 41)
    u, sigma, theta = sol.evaluate(xs, 0.0)
    U, Sigma, Theta = sol.profile(math.sqrt(LAM) * xs)
    base = uniform_shear(sol.params, 0.0)
    assert np.allclose(u, U, rtol=1e-14)
    assert np.allclose(sigma, base.sigma_s * Sigma, rtol=1e-14)
    assert np.allclose(theta, base.theta_s + Theta, rtol=1e-14)


def test_peak_growth_and_evenness(showcase_solution):
    sol = showcase_solution
    ts = np.linspace(0.0, 200.0, 9)
    u0 = np.array([sol.evaluate(0.0, t)[0] for t in ts])
    # u(0,t) = phi(t) U(0), strictly increasing in t
    U0 = sol.profile(0.0)[0]
    assert np.allclose(u0, sol.phi(ts) * U0, rtol=1e-13)
    assert np.all(np.diff(u0) > 0)
    # even in x
    for t in (0.0, 50.0):
        left = sol.evaluate(-2.3, t)
        right = sol.evaluate(2.3, t)
        assert left == right


def test_theta_arrangements_agree(showcase_solution):
    # theta = (1 + lam(n+1)/alpha) theta_s - lam(n+1)/alpha theta0 + Theta
    # equals theta_s + lam(n+1)/alpha (theta_s - theta0) + Theta
    sol = showcase_solution
    xs = np.linspace(-4.0, 4.0, 17)
    for t in (0.0, 10.0, 200.0):
        _, _, theta = sol.evaluate(xs, t)
        base = uniform_shear(sol.params, t)
        Theta = sol.profile(math.sqrt(LAM) * xs * sol.phi(t))[2]
        na = LAM * (N + 1.0) / ALPHA
        alt = base.theta_s + na * (base.theta_s - THETA0) + Theta
        assert np.allclose(theta, alt, rtol=1e-14)


def test_theta_excess_identity_and_bound(showcase_solution):
    sol = showcase_solution
    xs = np.linspace(-5.0, 5.0, 101)
    na = LAM * (N + 1.0) / ALPHA
    Theta00 = sol.profile(0.0)[2]
    for t in (0.0, 20.0, 200.0):
        _, _, theta = sol.evaluate(xs, t)
        base = uniform_shear(sol.params, t)
        excess = theta - base.theta_s
        peak = sol.evaluate(0.0, t)[2] - base.theta_s
        assert np.all(excess <= peak + 1e-12)
        assert peak == pytest.approx(na * (base.theta_s - THETA0) + Theta00, rel=1e-12)


def test_monotone_decay_away_from_band(showcase_solution):
    sol = showcase_solution
    xs = np.linspace(0.0, 5.0, 200)
    for t in (0.0, 100.0):
        u = sol.evaluate(xs, t)[0]
        assert np.all(np.diff(u) < 0)


def test_constitutive_residual_is_roundoff(showcase_solution):
    sol = showcase_solution
    x = np.linspace(-5.0, 5.0, 65)
    t = np.linspace(0.0, 10.0, 17)
    rep = pde_residual(sol, x, t)
    assert rep.sup[2] < 1e-13


def test_uniform_shear_degenerate_solution():
    # constants (U, Sigma, Theta) = (1, 1, 0) with lam -> 0 reproduce the
    # uniform shearing solution, which solves the system exactly; theta0 = 10
    # keeps the base state slow so the t-differencing is exact to round-off
    lam = 1e-14
    params = MaterialParams(n=0.1, alpha=0.5, kappa=0.0, theta0=10.0)
    sol = LocalizedSolution(params=params,
                            scaling=ScalingParams(lam=lam, sigma0=1.0),
                            profile=_ConstantProfile(lam))
    x = np.linspace(-2.0, 2.0, 33)
    t = np.linspace(0.0, 5.0, 33)
    rep = pde_residual(sol, x, t)
    assert max(rep.sup) < 1e-12


def test_residual_fourth_order_convergence(showcase_solution):
    reports, orders, order = residual_convergence(showcase_solution)
    assert order == pytest.approx(4.0, abs=0.3)
    finest = [r for r in reports if not r.at_interpolation_floor][-1]
    assert max(finest.sup[0], finest.sup[1]) < 1e-6


def test_out_of_window_guard(showcase_solution):
    sol = replace(showcase_solution, outer_window_factor=1.0)
    xi_max = sol.profile.xi_max
    x_bad = 2.0 * xi_max / math.sqrt(LAM)
    with pytest.raises(RangeError):
        sol.evaluate(x_bad, 0.0)
    with pytest.raises(ParameterError):
        sol.evaluate(0.0, -1.0)


def test_band_diagnostics_self_similarity(showcase_solution):
    sol = showcase_solution
    ts = np.linspace(1.0, 200.0, 12)
    diag = band_diagnostics(sol, ts)
    # halfwidth * phi is constant: halfwidth = xi_half / (sqrt(lam) phi)
    prod = diag.halfwidth * sol.phi(ts)
    assert np.allclose(prod, prod[0], rtol=1e-9)
    # peak ratio equals the amplification
    assert np.allclose(diag.peak_u / sol.evaluate(0.0, 0.0)[0], sol.phi(ts),
                       rtol=1e-12)
    assert np.all(np.diff(diag.theta_excess) > 0)


def test_larger_lambda_localizes_faster():
    params = MaterialParams(n=N, alpha=ALPHA, kappa=0.0, theta0=THETA0)
    sols = {}
    for lam in (0.1, 0.4):
        p = PlanarParams(n=N, alpha=ALPHA, nu=lam)
        prof = reconstruct(reparametrize(shoot_heteroclinic(p), 1.0))
        sols[lam] = LocalizedSolution(params=params,
                                      scaling=ScalingParams(lam=lam, sigma0=1.0),
                                      profile=prof)
    ts = np.array([50.0, 200.0])
    d1 = band_diagnostics(sols[0.1], ts)
    d4 = band_diagnostics(sols[0.4], ts)
    # faster decay: larger relative halfwidth shrinkage at equal times
    shrink1 = d1.halfwidth[-1] / d1.halfwidth[0]
    shrink4 = d4.halfwidth[-1] / d4.halfwidth[0]
    assert shrink4 < shrink1


def test_self_similar_collapse(showcase_solution):
    sol = showcase_solution
    x = np.linspace(0.0, 5.0, 801)
    curves = {}
    for t in (0.0, 50.0, 200.0):
        xi = math.sqrt(LAM) * x * sol.phi(t)
        curves[t] = (xi, sol.evaluate(x, t)[0] / sol.phi(t))
    xi0, u0 = curves[0.0]
    for t in (50.0, 200.0):
        xi, u = curves[t]
        lo, hi = max(xi0[0], xi[0]), min(xi0[-1], xi[-1])
        xs = np.linspace(lo, hi, 400)
        dev = np.interp(xs, xi0, u0) - np.interp(xs, xi, u)
        assert np.max(np.abs(dev)) < 1e-4
