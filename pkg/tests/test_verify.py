"""Verifier: residual reports, convergence order, catastrophe probe."""

import numpy as np
import pytest

from riemannwaves.catalog import make_family
from riemannwaves.catalog.base import FamilySpec, PotentialWave, stack_waves
from riemannwaves.fluid import GasParams
from riemannwaves.verify import (
    EmptyReportError,
    GridSpec,
    catastrophe_probe,
    fd_convergence_order,
    pde_residual,
    residual_exact,
    residual_fd,
)

SMALL = (3, 5, 5, 5)


def constant_family():
    """Constant-state member of the vortex family: exact zeros everywhere."""
    return make_family("R1_S", A1=0.0, A2=0.0)


def corrupted_e1e2(delta=0.1):
    """Two acoustic waves with the locked angle deliberately perturbed.

    make_family rejects this configuration, so the family is assembled from
    the raw building blocks; the verifier must flag it loudly.
    """
    gas = GasParams()
    kappa = gas.kappa
    e1 = np.array([1.0, 0.0, 0.0])
    phi = np.arccos(-1.0 / kappa) + delta
    e2 = np.array([np.cos(phi), np.sin(phi), 0.0])
    s1 = s2 = 0.25
    waves, waves_jac = stack_waves([PotentialWave(e=e1), PotentialWave(e=e2)])

    def profile(r, t):
        a1, a2 = s1 * r[:, 0], s2 * r[:, 1]
        return np.column_stack([a1 + a2, kappa * (a1[:, None] * e1 + a2[:, None] * e2)])

    def profile_jac(r, t):
        out = np.empty((len(r), 4, 2))
        out[:, 0, 0], out[:, 0, 1] = s1, s2
        out[:, 1:, 0] = kappa * s1 * e1
        out[:, 1:, 1] = kappa * s2 * e2
        return out

    return FamilySpec(id="corrupted", rank=2, n_waves=2, description="angle broken",
                      params={}, gas=gas, profile=profile, profile_jac=profile_jac,
                      waves=waves, waves_jac=waves_jac,
                      probe_x=-(e1 + e2), default_window={"t": (0.0, 0.45)})


def test_constant_family_exact_zero_and_fd_rounding():
    spec = constant_family()
    grid = GridSpec.from_window(spec.default_grid_window(), counts=(2, 2, 2, 2))
    rex = residual_exact(spec, grid=grid)
    assert rex.max_residual == 0.0
    rfd = residual_fd(spec, grid=grid)
    assert rfd.max_residual <= 1e-13


def test_corrupted_family_flagged():
    spec = corrupted_e1e2()
    grid = GridSpec.from_window(spec.default_grid_window(), counts=SMALL)
    rep = residual_exact(spec, grid=grid)
    assert rep.max_normalized > 1e-3


def test_exact_sharper_than_fd():
    spec = make_family("R2_E1E2")
    grid = GridSpec.from_window(spec.default_grid_window(), counts=SMALL)
    rex = residual_exact(spec, grid=grid)
    rfd = residual_fd(spec, grid=grid)
    assert rex.max_residual <= rfd.max_residual + 1e-12


def test_fd_grid_spacing_guard():
    spec = make_family("R2_E1E2")
    grid = GridSpec(t=(0, 0.4, 3), x1=(0, 2e-4, 2), x2=(-1, 1, 3), x3=(-1, 1, 3))
    with pytest.raises(ValueError):
        residual_fd(spec, grid=grid, h=1e-4)


def test_fd_convergence_order_second_order():
    spec = make_family("R2_S1S2_MA")
    grid = GridSpec.from_window(spec.default_grid_window(), counts=SMALL)
    order = fd_convergence_order(spec, grid=grid, branch="plus")
    assert 1.7 <= order <= 2.3


def test_empty_report_error():
    spec = make_family("R2_S1S2_MA")  # invalid for t <= 0
    grid = GridSpec(t=(-0.5, -0.1, 3), x1=(0.5, 1.5, 3), x2=(-0.5, 0.5, 3), x3=(0, 0, 1))
    with pytest.raises(EmptyReportError):
        residual_exact(spec, grid=grid, branch="plus")


def test_skipped_points_are_counted():
    spec = make_family("R1_E")
    grid = GridSpec.from_window(spec.default_grid_window(), counts=SMALL)
    rep = residual_exact(spec, grid=grid)
    assert rep.n_points + rep.n_skipped == 3 * 5 * 5 * 5
    assert rep.n_skipped > 0  # half-space has a <= 0
    assert rep.skip_reasons.get("invalid", 0) > 0


def test_snoidal_divergence_free_and_constant_speed():
    spec = make_family("R2_S1S2S3")
    rng = np.random.default_rng(3)
    t = rng.uniform(0, 3, 100)
    x = rng.uniform(-2, 2, (100, 3))
    res = spec.evaluate_batch(t, x)
    div = res.jac[:, 1, 1] + res.jac[:, 2, 2] + res.jac[:, 3, 3]
    assert np.max(np.abs(div)) <= 1e-8
    assert np.max(np.abs(res.state[:, 0] - spec.params["a0"])) <= 1e-14
    # time derivative of the sound speed vanishes identically
    assert np.max(np.abs(res.jac[:, 0, :])) <= 1e-14


def test_time_only_family_trace_identity():
    # d/dt [ ln( a(t)^kappa det(I + t Df) ) ] = 0 along sampled trajectories
    spec = make_family("RK_TIME_A")
    df = spec.params["_df_matrix"]
    kappa = spec.gas.kappa
    a1 = spec.params["A1"]

    def logq(t):
        a = a1 * ((1 + spec.params["C1"] * t) ** 2 + spec.params["B1"] * t**2) ** (-1 / kappa)
        return kappa * np.log(a) + np.log(np.linalg.det(np.eye(2) + t * df))

    ts = np.linspace(0.0, 2.0, 41)
    h = 1e-6
    for t in ts:
        d = (logq(t + h) - logq(t - h)) / (2 * h)
        assert abs(d) <= 1e-8


def test_probe_r1e_within_one_percent():
    rep = catastrophe_probe(make_family("R1_E"))
    assert rep.applicable
    assert 0.99 <= rep.empirical_time <= 1.01
    assert rep.rel_gap <= 0.01


def test_probe_not_applicable_for_bounded_families():
    rep = catastrophe_probe(make_family("R1_S"))
    assert not rep.applicable
    assert rep.formula_times == []


def test_probe_soliton_bounded_fields_unbounded_derivatives():
    spec = make_family("R2_E1S2", profile="soliton", A1=1.0, B1=1.0)
    rep = catastrophe_probe(spec)
    assert rep.applicable and rep.rel_gap <= 0.01
    # derivative norms grow without bound along the schedule...
    finite = np.isfinite(rep.jac_norms)
    assert np.max(rep.jac_norms[finite]) > 1e3
    # ...while the fields stay bounded by twice their initial magnitude
    tstar = rep.probe_time
    x = rep.ray[None, :]
    res0 = spec.evaluate_batch(np.zeros(1), x)
    cap = 2.0 * (1.0 + np.max(np.abs(res0.state)))
    for frac in (0.5, 0.9, 0.99, 0.999):
        res = spec.evaluate_batch(np.array([tstar * frac]), x, ignore_validity=True)
        assert np.max(np.abs(res.state)) <= cap


def test_pde_residual_functional_matches_trace_form():
    # residual functional agrees with tr(A^mu du) assembled from the matrices
    from riemannwaves.fluid import StateVec, coefficient_matrices
    rng = np.random.default_rng(7)
    gas = GasParams()
    for _ in range(10):
        state = np.concatenate([[rng.uniform(0.5, 2)], rng.normal(0, 1, 3)])
        jac = rng.normal(size=(4, 4))
        res = pde_residual(state[None], jac[None], gas.kappa)[0]
        mats = coefficient_matrices(StateVec.from_array(state), gas)
        expect = jac[:, 0].copy()
        for i, m in enumerate(mats):
            expect += m @ jac[:, i + 1]
        assert np.max(np.abs(res - expect)) <= 1e-12


def test_grid_odometer_order():
    grid = GridSpec(t=(0, 1, 2), x1=(0, 1, 2), x2=(0, 0, 1), x3=(0, 1, 2))
    tv, xv = grid.points()
    assert np.allclose(tv[:4], [0, 0, 0, 0])       # t slowest
    assert np.allclose(xv[:2, 2], [0, 1])          # x3 fastest
    assert np.allclose(xv[:4, 0], [0, 0, 1, 1])
