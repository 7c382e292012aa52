import math

import numpy as np
import pytest

from ckdv.errors import BlowUpError, ParameterError
from ckdv.functionals import FunctionalSpec
from ckdv.grid import FieldPair, GridSpec, SystemParams, spectral_derivative
from ckdv.dynamics import (ConservationReport, IntegratorConfig, Trajectory, integrate,
                           integrate_with_monitor, miura_trajectory_defect, observed_local_order,
                           soliton_exact, soliton_initial, stability_bound, step)
from ckdv.structures import coupled_kdv_rhs

from conftest import band

MONITORS = [FunctionalSpec("H1", -1.0), FunctionalSpec("H2", -1.0), FunctionalSpec("MassU"),
            FunctionalSpec("MassV")]


def test_soliton_peaks(grid):
    s = soliton_initial(1.0, 0.0, grid)
    i = int(np.argmin(np.abs(grid.x)))
    assert s.first.values[i] == pytest.approx(3.0, abs=1e-12)
    assert s.second.max_abs() == 0.0
    s4 = soliton_initial(4.0, 0.0, grid)
    assert s4.first.values[i] == pytest.approx(12.0, abs=1e-12)
    # half width: sech^2 drops to 1/2 at half the distance
    x = np.linspace(0, 3, 3001)
    w1 = x[np.argmin(np.abs(1 / np.cosh(x / 2) ** 2 - 0.5))]
    w4 = x[np.argmin(np.abs(1 / np.cosh(x) ** 2 - 0.5))]
    assert w4 == pytest.approx(w1 / 2, abs=2e-3)


@pytest.mark.parametrize("c,n", [(1.0, 256), (4.0, 512)])
def test_soliton_residual(c, n):
    grid = GridSpec(n, 40.0)
    s = soliton_initial(c, 1.5, grid)
    rhs = coupled_kdv_rhs(SystemParams(-1.0), s)
    ux = spectral_derivative(s.first.values, grid.length, 1)
    assert np.max(np.abs(rhs.first.values + c * ux)) <= 1e-9
    assert rhs.second.max_abs() == 0.0


def test_soliton_box_too_short():
    with pytest.raises(ParameterError, match="tail"):
        soliton_initial(1.0, 0.0, GridSpec(128, 10.0))
    with pytest.raises(ParameterError):
        soliton_initial(0.0, 0.0, GridSpec(128, 40.0))


def test_config_checks():
    with pytest.raises(ParameterError):
        IntegratorConfig(0.0, 1.0)
    with pytest.raises(ParameterError):
        IntegratorConfig(1e-3, -1.0)
    with pytest.raises(ParameterError):
        IntegratorConfig(1e-3, 1.0, scheme="euler")
    cfg = IntegratorConfig(1e-3, 1.0)
    assert cfg.steps == 1000 and abs(cfg.steps * cfg.dt - cfg.t_end) <= cfg.dt
    assert cfg.steps // cfg.snapshot_stride + 2 <= 200


def test_stability_bounds(grid):
    assert stability_bound("if-rk4", grid) == math.inf
    bound = stability_bound("rk4", grid)
    assert 0 < bound < 1e-3
    with pytest.raises(ParameterError, match="stability"):
        step(IntegratorConfig(2 * bound, 1.0, scheme="rk4"), SystemParams(-1.0), band(1, grid))


@pytest.mark.parametrize("flow", ["kdv", "mkdv"])
@pytest.mark.parametrize("scheme", ["if-rk4", "rk4"])
def test_zero_fixed_point(small_grid, flow, scheme):
    out = step(IntegratorConfig(1e-3, 1.0, scheme), SystemParams(-1.0), FieldPair.zeros(small_grid), flow)
    assert out.max_abs() == 0.0


def test_one_step_soliton(grid):
    dt = 1e-3
    out = step(IntegratorConfig(dt, dt), SystemParams(-1.0), soliton_initial(1.0, 0.0, grid))
    assert (out - soliton_exact(1.0, 0.0, dt, grid)).max_abs() <= 1e-10


@pytest.mark.parametrize("scheme", ["rk4", "if-rk4"])
def test_local_order(small_grid, scheme):
    f = band(2, small_grid, 0.3, cutoff=5)
    order = observed_local_order(IntegratorConfig(0.02, 0.02, scheme), SystemParams(-1.0), f)
    assert order >= 4.0


def test_time_reversal_rk4(small_grid):
    f = band(3, small_grid, 0.3, cutoff=5)
    cfg = IntegratorConfig(0.01, 1.0, scheme="rk4", dealias=False)
    p = SystemParams(-1.0)
    fwd = integrate(cfg, p, f).final
    back = integrate(cfg, p, fwd, reverse=True)
    assert back.times[-1] == pytest.approx(-1.0)
    assert (back.final - f).max_abs() <= 1e-8


def test_soliton_transport():
    g = GridSpec(512, 40.0)
    cfg = IntegratorConfig(1e-3, 1.0)
    traj = integrate(cfg, SystemParams(-1.0), soliton_initial(1.0, 0.0, g))
    assert (traj.final - soliton_exact(1.0, 0.0, traj.times[-1], g)).max_abs() <= 1e-4


def test_soliton_conservation(grid):
    cfg = IntegratorConfig(2e-3, 10.0)
    _, rep = integrate_with_monitor(cfg, SystemParams(-1.0), soliton_initial(1.0, 0.0, grid),
                                    monitors=MONITORS)
    assert set(rep.drifts) == {"H1", "H2", "mass_u", "mass_v"}
    assert rep.max_drift <= 1e-6


def test_zero_data_monitors(small_grid):
    _, rep = integrate_with_monitor(IntegratorConfig(1e-2, 1.0), SystemParams(-1.0),
                                    FieldPair.zeros(small_grid), monitors=MONITORS)
    assert rep.max_drift == 0.0


def test_random_conservation_lambda2(grid):
    lam = 2.0
    mons = [FunctionalSpec("H1", lam), FunctionalSpec("H2", lam), FunctionalSpec("Hk", lam, 0.3)]
    _, rep = integrate_with_monitor(IntegratorConfig(5e-3, 5.0), SystemParams(lam),
                                    band(4, grid, 0.2, cutoff=6), monitors=mons, seed=4)
    assert rep.max_drift <= 1e-6
    assert rep.meta["seed"] == 4 and rep.meta["scheme"] == "if-rk4"


def test_drift_definition():
    rep = ConservationReport(np.array([0, 1, 2.0]), {"a": np.array([0.5, 0.7, 0.4]),
                                                     "b": np.array([10.0, 10.5, 9.0])})
    assert rep.drifts["a"] == pytest.approx(0.2)
    assert rep.drifts["b"] == pytest.approx(0.1)
    rows = list(rep.rows())
    assert rows[0] == ["t", "a", "b"] and len(rows) == 4


def test_monitor_type_check(small_grid):
    with pytest.raises(ParameterError):
        integrate_with_monitor(IntegratorConfig(1e-2, 0.1), SystemParams(-1.0),
                               FieldPair.zeros(small_grid), monitors=["H1"])


def test_trajectory_alignment(small_grid):
    with pytest.raises(ParameterError):
        Trajectory([0.0, 1.0], [FieldPair.zeros(small_grid)], SystemParams(-1.0))


def test_snapshot_stride(small_grid):
    traj = integrate(IntegratorConfig(1e-2, 1.0, stride=10), SystemParams(-1.0),
                     band(1, small_grid, 0.2))
    assert len(traj.times) == 11 and np.all(np.diff(traj.times) > 0)


def test_miura_trajectory_zero(small_grid):
    d = miura_trajectory_defect(IntegratorConfig(1e-2, 0.5), SystemParams(-1.0),
                                FieldPair.zeros(small_grid))
    assert d == 0.0


def test_miura_trajectory_scalar(grid):
    mu = band(5, grid, 0.5, cutoff=6).first.values
    m = FieldPair.from_arrays(grid, mu, np.zeros(grid.n))
    assert miura_trajectory_defect(IntegratorConfig(2e-3, 1.0), SystemParams(-1.0), m) <= 1e-6


@pytest.mark.parametrize("lam", [-1.0, 2.0])
def test_miura_trajectory_random(grid, lam):
    m = band(6, grid, 0.5, cutoff=6)
    assert miura_trajectory_defect(IntegratorConfig(2e-3, 1.0), SystemParams(lam), m) <= 1e-5


@pytest.mark.parametrize("n", [64, 256])
def test_blowup_detected(n):
    g = GridSpec(n, 40.0)
    big = band(1, g, 20.0, cutoff=min(10, n // 8))
    with pytest.raises(BlowUpError) as info:
        integrate(IntegratorConfig(1e-2, 1.0), SystemParams(-1.0), big)
    err = info.value
    assert err.step is not None and err.step > 0
    assert math.isfinite(err.time)
    assert "aborted" in str(err)


def test_nonfinite_initial_data_rejected(small_grid):
    with pytest.raises((BlowUpError, ParameterError)):
        bad = np.zeros(small_grid.n)
        bad[3] = np.nan
        integrate(IntegratorConfig(1e-2, 0.1), SystemParams(-1.0),
                  FieldPair.from_arrays(small_grid, bad, bad))
