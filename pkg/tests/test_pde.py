import math

import numpy as np
import pytest
from scipy.stats import norm

from interface_lab.medium import make_medium
from interface_lab.pde import (
    Grid,
    PdeProblem,
    interface_flux_residual,
    solve,
    survival_curve,
)


def gaussian_bump(center=0.0, sigma=0.4):
    def c0(y):
        return np.exp(-np.square(y - center) / (2.0 * sigma**2))
    return c0


def heat_kernel_solution(y, t, d, sigma):
    # closed-form Gaussian-through-Gaussian convolution for dc/dt = (d/2) c_yy
    var = sigma**2 + d * t
    return sigma / math.sqrt(var) * np.exp(-np.square(y) / (2.0 * var))


class TestGrid:
    def test_basic_properties(self):
        g = Grid(half_width=4.0, n_nodes=401)
        assert g.h == pytest.approx(0.02)
        assert g.interface_index == 200
        assert g.nodes[200] == 0.0
        assert g.nodes[0] == pytest.approx(-4.0)

    def test_interface_node_exact_zero(self):
        g = Grid(half_width=17.0, n_nodes=3401)
        assert g.nodes[g.interface_index] == 0.0

    def test_node_at(self):
        g = Grid(half_width=4.0, n_nodes=401)
        assert g.node_at(1.0) == 250
        assert g.node_at(-1.0) == 150
        with pytest.raises(ValueError, match="node"):
            g.node_at(0.013)
        with pytest.raises(ValueError, match="outside"):
            g.node_at(9.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Grid(half_width=1.0, n_nodes=400)  # even
        with pytest.raises(ValueError):
            Grid(half_width=1.0, n_nodes=5)  # too small
        with pytest.raises(ValueError):
            Grid(half_width=-1.0, n_nodes=11)


class TestSolve:
    def test_constant_preserved(self):
        med = make_medium(4.0, 1.0, 0.8)
        g = Grid(half_width=4.0, n_nodes=201)
        p = PdeProblem(medium=med, grid=g, initial_data=np.ones(201), dt=1e-3, t_max=1.0)
        sol = solve(p)
        assert np.max(np.abs(sol.final_slice - 1.0)) < 1e-12
        assert np.max(np.abs(sol.mass_series - sol.mass_series[0])) < 1e-10

    def test_homogeneous_matches_heat_kernel(self):
        d = 2.0
        med = make_medium(d, d, 0.5)
        g = Grid(half_width=8.0, n_nodes=801)
        p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(0.0, 0.4),
                       dt=1e-3, t_max=0.5)
        sol = solve(p)
        exact = heat_kernel_solution(g.nodes, 0.5, d, 0.4)
        assert np.max(np.abs(sol.final_slice - exact)) < 5e-5

    def test_homogeneous_convergence_order(self):
        d = 2.0
        med = make_medium(d, d, 0.5)
        errs = []
        for n, dt in ((201, 4e-3), (401, 2e-3)):
            g = Grid(half_width=8.0, n_nodes=n)
            p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(0.0, 0.4),
                           dt=dt, t_max=0.5)
            sol = solve(p)
            errs.append(np.max(np.abs(sol.final_slice - heat_kernel_solution(g.nodes, 0.5, d, 0.4))))
        assert math.log2(errs[0] / errs[1]) >= 1.9

    def test_interface_self_convergence_order(self):
        med = make_medium(4.0, 1.0, 0.8)
        slices = []
        for n, dt in ((401, 2e-3), (801, 1e-3), (1601, 5e-4)):
            g = Grid(half_width=8.0, n_nodes=n)
            p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(1.0, 0.7),
                           dt=dt, t_max=0.5)
            slices.append(solve(p).final_slice)
        d1 = np.max(np.abs(slices[1][::2] - slices[0]))
        d2 = np.max(np.abs(slices[2][::2] - slices[1]))
        assert math.log2(d1 / d2) >= 1.5

    def test_maximum_principle(self):
        med = make_medium(4.0, 1.0, 0.8)
        g = Grid(half_width=4.0, n_nodes=161)  # h=0.05
        dt = 2.0 * g.h**2 / 4.0  # diffusion number exactly 1
        p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(0.5, 0.3),
                       dt=dt, t_max=0.2)
        sol = solve(p)
        assert sol.final_slice.max() <= 1.0 + 1e-10
        assert sol.final_slice.min() >= -1e-10

    def test_absorbing_boundaries(self):
        med = make_medium(1.0, 1.0, 0.5)
        g = Grid(half_width=3.0, n_nodes=301)
        p = PdeProblem(medium=med, grid=g, initial_data=np.ones(301),
                       left_bc="absorbing", right_bc="absorbing", dt=1e-3, t_max=0.5)
        sol = solve(p)
        assert sol.final_slice[0] == 0.0
        assert sol.final_slice[-1] == 0.0
        assert sol.mass_series[-1] < sol.mass_series[0]

    def test_stability_quality_warning(self):
        med = make_medium(4.0, 1.0, 0.8)
        g = Grid(half_width=4.0, n_nodes=801)  # h=0.01
        p = PdeProblem(medium=med, grid=g, initial_data=np.ones(801), dt=1e-2, t_max=0.1)
        sol = solve(p)
        assert sol.warnings and "stability-quality" in sol.warnings[0]

    def test_probe_series_shape(self):
        med = make_medium(2.0, 1.0, 0.5)
        g = Grid(half_width=2.0, n_nodes=101)
        p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(), dt=1e-2,
                       t_max=0.1, probe_nodes=(10, 50))
        sol = solve(p)
        assert len(sol.probe_series[10]) == 11
        assert sol.times[-1] == pytest.approx(0.1)

    def test_matches_transition_density_quadrature(self):
        # backward-equation identity: c(t, y) = E_y c0(Y_t), by quadrature of
        # the closed-form transition density through the coordinate map
        from scipy.integrate import quad
        from interface_lab.sbm import transition_density

        med = make_medium(4.0, 1.0, 0.8)
        c0 = gaussian_bump(1.0, 1.0 / math.sqrt(2.0))
        t_end = 0.5

        def exact_at(y):
            x = med.unscale(y)
            f = lambda xp: transition_density(med.alpha_star, x, t_end, xp) * c0(med.scale(xp))
            return (quad(f, -np.inf, 0, epsabs=1e-11, limit=200)[0]
                    + quad(f, 0, np.inf, epsabs=1e-11, limit=200)[0])

        g = Grid(half_width=8.0, n_nodes=801)
        p = PdeProblem(medium=med, grid=g, initial_data=c0, dt=5e-4, t_max=t_end)
        sol = solve(p)
        for y in (-1.0, 0.0, 1.0):
            assert sol.final_slice[g.node_at(y)] == pytest.approx(exact_at(y), abs=5e-5)


class TestInterfaceFluxResidual:
    def test_enforced_to_roundoff(self):
        med = make_medium(4.0, 1.0, 0.8)
        g = Grid(half_width=4.0, n_nodes=401)
        p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(1.0, 0.5),
                       dt=1e-3, t_max=0.3)
        res = interface_flux_residual(solve(p), med)
        assert np.max(np.abs(res)) < 1e-10

    def test_constant_solution_zero(self):
        med = make_medium(4.0, 1.0, 0.8)
        g = Grid(half_width=4.0, n_nodes=401)
        p = PdeProblem(medium=med, grid=g, initial_data=np.ones(401), dt=1e-3, t_max=0.1)
        res = interface_flux_residual(solve(p), med)
        assert np.max(np.abs(res)) < 1e-12

    def test_stays_small_under_refinement(self):
        med = make_medium(4.0, 1.0, 0.8)
        for n in (401, 801):
            g = Grid(half_width=4.0, n_nodes=n)
            p = PdeProblem(medium=med, grid=g, initial_data=gaussian_bump(1.0, 0.5),
                           dt=1e-3, t_max=0.2)
            res = interface_flux_residual(solve(p), med)
            assert np.max(np.abs(res)) < 1e-10


class TestSurvivalCurve:
    def test_reflection_oracle(self):
        med = make_medium(1.0, 1.0, 0.5)
        sv = survival_curve(med, 1.0, -1.0, dt=1e-3, t_max=4.0, points_per_unit=50)
        exact = 2.0 * norm.cdf(1.0) - 1.0
        assert abs(sv.at(4.0) - exact) < 5e-3

    def test_monotone_in_unit_interval(self):
        med = make_medium(4.0, 1.0, 0.8)
        sv = survival_curve(med, -1.0, 1.0, dt=1e-3, t_max=2.0, points_per_unit=50)
        assert sv.survival[0] == 1.0
        assert np.all(np.diff(sv.survival) <= 1e-9)
        assert sv.survival.min() >= -1e-12 and sv.survival.max() <= 1.0 + 1e-12

    def test_far_boundary_insensitive(self):
        med = make_medium(4.0, 1.0, 0.8)
        a = survival_curve(med, -1.0, 1.0, far_bc_width=16.0, dt=2e-3, t_max=2.0,
                           points_per_unit=50)
        b = survival_curve(med, -1.0, 1.0, far_bc_width=32.0, dt=2e-3, t_max=2.0,
                           points_per_unit=50)
        assert abs(a.at(2.0) - b.at(2.0)) < 1e-4

    def test_ordering_between_directions(self):
        med = make_medium(4.0, 1.0, 0.8)
        a = survival_curve(med, -1.0, 1.0, dt=2e-3, t_max=2.0, points_per_unit=50)
        b = survival_curve(med, 1.0, -1.0, dt=2e-3, t_max=2.0, points_per_unit=50)
        assert np.max(a.survival - b.survival) <= 1e-8

    def test_geometry_errors(self):
        med = make_medium(1.0, 1.0, 0.5)
        with pytest.raises(ValueError, match="differ"):
            survival_curve(med, 1.0, 1.0)
        with pytest.raises(ValueError, match="interface"):
            survival_curve(med, 1.0, 0.0)
