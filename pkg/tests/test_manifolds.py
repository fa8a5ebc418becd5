import numpy as np
import pytest

from gradest import (DomainError, EstimateContext, InvalidParameterError,
                     RadialSolverConfig, SolverError, euclidean_gaussian,
                     heat_residual, hyperbolic3_kernel, load_solution_csv,
                     make_family, radial_heat_solve, refine, save_solution_csv,
                     verify_bound)


@pytest.fixture(scope="module")
def h3_run():
    return radial_heat_solve(RadialSolverConfig(n=3))


class TestEuclideanGaussian:
    def test_center_values(self):
        eu = euclidean_gaussian(3)
        assert eu.grad_sq(0.0, 1.0) == 0.0
        assert eu.f_t(0.0, 1.0) == pytest.approx(-1.5)

    def test_bound_identity_everywhere(self):
        eu = euclidean_gaussian(3)
        for t in (0.05, 0.5, 2.0):
            for r in (0.0, 1.0, 4.0, 8.0):
                combo = eu.grad_sq(r, t) - eu.f_t(r, t)
                assert combo == pytest.approx(3 / (2 * t), abs=1e-12)

    def test_heat_residual_machine_zero(self):
        eu = euclidean_gaussian(3)
        assert abs(heat_residual(eu, [(1.0, 1.0)])[0]) <= 1e-12

    def test_grad_nonnegative(self):
        eu = euclidean_gaussian(2)
        rs = np.linspace(0, 10, 30)
        assert np.all(eu.grad_sq(rs, 0.3) >= 0)


class TestHyperbolicKernel:
    def test_residual_on_grid(self):
        h3 = hyperbolic3_kernel()
        pts = [(r, t) for r in np.linspace(0.1, 8.0, 20)
               for t in np.linspace(0.05, 5.0, 20)]
        res = heat_residual(h3, pts)
        assert max(abs(x) for x in res) <= 1e-8

    def test_grad_sq_continuous_and_zero_at_origin(self):
        h3 = hyperbolic3_kernel()
        assert h3.grad_sq(0.0, 0.5) == 0.0
        left = h3.grad_sq(0.999e-3, 0.5)
        right = h3.grad_sq(1.001e-3, 0.5)
        assert left == pytest.approx(right, rel=1e-2)
        assert h3.grad_sq(1e-6, 0.5) < 1e-11

    def test_center_small_time_leading_term(self):
        h3 = hyperbolic3_kernel()
        t = 0.01
        val = h3.grad_sq(0.0, t) - h3.f_t(0.0, t)
        assert val == pytest.approx(3 / (2 * t) + 1.0, rel=1e-13)

    def test_residual_outside_window_rejected(self):
        h3 = hyperbolic3_kernel()
        with pytest.raises(DomainError):
            heat_residual(h3, [(1.0, 100.0)])


class TestRadialSolver:
    def test_config_validation(self):
        with pytest.raises(InvalidParameterError):
            RadialSolverConfig(n=1)
        with pytest.raises(InvalidParameterError):
            RadialSolverConfig(n=3, n_r=50)
        with pytest.raises(InvalidParameterError):
            RadialSolverConfig(n=3, t_start=1.0, t_end=0.5)
        with pytest.raises(InvalidParameterError):
            RadialSolverConfig(n=2, seed="exact")  # exact profile only for n=3

    def test_positivity_and_max_principle(self, h3_run):
        data = h3_run
        assert (data.u_grid >= 0.0).all()
        peaks = data.u_grid.max(axis=1)
        assert np.all(np.diff(peaks) <= 1e-9 * peaks[:-1])

    def test_matches_exact_kernel_within_one_percent(self, h3_run):
        data = h3_run
        h3u = hyperbolic3_kernel().u
        r, tarr = data.r_grid, data.t_grid
        rmask, tmask = r <= 6.0, (tarr >= 0.5) & (tarr <= 2.0)
        U = data.u_grid[np.ix_(tmask, rmask)]
        exact = np.vstack([h3u(r[rmask], float(t)) for t in tarr[tmask]])
        assert np.abs(U / exact - 1.0).max() <= 0.01

    def test_interior_residual(self, h3_run):
        data = h3_run
        pts = [(rr, tt) for rr in np.linspace(0.2, 6.0, 10)
               for tt in np.linspace(data.t_range[0], data.t_range[1], 8)]
        res = heat_residual(data, pts)
        scaled = [abs(v) / float(data.residual_scale(rr, tt))
                  for v, (rr, tt) in zip(res, pts)]
        assert max(scaled) <= 1e-3

    def test_n2_run_positive_with_small_residual(self):
        data = radial_heat_solve(RadialSolverConfig(
            n=2, n_r=1000, r_max=10.0, t_start=0.02, t_end=1.0))
        assert (data.u_grid >= 0.0).all()
        pts = [(rr, tt) for rr in np.linspace(0.2, 5.0, 8)
               for tt in np.linspace(data.t_range[0], data.t_range[1], 6)]
        scaled = [abs(v) / float(data.residual_scale(rr, tt))
                  for v, (rr, tt) in zip(heat_residual(data, pts), pts)]
        assert max(scaled) <= 1e-3

    def test_refinement_improves_at_second_order(self, h3_run):
        # coarse short run vs its refinement: error ratio >= 3
        cfg = RadialSolverConfig(n=3, r_max=10.0, n_r=1000, t_start=0.02, t_end=0.8)
        h3u = hyperbolic3_kernel().u

        def err(data):
            r, tarr = data.r_grid, data.t_grid
            rmask, tmask = r <= 5.0, (tarr >= 0.4) & (tarr <= 0.8)
            U = data.u_grid[np.ix_(tmask, rmask)]
            exact = np.vstack([h3u(r[rmask], float(t)) for t in tarr[tmask]])
            return np.abs(U / exact - 1.0).max()

        e1 = err(radial_heat_solve(cfg))
        e2 = err(radial_heat_solve(refine(cfg)))
        assert e1 / e2 >= 3.0


class TestPersistence:
    def test_round_trip(self, h3_run, tmp_path):
        path = tmp_path / "run.csv"
        save_solution_csv(h3_run, path)
        back = load_solution_csv(path)
        assert np.array_equal(back.u_grid, h3_run.u_grid)
        assert back.n == 3 and back.k == 2.0
        assert back.t_range == pytest.approx(h3_run.t_range)
        # derived quantities rebuilt identically at a probe point
        assert back.grad_sq(3.0, 1.0) == pytest.approx(h3_run.grad_sq(3.0, 1.0))

    def test_exact_data_cannot_be_persisted(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            save_solution_csv(hyperbolic3_kernel(), tmp_path / "x.csv")


class TestNumericVerification:
    def test_lyd_passes_on_numeric_data(self, h3_run):
        ctx = EstimateContext(n=3, k=2.0, T=2.0)
        rep = verify_bound(make_family(ctx, "lyd", {"beta": 0.5}), h3_run)
        assert rep.passed
        assert rep.tol_policy.startswith("relative")
