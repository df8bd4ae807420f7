
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbelab import (
    DomainError,
    EocReport,
    GridFunction,
    NoExactReferenceError,
    SeriesSolution,
    TimePoly,
    abs_error_grid,
    ahpm_terms,
    build_grid,
    consecutive_term_norm,
    eoc,
    exact_concentration,
    geometric_error_bound,
    ham_contraction,
    integrate,
    l1_distance,
    moments_over_time,
    number_error,
    project_initial,
    truncated_sum,
)


class TestMoments:
    def test_initial_row_matches_projection(self, ex1):
        grid = build_grid(ex1.rmax, 80)
        solution = integrate(ex1, grid, (0.0, 0.5))
        table = moments_over_time(solution)
        projected = project_initial(ex1.init, grid)
        expected = [
            float(np.sum(grid.midpoints**n * projected.values * grid.widths))
            for n in (0, 1, 2)
        ]
        assert table.rows[0] == pytest.approx(tuple(expected))

    def test_series_table_needs_times(self, ex1):
        grid = build_grid(ex1.rmax, 40)
        series = ahpm_terms(ex1, grid, 2)
        with pytest.raises(DomainError):
            moments_over_time(series)

    def test_ex2_mass_stays_near_two(self, ex2):
        grid = build_grid(ex2.rmax, 150)
        solution = integrate(ex2, grid, (0.0, 0.5, 1.0))
        table = moments_over_time(solution)
        for value in table.moment(1):
            assert value == pytest.approx(2.0, rel=1e-2)
        assert not table.mass_drift_flagged

    def test_drift_flag_reacts_to_tolerance(self, ex3):
        grid = build_grid(ex3.rmax, 150)
        series = ahpm_terms(ex3, grid, 3)
        relaxed = moments_over_time(series, times=(0.0, 0.25, 0.5))
        strict = moments_over_time(
            series, times=(0.0, 0.25, 0.5), mass_drift_tol=1e-6
        )
        assert not relaxed.mass_drift_flagged
        assert strict.mass_drift_flagged


class TestAbsError:
    def test_exact_samples_have_zero_error(self, ex1):
        grid = build_grid(ex1.rmax, 60)
        samples = GridFunction(grid, exact_concentration(ex1, 0.5, grid.midpoints))
        err = abs_error_grid(samples, ex1, 0.5)
        assert np.all(err.values == 0.0)

    def test_requires_exact_reference(self, ex2):
        grid = build_grid(ex2.rmax, 30)
        g = project_initial(ex2.init, grid)
        with pytest.raises(NoExactReferenceError):
            abs_error_grid(g, ex2, 0.5)

    def test_fvm_error_is_small(self, ex1):
        grid = build_grid(ex1.rmax, 300)
        solution = integrate(ex1, grid, (0.0, 1.0))
        err = abs_error_grid(solution.snapshots[-1], ex1, 1.0)
        assert float(np.max(err.values)) <= 5e-2

    def test_series_error_peaks_in_the_tail(self, ex1):
        grid = build_grid(ex1.rmax, 400)
        series = ahpm_terms(ex1, grid, 5)
        err = abs_error_grid(truncated_sum(series, 5, 1.0), ex1, 1.0).values
        relative = err / exact_concentration(ex1, 1.0, grid.midpoints)
        assert relative[-1] > relative[len(relative) // 4]


class TestNumberError:
    def test_cell_averages_of_exact_solution(self, ex1):
        grid = build_grid(ex1.rmax, 120)
        nodes, weights = np.polynomial.legendre.leggauss(20)
        half = 0.5 * grid.widths
        averages = np.zeros(grid.cells)
        for node, weight in zip(nodes, weights):
            x = grid.midpoints + half * node
            averages += weight * exact_concentration(ex1, 1.0, x)
        averages *= 0.5
        err = number_error(GridFunction(grid, averages), ex1, grid, 1.0)
        assert err <= 1e-10

    def test_monotone_decay_between_grids(self, ex1):
        errors = []
        for cells in (30, 60):
            grid = build_grid(ex1.rmax, cells)
            solution = integrate(ex1, grid, (0.0, 1.0))
            errors.append(number_error(solution.snapshots[-1], ex1, grid, 1.0))
        assert errors[0] > errors[1]

    def test_number_is_linear_in_the_state(self, ex1):
        grid = build_grid(ex1.rmax, 50)
        g = project_initial(ex1.init, grid)
        doubled = GridFunction(grid, 2.0 * g.values)
        n_single = float(np.sum(g.values * grid.widths))
        err = number_error(doubled, ex1, grid, 0.0)
        reference = number_error(g, ex1, grid, 0.0)
        # doubling the state shifts the total number by exactly its own size
        assert err == pytest.approx(n_single + reference, rel=1e-12)

    def test_requires_exact_reference(self, ex2):
        grid = build_grid(ex2.rmax, 30)
        g = project_initial(ex2.init, grid)
        with pytest.raises(NoExactReferenceError):
            number_error(g, ex2, grid, 0.5)


class TestEoc:
    def test_exact_halving(self):
        assert eoc(0.1, 0.05) == pytest.approx(1.0)
        assert eoc(0.1, 0.025) == pytest.approx(2.0)

    @settings(max_examples=50, deadline=None)
    @given(
        scale=st.floats(1e-6, 1e6),
        e1=st.floats(1e-9, 1e3),
        ratio=st.floats(1.01, 100.0),
    )
    def test_scale_invariance(self, scale, e1, ratio):
        e2 = e1 / ratio
        assert eoc(scale * e1, scale * e2) == pytest.approx(eoc(e1, e2), rel=1e-9)

    def test_rejects_non_positive_errors(self):
        with pytest.raises(DomainError):
            eoc(0.0, 0.1)
        with pytest.raises(DomainError):
            eoc(0.1, -0.1)

    def test_report_requires_doubling(self):
        with pytest.raises(DomainError):
            EocReport(
                case_id="ex1",
                method="fvm",
                cells=(30, 50),
                errors=(0.1, 0.05),
                orders=(None, 1.0),
            )


class TestConsecutiveTermNorms:
    def test_zeroth_term_has_unit_norm(self, ex1):
        grid = build_grid(ex1.rmax, 500)
        series = ahpm_terms(ex1, grid, 1)
        assert consecutive_term_norm(series, 0) == pytest.approx(1.0, abs=1e-3)

    def test_equals_distance_of_truncated_sums(self, ex2):
        grid = build_grid(ex2.rmax, 150)
        series = ahpm_terms(ex2, grid, 4)
        for m in (1, 2, 3, 4):
            distance = l1_distance(
                truncated_sum(series, m, ex2.tend),
                truncated_sum(series, m - 1, ex2.tend),
            )
            assert consecutive_term_norm(series, m) == pytest.approx(
                distance, abs=1e-12
            )

    def test_zero_term_has_zero_norm(self, ex1):
        grid = build_grid(ex1.rmax, 20)
        zero = TimePoly(grid, np.zeros((1, 20)))
        series = SeriesSolution(
            method="ahpm", case=ex1, grid=grid, terms=(zero, zero)
        )
        assert consecutive_term_norm(series, 1) == 0.0


class TestGeometricBound:
    def test_reference_value(self):
        assert geometric_error_bound(0.5, 3, 1.0) == pytest.approx(0.25)

    def test_halves_with_each_order(self):
        for m in range(1, 6):
            ratio = geometric_error_bound(0.5, m + 1, 1.0) / geometric_error_bound(
                0.5, m, 1.0
            )
            assert ratio == pytest.approx(0.5)

    @settings(max_examples=40, deadline=None)
    @given(
        contraction=st.floats(0.05, 0.95),
        m=st.integers(0, 30),
        norm=st.floats(1e-6, 1e3),
    )
    def test_monotone_in_order_and_contraction(self, contraction, m, norm):
        bound = geometric_error_bound(contraction, m, norm)
        assert geometric_error_bound(contraction, m + 1, norm) < bound
        if contraction + 0.02 < 1.0:
            assert geometric_error_bound(contraction + 0.02, m, norm) > bound

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            geometric_error_bound(1.0, 2, 1.0)
        with pytest.raises(DomainError):
            geometric_error_bound(0.5, -1, 1.0)

    def test_contraction_combiner(self):
        assert ham_contraction(0.3, -0.9) == pytest.approx(0.37)
        assert ham_contraction(0.0, -1.0) == 0.0
