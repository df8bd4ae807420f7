import math
from fractions import Fraction

import numpy as np
import pytest

from cbelab import (
    ConstantKernel,
    CustomKernel,
    DiscreteFragmentsBreakage,
    DomainError,
    MassUniformBreakage,
    NoExactReferenceError,
    ProductKernel,
    UnknownCaseError,
    breakage_mass_residual,
    case_ids,
    exact_concentration,
    exact_moment,
    fragment_count,
    kernel_eval,
    registry_case,
    with_overrides,
)


class TestKernels:
    def test_product_kernel_value(self):
        assert kernel_eval(ProductKernel(1.0), 2.0, 3.0) == 6.0

    def test_constant_kernel_value(self):
        assert kernel_eval(ConstantKernel(1.0), 5.0, 7.0) == 1.0

    def test_scaled_product_value(self):
        assert kernel_eval(ProductKernel(1.0 / 20.0), 2.0, 3.0) == pytest.approx(0.3)

    def test_symmetry_on_random_pairs(self, rng):
        kernels = [
            ConstantKernel(2.5),
            ProductKernel(1.0),
            ProductKernel(0.05),
            CustomKernel(lambda x, y: math.sqrt(x * y)),
        ]
        pairs = rng.uniform(1e-6, 100.0, size=(1000, 2))
        for kernel in kernels:
            for x, y in pairs:
                forward = kernel_eval(kernel, x, y)
                assert forward == kernel_eval(kernel, y, x)
                assert forward >= 0.0

    @pytest.mark.parametrize("bad", [(-1.0, 2.0), (0.0, 1.0), (1.0, 0.0)])
    def test_rejects_non_positive_sizes(self, bad):
        with pytest.raises(DomainError):
            kernel_eval(ProductKernel(1.0), *bad)

    def test_rejects_negative_rate(self):
        with pytest.raises(DomainError):
            ConstantKernel(-1.0)


class TestBreakage:
    def test_mass_uniform_residual_is_exact_zero(self):
        assert breakage_mass_residual(MassUniformBreakage(), 3.0) == 0.0

    def test_discrete_residual_is_exact_zero(self):
        law = DiscreteFragmentsBreakage((Fraction(2, 5), Fraction(3, 5)))
        assert breakage_mass_residual(law, 5.0) == 0.0

    def test_residual_zero_for_random_parents(self, rng):
        laws = [
            MassUniformBreakage(),
            DiscreteFragmentsBreakage((Fraction(2, 5), Fraction(3, 5))),
        ]
        for parent in rng.uniform(1e-6, 100.0, size=100):
            for law in laws:
                assert breakage_mass_residual(law, parent) == 0.0

    def test_rejects_incomplete_ratios(self):
        with pytest.raises(DomainError):
            DiscreteFragmentsBreakage((Fraction(1, 2),))

    def test_rejects_ratio_outside_unit_interval(self):
        with pytest.raises(DomainError):
            DiscreteFragmentsBreakage((Fraction(3, 2), Fraction(-1, 2)))

    def test_fragment_counts(self):
        assert fragment_count(MassUniformBreakage(), 3.0, 1.0) == 2.0
        two = DiscreteFragmentsBreakage((Fraction(2, 5), Fraction(3, 5)))
        assert fragment_count(two, 1.0, 9.0) == 2.0
        three = DiscreteFragmentsBreakage(
            (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2))
        )
        assert fragment_count(three, 1.0, 1.0) == 3.0


class TestExactReferences:
    def test_initial_time_reduces_to_initial_condition(self, ex1):
        x = np.linspace(0.1, 5.0, 40)
        assert exact_concentration(ex1, 0.0, x) == pytest.approx(np.exp(-x))

    def test_ex1_closed_form_value(self, ex1):
        assert exact_concentration(ex1, 1.0, 1.0) == pytest.approx(
            4.0 * math.exp(-2.0)
        )

    def test_ex2_has_no_concentration(self, ex2):
        with pytest.raises(NoExactReferenceError):
            exact_concentration(ex2, 0.5, 1.0)

    def test_ex2_zeroth_moment(self, ex2):
        assert exact_moment(ex2, 0, 1.0) == pytest.approx(1.2)

    def test_ex1_mass_is_one(self, ex1):
        for t in (0.0, 0.25, 1.0):
            assert exact_moment(ex1, 1, t) == 1.0

    def test_ex3_second_moment(self, ex3):
        assert exact_moment(ex3, 2, 0.5) == pytest.approx(2.0 * 0.5**0.48)

    def test_ex2_second_moment_unavailable(self, ex2):
        with pytest.raises(NoExactReferenceError):
            exact_moment(ex2, 2, 0.5)

    def test_ex3_moments_need_pre_blowup_times(self, ex3):
        with pytest.raises(DomainError):
            exact_moment(ex3, 0, 1.0)

    def test_moment_quadrature_consistency(self, ex1):
        # 20-point Gauss-Legendre per cell over (0, 20]; exponential tail < 1e-8
        nodes, weights = np.polynomial.legendre.leggauss(20)
        edges = np.linspace(0.0, 20.0, 201)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        for t in (0.3, 1.0):
            for n in (0, 1, 2):
                total = 0.0
                for node, weight in zip(nodes, weights):
                    x = mid + half * node
                    total += weight * float(
                        np.sum(x**n * exact_concentration(ex1, t, x) * half)
                    )
                assert total == pytest.approx(exact_moment(ex1, n, t), rel=1e-6)


class TestRegistry:
    def test_case_ids(self):
        assert case_ids() == ("ex1", "ex2", "ex3")

    def test_ex1_structure(self, ex1):
        assert isinstance(ex1.kernel, ProductKernel) and ex1.kernel.scale == 1.0
        assert isinstance(ex1.breakage, MassUniformBreakage)
        assert ex1.rmax == 10.0 and ex1.tend == 1.0
        assert ex1.reference_alpha == pytest.approx(-0.826)

    def test_ex2_structure(self, ex2):
        assert isinstance(ex2.kernel, ProductKernel)
        assert ex2.kernel.scale == pytest.approx(1.0 / 20.0)
        assert ex2.reference_alpha == pytest.approx(-0.969)

    def test_ex3_structure(self, ex3):
        assert isinstance(ex3.kernel, ConstantKernel)
        assert ex3.breakage.ratios == (Fraction(2, 5), Fraction(3, 5))
        assert ex3.tend == 0.5
        assert ex3.reference_alpha == pytest.approx(-0.829)

    def test_unknown_case(self):
        with pytest.raises(UnknownCaseError):
            registry_case("ex4")

    def test_override_validation(self, ex3):
        assert with_overrides(ex3, tend=0.9).tend == 0.9
        with pytest.raises(DomainError):
            with_overrides(ex3, tend=1.2)
        with pytest.raises(DomainError):
            with_overrides(ex3, rmax=-5.0)
