"""Tests for bound assembly from MI profiles and CGF bounds."""

import math

import numpy as np
import pytest

from genbound import (
    DomainError,
    MiProfile,
    chi_squared_neg_cgf,
    full_mi_bound,
    ismi_bound,
    random_product_joint,
    sub_gaussian_cgf,
    sub_gaussian_ismi,
)
from genbound.bounds import profile_from_discrete_joint


class TestMiProfile:
    def test_rejects_negative_entries(self):
        with pytest.raises(DomainError):
            MiProfile(np.array([0.1, -0.2]))

    def test_clamps_estimator_noise(self):
        p = MiProfile(np.array([1e-10, -1e-10]))
        assert np.all(p.clamped() >= 0.0)


class TestIsmiBound:
    def test_zero_information_gives_zero_bound(self):
        profile = MiProfile(np.zeros(7))
        b = ismi_bound(profile, sub_gaussian_cgf(1.0), sub_gaussian_cgf(1.0))
        assert b.gen_upper == 0.0 and b.neg_gen_upper == 0.0

    def test_single_sample_sub_gaussian_value(self):
        profile = MiProfile(np.array([2.0]))
        b = ismi_bound(profile, sub_gaussian_cgf(1.0), sub_gaussian_cgf(1.0))
        assert b.gen_upper == pytest.approx(2.0)

    def test_symmetric_cgf_gives_equal_sides(self):
        profile = MiProfile(np.array([0.3, 0.8, 1.4]))
        b = ismi_bound(profile, sub_gaussian_cgf(0.7), sub_gaussian_cgf(0.7))
        assert b.gen_upper == b.neg_gen_upper

    def test_one_sided_use_reports_inf_on_the_other_side(self):
        profile = MiProfile(np.array([0.5]))
        b = ismi_bound(profile, None, chi_squared_neg_cgf(2, 1.0))
        assert math.isfinite(b.gen_upper)
        assert math.isinf(b.neg_gen_upper)

    def test_monotone_in_each_entry(self):
        base = np.array([0.2, 0.5, 0.9])
        psi = chi_squared_neg_cgf(2, 1.3)
        b0 = ismi_bound(MiProfile(base), None, psi).gen_upper
        for i in range(3):
            bumped = base.copy()
            bumped[i] += 0.3
            assert ismi_bound(MiProfile(bumped), None, psi).gen_upper >= b0


class TestSubGaussianIsmi:
    def test_closed_form_value(self):
        # R=1/2 and every I_i = 1/2: bound sqrt(2 * 1/4 * 1/2) = 1/2
        for n in (1, 3, 10):
            profile = MiProfile(np.full(n, 0.5))
            assert sub_gaussian_ismi(profile, 0.5).gen_upper == pytest.approx(0.5)

    def test_zero_information(self):
        assert sub_gaussian_ismi(MiProfile(np.zeros(4)), 1.0).gen_upper == 0.0

    def test_agrees_with_generic_assembly(self):
        rng = np.random.default_rng(0)
        values = rng.exponential(0.4, size=6)
        profile = MiProfile(values)
        via_cgf = ismi_bound(profile, sub_gaussian_cgf(0.8),
                             sub_gaussian_cgf(0.8))
        direct = sub_gaussian_ismi(profile, 0.8)
        assert via_cgf.gen_upper == pytest.approx(direct.gen_upper, rel=1e-12)


class TestFullMiBound:
    def test_infinite_information_passes_through(self):
        assert math.isinf(full_mi_bound(math.inf, 10, 1.0))

    def test_zero_information(self):
        assert full_mi_bound(0.0, 5, 1.0) == 0.0

    def test_closed_form_value(self):
        assert full_mi_bound(1.0, 2, 1.0) == pytest.approx(1.0)

    def test_rejects_negative_information(self):
        with pytest.raises(DomainError):
            full_mi_bound(-0.1, 5, 1.0)


class TestBoundOrdering:
    def test_per_sample_bound_never_worse_than_full_dataset_bound(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            n = int(rng.integers(1, 4))
            joint = random_product_joint(
                rng, int(rng.integers(2, 5)),
                [int(rng.integers(2, 4)) for _ in range(n)])
            profile = profile_from_discrete_joint(joint)
            per_sample = sub_gaussian_ismi(profile, 1.0).gen_upper
            full = full_mi_bound(profile.full_dataset, profile.n, 1.0)
            assert per_sample <= full + 1e-9
