"""Perturbation profile: closed-form values, knots, admissibility battery."""

import numpy as np
import pytest

from levymv.perturbation import (PerturbationParams, perturbation_profile,
                                 perturbation_profile_deriv, verify_h1)
from levymv.rng import substream


def params(gamma=1.0, eps=0.01, alpha=1.5, k1=1.0):
    return PerturbationParams(gamma=gamma, eps=eps, alpha=alpha, k1_bound=k1)


class TestProfileValues:
    def test_vanishes_at_band_edge_exactly(self):
        p = params()
        assert perturbation_profile(1.0, p) == 0.0
        assert perturbation_profile(-1.0, p) == 0.0

    def test_first_knot_value(self):
        p = params(gamma=1.3, eps=0.02)
        assert perturbation_profile(0.02, p) == pytest.approx(0.02 ** 2.3, rel=1e-14)

    def test_power_growth_below_first_knot(self):
        p = params(gamma=0.9, eps=0.05)
        y = 0.01
        assert perturbation_profile(y, p) == pytest.approx(y ** 1.9, rel=1e-14)

    def test_evenness(self):
        p = params()
        rng = substream(300)
        y = rng.uniform(0.0, 1.0, 200)
        assert np.array_equal(perturbation_profile(y, p),
                              perturbation_profile(-y, p))

    def test_linear_tail_form_matches_blend_continuation(self):
        # the linear piece written as c(1+g)e^g (1-y) must agree with the
        # bookkeeping form (1+g-c)e^(1+g) - c(1+g)e^g (y-2e)
        p = params(gamma=1.0, eps=0.01)
        g, e, c = p.gamma, p.eps, p.c_coeff
        ys = np.linspace(2 * e, 1.0, 500)
        alt = (1 + g - c) * e ** (1 + g) - c * (1 + g) * e ** g * (ys - 2 * e)
        got = perturbation_profile(ys, p)
        assert np.max(np.abs(got - alt)) < 1e-15

    def test_out_of_band_rejected(self):
        with pytest.raises(ValueError):
            perturbation_profile(1.2, params())
        with pytest.raises(ValueError):
            perturbation_profile_deriv(-1.01, params())

    def test_derivative_matches_finite_differences(self):
        p = params(gamma=1.2, eps=0.03)
        rng = substream(301)
        ys = rng.uniform(-0.95, 0.95, 100)
        h = 1e-7
        fd = (perturbation_profile(ys + h, p)
              - perturbation_profile(ys - h, p)) / (2 * h)
        got = perturbation_profile_deriv(ys, p)
        assert np.max(np.abs(fd - got)) < 1e-5

    def test_derivative_is_odd(self):
        p = params()
        ys = np.linspace(0.01, 0.99, 50)
        assert np.allclose(perturbation_profile_deriv(-ys, p),
                           -perturbation_profile_deriv(ys, p), atol=1e-15)

    def test_maximum_sits_in_blending_region(self):
        p = params(gamma=1.0, eps=0.01)
        ys = np.linspace(0.0, 1.0, 200_001)
        kv = perturbation_profile(ys, p)
        argmax_y = ys[int(np.argmax(kv))]
        assert p.eps <= argmax_y <= 2 * p.eps


class TestParamsValidation:
    def test_gamma_below_half_alpha_rejected(self):
        with pytest.raises(ValueError):
            params(gamma=0.7, alpha=1.5)

    def test_eps_domain(self):
        with pytest.raises(ValueError):
            params(eps=0.5)
        with pytest.raises(ValueError):
            params(eps=0.0)

    def test_alpha_domain(self):
        with pytest.raises(ValueError):
            PerturbationParams(gamma=1.5, eps=0.01, alpha=2.0)

    def test_blending_constant_formula(self):
        p = params(gamma=1.0, eps=0.01)
        expected = 2.0 * 0.01 / (2.0 - 0.01 * 3.0)
        assert p.c_coeff == pytest.approx(expected, rel=1e-14)


class TestVerifyH1:
    def test_reference_parameters_pass_everything(self):
        report = verify_h1(params(gamma=1.0, eps=0.01, alpha=1.5, k1=1.0))
        assert report.all_passed
        for check in report.checks:
            assert check.passed, check.name

    def test_c1_patching_margin(self):
        report = verify_h1(params())
        assert report["c1_patching"].margin > 0.0

    def test_closed_form_bounds_have_positive_margin(self):
        report = verify_h1(params())
        for name in ("sup_profile_bound", "profile_over_y_bound",
                     "profile_smallness", "deriv_smallness"):
            assert report[name].margin > 0.0, name

    def test_square_integral_head_exponent(self):
        # k^2 beta1 ~ y^(1+2g-a) near 0; the analytic head uses that exponent
        report = verify_h1(params(gamma=1.0, alpha=1.5))
        det = report["square_integral_converges"].details
        assert det["head_exponent"] == pytest.approx(2 + 2 * 1.0 - 1.5)
        vals = det["values"]
        assert abs(vals[-1] - vals[-2]) < 1e-3 * abs(vals[-1])

    def test_displacement_ratio_bounded_by_half(self):
        report = verify_h1(params())
        assert report["displacement_ratio_bound"].details["sup"] <= 0.5

    def test_threshold_case_flagged(self):
        # eps exactly at ((1+K1)(1+gamma))^(-1/gamma): strict inequality fails
        k1, gamma = 1.0, 1.0
        eps_threshold = ((1 + k1) * (1 + gamma)) ** (-1 / gamma)
        report = verify_h1(params(gamma=gamma, eps=eps_threshold, k1=k1))
        assert not report["eps_below_profile_threshold"].passed
        assert not report.all_passed

    def test_too_large_eps_breaks_ratio_bound(self):
        report = verify_h1(params(eps=0.3, gamma=1.0, alpha=1.5, k1=1.0))
        assert not report.all_passed

    def test_report_serializes(self):
        import json
        payload = verify_h1(params()).to_json_dict()
        text = json.dumps(payload)
        assert "displacement_ratio_bound" in text
        assert payload["all_passed"] is True
