"""Squeezing loss algebra: beam-splitter relation, budgets, verdicts."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slmsqueeze.quantumnoise import (LossStage, SqueezingLevel, Verdict, budget,
                                     db_from_linear, excess_noise_verdict,
                                     linear_from_db, loss_variance)


class TestLossVariance:
    def test_lossless(self):
        assert loss_variance(0.42, 1.0) == 0.42

    def test_full_loss_is_shot_noise(self):
        assert loss_variance(0.42, 0.0) == 1.0

    def test_reference_numbers(self):
        # -3.0 dB input through eta = 0.52: 0.7406 linear, -1.30 dB
        var_in = linear_from_db(-3.0)
        assert var_in == pytest.approx(0.50119, abs=1e-5)
        out = loss_variance(var_in, 0.52)
        assert out == pytest.approx(0.740617, abs=1e-5)
        assert db_from_linear(out) == pytest.approx(-1.30406, abs=1e-4)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            loss_variance(-0.1, 0.5)
        with pytest.raises(ValueError):
            loss_variance(0.5, 1.2)

    @given(st.floats(0.01, 100.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_composition_identity(self, v, eta1, eta2):
        chained = loss_variance(loss_variance(v, eta1), eta2)
        direct = loss_variance(v, eta1 * eta2)
        assert chained == pytest.approx(direct, abs=1e-12, rel=1e-12)

    @given(st.floats(0.01, 0.999))
    def test_squeezing_never_crosses_shot_noise(self, v):
        for eta in np.linspace(0.0, 1.0, 23):
            out = loss_variance(v, float(eta))
            assert v <= out <= 1.0

    @given(st.floats(1.001, 100.0))
    def test_antisqueezing_decays_towards_shot_noise(self, v):
        for eta in np.linspace(0.0, 0.999, 17):
            out = loss_variance(v, float(eta))
            assert 1.0 <= out < v

    def test_monotone_in_eta_for_squeezed_input(self):
        v = linear_from_db(-3.0)
        etas = np.linspace(0.0, 1.0, 101)
        outs = [loss_variance(v, float(e)) for e in etas]
        assert all(a > b for a, b in zip(outs, outs[1:]))


class TestDbConversions:
    def test_shot_noise_is_zero_db(self):
        assert db_from_linear(1.0) == 0.0

    def test_half_variance(self):
        assert db_from_linear(0.5) == pytest.approx(-3.0103, abs=1e-4)

    def test_round_trip(self):
        assert linear_from_db(db_from_linear(linear_from_db(-1.34))) \
            == pytest.approx(linear_from_db(-1.34), rel=1e-12)

    @given(st.floats(-60.0, 60.0))
    def test_round_trip_property(self, d):
        assert db_from_linear(linear_from_db(d)) == pytest.approx(d, abs=1e-12)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(ValueError):
            db_from_linear(0.0)
        with pytest.raises(ValueError):
            db_from_linear(-1.0)


class TestBudget:
    def test_device_stage_chain(self):
        # eta_d, eta_r and the grating-order factor of the reference bench
        stages = [LossStage("diffraction", 0.90), LossStage("reflectivity", 0.61),
                  LossStage("grating", 0.91)]
        nb = budget(SqueezingLevel(-3.0), stages)
        assert nb.total_eta == pytest.approx(0.49959, abs=1e-5)
        assert nb.predicted_output.variance_db == pytest.approx(-1.245, abs=2e-3)

    def test_bg_total(self):
        nb = budget(SqueezingLevel(-3.0), [LossStage("conversion", 0.47)])
        assert nb.predicted_output.variance_db == pytest.approx(-1.16, abs=5e-3)

    def test_arbitrary_pattern(self):
        nb = budget(SqueezingLevel(-3.0), [LossStage("conversion", 0.15)])
        assert nb.predicted_output.variance_db == pytest.approx(-0.3377, abs=1e-3)

    def test_lossless_chain_passes_input_through(self):
        nb = budget(SqueezingLevel(-3.0, 0.3), [LossStage("nothing", 1.0)])
        assert nb.predicted_output.variance_db == pytest.approx(-3.0, abs=1e-12)
        assert nb.predicted_output.uncertainty_db == pytest.approx(0.3, rel=1e-9)

    def test_stage_order_irrelevant(self):
        a = [LossStage("x", 0.9), LossStage("y", 0.5), LossStage("z", 0.7)]
        nb1 = budget(SqueezingLevel(-2.5, 0.2), a)
        nb2 = budget(SqueezingLevel(-2.5, 0.2), list(reversed(a)))
        assert nb1.predicted_output == nb2.predicted_output

    def test_uncertainty_grows_with_stage_uncertainty(self):
        tight = budget(SqueezingLevel(-3.0, 0.0),
                       [LossStage("c", 0.5, eta_uncertainty=0.0)])
        loose = budget(SqueezingLevel(-3.0, 0.0),
                       [LossStage("c", 0.5, eta_uncertainty=0.05)])
        assert tight.predicted_output.uncertainty_db == 0.0
        assert loose.predicted_output.uncertainty_db > 0.0

    def test_stage_validation(self):
        with pytest.raises(ValueError):
            LossStage("bad", 1.5)
        with pytest.raises(ValueError):
            LossStage("bad", 0.5, eta_uncertainty=-0.1)

    def test_zero_eta_stage(self):
        nb = budget(SqueezingLevel(-3.0, 0.3),
                    [LossStage("block", 0.0, eta_uncertainty=0.01)])
        assert nb.predicted_output.variance_db == pytest.approx(0.0, abs=1e-12)


class TestExcessNoiseVerdict:
    def test_reference_row_consistent(self):
        v = excess_noise_verdict(SqueezingLevel(-1.34, 0.32),
                                 SqueezingLevel(-1.30, 0.05))
        assert v.consistent
        assert str(v) == "consistent"

    def test_excess_amount(self):
        v = excess_noise_verdict(SqueezingLevel(-0.50, 0.10),
                                 SqueezingLevel(-1.30, 0.05))
        assert not v.consistent
        # |0.80| beyond sqrt(0.10^2 + 0.05^2)
        assert v.excess_db == pytest.approx(0.80 - math.hypot(0.10, 0.05),
                                            abs=1e-12)
        assert v.excess_db == pytest.approx(0.6882, abs=1e-4)

    def test_exact_match_consistent(self):
        v = excess_noise_verdict(SqueezingLevel(-1.0, 0.0),
                                 SqueezingLevel(-1.0, 0.0))
        assert v.consistent and v.excess_db == 0.0


class TestBulkProperties:
    """Vectorized random sweeps; the acceptance suite runs the 1e4-sample
    version with its stated tolerances."""

    def test_random_composition_and_fixed_point(self, rng):
        v = rng.uniform(0.05, 20.0, 1000)
        e1 = rng.uniform(0.0, 1.0, 1000)
        e2 = rng.uniform(0.0, 1.0, 1000)
        chained = e2 * (e1 * v + (1 - e1)) + (1 - e2)
        direct = (e1 * e2) * v + (1 - e1 * e2)
        assert np.max(np.abs(chained - direct)) < 1e-12
        assert np.all(np.abs((1.0 * e1 + (1 - e1)) - 1.0) < 1e-15)
