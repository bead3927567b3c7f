"""Single-mode squeezing budget through lossy stages.

Loss acts like a beam splitter that admixes vacuum:

    Var_out = eta * Var_in + (1 - eta) * Var_vac

with the vacuum (shot-noise) variance normalized to 1, i.e. 0 dB.
Squeezing levels are quoted in dB relative to shot noise (negative =
squeezed); uncertainties propagate to first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["SqueezingLevel", "LossStage", "NoiseBudget", "Verdict",
           "loss_variance", "budget", "db_from_linear", "linear_from_db",
           "excess_noise_verdict"]

LN10 = math.log(10.0)


@dataclass(frozen=True)
class SqueezingLevel:
    """Noise variance in dB relative to shot noise, with 1-sigma error."""

    variance_db: float
    uncertainty_db: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.variance_db):
            raise ValueError("variance must be finite")
        if self.uncertainty_db < 0:
            raise ValueError("uncertainty must be >= 0")

    @property
    def linear(self) -> float:
        return linear_from_db(self.variance_db)


@dataclass(frozen=True)
class LossStage:
    """One lossy element with transmission eta in [0, 1]."""

    label: str
    eta: float
    eta_uncertainty: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {self.eta}")
        if self.eta_uncertainty < 0:
            raise ValueError("uncertainty must be >= 0")


@dataclass(frozen=True)
class NoiseBudget:
    """Input level, loss chain and the resulting predicted output."""

    input: SqueezingLevel
    stages: tuple[LossStage, ...]
    predicted_output: SqueezingLevel

    @property
    def total_eta(self) -> float:
        eta = 1.0
        for s in self.stages:
            eta *= s.eta
        return eta


def db_from_linear(v: float) -> float:
    """10 log10(v); rejects non-positive variances."""
    if v <= 0:
        raise ValueError("linear variance must be positive")
    return 10.0 * math.log10(v)


def linear_from_db(d: float) -> float:
    """Inverse of :func:`db_from_linear`."""
    return 10.0 ** (d / 10.0)


def loss_variance(var_in: float, eta: float) -> float:
    """Beam-splitter relation: eta * var_in + (1 - eta) * 1."""
    if var_in <= 0:
        raise ValueError("input variance must be positive")
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmission must lie in [0, 1]")
    return eta * var_in + (1.0 - eta)


def budget(input_level: SqueezingLevel, stages) -> NoiseBudget:
    """Compose the loss chain and predict the output squeezing.

    Transmissions multiply (stage order is irrelevant); the variance
    relation is applied once with the product.  Uncertainties of the input
    level and of every stage are combined to first order and reported in
    dB on the predicted output.
    """
    stages = tuple(stages)
    eta = 1.0
    for s in stages:
        eta *= s.eta
    var_in = input_level.linear
    var_out = loss_variance(var_in, eta)

    # first-order propagation: d var_out / d var_in = eta,
    # d var_out / d eta_i = (var_in - 1) * eta / eta_i
    sigma_var_in = var_in * LN10 / 10.0 * input_level.uncertainty_db
    sq = (eta * sigma_var_in) ** 2
    for s in stages:
        if s.eta > 0:
            deriv = (var_in - 1.0) * eta / s.eta
        else:
            # chain transmission is 0: output pinned at shot noise except
            # through this stage's own derivative
            partial = 1.0
            for other in stages:
                if other is not s:
                    partial *= other.eta
            deriv = (var_in - 1.0) * partial
        sq += (deriv * s.eta_uncertainty) ** 2
    sigma_var_out = math.sqrt(sq)
    sigma_db = 10.0 / LN10 * sigma_var_out / var_out

    predicted = SqueezingLevel(variance_db=db_from_linear(var_out),
                               uncertainty_db=sigma_db)
    return NoiseBudget(input=input_level, stages=stages, predicted_output=predicted)


@dataclass(frozen=True)
class Verdict:
    """Outcome of the excess-noise consistency check."""

    consistent: bool
    excess_db: float = 0.0      # dB beyond the combined 1-sigma bound

    def __str__(self):
        return "consistent" if self.consistent else f"excess({self.excess_db:.2f} dB)"


def excess_noise_verdict(measured: SqueezingLevel,
                         predicted: SqueezingLevel) -> Verdict:
    """Consistent iff |measured - predicted| <= root-sum-square of errors."""
    diff = abs(measured.variance_db - predicted.variance_db)
    bound = math.hypot(measured.uncertainty_db, predicted.uncertainty_db)
    if diff <= bound:
        return Verdict(consistent=True)
    return Verdict(consistent=False, excess_db=diff - bound)
