"""Two-timescale step-size schedules alpha_k = c1/(c2 k + 1)^w1, beta_k = c3/(c2 k + 1)^w2.

Convergence of the diminishing-step algorithms needs three summability
properties of the pair (alpha, beta); for this power-law family each reduces
to an inequality on the exponents, checked exactly here:

    sum alpha_k beta_k   divergent : w1 + w2 <= 1
    sum beta_k^2         finite    : w2 > 1/2
    sum alpha_k^2 beta_k finite    : 2 w1 + w2 > 1

When all three hold the weighted running-average error decays with exponent
min(2 w1, w2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COND_PRODUCT_DIVERGES = "omega1 + omega2 <= 1"
COND_BETA_SQUARE_SUMMABLE = "omega2 > 1/2"
COND_ALPHA_SQ_BETA_SUMMABLE = "2*omega1 + omega2 > 1"


@dataclass(frozen=True)
class StepSchedule:
    c1: float
    c2: float
    c3: float
    omega1: float
    omega2: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("omega1", "omega2"):
            w = getattr(self, name)
            if not 0 <= w <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")

    def alpha(self, k):
        """alpha_k; accepts scalars or arrays of iteration indices."""
        k = np.asarray(k, dtype=float)
        return self.c1 / (self.c2 * k + 1.0) ** self.omega1

    def beta(self, k):
        """beta_k; accepts scalars or arrays of iteration indices."""
        k = np.asarray(k, dtype=float)
        return self.c3 / (self.c2 * k + 1.0) ** self.omega2

    def product(self, k):
        """alpha_k * beta_k = c1 c3 / (c2 k + 1)^(omega1 + omega2)."""
        k = np.asarray(k, dtype=float)
        return self.c1 * self.c3 / (self.c2 * k + 1.0) ** (self.omega1 + self.omega2)

    def product_partial_sums(self, horizon: int) -> np.ndarray:
        """S[k] = sum_{s<k} alpha_s beta_s for k = 0..horizon (S[0] = 0)."""
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        sums = np.zeros(horizon + 1)
        if horizon > 0:
            sums[1:] = np.cumsum(self.product(np.arange(horizon)))
        return sums

    def effective_dp_coefficients(self) -> tuple[float, float]:
        """(c4, c5) of the product envelope alpha_k beta_k evaluated as if hyperbolic.

        Exact only when omega1 + omega2 = 1; see dp_product_check.
        """
        return self.c1 * self.c3, self.c2


@dataclass(frozen=True)
class ScheduleVerdict:
    passes: bool
    failed_conditions: tuple[str, ...]
    rate_exponent: float | None


def check_conditions(schedule: StepSchedule) -> ScheduleVerdict:
    """Exact exponent tests for the three summability conditions."""
    w1, w2 = schedule.omega1, schedule.omega2
    failed = []
    if not w1 + w2 <= 1.0:
        failed.append(COND_PRODUCT_DIVERGES)
    if not w2 > 0.5:
        failed.append(COND_BETA_SQUARE_SUMMABLE)
    if not 2.0 * w1 + w2 > 1.0:
        failed.append(COND_ALPHA_SQ_BETA_SUMMABLE)
    passes = not failed
    rate = min(2.0 * w1, w2) if passes else None
    return ScheduleVerdict(passes=passes, failed_conditions=tuple(failed), rate_exponent=rate)


def dp_product_check(schedule: StepSchedule) -> tuple[float, float] | None:
    """(c4, c5) with alpha_k beta_k = c4/(c5 k + 1), or None.

    The privacy closed form requires the product to be exactly hyperbolic,
    which for this family means omega1 + omega2 = 1; then
    alpha_k beta_k = c1 c3 / (c2 k + 1).
    """
    if abs(schedule.omega1 + schedule.omega2 - 1.0) > 1e-12:
        return None
    return schedule.effective_dp_coefficients()
