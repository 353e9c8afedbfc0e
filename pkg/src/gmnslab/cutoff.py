"""L4-norm cutoff of the advection term and the associated drift operator.

The modified nonlinearity scales the advection by a factor

    F(r) = min(1, level / r)

of the L4 norm r of the advected state; the factor is 1 below the cutoff
level and decays like level/r above it, which caps the strength of the
nonlinear term globally.  F(0) = 1 by continuous extension so the zero field
is admissible.

The drift operator of the transformed system is

    G(v) = nu * A v + B_F(v + z),    B_F(w) = F(|w|_L4) * B(w, w),

and it is monotone up to a zeroth-order correction: for all v1, v2

    <G(v1) - G(v2), v1 - v2> + eta |v1 - v2|_H^2  >=  (nu/2) |v1 - v2|_V^2

with eta = 7^7 * level^8 / (2^13 * nu^7).  `monotonicity_gap` evaluates the
left-minus-right side directly so the inequality can be fuzzed numerically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .spectral import (
    SpectralField,
    _check_same_basis,
    inner_H,
    nonlinear_B,
    norm_H,
    norm_L4,
    norm_V,
    stokes_apply,
)


@dataclass(frozen=True)
class CutoffParams:
    """Cutoff level and viscosity; level may be math.inf to disable the cutoff."""

    level: float
    nu: float

    def __post_init__(self):
        if not self.level > 0:
            raise ValueError("cutoff level must be positive")
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError("viscosity must be positive and finite")

    @property
    def eta(self) -> float:
        """Monotonicity correction constant 7^7 * level^8 / (2^13 * nu^7)."""
        return 7.0**7 * self.level**8 / (2.0**13 * self.nu**7)


def cutoff_factor(r: float, level: float) -> float:
    """F(r) = min(1, level/r), with F(0) = 1; exact 1.0 for r <= level."""
    if level <= 0:
        raise ValueError("cutoff level must be positive")
    if r < 0:
        raise ValueError("norm argument must be nonnegative")
    if r <= level:
        return 1.0
    return level / r


def cutoff_product_bound(u: SpectralField, level: float) -> float:
    """r * F(r) for r = |u|_L4; equals min(r, level), hence <= level exactly."""
    r = norm_L4(u)
    return r * cutoff_factor(r, level)


def cutoff_lipschitz_sides(
    u: SpectralField, v: SpectralField, level: float
) -> tuple[float, float]:
    """Both sides of |F(|u|) - F(|v|)| <= (1/level) F(|u|) F(|v|) |u - v|_L4."""
    _check_same_basis(u, v)
    ru, rv = norm_L4(u), norm_L4(v)
    lhs = abs(cutoff_factor(ru, level) - cutoff_factor(rv, level))
    rhs = (
        cutoff_factor(ru, level)
        * cutoff_factor(rv, level)
        * norm_L4(u - v)
        / level
    )
    return lhs, rhs


def cutoff_advection(u: SpectralField, level: float) -> SpectralField:
    """B_F(u) = F(|u|_L4) * B(u, u); satisfies <B_F(u), u> = 0."""
    f = cutoff_factor(norm_L4(u), level)
    bu = nonlinear_B(u, u)
    if f == 1.0:
        return bu
    return bu * f


def drift_apply(v: SpectralField, z: SpectralField, params: CutoffParams) -> SpectralField:
    """G(v) = nu * A v + B_F(v + z)."""
    _check_same_basis(v, z)
    return params.nu * stokes_apply(v) + cutoff_advection(v + z, params.level)


def monotonicity_gap(
    v1: SpectralField, v2: SpectralField, z: SpectralField, params: CutoffParams
) -> float:
    """<G(v1)-G(v2), v1-v2> + eta |v1-v2|_H^2 - (nu/2) |v1-v2|_V^2.

    Nonnegative up to rounding; callers compare against
    -gap_tolerance(v1, v2) rather than 0 so that exact-zero cases (v1 = v2)
    do not trip on floating-point noise.
    """
    d = v1 - v2
    pairing = params.nu * norm_V(d) ** 2 + inner_H(
        cutoff_advection(v1 + z, params.level) - cutoff_advection(v2 + z, params.level),
        d,
    )
    return pairing + params.eta * norm_H(d) ** 2 - 0.5 * params.nu * norm_V(d) ** 2


def gap_tolerance(v1: SpectralField, v2: SpectralField) -> float:
    """Magnitude-scaled rounding allowance for the monotonicity inequality."""
    return 1e-10 * (1.0 + norm_V(v1) ** 2 + norm_V(v2) ** 2)


def advection_lipschitz_ratio(u: SpectralField, v: SpectralField,
                              level: float = math.inf) -> float:
    """Empirical local Lipschitz ratio |B_F(u) - B_F(v)|_dual / |u - v|_V.

    No closed-form constant is asserted anywhere; this diagnostic only
    measures the ratio so local Lipschitz behavior can be logged over balls
    of interest (level = inf measures the unmodified advection).
    """
    from .spectral import norm_dual

    d = u - v
    dv = norm_V(d)
    if dv == 0.0:
        return 0.0
    diff = cutoff_advection(u, level) - cutoff_advection(v, level)
    return norm_dual(diff) / dv


def write_fuzz_report(path, rows) -> None:
    """CSV fuzz report: one row per case (case id, seed, lhs, rhs, margin)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case", "seed", "lhs", "rhs", "margin"])
        for case, seed, lhs, rhs, margin in rows:
            writer.writerow(
                [case, seed, f"{lhs:.17g}", f"{rhs:.17g}", f"{margin:.17g}"]
            )
