"""Spectral Galerkin laboratory for cutoff-modified Navier-Stokes dynamics.

Divergence-free Fourier discretization of the periodic box, the L4-cutoff
advection operator and its monotonicity structure, exactly-sampled
Ornstein-Uhlenbeck forcing over seeded two-sided Wiener paths, an
exponential second-order integrator for the transformed pathwise system,
and scripted experiments for contraction, pullback absorption, the
large-cutoff limit, and invariant-measure statistics.
"""

__version__ = "0.1.0"
