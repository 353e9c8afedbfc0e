"""Two-sided seeded Wiener paths and the exactly-sampled OU layer.

The driving noise is a cylindrical Wiener process on the truncated basis with
a spectral amplitude law sigma_k = amplitude * |k|^(-2s): one independent
scalar Brownian motion per real basis coordinate (mode, polarization,
cos/sin), all derived from a single seed through counter-based keyed streams.
A path is a table of standard normal draws on a uniform grid of resolution
dt_path; the time-shift map is a view of the same table with relabeled time
indices, so shifted and unshifted paths consume literally identical draws.

The stochastic layer z solves dz + (nu*A + chi*I) z dt = dW and is advanced
mode-by-mode with the exact one-step transition

    z <- exp(-mu*h) z + sigma * sqrt((1 - exp(-2*mu*h)) / (2*mu)) * xi,

mu = nu*|k|^2 + chi, using the path's draws xi, so there is no
time-discretization bias at any resolution; the stationary law (per-mode
variance sigma^2 / (2*mu)) is available for exact initialization, which
replaces an infinite burn-in.  Runs are anchored at the start of the path
window; under the index relabeling of the shift map this start is invariant,
which makes the shift covariance z(shifted path)(t) = z(path)(t+s) hold
bit-exactly rather than statistically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .seeding import derive_key, philox
from .spectral import GalerkinBasis, SpectralField
from .seeding import labeled_generator

# gamma-radonifying regularity floor for the noise spectrum (see NoiseSpectrum).
MIN_REGULARITY = 0.75


@dataclass(frozen=True)
class NoiseSpectrum:
    """Per-mode noise amplitudes sigma_k = amplitude * |k|^(-2s).

    s is the regularity exponent of the reproducing-kernel space of the
    noise; s > 3/4 is required for the infinite-dimensional limit to make
    sense and is enforced unless allow_rough is set (at a finite truncation
    any s is computable, so the override exists for exploration).  delta is
    metadata recording the auxiliary exponent of that limit, constrained to
    delta < 1/2 < s at construction; it plays no computational role here.
    """

    s: float = 1.0
    amplitude: float = 1.0
    delta: float = 0.25
    allow_rough: bool = False

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("noise amplitude must be nonnegative")
        if self.s <= MIN_REGULARITY and not self.allow_rough:
            raise ValueError(
                f"regularity s={self.s} requires s > {MIN_REGULARITY}"
                " (pass allow_rough=True to override at finite truncation)"
            )
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if self.delta >= self.s:
            raise ValueError("compatibility requires delta < s")

    def mode_amplitudes(self, basis: GalerkinBasis) -> np.ndarray:
        """sigma per half-space mode, shape (n_half_modes,)."""
        lam = basis.eigenvalues.astype(np.float64)
        return self.amplitude * lam ** (-self.s)

    def coordinate_amplitudes(self, basis: GalerkinBasis) -> np.ndarray:
        """sigma per real coordinate (mode, polarization, cos/sin) in the
        flat layout used by the path table, shape (4 * n_half_modes,)."""
        return np.repeat(self.mode_amplitudes(basis), 4)


@dataclass(frozen=True)
class WienerPath:
    """Seeded two-sided increment table on a uniform grid.

    The table holds standard normal draws xi[n, alpha] for grid cells
    [t(n), t(n) + dt_path), one column per real basis coordinate.  Rows are
    generated lazily, one keyed Philox stream per coordinate, so parallel
    materialization and partial access are reproducible.  `offset` implements
    the time-shift map: draw(n) of a shifted path reads the parent table at
    n + offset, and the valid time window moves accordingly.
    """

    seed: int
    dt_path: float
    t_origin: float
    steps: int
    spectrum: NoiseSpectrum
    basis: GalerkinBasis
    offset: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.t_origin) and math.isfinite(self.dt_path)):
            raise ValueError("path bounds must be finite")
        if self.dt_path <= 0 or self.steps < 1:
            raise ValueError("need dt_path > 0 and at least one step")
        object.__setattr__(self, "_rows", {})
        object.__setattr__(self, "_table", None)

    # ---- window bookkeeping -------------------------------------------

    @property
    def n_coordinates(self) -> int:
        return 4 * self.basis.n_half_modes

    @property
    def t_min(self) -> float:
        return self.t_origin + (0 - self.offset) * self.dt_path

    @property
    def t_max(self) -> float:
        return self.t_origin + (self.steps - self.offset) * self.dt_path

    def index_of(self, t: float) -> int:
        """Grid index of time t relative to the (fixed) table origin."""
        n = (t - self.t_origin) / self.dt_path
        n_round = round(n)
        if abs(n - n_round) > 1e-9 * max(1.0, abs(n)):
            raise ValueError(f"time {t} is not on the path grid (dt_path={self.dt_path})")
        return int(n_round)

    def _table_index(self, n: int) -> int:
        j = n + self.offset
        if not 0 <= j < self.steps:
            raise ValueError(
                f"grid index {n} outside the path window [{self.t_min}, {self.t_max}]"
            )
        return j

    # ---- draws ----------------------------------------------------------

    def _row(self, alpha: int) -> np.ndarray:
        rows = self._rows
        row = rows.get(alpha)
        if row is None:
            gen = philox(derive_key(self.seed, "wiener-table"), alpha)
            row = gen.standard_normal(self.steps)
            row.setflags(write=False)
            rows[alpha] = row
        return row

    def normals(self, n_start: int, count: int) -> np.ndarray:
        """Standard normal draws for grid cells n_start .. n_start+count-1,
        shape (count, n_coordinates)."""
        j0 = self._table_index(n_start)
        self._table_index(n_start + count - 1)
        return self._full_table()[j0 : j0 + count]

    def normals_row(self, alpha: int, n_start: int, count: int) -> np.ndarray:
        """Draws of a single coordinate (cheap: only that row materializes)."""
        j0 = self._table_index(n_start)
        self._table_index(n_start + count - 1)
        return self._row(alpha)[j0 : j0 + count]

    def increments(self, n_start: int, count: int) -> np.ndarray:
        """Wiener increments (normal draws scaled by sqrt(dt_path))."""
        return self.normals(n_start, count) * math.sqrt(self.dt_path)

    def _full_table(self) -> np.ndarray:
        if self._table is None:
            table = np.empty((self.steps, self.n_coordinates))
            for alpha in range(self.n_coordinates):
                table[:, alpha] = self._row(alpha)
            table.setflags(write=False)
            object.__setattr__(self, "_table", table)
        return self._table

    # ---- manifest -------------------------------------------------------

    def manifest(self) -> dict:
        """Everything needed to regenerate this path exactly on any machine."""
        return {
            "seed": self.seed,
            "dt_path": self.dt_path,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "offset": self.offset,
            "spectrum": {
                "s": self.spectrum.s,
                "amplitude": self.spectrum.amplitude,
                "delta": self.spectrum.delta,
                "allow_rough": self.spectrum.allow_rough,
            },
            "kmax": self.basis.kmax,
        }

    def manifest_json(self) -> str:
        return json.dumps(self.manifest(), sort_keys=True)


def make_path(
    seed: int,
    dt_path: float,
    t_min: float,
    t_max: float,
    spectrum: NoiseSpectrum,
    basis: GalerkinBasis,
) -> WienerPath:
    """Lazily-materializable increment table covering [t_min, t_max]."""
    if not (math.isfinite(t_min) and math.isfinite(t_max)) or t_min >= t_max:
        raise ValueError("need finite t_min < t_max")
    steps = int(math.ceil(round((t_max - t_min) / dt_path, 9)))
    return WienerPath(seed, dt_path, t_min, steps, spectrum, basis)


def path_from_manifest(manifest: dict, basis: GalerkinBasis | None = None) -> WienerPath:
    spec = NoiseSpectrum(**manifest["spectrum"])
    if basis is None:
        from .spectral import build_basis

        basis = build_basis(manifest["kmax"])
    dt_path = manifest["dt_path"]
    offset = manifest.get("offset", 0)
    steps = int(round((manifest["t_max"] - manifest["t_min"]) / dt_path))
    t_origin = manifest["t_min"] + offset * dt_path
    return WienerPath(
        manifest["seed"], dt_path, t_origin, steps, spec, basis, offset
    )


def shift_path(path: WienerPath, shift_s: float) -> WienerPath:
    """Time shift: the view reads the parent draws at index n + s/dt_path.

    Only integer multiples of dt_path are accepted; Wiener paths are not
    interpolated.  shift_path(path, 0) is the identity and shifts compose.
    The grid origin stays fixed, so the window moves to
    [t_min - s, t_max - s] while the table start keeps its draws; runs
    anchored at the window start therefore consume identical draws on every
    shifted view.
    """
    m = shift_s / path.dt_path
    m_round = round(m)
    if abs(m - m_round) > 1e-9 * max(1.0, abs(m)):
        raise ValueError("shift must be an integer multiple of dt_path")
    m_round = int(m_round)
    if m_round == 0:
        return path
    return replace(path, offset=path.offset + m_round)


# ---- Ornstein-Uhlenbeck layer ---------------------------------------------


@dataclass(frozen=True)
class OUState:
    """Stochastic layer z at one instant, with its damping parameters."""

    time: float
    z: SpectralField
    chi: float
    nu: float

    def __post_init__(self):
        if self.chi < 0 or self.nu <= 0:
            raise ValueError("need chi >= 0 and nu > 0")


def _ou_step_tables(path: WienerPath, chi: float, nu: float):
    """Per-coordinate decay and noise-gain vectors for one dt_path step."""
    lam = path.basis.eigenvalues.astype(np.float64)
    mu = np.repeat(nu * lam + chi, 4)
    sigma = path.spectrum.coordinate_amplitudes(path.basis)
    decay = np.exp(-mu * path.dt_path)
    gain = sigma * np.sqrt(-np.expm1(-2.0 * mu * path.dt_path) / (2.0 * mu))
    return decay, gain


def stationary_std(spectrum: NoiseSpectrum, chi: float, nu: float, basis: GalerkinBasis):
    """Per-coordinate stationary standard deviation sigma / sqrt(2*mu)."""
    lam = basis.eigenvalues.astype(np.float64)
    mu = np.repeat(nu * lam + chi, 4)
    return spectrum.coordinate_amplitudes(basis) / np.sqrt(2.0 * mu)


def stationary_mean_H2(spectrum: NoiseSpectrum, chi: float, nu: float, basis: GalerkinBasis) -> float:
    """Closed-form E|z|_H^2 = sum over (modes, polarizations) of
    sigma_k^2 / (2 (nu |k|^2 + chi)); the sum runs over the full lattice."""
    return float((stationary_std(spectrum, chi, nu, basis) ** 2).sum())


def _coords_to_field(basis: GalerkinBasis, coords: np.ndarray) -> SpectralField:
    quad = coords.reshape(basis.n_half_modes, 2, 2)
    return SpectralField(basis, quad[:, :, 0] + 1j * quad[:, :, 1])


def _field_to_coords(z: SpectralField) -> np.ndarray:
    c = z.coeffs
    quad = np.empty((c.shape[0], 2, 2))
    quad[:, :, 0] = c.real
    quad[:, :, 1] = c.imag
    return quad.reshape(-1)


def ou_stationary_sample(
    spectrum: NoiseSpectrum,
    chi: float,
    nu: float,
    basis: GalerkinBasis,
    rng: np.random.Generator,
) -> SpectralField:
    """Draw z from its stationary law (per-mode variance sigma^2/(2*mu))."""
    std = stationary_std(spectrum, chi, nu, basis)
    return _coords_to_field(basis, std * rng.standard_normal(std.shape))


def ou_initial_state(path: WienerPath, chi: float, nu: float) -> OUState:
    """Stationary z at the start of the path window.

    The draw is keyed by the path seed alone, so shifted views of one path
    share it; combined with the shift-invariant window start this makes the
    realized z a deterministic function of the underlying path.
    """
    rng = labeled_generator(path.seed, "ou-init")
    z = ou_stationary_sample(path.spectrum, chi, nu, path.basis, rng)
    return OUState(path.t_min, z, chi, nu)


def ou_evolve(state: OUState, path: WienerPath, t_target: float) -> OUState:
    """Advance z to t_target (>= state.time, both on the path grid) using the
    exact per-mode transition; consumes one table column per dt_path cell."""
    n0 = path.index_of(state.time)
    n1 = path.index_of(t_target)
    if n1 < n0:
        raise ValueError("ou_evolve cannot run backwards in time")
    if n1 == n0:
        return replace(state, time=t_target)
    decay, gain = _ou_step_tables(path, state.chi, state.nu)
    coords = _field_to_coords(state.z)
    draws = path.normals(n0, n1 - n0)
    for row in draws:
        coords = decay * coords + gain * row
    return OUState(t_target, _coords_to_field(path.basis, coords), state.chi, state.nu)


class OUCursor:
    """Forward-only cursor over the z realization attached to a path.

    Wraps the pure ou_evolve with in-place arithmetic for the solver hot
    loop; anchored at the path window start by the stationary draw.
    """

    def __init__(self, path: WienerPath, chi: float, nu: float,
                 state: OUState | None = None):
        self.path = path
        self.chi = chi
        self.nu = nu
        if state is None:
            state = ou_initial_state(path, chi, nu)
        self._coords = _field_to_coords(state.z)
        self._index = path.index_of(state.time)
        self._decay, self._gain = _ou_step_tables(path, chi, nu)
        self._silent = path.spectrum.amplitude == 0.0

    @classmethod
    def from_state(cls, path: WienerPath, state: OUState) -> "OUCursor":
        return cls(path, state.chi, state.nu, state)

    @property
    def time(self) -> float:
        return self.path.t_origin + self._index * self.path.dt_path

    def advance_to(self, t: float) -> np.ndarray:
        n1 = self.path.index_of(t)
        if n1 < self._index:
            raise ValueError("OU cursor cannot run backwards")
        if n1 > self._index:
            if self._silent and not self._coords.any():
                # zero noise amplitude with zero state: nothing evolves and
                # no draws need materializing
                self._index = n1
            else:
                draws = self.path.normals(self._index, n1 - self._index)
                coords = self._coords
                decay, gain = self._decay, self._gain
                for row in draws:
                    coords = decay * coords + gain * row
                self._coords = coords
                self._index = n1
        return self.field_coeffs()

    def field_coeffs(self) -> np.ndarray:
        quad = self._coords.reshape(-1, 2, 2)
        return quad[:, :, 0] + 1j * quad[:, :, 1]

    def field(self) -> SpectralField:
        return _coords_to_field(self.path.basis, self._coords)

    def state(self) -> OUState:
        return OUState(self.time, self.field(), self.chi, self.nu)


def ou_shift_covariance_pair(
    path: WienerPath, s: float, t: float, chi: float, nu: float
) -> tuple[SpectralField, SpectralField]:
    """(z on the s-shifted path at time t, z on the path at time t+s).

    Both runs are anchored at the same underlying table start and consume
    identical draws, so the two fields agree bit-for-bit.
    """
    shifted = shift_path(path, s)
    lhs = ou_evolve(ou_initial_state(shifted, chi, nu), shifted, t).z
    rhs = ou_evolve(ou_initial_state(path, chi, nu), path, t + s).z
    return lhs, rhs
