"""Divergence-free Fourier Galerkin discretization of the 2*pi-periodic box.

Velocity fields are expanded in a real orthonormal basis of H (the space of
square-integrable, divergence-free, zero-mean vector fields on [0, 2*pi]^3):

    phi_cos[k, j](x) = sqrt(2/V) * p_j(k) * cos(k.x)
    phi_sin[k, j](x) = sqrt(2/V) * p_j(k) * sin(k.x)

where V = (2*pi)^3, k runs over a half-space of the integer lattice with
|k|_inf <= kmax (one representative of each +-k pair, k != 0), and p_1(k),
p_2(k) are two orthonormal polarization vectors perpendicular to k.  Every
field synthesized from this basis is real and exactly divergence-free, and
the Stokes operator A = -P Laplacian is diagonal with integer eigenvalues
|k|^2.  The smallest eigenvalue is 1, so the Poincare inequality holds with
constant 1 on this space.

A field stores one complex number c = a + i*b per (mode, polarization); a is
the cos coordinate and b the sin coordinate, so Parseval reads

    |u|_H^2 = sum |c|^2,      |u|_V^2 = sum |k|^2 |c|^2.

Quadratic and quartic nonlinear quantities are evaluated on a physical grid
with grid_size >= 4*kmax + 1 points per dimension.  Products of two fields
have spectral support |k|_inf <= 2*kmax and integrands of the trilinear form
have degree <= 3*kmax, so with this grid both the convolution (after
projection back to the truncated basis) and the L4 quadrature are exact up to
rounding: the grid plays the role of a zero-padded (3/2-rule) dealiasing grid.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

# Resource guard: a desk-scale build never needs more than this.
KMAX_CEILING = 8

BOX_VOLUME = (2.0 * np.pi) ** 3

_FORMAT_VERSION = 1


def _polarization_pair(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two integer vectors orthogonal to k and to each other.

    Built from cross products of integer vectors, so orthogonality holds in
    exact integer arithmetic (the divergence-free constraint is structural,
    not approximate).
    """
    axis = int(np.argmin(np.abs(k)))
    e = np.zeros(3, dtype=np.int64)
    e[axis] = 1
    p1 = np.cross(k, e)
    p2 = np.cross(k, p1)
    return p1, p2


@dataclass(frozen=True)
class GalerkinBasis:
    """Truncated divergence-free Fourier basis on the 2*pi-periodic box.

    Parameters
    ----------
    kmax : int
        Truncation radius in the max norm, 1 <= kmax <= 8.
    grid_size : int, optional
        Physical grid points per dimension; defaults to 4*kmax + 1, the
        smallest grid on which quartic quadrature is exact.
    """

    kmax: int
    grid_size: int = 0
    modes: np.ndarray = field(init=False, repr=False, compare=False)
    polarizations: np.ndarray = field(init=False, repr=False, compare=False)
    polarizations_int: np.ndarray = field(init=False, repr=False, compare=False)
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1 (the empty basis is rejected)")
        if self.kmax > KMAX_CEILING:
            raise ValueError(f"kmax={self.kmax} exceeds the ceiling {KMAX_CEILING}")
        if self.grid_size == 0:
            object.__setattr__(self, "grid_size", 4 * self.kmax + 1)
        if self.grid_size < 4 * self.kmax + 1:
            raise ValueError("grid_size must be at least 4*kmax + 1 for exact quadrature")

        rng = range(-self.kmax, self.kmax + 1)
        modes = [
            (k1, k2, k3)
            for k1 in rng
            for k2 in rng
            for k3 in rng
            if (k1, k2, k3) > (0, 0, 0)
        ]
        modes = np.array(sorted(modes), dtype=np.int64)

        pol_int = np.empty((len(modes), 2, 3), dtype=np.int64)
        for i, k in enumerate(modes):
            p1, p2 = _polarization_pair(k)
            pol_int[i, 0] = p1
            pol_int[i, 1] = p2
        pol = pol_int / np.linalg.norm(pol_int, axis=2, keepdims=True)

        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "polarizations", pol)
        object.__setattr__(self, "polarizations_int", pol_int)
        object.__setattr__(self, "eigenvalues", np.einsum("ni,ni->n", modes, modes))
        for name in ("modes", "polarizations", "polarizations_int", "eigenvalues"):
            getattr(self, name).setflags(write=False)

        # Scatter/gather bins on the FFT grid and wavenumber grids for
        # spectral derivatives; cached once per basis.
        M = self.grid_size
        object.__setattr__(self, "_bins_pos", tuple(modes.T % M))
        object.__setattr__(self, "_bins_neg", tuple((-modes.T) % M))
        kline = np.fft.fftfreq(M, d=1.0 / M)
        kg = np.array(np.meshgrid(kline, kline, kline, indexing="ij"))
        kg.setflags(write=False)
        object.__setattr__(self, "_kgrid", kg)
        object.__setattr__(self, "_synth_scale", 1.0 / np.sqrt(2.0 * BOX_VOLUME))

    # ---- counts ------------------------------------------------------

    @property
    def n_half_modes(self) -> int:
        return len(self.modes)

    @property
    def lattice_size(self) -> int:
        """Wavevector count of the full lattice, (2*kmax+1)^3 - 1."""
        return (2 * self.kmax + 1) ** 3 - 1

    @property
    def n_pairs(self) -> int:
        """(mode, polarization) pairs over the full lattice."""
        return 2 * self.lattice_size

    @property
    def n_coeffs(self) -> int:
        """Stored complex coefficients (half-space modes times 2 polarizations)."""
        return 2 * self.n_half_modes

    @property
    def poincare_constant(self) -> float:
        return float(self.eigenvalues.min())

    # ---- transforms --------------------------------------------------

    def _scatter(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficients -> full complex spectral array, shape (3, M, M, M)."""
        uhat = np.einsum("np,npc->nc", np.conj(coeffs), self.polarizations)
        uhat *= self._synth_scale
        M = self.grid_size
        spec = np.zeros((3, M, M, M), dtype=np.complex128)
        ix, iy, iz = self._bins_pos
        jx, jy, jz = self._bins_neg
        spec[:, ix, iy, iz] = uhat.T
        spec[:, jx, jy, jz] = np.conj(uhat).T
        return spec

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        """Physical grid values, shape (3, M, M, M), real."""
        spec = self._scatter(coeffs)
        return np.fft.ifftn(spec, axes=(1, 2, 3), norm="forward").real

    def synthesize_gradient(self, coeffs: np.ndarray) -> np.ndarray:
        """Grid values of the Jacobian du_c/dx_a, shape (a=3, c=3, M, M, M)."""
        spec = self._scatter(coeffs)
        dspec = 1j * self._kgrid[:, None] * spec[None, :]
        return np.fft.ifftn(dspec, axes=(2, 3, 4), norm="forward").real

    def analyze(self, grid: np.ndarray) -> np.ndarray:
        """Project physical grid values onto the basis (Leray + truncation).

        The component of each Fourier amplitude parallel to k is discarded by
        expanding only on the polarization vectors, which realizes the
        orthogonal projection onto divergence-free fields.
        """
        spec = np.fft.fftn(grid, axes=(1, 2, 3), norm="forward")
        ix, iy, iz = self._bins_pos
        uhat = spec[:, ix, iy, iz].T
        coeffs = np.conj(np.einsum("nc,npc->np", uhat, self.polarizations))
        coeffs /= self._synth_scale
        return coeffs

    def quadrature(self, values: np.ndarray) -> float:
        """Integral over the box of scalar grid values (exact for trig
        polynomials of degree < grid_size)."""
        return float(values.sum() * (BOX_VOLUME / values.size))


@dataclass(frozen=True)
class SpectralField:
    """Real divergence-free velocity field stored as complex coefficients.

    coeffs[n, p] = a + i*b holds the cos (a) and sin (b) coordinates of
    half-space mode n and polarization p.  Fields are immutable values.
    """

    basis: GalerkinBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.basis.n_half_modes, 2):
            raise ValueError(
                f"coefficient array must have shape {(self.basis.n_half_modes, 2)}"
            )
        if not c.flags.owndata:
            c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # ---- linear algebra ----------------------------------------------

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_basis(self, other)
        return SpectralField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_basis(self, other)
        return SpectralField(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.basis, -self.coeffs)

    def grid_values(self) -> np.ndarray:
        return self.basis.synthesize(self.coeffs)


def _check_same_basis(*fields: SpectralField) -> GalerkinBasis:
    basis = fields[0].basis
    for f in fields[1:]:
        if f.basis is not basis and (
            f.basis.kmax != basis.kmax or f.basis.grid_size != basis.grid_size
        ):
            raise ValueError("fields live on different bases")
    return basis


# ---- construction -------------------------------------------------------


def build_basis(kmax: int, grid_size: int | None = None) -> GalerkinBasis:
    """Build the truncated basis; rejects kmax = 0 and kmax above the ceiling."""
    return GalerkinBasis(kmax, grid_size or 0)


def zero_field(basis: GalerkinBasis) -> SpectralField:
    return SpectralField(basis, np.zeros((basis.n_half_modes, 2), dtype=np.complex128))


def field_from_grid(basis: GalerkinBasis, grid: np.ndarray) -> SpectralField:
    """Leray-project grid samples (shape (3, M, M, M)) onto the basis."""
    return SpectralField(basis, basis.analyze(np.asarray(grid, dtype=np.float64)))


def random_field(
    basis: GalerkinBasis,
    rng: np.random.Generator,
    decay: float = 2.0,
    norm: float | None = 1.0,
) -> SpectralField:
    """Random field with per-mode amplitude |k|^-decay, optionally normalized.

    Coefficients are i.i.d. complex Gaussian before the amplitude profile is
    applied; with norm=r the result satisfies |u|_H = r exactly.
    """
    nh = basis.n_half_modes
    raw = rng.standard_normal((nh, 2)) + 1j * rng.standard_normal((nh, 2))
    amp = basis.eigenvalues.astype(np.float64) ** (-decay / 2.0)
    coeffs = raw * amp[:, None]
    if norm is not None:
        h = np.sqrt((coeffs.real**2 + coeffs.imag**2).sum())
        if h == 0.0:
            raise ValueError("degenerate random draw")
        coeffs *= norm / h
    return SpectralField(basis, coeffs)


# ---- norms and inner products -------------------------------------------


def inner_H(u: SpectralField, w: SpectralField) -> float:
    """L2 inner product (u, w) via Parseval."""
    _check_same_basis(u, w)
    return float(np.real(u.coeffs * np.conj(w.coeffs)).sum())


def norm_H(u: SpectralField) -> float:
    """|u|_H = sqrt(int |u|^2 dx)."""
    c = u.coeffs
    return float(np.sqrt((c.real**2 + c.imag**2).sum()))


def norm_V(u: SpectralField) -> float:
    """|u|_V = sqrt(int |grad u|^2 dx) = sqrt(sum |k|^2 |c|^2)."""
    c = u.coeffs
    lam = u.basis.eigenvalues.astype(np.float64)
    return float(np.sqrt((lam[:, None] * (c.real**2 + c.imag**2)).sum()))


def norm_dual(u: SpectralField) -> float:
    """Dual (V') norm, sqrt(sum |c|^2 / |k|^2); used for H^-1 forcing data."""
    c = u.coeffs
    lam = u.basis.eigenvalues.astype(np.float64)
    return float(np.sqrt(((c.real**2 + c.imag**2) / lam[:, None]).sum()))


def norm_L4(u: SpectralField) -> float:
    """|u|_L4 via exact quadrature of |u(x)|^4 on the physical grid."""
    grid = u.basis.synthesize(u.coeffs)
    sq = np.einsum("cxyz,cxyz->xyz", grid, grid)
    return float(u.basis.quadrature(sq * sq) ** 0.25)


def norm_L4_of_grid(basis: GalerkinBasis, grid: np.ndarray) -> float:
    sq = np.einsum("cxyz,cxyz->xyz", grid, grid)
    return float(basis.quadrature(sq * sq) ** 0.25)


# ---- Stokes operator and advection ---------------------------------------


def stokes_apply(u: SpectralField) -> SpectralField:
    """A u = -P Laplacian u; multiplies each coefficient by |k|^2."""
    return SpectralField(u.basis, u.coeffs * u.basis.eigenvalues[:, None])


def advection_grid(u: SpectralField, v: SpectralField) -> np.ndarray:
    """(u . grad) v evaluated on the physical (dealiasing) grid."""
    basis = _check_same_basis(u, v)
    ug = basis.synthesize(u.coeffs)
    dv = basis.synthesize_gradient(v.coeffs)
    return np.einsum("axyz,acxyz->cxyz", ug, dv)


def trilinear_b(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """b(u, v, w) = int (u . grad) v . w dx, exact to rounding.

    The integrand is a trig polynomial of degree <= 3*kmax, below the grid's
    exactness threshold, so the skew symmetry b(u, v, v) = 0 and the
    antisymmetry b(u, v, w) = -b(u, w, v) hold to floating-point rounding.
    """
    basis = _check_same_basis(u, v, w)
    adv = advection_grid(u, v)
    wg = basis.synthesize(w.coeffs)
    return basis.quadrature(np.einsum("cxyz,cxyz->xyz", adv, wg))


def nonlinear_B(u: SpectralField, v: SpectralField) -> SpectralField:
    """Galerkin projection of (u . grad) v onto the truncated basis.

    Satisfies <B(u, v), w> = b(u, v, w) for every w in the basis.
    """
    basis = _check_same_basis(u, v)
    return SpectralField(basis, basis.analyze(advection_grid(u, v)))


def ladyzhenskaya_ratio(u: SpectralField) -> float:
    """|u|_L4 / (|u|_H^(1/4) |u|_V^(3/4)); recorded, not asserted against a
    universal constant (the classical 2^(1/2) bound is stated for Dirichlet
    boundary conditions, not the torus)."""
    h = norm_H(u)
    v = norm_V(u)
    if h == 0.0:
        return 0.0
    return norm_L4(u) / (h**0.25 * v**0.75)


# ---- serialization --------------------------------------------------------

_HEADER = struct.Struct("<BII")


def field_to_bytes(u: SpectralField) -> bytes:
    """Versioned flat binary record: header byte, kmax, coefficient count,
    then little-endian float64 (re, im) pairs in basis order."""
    c = np.ascontiguousarray(u.coeffs)
    payload = np.empty((c.shape[0], 2, 2), dtype="<f8")
    payload[:, :, 0] = c.real
    payload[:, :, 1] = c.imag
    return _HEADER.pack(_FORMAT_VERSION, u.basis.kmax, c.shape[0] * 2) + payload.tobytes()


def field_from_bytes(data: bytes, basis: GalerkinBasis | None = None) -> SpectralField:
    version, kmax, npairs = _HEADER.unpack_from(data, 0)
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported field format version {version}")
    if basis is None:
        basis = build_basis(kmax)
    elif basis.kmax != kmax:
        raise ValueError(f"field was serialized on kmax={kmax}, basis has {basis.kmax}")
    if npairs != basis.n_coeffs:
        raise ValueError("coefficient count does not match the basis")
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    pairs = flat.reshape(basis.n_half_modes, 2, 2)
    return SpectralField(basis, pairs[:, :, 0] + 1j * pairs[:, :, 1])
