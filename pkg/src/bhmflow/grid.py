"""Periodic uniform grids and Fourier pseudo-spectral operators in 1/2/3D.

Transform convention: unnormalized forward (`numpy.fft.fftn`) and normalized
inverse, so the mean of a field equals ``Re(u_hat[0,...,0]) / N_total``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArityError, InvalidField, SpectrumError

__all__ = [
    "SpectralGrid",
    "Field",
    "SpectralField",
    "forward_transform",
    "inverse_transform",
    "apply_laplacian",
    "apply_biharmonic",
    "gradient",
    "divergence",
]

# Relative imaginary residue above which an "almost real" inverse transform
# is treated as a symmetry error rather than rounded away.
IMAG_RESIDUE_TOL = 1e-10


def _as_tuple(value, dim, cast):
    if np.isscalar(value):
        return (cast(value),) * dim
    return tuple(cast(v) for v in value)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid with precomputed spectral operator symbols.

    Parameters
    ----------
    n : tuple of int
        Modes per axis; each must be a power of two (8..1024 supported).
    length : tuple of float
        Domain length per axis.
    dealias : bool
        When True, spectral products of nonlinear terms are truncated with
        the 2/3 rule. Off by default; the reproduced results use plain
        pseudo-spectral products.
    """

    n: tuple
    length: tuple
    dealias: bool = False

    # caches populated in __post_init__
    _k: tuple = field(repr=False, compare=False, default=None)
    _ikd: tuple = field(repr=False, compare=False, default=None)
    _ksq: np.ndarray = field(repr=False, compare=False, default=None)
    _k4: np.ndarray = field(repr=False, compare=False, default=None)
    _dealias_mask: np.ndarray = field(repr=False, compare=False, default=None)

    @staticmethod
    def create(n, length, dealias=False):
        if np.isscalar(n):
            n = (n,)
        dim = len(n)
        if dim not in (1, 2, 3):
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {dim}")
        n = tuple(int(m) for m in n)
        for m in n:
            if m < 2 or (m & (m - 1)) != 0:
                raise ValueError(f"modes per axis must be a power of two, got {m}")
        length = _as_tuple(length, dim, float)
        if len(length) != dim:
            raise ValueError("length and n must have matching dimensions")
        if any(L <= 0 for L in length):
            raise ValueError("domain lengths must be positive")
        return SpectralGrid(n=n, length=length, dealias=dealias)

    def __post_init__(self):
        dim = len(self.n)
        ks = []
        ikds = []
        for ax, (m, L) in enumerate(zip(self.n, self.length)):
            k1 = 2.0 * np.pi * np.fft.fftfreq(m, d=L / m)
            # broadcastable shape: axis `ax` keeps size m
            shape = [1] * dim
            shape[ax] = m
            k1 = k1.reshape(shape)
            # odd-derivative symbol: zero out the Nyquist mode to keep
            # gradients of real fields real; even powers keep it
            kd = k1.copy()
            kd.reshape(-1)[m // 2] = 0.0
            ks.append(k1)
            ikds.append(1j * kd)
        ksq = sum(k * k for k in ks)
        ksq = np.broadcast_to(ksq, self.n).copy()
        object.__setattr__(self, "_k", tuple(ks))
        object.__setattr__(self, "_ikd", tuple(ikds))
        object.__setattr__(self, "_ksq", ksq)
        object.__setattr__(self, "_k4", ksq * ksq)
        if self.dealias:
            mask = np.ones(self.n, dtype=bool)
            for ax, (m, k1) in enumerate(zip(self.n, ks)):
                kcut = (2.0 / 3.0) * np.abs(k1).max()
                mask &= np.abs(np.broadcast_to(k1, self.n)) <= kcut
            object.__setattr__(self, "_dealias_mask", mask)

    @property
    def dim(self):
        return len(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def num_points(self):
        return int(np.prod(self.n))

    @property
    def cell_volume(self):
        return float(np.prod([L / m for L, m in zip(self.length, self.n)]))

    @property
    def volume(self):
        return float(np.prod(self.length))

    @property
    def wavenumbers(self):
        """Per-axis physical wavenumber arrays (broadcastable shapes)."""
        return self._k

    @property
    def ksq(self):
        return self._ksq

    @property
    def k4(self):
        return self._k4

    @property
    def kmax(self):
        """Largest wavenumber magnitude resolvable by the grid."""
        return float(np.sqrt(self._ksq.max()))

    def coordinates(self):
        """Per-axis coordinate arrays in broadcastable shapes."""
        coords = []
        dim = self.dim
        for ax, (m, L) in enumerate(zip(self.n, self.length)):
            x = np.arange(m) * (L / m)
            shape = [1] * dim
            shape[ax] = m
            coords.append(x.reshape(shape))
        return tuple(coords)

    def meshgrid(self):
        return tuple(np.broadcast_to(c, self.n) for c in self.coordinates())

    # -- low-level array transforms (no Field wrapping, no finiteness checks)

    def fftn(self, values):
        out = np.fft.fftn(values)
        if self.dealias:
            out *= self._dealias_mask
        return out

    def ifftn_real(self, coeffs, rtol=IMAG_RESIDUE_TOL):
        """Inverse transform of a spectrum asserted to be real-producing.

        Used for caller-supplied spectra; internal operator pipelines use
        ifftn_real_unchecked, whose symmetry is structural.
        """
        out = np.fft.ifftn(coeffs)
        re = out.real
        scale = np.abs(re).max()
        imag = np.abs(out.imag).max()
        if imag > rtol * max(scale, 1.0):
            raise SpectrumError(
                f"imaginary residue {imag:.3e} exceeds {rtol:.1e} x max({scale:.3e}, 1)"
            )
        return np.ascontiguousarray(re)

    def ifftn_real_unchecked(self, coeffs):
        """Inverse transform dropping the imaginary roundoff.

        Safe when the spectrum came from a real field through real-valued
        (or Nyquist-zeroed i*k) symbols, which preserve conjugate symmetry.
        """
        return np.ascontiguousarray(np.fft.ifftn(coeffs).real)


@dataclass
class Field:
    """Real scalar grid function in physical space."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise InvalidField(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise InvalidField("field contains non-finite values")
        return self

    def copy(self):
        return Field(self.grid, self.values.copy())

    @staticmethod
    def constant(grid, value):
        return Field(grid, np.full(grid.shape, float(value)))

    @staticmethod
    def from_function(grid, fn):
        return Field(grid, np.asarray(fn(*grid.meshgrid()), dtype=np.float64))


@dataclass
class SpectralField:
    """Complex Fourier coefficients of a real field (unnormalized forward)."""

    grid: SpectralGrid
    coeffs: np.ndarray


def forward_transform(f: Field) -> SpectralField:
    """Forward DFT of a field; raises InvalidField on non-finite input."""
    f.check_finite()
    return SpectralField(f.grid, f.grid.fftn(f.values))


def inverse_transform(F: SpectralField) -> Field:
    """Inverse DFT; the spectrum must be real-producing.

    Imaginary residue below ``1e-10`` relative is discarded, anything larger
    raises SpectrumError.
    """
    return Field(F.grid, F.grid.ifftn_real(F.coeffs))


def _apply_symbol(f: Field, symbol) -> Field:
    f.check_finite()
    g = f.grid
    return Field(g, g.ifftn_real_unchecked(symbol * g.fftn(f.values)))


def apply_laplacian(f: Field) -> Field:
    """Spectral Laplacian: multiply by -k^2."""
    return _apply_symbol(f, -f.grid.ksq)


def apply_biharmonic(f: Field) -> Field:
    """Spectral biharmonic: multiply by +k^4."""
    return _apply_symbol(f, f.grid.k4)


def gradient(f: Field):
    """Per-axis spectral derivative (i*k symbol, Nyquist zeroed)."""
    f.check_finite()
    g = f.grid
    fh = g.fftn(f.values)
    return tuple(Field(g, g.ifftn_real_unchecked(ik * fh)) for ik in g._ikd)


def divergence(components) -> Field:
    """Sum of per-axis derivatives of a vector field.

    The k=0 mode of the result is exactly zero (each derivative symbol
    vanishes there), so the output always has zero spatial mean.
    """
    components = tuple(components)
    if not components:
        raise ArityError("divergence needs at least one component")
    g = components[0].grid
    if len(components) != g.dim:
        raise ArityError(
            f"expected {g.dim} components for a {g.dim}D grid, got {len(components)}"
        )
    acc = np.zeros(g.shape, dtype=np.complex128)
    for comp, ik in zip(components, g._ikd):
        if comp.grid is not g and comp.grid != g:
            raise ArityError("divergence components must share one grid")
        comp.check_finite()
        acc += ik * g.fftn(comp.values)
    return Field(g, g.ifftn_real_unchecked(acc))
