"""Periodic grids, Fourier transforms and spectral operators.

Fields are plain numpy arrays. A scalar field has shape ``grid.shape``; a
vector field has shape ``(grid.dim, *grid.shape)``. Transforms always act on
the trailing ``grid.dim`` axes, so any leading axes (components, time) are
carried through unchanged.

Spectral coefficients use the mean normalization: the zero mode equals the
spatial mean of the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatch, NonFiniteField, SpectralSymmetryError, VacuumBreach

TWO_PI = 2.0 * math.pi
IMAG_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the N-torus, N in {1, 2, 3}.

    Parameters
    ----------
    dim : int
        Spatial dimension.
    n : int or tuple of int
        Points per axis, each a power of two and at least 8.
    L : float or tuple of float
        Period per axis.
    """

    dim: int
    n: tuple
    L: tuple = (TWO_PI,)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.n if isinstance(self.n, (tuple, list)) else (self.n,) * self.dim
        L = self.L if isinstance(self.L, (tuple, list)) else (self.L,) * self.dim
        if len(L) == 1 and self.dim > 1:
            L = tuple(L) * self.dim
        n, L = tuple(int(v) for v in n), tuple(float(v) for v in L)
        if len(n) != self.dim or len(L) != self.dim:
            raise ValueError("n and L must have one entry per axis")
        for v in n:
            if v < 8 or v & (v - 1):
                raise ValueError(f"points per axis must be a power of two >= 8, got {v}")
        for v in L:
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"period must be positive, got {v}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)

    # -- geometry ---------------------------------------------------------
    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return math.prod(self.n)

    @property
    def volume(self):
        return math.prod(self.L)

    @property
    def cell_volume(self):
        return self.volume / self.size

    @property
    def ident(self):
        """Short string identifying the grid, used in reports."""
        ns = "x".join(str(v) for v in self.n)
        Ls = ",".join(f"{v:.6g}" for v in self.L)
        return f"T{self.dim}[{ns}]L[{Ls}]"

    def axes(self):
        """1-D coordinate arrays, one per axis."""
        return [np.arange(n) * (L / n) for n, L in zip(self.n, self.L)]

    def coords(self):
        """Meshgrid of coordinates, ``ij`` indexing."""
        return np.meshgrid(*self.axes(), indexing="ij")

    # -- wavenumbers ------------------------------------------------------
    @cached_property
    def mode_index(self):
        """Integer mode indices per axis, broadcastable to ``shape``."""
        out = []
        for ax, n in enumerate(self.n):
            idx = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
            s = [1] * self.dim
            s[ax] = n
            out.append(idx.reshape(s))
        return out

    @cached_property
    def k(self):
        """Wavenumbers ``(2 pi / L) * index`` per axis, broadcastable."""
        return [TWO_PI / L * idx for L, idx in zip(self.L, self.mode_index)]

    @cached_property
    def kd(self):
        """Wavenumbers for odd derivatives: the Nyquist mode is zeroed."""
        out = []
        for kk, idx, n in zip(self.k, self.mode_index, self.n):
            out.append(np.where(idx == -(n // 2), 0.0, kk))
        return out

    @cached_property
    def k2(self):
        total = np.zeros(self.shape)
        for kk in self.k:
            total = total + kk**2
        return total

    @cached_property
    def kmag(self):
        return np.sqrt(self.k2)

    @cached_property
    def dealias_mask(self):
        """True on modes kept by the 2/3 rule (``|index| <= n/3`` on every axis)."""
        keep = np.ones(self.shape, dtype=bool)
        for idx, n in zip(self.mode_index, self.n):
            keep = keep & (np.abs(idx) <= n / 3.0)
        return keep

    @property
    def k_min(self):
        """Smallest nonzero wavenumber magnitude."""
        return min(TWO_PI / L for L in self.L)

    @property
    def k_max(self):
        """Largest wavenumber magnitude present on the grid (corner mode)."""
        return float(self.kmag.max())

    @property
    def k_max_dealiased(self):
        """Largest per-axis wavenumber retained by the 2/3 rule."""
        return max(TWO_PI / L * math.floor(n / 3.0) for n, L in zip(self.n, self.L))

    # -- checks -----------------------------------------------------------
    def check_scalar(self, f):
        f = np.asarray(f)
        if f.shape != self.shape:
            raise GridMismatch(f"expected scalar field of shape {self.shape}, got {f.shape}")
        return f

    def check_vector(self, F):
        F = np.asarray(F)
        if F.shape != (self.dim, *self.shape):
            raise GridMismatch(
                f"expected vector field of shape {(self.dim, *self.shape)}, got {F.shape}"
            )
        return F

    def _fft_axes(self, arr):
        if arr.shape[arr.ndim - self.dim:] != self.shape:
            raise GridMismatch(f"trailing axes {arr.shape} do not match grid {self.shape}")
        return tuple(range(arr.ndim - self.dim, arr.ndim))

    # -- transforms -------------------------------------------------------
    def forward(self, f):
        """DFT normalized so that the zero mode is the mean."""
        f = np.asarray(f, dtype=float)
        if not np.all(np.isfinite(f)):
            bad = np.argwhere(~np.isfinite(f))[0]
            raise NonFiniteField(f"non-finite sample at index {tuple(bad)}")
        return sfft.fftn(f, axes=self._fft_axes(f)) / self.size

    def inverse(self, F, tol=IMAG_TOL):
        """Inverse of :meth:`forward`; rejects non-Hermitian input.

        The imaginary residue is discarded when it is below ``tol`` relative
        to the largest sample magnitude, otherwise
        :class:`SpectralSymmetryError` is raised.
        """
        F = np.asarray(F)
        z = sfft.ifftn(F, axes=self._fft_axes(F)) * self.size
        resid = np.abs(z.imag).max() if z.size else 0.0
        scale = np.abs(z).max() if z.size else 0.0
        if resid > tol * scale:
            raise SpectralSymmetryError(
                f"imaginary residue {resid:.3e} exceeds {tol:g} relative to {scale:.3e}"
            )
        return np.ascontiguousarray(z.real)

    # -- spectral-side operators ------------------------------------------
    def grad_hat(self, F):
        return np.stack([1j * kk * F for kk in self.kd])

    def div_hat(self, V):
        out = 1j * self.kd[0] * V[0]
        for j in range(1, self.dim):
            out = out + 1j * self.kd[j] * V[j]
        return out

    def lap_hat(self, F):
        return -self.k2 * F

    def dealias_hat(self, F):
        return F * self.dealias_mask


# -- physical-side operators ----------------------------------------------

def spectral_gradient(grid, f):
    """Gradient of a scalar field; returns shape ``(dim, *shape)``."""
    f = grid.check_scalar(f)
    return grid.inverse(grid.grad_hat(grid.forward(f)))


def spectral_divergence(grid, F):
    """Divergence of a vector field."""
    F = grid.check_vector(F)
    return grid.inverse(grid.div_hat(grid.forward(F)))


def spectral_laplacian(grid, f):
    """Laplacian, applied to each component of whatever is passed."""
    return grid.inverse(grid.lap_hat(grid.forward(f)))


def spectral_curl(grid, F):
    """Curl of a vector field.

    Zero field in 1-D, scalar ``d1 F2 - d2 F1`` in 2-D, vector in 3-D.
    """
    F = grid.check_vector(F)
    if grid.dim == 1:
        return np.zeros(grid.shape)
    Fh = grid.forward(F)
    k = grid.kd
    if grid.dim == 2:
        return grid.inverse(1j * k[0] * Fh[1] - 1j * k[1] * Fh[0])
    return grid.inverse(
        np.stack(
            [
                1j * k[1] * Fh[2] - 1j * k[2] * Fh[1],
                1j * k[2] * Fh[0] - 1j * k[0] * Fh[2],
                1j * k[0] * Fh[1] - 1j * k[1] * Fh[0],
            ]
        )
    )


def dealias(grid, f):
    """Zero every mode outside the 2/3 band."""
    return grid.inverse(grid.dealias_hat(grid.forward(f)))


def dealiased_product(grid, f, g):
    """Pointwise product under the 2/3 rule.

    Both factors are truncated to the 2/3 band, multiplied in physical
    space, and the product is truncated again. IEEE multiplication commutes,
    so the result is exactly symmetric in ``f`` and ``g``.
    """
    f, g = np.asarray(f), np.asarray(g)
    if f.shape != g.shape:
        raise GridMismatch(f"shapes differ: {f.shape} vs {g.shape}")
    fa, ga = dealias(grid, f), dealias(grid, g)
    return dealias(grid, fa * ga)


def safe_reciprocal(grid, h, floor=1e-3):
    """Pointwise ``1/h``; raises :class:`VacuumBreach` if ``min h <= floor``."""
    h = grid.check_scalar(h)
    check_floor(grid, h, floor)
    return 1.0 / h


def check_floor(grid, h, floor):
    i = int(np.argmin(h))
    hmin = h.flat[i]
    if not hmin > floor:
        idx = np.unravel_index(i, h.shape)
        where = tuple(float(ax[j]) for ax, j in zip(grid.axes(), idx))
        raise VacuumBreach(hmin, idx, floor, where)
    return float(hmin)


def l2_norm(grid, f):
    """L2 norm by grid quadrature; vector fields use the pointwise Euclidean norm."""
    return math.sqrt(float(np.sum(np.asarray(f) ** 2)) * grid.cell_volume)


def integrate(grid, f):
    """Rectangle-rule integral over the torus (spectrally exact for trig polynomials)."""
    return float(np.sum(f)) * grid.cell_volume
