"""Brillouin-zone Fourier transforms with the ``+i`` forward kernel.

    forward:  hh(k) = sum_n exp(+i k n) h_n
    inverse:  h_n   = (1/N) sum_k exp(-i k n) hh(k)

Spectral arrays are stored with ``k`` ascending in (-pi, pi].  The lattice
index of the first sample is ``n0`` (default 0), so a window running over
``n = -M .. M`` is transformed with ``n0=-M``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import lattice
from .report import ResidualReport

# Coefficient of the eps^2 K^2 term in the second-order expansion of the
# spectral derivative, as printed (2/3) and as implied by the lattice d1
# symbol sin(eps K)/eps = K (1 - eps^2 K^2 / 6 + ...).
PRINTED_SECOND_ORDER = 2.0 / 3.0
LATTICE_SECOND_ORDER = 1.0 / 6.0


@dataclass(frozen=True)
class BrillouinGrid:
    """``n`` wave numbers ``2 pi m / n`` folded into (-pi, pi], ascending."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid needs at least one mode")

    @cached_property
    def modes(self) -> np.ndarray:
        return np.arange(self.n) - (self.n - 1) // 2

    @cached_property
    def k(self) -> np.ndarray:
        return 2 * np.pi * self.modes / self.n

    @cached_property
    def fft_index(self) -> np.ndarray:
        # position in numpy's FFT ordering of each ascending mode
        return self.modes % self.n

    def singular_tan(self, tol: float = 1e-12) -> np.ndarray:
        """Points where ``tan k`` blows up (``|k| = pi/2``)."""
        return np.abs(np.cos(self.k)) < tol


def _move(a, axis):
    return np.moveaxis(np.asarray(a), axis, -1)


def dft_forward(h, axis: int = -1, n0: int = 0, fast: bool = True) -> np.ndarray:
    """Forward transform of ``h`` along ``axis``."""
    h = _move(h, axis)
    n = h.shape[-1]
    if n == 0:
        raise ValueError("cannot transform an empty sequence")
    grid = BrillouinGrid(n)
    if fast:
        out = n * np.fft.ifft(h, axis=-1)[..., grid.fft_index]
        if n0:
            out = out * np.exp(1j * grid.k * n0)
    else:
        kernel = np.exp(1j * np.outer(np.arange(n) + n0, grid.k))
        out = h @ kernel
    return np.moveaxis(out, -1, axis)


def dft_inverse(hh, axis: int = -1, n0: int = 0, fast: bool = True) -> np.ndarray:
    """Inverse of :func:`dft_forward`."""
    hh = _move(hh, axis)
    n = hh.shape[-1]
    if n == 0:
        raise ValueError("cannot transform an empty sequence")
    grid = BrillouinGrid(n)
    if fast:
        x = hh * np.exp(-1j * grid.k * n0) if n0 else hh
        ordered = np.empty_like(x, dtype=complex)
        ordered[..., grid.fft_index] = x
        out = np.fft.fft(ordered, axis=-1) / n
    else:
        kernel = np.exp(-1j * np.outer(grid.k, np.arange(n) + n0))
        out = hh @ kernel / n
    return np.moveaxis(out, -1, axis)


def dft2_forward(h, axes=(-2, -1), n0=(0, 0), fast: bool = True) -> np.ndarray:
    out = dft_forward(h, axes[0], n0[0], fast)
    return dft_forward(out, axes[1], n0[1], fast)


def pair(f, h) -> complex:
    """Bilinear pairing ``sum_n f_n h_n`` (no complex conjugation)."""
    f, h = np.asarray(f), np.asarray(h)
    if f.shape != h.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {h.shape}")
    return complex(np.sum(f * h))


def pair_spectral(fh, hh) -> complex:
    """Grid version of ``(1/2pi) int dk fh(k) hh(k)``; equals ``sum_n f_n h_{-n}``."""
    fh, hh = np.asarray(fh), np.asarray(hh)
    if fh.shape != hh.shape:
        raise ValueError(f"grid mismatch: {fh.shape} vs {hh.shape}")
    return complex(np.mean(fh * hh))


def spectral_derivative_check(f) -> ResidualReport:
    """Check the transform of ``d1 f`` against its two spectral forms.

    ``sin``: ``-i sin(k) fh``, valid on every grid point.
    ``tan``: ``-i tan(k) (fh + gh)`` with ``g = d2 f``; not applicable where
    ``|k| = pi/2``, those points are flagged and skipped.
    """
    f = np.asarray(f, dtype=complex)
    grid = BrillouinGrid(f.shape[-1])
    fh = dft_forward(f)
    Fh = dft_forward(lattice.d1(f))
    gh = dft_forward(lattice.d2(f))
    singular = grid.singular_tan()
    k = grid.k
    sin_form = -1j * np.sin(k) * fh
    tan = np.where(singular, np.nan, np.tan(np.where(singular, 0.0, k)))
    tan_form = -1j * tan * (fh + gh)
    rep = ResidualReport("spectral_derivative")
    rep.add("sin", Fh - sin_form)
    rep.add("tan", Fh - tan_form)
    rep.notes["tan_inapplicable_k"] = [float(x) for x in k[singular]]
    # the stride-2 choice g = d1(d1 f) does not satisfy the tan form
    gh_stride2 = dft_forward(lattice.d1(lattice.d1(f)))
    rep.add("tan_with_d1d1", Fh - (-1j * tan * (fh + gh_stride2)))
    return rep


def continuum_derivative_expansion(fh, K, eps: float, order: int,
                                   coefficient: float = PRINTED_SECOND_ORDER):
    """Small-``eps`` expansion of the spectral derivative at physical ``K``.

    Orders 0 and 1 give ``-i K fh``; order 2 gives
    ``-i K (1 - coefficient eps^2 K^2) fh``.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order {order} unsupported (0, 1 or 2)")
    K = np.asarray(K, dtype=float)
    factor = -1j * K
    if order == 2:
        factor = factor * (1 - coefficient * eps**2 * K**2)
    return factor * fh


def lattice_derivative_symbol(K, eps: float):
    """Exact symbol of ``d1/eps`` on a grid of spacing ``eps``: ``-i sin(eps K)/eps``."""
    return -1j * np.sin(eps * np.asarray(K)) / eps


def printed_implicit_symbol(K, eps: float):
    """Closed-form solution of ``eps f' = -i tan(eps K)(f + eps^2 f'')`` with
    ``f'' = -i K f'`` (the relation the printed expansion is derived from)."""
    K = np.asarray(K, dtype=float)
    t = np.tan(eps * K) / eps
    return -1j * t / (1 + eps**2 * K * t)


def expansion_remainder(f_of_x, L: float, eps: float, reference: str = "lattice",
                        coefficient: float = PRINTED_SECOND_ORDER) -> float:
    """Relative L2 gap between a reference derivative and the order-2 expansion.

    ``f_of_x`` is sampled on ``N = L/eps`` points of spacing ``eps``.
    ``reference`` is ``"lattice"`` (transform of ``d1 f / eps``) or
    ``"printed"`` (implicit relation behind the printed expansion).
    """
    n = int(round(L / eps))
    x = eps * (np.arange(n) - n // 2)
    f = f_of_x(x)
    grid = BrillouinGrid(n)
    K = grid.k / eps
    fh = dft_forward(f)
    if reference == "lattice":
        ref = dft_forward(lattice.d1(f)) / eps
    elif reference == "printed":
        ref = printed_implicit_symbol(K, eps) * fh
    else:
        raise ValueError(f"unknown reference {reference!r}")
    approx = continuum_derivative_expansion(fh, K, eps, 2, coefficient)
    return float(np.linalg.norm(ref - approx) / np.linalg.norm(fh))
