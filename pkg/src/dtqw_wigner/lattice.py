"""Central differences on integer lattices.

The second difference keeps a factor 1/2:

    d2 f[i] = (f[i+1] + f[i-1] - 2 f[i]) / 2

so ``d2`` is *not* ``d1 o d1`` (that one has stride 2).  With this
normalisation the neighbour values are recovered exactly,

    f[i +- 1] = f[i] +- d1 f[i] + d2 f[i].

Axes are either periodic (wrap around) or windowed.  On a windowed axis
the edge entries of a derivative are undefined; they are set to NaN and
flagged in the validity mask instead of being padded.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Prefactor of the second difference.  Module-level so the CLI sabotage
# test can flip it.
D2_FACTOR = 0.5


@dataclass(frozen=True)
class LatticeShape:
    """Stored time steps ``J`` and periodic sites ``N``."""

    J: int
    N: int

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise ValueError(f"space extent N must be even and >= 4, got {self.N}")
        if self.J < 3:
            raise ValueError(f"time extent J must be >= 3, got {self.J}")


@dataclass(frozen=True)
class LatticeField:
    """Complex values over lattice axes with a per-axis boundary policy."""

    values: np.ndarray
    periodic: tuple[bool, ...]
    valid: np.ndarray | None = None

    def __post_init__(self):
        if len(self.periodic) != self.values.ndim:
            raise ValueError("one boundary policy per axis is required")

    @property
    def mask(self) -> np.ndarray:
        if self.valid is None:
            return np.ones(self.values.shape, dtype=bool)
        return self.valid


def _as_field(field, periodic) -> tuple[LatticeField, bool]:
    if isinstance(field, LatticeField):
        return field, True
    values = np.asarray(field)
    if periodic is None:
        periodic = True
    if isinstance(periodic, bool):
        periodic = (periodic,) * values.ndim
    return LatticeField(values, tuple(periodic)), False


def _check_axis(field: LatticeField, axis: int) -> int:
    ndim = field.values.ndim
    if not -ndim <= axis < ndim:
        raise ValueError(f"unknown axis {axis} for a {ndim}-d field")
    return axis % ndim


def _edge_mask(shape, axis, lo, hi):
    """True on the first ``lo`` and last ``hi`` entries along ``axis``."""
    idx = np.arange(shape[axis])
    edge = (idx < lo) | (idx >= shape[axis] - hi)
    view = [1] * len(shape)
    view[axis] = shape[axis]
    return np.broadcast_to(edge.reshape(view), shape)


def _finish(field, result, axis, lo, hi, wrap_input):
    """Invalidate edges on windowed axes and return in the caller's type."""
    valid = field.mask.copy()
    if not field.periodic[axis]:
        # validity of the neighbours also propagates
        edge = _edge_mask(result.shape, axis, lo, hi)
        valid = valid & ~edge
        if lo:
            valid &= np.roll(field.mask, lo, axis)
        if hi:
            valid &= np.roll(field.mask, -hi, axis)
        result = np.where(valid, result, np.nan + 0j) if np.iscomplexobj(result) \
            else np.where(valid, result, np.nan)
    out = LatticeField(result, field.periodic, None if valid.all() else valid)
    return out if wrap_input else result


def _neighbours(values, axis):
    return np.roll(values, -1, axis), np.roll(values, 1, axis)


def d1(field, axis: int = -1, periodic=None):
    """Symmetric first difference ``(f[i+1] - f[i-1]) / 2`` along ``axis``.

    ``field`` may be a :class:`LatticeField` or a bare array; bare arrays are
    periodic on every axis unless ``periodic`` says otherwise.
    """
    f, wrapped = _as_field(field, periodic)
    axis = _check_axis(f, axis)
    if not f.periodic[axis] and f.values.shape[axis] < 3:
        raise ValueError("windowed axis needs at least 3 entries")
    up, dn = _neighbours(f.values, axis)
    return _finish(f, (up - dn) / 2, axis, 1, 1, wrapped)


def d2(field, axis: int = -1, periodic=None):
    """Second difference ``(f[i+1] + f[i-1] - 2 f[i]) / 2`` along ``axis``."""
    f, wrapped = _as_field(field, periodic)
    axis = _check_axis(f, axis)
    if not f.periodic[axis] and f.values.shape[axis] < 3:
        raise ValueError("windowed axis needs at least 3 entries")
    up, dn = _neighbours(f.values, axis)
    return _finish(f, D2_FACTOR * (up + dn - 2 * f.values), axis, 1, 1, wrapped)


def shift(field, axis: int, offset: int, periodic=None):
    """``result[i] = field[i + offset]``.

    On a windowed axis the last ``offset`` (or first ``-offset``) entries
    have no source and are invalidated.
    """
    f, wrapped = _as_field(field, periodic)
    axis = _check_axis(f, axis)
    extent = f.values.shape[axis]
    if abs(offset) >= extent:
        raise ValueError(f"offset {offset} out of range for axis of extent {extent}")
    result = np.roll(f.values, -offset, axis)
    lo, hi = (0, offset) if offset >= 0 else (-offset, 0)
    if f.periodic[axis] or offset == 0:
        out = LatticeField(result, f.periodic, f.valid)
        return out if wrapped else result
    valid = f.mask & ~_edge_mask(result.shape, axis, lo, hi)
    valid &= np.roll(f.mask, -offset, axis)
    result = np.where(valid, result, np.nan)
    out = LatticeField(result, f.periodic, valid)
    return out if wrapped else result
