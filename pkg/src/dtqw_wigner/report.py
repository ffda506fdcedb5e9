"""Residual reports shared by the audits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def norms(residual: np.ndarray, mask: np.ndarray | None = None) -> dict[str, float]:
    """Max-abs and L2 norm of ``residual``, NaNs excluded, optionally masked."""
    r = np.asarray(residual)
    keep = np.isfinite(r)
    if mask is not None:
        keep &= np.broadcast_to(mask, r.shape)
    r = r[keep]
    if r.size == 0:
        return {"max": 0.0, "l2": 0.0}
    a = np.abs(r)
    return {"max": float(a.max()), "l2": float(np.sqrt(np.sum(a * a)))}


@dataclass
class ResidualReport:
    """Per-variant residual norms plus per-term diagnostics.

    ``residuals`` maps a variant name to ``{"max": .., "l2": ..}``;
    ``terms`` holds named term norms; ``notes`` anything else worth keeping.
    """

    name: str
    residuals: dict[str, dict[str, float]] = field(default_factory=dict)
    terms: dict[str, float] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    tolerance: float = 0.0

    def add(self, variant: str, residual, mask=None):
        self.residuals[variant] = norms(residual, mask)

    def exact_variants(self, tol: float | None = None) -> list[str]:
        tol = self.tolerance if tol is None else tol
        return [v for v, n in self.residuals.items() if n["max"] <= tol]

    def max(self, variant: str) -> float:
        return self.residuals[variant]["max"]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "residuals": self.residuals,
            "exact_variants": self.exact_variants(),
            "terms": self.terms,
            "notes": self.notes,
        }
