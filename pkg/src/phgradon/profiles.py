"""Sample grids toward the boundary and the sampled profiles taken on them."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GeometricGrid:
    """Points rho_j = rho0 * ratio**j, j = 0..count-1."""

    rho0: float = 1e-2
    ratio: float = 0.8
    count: int = 40

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("grid ratio must lie in (0, 1)")
        if not 0.0 < self.rho0 <= 0.5:
            raise ValueError("grid points must lie in (0, 1/2]")
        if self.count < 2:
            raise ValueError("grid needs at least two points")

    def points(self) -> np.ndarray:
        return self.rho0 * self.ratio ** np.arange(self.count)

    def to_json(self) -> dict:
        return {"rho0": self.rho0, "ratio": self.ratio, "count": self.count}


@dataclass
class ProfileSamples:
    """Values f(rho_j) with a per-sample quadrature error estimate."""

    rho: np.ndarray
    values: np.ndarray
    errors: np.ndarray | None = None

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.errors is None:
            self.errors = np.zeros(self.rho.shape)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.rho.shape != self.values.shape:
            raise ValueError("rho and values must have the same shape")

    @classmethod
    def from_function(cls, f, grid) -> "ProfileSamples":
        rho = grid.points() if hasattr(grid, "points") else np.asarray(grid, dtype=float)
        return cls(rho, np.asarray(f(rho), dtype=complex))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rho", "re_value", "im_value", "est_error"])
        for r, v, e in zip(self.rho, self.values, self.errors):
            writer.writerow([repr(float(r)), repr(float(v.real)), repr(float(v.imag)), repr(float(e))])
        return buf.getvalue()
