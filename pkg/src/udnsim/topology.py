"""Random network layouts: PPP small cells in a macro-cell sector, users dropped per cell."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SectorGeometry",
    "Cell",
    "Topology",
    "sample_sbs_positions",
    "drop_users",
    "in_sector",
    "generate_topology",
    "MIN_LINK_DISTANCE",
]

# Path-loss formulas are only valid from 1 m outwards.
MIN_LINK_DISTANCE = 1.0


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1, 2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SectorGeometry:
    """A circular sector with its apex at the origin, opening from angle 0 to ``sector_angle``.

    Parameters
    ----------
    macro_radius : float
        Macro-cell radius in meters.
    sector_angle : float
        Opening angle in radians.
    close_zone_radius : float
        Close/far-zone boundary in meters. Metadata only; it does not enter any rate.
    sc_radius : float
        Radius of the disc around each SBS in which its users are dropped.
    """

    macro_radius: float = 500.0
    sector_angle: float = math.pi / 3
    close_zone_radius: float = 250.0
    sc_radius: float = 100.0
    apex: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.macro_radius > 0:
            raise ValueError(f"macro_radius must be positive, got {self.macro_radius}")
        if not 0 < self.sector_angle <= 2 * math.pi:
            raise ValueError(f"sector_angle must lie in (0, 2*pi], got {self.sector_angle}")
        if not 0 < self.close_zone_radius < self.macro_radius:
            raise ValueError(
                f"close_zone_radius must lie in (0, macro_radius), got {self.close_zone_radius}"
            )
        if not self.sc_radius > 0:
            raise ValueError(f"sc_radius must be positive, got {self.sc_radius}")
        if tuple(self.apex) != (0.0, 0.0):
            raise ValueError("only sectors with the apex at the origin are supported")

    def area(self) -> float:
        """Sector area in m^2."""
        return self.sector_angle * self.macro_radius**2 / 2

    def area_km2(self) -> float:
        return self.area() * 1e-6


@dataclass(frozen=True)
class Cell:
    sbs_index: int
    dl_users: np.ndarray
    ul_users: np.ndarray
    sc_radius: float

    def __post_init__(self):
        object.__setattr__(self, "dl_users", _frozen(self.dl_users))
        object.__setattr__(self, "ul_users", _frozen(self.ul_users))


@dataclass(frozen=True)
class Topology:
    """One random network drop. Immutable; arrays are read-only."""

    sbs_positions: np.ndarray
    cells: tuple[Cell, ...]
    geometry: SectorGeometry
    density: float
    seed: int | None = None
    _check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sbs_positions", _frozen(self.sbs_positions))
        object.__setattr__(self, "cells", tuple(self.cells))
        if len(self.cells) != len(self.sbs_positions):
            raise ValueError("one cell per SBS is required")
        if self._check:
            for p in self.sbs_positions:
                if not in_sector(p, self.geometry):
                    raise ValueError(f"SBS at {tuple(p)} lies outside the sector")

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def dl_positions(self) -> np.ndarray:
        """DL user positions stacked as (n_cells, n_dl, 2)."""
        return _stack(c.dl_users for c in self.cells)

    def ul_positions(self) -> np.ndarray:
        return _stack(c.ul_users for c in self.cells)

    def to_dict(self) -> dict:
        return {
            "density": self.density,
            "seed": self.seed,
            "sbs_positions": self.sbs_positions.tolist(),
            "cells": [
                {
                    "sbs_index": c.sbs_index,
                    "sc_radius": c.sc_radius,
                    "dl_users": c.dl_users.tolist(),
                    "ul_users": c.ul_users.tolist(),
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_users(cls, sbs_positions, dl_users, ul_users, *,
                   geometry: SectorGeometry | None = None, density: float = 0.0) -> Topology:
        """Build a hand-placed topology, e.g. for tests and small what-if layouts.

        ``dl_users`` and ``ul_users`` are per-cell sequences of 2-D points.
        """
        geometry = geometry or SectorGeometry()
        cells = [
            Cell(i, np.asarray(d, dtype=float), np.asarray(u, dtype=float), geometry.sc_radius)
            for i, (d, u) in enumerate(zip(dl_users, ul_users))
        ]
        return cls(np.asarray(sbs_positions, dtype=float), cells, geometry, density)


def _stack(arrays) -> np.ndarray:
    arrays = list(arrays)
    if not arrays:
        return np.zeros((0, 0, 2))
    return np.stack(arrays)


def in_sector(p, geometry: SectorGeometry) -> bool:
    x, y = float(p[0]), float(p[1])
    r = math.hypot(x, y)
    if r > geometry.macro_radius:
        return False
    if r == 0.0:
        return True
    angle = math.atan2(y, x) % (2 * math.pi)
    # Points on the closing edge may come back as ~2*pi after the modulo.
    if geometry.sector_angle >= 2 * math.pi:
        return True
    return angle <= geometry.sector_angle + 1e-12 or angle >= 2 * math.pi - 1e-12


def sample_sbs_positions(density: float, geometry: SectorGeometry,
                         rng: np.random.Generator) -> np.ndarray:
    """Draw SBS locations from a homogeneous PPP of ``density`` SBS/km^2 inside the sector.

    Returns an array of shape (n, 2) in meters.
    """
    if density < 0 or not math.isfinite(density):
        raise ValueError(f"density must be a finite non-negative number, got {density}")
    n = int(rng.poisson(density * geometry.area_km2()))
    # r^2 uniform gives a uniform density over the sector area.
    r = geometry.macro_radius * np.sqrt(rng.random(n))
    phi = geometry.sector_angle * rng.random(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def drop_users(sbs, sc_radius: float, n_dl: int, n_ul: int,
               rng: np.random.Generator, sbs_index: int = 0) -> Cell:
    """Drop ``n_dl + n_ul`` users uniformly in the annulus ``[1 m, sc_radius]`` around ``sbs``."""
    if not sc_radius > 0:
        raise ValueError(f"sc_radius must be positive, got {sc_radius}")
    if n_dl < 0 or n_ul < 0:
        raise ValueError("user counts must be non-negative")
    n = n_dl + n_ul
    r_min = min(MIN_LINK_DISTANCE, sc_radius)
    r = np.sqrt(r_min**2 + rng.random(n) * (sc_radius**2 - r_min**2))
    phi = 2 * np.pi * rng.random(n)
    pts = np.asarray(sbs, dtype=float) + np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    return Cell(sbs_index, pts[:n_dl], pts[n_dl:], sc_radius)


def generate_topology(density: float, geometry: SectorGeometry, rng: np.random.Generator, *,
                      n_dl: int = 2, n_ul: int = 2, seed: int | None = None) -> Topology:
    sbs = sample_sbs_positions(density, geometry, rng)
    cells = [drop_users(p, geometry.sc_radius, n_dl, n_ul, rng, sbs_index=i) for i, p in enumerate(sbs)]
    return Topology(sbs, cells, geometry, density, seed)
