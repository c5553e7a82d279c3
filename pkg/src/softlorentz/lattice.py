"""Periodic scatterer geometry.

Presets
-------
``hex2d``
    Triangular lattice spanned by u = (1, 0), v = (1/2, sqrt(3)/2) with one
    disk of radius ``q_star`` per lattice point.  Finite horizon requires
    sqrt(3)/4 < q_star < 1/2.
``line1d``
    Circle of circumference 1 with the scatterer support [0, 2*q_star] in
    every cell (center at q_star).

Ray queries use incremental cell traversal (a DDA over the oblique cell
grid); candidate disks per cell are the cell's own plus one ring of
neighbors, which is exhaustive for radii below 1/2.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from ._kernels import active as _kern
from .errors import HorizonExceeded, HorizonViolation, InvalidRadius

HEX_MIN_RADIUS = math.sqrt(3.0) / 4.0
_UNIT_TOL = 1e-12
_PRE_TOL = 1e-12
_HORIZON_MARGIN = 1.5
_SWEEP_CAP = 10.0       # sampled free path above this certifies a violation
_PROVISIONAL_BOUND = 64.0
DEFAULT_SWEEP_RAYS = 10_000


@dataclass
class LatticeSpec:
    """Scatterer lattice with a certified finite-horizon bound.

    Treat instances as immutable once built; ``validate_horizon`` is the
    only sanctioned mutation and is part of construction.
    """

    dim: int
    basis: np.ndarray           # (dim, dim) rows are the basis vectors
    q_star: float
    horizon_bound: float
    preset: str = "hex2d"

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=float)
        norms = np.linalg.norm(self.basis, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
            raise ValueError("basis vectors must have unit norm")

    @property
    def support_width(self):
        """1D support length 2*q_star; only meaningful for line1d."""
        return 2.0 * self.q_star

    def centers_near(self, point, radius):
        """Brute-force list of (index, center) with |center - point| <= radius.

        Intended for oracles and validation, not the hot path.
        """
        point = np.asarray(point, dtype=float)
        if self.dim == 1:
            lo = int(math.floor(point[0] - radius)) - 1
            hi = int(math.ceil(point[0] + radius)) + 1
            out = []
            for m in range(lo, hi + 1):
                c = m + self.q_star
                if abs(c - point[0]) <= radius:
                    out.append(((m, 0), np.array([c])))
            return out
        u, v = self.basis
        # fractional coordinates of the point
        fb = point[1] / v[1]
        fa = point[0] - fb * v[0]
        rad_idx = int(math.ceil(radius / v[1])) + 2
        out = []
        for j in range(int(math.floor(fb)) - rad_idx, int(math.floor(fb)) + rad_idx + 1):
            for i in range(int(math.floor(fa)) - rad_idx, int(math.floor(fa)) + rad_idx + 1):
                c = i * u + j * v
                if np.dot(c - point, c - point) <= radius * radius:
                    out.append(((i, j), c))
        return out


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.direction = np.asarray(self.direction, dtype=float)
        n = math.sqrt(float(np.dot(self.direction, self.direction)))
        if abs(n - 1.0) > _UNIT_TOL:
            raise ValueError("ray direction must be a unit vector")


class NextHit(NamedTuple):
    center: np.ndarray
    lattice_index: tuple
    entry_distance: float


def build_lattice(preset, q_star, n_rays=DEFAULT_SWEEP_RAYS, sweep_seed=0):
    """Construct a lattice spec and certify its horizon bound.

    Raises InvalidRadius for q_star outside (0, 1/2) and HorizonViolation
    when the hex preset is outside its finite-horizon window or the sweep
    finds an over-long free path.
    """
    q_star = float(q_star)
    if q_star <= 0.0 or q_star >= 0.5:
        raise InvalidRadius(
            f"q_star={q_star} outside (0, 0.5): support must fit in the cell")
    if preset == "hex2d":
        if q_star <= HEX_MIN_RADIUS:
            raise HorizonViolation(
                f"q_star={q_star} <= sqrt(3)/4; hex lattice has infinite horizon")
        basis = np.array([[1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
        spec = LatticeSpec(dim=2, basis=basis, q_star=q_star,
                           horizon_bound=_PROVISIONAL_BOUND, preset=preset)
        validate_horizon(spec, n_rays, seed=sweep_seed)
        return spec
    if preset == "line1d":
        basis = np.array([[1.0]])
        spec = LatticeSpec(dim=1, basis=basis, q_star=q_star,
                           horizon_bound=_PROVISIONAL_BOUND, preset=preset)
        validate_horizon(spec, n_rays, seed=sweep_seed)
        return spec
    raise ValueError(f"unknown lattice preset {preset!r}")


def validate_horizon(lattice, n_rays=DEFAULT_SWEEP_RAYS, seed=0):
    """Certify the horizon empirically and store 1.5x the observed maximum.

    Sweeps n_rays rays with origin uniform in a unit cell (outside disks)
    and uniform direction, recording the free path to the first disk entry.
    For line1d the gap is a single interval, so the exact gap length is used
    instead of sampling.  Raises HorizonViolation if any free path exceeds
    10 lattice units.  Returns the maximum free path found.
    """
    if lattice.dim == 1:
        gap = 1.0 - lattice.support_width
        lattice.horizon_bound = _HORIZON_MARGIN * gap
        return gap
    if n_rays < DEFAULT_SWEEP_RAYS:
        raise ValueError("horizon sweep needs at least 10^4 rays")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    q_star = lattice.q_star
    u, v = lattice.basis
    max_path = 0.0
    done = 0
    while done < n_rays:
        s, r = rng.random(2)
        pt = s * u + r * v
        # origin must lie in the interstitial region
        if _nearest_center_dist_hex(pt[0], pt[1]) < q_star:
            continue
        theta = rng.random() * 2.0 * math.pi
        dist, _di, _dj, _rx, _ry = _kern.free_flight_hex(
            pt[0], pt[1], math.cos(theta), math.sin(theta),
            q_star, _PROVISIONAL_BOUND)
        if dist < 0.0 or dist > _SWEEP_CAP:
            raise HorizonViolation(
                f"free path beyond {_SWEEP_CAP} lattice units at origin {pt}")
        if dist > max_path:
            max_path = dist
        done += 1
    lattice.horizon_bound = _HORIZON_MARGIN * max_path
    return max_path


def _nearest_center_dist_hex(x, y):
    fb = y * _kern.TWO_INV_SQRT3
    fa = x - y * _kern.INV_SQRT3
    ia = math.floor(fa)
    ib = math.floor(fb)
    best = math.inf
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            cx = (ia + di) + (ib + dj) * 0.5
            cy = (ib + dj) * _kern.HALF_SQRT3
            d = math.hypot(x - cx, y - cy)
            if d < best:
                best = d
    return best


def _hex_anchor(x, y):
    """Nearby lattice point used to keep traversal coordinates small."""
    jb = round(y * _kern.TWO_INV_SQRT3)
    ia = round(x - jb * 0.5)
    return int(ia), int(jb)


def next_scatterer(ray, lattice):
    """First disk the ray enters: (center, lattice_index, entry_distance).

    Pre: the origin is outside every disk (distance to each center at least
    q_star - 1e-12).  Raises HorizonExceeded when nothing is hit within the
    certified bound, which for a validated lattice signals a geometry bug.
    """
    if lattice.dim == 1:
        return _next_scatterer_1d(ray, lattice)
    x, y = float(ray.origin[0]), float(ray.origin[1])
    if _nearest_center_dist_hex(x, y) < lattice.q_star - _PRE_TOL:
        raise ValueError("ray origin lies inside a scatterer")
    ai, aj = _hex_anchor(x, y)
    lx = x - (ai + aj * 0.5)
    ly = y - aj * _kern.HALF_SQRT3
    dist, di, dj, _rx, _ry = _kern.free_flight_hex(
        lx, ly, float(ray.direction[0]), float(ray.direction[1]),
        lattice.q_star, lattice.horizon_bound)
    if dist < 0.0:
        raise HorizonExceeded(
            f"no scatterer within {lattice.horizon_bound} lattice units")
    i, j = ai + di, aj + dj
    center = np.array([i + j * 0.5, j * _kern.HALF_SQRT3])
    return NextHit(center=center, lattice_index=(i, j), entry_distance=dist)


def _next_scatterer_1d(ray, lattice):
    x = float(ray.origin[0])
    sgn = float(ray.direction[0])
    w = lattice.support_width
    m = math.floor(x)
    frac = x - m
    if 0.0 < frac < w:
        raise ValueError("ray origin lies inside a scatterer support")
    if sgn > 0.0:
        if frac == 0.0:
            dist, cell = 0.0, int(m)
        else:
            dist, cell = 1.0 - frac, int(m) + 1
    else:
        if frac == 0.0:
            dist, cell = 1.0 - w, int(m) - 1
        elif frac == w:
            dist, cell = 0.0, int(m)
        else:
            dist, cell = frac - w, int(m)
    if dist > lattice.horizon_bound:
        raise HorizonExceeded("1D gap longer than certified bound")
    center = np.array([cell + lattice.q_star])
    return NextHit(center=center, lattice_index=(cell, 0), entry_distance=dist)


def brute_force_next(ray, lattice, search_radius=None):
    """Disk-enumeration oracle for next_scatterer (slow, exhaustive).

    Enumerates all centers within search_radius (default 3x horizon bound)
    of the origin and intersects each, applying the same grazing and
    minimum-entry rules as the traversal kernel.
    """
    if search_radius is None:
        search_radius = 3.0 * lattice.horizon_bound
    origin = np.asarray(ray.origin, dtype=float)
    direction = np.asarray(ray.direction, dtype=float)
    best = math.inf
    best_idx = None
    best_center = None
    qs2 = lattice.q_star * lattice.q_star
    for idx, center in lattice.centers_near(origin, search_radius):
        rel = origin - center
        b = float(np.dot(rel, direction))
        c = float(np.dot(rel, rel)) - qs2
        disc = b * b - c
        if disc < _kernels.pure.GRAZE_DISC:
            continue
        s = -b - math.sqrt(disc)
        if s > _kernels.pure.MIN_ENTRY and s < best:
            best = s
            best_idx = idx
            best_center = center
    if best_idx is None:
        raise HorizonExceeded("oracle found no intersection in search radius")
    return NextHit(center=best_center, lattice_index=best_idx,
                   entry_distance=best)
