"""Equivolumetric grids on SO(3) and S^3 built from HEALPix + Hopf fibration.

A level-``L`` SO(3) grid has ``72 * 8**L`` rotations: ``12 * 4**L`` HEALPix
pixel centres (``nside = 2**L``) times ``6 * 2**L`` circle angles.  Every
cell carries the same Haar weight ``1 / N`` so that weights sum to one.
"""

from __future__ import annotations

import csv
import functools
import os
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import InvalidResolution
from .so3 import quat_to_rotmat, rotmat_to_quat

MAX_LEVEL = 5
MAGIC = b"SO3GRIDv1"
_HEADER = struct.Struct("<9sIQ")


def _check_level(level):
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)) or not 0 <= level <= MAX_LEVEL:
        raise InvalidResolution(f"grid level must be an integer in [0, {MAX_LEVEL}], got {level!r}")
    return int(level)


def healpix_pix2ang(nside):
    """Colatitude/longitude of all RING-ordered HEALPix pixel centres.

    Returns ``(theta, phi)`` arrays of length ``12 * nside**2``.
    """
    if isinstance(nside, bool) or not isinstance(nside, (int, np.integer)) or nside < 1 or nside & (nside - 1):
        raise InvalidResolution(f"nside must be a positive power of two, got {nside!r}")
    nside = int(nside)
    npix = 12 * nside * nside
    ncap = 2 * nside * (nside - 1)
    pix = np.arange(npix)
    z = np.empty(npix)
    phi = np.empty(npix)

    north = pix < ncap
    p = pix[north]
    iring = (1 + np.sqrt(1 + 2 * p).astype(int)) // 2
    # guard against float sqrt rounding for large p
    iring = np.where(2 * iring * (iring - 1) > p, iring - 1, iring)
    iring = np.where(2 * (iring + 1) * iring <= p, iring + 1, iring)
    iphi = p + 1 - 2 * iring * (iring - 1)
    z[north] = 1.0 - iring**2 / (3.0 * nside**2)
    phi[north] = (iphi - 0.5) * np.pi / (2.0 * iring)

    equ = (pix >= ncap) & (pix < npix - ncap)
    p = pix[equ] - ncap
    iring = p // (4 * nside) + nside
    iphi = p % (4 * nside) + 1
    fodd = np.where((iring + nside) & 1, 1.0, 0.5)
    z[equ] = (2 * nside - iring) * 2.0 / (3.0 * nside)
    phi[equ] = (iphi - fodd) * np.pi / (2.0 * nside)

    south = pix >= npix - ncap
    p = npix - pix[south]
    iring = (1 + np.sqrt(2 * p - 1).astype(int)) // 2
    iring = np.where(2 * iring * (iring - 1) >= p, iring - 1, iring)
    iring = np.where(2 * (iring + 1) * iring < p, iring + 1, iring)
    iphi = 4 * iring + 1 - (p - 2 * iring * (iring - 1))
    z[south] = -1.0 + iring**2 / (3.0 * nside**2)
    phi[south] = (iphi - 0.5) * np.pi / (2.0 * iring)

    return np.arccos(np.clip(z, -1.0, 1.0)), phi


def healpix_sphere_grid(nside):
    """Unit vectors at the ``12 * nside**2`` equal-area HEALPix pixel centres."""
    theta, phi = healpix_pix2ang(nside)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def hopf_quaternions(level):
    """Unit quaternions (one per rotation) of the level-``level`` Hopf grid."""
    level = _check_level(level)
    theta, phi = healpix_pix2ang(2**level)
    n_psi = 6 * 2**level
    psi = 2.0 * np.pi * (np.arange(n_psi) + 0.5) / n_psi
    th = theta[:, None] / 2.0
    ph = phi[:, None]
    ps = psi[None, :] / 2.0
    q = np.stack(
        np.broadcast_arrays(
            np.cos(th) * np.cos(ps),
            np.cos(th) * np.sin(ps),
            np.sin(th) * np.cos(ph + ps),
            np.sin(th) * np.sin(ph + ps),
        ),
        axis=-1,
    ).reshape(-1, 4)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class So3Grid:
    """Equivolumetric SO(3) grid; ``delta`` is the Haar weight of each cell."""

    points: np.ndarray
    level: int
    quats: np.ndarray

    @property
    def delta(self):
        return 1.0 / len(self.points)

    @property
    def weights(self):
        return np.full(len(self.points), self.delta)

    @property
    def flat(self):
        """``(N, 9)`` row-major view used for batched trace products."""
        return self.points.reshape(-1, 9)

    def __len__(self):
        return len(self.points)

    @functools.cached_property
    def cell_radius(self):
        """Largest half nearest-neighbour geodesic distance over the grid."""
        return _cell_radius(self.quats)


@dataclass(frozen=True, eq=False)
class S3Grid:
    """Grid on S^3 with both lifts of every SO(3) grid rotation; weights sum to 2 pi^2."""

    points: np.ndarray
    level: int

    @property
    def delta(self):
        return 2.0 * np.pi**2 / len(self.points)

    @property
    def weights(self):
        return np.full(len(self.points), self.delta)

    def __len__(self):
        return len(self.points)


def _cell_radius(quats):
    both = np.concatenate([quats, -quats])
    tree = cKDTree(both)
    d, _ = tree.query(quats, k=2)
    # chord c between unit quaternions <-> rotation angle 4 * arcsin(c / 2)
    nn = 4.0 * np.arcsin(np.clip(d[:, 1] / 2.0, 0.0, 1.0))
    return float(nn.max() / 2.0)


_lock = threading.Lock()
_so3_cache: dict[int, So3Grid] = {}


def _freeze(a):
    a.setflags(write=False)
    return a


def _build_so3(level):
    q = hopf_quaternions(level)
    return So3Grid(points=_freeze(quat_to_rotmat(q)), level=level, quats=_freeze(q))


def cache_dir():
    """On-disk grid cache directory from ``SO3_GRID_CACHE``, or None if unset."""
    path = os.environ.get("SO3_GRID_CACHE")
    return Path(path) if path else None


def hopf_so3_grid(level=3):
    """Cached level-``level`` SO(3) grid (``72 * 8**level`` rotations)."""
    level = _check_level(level)
    with _lock:
        grid = _so3_cache.get(level)
        if grid is None:
            directory = cache_dir()
            if directory is not None:
                path = directory / f"so3_level{level}.bin"
                if path.exists():
                    loaded_level, mats = read_grid_bin(path)
                    if loaded_level == level and len(mats) == 72 * 8**level:
                        grid = So3Grid(points=_freeze(mats), level=level, quats=_freeze(hopf_quaternions(level)))
            if grid is None:
                grid = _build_so3(level)
                if directory is not None:
                    directory.mkdir(parents=True, exist_ok=True)
                    write_grid_bin(directory / f"so3_level{level}.bin", grid)
            _so3_cache[level] = grid
    return grid


def s3_grid(level=3):
    """Quaternion grid containing ``q`` and ``-q`` for every SO(3) grid rotation."""
    base = hopf_so3_grid(level)
    return S3Grid(points=_freeze(np.concatenate([base.quats, -base.quats])), level=base.level)


def write_grid_bin(path, grid):
    """Binary cache: ``SO3GRIDv1``, u32 level, u64 count, count x 9 f64 (little-endian)."""
    path = Path(path)
    mats = np.ascontiguousarray(grid.points, dtype="<f8").reshape(-1, 9)
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, grid.level, len(mats)))
            fh.write(mats.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write grid file {path}: {exc.strerror or exc}") from exc


def read_grid_bin(path):
    """Return ``(level, (N, 3, 3) array)`` from a binary grid file."""
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, level, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != 9 * count:
        raise ValueError(f"{path}: expected {count} matrices, found {data.size / 9:g}")
    return int(level), data.reshape(count, 3, 3).astype(float)


def write_grid_csv(path, grid):
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id"] + [f"r{i}{j}" for i in range(3) for j in range(3)])
            for k, m in enumerate(grid.points.reshape(-1, 9)):
                writer.writerow([k] + [repr(float(x)) for x in m])
    except OSError as exc:
        raise OSError(f"cannot write grid file {path}: {exc.strerror or exc}") from exc


def read_grid_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [[float(x) for x in row[1:]] for row in reader]
    return np.array(rows).reshape(-1, 3, 3)


def grid_from_rotations(points, level=-1):
    """Wrap arbitrary rotations (e.g. loaded from disk) as an equal-weight grid."""
    points = np.asarray(points, dtype=float)
    return So3Grid(points=_freeze(points), level=level, quats=_freeze(rotmat_to_quat(points)))
