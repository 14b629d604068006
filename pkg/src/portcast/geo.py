"""Spherical geometry primitives and lat/lon grid indexing.

All angles are decimal degrees, all distances nautical miles, on a sphere
with the mean Earth radius. Grid cells are anchored at the configured
south-west corner of the bounding box.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import OutOfBounds

EARTH_RADIUS_NM = 3440.065


@dataclass(frozen=True, slots=True)
class Coord:
    """Geographic position in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


class CellId(NamedTuple):
    """Discrete grid address; row grows northward, col eastward."""

    row: int
    col: int


def _span_cells(span: float, granularity: float) -> int:
    # The 1e-9 slack keeps exact multiples (16 / 0.005 style quotients)
    # from rounding up one extra cell through float noise.
    return max(1, math.ceil(span / granularity - 1e-9))


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Rectangular lat/lon grid with a fixed angular cell size.

    rows * cols is a derived capacity; cell storage is always allocated
    lazily by the models, never here.
    """

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    granularity: float
    rows: int = field(init=False)
    cols: int = field(init=False)

    def __post_init__(self):
        if self.granularity <= 0:
            raise ValueError("granularity must be > 0")
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError("bounding box is empty")
        object.__setattr__(self, "rows", _span_cells(self.lat_max - self.lat_min, self.granularity))
        object.__setattr__(self, "cols", _span_cells(self.lon_max - self.lon_min, self.granularity))

    @property
    def capacity(self) -> int:
        return self.rows * self.cols

    def contains(self, pos: Coord) -> bool:
        return (
            self.lat_min <= pos.lat <= self.lat_max
            and self.lon_min <= pos.lon <= self.lon_max
        )


def cell_of(pos: Coord, grid: GridSpec) -> CellId:
    """Map a position to its grid cell.

    Positions exactly on the max edges clamp to the last row/col so the
    box is closed; anything outside raises OutOfBounds.
    """
    if not grid.contains(pos):
        raise OutOfBounds(f"({pos.lat}, {pos.lon}) outside grid box")
    row = int((pos.lat - grid.lat_min) / grid.granularity)
    col = int((pos.lon - grid.lon_min) / grid.granularity)
    if row >= grid.rows:
        row = grid.rows - 1
    if col >= grid.cols:
        col = grid.cols - 1
    return CellId(row, col)


def cell_center(cell: CellId, grid: GridSpec) -> Coord:
    """Center point of a cell (edge cells of a ragged grid may reach past
    the box max; the center is still a valid coordinate)."""
    lat = grid.lat_min + (cell.row + 0.5) * grid.granularity
    lon = grid.lon_min + (cell.col + 0.5) * grid.granularity
    return Coord(min(max(lat, -90.0), 90.0), min(max(lon, -180.0), 180.0))


def clamp_to_box(pos: Coord, grid: GridSpec) -> Coord:
    """Nearest in-box position; identity for positions already inside."""
    return Coord(
        min(max(pos.lat, grid.lat_min), grid.lat_max),
        min(max(pos.lon, grid.lon_min), grid.lon_max),
    )


def haversine_nm(a: Coord, b: Coord) -> float:
    """Great-circle distance in nautical miles."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    d_phi = math.radians(b.lat - a.lat)
    d_lambda = math.radians(b.lon - a.lon)
    h = math.sin(d_phi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(d_lambda / 2.0) ** 2
    return EARTH_RADIUS_NM * 2.0 * math.asin(min(1.0, math.sqrt(h)))


def bearing_deg(a: Coord, b: Coord) -> float:
    """Initial great-circle bearing from a to b, degrees in [0, 360), 0 = north."""
    if a.lat == b.lat and a.lon == b.lon:
        raise ValueError("bearing undefined for identical points")
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    d_lambda = math.radians(b.lon - a.lon)
    y = math.sin(d_lambda) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(d_lambda)
    return math.degrees(math.atan2(y, x)) % 360.0


def angular_diff(a: float, b: float) -> float:
    """Smallest separation between two directions, degrees in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def ring_cells(center: CellId, radius: int, grid: GridSpec) -> list[CellId]:
    """In-bounds cells at Chebyshev distance exactly `radius`, row-major order.

    Radius 0 yields just the center; rings are clipped at the grid edges.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return [center]
    r0, c0 = center
    cells = []
    for row in range(max(0, r0 - radius), min(grid.rows - 1, r0 + radius) + 1):
        if abs(row - r0) == radius:
            for col in range(max(0, c0 - radius), min(grid.cols - 1, c0 + radius) + 1):
                cells.append(CellId(row, col))
        else:
            for col in (c0 - radius, c0 + radius):
                if 0 <= col < grid.cols:
                    cells.append(CellId(row, col))
    return cells
