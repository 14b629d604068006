"""Per-cell layered destination counters: training, lookup, aggregation.

Each trained cell keys a hash table on the integer course; under every
course key sit three more tables (ship type, speed bucket, departure
port) whose values are destination counters. A prediction walks the
cell's tables, collects the counter sets matching the evaluated record,
and sums them per destination.
"""

from dataclasses import dataclass, field
from typing import Mapping

from .config import EngineConfig
from .errors import NoModel, OutOfBounds, UnknownPort
from .geo import (
    CellId,
    Coord,
    GridSpec,
    angular_diff,
    bearing_deg,
    cell_center,
    cell_of,
    clamp_to_box,
    haversine_nm,
    ring_cells,
)
from .records import AisRecord, PortRegistry, course_key_of, speed_bucket_of

DestCounters = dict[str, int]


@dataclass(slots=True)
class DimTables:
    """The three per-course-key dimension tables of one cell."""

    type_table: dict[int, DestCounters] = field(default_factory=dict)
    speed_table: dict[int, DestCounters] = field(default_factory=dict)
    departure_table: dict[str, DestCounters] = field(default_factory=dict)


@dataclass(slots=True)
class DestCellModel:
    """Layered counter tables of one trained cell."""

    course_table: dict[int, DimTables] = field(default_factory=dict)
    trained_count: int = 0


def _bump(table: dict, key, dest: str) -> None:
    counters = table.get(key)
    if counters is None:
        counters = table[key] = {}
    counters[dest] = counters.get(dest, 0) + 1


def find_trained_cell(
    cells: Mapping[CellId, object],
    cell: CellId,
    course: float,
    grid: GridSpec,
    max_radius: int,
) -> CellId | None:
    """The query cell if trained, else the closest trained cell.

    Rings of growing Chebyshev radius are scanned; within the first
    non-empty ring the winner is the cell whose direction from the query
    cell lies closest to the record's course, ties broken by larger
    trained_count, then row-major order.
    """
    if cell in cells:
        return cell
    origin = cell_center(cell, grid)
    for radius in range(1, max_radius + 1):
        best_key = None
        best_cell = None
        for candidate in ring_cells(cell, radius, grid):
            model = cells.get(candidate)
            if model is None:
                continue
            diff = angular_diff(bearing_deg(origin, cell_center(candidate, grid)), course)
            key = (diff, -model.trained_count, candidate)
            if best_key is None or key < best_key:
                best_key = key
                best_cell = candidate
        if best_cell is not None:
            return best_cell
    return None


def candidate_sets(
    cell: DestCellModel,
    rec: AisRecord,
    tolerance: float,
    speed_bucket: float,
) -> list[DestCounters]:
    """Counter sets matching the record in one cell.

    Every course key within the tolerance contributes the counters its
    type / speed / departure tables hold for the record's values, in
    ascending course distance, then type, speed, departure order.
    """
    bucket = speed_bucket_of(rec.speed, speed_bucket)
    keys = sorted(
        (key for key in cell.course_table if angular_diff(key, rec.course) <= tolerance),
        key=lambda key: (angular_diff(key, rec.course), key),
    )
    sets: list[DestCounters] = []
    for key in keys:
        dims = cell.course_table[key]
        hit = dims.type_table.get(rec.ship_type)
        if hit is not None:
            sets.append(hit)
        hit = dims.speed_table.get(bucket)
        if hit is not None:
            sets.append(hit)
        hit = dims.departure_table.get(rec.departure_port)
        if hit is not None:
            sets.append(hit)
    return sets


def _all_counter_sets(cell: DestCellModel) -> list[DestCounters]:
    sets: list[DestCounters] = []
    for dims in cell.course_table.values():
        sets.extend(dims.type_table.values())
        sets.extend(dims.speed_table.values())
        sets.extend(dims.departure_table.values())
    return sets


class DestGridModel:
    """Sparse grid of destination cell models plus global frequency tables.

    The global departure->destination and type->destination counters back
    the aggregation tie-breaks and the fallbacks for records nothing in
    the grid matches.

    Training is single-writer; prediction is read-only and may run
    concurrently with other predictions, never with training.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.cells: dict[CellId, DestCellModel] = {}
        self.departure_freq: dict[str, DestCounters] = {}
        self.type_freq: dict[int, DestCounters] = {}
        self.trained_total = 0
        self.skipped = 0

    def train(self, rec: AisRecord, speed_bucket: float) -> bool:
        """Learn one labeled record; False means skipped (outside the box)."""
        dest = rec.label_destination
        if dest is None:
            raise ValueError("training requires label_destination")
        try:
            cell_id = cell_of(rec.pos, self.grid)
        except OutOfBounds:
            self.skipped += 1
            return False
        cell = self.cells.get(cell_id)
        if cell is None:
            cell = self.cells[cell_id] = DestCellModel()
        dims = cell.course_table.get(course_key_of(rec.course))
        if dims is None:
            dims = cell.course_table[course_key_of(rec.course)] = DimTables()
        _bump(dims.type_table, rec.ship_type, dest)
        _bump(dims.speed_table, speed_bucket_of(rec.speed, speed_bucket), dest)
        _bump(dims.departure_table, rec.departure_port, dest)
        cell.trained_count += 1
        self.trained_total += 1
        _bump(self.departure_freq, rec.departure_port, dest)
        _bump(self.type_freq, rec.ship_type, dest)
        return True

    def aggregate(
        self,
        cands: list[DestCounters],
        rec: AisRecord,
        ports: PortRegistry,
        cfg: EngineConfig,
    ) -> str | None:
        """Sum candidate counters per destination; the maximum wins.

        Ties run through cfg.tie_break_order, then lexicographic port
        name. None only for an empty candidate list.
        """
        if not cands:
            return None
        totals: DestCounters = {}
        for counters in cands:
            for dest, count in counters.items():
                totals[dest] = totals.get(dest, 0) + count
        for dest in totals:
            if dest not in ports:
                raise UnknownPort(dest)
        return min(totals, key=lambda dest: self._rank_key(dest, totals[dest], rec, ports, cfg))

    def _rank_key(self, dest: str, total: int, rec: AisRecord, ports: PortRegistry, cfg: EngineConfig):
        key: list = [-total]
        port = ports.get(dest)
        for criterion in cfg.tie_break_order:
            if criterion == "geo_course":
                key.append(_course_alignment(rec, port.pos))
            elif criterion == "geo_distance":
                key.append(haversine_nm(rec.pos, port.pos))
            elif criterion == "departure_freq":
                key.append(-self.departure_freq.get(rec.departure_port, {}).get(dest, 0))
            else:  # type_freq
                key.append(-self.type_freq.get(rec.ship_type, {}).get(dest, 0))
        key.append(dest)
        return tuple(key)

    def predict(self, rec: AisRecord, ports: PortRegistry, cfg: EngineConfig) -> str:
        """Raw (unfiltered) destination prediction; always returns a port.

        Fallback chain when the matched cell yields no candidates:
        whole-cell aggregation ignoring dimension matching, then the
        globally most frequent destination for the record's departure,
        then the port best aligned with the record's course.
        """
        if self.trained_total == 0:
            raise NoModel("no destination records trained")
        cell_id = cell_of(clamp_to_box(rec.pos, self.grid), self.grid)
        chosen = find_trained_cell(self.cells, cell_id, rec.course, self.grid, cfg.max_ring_radius)
        if chosen is not None:
            cell = self.cells[chosen]
            dest = self.aggregate(
                candidate_sets(cell, rec, cfg.course_tolerance, cfg.speed_bucket), rec, ports, cfg
            )
            if dest is None:
                dest = self.aggregate(_all_counter_sets(cell), rec, ports, cfg)
            if dest is not None:
                return dest
        by_departure = self.departure_freq.get(rec.departure_port)
        if by_departure:
            dest = min(by_departure, key=lambda d: (-by_departure[d], d))
            if dest not in ports:
                raise UnknownPort(dest)
            return dest
        return min(ports, key=lambda port: (_course_alignment(rec, port.pos), port.name)).name


def _course_alignment(rec: AisRecord, target: Coord) -> float:
    if rec.pos.lat == target.lat and rec.pos.lon == target.lon:
        return 0.0
    return angular_diff(bearing_deg(rec.pos, target), rec.course)
