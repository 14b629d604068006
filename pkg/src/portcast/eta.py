"""Fine-grid arrival-time model.

Cells on a finer grid hold, per destination port, running means of the
remaining travel time plus the reference report closest to that mean.
Prediction reads a single configured dimension table and optionally
adjusts the mean by the time needed to sail from the evaluated position
to the reference one.
"""

from dataclasses import dataclass, field

from .config import EngineConfig
from .dest import find_trained_cell
from .errors import NoEtaModel, OutOfBounds
from .geo import CellId, GridSpec, angular_diff, bearing_deg, cell_of, clamp_to_box, haversine_nm
from .records import AisRecord, course_key_of, speed_bucket_of

# Below this speed the sail-time adjustment is skipped: a moored or
# drifting ship would turn the distance/speed quotient into hours.
MIN_ADJUST_SPEED_KN = 0.5


@dataclass(slots=True)
class TimeStats:
    """Running mean of remaining travel time plus the closest reference report."""

    count: int = 0
    mean_remaining: float = 0.0
    ref_record: AisRecord | None = None
    ref_remaining: float = 0.0

    def update(self, remaining: float, rec: AisRecord) -> None:
        self.count += 1
        self.mean_remaining += (remaining - self.mean_remaining) / self.count
        # Strict <: on a tie the incumbent reference stays.
        if self.ref_record is None or abs(remaining - self.mean_remaining) < abs(
            self.ref_remaining - self.mean_remaining
        ):
            self.ref_record = rec
            self.ref_remaining = remaining


@dataclass(slots=True)
class DestTimeTables:
    """Per-destination stats of one cell: aggregate plus dimension tables."""

    overall: TimeStats = field(default_factory=TimeStats)
    by_course: dict[int, TimeStats] = field(default_factory=dict)
    by_speed: dict[int, TimeStats] = field(default_factory=dict)
    by_departure: dict[str, TimeStats] = field(default_factory=dict)


@dataclass(slots=True)
class EtaCellModel:
    destinations: dict[str, DestTimeTables] = field(default_factory=dict)
    trained_count: int = 0


def adjust_eta(base: float, rec: AisRecord, ref: AisRecord) -> float:
    """Correct a mean remaining time by the sail time between the evaluated
    report and the reference one.

    A ship trailing the reference (reference lies ahead along its course)
    still has to cover that gap, so the time is added; a ship already past
    it gets the time subtracted. Never returns a negative duration.
    """
    if rec.speed <= 0.0:
        raise ValueError("speed must be positive for the travel-time adjustment")
    gap_nm = haversine_nm(rec.pos, ref.pos)
    if gap_nm == 0.0:
        return max(0.0, base)
    gap_s = gap_nm / rec.speed * 3600.0
    if angular_diff(bearing_deg(rec.pos, ref.pos), rec.course) < 90.0:
        adjusted = base + gap_s
    else:
        adjusted = base - gap_s
    return max(0.0, adjusted)


class EtaGridModel:
    """Sparse fine grid of per-destination time statistics.

    Same write contract as the destination grid: single-writer training,
    concurrent read-only prediction, phases externally serialized.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.cells: dict[CellId, EtaCellModel] = {}
        self.global_stats: dict[str, TimeStats] = {}
        self.skipped = 0
        self.rejected = 0

    def train(self, rec: AisRecord, speed_bucket: float) -> bool:
        """Learn one fully labeled record; False means skipped or rejected."""
        if not rec.labeled:
            raise ValueError("training requires both labels")
        remaining = rec.label_arrival - rec.timestamp
        if remaining < 0:
            self.rejected += 1
            return False
        try:
            cell_id = cell_of(rec.pos, self.grid)
        except OutOfBounds:
            self.skipped += 1
            return False
        cell = self.cells.get(cell_id)
        if cell is None:
            cell = self.cells[cell_id] = EtaCellModel()
        dest = rec.label_destination
        tables = cell.destinations.get(dest)
        if tables is None:
            tables = cell.destinations[dest] = DestTimeTables()
        tables.overall.update(remaining, rec)
        _update(tables.by_course, course_key_of(rec.course), remaining, rec)
        _update(tables.by_speed, speed_bucket_of(rec.speed, speed_bucket), remaining, rec)
        _update(tables.by_departure, rec.departure_port, remaining, rec)
        cell.trained_count += 1
        _update(self.global_stats, dest, remaining, rec)
        return True

    def predict(self, rec: AisRecord, dest: str, cfg: EngineConfig) -> float:
        """Predicted arrival in epoch seconds for the given destination.

        The record's cell is resolved with the same course-aligned ring
        search as destination prediction; stats are read from the
        configured dimension table, falling back to the destination-level
        aggregate, then to the global per-destination table. Raises
        NoEtaModel when even that is absent.
        """
        cell_id = cell_of(clamp_to_box(rec.pos, self.grid), self.grid)
        chosen = find_trained_cell(self.cells, cell_id, rec.course, self.grid, cfg.max_ring_radius)
        stats = None
        if chosen is not None:
            tables = self.cells[chosen].destinations.get(dest)
            if tables is not None:
                stats = _dimension_stats(tables, rec, cfg) or tables.overall
        if stats is None:
            stats = self.global_stats.get(dest)
        if stats is None:
            raise NoEtaModel(dest)
        base = stats.mean_remaining
        if cfg.time_adjustment and rec.speed > MIN_ADJUST_SPEED_KN and stats.ref_record is not None:
            base = adjust_eta(base, rec, stats.ref_record)
        return rec.timestamp + max(0.0, base)

    def global_mean_remaining(self) -> float | None:
        """Count-weighted mean remaining time over every destination, or None."""
        total = 0.0
        count = 0
        for stats in self.global_stats.values():
            total += stats.mean_remaining * stats.count
            count += stats.count
        return total / count if count else None


def _update(table: dict, key, remaining: float, rec: AisRecord) -> None:
    stats = table.get(key)
    if stats is None:
        stats = table[key] = TimeStats()
    stats.update(remaining, rec)


def _dimension_stats(tables: DestTimeTables, rec: AisRecord, cfg: EngineConfig) -> TimeStats | None:
    if cfg.eta_dimension == "course":
        return tables.by_course.get(course_key_of(rec.course))
    if cfg.eta_dimension == "speed":
        return tables.by_speed.get(speed_bucket_of(rec.speed, cfg.speed_bucket))
    return tables.by_departure.get(rec.departure_port)
