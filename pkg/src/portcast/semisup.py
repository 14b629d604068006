"""Trip buffering for the optional semi-supervised relearning loop.

Unlabeled reports are retained per ship. When a ship goes quiet while
inside a port radius, the buffered trip is labeled with the last
reported destination and the time it first entered the radius, ready to
be fed back into both models. Everything runs on event time carried by
record timestamps, so detection is deterministic and replayable.
"""

from dataclasses import dataclass

from .errors import MissingPrediction
from .geo import haversine_nm
from .records import AisRecord, PortRegistry


@dataclass(frozen=True, slots=True)
class TripLabel:
    destination: str
    arrival: int


class TripBuffer:
    """Per-ship buffer of unlabeled records and port-radius state."""

    __slots__ = ("ship_id", "records", "last_reported_dest", "in_port", "first_in_radius_ts")

    def __init__(self, ship_id: str):
        self.ship_id = ship_id
        self.records: list[AisRecord] = []
        self.last_reported_dest: str | None = None
        self.in_port: str | None = None
        self.first_in_radius_ts: int | None = None

    def observe(self, rec: AisRecord, reported_dest: str | None, ports: PortRegistry) -> None:
        """Buffer a report and track entering/leaving port radii."""
        self.records.append(rec)
        if reported_dest is not None:
            self.last_reported_dest = reported_dest
        if self.in_port is not None:
            port = ports.get(self.in_port)
            if haversine_nm(rec.pos, port.pos) > port.radius_nm:
                # Emitting outside the radius again: the trip continues.
                self.in_port = None
                self.first_in_radius_ts = None
        if self.in_port is None:
            entered = _containing_port(rec, ports)
            if entered is not None:
                self.in_port = entered
                self.first_in_radius_ts = rec.timestamp

    def check_trip_end(self, now: float, quiet_period: int) -> TripLabel | None:
        """Label the trip if the ship has been quiet inside a port radius.

        `now` is event time; stream end forces the check with infinity.
        Raises MissingPrediction when the trip ended but no destination
        was ever reported for the ship.
        """
        if self.in_port is None or not self.records:
            return None
        if now - self.records[-1].timestamp < quiet_period:
            return None
        if self.last_reported_dest is None:
            raise MissingPrediction(self.ship_id)
        return TripLabel(self.last_reported_dest, self.first_in_radius_ts)

    def clear(self) -> None:
        self.records.clear()
        self.last_reported_dest = None
        self.in_port = None
        self.first_in_radius_ts = None


def _containing_port(rec: AisRecord, ports: PortRegistry) -> str | None:
    best = None
    for port in ports:
        distance = haversine_nm(rec.pos, port.pos)
        if distance <= port.radius_nm and (best is None or (distance, port.name) < best):
            best = (distance, port.name)
    return best[1] if best else None
