"""Shared test helpers."""

from portcast.geo import Coord
from portcast.records import AisRecord


def make_record(
    lat: float,
    lon: float,
    course: float = 0.0,
    *,
    ship_id: str = "V1",
    ship_type: int = 70,
    speed: float = 12.0,
    heading: float | None = None,
    timestamp: int = 0,
    departure: str = "TANGER",
    draught: float | None = None,
    dest: str | None = None,
    arrival: int | None = None,
) -> AisRecord:
    return AisRecord(
        ship_id=ship_id,
        ship_type=ship_type,
        speed=speed,
        pos=Coord(lat, lon),
        course=course,
        heading=heading,
        timestamp=timestamp,
        departure_port=departure,
        draught=draught,
        label_destination=dest,
        label_arrival=arrival,
    )
