"""AIS record and port types plus the canonical CSV formats.

Two line schemas exist: "eval" carries the raw report, "train" appends
the destination/arrival labels. Parsing is a plain comma split; field
values never contain commas in these formats.
"""

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import DuplicatePort, MalformedLine, MissingLabel, UnknownPort
from .geo import Coord

HEADING_UNAVAILABLE = 511.0

EVAL_HEADER = "SHIP_ID,SHIPTYPE,SPEED,LON,LAT,COURSE,HEADING,TIMESTAMP,DEPARTURE_PORT_NAME,DRAUGHT"
TRAIN_HEADER = EVAL_HEADER + ",ARRIVAL_PORT,ARRIVAL_TIME"
PORTS_HEADER = "NAME,LON,LAT,RADIUS_NM"

_EVAL_FIELDS = 10
_TRAIN_FIELDS = 12


@dataclass(frozen=True, slots=True)
class AisRecord:
    """One AIS report, optionally labeled with the trip ground truth."""

    ship_id: str
    ship_type: int
    speed: float
    pos: Coord
    course: float
    heading: float | None
    timestamp: int
    departure_port: str
    draught: float | None = None
    label_destination: str | None = None
    label_arrival: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.speed) and self.speed >= 0.0):
            raise ValueError(f"speed {self.speed} must be finite and >= 0")
        if not 0.0 <= self.course < 360.0:
            raise ValueError(f"course {self.course} outside [0, 360)")

    @property
    def labeled(self) -> bool:
        return self.label_destination is not None and self.label_arrival is not None


@dataclass(frozen=True, slots=True)
class Port:
    name: str
    pos: Coord
    radius_nm: float

    def __post_init__(self):
        if self.radius_nm <= 0:
            raise ValueError(f"port {self.name}: radius must be > 0")


class PortRegistry:
    """Ordered collection of uniquely named ports; lookup is exact uppercase match."""

    def __init__(self, ports: "list[Port] | None" = None):
        self._ports: dict[str, Port] = {}
        for port in ports or []:
            self.add(port)

    def add(self, port: Port) -> None:
        if port.name in self._ports:
            raise DuplicatePort(port.name)
        self._ports[port.name] = port

    def get(self, name: str) -> Port:
        try:
            return self._ports[name]
        except KeyError:
            raise UnknownPort(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._ports

    def __iter__(self) -> Iterator[Port]:
        return iter(self._ports.values())

    def __len__(self) -> int:
        return len(self._ports)

    @property
    def names(self) -> list[str]:
        return list(self._ports)


def speed_bucket_of(speed: float, bucket: float) -> int:
    """Discretize a speed into a bucket index: floor(speed / bucket)."""
    return int(math.floor(speed / bucket))


def course_key_of(course: float) -> int:
    """Integer course key: nearest whole degree, wrapped into [0, 359]."""
    return int(math.floor(course + 0.5)) % 360


def _float_field(raw: str, name: str, line: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedLine(f"bad {name} {raw!r} in line {line!r}") from None
    if not math.isfinite(value):
        raise MalformedLine(f"non-finite {name} in line {line!r}")
    return value


def _int_field(raw: str, name: str, line: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise MalformedLine(f"bad {name} {raw!r} in line {line!r}") from None


def parse_record(line: str, schema: str) -> AisRecord:
    """Parse one CSV data line under the "train" or "eval" schema.

    Heading 511 (and an empty heading field) maps to absent, as does an
    empty draught. Train lines lacking the label columns raise
    MissingLabel; any other arity or field problem raises MalformedLine.
    """
    if schema not in ("train", "eval"):
        raise ValueError(f"unknown schema {schema!r}")
    text = line.strip("\r\n")
    fields = text.split(",")
    want = _TRAIN_FIELDS if schema == "train" else _EVAL_FIELDS
    if len(fields) != want:
        if schema == "train" and len(fields) < _TRAIN_FIELDS:
            raise MissingLabel(f"train line needs {want} fields, got {len(fields)}: {text!r}")
        raise MalformedLine(f"expected {want} fields, got {len(fields)}: {text!r}")

    ship_id = fields[0].strip()
    if not ship_id:
        raise MalformedLine(f"empty ship id in line {text!r}")
    ship_type = _int_field(fields[1], "ship type", text)
    speed = _float_field(fields[2], "speed", text)
    lon = _float_field(fields[3], "longitude", text)
    lat = _float_field(fields[4], "latitude", text)
    course = _float_field(fields[5], "course", text)
    heading: float | None
    if fields[6].strip() == "":
        heading = None
    else:
        heading = _float_field(fields[6], "heading", text)
        if heading == HEADING_UNAVAILABLE:
            heading = None
        elif not 0.0 <= heading < 360.0:
            raise MalformedLine(f"heading {heading} outside [0, 360): {text!r}")
    timestamp = _int_field(fields[7], "timestamp", text)
    departure = fields[8].strip().upper()
    if not departure:
        raise MalformedLine(f"empty departure port in line {text!r}")
    draught = None if fields[9].strip() == "" else _float_field(fields[9], "draught", text)

    label_destination = None
    label_arrival = None
    if schema == "train":
        label_destination = fields[10].strip().upper()
        if not label_destination:
            raise MissingLabel(f"empty arrival port in line {text!r}")
        label_arrival = _int_field(fields[11], "arrival time", text)
        if label_arrival < timestamp:
            raise MalformedLine(f"arrival {label_arrival} precedes timestamp {timestamp}: {text!r}")

    try:
        pos = Coord(lat, lon)
        return AisRecord(
            ship_id=ship_id,
            ship_type=ship_type,
            speed=speed,
            pos=pos,
            course=course,
            heading=heading,
            timestamp=timestamp,
            departure_port=departure,
            draught=draught,
            label_destination=label_destination,
            label_arrival=label_arrival,
        )
    except ValueError as exc:
        raise MalformedLine(f"{exc}: {text!r}") from None


def serialize_record(rec: AisRecord, schema: str) -> str:
    """Inverse of parse_record; parse(serialize(rec)) == rec for valid records."""
    heading = repr(rec.heading) if rec.heading is not None else repr(HEADING_UNAVAILABLE)
    draught = "" if rec.draught is None else repr(rec.draught)
    fields = [
        rec.ship_id,
        str(rec.ship_type),
        repr(rec.speed),
        repr(rec.pos.lon),
        repr(rec.pos.lat),
        repr(rec.course),
        heading,
        str(rec.timestamp),
        rec.departure_port,
        draught,
    ]
    if schema == "train":
        if not rec.labeled:
            raise MissingLabel(f"record {rec.ship_id}@{rec.timestamp} has no labels")
        fields += [rec.label_destination, str(rec.label_arrival)]
    elif schema != "eval":
        raise ValueError(f"unknown schema {schema!r}")
    return ",".join(fields)


def read_records(path, schema: str) -> Iterator[AisRecord]:
    """Stream records from a CSV file, validating the header row."""
    want_header = TRAIN_HEADER if schema == "train" else EVAL_HEADER
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip("\r\n")
        if header != want_header:
            raise MalformedLine(f"{path}: expected header {want_header!r}, got {header!r}")
        for line in fh:
            if line.strip():
                yield parse_record(line, schema)


def write_records(path, records, schema: str) -> None:
    header = TRAIN_HEADER if schema == "train" else EVAL_HEADER
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for rec in records:
            fh.write(serialize_record(rec, schema) + "\n")


def load_ports(path) -> PortRegistry:
    """Load a `NAME,LON,LAT,RADIUS_NM` CSV into a registry."""
    registry = PortRegistry()
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip("\r\n")
        if header != PORTS_HEADER:
            raise MalformedLine(f"{path}: expected header {PORTS_HEADER!r}, got {header!r}")
        for line in fh:
            text = line.strip("\r\n")
            if not text.strip():
                continue
            fields = text.split(",")
            if len(fields) != 4:
                raise MalformedLine(f"expected 4 fields, got {len(fields)}: {text!r}")
            name = fields[0].strip().upper()
            if not name:
                raise MalformedLine(f"empty port name in line {text!r}")
            lon = _float_field(fields[1], "longitude", text)
            lat = _float_field(fields[2], "latitude", text)
            radius = _float_field(fields[3], "radius", text)
            try:
                registry.add(Port(name, Coord(lat, lon), radius))
            except ValueError as exc:
                raise MalformedLine(f"{exc}: {text!r}") from None
    return registry


def write_ports(path, registry: PortRegistry) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PORTS_HEADER + "\n")
        for port in registry:
            fh.write(f"{port.name},{port.pos.lon!r},{port.pos.lat!r},{port.radius_nm!r}\n")
