"""Deterministic synthetic AIS traces with known ground truth.

Ships sail great circles between generated ports at constant speed,
reporting on a fixed interval with bounded Gaussian noise on position
and course. The same seed always produces bit-identical output, which
makes the generator usable as a benchmark oracle.
"""

import math
import random
from dataclasses import dataclass, replace as dc_replace

from .errors import ConfigError, PlacementFailure
from .evaluation import TripTruth
from .geo import EARTH_RADIUS_NM, Coord, bearing_deg, haversine_nm
from .records import AisRecord, Port, PortRegistry, write_ports, write_records

PORT_RADIUS_NM = 2.0
MIN_PORT_SEPARATION_DEG = 0.5
_PLACEMENT_MARGIN_DEG = 1.0
_SHIP_TYPES = (60, 70, 80)
_DRAUGHT_BY_TYPE = {60: 6.5, 70: 8.2, 80: 11.4}


@dataclass(frozen=True, slots=True)
class SynthConfig:
    """Generator knobs; defaults match the benchmark scale.

    The default speed range is degenerate (a uniform-speed fleet): the
    per-cell time statistics assume comparable speeds per route, so a
    wide fleet-wide spread mostly measures that assumption, not the
    engine. Widen the range to generate harder datasets.
    """

    seed: int = 42
    n_ports: int = 20
    n_train_trips: int = 500
    n_eval_trips: int = 100
    speed_range: tuple[float, float] = (12.0, 12.0)
    report_interval: int = 600
    pos_noise_sigma: float = 0.01
    course_noise_sigma: float = 5.0
    bbox: tuple[float, float, float, float] = (33.0, 41.0, 2.0, 16.0)

    def __post_init__(self):
        if min(self.n_ports, self.n_train_trips, self.n_eval_trips) < 1:
            raise ConfigError("counts must be >= 1")
        if self.n_ports < 2:
            raise ConfigError("need at least 2 ports to form a route")
        if self.pos_noise_sigma < 0 or self.course_noise_sigma < 0:
            raise ConfigError("noise sigmas must be >= 0")
        if not 0 < self.speed_range[0] <= self.speed_range[1]:
            raise ConfigError(f"bad speed range {self.speed_range}")
        if self.report_interval < 1:
            raise ConfigError("report_interval must be >= 1")
        if len(self.bbox) != 4 or not (self.bbox[0] < self.bbox[1] and self.bbox[2] < self.bbox[3]):
            raise ConfigError(f"bad bbox {self.bbox}")


def _bounded_gauss(rng: random.Random, sigma: float) -> float:
    if sigma <= 0.0:
        return 0.0
    return min(3.0 * sigma, max(-3.0 * sigma, rng.gauss(0.0, sigma)))


def _destination_point(pos: Coord, bearing: float, distance_nm: float) -> Coord:
    """Point reached from pos after sailing distance_nm along a bearing."""
    delta = distance_nm / EARTH_RADIUS_NM
    theta = math.radians(bearing)
    phi1 = math.radians(pos.lat)
    lambda1 = math.radians(pos.lon)
    phi2 = math.asin(
        math.sin(phi1) * math.cos(delta) + math.cos(phi1) * math.sin(delta) * math.cos(theta)
    )
    lambda2 = lambda1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(phi1),
        math.cos(delta) - math.sin(phi1) * math.sin(phi2),
    )
    lon = math.degrees(lambda2)
    if lon > 180.0:
        lon -= 360.0
    elif lon < -180.0:
        lon += 360.0
    return Coord(math.degrees(phi2), lon)


def gen_ports(cfg: SynthConfig) -> PortRegistry:
    """Place n_ports uniformly in the box with the minimum pairwise separation."""
    rng = random.Random(f"{cfg.seed}/ports")
    lat_min, lat_max, lon_min, lon_max = cfg.bbox
    margin = min(_PLACEMENT_MARGIN_DEG, (lat_max - lat_min) / 4, (lon_max - lon_min) / 4)
    placed: list[Coord] = []
    for _ in range(cfg.n_ports):
        for _attempt in range(200):
            candidate = Coord(
                rng.uniform(lat_min + margin, lat_max - margin),
                rng.uniform(lon_min + margin, lon_max - margin),
            )
            if all(
                math.hypot(candidate.lat - other.lat, candidate.lon - other.lon)
                >= MIN_PORT_SEPARATION_DEG
                for other in placed
            ):
                placed.append(candidate)
                break
        else:
            raise PlacementFailure(
                f"could not place {cfg.n_ports} ports {MIN_PORT_SEPARATION_DEG} deg apart in {cfg.bbox}"
            )
    registry = PortRegistry()
    for index, pos in enumerate(placed):
        registry.add(Port(f"P{index:02d}", Coord(round(pos.lat, 6), round(pos.lon, 6)), PORT_RADIUS_NM))
    return registry


def gen_trip(
    origin: Port,
    dest: Port,
    speed_kn: float,
    cfg: SynthConfig,
    ship_id: str,
    ship_type: int,
    start_ts: int,
    rng: random.Random,
) -> TripTruth:
    """One trip along the great circle from origin to dest.

    Reports are emitted every report_interval seconds; the course of each
    step is the current bearing to the destination. The final record sits
    at the port center and its timestamp is the trip's true arrival.
    """
    if origin.name == dest.name:
        raise ValueError("origin and destination must differ")
    lat_min, lat_max, lon_min, lon_max = cfg.bbox
    speed = round(speed_kn, 2)
    draught = _DRAUGHT_BY_TYPE.get(ship_type, 7.0)
    step_nm = speed * cfg.report_interval / 3600.0
    total_nm = haversine_nm(origin.pos, dest.pos)
    n_steps = max(1, math.ceil(total_nm / step_nm - 1e-9))

    def emit(pos: Coord, course_true: float, ts: int) -> AisRecord:
        lat = min(max(pos.lat + _bounded_gauss(rng, cfg.pos_noise_sigma), lat_min), lat_max)
        lon = min(max(pos.lon + _bounded_gauss(rng, cfg.pos_noise_sigma), lon_min), lon_max)
        course = round((course_true + _bounded_gauss(rng, cfg.course_noise_sigma)) % 360.0, 2) % 360.0
        return AisRecord(
            ship_id=ship_id,
            ship_type=ship_type,
            speed=speed,
            pos=Coord(round(lat, 6), round(lon, 6)),
            course=course,
            heading=float(round(course) % 360),
            timestamp=ts,
            departure_port=origin.name,
            draught=draught,
            label_destination=dest.name,
            label_arrival=0,  # patched below once the arrival time is known
        )

    records: list[AisRecord] = []
    cur = origin.pos
    course_true = bearing_deg(cur, dest.pos)
    for i in range(n_steps):
        course_true = bearing_deg(cur, dest.pos)
        records.append(emit(cur, course_true, start_ts + i * cfg.report_interval))
        cur = _destination_point(cur, course_true, step_nm)
    arrival_ts = start_ts + round(total_nm / speed * 3600.0)
    if arrival_ts <= records[-1].timestamp:
        arrival_ts = records[-1].timestamp + 1
    records.append(emit(dest.pos, course_true, arrival_ts))
    records = [dc_replace(rec, label_arrival=arrival_ts) for rec in records]
    return TripTruth(ship_id, tuple(records), dest.name, arrival_ts)


def _route_pool(ports: list[Port], rng: random.Random, n_ports: int) -> list[tuple[int, int]]:
    # A bounded pool of directed routes (about two departures per port):
    # repeated lanes are what give the grid stable statistics, mirroring
    # real shipping traffic far better than fresh random pairs per trip.
    all_pairs = [(a, b) for a in range(n_ports) for b in range(n_ports) if a != b]
    pool_size = min(2 * n_ports, len(all_pairs))
    return rng.sample(all_pairs, pool_size)


def _trip_type(origin_index: int, dest_index: int) -> int:
    return _SHIP_TYPES[(origin_index * 31 + dest_index * 17) % len(_SHIP_TYPES)]


def gen_trips(cfg: SynthConfig) -> tuple[PortRegistry, list[TripTruth], list[TripTruth]]:
    """Generate the port registry plus labeled train and eval trips."""
    ports = gen_ports(cfg)
    port_list = list(ports)
    rng = random.Random(f"{cfg.seed}/trips")
    pool = _route_pool(port_list, rng, cfg.n_ports)

    train: list[TripTruth] = []
    trained_pairs: list[tuple[int, int]] = []
    seen_pairs: set[tuple[int, int]] = set()
    for i in range(cfg.n_train_trips):
        pair = pool[rng.randrange(len(pool))]
        if pair not in seen_pairs:
            seen_pairs.add(pair)
            trained_pairs.append(pair)
        train.append(_one_trip(pair, f"T{i:04d}", port_list, cfg, rng))

    evals: list[TripTruth] = []
    for i in range(cfg.n_eval_trips):
        # Only routes with training coverage: the engine predicts lanes it
        # has seen, the benchmark is not a cold-start test.
        pair = trained_pairs[rng.randrange(len(trained_pairs))]
        evals.append(_one_trip(pair, f"E{i:04d}", port_list, cfg, rng))
    return ports, train, evals


def _one_trip(
    pair: tuple[int, int],
    ship_id: str,
    port_list: list[Port],
    cfg: SynthConfig,
    rng: random.Random,
) -> TripTruth:
    origin, dest = port_list[pair[0]], port_list[pair[1]]
    speed = rng.uniform(*cfg.speed_range)
    start_ts = rng.randrange(0, 30 * 86400)
    return gen_trip(origin, dest, speed, cfg, ship_id, _trip_type(*pair), start_ts, rng)


def strip_labels(rec: AisRecord) -> AisRecord:
    return dc_replace(rec, label_destination=None, label_arrival=None)


def gen_dataset(cfg: SynthConfig, out_dir) -> dict[str, str]:
    """Write the full dataset; returns {name: path} for the emitted files.

    train.csv holds labeled records trip by trip; eval.csv holds the
    unlabeled eval records globally sorted by event time; truth.csv holds
    the eval labels; ports.csv the registry the trips sail between.
    """
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ports, train, evals = gen_trips(cfg)

    train_path = out / "train.csv"
    eval_path = out / "eval.csv"
    truth_path = out / "truth.csv"
    ports_path = out / "ports.csv"

    write_records(train_path, (rec for trip in train for rec in trip.records), "train")

    eval_records = [rec for trip in evals for rec in trip.records]
    eval_records.sort(key=lambda rec: (rec.timestamp, rec.ship_id))
    write_records(eval_path, (strip_labels(rec) for rec in eval_records), "eval")

    with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("SHIP_ID,TRIP_ID,ARRIVAL_PORT,ARRIVAL_TIME\n")
        for trip_id, trip in enumerate(evals):
            fh.write(f"{trip.ship_id},{trip_id},{trip.true_destination},{trip.true_arrival}\n")

    write_ports(ports_path, ports)
    return {
        "train": str(train_path),
        "eval": str(eval_path),
        "truth": str(truth_path),
        "ports": str(ports_path),
    }


def synth_config_from_text(text: str, source: str = "<synth>") -> SynthConfig:
    """Parse the flat `key = value` synth config format."""
    from .config import parse_key_values

    values = parse_key_values(text, source)
    cfg = SynthConfig()
    updates = {}
    for key, raw in values.items():
        if key in ("seed", "n_ports", "n_train_trips", "n_eval_trips", "report_interval"):
            try:
                updates[key] = int(raw)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
        elif key in ("pos_noise_sigma", "course_noise_sigma"):
            try:
                updates[key] = float(raw)
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
        elif key in ("speed_range", "bbox"):
            parts = [p.strip() for p in raw.split(",")]
            want = 2 if key == "speed_range" else 4
            if len(parts) != want:
                raise ConfigError(f"{key}: expected {want} comma-separated numbers, got {raw!r}")
            try:
                updates[key] = tuple(float(p) for p in parts)
            except ValueError:
                raise ConfigError(f"{key}: expected numbers, got {raw!r}") from None
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    return dc_replace(cfg, **updates)
