"""Prediction engine: wires both grid models, the robustness filter and
the semi-supervised loop into one record pipeline, and handles model
snapshots."""

import math
import pickle
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

from .config import EngineConfig
from .dest import DestGridModel
from .errors import MissingPrediction, NoEtaModel, SnapshotError
from .eta import EtaGridModel
from .records import AisRecord, PortRegistry
from .robustness import ShipHistory
from .semisup import TripBuffer, TripLabel

SNAPSHOT_FORMAT = "portcast-model"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True, slots=True)
class CommittedTrip:
    """Summary of one trip relearned by the semi-supervised loop."""

    ship_id: str
    destination: str
    arrival: int
    records: int


@dataclass(frozen=True, slots=True)
class PredictionRow:
    """One output line of the prediction stream."""

    ship_id: str
    timestamp: int
    port: str
    arrival: int


class PredictionEngine:
    """Trains and serves both models over a stream of AIS records.

    Training and prediction phases are alternated by the caller; within
    the prediction phase, model writes only happen through committed
    semi-supervised trips, which this class serializes with everything
    else (the pipeline is single-threaded per stream).
    """

    def __init__(self, cfg: EngineConfig, ports: PortRegistry):
        self.cfg = cfg
        self.ports = ports
        self.dest_model = DestGridModel(cfg.dest_grid())
        self.eta_model = EtaGridModel(cfg.eta_grid())
        self.histories: dict[str, ShipHistory] = {}
        self.buffers: dict[str, TripBuffer] = {}
        self.watermark = -math.inf
        self.committed_trips: list[CommittedTrip] = []
        self.discarded_trips = 0

    # -- training ----------------------------------------------------------

    def train_record(self, rec: AisRecord) -> None:
        self.dest_model.train(rec, self.cfg.speed_bucket)
        self.eta_model.train(rec, self.cfg.speed_bucket)

    def train_stream(self, records: Iterable[AisRecord]) -> int:
        count = 0
        for rec in records:
            self.train_record(rec)
            count += 1
        return count

    # -- prediction --------------------------------------------------------

    def predict_record(self, rec: AisRecord) -> PredictionRow:
        """Predict destination and arrival for one unlabeled record."""
        if len(self.ports) == 0:
            raise ValueError("port registry is empty")
        if self.cfg.semi_supervised:
            self._advance(rec.timestamp)
        raw = self.dest_model.predict(rec, self.ports, self.cfg)
        history = self.histories.get(rec.ship_id)
        if history is None:
            history = self.histories[rec.ship_id] = ShipHistory(rec.ship_id, self.cfg.robustness_window)
        reported = history.filter(raw, self.cfg.robustness_k)
        arrival = self._predict_arrival(rec, reported)
        if self.cfg.semi_supervised:
            buffer = self.buffers.get(rec.ship_id)
            if buffer is None:
                buffer = self.buffers[rec.ship_id] = TripBuffer(rec.ship_id)
            buffer.observe(rec, reported, self.ports)
        return PredictionRow(rec.ship_id, rec.timestamp, reported, arrival)

    def predict_stream(self, records: Iterable[AisRecord]) -> Iterator[PredictionRow]:
        for rec in records:
            yield self.predict_record(rec)
        self.finish()

    def finish(self) -> None:
        """Stream end: force trip-end detection with event time at infinity."""
        if self.cfg.semi_supervised:
            self._check_buffers(math.inf)

    def _predict_arrival(self, rec: AisRecord, dest: str) -> int:
        try:
            arrival = self.eta_model.predict(rec, dest, self.cfg)
        except NoEtaModel:
            mean = self.eta_model.global_mean_remaining()
            arrival = rec.timestamp + (mean if mean is not None else 0.0)
        return round(arrival)

    # -- semi-supervised loop ----------------------------------------------

    def _advance(self, now: int) -> None:
        if now <= self.watermark:
            return
        self.watermark = now
        self._check_buffers(now)

    def _check_buffers(self, now: float) -> None:
        for buffer in self.buffers.values():
            try:
                label = buffer.check_trip_end(now, self.cfg.quiet_period)
            except MissingPrediction:
                buffer.clear()
                self.discarded_trips += 1
                continue
            if label is not None:
                self.commit_trip(buffer, label)

    def commit_trip(self, buffer: TripBuffer, label: TripLabel) -> None:
        """Relabel the buffered trip and feed it through both models."""
        if buffer.records:
            for rec in buffer.records:
                labeled = replace(rec, label_destination=label.destination, label_arrival=label.arrival)
                self.dest_model.train(labeled, self.cfg.speed_bucket)
                self.eta_model.train(labeled, self.cfg.speed_bucket)
            self.committed_trips.append(
                CommittedTrip(buffer.ship_id, label.destination, label.arrival, len(buffer.records))
            )
        buffer.clear()
        history = self.histories.get(buffer.ship_id)
        if history is not None:
            history.reset()


# -- snapshots ---------------------------------------------------------------


def model_state_bytes(engine: PredictionEngine) -> bytes:
    """Serialized model state only (no per-ship runtime state); equal bytes
    mean equal trained state."""
    return pickle.dumps(
        {"dest_model": engine.dest_model, "eta_model": engine.eta_model},
        protocol=4,
    )


def save_snapshot(engine: PredictionEngine, path) -> None:
    payload = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "config": engine.cfg,
        "ports": list(engine.ports),
        "dest_model": engine.dest_model,
        "eta_model": engine.eta_model,
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)


def load_snapshot(path) -> PredictionEngine:
    try:
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
    except (OSError, pickle.UnpicklingError, EOFError, AttributeError, ImportError) as exc:
        raise SnapshotError(f"cannot load snapshot {path}: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotError(f"{path} is not a model snapshot")
    if payload.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"snapshot version {payload.get('version')} unsupported (want {SNAPSHOT_VERSION})"
        )
    engine = PredictionEngine(payload["config"], PortRegistry(payload["ports"]))
    engine.dest_model = payload["dest_model"]
    engine.eta_model = payload["eta_model"]
    return engine
