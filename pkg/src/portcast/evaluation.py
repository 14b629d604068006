"""Accuracy metrics, the single-dimension correlation diagnostic, and
report emission."""

import json
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import LengthMismatch
from .records import AisRecord, course_key_of, speed_bucket_of

DIAGNOSTIC_DIMENSIONS = ("type", "speed", "departure", "draught", "course", "heading")


@dataclass(frozen=True, slots=True)
class TripTruth:
    """Ground truth for one trip; records may be empty when the truth was
    read back from a file that stores only the labels."""

    ship_id: str
    records: tuple[AisRecord, ...]
    true_destination: str
    true_arrival: int


@dataclass(frozen=True, slots=True)
class EvalReport:
    route_accuracy: float
    tuple_accuracy: float
    eta_mean_abs_error_min: float
    eta_median_abs_error_min: float
    trips: int
    skipped: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "route_accuracy": self.route_accuracy,
                "tuple_accuracy": self.tuple_accuracy,
                "eta_mean_abs_error_min": self.eta_mean_abs_error_min,
                "eta_median_abs_error_min": self.eta_median_abs_error_min,
                "trips": self.trips,
                "skipped": self.skipped,
            }
        )

    def to_text(self) -> str:
        return (
            f"trips evaluated:      {self.trips}\n"
            f"records skipped:      {self.skipped}\n"
            f"route accuracy:       {self.route_accuracy:.4f}\n"
            f"tuple accuracy:       {self.tuple_accuracy:.4f}\n"
            f"eta mean abs error:   {self.eta_mean_abs_error_min:.1f} min\n"
            f"eta median abs error: {self.eta_median_abs_error_min:.1f} min"
        )


def _check_lengths(predictions: Sequence, truth: TripTruth) -> None:
    if truth.records and len(predictions) != len(truth.records):
        raise LengthMismatch(
            f"trip {truth.ship_id}: {len(predictions)} predictions for {len(truth.records)} records"
        )


def route_accuracy(trips: Iterable[tuple[Sequence[str], TripTruth]]) -> float:
    """Fraction of records whose reported destination is the true one,
    pooled over all trips (per-trip fractions weighted by record count)."""
    correct = 0
    total = 0
    for predicted_ports, truth in trips:
        _check_lengths(predicted_ports, truth)
        correct += sum(1 for port in predicted_ports if port == truth.true_destination)
        total += len(predicted_ports)
    return correct / total if total else 0.0


def trip_mean_accuracy(trips: Iterable[tuple[Sequence[str], TripTruth]]) -> float:
    """Mean of per-trip correct fractions, each trip weighted equally."""
    fractions = []
    for predicted_ports, truth in trips:
        _check_lengths(predicted_ports, truth)
        if predicted_ports:
            fractions.append(
                sum(1 for port in predicted_ports if port == truth.true_destination)
                / len(predicted_ports)
            )
    return statistics.fmean(fractions) if fractions else 0.0


def eta_error(trips: Iterable[tuple[Sequence[int], TripTruth]]) -> tuple[float, float]:
    """Mean and median absolute arrival error in minutes over all records."""
    errors = []
    for predicted_arrivals, truth in trips:
        _check_lengths(predicted_arrivals, truth)
        for arrival in predicted_arrivals:
            errors.append(abs(arrival - truth.true_arrival) / 60.0)
    if not errors:
        return (0.0, 0.0)
    return (statistics.fmean(errors), statistics.median(errors))


def dimension_diagnostic(
    records: Sequence[AisRecord], speed_bucket: float = 0.5
) -> dict[str, float | None]:
    """Error rate of a most-frequent-destination predictor per single dimension.

    The labeled set is used both to build the per-value frequency tables
    and to evaluate them. Records missing a dimension (heading, draught)
    are skipped for that row; a dimension with no data at all maps to None.
    """
    out: dict[str, float | None] = {}
    for dimension in DIAGNOSTIC_DIMENSIONS:
        table: dict[object, dict[str, int]] = {}
        pairs: list[tuple[object, str]] = []
        for rec in records:
            if rec.label_destination is None:
                continue
            value = _dimension_value(rec, dimension, speed_bucket)
            if value is None:
                continue
            pairs.append((value, rec.label_destination))
            counters = table.setdefault(value, {})
            counters[rec.label_destination] = counters.get(rec.label_destination, 0) + 1
        if not pairs:
            out[dimension] = None
            continue
        best = {
            value: min(counters, key=lambda dest: (-counters[dest], dest))
            for value, counters in table.items()
        }
        wrong = sum(1 for value, dest in pairs if best[value] != dest)
        out[dimension] = wrong / len(pairs)
    return out


def _dimension_value(rec: AisRecord, dimension: str, speed_bucket: float):
    if dimension == "type":
        return rec.ship_type
    if dimension == "speed":
        return speed_bucket_of(rec.speed, speed_bucket)
    if dimension == "departure":
        return rec.departure_port
    if dimension == "draught":
        return rec.draught
    if dimension == "course":
        return course_key_of(rec.course)
    if rec.heading is None:
        return None
    return course_key_of(rec.heading)


def build_report(
    trips: Sequence[tuple[Sequence[tuple[str, int]], TripTruth]], skipped: int = 0
) -> EvalReport:
    """Assemble the full report from (port, arrival) prediction pairs per trip."""
    port_trips = [([port for port, _ in rows], truth) for rows, truth in trips]
    arrival_trips = [([arrival for _, arrival in rows], truth) for rows, truth in trips]
    mean_err, median_err = eta_error(arrival_trips)
    return EvalReport(
        route_accuracy=route_accuracy(port_trips),
        tuple_accuracy=trip_mean_accuracy(port_trips),
        eta_mean_abs_error_min=mean_err,
        eta_median_abs_error_min=median_err,
        trips=len(trips),
        skipped=skipped,
    )
