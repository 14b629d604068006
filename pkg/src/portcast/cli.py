"""Command-line front end: synth / train / predict / evaluate / diagnose.

Every run writes a manifest (command, config snapshot, input digests)
next to its main output so results can be reproduced exactly.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .config import EngineConfig, load_config
from .engine import PredictionEngine, load_snapshot, save_snapshot
from .errors import DataError, LengthMismatch, NoModel, PortcastError
from .evaluation import TripTruth, build_report, dimension_diagnostic
from .records import load_ports, read_records
from .synth import SynthConfig, gen_dataset, synth_config_from_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

PREDICTIONS_HEADER = "SHIP_ID,TIMESTAMP,PREDICTED_PORT,PREDICTED_ARRIVAL"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this artifact reserves 2 for data
    # errors and uses 1 for usage.
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path, command: str, argv: list[str], config: dict, inputs: dict, extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "argv": argv,
        "config": config,
        "inputs": {name: _sha256(path) for name, path in inputs.items() if path is not None},
    }
    if extra:
        manifest.update(extra)
    Path(str(out_path) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _load_engine_config(path) -> EngineConfig:
    return load_config(path) if path else EngineConfig()


def cmd_synth(args, argv) -> int:
    if args.config:
        cfg = synth_config_from_text(Path(args.config).read_text(encoding="utf-8"), args.config)
    else:
        cfg = SynthConfig()
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    paths = gen_dataset(cfg, args.out)
    manifest_inputs = {"config": args.config} if args.config else {}
    _write_manifest(
        Path(args.out) / "dataset",
        "synth",
        argv,
        {field: getattr(cfg, field) for field in ("seed", "n_ports", "n_train_trips", "n_eval_trips",
                                                  "speed_range", "report_interval", "pos_noise_sigma",
                                                  "course_noise_sigma", "bbox")},
        manifest_inputs,
        extra={"outputs": {name: _sha256(path) for name, path in paths.items()}},
    )
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


def cmd_train(args, argv) -> int:
    cfg = _load_engine_config(args.config)
    ports = load_ports(args.ports)
    engine = PredictionEngine(cfg, ports)
    trained = engine.train_stream(read_records(args.train, "train"))
    if trained == 0:
        print("error: empty training set", file=sys.stderr)
        return EXIT_DATA
    save_snapshot(engine, args.model)
    _write_manifest(
        args.model,
        "train",
        argv,
        cfg.to_dict(),
        {"train": args.train, "ports": args.ports, "config": args.config},
    )
    print(f"records trained:    {trained}")
    print(f"dest grid skipped:  {engine.dest_model.skipped}")
    print(f"eta grid skipped:   {engine.eta_model.skipped}")
    print(f"eta rejected:       {engine.eta_model.rejected}")
    print(f"dest cells:         {len(engine.dest_model.cells)} / {engine.dest_model.grid.capacity}")
    print(f"eta cells:          {len(engine.eta_model.cells)} / {engine.eta_model.grid.capacity}")
    print(f"model snapshot:     {args.model}")
    return EXIT_OK


def cmd_predict(args, argv) -> int:
    engine = load_snapshot(args.model)
    if len(engine.ports) == 0:
        print("error: the model's port registry is empty", file=sys.stderr)
        return EXIT_DATA
    if args.config:
        cfg = load_config(args.config)
        for key in ("dest_granularity", "eta_granularity", "bbox"):
            if getattr(cfg, key) != getattr(engine.cfg, key):
                print(
                    f"error: config {key} differs from the trained model "
                    f"({getattr(cfg, key)} vs {getattr(engine.cfg, key)})",
                    file=sys.stderr,
                )
                return EXIT_DATA
        engine.cfg = cfg
    rows = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PREDICTIONS_HEADER + "\n")
        for row in engine.predict_stream(read_records(args.eval, "eval")):
            fh.write(f"{row.ship_id},{row.timestamp},{row.port},{row.arrival}\n")
            rows += 1
    _write_manifest(
        args.out,
        "predict",
        argv,
        engine.cfg.to_dict(),
        {"model": args.model, "eval": args.eval, "config": args.config},
        extra={
            "records": rows,
            "committed_trips": len(engine.committed_trips),
            "discarded_trips": engine.discarded_trips,
        },
    )
    print(f"records predicted:  {rows}")
    if engine.cfg.semi_supervised:
        print(f"trips committed:    {len(engine.committed_trips)}")
        print(f"trips discarded:    {engine.discarded_trips}")
    print(f"predictions:        {args.out}")
    return EXIT_OK


def _read_predictions(path) -> list[tuple[str, int, str, int]]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip("\r\n")
        if header != PREDICTIONS_HEADER:
            raise DataError(f"{path}: expected header {PREDICTIONS_HEADER!r}, got {header!r}")
        for line in fh:
            text = line.strip("\r\n")
            if not text.strip():
                continue
            fields = text.split(",")
            if len(fields) != 4:
                raise DataError(f"bad prediction line {text!r}")
            rows.append((fields[0], int(fields[1]), fields[2], int(fields[3])))
    return rows


def _read_truth(path) -> list[tuple[str, str, str, int]]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip("\r\n")
        if header != "SHIP_ID,TRIP_ID,ARRIVAL_PORT,ARRIVAL_TIME":
            raise DataError(f"{path}: bad truth header {header!r}")
        for line in fh:
            text = line.strip("\r\n")
            if not text.strip():
                continue
            fields = text.split(",")
            if len(fields) != 4:
                raise DataError(f"bad truth line {text!r}")
            rows.append((fields[0], fields[1], fields[2].upper(), int(fields[3])))
    return rows


def pair_predictions(
    predictions: list[tuple[str, int, str, int]], truth: list[tuple[str, str, str, int]]
) -> tuple[list[tuple[list[tuple[str, int]], TripTruth]], int]:
    """Group prediction rows per truth trip.

    A ship's rows are assigned to its earliest trip whose arrival time is
    not before the row timestamp (the last trip absorbs the tail). Rows
    for ships absent from the truth are counted as skipped; a truth trip
    with no rows raises LengthMismatch.
    """
    by_ship: dict[str, list[tuple[str, str, int]]] = {}
    for ship_id, trip_id, port, arrival in truth:
        by_ship.setdefault(ship_id, []).append((trip_id, port, arrival))
    for trips in by_ship.values():
        trips.sort(key=lambda t: t[2])

    assigned: dict[tuple[str, str], list[tuple[str, int]]] = {}
    skipped = 0
    for ship_id, timestamp, port, arrival in predictions:
        trips = by_ship.get(ship_id)
        if trips is None:
            skipped += 1
            continue
        chosen = trips[-1]
        for trip in trips:
            if timestamp <= trip[2]:
                chosen = trip
                break
        assigned.setdefault((ship_id, chosen[0]), []).append((port, arrival))

    paired = []
    for ship_id, trips in by_ship.items():
        for trip_id, true_port, true_arrival in trips:
            rows = assigned.get((ship_id, trip_id))
            if not rows:
                raise LengthMismatch(f"no predictions for trip {trip_id} of ship {ship_id}")
            paired.append((rows, TripTruth(ship_id, (), true_port, true_arrival)))
    return paired, skipped


def cmd_evaluate(args, argv) -> int:
    predictions = _read_predictions(args.predictions)
    truth = _read_truth(args.truth)
    trips, skipped = pair_predictions(predictions, truth)
    report = build_report(trips, skipped)
    Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    _write_manifest(
        args.out,
        "evaluate",
        argv,
        {},
        {"predictions": args.predictions, "truth": args.truth},
        extra={"report": json.loads(report.to_json())},
    )
    print(report.to_text())
    return EXIT_OK


def cmd_diagnose(args, argv) -> int:
    cfg = _load_engine_config(args.config)
    load_ports(args.ports)  # validated for parity with train, unused below
    records = list(read_records(args.train, "train"))
    if not records:
        print("error: empty training set", file=sys.stderr)
        return EXIT_DATA
    rates = dimension_diagnostic(records, cfg.speed_bucket)
    print(f"{'Dimension':<12}{'Error rate'}")
    for dimension in ("type", "speed", "departure", "draught", "course", "heading"):
        rate = rates[dimension]
        rendered = "n/a" if rate is None else f"{rate * 100.0:.1f}%"
        print(f"{dimension:<12}{rendered}")
    # No artifact path to sit next to: the run manifest goes to stdout.
    manifest = {
        "command": "diagnose",
        "argv": argv,
        "config": cfg.to_dict(),
        "inputs": {name: _sha256(path) for name, path in
                   {"train": args.train, "ports": args.ports, "config": args.config}.items()
                   if path is not None},
    }
    print("manifest: " + json.dumps(manifest, sort_keys=True))
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="portcast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="synth config file (key = value)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train both models from a labeled CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--ports", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--model", required=True, help="snapshot output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict destinations and arrivals for a stream")
    p.add_argument("--model", required=True)
    p.add_argument("--eval", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against the truth file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("diagnose", help="per-dimension correlation error rates")
    p.add_argument("--train", required=True)
    p.add_argument("--ports", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (DataError, NoModel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PortcastError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
