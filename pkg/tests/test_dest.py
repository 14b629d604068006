"""Destination model: training increments, cell search, aggregation, fallbacks."""

import random

import pytest

from conftest import make_record
from portcast.config import EngineConfig
from portcast.dest import DestGridModel, candidate_sets, find_trained_cell
from portcast.errors import NoModel, UnknownPort
from portcast.geo import CellId, Coord, GridSpec
from portcast.records import Port, PortRegistry

GRID = GridSpec(30.0, 46.0, -6.0, 36.5, 1.0)
CFG = EngineConfig()

PORTS = PortRegistry(
    [
        Port("CEUTA", Coord(35.9, -5.3), 2.0),
        Port("VALENCIA", Coord(39.4, -0.3), 2.0),
        Port("GENOVA", Coord(44.4, 8.9), 2.0),
        Port("PIRAEUS", Coord(37.9, 23.6), 2.0),
    ]
)


def trained_model(records) -> DestGridModel:
    model = DestGridModel(GRID)
    for rec in records:
        model.train(rec, CFG.speed_bucket)
    return model


class TestTraining:
    def test_each_record_increments_three_counters(self):
        # A type-70 ship out of TANGER bound for CEUTA trains one cell:
        # all three dimension tables must gain a CEUTA count.
        model = trained_model([make_record(35.5, -5.5, course=130.0, dest="CEUTA")])
        cell = model.cells[CellId(5, 0)]
        dims = cell.course_table[130]
        assert dims.type_table[70] == {"CEUTA": 1}
        assert dims.speed_table[24] == {"CEUTA": 1}
        assert dims.departure_table["TANGER"] == {"CEUTA": 1}
        assert cell.trained_count == 1

    def test_additivity(self):
        rec = make_record(35.5, -5.5, course=130.0, dest="CEUTA")
        model = trained_model([rec, rec])
        dims = model.cells[CellId(5, 0)].course_table[130]
        assert dims.departure_table["TANGER"] == {"CEUTA": 2}
        assert model.cells[CellId(5, 0)].trained_count == 2

    def test_out_of_bounds_is_skipped_and_counted(self):
        model = DestGridModel(GRID)
        assert model.train(make_record(20.0, 0.0, dest="CEUTA"), 0.5) is False
        assert model.skipped == 1
        assert model.trained_total == 0
        assert not model.cells

    def test_unlabeled_record_rejected(self):
        with pytest.raises(ValueError):
            DestGridModel(GRID).train(make_record(35.5, -5.5), 0.5)

    def test_counter_conservation(self):
        rng = random.Random(3)
        dests = PORTS.names
        records = [
            make_record(
                rng.uniform(30, 46),
                rng.uniform(-6, 36.5),
                course=rng.uniform(0, 360),
                ship_type=rng.choice([60, 70, 80]),
                speed=rng.uniform(0, 25),
                departure=rng.choice(dests),
                dest=rng.choice(dests),
            )
            for _ in range(500)
        ]
        model = trained_model(records)
        assert model.trained_total == 500
        assert sum(cell.trained_count for cell in model.cells.values()) == 500
        for pick in ("type_table", "speed_table", "departure_table"):
            grand_total = sum(
                count
                for cell in model.cells.values()
                for dims in cell.course_table.values()
                for counters in getattr(dims, pick).values()
                for count in counters.values()
            )
            assert grand_total == 500

    def test_sparse_allocation(self):
        rng = random.Random(4)
        records = [
            make_record(rng.uniform(30, 46), rng.uniform(-6, 36.5), dest="CEUTA")
            for _ in range(200)
        ]
        model = trained_model(records)
        distinct = {(int(r.pos.lat - 30.0), int(r.pos.lon + 6.0)) for r in records}
        assert len(model.cells) <= len(distinct)


class TestFindTrainedCell:
    def test_trained_query_cell_wins_regardless_of_course(self):
        model = trained_model([make_record(35.5, -5.5, course=130.0, dest="CEUTA")])
        for course in (0.0, 90.0, 200.0, 350.0):
            assert find_trained_cell(model.cells, CellId(5, 0), course, GRID, 10) == CellId(5, 0)

    def _neighbourhood(self, south_east: bool = True) -> DestGridModel:
        # Query cell (5, 5) untrained. North neighbour carries far more
        # trained traffic than the south-east one.
        records = []
        for _ in range(9):
            records.append(make_record(36.5, -0.5, course=0.0, dest="VALENCIA"))  # north (6, 5)
        if south_east:
            records.append(make_record(34.5, 0.5, course=130.0, dest="CEUTA"))  # south-east (4, 6)
        records.append(make_record(35.5, -1.5, course=270.0, dest="CEUTA"))  # west (5, 4)
        return trained_model(records)

    def test_course_aligned_cell_preferred_over_frequency(self):
        # Course 130 points south-east; that cell wins despite holding a
        # single record against the north cell's nine.
        model = self._neighbourhood(south_east=True)
        assert find_trained_cell(model.cells, CellId(5, 5), 130.0, GRID, 10) == CellId(4, 6)

    def test_next_best_cell_when_south_east_untrained(self):
        model = self._neighbourhood(south_east=False)
        assert find_trained_cell(model.cells, CellId(5, 5), 130.0, GRID, 10) == CellId(6, 5)

    def test_ties_break_by_trained_count(self):
        # Two cells symmetric around due north (course 0): equal course
        # alignment, so the better-trained one wins.
        records = [make_record(36.5, -1.5, course=0.0, dest="CEUTA")]  # (6, 4), NW
        records += [make_record(36.5, 0.5, course=0.0, dest="CEUTA")] * 3  # (6, 6), NE
        model = trained_model(records)
        assert find_trained_cell(model.cells, CellId(5, 5), 0.0, GRID, 10) == CellId(6, 6)

    def test_nearest_ring_dominates(self):
        # A perfectly aligned cell two rings out loses to any ring-1 cell.
        records = [make_record(33.5, 1.5, course=135.0, dest="CEUTA")]  # (3, 7): ring 2, aligned
        records += [make_record(36.5, -0.5, course=0.0, dest="CEUTA")]  # (6, 5): ring 1, opposite
        model = trained_model(records)
        assert find_trained_cell(model.cells, CellId(5, 5), 135.0, GRID, 10) == CellId(6, 5)

    def test_none_when_nothing_within_max_radius(self):
        model = trained_model([make_record(45.5, 36.0, dest="CEUTA")])
        assert find_trained_cell(model.cells, CellId(0, 0), 45.0, GRID, 10) is None


class TestCandidateSets:
    def test_all_three_dimensions_match(self):
        model = trained_model([make_record(35.5, -5.5, course=130.0, dest="CEUTA")])
        rec = make_record(35.4, -5.4, course=140.0)
        sets = candidate_sets(model.cells[CellId(5, 0)], rec, 15.0, 0.5)
        assert sets == [{"CEUTA": 1}, {"CEUTA": 1}, {"CEUTA": 1}]

    def test_outside_tolerance_gives_empty_list(self):
        model = trained_model([make_record(35.5, -5.5, course=130.0, dest="CEUTA")])
        rec = make_record(35.4, -5.4, course=200.0)
        assert candidate_sets(model.cells[CellId(5, 0)], rec, 15.0, 0.5) == []

    def test_partial_dimension_match(self):
        model = trained_model(
            [make_record(35.5, -5.5, course=130.0, ship_type=60, speed=8.0, dest="CEUTA")]
        )
        rec = make_record(35.4, -5.4, course=130.0, ship_type=70, speed=20.0)
        sets = candidate_sets(model.cells[CellId(5, 0)], rec, 15.0, 0.5)
        assert sets == [{"CEUTA": 1}]  # only the departure table hits

    def test_keys_ordered_by_course_distance(self):
        model = trained_model(
            [
                make_record(35.5, -5.5, course=120.0, dest="CEUTA"),
                make_record(35.5, -5.5, course=131.0, dest="VALENCIA"),
            ]
        )
        rec = make_record(35.4, -5.4, course=130.0, speed=99.0, ship_type=1)
        sets = candidate_sets(model.cells[CellId(5, 0)], rec, 15.0, 0.5)
        assert sets == [{"VALENCIA": 1}, {"CEUTA": 1}]  # key 131 is closer than 120


class TestAggregate:
    def test_counter_sums_win(self):
        model = DestGridModel(GRID)
        rec = make_record(35.5, -5.5)
        dest = model.aggregate([{"CEUTA": 5}, {"CEUTA": 3}, {"VALENCIA": 4}], rec, PORTS, CFG)
        assert dest == "CEUTA"

    def test_geo_distance_tie_break(self):
        cfg = EngineConfig(tie_break_order=("geo_distance", "geo_course", "departure_freq", "type_freq"))
        model = DestGridModel(GRID)
        rec = make_record(35.9, -5.2)  # essentially at CEUTA
        assert model.aggregate([{"CEUTA": 3}, {"GENOVA": 3}], rec, PORTS, cfg) == "CEUTA"

    def test_geo_course_tie_break(self):
        model = DestGridModel(GRID)
        rec = make_record(40.0, 10.0, course=0.0)  # due north: GENOVA side
        assert model.aggregate([{"GENOVA": 3}, {"PIRAEUS": 3}], rec, PORTS, CFG) == "GENOVA"

    def test_departure_freq_tie_break(self):
        cfg = EngineConfig(tie_break_order=("departure_freq", "geo_course", "geo_distance", "type_freq"))
        model = trained_model(
            [make_record(35.5, -5.5, departure="TANGER", dest="PIRAEUS")] * 2
            + [make_record(35.5, -5.5, departure="TANGER", dest="GENOVA")]
        )
        rec = make_record(40.0, 10.0, course=0.0, departure="TANGER")
        assert model.aggregate([{"GENOVA": 3}, {"PIRAEUS": 3}], rec, PORTS, cfg) == "PIRAEUS"

    def test_empty_candidates_give_none(self):
        assert DestGridModel(GRID).aggregate([], make_record(35.5, -5.5), PORTS, CFG) is None

    def test_unknown_port_raises(self):
        model = DestGridModel(GRID)
        with pytest.raises(UnknownPort):
            model.aggregate([{"ATLANTIS": 1}], make_record(35.5, -5.5), PORTS, CFG)


class TestPredict:
    def test_trained_cell_with_matching_dims(self):
        model = trained_model([make_record(35.5, -5.5, course=130.0, dest="CEUTA")])
        assert model.predict(make_record(35.4, -5.4, course=133.0), PORTS, CFG) == "CEUTA"

    def test_untrained_cell_uses_neighbour(self):
        model = trained_model([make_record(35.5, -5.5, course=130.0, dest="CEUTA")])
        rec = make_record(36.5, -5.5, course=180.0)  # one cell north, heading south
        assert model.predict(rec, PORTS, CFG) == "CEUTA"

    def test_tolerance_miss_falls_back_to_whole_cell_aggregate(self):
        # Record course matches no trained course key; the prediction must
        # equal a brute-force sum over every counter set in the cell.
        records = [
            make_record(35.5, -5.5, course=130.0, ship_type=60, dest="CEUTA"),
            make_record(35.5, -5.5, course=135.0, ship_type=70, dest="CEUTA"),
            make_record(35.5, -5.5, course=20.0, ship_type=80, dest="VALENCIA"),
        ]
        model = trained_model(records)
        rec = make_record(35.4, -5.4, course=270.0, ship_type=99, speed=55.0, departure="NOPE")
        got = model.predict(rec, PORTS, CFG)

        totals: dict[str, int] = {}
        cell = model.cells[CellId(5, 0)]
        for dims in cell.course_table.values():
            for table in (dims.type_table, dims.speed_table, dims.departure_table):
                for counters in table.values():
                    for dest, count in counters.items():
                        totals[dest] = totals.get(dest, 0) + count
        assert got == max(sorted(totals), key=lambda d: totals[d]) == "CEUTA"

    def test_global_departure_fallback(self):
        # Nothing within ring reach of the query cell: fall back to the
        # most frequent destination for the record's departure port.
        model = trained_model(
            [make_record(45.5, 36.0, course=90.0, departure="TANGER", dest="VALENCIA")] * 2
            + [make_record(45.5, 36.0, course=90.0, departure="TANGER", dest="CEUTA")]
        )
        rec = make_record(30.5, -5.5, course=90.0, departure="TANGER")
        assert model.predict(rec, PORTS, CFG) == "VALENCIA"

    def test_course_aligned_port_fallback(self):
        model = trained_model([make_record(45.5, 36.0, departure="ELSEWHERE", dest="CEUTA")])
        rec = make_record(38.0, 23.0, course=45.0, departure="NEVERSEEN")
        # No cell within reach, departure never seen: pick the port whose
        # bearing best matches the course (PIRAEUS sits north-east).
        assert model.predict(rec, PORTS, CFG) == "PIRAEUS"

    def test_no_model(self):
        with pytest.raises(NoModel):
            DestGridModel(GRID).predict(make_record(35.5, -5.5), PORTS, CFG)

    def test_out_of_box_position_clamps(self):
        model = trained_model([make_record(30.5, -5.5, course=180.0, dest="CEUTA")])
        rec = make_record(29.5, -5.5, course=180.0)  # south of the box
        assert model.predict(rec, PORTS, CFG) == "CEUTA"

    def test_determinism(self):
        rng = random.Random(9)
        records = [
            make_record(
                rng.uniform(30, 46),
                rng.uniform(-6, 36.5),
                course=rng.uniform(0, 360),
                dest=rng.choice(PORTS.names),
                departure=rng.choice(PORTS.names),
            )
            for _ in range(300)
        ]
        model_a = trained_model(records)
        model_b = trained_model(records)
        probes = [
            make_record(rng.uniform(30, 46), rng.uniform(-6, 36.5), course=rng.uniform(0, 360))
            for _ in range(100)
        ]
        for rec in probes:
            assert model_a.predict(rec, PORTS, CFG) == model_b.predict(rec, PORTS, CFG)
            assert model_a.predict(rec, PORTS, CFG) == model_a.predict(rec, PORTS, CFG)

    def test_monotonicity(self):
        # Adding another CEUTA record can never lower CEUTA's score for an
        # identically dimensioned query.
        base = [
            make_record(35.5, -5.5, course=130.0, dest="CEUTA"),
            make_record(35.5, -5.5, course=130.0, dest="VALENCIA"),
            make_record(35.5, -5.5, course=130.0, dest="VALENCIA"),
        ]
        query = make_record(35.4, -5.4, course=130.0)
        model = trained_model(base)
        assert model.predict(query, PORTS, CFG) == "VALENCIA"
        model.train(make_record(35.5, -5.5, course=130.0, dest="CEUTA"), 0.5)
        model.train(make_record(35.5, -5.5, course=130.0, dest="CEUTA"), 0.5)
        assert model.predict(query, PORTS, CFG) == "CEUTA"
