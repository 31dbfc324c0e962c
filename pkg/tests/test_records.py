"""Record filtering, summaries, and bit-exact CSV round-trips."""

import io

import pytest

from qnetsim import (
    DataRecord,
    Simulation,
    filter_records,
    read_csv,
    summarize,
    write_csv,
)
from qnetsim.records import CSV_HEADER
from conftest import build, repair_clinic_config


def make_record(**overrides) -> DataRecord:
    base = dict(
        id_number=1,
        customer_class=0,
        node=1,
        arrival_date=1.0,
        waiting_time=0.5,
        service_start_date=1.5,
        service_time=1.0,
        service_end_date=2.5,
        time_blocked=0.0,
        exit_date=2.5,
        destination=-1,
        queue_size_at_arrival=0,
        queue_size_at_departure=0,
    )
    base.update(overrides)
    return DataRecord(**base)


@pytest.fixture
def clinic_records():
    sim = Simulation(build(repair_clinic_config()), seed=2)
    sim.simulate_until_max_time(24.0 * 8)
    return sim.get_all_records()


def test_filter_by_min_arrival_strictly_greater():
    records = [make_record(arrival_date=t) for t in (10.0, 24.0, 30.0)]
    assert filter_records(records, min_arrival_date=24.0) == [records[2]]
    assert filter_records(records, min_arrival_date=50.0) == []


def test_empty_predicate_set_is_identity(clinic_records):
    assert filter_records(clinic_records) == clinic_records


def test_triple_filter_matches_manual_comprehension(clinic_records):
    filtered = filter_records(clinic_records, node=1, customer_class=1, min_arrival_date=24.0)
    manual = [
        r
        for r in clinic_records
        if r.customer_class == 1
        if r.node == 1
        if r.arrival_date > 24
    ]
    assert filtered == manual
    assert filtered  # the clinic produces unscheduled work at node 1


def test_filter_distributes_over_conjunction(clinic_records):
    both = filter_records(clinic_records, node=1, customer_class=0)
    nested = filter_records(filter_records(clinic_records, node=1), customer_class=0)
    assert both == nested


def test_summarize_mean_wait():
    records = [make_record(waiting_time=1.0), make_record(waiting_time=3.0)]
    summary = summarize(records)
    assert summary.count == 2
    assert summary.mean_wait == 2.0


def test_summarize_single_record_equals_its_fields():
    record = make_record(waiting_time=0.7, service_time=1.3, time_blocked=0.2)
    summary = summarize([record])
    assert summary.mean_wait == 0.7
    assert summary.mean_service_time == 1.3
    assert summary.mean_time_blocked == 0.2


def test_summarize_empty_is_explicit_not_divide_by_zero():
    summary = summarize([])
    assert summary.count == 0
    assert summary.mean_wait is None
    assert summary.mean_time_blocked is None
    assert summary.by_node == {}


def test_summarize_full_set_equals_trivial_filter(clinic_records):
    assert summarize(filter_records(clinic_records)) == summarize(clinic_records)


def test_summarize_breakdowns(clinic_records):
    summary = summarize(clinic_records)
    assert set(summary.by_node) <= {1, 2}
    assert set(summary.by_class) <= {0, 1}
    total = sum(stats["count"] for stats in summary.by_node.values())
    assert total == summary.count


def test_csv_header_exact_and_lf_endings(tmp_path):
    path = tmp_path / "records.csv"
    write_csv([make_record()], path)
    raw = path.read_bytes()
    assert raw.startswith(CSV_HEADER.encode() + b"\n")
    assert b"\r" not in raw


def test_empty_record_set_gives_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv([], path)
    assert path.read_text() == CSV_HEADER + "\n"
    assert read_csv(path) == []


def test_dd1_trace_produces_three_lines(tmp_path):
    from qnetsim import Deterministic
    from conftest import single_node_network

    sim = Simulation(single_node_network(Deterministic(1.0), Deterministic(0.5)))
    sim.simulate_until_max_time(3.0)
    buf = io.StringIO()
    write_csv(sim.get_all_records(), buf)
    assert len(buf.getvalue().splitlines()) == 3


def test_csv_round_trip_bit_exact(clinic_records, tmp_path):
    path = tmp_path / "clinic.csv"
    write_csv(clinic_records, path)
    assert read_csv(path) == clinic_records


def test_csv_round_trip_through_string_io(clinic_records):
    buf = io.StringIO()
    write_csv(clinic_records, buf)
    assert read_csv(io.StringIO(buf.getvalue())) == clinic_records


def test_read_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(path)


def test_record_indices_valid_for_network(clinic_records):
    for r in clinic_records:
        assert r.node in (1, 2)
        assert r.customer_class in (0, 1)
        assert r.destination in (-1, 1, 2)
