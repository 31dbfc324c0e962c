"""Per-service result records: filtering, summary statistics, and CSV export.

One DataRecord is written each time an individual leaves a node after a
completed service.  Records are immutable and freely shareable; queue size
fields count waiting customers only (in-service excluded), sampled once the
triggering event has resolved.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Union

__all__ = [
    "DataRecord",
    "Summary",
    "filter_records",
    "summarize",
    "write_csv",
    "read_csv",
    "CSV_HEADER",
]

EXIT = -1  # destination code for leaving the system


class DataRecord(NamedTuple):
    """History of one completed service; field order matches the CSV columns."""

    id_number: int
    customer_class: int  # class held during the service (before any class change)
    node: int  # 1-based
    arrival_date: float
    waiting_time: float
    service_start_date: float
    service_time: float
    service_end_date: float
    time_blocked: float
    exit_date: float
    destination: int  # 1-based node, or -1 for exit
    queue_size_at_arrival: int
    queue_size_at_departure: int


CSV_HEADER = (
    "id_number,customer_class,node,arrival_date,waiting_time,service_start_date,"
    "service_time,service_end_date,time_blocked,exit_date,destination,"
    "queue_size_at_arrival,queue_size_at_departure"
)

_INT_FIELDS = {0, 1, 2, 10, 11, 12}


def filter_records(
    records: Iterable[DataRecord],
    *,
    node: Optional[int] = None,
    customer_class: Optional[int] = None,
    min_arrival_date: Optional[float] = None,
) -> list[DataRecord]:
    """Records matching every supplied predicate, in stable order.

    min_arrival_date keeps records with arrival_date strictly greater than the
    bound, which is how a warm-up period is excluded.
    """
    out = []
    for r in records:
        if node is not None and r.node != node:
            continue
        if customer_class is not None and r.customer_class != customer_class:
            continue
        if min_arrival_date is not None and not r.arrival_date > min_arrival_date:
            continue
        out.append(r)
    return out


@dataclass
class Summary:
    """Arithmetic means over a record set; means are None when count is 0."""

    count: int
    mean_wait: Optional[float]
    mean_time_blocked: Optional[float]
    mean_service_time: Optional[float]
    by_node: dict = field(default_factory=dict)
    by_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_wait": self.mean_wait,
            "mean_time_blocked": self.mean_time_blocked,
            "mean_service_time": self.mean_service_time,
            "by_node": self.by_node,
            "by_class": self.by_class,
        }


def _means(records: list[DataRecord]) -> dict:
    n = len(records)
    return {
        "count": n,
        "mean_wait": sum(r.waiting_time for r in records) / n,
        "mean_time_blocked": sum(r.time_blocked for r in records) / n,
        "mean_service_time": sum(r.service_time for r in records) / n,
    }


def summarize(records: Iterable[DataRecord]) -> Summary:
    records = list(records)
    if not records:
        return Summary(count=0, mean_wait=None, mean_time_blocked=None, mean_service_time=None)
    overall = _means(records)
    by_node: dict[int, list[DataRecord]] = {}
    by_class: dict[int, list[DataRecord]] = {}
    for r in records:
        by_node.setdefault(r.node, []).append(r)
        by_class.setdefault(r.customer_class, []).append(r)
    return Summary(
        count=overall["count"],
        mean_wait=overall["mean_wait"],
        mean_time_blocked=overall["mean_time_blocked"],
        mean_service_time=overall["mean_service_time"],
        by_node={node: _means(rs) for node, rs in sorted(by_node.items())},
        by_class={k: _means(rs) for k, rs in sorted(by_class.items())},
    )


def _format_value(i: int, value) -> str:
    if i in _INT_FIELDS:
        return str(int(value))
    return repr(float(value))


def write_csv(records: Iterable[DataRecord], sink: Union[str, Path, io.TextIOBase]) -> None:
    """Header plus one row per record; floats use shortest round-trip decimals."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as f:
            write_csv(records, f)
        return
    sink.write(CSV_HEADER + "\n")
    for r in records:
        sink.write(",".join(_format_value(i, v) for i, v in enumerate(r)) + "\n")


def read_csv(source: Union[str, Path, io.TextIOBase]) -> list[DataRecord]:
    """Inverse of write_csv; round-trips every generated record set bit-exactly."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return read_csv(f)
    lines = source.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a records CSV: bad or missing header")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(DataRecord._fields):
            raise ValueError(f"bad records CSV row: {line!r}")
        out.append(
            DataRecord(*(int(p) if i in _INT_FIELDS else float(p) for i, p in enumerate(parts)))
        )
    return out
