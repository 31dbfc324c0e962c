"""Queueing-network description: parsing, validation, and the immutable model.

A network is defined either directly through the dataclasses below or from a
JSON config document.  Node indices are 1-based in all user-facing I/O
(config matrices are read in node order, so row 0 describes node 1); customer
classes are 0-based and named "Class 0", "Class 1", ... in config documents.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .distributions import (
    Distribution,
    NoArrivals,
    check_spec,
    from_spec,
    integer_support_at_least_one,
)

__all__ = [
    "ConfigError",
    "ValidationError",
    "Schedule",
    "ThresholdBaulking",
    "ServiceCentre",
    "CustomerClass",
    "Network",
    "NetworkConfig",
    "parse_config",
    "serialize_config",
    "validate",
    "load_network",
    "exit_probability",
]

PROB_TOL = 1e-9


class ConfigError(ValueError):
    """A config document could not be parsed."""


class ValidationError(ValueError):
    """A parsed config violates the network invariants."""


@dataclass(frozen=True)
class Schedule:
    """Cyclic server roster: server_counts[i] are on duty until shift_end_times[i].

    The cycle repeats with period equal to the last shift end time.
    """

    shift_end_times: tuple[float, ...]
    server_counts: tuple[int, ...]

    def __post_init__(self):
        ends, counts = self.shift_end_times, self.server_counts
        if len(ends) == 0 or len(ends) != len(counts):
            raise ValidationError("schedule must be a non-empty list of (end, count) pairs")
        prev = 0.0
        for t in ends:
            if t <= prev:
                raise ValidationError(
                    f"schedule end times must be strictly increasing and positive, got {ends}"
                )
            prev = t
        for c in counts:
            if not isinstance(c, int) or c < 0:
                raise ValidationError(f"schedule server counts must be integers >= 0, got {counts}")

    @property
    def cycle_length(self) -> float:
        return self.shift_end_times[-1]


@dataclass(frozen=True)
class ThresholdBaulking:
    """Baulk with certainty once `threshold` or more customers are present."""

    threshold: int

    def __call__(self, m: int) -> float:
        return 1.0 if m >= self.threshold else 0.0


BaulkingFunction = Callable[[int], float]


@dataclass(frozen=True)
class ServiceCentre:
    number_of_servers: Union[int, Schedule]
    queue_capacity: float = math.inf  # non-negative int, or math.inf
    baulking_functions: Optional[tuple[Optional[BaulkingFunction], ...]] = None


@dataclass(frozen=True)
class CustomerClass:
    arrival_distributions: tuple[Distribution, ...]  # per node; NoArrivals allowed
    service_distributions: tuple[Distribution, ...]  # per node
    transition_rows: tuple[tuple[float, ...], ...]  # per node; residual mass exits
    batching_distributions: Optional[tuple[Distribution, ...]] = None
    priority: int = 0  # 0 is the highest priority


@dataclass(frozen=True)
class Network:
    """Validated, immutable network description; shareable across runs."""

    service_centres: tuple[ServiceCentre, ...]
    customer_classes: tuple[CustomerClass, ...]
    class_change_matrices: Optional[tuple[tuple[tuple[float, ...], ...], ...]] = None

    @property
    def number_of_nodes(self) -> int:
        return len(self.service_centres)

    @property
    def number_of_classes(self) -> int:
        return len(self.customer_classes)


def exit_probability(network: Network, node: int, customer_class: int) -> float:
    """Probability of leaving the system after service at `node` (1-based)."""
    row = network.customer_classes[customer_class].transition_rows[node - 1]
    return max(0.0, 1.0 - math.fsum(row))


# ---------------------------------------------------------------------------
# Config documents
# ---------------------------------------------------------------------------

REQUIRED_KEYS = ("arrival_distributions", "service_distributions", "number_of_servers")
OPTIONAL_KEYS = (
    "transition_matrices",
    "queue_capacities",
    "batching_distributions",
    "priority_classes",
    "class_change_matrices",
    "baulking_functions",
)
ALLOWED_KEYS = set(REQUIRED_KEYS) | set(OPTIONAL_KEYS)


@dataclass
class NetworkConfig:
    """Unvalidated mirror of a config document, normalized to per-class lists."""

    number_of_nodes: int
    number_of_classes: int
    arrival_distributions: list  # [class][node] -> [name, params...]
    service_distributions: list  # [class][node] -> [name, params...]
    transition_matrices: list  # [class][node][node] -> probability
    number_of_servers: list  # [node] -> int | [[end, count], ...]
    queue_capacities: list  # [node] -> int | math.inf
    batching_distributions: Optional[list] = None  # [class][node] -> spec
    priority_classes: list = field(default_factory=list)  # [class] -> level
    class_change_matrices: Optional[list] = None  # [node][class][class]
    baulking_functions: Optional[list] = None  # [class][node] -> None | ["threshold", n]


def _class_key(k: int) -> str:
    return f"Class {k}"


def _per_class(value, n_classes: int, key: str) -> list:
    """Normalize a per-class value: either a bare list or {"Class k": ...}."""
    if isinstance(value, dict):
        expected = {_class_key(k) for k in range(n_classes)}
        if set(value) != expected:
            raise ConfigError(
                f"{key!r} must be keyed exactly by {sorted(expected)}, got {sorted(value)}"
            )
        return [value[_class_key(k)] for k in range(n_classes)]
    if n_classes != 1:
        raise ConfigError(f"{key!r} must be a per-class object for multi-class models")
    return [value]


def _count_classes(value) -> int:
    if isinstance(value, dict):
        keys = set(value)
        expected = {_class_key(k) for k in range(len(keys))}
        if keys != expected:
            raise ConfigError(
                f"class keys must be contiguous 'Class 0'..'Class {len(keys) - 1}', got {sorted(keys)}"
            )
        return len(keys)
    return 1


def _check_dist_list(dists, n_nodes: int, key: str, klass: int) -> list:
    if not isinstance(dists, list) or len(dists) != n_nodes:
        raise ConfigError(f"{key!r} for class {klass} must list one entry per node ({n_nodes})")
    out = []
    for i, spec in enumerate(dists):
        # bare "NoArrivals" string is accepted as shorthand for ["NoArrivals"]
        if spec == "NoArrivals":
            spec = ["NoArrivals"]
        try:
            check_spec(spec)
        except ValueError as err:
            raise ConfigError(f"{key!r}, class {klass}, node {i + 1}: {err}") from None
        out.append(list(spec))
    return out


def _check_matrix(matrix, n_rows: int, n_cols: int, key: str, label: str) -> list:
    if not isinstance(matrix, list) or len(matrix) != n_rows:
        raise ConfigError(f"{key!r} {label} must have {n_rows} row(s)")
    out = []
    for i, row in enumerate(matrix):
        if not isinstance(row, list) or len(row) != n_cols:
            raise ConfigError(f"{key!r} {label}, row {i + 1} must have {n_cols} entries")
        out.append([float(x) for x in row])
    return out


def parse_config(text: str) -> NetworkConfig:
    """Parse a JSON config document into an unvalidated NetworkConfig.

    Rejects unknown keys, wrong arities, and unknown distribution names;
    probability and parameter constraints are checked by validate().
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config syntax error at line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")

    unknown = set(doc) - ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(f"missing required config key {key!r}")

    servers_raw = doc["number_of_servers"]
    if not isinstance(servers_raw, list) or not servers_raw:
        raise ConfigError("'number_of_servers' must be a non-empty list, one entry per node")
    n_nodes = len(servers_raw)
    servers = []
    for i, entry in enumerate(servers_raw):
        if isinstance(entry, int) and not isinstance(entry, bool):
            servers.append(entry)
        elif isinstance(entry, list):
            for pair in entry:
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise ConfigError(
                        f"'number_of_servers', node {i + 1}: a schedule is a list of [end, count] pairs"
                    )
            servers.append([[float(p[0]), p[1]] for p in entry])
        else:
            raise ConfigError(
                f"'number_of_servers', node {i + 1} must be an integer or a schedule, got {entry!r}"
            )

    n_classes = _count_classes(doc["arrival_distributions"])

    arrivals = [
        _check_dist_list(v, n_nodes, "arrival_distributions", k)
        for k, v in enumerate(_per_class(doc["arrival_distributions"], n_classes, "arrival_distributions"))
    ]
    services = [
        _check_dist_list(v, n_nodes, "service_distributions", k)
        for k, v in enumerate(_per_class(doc["service_distributions"], n_classes, "service_distributions"))
    ]

    if "transition_matrices" in doc:
        transitions = [
            _check_matrix(m, n_nodes, n_nodes, "transition_matrices", f"class {k}")
            for k, m in enumerate(_per_class(doc["transition_matrices"], n_classes, "transition_matrices"))
        ]
    else:
        transitions = [[[0.0] * n_nodes for _ in range(n_nodes)] for _ in range(n_classes)]

    if "queue_capacities" in doc:
        caps_raw = doc["queue_capacities"]
        if not isinstance(caps_raw, list) or len(caps_raw) != n_nodes:
            raise ConfigError(f"'queue_capacities' must list one entry per node ({n_nodes})")
        capacities = []
        for i, c in enumerate(caps_raw):
            if c == "Inf":
                capacities.append(math.inf)
            elif isinstance(c, int) and not isinstance(c, bool):
                capacities.append(c)
            else:
                raise ConfigError(
                    f"'queue_capacities', node {i + 1} must be a non-negative integer or \"Inf\", got {c!r}"
                )
    else:
        capacities = [math.inf] * n_nodes

    if "batching_distributions" in doc:
        batching = [
            _check_dist_list(v, n_nodes, "batching_distributions", k)
            for k, v in enumerate(_per_class(doc["batching_distributions"], n_classes, "batching_distributions"))
        ]
    else:
        batching = None

    if "priority_classes" in doc:
        prio_raw = doc["priority_classes"]
        if isinstance(prio_raw, dict):
            expected = {_class_key(k) for k in range(n_classes)}
            missing = expected - set(prio_raw)
            if missing:
                raise ConfigError(f"'priority_classes' is missing {sorted(missing)}")
            if set(prio_raw) != expected:
                raise ConfigError(f"'priority_classes' has unknown keys {sorted(set(prio_raw) - expected)}")
            priorities = [prio_raw[_class_key(k)] for k in range(n_classes)]
        elif isinstance(prio_raw, list):
            if len(prio_raw) != n_classes:
                raise ConfigError(f"'priority_classes' must list one level per class ({n_classes})")
            priorities = list(prio_raw)
        else:
            raise ConfigError("'priority_classes' must be an object keyed by class or a list")
    else:
        priorities = [0] * n_classes

    if "class_change_matrices" in doc:
        ccm_raw = doc["class_change_matrices"]
        if not isinstance(ccm_raw, list) or not ccm_raw:
            raise ConfigError("'class_change_matrices' must be a matrix or a per-node list of matrices")
        # depth 2 = one global matrix applied at every node; depth 3 = per node
        if ccm_raw and isinstance(ccm_raw[0], list) and ccm_raw[0] and isinstance(ccm_raw[0][0], list):
            if len(ccm_raw) != n_nodes:
                raise ConfigError(f"'class_change_matrices' must have one matrix per node ({n_nodes})")
            ccm = [
                _check_matrix(m, n_classes, n_classes, "class_change_matrices", f"node {i + 1}")
                for i, m in enumerate(ccm_raw)
            ]
        else:
            one = _check_matrix(ccm_raw, n_classes, n_classes, "class_change_matrices", "global")
            ccm = [[row[:] for row in one] for _ in range(n_nodes)]
    else:
        ccm = None

    if "baulking_functions" in doc:
        baulk_raw = _per_class(doc["baulking_functions"], n_classes, "baulking_functions")
        baulking = []
        for k, per_node in enumerate(baulk_raw):
            if not isinstance(per_node, list) or len(per_node) != n_nodes:
                raise ConfigError(
                    f"'baulking_functions' for class {k} must list one entry per node ({n_nodes})"
                )
            row = []
            for i, entry in enumerate(per_node):
                if entry is None:
                    row.append(None)
                elif isinstance(entry, list) and len(entry) == 2 and entry[0] == "threshold":
                    row.append(["threshold", entry[1]])
                else:
                    raise ConfigError(
                        f"'baulking_functions', class {k}, node {i + 1}: "
                        f"only null or [\"threshold\", n] is allowed in a config, got {entry!r}"
                    )
            baulking.append(row)
    else:
        baulking = None

    return NetworkConfig(
        number_of_nodes=n_nodes,
        number_of_classes=n_classes,
        arrival_distributions=arrivals,
        service_distributions=services,
        transition_matrices=transitions,
        number_of_servers=servers,
        queue_capacities=capacities,
        batching_distributions=batching,
        priority_classes=priorities,
        class_change_matrices=ccm,
        baulking_functions=baulking,
    )


def serialize_config(config: NetworkConfig) -> str:
    """Canonical JSON for a config; parse(serialize(c)) == c on valid configs."""
    doc = {
        "arrival_distributions": {
            _class_key(k): config.arrival_distributions[k] for k in range(config.number_of_classes)
        },
        "service_distributions": {
            _class_key(k): config.service_distributions[k] for k in range(config.number_of_classes)
        },
        "transition_matrices": {
            _class_key(k): config.transition_matrices[k] for k in range(config.number_of_classes)
        },
        "number_of_servers": config.number_of_servers,
        "queue_capacities": ["Inf" if c == math.inf else c for c in config.queue_capacities],
        "priority_classes": {
            _class_key(k): config.priority_classes[k] for k in range(config.number_of_classes)
        },
    }
    if config.batching_distributions is not None:
        doc["batching_distributions"] = {
            _class_key(k): config.batching_distributions[k] for k in range(config.number_of_classes)
        }
    if config.class_change_matrices is not None:
        doc["class_change_matrices"] = config.class_change_matrices
    if config.baulking_functions is not None:
        doc["baulking_functions"] = {
            _class_key(k): config.baulking_functions[k] for k in range(config.number_of_classes)
        }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _build_dist(spec, key: str, klass: int, node: int) -> Distribution:
    try:
        return from_spec(spec)
    except ValueError as err:
        raise ValidationError(f"{key}, class {klass}, node {node}: {err}") from None


def validate(config: NetworkConfig) -> Network:
    """Check every invariant and return the immutable Network, or raise."""
    n_nodes = config.number_of_nodes
    n_classes = config.number_of_classes
    if n_nodes < 1 or n_classes < 1:
        raise ValidationError("a network needs at least one node and one class")

    # Per-node service centres
    baulking_per_class: list[list] = [[None] * n_nodes for _ in range(n_classes)]
    if config.baulking_functions is not None:
        for k in range(n_classes):
            for i in range(n_nodes):
                entry = config.baulking_functions[k][i]
                if entry is None:
                    continue
                n = entry[1]
                if not isinstance(n, int) or isinstance(n, bool) or n < 0:
                    raise ValidationError(
                        f"baulking threshold for class {k}, node {i + 1} must be an integer >= 0, got {n!r}"
                    )
                baulking_per_class[k][i] = ThresholdBaulking(n)

    centres = []
    for i in range(n_nodes):
        servers = config.number_of_servers[i]
        if isinstance(servers, int):
            if servers < 1:
                raise ValidationError(f"node {i + 1} needs at least 1 server, got {servers}")
            server_field: Union[int, Schedule] = servers
        else:
            if not servers:
                raise ValidationError(f"node {i + 1} has an empty server schedule")
            ends = tuple(float(p[0]) for p in servers)
            counts = tuple(p[1] for p in servers)
            server_field = Schedule(ends, counts)

        cap = config.queue_capacities[i]
        if cap != math.inf:
            if not isinstance(cap, int) or cap < 0:
                raise ValidationError(f"node {i + 1} queue capacity must be >= 0, got {cap}")

        node_baulkers = tuple(baulking_per_class[k][i] for k in range(n_classes))
        centres.append(
            ServiceCentre(
                number_of_servers=server_field,
                queue_capacity=cap,
                baulking_functions=None if all(b is None for b in node_baulkers) else node_baulkers,
            )
        )

    # Priorities
    priorities = config.priority_classes
    if len(priorities) != n_classes:
        raise ValidationError(f"priority map must cover all {n_classes} class(es)")
    for k, p in enumerate(priorities):
        if not isinstance(p, int) or isinstance(p, bool) or p < 0:
            raise ValidationError(f"priority for class {k} must be an integer >= 0, got {p!r}")

    # Per-class behaviour
    classes = []
    for k in range(n_classes):
        arrivals = tuple(
            _build_dist(spec, "arrival_distributions", k, i + 1)
            for i, spec in enumerate(config.arrival_distributions[k])
        )
        services = tuple(
            _build_dist(spec, "service_distributions", k, i + 1)
            for i, spec in enumerate(config.service_distributions[k])
        )
        for i, dist in enumerate(services):
            if isinstance(dist, NoArrivals):
                raise ValidationError(
                    f"service_distributions, class {k}, node {i + 1}: NoArrivals is not a service distribution"
                )

        rows = []
        for i, row in enumerate(config.transition_matrices[k]):
            if len(row) != n_nodes:
                raise ValidationError(
                    f"transition row for class {k}, node {i + 1} must have {n_nodes} entries"
                )
            if any(p < 0 or p > 1 for p in row):
                raise ValidationError(
                    f"transition row for class {k}, node {i + 1} has entries outside [0, 1]: {row}"
                )
            total = math.fsum(row)
            if total > 1.0 + PROB_TOL:
                raise ValidationError(
                    f"transition row for class {k}, node {i + 1} sums to {total:.12g} > 1"
                )
            rows.append(tuple(row))

        if config.batching_distributions is not None:
            batching = tuple(
                _build_dist(spec, "batching_distributions", k, i + 1)
                for i, spec in enumerate(config.batching_distributions[k])
            )
            for i, dist in enumerate(batching):
                if not integer_support_at_least_one(dist):
                    raise ValidationError(
                        f"batching_distributions, class {k}, node {i + 1}: "
                        "support must be integers >= 1"
                    )
        else:
            batching = None

        classes.append(
            CustomerClass(
                arrival_distributions=arrivals,
                service_distributions=services,
                transition_rows=tuple(rows),
                batching_distributions=batching,
                priority=priorities[k],
            )
        )

    # Class-change matrices: each row is a probability distribution over classes
    ccm = None
    if config.class_change_matrices is not None:
        mats = []
        for i, matrix in enumerate(config.class_change_matrices):
            rows = []
            for k, row in enumerate(matrix):
                if len(row) != n_classes:
                    raise ValidationError(
                        f"class-change row for node {i + 1}, class {k} must have {n_classes} entries"
                    )
                if any(p < 0 or p > 1 for p in row):
                    raise ValidationError(
                        f"class-change row for node {i + 1}, class {k} has entries outside [0, 1]: {row}"
                    )
                total = math.fsum(row)
                if abs(total - 1.0) > PROB_TOL:
                    raise ValidationError(
                        f"class-change row for node {i + 1}, class {k} sums to {total:.12g}, expected 1"
                    )
                rows.append(tuple(row))
            mats.append(tuple(rows))
        ccm = tuple(mats)

    return Network(
        service_centres=tuple(centres),
        customer_classes=tuple(classes),
        class_change_matrices=ccm,
    )


def load_network(text: str) -> Network:
    """Parse and validate a config document in one step."""
    return validate(parse_config(text))
