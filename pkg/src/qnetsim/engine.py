"""Event-scheduling simulation core.

A run alternates three kinds of step: the clock moves to the earliest pending
event (A), that pre-scheduled event fires (B: an external arrival, a service
completion, or a shift change), and every consequence is resolved immediately
(C: service starts, transfers, blocking and unblocking).  Simultaneous events
are ordered deterministically: the arrival process first, then nodes by index,
and within a node service completions before shift changes.

Stream discipline (what consumes random draws, in order):

* initialisation: one inter-arrival draw per (node, class) pair with arrivals,
  in (node, class) order;
* an arrival event: the batch-size draw if a batching distribution is set,
  then per member one baulking uniform if a baulking function is set and one
  service draw if service starts, then one inter-arrival draw for the next
  arrival of that (node, class);
* a service completion: one routing uniform, then one class-change uniform if
  the node has a class-change matrix and the destination is not the exit,
  then the service draw of whichever customer the freed server picks up.

Deterministic and Sequential distributions consume no draws.
"""

from __future__ import annotations

import math
from bisect import insort

from .deadlock import DeadlockReport, StateDigraph
from .distributions import NoArrivals, RandomStream, sample_batch_size, seed_stream
from .network import Network, Schedule
from .records import EXIT, DataRecord

__all__ = ["Simulation", "Node", "Server", "Individual", "ArrivalNode", "ExitNode", "StarvationError"]

TERMINATION_MODES = ("arrived", "accepted", "finished")


class StarvationError(RuntimeError):
    """No future event exists, so the requested stopping rule can never be met."""


class Individual:
    """A customer in flight, carrying its class, priority, and node timestamps."""

    def __init__(self, id_number: int, customer_class: int, priority: int):
        self.id_number = id_number
        self.customer_class = customer_class
        self.priority = priority
        self.arrival_date = 0.0  # at the current node
        self.service_start_date = 0.0
        self.service_end_date = 0.0
        self.is_blocked = False
        self.server = None
        self.destination = None  # committed 0-based destination while blocked
        self.pending_class = None  # class to take on when the move happens
        self.queue_size_at_arrival = 0
        self.sort_key = (0, 0)
        self.record_buffer: list[DataRecord] = []

    def __repr__(self):
        return f"Individual({self.id_number}, class={self.customer_class})"


class Server:
    """One service position; holds at most one individual at a time."""

    def __init__(self, id: int):
        self.id = id
        self.cust: Individual | None = None
        self.shift_end = math.inf
        self.retiring = False

    @property
    def busy(self) -> bool:
        return self.cust is not None

    def __repr__(self):
        state = "busy" if self.busy else "idle"
        return f"Server({self.id}, {state})"


class Node:
    """A service centre during a run: servers, the waiting line, blockages."""

    def __init__(self, index: int, centre):
        self.index = index  # 1-based
        self.capacity = centre.queue_capacity
        self.schedule: Schedule | None = None
        self._shift_cursor = 0
        self._shift_offset = 0.0
        self.next_shift_date = math.inf
        if isinstance(centre.number_of_servers, Schedule):
            self.schedule = centre.number_of_servers
            count = self.schedule.server_counts[0]
            self.next_shift_date = self.schedule.shift_end_times[0]
        else:
            count = centre.number_of_servers
        self.servers = [Server(i + 1) for i in range(count)]
        self._next_server_id = count + 1
        self.queue: list[Individual] = []  # waiting, sorted by (priority, entry order)
        self.blocked_queue: list[tuple[int, Individual]] = []  # (origin index, individual)
        self.baulking_functions = centre.baulking_functions

    def next_event_date(self) -> float:
        d = self.next_shift_date
        for s in self.servers:
            c = s.cust
            if c is not None and not c.is_blocked and c.service_end_date < d:
                d = c.service_end_date
        return d

    def idle_server(self) -> Server | None:
        for s in self.servers:
            if s.cust is None and not s.retiring:
                return s
        return None

    def has_space(self) -> bool:
        """True when a new entrant can be admitted right now."""
        return self.idle_server() is not None or len(self.queue) < self.capacity

    def present_count(self) -> int:
        """Customers physically here: waiting plus attached to a server."""
        return len(self.queue) + sum(1 for s in self.servers if s.cust is not None)

    def __repr__(self):
        return f"Node({self.index}, waiting={len(self.queue)}, servers={len(self.servers)})"


class ArrivalNode:
    """Schedules the next external arrival for every (node, class) pair."""

    def __init__(self, sim: "Simulation"):
        self.next_event_dates: dict[tuple[int, int], float] = {}
        for i in range(sim.network.number_of_nodes):
            for k in range(sim.network.number_of_classes):
                dist = sim._arrival_dists[i][k]
                if dist is not None:
                    self.next_event_dates[(i, k)] = dist.sample(sim.stream, 0.0)

    def next_event_date(self) -> float:
        return min(self.next_event_dates.values(), default=math.inf)

    def winning_pair(self) -> tuple[int, int]:
        return min(self.next_event_dates, key=lambda pair: (self.next_event_dates[pair], pair))


class ExitNode:
    """Collects individuals that leave the system."""

    def __init__(self):
        self.individuals: list[Individual] = []

    def accept(self, ind: Individual) -> None:
        self.individuals.append(ind)


class Simulation:
    """One seeded run over a validated network.

    A Simulation is one-use: build a fresh instance per trial.  The optional
    tracker is a state observer; the engine calls tracker.on_event(sim, kind,
    node_index) after each pre-scheduled event and tracker.on_service_start(
    sim, node, server, individual) whenever a service begins.
    """

    def __init__(self, network: Network, seed: int = 0, *, detect_deadlock: bool = False, tracker=None):
        self.network = network
        self.stream: RandomStream = seed_stream(seed)
        self.clock = 0.0
        n = network.number_of_nodes

        # Per-run sampler tables; stateful distributions are copied per run.
        self._arrival_dists = [
            [
                None if isinstance(cc.arrival_distributions[i], NoArrivals)
                else cc.arrival_distributions[i].for_run()
                for cc in network.customer_classes
            ]
            for i in range(n)
        ]
        self._service_dists = [
            [cc.service_distributions[i].for_run() for cc in network.customer_classes]
            for i in range(n)
        ]
        self._batching_dists = [
            [
                cc.batching_distributions[i].for_run() if cc.batching_distributions else None
                for cc in network.customer_classes
            ]
            for i in range(n)
        ]
        self._transition_rows = [
            [cc.transition_rows[i] for cc in network.customer_classes] for i in range(n)
        ]
        self._class_change = network.class_change_matrices
        self._priorities = tuple(cc.priority for cc in network.customer_classes)

        self.nodes = [Node(i + 1, centre) for i, centre in enumerate(network.service_centres)]
        self.arrival_node = ArrivalNode(self)
        self.exit_node = ExitNode()

        self.arrived = 0
        self.accepted = 0
        self.baulked = 0
        self.rejected = 0
        self.finished = 0

        self.digraph: StateDigraph | None = StateDigraph() if detect_deadlock else None
        self.deadlock_report: DeadlockReport | None = None

        self.tracker = tracker
        self._on_event = getattr(tracker, "on_event", None)
        self._on_service_start = getattr(tracker, "on_service_start", None)

        self._records: list[DataRecord] = []
        self._next_id = 1
        self._entry_seq = 0
        self._stop = False
        self._counter_mode: str | None = None
        self._counter_target = 0
        self._used = False

    # -- event loop -------------------------------------------------------

    def _peek_next_event(self):
        """Earliest pending event: ('arrival', None) or ('node', node), plus its date."""
        best_date = self.arrival_node.next_event_date()
        best = ("arrival", None)
        for node in self.nodes:
            d = node.next_event_date()
            if d < best_date:
                best_date = d
                best = ("node", node)
        return best, best_date

    def a_phase(self):
        """Advance the clock to the next event; returns (owning entity, date)."""
        (kind, node), date = self._peek_next_event()
        if date == math.inf:
            raise StarvationError("no future event is scheduled")
        self.clock = date
        return (self.arrival_node if kind == "arrival" else node), date

    def _process(self, kind: str, node: Node | None) -> None:
        if kind == "arrival":
            self._arrival_event()
        else:
            self._node_event(node)

    def _claim_run(self) -> None:
        if self._used:
            raise RuntimeError("a Simulation is one-use; build a new one for another run")
        self._used = True

    def simulate_until_max_time(self, max_time: float) -> None:
        """Run every event dated <= max_time; the clock stops at the last one."""
        self._claim_run()
        if max_time <= 0:
            raise ValueError(f"max_time must be > 0, got {max_time}")
        while True:
            (kind, node), date = self._peek_next_event()
            if date > max_time:  # also covers +inf starvation
                return
            self.clock = date
            self._process(kind, node)

    def simulate_until_max_customers(self, n: int, mode: str = "finished") -> None:
        """Run until `n` customers have arrived / been accepted / finished."""
        self._claim_run()
        if mode not in TERMINATION_MODES:
            raise ValueError(f"mode must be one of {TERMINATION_MODES}, got {mode!r}")
        if n < 1:
            raise ValueError(f"customer target must be >= 1, got {n}")
        self._counter_mode = mode
        self._counter_target = n
        while not self._stop:
            (kind, node), date = self._peek_next_event()
            if date == math.inf:
                raise StarvationError(
                    f"no future event is scheduled; only {self._counter_value()} of {n} {mode}"
                )
            self.clock = date
            self._process(kind, node)

    def simulate_until_deadlock(self) -> float:
        """Run until the deadlock detector reports a cycle; returns that clock."""
        self._claim_run()
        if self.digraph is None:
            raise RuntimeError("simulate_until_deadlock needs detect_deadlock=True")
        while self.deadlock_report is None:
            (kind, node), date = self._peek_next_event()
            if date == math.inf:
                raise StarvationError("no future event is scheduled and no deadlock was reached")
            self.clock = date
            self._process(kind, node)
        return self.deadlock_report.detected_at

    def get_all_records(self) -> list[DataRecord]:
        """One record per completed service, ordered by exit date then id."""
        return sorted(self._records, key=lambda r: (r.exit_date, r.id_number))

    def individuals_in_system(self) -> int:
        return sum(node.present_count() for node in self.nodes)

    # -- counters ----------------------------------------------------------

    def _counter_value(self) -> int:
        return {"arrived": self.arrived, "accepted": self.accepted, "finished": self.finished}[
            self._counter_mode
        ]

    def _check_counter_stop(self) -> None:
        if self._counter_mode is not None and self._counter_value() >= self._counter_target:
            self._stop = True

    # -- B-events ----------------------------------------------------------

    def _arrival_event(self) -> None:
        i, k = self.arrival_node.winning_pair()
        node = self.nodes[i]
        batching = self._batching_dists[i][k]
        batch = sample_batch_size(batching, self.stream, self.clock) if batching else 1

        baulker = None
        if node.baulking_functions is not None:
            baulker = node.baulking_functions[k]

        for _ in range(batch):
            ind = Individual(self._next_id, k, self._priorities[k])
            self._next_id += 1
            self.arrived += 1
            if baulker is not None:
                u = self.stream.uniform()
                p = baulker(node.present_count())
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"baulking function returned {p}, outside [0, 1]")
                if u < p:
                    self.baulked += 1
                    self._check_counter_stop()
                    if self._stop:
                        break
                    continue
            if not node.has_space():
                self.rejected += 1
                self._check_counter_stop()
                if self._stop:
                    break
                continue
            self.accepted += 1
            self._join_node(node, ind)
            self._check_counter_stop()
            if self._stop:
                break

        if not self._stop:
            dist = self._arrival_dists[i][k]
            self.arrival_node.next_event_dates[(i, k)] = self.clock + dist.sample(
                self.stream, self.clock
            )
        if self._on_event is not None:
            self._on_event(self, "arrival", node.index)

    def _node_event(self, node: Node) -> None:
        # service completions take precedence over a simultaneous shift change
        for server in node.servers:
            c = server.cust
            if c is not None and not c.is_blocked and c.service_end_date == self.clock:
                self._release(node, server)
                if self._on_event is not None:
                    self._on_event(self, "release", node.index)
                return
        self._shift_change(node)
        if self._on_event is not None:
            self._on_event(self, "shift", node.index)

    # -- C-events ----------------------------------------------------------

    def _join_node(self, node: Node, ind: Individual) -> None:
        """Admit an individual: start service on an idle server or queue by priority."""
        ind.arrival_date = self.clock
        server = node.idle_server()
        if server is not None:
            self._start_service(node, server, ind)
        else:
            self._entry_seq += 1
            ind.sort_key = (ind.priority, self._entry_seq)
            insort(node.queue, ind, key=lambda x: x.sort_key)
        ind.queue_size_at_arrival = len(node.queue)

    def _start_service(self, node: Node, server: Server, ind: Individual) -> None:
        ind.service_start_date = self.clock
        dist = self._service_dists[node.index - 1][ind.customer_class]
        ind.service_end_date = self.clock + dist.sample(self.stream, self.clock)
        server.cust = ind
        ind.server = server
        if self._on_service_start is not None:
            self._on_service_start(self, node, server, ind)

    def _route(self, node: Node, ind: Individual) -> int:
        """Draw the destination: a 0-based node index, or EXIT for the residual mass."""
        u = self.stream.uniform()
        acc = 0.0
        for j, p in enumerate(self._transition_rows[node.index - 1][ind.customer_class]):
            acc += p
            if u < acc:
                return j
        return EXIT

    def _resample_class(self, node: Node, klass: int) -> int:
        row = self._class_change[node.index - 1][klass]
        u = self.stream.uniform()
        acc = 0.0
        for j, p in enumerate(row):
            acc += p
            if u < acc:
                return j
        return len(row) - 1

    def _release(self, node: Node, server: Server) -> None:
        """A service just completed: route its customer onward, or block it."""
        ind = server.cust
        dest = self._route(node, ind)
        new_class = ind.customer_class
        if dest != EXIT and self._class_change is not None:
            new_class = self._resample_class(node, ind.customer_class)
        if dest != EXIT and not self.nodes[dest].has_space():
            # Type I blocking: stay with the server until space frees.  The
            # mover still occupies its origin, so a full self-loop blocks too.
            ind.is_blocked = True
            ind.destination = dest
            ind.pending_class = new_class
            dest_node = self.nodes[dest]
            dest_node.blocked_queue.append((node.index, ind))
            if self.digraph is not None:
                origin = (node.index, server.id)
                self.digraph.on_block(
                    origin, [(dest_node.index, s.id) for s in dest_node.servers]
                )
                cycle = self.digraph.check_deadlock(origin)
                if cycle is not None and self.deadlock_report is None:
                    self.deadlock_report = DeadlockReport(detected_at=self.clock, cycle=cycle)
            return
        self._move_out(node, server, ind, dest, new_class)

    def _move_out(self, node: Node, server: Server, ind: Individual, dest: int, new_class: int) -> None:
        """Complete a departure: write the record, free the server, move the customer."""
        if ind.is_blocked:
            ind.is_blocked = False
            ind.destination = None
            if self.digraph is not None:
                self.digraph.on_unblock((node.index, server.id))

        arrival = ind.arrival_date
        start = ind.service_start_date
        end = ind.service_end_date
        klass_served = ind.customer_class

        server.cust = None
        ind.server = None
        self._after_server_freed(node, server)

        record = DataRecord(
            id_number=ind.id_number,
            customer_class=klass_served,
            node=node.index,
            arrival_date=arrival,
            waiting_time=start - arrival,
            service_start_date=start,
            service_time=end - start,
            service_end_date=end,
            time_blocked=self.clock - end,
            exit_date=self.clock,
            destination=EXIT if dest == EXIT else dest + 1,
            queue_size_at_arrival=ind.queue_size_at_arrival,
            queue_size_at_departure=len(node.queue),
        )
        self._records.append(record)
        ind.record_buffer.append(record)

        if dest == EXIT:
            self.exit_node.accept(ind)
            self.finished += 1
            self._check_counter_stop()
        else:
            ind.customer_class = new_class
            ind.priority = self._priorities[new_class]
            ind.pending_class = None
            self._join_node(self.nodes[dest], ind)

        # the departure freed one occupancy slot at the origin
        self._drain_blocked(node)

    def _after_server_freed(self, node: Node, server: Server) -> None:
        if server.retiring:
            node.servers.remove(server)
            return
        if node.queue:
            self._start_service(node, server, node.queue.pop(0))

    def _drain_blocked(self, node: Node) -> None:
        """Move blocked customers in, first-blocked-first-unblocked, cascading."""
        while node.blocked_queue and node.has_space() and not self._stop:
            origin_index, ind = node.blocked_queue.pop(0)
            origin = self.nodes[origin_index - 1]
            self._move_out(origin, ind.server, ind, node.index - 1, ind.pending_class)

    def _shift_change(self, node: Node) -> None:
        schedule = node.schedule
        node._shift_cursor = (node._shift_cursor + 1) % len(schedule.server_counts)
        if node._shift_cursor == 0:
            node._shift_offset += schedule.cycle_length
        node.next_shift_date = node._shift_offset + schedule.shift_end_times[node._shift_cursor]

        target = schedule.server_counts[node._shift_cursor]
        on_duty = [s for s in node.servers if not s.retiring]
        if target > len(on_duty):
            for _ in range(target - len(on_duty)):
                node.servers.append(Server(node._next_server_id))
                node._next_server_id += 1
            while node.queue:
                server = node.idle_server()
                if server is None:
                    break
                self._start_service(node, server, node.queue.pop(0))
        elif target < len(on_duty):
            # prefer releasing idle servers; busy ones retire non-preemptively
            to_remove = len(on_duty) - target
            idle = [s for s in on_duty if s.cust is None]
            for s in idle[:to_remove]:
                node.servers.remove(s)
            for s in [s for s in on_duty if s.cust is not None][: to_remove - len(idle[:to_remove])]:
                s.retiring = True
                s.shift_end = self.clock
