"""Online deadlock detection over a waits-for digraph of servers.

Vertices are (node index, server id) pairs.  When a server's customer becomes
blocked toward a destination node, edges are added from that server to every
server present at the destination; they are removed the moment the customer
moves on.  A directed cycle certifies deadlock: every vertex on a cycle holds
a blocked customer, so none of them can ever release the others.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

__all__ = ["StateDigraph", "DeadlockReport"]

Vertex = tuple[int, int]  # (node index, server id), both 1-based


@dataclass(frozen=True)
class DeadlockReport:
    detected_at: float
    cycle: tuple[Vertex, ...]  # length >= 1; a self-loop gives a single vertex

    def cycle_labels(self) -> list[str]:
        return [f"{node}:{server}" for node, server in self.cycle]


class StateDigraph:
    """Blocking digraph with incremental cycle checks after each new blockage."""

    def __init__(self):
        self._edges: dict[Vertex, tuple[Vertex, ...]] = {}

    @property
    def edges(self) -> dict[Vertex, tuple[Vertex, ...]]:
        return dict(self._edges)

    def on_block(self, origin: Vertex, destination_servers: list[Vertex]) -> None:
        """Add edges from a newly blocked server to every destination server."""
        if origin in self._edges:
            raise RuntimeError(f"server {origin} already holds a blocked individual")
        self._edges[origin] = tuple(destination_servers)

    def on_unblock(self, origin: Vertex) -> None:
        """Remove all out-edges of a server whose individual just moved on."""
        self._edges.pop(origin, None)

    def check_deadlock(self, start: Optional[Vertex] = None) -> Optional[tuple[Vertex, ...]]:
        """Return a witnessing cycle of blocked servers, or None.

        With `start` given, only cycles through that vertex are searched,
        which is sufficient after an on_block(start, ...): any cycle not
        through the new edges would have existed before.
        """
        if start is not None:
            return self._cycle_through(start)
        for vertex in self._edges:
            cycle = self._cycle_through(vertex)
            if cycle is not None:
                return cycle
        return None

    def _cycle_through(self, start: Vertex) -> Optional[tuple[Vertex, ...]]:
        # Iterative DFS over servers that are themselves blocked (have out-edges);
        # a path from start back to start is a cycle.
        if start not in self._edges:
            return None
        stack = [(start, iter(self._edges[start]))]
        path = [start]
        visited = {start}
        while stack:
            _, successors = stack[-1]
            advanced = False
            for nxt in successors:
                if nxt == start:
                    return tuple(path)
                if nxt in visited or nxt not in self._edges:
                    continue
                visited.add(nxt)
                path.append(nxt)
                stack.append((nxt, iter(self._edges[nxt])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                path.pop()
        return None
