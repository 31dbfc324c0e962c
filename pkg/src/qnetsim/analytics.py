"""Closed-form M/M/c waiting-time formulas, used as independent oracles."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["MMcParams", "InstabilityError", "erlang_c", "mean_wait"]

# Iterative float factorials overflow beyond 170!; desk-scale c is far smaller.
MAX_SERVERS = 170


class InstabilityError(ValueError):
    """The queue has no steady state: arrival rate >= total service rate."""


@dataclass(frozen=True)
class MMcParams:
    arrival_rate: float  # lambda > 0
    service_rate: float  # mu > 0, per server
    servers: int  # c >= 1

    def __post_init__(self):
        if self.arrival_rate <= 0:
            raise ValueError(f"arrival rate must be > 0, got {self.arrival_rate}")
        if self.service_rate <= 0:
            raise ValueError(f"service rate must be > 0, got {self.service_rate}")
        if not isinstance(self.servers, int) or self.servers < 1:
            raise ValueError(f"server count must be an integer >= 1, got {self.servers}")
        if self.servers > MAX_SERVERS:
            raise ValueError(f"server count must be <= {MAX_SERVERS}, got {self.servers}")


def _check_stability(params: MMcParams) -> None:
    if params.arrival_rate >= params.servers * params.service_rate:
        raise InstabilityError(
            f"unstable queue: lambda = {params.arrival_rate} >= "
            f"c * mu = {params.servers * params.service_rate}"
        )


def erlang_c(params: MMcParams) -> float:
    """Probability an arriving customer must wait in an M/M/c queue.

    P(wait) = (a^c / c!) * (c / (c - a)) / (sum_{k<c} a^k / k! + (a^c / c!) * (c / (c - a)))
    with offered load a = lambda / mu.
    """
    _check_stability(params)
    a = params.arrival_rate / params.service_rate
    c = params.servers
    term = 1.0  # a^k / k!
    partial = 0.0
    for k in range(c):
        partial += term
        term *= a / (k + 1)
    # after the loop, term == a^c / c!
    tail = term * c / (c - a)
    return tail / (partial + tail)


def mean_wait(params: MMcParams) -> float:
    """Mean time in queue Wq = P(wait) / (c * mu - lambda)."""
    _check_stability(params)
    return erlang_c(params) / (params.servers * params.service_rate - params.arrival_rate)
