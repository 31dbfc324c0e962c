"""Shared builders and trackers for the test suite."""

import json

import pytest

from qnetsim import CustomerClass, Exponential, Network, ServiceCentre, load_network
from qnetsim.distributions import Distribution


def repair_clinic_config() -> dict:
    """Two-node clinic: batched scheduled jobs plus priority unscheduled jobs,
    with a capacity-0 repair room blocking the inspection desk."""
    return {
        "arrival_distributions": {
            "Class 0": [["Deterministic", 1.0], ["NoArrivals"]],
            "Class 1": [["Exponential", 1.0], ["NoArrivals"]],
        },
        "service_distributions": {
            "Class 0": [["Exponential", 3.0], ["Exponential", 1.0]],
            "Class 1": [["Exponential", 1.5], ["Exponential", 0.6666666666666666]],
        },
        "transition_matrices": {
            "Class 0": [[0.0, 0.05], [0.0, 0.0]],
            "Class 1": [[0.0, 0.4], [0.0, 0.0]],
        },
        "batching_distributions": {
            "Class 0": [["Deterministic", 2], ["Deterministic", 1]],
            "Class 1": [["Deterministic", 1], ["Deterministic", 1]],
        },
        "priority_classes": {"Class 0": 1, "Class 1": 0},
        "queue_capacities": ["Inf", 0],
        "number_of_servers": [2, 1],
    }


def mmc_config(arrival_rate: float, service_rate: float, servers: int) -> dict:
    return {
        "arrival_distributions": [["Exponential", arrival_rate]],
        "service_distributions": [["Exponential", service_rate]],
        "number_of_servers": [servers],
    }


def self_loop_config() -> dict:
    """One server, no waiting room, every completion routed back to itself."""
    return {
        "arrival_distributions": [["Exponential", 1.0]],
        "service_distributions": [["Exponential", 2.0]],
        "transition_matrices": [[1.0]],
        "queue_capacities": [0],
        "number_of_servers": [1],
    }


def build(config: dict) -> Network:
    return load_network(json.dumps(config))


def single_node_network(
    arrival: Distribution,
    service: Distribution,
    *,
    servers=1,
    capacity=float("inf"),
    baulking=None,
    batching=None,
) -> Network:
    return Network(
        service_centres=(
            ServiceCentre(
                number_of_servers=servers,
                queue_capacity=capacity,
                baulking_functions=(baulking,) if baulking is not None else None,
            ),
        ),
        customer_classes=(
            CustomerClass(
                arrival_distributions=(arrival,),
                service_distributions=(service,),
                transition_rows=((0.0,),),
                batching_distributions=(batching,) if batching is not None else None,
            ),
        ),
    )


class Recording(Distribution):
    """Wraps a distribution and logs every value it produces."""

    def __init__(self, inner: Distribution, log: list):
        self.inner = inner
        self.log = log

    def sample(self, stream, now=0.0):
        value = self.inner.sample(stream, now)
        self.log.append(value)
        return value


class EventLog:
    """Tracker that records each pre-scheduled event as (clock, kind, node)."""

    def __init__(self):
        self.events = []

    def on_event(self, sim, kind, node_index):
        self.events.append((sim.clock, kind, node_index))


@pytest.fixture
def repair_clinic() -> Network:
    return build(repair_clinic_config())


@pytest.fixture
def mm1() -> Network:
    return build(mmc_config(3.0, 5.0, 1))
