"""Long-run engine output against independent closed-form and numeric oracles.

These go beyond the M/M/c formula: a non-preemptive priority queue checked
against the Cobham decomposition, and a blocking tandem checked against the
exact stationary distribution of its continuous-time Markov chain.
"""

import json

import numpy as np

from qnetsim import MMcParams, Simulation, erlang_c, filter_records, load_network


def run_means(network, seeds, horizon, warmup, metric):
    values = []
    for seed in seeds:
        sim = Simulation(network, seed=seed)
        sim.simulate_until_max_time(horizon)
        kept = filter_records(sim.get_all_records(), min_arrival_date=warmup)
        values.append(metric(kept))
    return sum(values) / len(values)


def test_non_preemptive_priority_waits_match_cobham():
    # two classes, lam1 = lam2 = 1, mu = 1.5, c = 2; Cobham decomposition:
    # W_k = (C / (c mu)) / ((1 - rho_{k-1})(1 - rho_k)) with cumulative loads
    prob_wait = erlang_c(MMcParams(2.0, 1.5, 2))
    w0 = prob_wait / (2 * 1.5)
    w_high = w0 / (1.0 * (1 - 1 / 3))
    w_low = w0 / ((1 - 1 / 3) * (1 - 2 / 3))

    network = load_network(
        json.dumps(
            {
                "arrival_distributions": {
                    "Class 0": [["Exponential", 1.0]],
                    "Class 1": [["Exponential", 1.0]],
                },
                "service_distributions": {
                    "Class 0": [["Exponential", 1.5]],
                    "Class 1": [["Exponential", 1.5]],
                },
                "priority_classes": {"Class 0": 0, "Class 1": 1},
                "number_of_servers": [2],
            }
        )
    )

    def class_mean(klass):
        def metric(recs):
            waits = [r.waiting_time for r in recs if r.customer_class == klass]
            return sum(waits) / len(waits)

        return metric

    seeds = range(25)
    got_high = run_means(network, seeds, 4000.0, 200.0, class_mean(0))
    got_low = run_means(network, seeds, 4000.0, 200.0, class_mean(1))
    assert abs(got_high - w_high) < 0.04 * w_high, f"{got_high} vs {w_high}"
    assert abs(got_low - w_low) < 0.04 * w_low, f"{got_low} vs {w_low}"


def tandem_ctmc_oracle(lam, mu1, mu2, n_max=300):
    """Stationary waits and blocked time for an M/M/1 -> (cap 0) M/M/1 tandem.

    State (n1, z): n1 customers at node 1; z = 0 second stage idle, 1 busy,
    2 busy with node 1's server additionally holding a blocked customer.
    """
    index = {}
    states = []
    for n1 in range(n_max + 1):
        for z in (0, 1, 2):
            if z == 2 and n1 == 0:
                continue
            index[(n1, z)] = len(states)
            states.append((n1, z))
    Q = np.zeros((len(states), len(states)))

    def add(src, dst, rate):
        Q[index[src], index[dst]] += rate

    for n1, z in states:
        if n1 < n_max:
            add((n1, z), (n1 + 1, z), lam)
        if z == 0 and n1 >= 1:
            add((n1, z), (n1 - 1, 1), mu1)
        if z == 1:
            if n1 >= 1:
                add((n1, z), (n1, 2), mu1)
            add((n1, z), (n1, 0), mu2)
        if z == 2:
            add((n1, z), (n1 - 1, 1), mu2)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    A = np.vstack([Q.T, np.ones(len(states))])
    b = np.zeros(len(states) + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(A, b, rcond=None)[0]

    mean_waiting = sum(p * max(n1 - 1, 0) for p, (n1, z) in zip(pi, states))
    p_blocked = sum(p for p, (n1, z) in zip(pi, states) if z == 2)
    # Little's law: every arrival is admitted and eventually served at node 1
    return mean_waiting / lam, p_blocked / lam


def test_blocking_tandem_matches_ctmc_stationary_solution():
    lam, mu1, mu2 = 1.0, 2.0, 3.0
    wait_oracle, blocked_oracle = tandem_ctmc_oracle(lam, mu1, mu2)

    network = load_network(
        json.dumps(
            {
                "arrival_distributions": [["Exponential", lam], ["NoArrivals"]],
                "service_distributions": [["Exponential", mu1], ["Exponential", mu2]],
                "transition_matrices": [[0.0, 1.0], [0.0, 0.0]],
                "queue_capacities": ["Inf", 0],
                "number_of_servers": [1, 1],
            }
        )
    )

    def node1_wait(recs):
        waits = [r.waiting_time for r in recs if r.node == 1]
        return sum(waits) / len(waits)

    def node1_blocked(recs):
        blocked = [r.time_blocked for r in recs if r.node == 1]
        return sum(blocked) / len(blocked)

    seeds = range(25)
    got_wait = run_means(network, seeds, 4000.0, 200.0, node1_wait)
    got_blocked = run_means(network, seeds, 4000.0, 200.0, node1_blocked)
    assert abs(got_wait - wait_oracle) < 0.05 * wait_oracle, f"{got_wait} vs {wait_oracle}"
    assert abs(got_blocked - blocked_oracle) < 0.05 * blocked_oracle, (
        f"{got_blocked} vs {blocked_oracle}"
    )
