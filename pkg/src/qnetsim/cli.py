"""Command-line front end: seeded trials over a config, plus M/M/c oracles.

Trial i runs with seed base_seed + i, so any single trial can be reproduced
in isolation.  Workers only parallelise across trials; results are collected
and sorted by seed before any aggregation, making every output byte-identical
for any worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .analytics import InstabilityError, MMcParams, erlang_c
from .analytics import mean_wait as mmc_mean_wait
from .engine import TERMINATION_MODES, Simulation, StarvationError
from .network import ConfigError, Network, ValidationError, load_network
from .records import filter_records, summarize, write_csv

__all__ = [
    "TrialPlan",
    "MaxTime",
    "MaxCustomers",
    "UntilDeadlock",
    "run_trials",
    "emit_records",
    "main",
]


@dataclass(frozen=True)
class MaxTime:
    max_time: float


@dataclass(frozen=True)
class MaxCustomers:
    customers: int
    mode: str = "finished"


@dataclass(frozen=True)
class UntilDeadlock:
    pass


Termination = Union[MaxTime, MaxCustomers, UntilDeadlock]


@dataclass
class TrialPlan:
    config_path: str
    termination: Termination
    trials: int = 1
    base_seed: int = 0
    warmup: float = 0.0
    workers: int = 1
    records_dir: Optional[str] = None
    summary_path: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.base_seed < 0:
            raise ValueError(f"base seed must be >= 0, got {self.base_seed}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if isinstance(self.termination, MaxTime) and self.warmup >= self.termination.max_time:
            raise ValueError(
                f"warmup ({self.warmup}) must be smaller than max time "
                f"({self.termination.max_time})"
            )
        if isinstance(self.termination, MaxCustomers) and self.termination.mode not in TERMINATION_MODES:
            raise ValueError(f"mode must be one of {TERMINATION_MODES}")


def _run_one_trial(args):
    network, seed, termination, warmup = args
    sim = Simulation(network, seed, detect_deadlock=isinstance(termination, UntilDeadlock))
    result = {"seed": seed}
    if isinstance(termination, MaxTime):
        sim.simulate_until_max_time(termination.max_time)
    elif isinstance(termination, MaxCustomers):
        sim.simulate_until_max_customers(termination.customers, termination.mode)
    else:
        t = sim.simulate_until_deadlock()
        result["deadlock_time"] = t
        result["cycle"] = sim.deadlock_report.cycle_labels()
    records = sim.get_all_records()
    kept = filter_records(records, min_arrival_date=warmup) if warmup > 0 else records
    result["summary"] = summarize(kept).to_dict()
    result["counts"] = {
        "arrived": sim.arrived,
        "accepted": sim.accepted,
        "baulked": sim.baulked,
        "rejected": sim.rejected,
        "finished": sim.finished,
    }
    return result, records


def _grand_means(per_trial: list[dict]) -> dict:
    """Unweighted mean of per-trial means, skipping trials with no records."""
    grand = {}
    for key in ("mean_wait", "mean_time_blocked", "mean_service_time"):
        values = [t["summary"][key] for t in per_trial if t["summary"][key] is not None]
        grand[key] = sum(values) / len(values) if values else None
    grand["trials_with_records"] = sum(1 for t in per_trial if t["summary"]["count"] > 0)
    if per_trial and "deadlock_time" in per_trial[0]:
        times = [t["deadlock_time"] for t in per_trial]
        grand["mean_deadlock_time"] = sum(times) / len(times)
    return grand


def run_trials(plan: TrialPlan, network: Optional[Network] = None) -> dict:
    """Run every trial in the plan and return the report dictionary."""
    if network is None:
        network = load_network(Path(plan.config_path).read_text(encoding="utf-8"))
    jobs = [
        (network, plan.base_seed + i, plan.termination, plan.warmup) for i in range(plan.trials)
    ]
    if plan.workers == 1:
        outcomes = [_run_one_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            outcomes = list(pool.map(_run_one_trial, jobs))
    outcomes.sort(key=lambda pair: pair[0]["seed"])

    per_trial = [result for result, _ in outcomes]
    report = {
        "config": plan.config_path,
        "trials": plan.trials,
        "base_seed": plan.base_seed,
        "termination": _termination_dict(plan.termination),
        "warmup": plan.warmup,
        "per_trial": per_trial,
        "grand": _grand_means(per_trial),
    }
    if plan.records_dir is not None:
        emit_records(outcomes, plan)
    return report


def emit_records(outcomes, plan: TrialPlan) -> None:
    """Write one CSV of raw (unfiltered) records per trial, suffixed _seed<k>."""
    out_dir = Path(plan.records_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(plan.config_path).stem or "records"
    for result, records in outcomes:
        path = out_dir / f"{stem}_seed{result['seed']}.csv"
        try:
            write_csv(records, path)
        except OSError as err:
            raise OSError(f"could not write records to {path}: {err}") from err


def _termination_dict(termination: Termination) -> dict:
    if isinstance(termination, MaxTime):
        return {"max_time": termination.max_time}
    if isinstance(termination, MaxCustomers):
        return {"max_customers": termination.customers, "mode": termination.mode}
    return {"until_deadlock": True}


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnetsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded trials over a network config")
    run.add_argument("--config", required=True, help="path to a JSON network config")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    stop = run.add_mutually_exclusive_group(required=True)
    stop.add_argument("--max-time", type=float, default=None)
    stop.add_argument("--max-customers", type=int, default=None)
    stop.add_argument("--until-deadlock", action="store_true")
    run.add_argument("--mode", choices=TERMINATION_MODES, default="finished",
                     help="which counter --max-customers applies to")
    run.add_argument("--warmup", type=float, default=0.0,
                     help="drop records arriving at or before this time from summaries")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--summary", default=None, help="write the JSON report here (default stdout)")
    run.add_argument("--records-dir", default=None, help="write per-trial record CSVs here")

    mmc = sub.add_parser("mmc", help="closed-form M/M/c waiting time")
    mmc.add_argument("arrival_rate", type=float)
    mmc.add_argument("service_rate", type=float)
    mmc.add_argument("servers", type=int)

    val = sub.add_parser("validate", help="check a network config")
    val.add_argument("--config", required=True)

    return parser


def _cmd_run(args) -> int:
    if args.max_time is not None:
        termination: Termination = MaxTime(args.max_time)
    elif args.max_customers is not None:
        termination = MaxCustomers(args.max_customers, args.mode)
    else:
        termination = UntilDeadlock()
    plan = TrialPlan(
        config_path=args.config,
        termination=termination,
        trials=args.trials,
        base_seed=args.seed,
        warmup=args.warmup,
        workers=args.workers,
        records_dir=args.records_dir,
        summary_path=args.summary,
    )
    report = run_trials(plan)
    text = json.dumps(report, indent=2) + "\n"
    if plan.summary_path is not None:
        Path(plan.summary_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_mmc(args) -> int:
    params = MMcParams(args.arrival_rate, args.service_rate, args.servers)
    print(f"P(wait) = {erlang_c(params)!r}")
    print(f"Wq = {mmc_mean_wait(params)!r}")
    return 0


def _cmd_validate(args) -> int:
    network = load_network(Path(args.config).read_text(encoding="utf-8"))
    print(f"OK: {network.number_of_nodes} node(s), {network.number_of_classes} class(es)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "mmc":
            return _cmd_mmc(args)
        return _cmd_validate(args)
    except (ConfigError, ValidationError, InstabilityError, StarvationError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
