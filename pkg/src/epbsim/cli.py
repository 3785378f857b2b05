"""Command-line entry points: simulate, sweep, restake, probe.

Exit codes: 0 success, 2 flag/validation problems, 1 anything
unexpected. Validation messages surface the offending flag spelling,
not the internal field name.
"""

from __future__ import annotations

import argparse
import itertools
import json
import multiprocessing
import sys

from . import metrics, sim
from .core import GWEI_PER_ETH, SimConfig, ValidationError
from .io import (
    SWEEP_HEADER,
    ParseError,
    load_config,
    ratio_str,
    write_results,
)

_FLAG_OF = {
    "attack_user_count": "--attack-users",
    "attack_builder_count": "--attack-builders",
    "attack_validator_count": "--attack-validators",
    "last_minute_fraction": "--last-minute-fraction",
    "last_minute_threshold": "--last-minute-threshold",
    "er_p": "--er-p",
    "trace_bids": "--trace-bids",
    "initial_stakes": "--initial-stakes",
}


def _flagged(msg: str) -> str:
    for fieldname, flag in _FLAG_OF.items():
        msg = msg.replace(fieldname, flag)
    return msg


def _config_from(args) -> SimConfig:
    """Config file first, then explicit flags on top."""
    base = load_config(args.config).to_dict() if args.config else {}
    overrides = {
        "mode": args.mode, "blocks": args.blocks, "seed": args.seed,
        "attack_user_count": args.attack_users,
        "attack_builder_count": args.attack_builders,
        "attack_validator_count": args.attack_validators,
        "capacity": args.capacity, "delta": args.delta,
        "last_minute_fraction": args.last_minute_fraction,
        "last_minute_threshold": args.last_minute_threshold,
        "er_p": args.er_p,
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    if getattr(args, "trace_bids", False):
        base["trace_bids"] = True
    return SimConfig.from_dict(base)


def _result_tables(rec) -> dict:
    tables = {"slots.csv": sim.slots_table(rec), "agents.csv": sim.agents_table(rec)}
    if rec.config.restaking_enabled:
        tables["stakes.csv"] = sim.stakes_table(rec)
    if rec.config.trace_bids:
        tables["bids.csv"] = sim.bids_table(rec)
    return tables


def cmd_simulate(args) -> int:
    cfg = _config_from(args)
    rec = sim.run(cfg)
    write_results(args.out, _result_tables(rec), config=cfg)
    settled = sum(1 - r["skipped"] for r in rec.slot_rows)
    print(f"{cfg.mode}: {cfg.blocks} slots, {settled} settled, wrote {args.out}")
    return 0


def _parse_grid(text: str, flag: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ValidationError(f"{flag} expects comma-separated integers")
    if not values:
        raise ValidationError(f"{flag} must list at least one value")
    return values


def _sweep_cell(payload) -> list:
    base, a_users, a_other, cell_index, replicates, seed0 = payload
    rows = []
    for rep in range(replicates):
        d = dict(base)
        d["seed"] = seed0 + cell_index * replicates + rep
        d["attack_user_count"] = a_users
        if d.get("mode", "epbs") == "epbs":
            d["attack_builder_count"] = a_other
        else:
            d["attack_validator_count"] = a_other
        cfg = SimConfig.from_dict(d)
        rec = sim.run(cfg)
        settled = [r for r in rec.slot_rows if not r["skipped"]]
        if settled:
            mean_inv = ratio_str(sum(r["inversions"] for r in settled), len(settled))
        else:
            mean_inv = "0/1"
        g = metrics.gini(metrics.producer_profits(rec))
        gini_s = "" if g is None else ratio_str(g.numerator, g.denominator)
        try:
            share = metrics.proposer_share(rec)
            share_s = ratio_str(share.numerator, share.denominator)
        except metrics.NoSettledSlots:
            share_s = ""
        # in pos mode the second grid is attack validators; the column
        # name is fixed by the schema
        rows.append((a_users, a_other, cfg.mode, mean_inv, gini_s, share_s,
                     cfg.seed))
    return rows


def cmd_sweep(args) -> int:
    cfg = _config_from(args)
    users_grid = _parse_grid(args.attack_users_grid, "--attack-users-grid")
    if cfg.mode == "epbs":
        other_grid = _parse_grid(args.attack_builders_grid, "--attack-builders-grid")
    else:
        source = args.attack_validators_grid or args.attack_builders_grid
        other_grid = _parse_grid(source, "--attack-validators-grid")
    if args.replicates < 1:
        raise ValidationError("--replicates must be >= 1")

    base = cfg.to_dict()
    cells = [(base, au, ab, idx, args.replicates, cfg.seed)
             for idx, (au, ab) in enumerate(itertools.product(users_grid, other_grid))]
    if args.jobs > 1:
        with multiprocessing.Pool(args.jobs) as pool:
            per_cell = pool.map(_sweep_cell, cells)
    else:
        per_cell = [_sweep_cell(c) for c in cells]
    rows = [row for cell in per_cell for row in cell]
    write_results(args.out, {"sweep.csv": (SWEEP_HEADER, rows)}, config=cfg)
    print(f"sweep: {len(cells)} cells x {args.replicates} replicates, wrote {args.out}")
    return 0


def cmd_restake(args) -> int:
    base = load_config(args.config).to_dict() if args.config else {}
    if args.blocks is None and "blocks" not in base:
        base["blocks"] = 10_000  # the long-horizon default
    if args.initial_stakes:
        try:
            with open(args.initial_stakes, "r", encoding="utf-8") as fh:
                base["initial_stakes"] = json.load(fh)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise ValidationError(f"--initial-stakes: {exc}")
    cfg = _config_from_restake(args, base)
    rec = sim.run(cfg)
    write_results(args.out, _result_tables(rec), config=cfg)

    target = args.target_eth * GWEI_PER_ETH
    pool_roles = ("builder", "proposer") if cfg.mode == "epbs" else ("validator",)
    print("agent_id,role,tau,gamma,blocks_to_target")
    for a in rec.agents:
        if a.role not in pool_roles:
            continue
        hit = metrics.blocks_to_target(rec, a.agent_id, target)
        print(f"{a.agent_id},{a.role},{a.tau},{a.gamma},{'' if hit is None else hit}")
    return 0


def _config_from_restake(args, base: dict) -> SimConfig:
    overrides = {
        "mode": args.mode, "blocks": args.blocks, "seed": args.seed,
        "attack_user_count": args.attack_users,
        "attack_builder_count": args.attack_builders,
        "attack_validator_count": args.attack_validators,
        "capacity": args.capacity, "delta": args.delta,
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    base["restaking_enabled"] = True
    return SimConfig.from_dict(base)


def _parse_floats(text: str, flag: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ValidationError(f"{flag} expects comma-separated numbers")


def cmd_probe(args) -> int:
    if args.phi == (args.growth is not None):  # exactly one of the two
        raise ValidationError("pick exactly one of --phi or --growth ROLE")
    if args.phi:
        if args.theta is None or args.omega is None:
            raise ValidationError("--phi needs --theta and --omega")
        thetas = _parse_floats(args.theta, "--theta")
        omegas = _parse_floats(args.omega, "--omega")
        lines = [f"{_num(t)},{_num(om)},{_num(metrics.phi_epbs(t, om))}"
                 for t, om in itertools.product(thetas, omegas)]
        print("\n".join(["theta,omega,phi"] + lines))
        return 0
    role = args.growth
    if args.s is None or args.total is None:
        raise ValidationError("--growth needs --s and --total")
    combos = itertools.product(
        _parse_floats(args.s, "--s"), _parse_floats(args.total, "--total"),
        _parse_floats(args.v, "--v"), _parse_floats(args.b, "--b"),
        _parse_floats(args.f, "--f"), _parse_floats(args.pi, "--pi"),
        _parse_floats(args.gamma, "--gamma"))
    lines = []
    for s, total, v, b, f, pi, gamma in combos:
        rate = metrics.growth_rate(role, int(s), int(total), v=int(v), b=int(b),
                                   f=f, pi=pi, gamma=int(gamma))
        parts = [role] + [_num(x) for x in (int(s), int(total), int(v), int(b),
                                            f, pi, int(gamma), rate)]
        lines.append(",".join(parts))
    print("\n".join(["role,s,total,v,b,f,pi,gamma,rate"] + lines))
    return 0


def _num(x) -> str:
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _add_common_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--mode", choices=("pos", "epbs"))
    p.add_argument("--blocks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--attack-users", type=int, dest="attack_users")
    p.add_argument("--attack-builders", type=int, dest="attack_builders")
    p.add_argument("--attack-validators", type=int, dest="attack_validators")
    p.add_argument("--capacity", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epbsim",
                                     description="block production simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one seeded run")
    _add_common_sim_flags(p)
    p.add_argument("--last-minute-fraction", type=float, dest="last_minute_fraction")
    p.add_argument("--last-minute-threshold", type=int, dest="last_minute_threshold")
    p.add_argument("--er-p", type=float, dest="er_p")
    p.add_argument("--trace-bids", action="store_true", dest="trace_bids")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="attack-count grid of runs")
    _add_common_sim_flags(p)
    p.add_argument("--last-minute-fraction", type=float, dest="last_minute_fraction")
    p.add_argument("--last-minute-threshold", type=int, dest="last_minute_threshold")
    p.add_argument("--er-p", type=float, dest="er_p")
    p.add_argument("--attack-users-grid", required=True)
    p.add_argument("--attack-builders-grid")
    p.add_argument("--attack-validators-grid")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep, trace_bids=False)

    p = sub.add_parser("restake", help="long-horizon restaking run")
    _add_common_sim_flags(p)
    p.add_argument("--initial-stakes", dest="initial_stakes",
                   help="JSON file mapping agent_id to starting gwei")
    p.add_argument("--target-eth", type=int, default=100, dest="target_eth")
    p.set_defaults(func=cmd_restake, trace_bids=False)

    p = sub.add_parser("probe", help="closed-form evaluators")
    p.add_argument("--phi", action="store_true")
    p.add_argument("--growth", choices=("builder", "proposer", "validator"))
    p.add_argument("--theta")
    p.add_argument("--omega")
    p.add_argument("--s")
    p.add_argument("--total")
    p.add_argument("--v", default="0")
    p.add_argument("--b", default="0")
    p.add_argument("--f", default="0")
    p.add_argument("--pi", default="0")
    p.add_argument("--gamma", default="1")
    p.set_defaults(func=cmd_probe)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {_flagged(str(exc))}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
