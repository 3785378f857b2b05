"""Config parsing, calibration distributions, and results output.

All persisted numbers are integer gwei or exact reduced fractions
rendered as "p/q" strings, so output files are byte-identical across
platforms for the same (config, seed).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from fractions import Fraction

from .core import SimConfig, ValidationError


class ParseError(ValueError):
    """Config file could not be parsed; message carries key context."""


class EmptyEmpiricalFile(ValueError):
    pass


SLOTS_HEADER = (
    "slot", "mode", "producer_id", "stop_round", "winning_bid", "valuation",
    "gas_total", "mev_user", "mev_producer", "mev_uncaptured", "inversions", "skipped",
)
AGENTS_HEADER = ("agent_id", "role", "tau", "strategy", "gamma", "profit_total", "blocks_produced")
STAKES_HEADER = ("slot", "agent_id", "capital", "active_stake")
BIDS_HEADER = ("slot", "round", "builder_id", "bid", "valuation")
SWEEP_HEADER = (
    "attack_users", "attack_builders", "mode", "mean_inversions",
    "gini_producer", "proposer_share", "seed",
)


# -- distributions ------------------------------------------------------

def validate_distribution(spec: dict) -> None:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("distribution spec must be a dict with a 'kind'")
    kind = spec["kind"]
    if kind == "gamma":
        if spec.get("shape", 0) <= 0 or spec.get("scale", 0) <= 0:
            raise ValidationError("gamma needs shape > 0 and scale > 0")
    elif kind == "lognormal":
        if "mu" not in spec or spec.get("sigma", -1) < 0:
            raise ValidationError("lognormal needs mu and sigma >= 0")
    elif kind == "empirical":
        if "values" not in spec and "path" not in spec:
            raise ValidationError("empirical needs a 'path' (or resolved 'values')")
        if "values" in spec:
            vals = spec["values"]
            if not vals:
                raise EmptyEmpiricalFile("empirical distribution has no values")
            if any((not isinstance(v, int)) or v < 0 for v in vals):
                raise ValidationError("empirical values must be integers >= 0")
    else:
        raise ValidationError(f"unknown distribution kind {kind!r}")


def resolve_distribution(spec: dict, base_dir: str = ".") -> dict:
    """Load an empirical spec's value file; other kinds pass through.

    Empirical files are one value per line, integer gwei.
    """
    validate_distribution(spec)
    if spec["kind"] != "empirical" or "values" in spec:
        return spec
    path = spec["path"]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                v = int(line)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: not an integer gwei value") from exc
            if v < 0:
                raise ParseError(f"{path}:{lineno}: negative value")
            values.append(v)
    if not values:
        raise EmptyEmpiricalFile(f"{path} contains no values")
    out = dict(spec)
    out["values"] = values
    return out


def sample(spec: dict, rng) -> int:
    """One non-negative integer-gwei draw; floats round half-up."""
    kind = spec["kind"]
    if kind == "gamma":
        x = rng.gamma(spec["shape"], spec["scale"])
    elif kind == "lognormal":
        x = rng.lognormal(spec["mu"], spec["sigma"])
    elif kind == "empirical":
        values = spec.get("values")
        if not values:
            raise EmptyEmpiricalFile("empirical distribution not resolved or empty")
        return values[int(rng.integers(0, len(values)))]
    else:
        raise ValidationError(f"unknown distribution kind {kind!r}")
    return max(0, int(math.floor(x + 0.5)))


# -- config -------------------------------------------------------------

def load_config(path: str) -> SimConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: config root must be a JSON object")
    cfg = SimConfig.from_dict(raw)
    base = os.path.dirname(os.path.abspath(path))
    cfg.gas_fee_dist = resolve_distribution(cfg.gas_fee_dist, base)
    cfg.mev_dist = resolve_distribution(cfg.mev_dist, base)
    validate_distribution(cfg.gas_fee_dist)
    validate_distribution(cfg.mev_dist)
    return cfg


def save_config(cfg: SimConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- results ------------------------------------------------------------

def ratio_str(num: int, den: int) -> str:
    """Exact reduced fraction as 'p/q'. Integer-only, so byte-stable."""
    if den <= 0:
        raise ValidationError("ratio denominator must be > 0")
    f = Fraction(num, den)
    return f"{f.numerator}/{f.denominator}"


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_results(out_dir: str, tables: dict, config: SimConfig = None) -> dict:
    """Write named CSV tables plus config.json and manifest.json.

    tables maps file name -> (header, rows). Returns the manifest dict;
    manifest.json lists a sha256 per emitted file (itself excluded).
    """
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for name in sorted(tables):
        header, rows = tables[name]
        write_csv(os.path.join(out_dir, name), header, rows)
        names.append(name)
    if config is not None:
        save_config(config, os.path.join(out_dir, "config.json"))
        names.append("config.json")
    manifest = {"files": {n: _sha256(os.path.join(out_dir, n)) for n in sorted(names)}}
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
