"""Command-line entry point: ``mevcost <command> [options]``.

Exit codes: 0 when every certificate holds, 1 when any fails, 2 on a bad
configuration.  Reports are deterministic for a given configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import cost as costmod
from . import payoff as pf
from . import permgroup, spectral, suites

SCHEMA_VERSION = 1
COMMANDS = ("cost", "spectrum", "coherence-table", "bounds-suite", "frontrun", "sandwich", "fair-demo")

log = logging.getLogger("mevcost")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 4
    graph: str = "transposition"
    payoff: dict | None = None
    seed: int = 0
    trials: int = 100
    samples: int = 1000
    out: str | None = None
    format: str = "json"
    allow_n8: bool = False
    market: dict = field(default_factory=dict)
    inject_fault: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command}")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")


def _load_json_arg(value: str | None):
    if value is None:
        return None
    p = Path(value)
    text = p.read_text() if p.exists() else value
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not a JSON file or inline JSON: {value!r} ({exc})") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def envelope(cfg: RunConfig, records: list[dict], summary: dict) -> dict:
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "tool": "mevcost",
        "version": __version__,
        "command": cfg.command,
        "config": asdict(cfg) | {"out": None},
        "seed": cfg.seed,
        "summary": summary,
        "records": records,
    })


def _record(quantity: str, value, provenance: str = "exact", **extra) -> dict:
    return {"quantity": quantity, "value": value, "provenance": provenance, **extra}


# -- commands -----------------------------------------------------------------------

def cmd_cost(cfg: RunConfig):
    if not cfg.payoff:
        raise ConfigError("--payoff is required for the cost command")
    f, x = pf.payoff_from_config(cfg.payoff)
    if x is None:
        raise ConfigError("payoff config must include the transaction list 'x'")
    rep = costmod.cost(f, x)
    recs = [_record("cost", rep.cost, **{"report": rep.to_dict()})]
    try:
        recs.append(_record("stabilizer_bound", None, certificate=costmod.stabilizer_bound(f, x).to_dict()))
    except costmod.PreconditionError as exc:
        recs.append(_record("stabilizer_bound", None, skipped=str(exc)))
    ok = all(r.get("certificate", {}).get("satisfied", True) for r in recs)
    return recs, {"cost": rep.cost, "all_satisfied": ok}, ok


def _graph(cfg: RunConfig) -> spectral.PermutationGraph:
    if cfg.graph.startswith("custom:"):
        return spectral.build_graph(cfg.n, "custom", spectral.read_edge_file(cfg.graph[len("custom:"):]),
                                    allow_n8=cfg.allow_n8)
    if cfg.graph not in ("complete", "transposition"):
        raise ConfigError(f"unknown graph {cfg.graph!r}")
    return spectral.build_graph(cfg.n, cfg.graph, allow_n8=cfg.allow_n8)


def cmd_spectrum(cfg: RunConfig):
    s = spectral.decompose(_graph(cfg))
    d = s.to_dict()
    recs = [_record("eigenvalue", lam, index=i, vector_inf_norm=norm)
            for i, (lam, norm) in enumerate(zip(d["eigenvalues"], d["vector_inf_norms"]))]
    summary = {"n": cfg.n, "graph": cfg.graph, "coherence": d["coherence"], "basis_dependent": d["basis_dependent"],
               "diameter": s.graph.diameter, "edges": s.graph.num_edges,
               "multiplicities": d["multiplicities"], "provenance": d["provenance"]}
    return recs, summary, True


def cmd_coherence_table(cfg: RunConfig):
    rows = suites.coherence_table(cfg.n, log=log.info)
    ok = True
    for r in rows:
        r["complete_matches_analytic"] = abs(r["complete_mu"] - r["complete_analytic"]) < 1e-8
        r["transposition_within_bounds"] = r["lower_bound"] - 1e-12 <= r["transposition_mu"] <= r["upper_bound"] + 1e-12
        ok &= r["complete_matches_analytic"] and r["transposition_within_bounds"]
    return [_record("coherence", None, **r) for r in rows], {"n_max": cfg.n, "all_satisfied": ok}, ok


def cmd_bounds_suite(cfg: RunConfig):
    res = suites.bounds_suite(cfg.n, cfg.seed, cfg.trials, inject_fault=cfg.inject_fault)
    for e in res["errors"]:
        log.error(e)
    recs = [_record(r["bound_name"], r["slack"], r["mode"], certificate=r) for r in res["records"]]
    summary = {k: res[k] for k in ("n", "seed", "trials", "certificates", "failures", "errors")}
    return recs, summary, res["failures"] == 0


def _market(cfg: RunConfig) -> suites.MarketConfig:
    m = dict(cfg.market)
    m.setdefault("n", cfg.n)
    m.setdefault("seed", cfg.seed)
    m.setdefault("samples", cfg.samples)
    try:
        return suites.MarketConfig(**m)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid market config: {exc}") from None


def cmd_frontrun(cfg: RunConfig):
    res = suites.frontrun_study(_market(cfg))
    prov = res.pop("provenance")
    ok = res["certificate"]["satisfied"]
    return [_record("sampled_sup_cost", res["sampled_sup_cost"], prov, **res)], \
        {"sampled_sup_cost": res["sampled_sup_cost"], "bound": res["bound"], "all_satisfied": ok}, ok


def cmd_sandwich(cfg: RunConfig):
    res = suites.sandwich_study(_market(cfg))
    prov = res.pop("provenance")
    ok = all(c["satisfied"] for c in res["certificates"])
    return [_record("sampled_sup_cost", res["sampled_sup_cost"], prov, **res)], \
        {"sampled_sup_cost": res["sampled_sup_cost"], "bound": res["bound"], "all_satisfied": ok}, ok


def cmd_fair_demo(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    if n > 6:
        raise ConfigError("fair-demo enumerates S_n twice per list; use n <= 6")
    recs, ok = [], True
    for t in range(max(cfg.trials, 1)):
        x = tuple(int(v) for v in rng.integers(0, n, size=n))
        f = suites._random_orbit_table(rng, x)
        base = costmod.cost(f, x).cost
        fair = costmod.randomized_cost(pf.fair_wrapper(f, n), x)
        ok &= abs(fair) <= 1e-12
        recs.append(_record("randomized_cost", fair, x=list(x), deterministic_cost=base))
    return recs, {"max_randomized_cost": max(abs(r["value"]) for r in recs), "all_satisfied": ok}, ok


HANDLERS = {
    "cost": cmd_cost, "spectrum": cmd_spectrum, "coherence-table": cmd_coherence_table,
    "bounds-suite": cmd_bounds_suite, "frontrun": cmd_frontrun, "sandwich": cmd_sandwich,
    "fair-demo": cmd_fair_demo,
}


# -- output ---------------------------------------------------------------------------

CSV_COLUMNS = ("command", "seed", "quantity", "value", "provenance", "detail")


def to_csv(report: dict) -> str:
    """Fixed columns; the last one carries the remaining fields as JSON."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report["records"]:
        rest = {k: v for k, v in r.items() if k not in ("quantity", "value", "provenance")}
        w.writerow([report["command"], report["seed"], r["quantity"], r["value"], r["provenance"],
                    json.dumps(rest, sort_keys=True)])
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(report)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mevcost", description="Cost of MEV over transaction orderings.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--n", type=int, default=None, help="number of transactions (n_max for coherence-table)")
    ap.add_argument("--graph", default="transposition", help="complete | transposition | custom:<edge file>")
    ap.add_argument("--payoff", help="payoff config: JSON file path or inline JSON")
    ap.add_argument("--market", help="market config for frontrun/sandwich: JSON path or inline")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--allow-n8", action="store_true", help="permit n=8 spectra (very large dense solve)")
    ap.add_argument("--inject-fault", action="store_true", help="bounds-suite negative control")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    default_n = {"coherence-table": 7, "frontrun": 5, "sandwich": 5}.get(args.command, 4)
    try:
        cfg = RunConfig(command=args.command, n=args.n if args.n is not None else default_n, graph=args.graph,
                        payoff=_load_json_arg(args.payoff), seed=args.seed, trials=args.trials,
                        samples=args.samples, out=args.out, format=args.format, allow_n8=args.allow_n8,
                        market=_load_json_arg(args.market) or {}, inject_fault=args.inject_fault)
        records, summary, ok = HANDLERS[cfg.command](cfg)
    except (ConfigError, permgroup.DegreeOutOfRange, pf.DomainError, spectral.DisconnectedGraph,
            KeyError, ValueError, OSError) as exc:
        print(f"mevcost: configuration error: {exc}", file=sys.stderr)
        return 2
    text = render(envelope(cfg, records, summary), cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
