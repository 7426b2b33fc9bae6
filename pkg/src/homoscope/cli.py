"""``homoscope`` command line.

Exit codes: 0 on success, 2 when a checked bound fails, 1 on usage, input
or budget errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import bounds
from .exact import BudgetExceeded, DEFAULT_BUDGET, EmptyHom, occupancy_distribution
from .extremal import SubsetPair, extremal_pairs, occupancy_interval, subset_weight
from .mcmc import ChainConfig, NoValidStart, run_chain
from .model import (
    ModelFileError,
    RetriesExhausted,
    as_fraction,
    complete_bipartite,
    even_cycle,
    load_model,
    mask_of,
    preset_model,
    random_regular_bipartite,
)
from .scenarios import SCENARIOS, ScenarioConfig, ScenarioError, run_scenario

EXIT_OK, EXIT_USAGE, EXIT_VERDICT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _kv(text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _preset(text: str):
    name, _, rest = text.partition(":")
    kw = {}
    for k, v in _kv(rest).items():
        kw[k] = as_fraction(v) if k == "lam" else int(v)
    return preset_model(name, **kw)


def _host(text: str):
    kind, _, rest = text.partition(":")
    nums = [int(x) for x in rest.split(",") if x]
    if kind == "cycle" and len(nums) == 1:
        return even_cycle(nums[0])
    if kind == "kab" and len(nums) == 2:
        return complete_bipartite(*nums)
    if kind == "regular" and len(nums) in (2, 3):
        n, d, seed = (*nums, 0)[:3]
        return random_regular_bipartite(n, d, seed, require_simple=False)
    raise UsageError(f"bad host {text!r}; use cycle:L, kab:a,b or regular:n,d[,seed]")


def _model(args, need_host: bool = False):
    if args.model:
        H, lam, G = load_model(args.model)
    elif args.preset:
        H, lam = _preset(args.preset)
        G = None
    else:
        raise UsageError("give --model <path> or --preset <name>")
    if args.host:
        G = _host(args.host)
    if need_host and G is None:
        raise UsageError("this command needs a host graph (a 'G' entry in the model file or --host)")
    return H, lam, G


def _emit(doc, out: str | None = None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _colour(H, k):
    if k is not None and not 0 <= k < H.q:
        raise UsageError(f"colour {k} outside 0..{H.q - 1}")
    return k


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_extremal(args) -> int:
    H, lam, _ = _model(args)
    k = _colour(H, args.colour)
    report = extremal_pairs(H, lam)
    doc = report.to_dict()
    if k is not None:
        iv = occupancy_interval(report, k, as_fraction(args.eps))
        doc["colour"] = k
        doc["forbidden"] = {
            "left": [str(iv.left.lo), str(iv.left.hi)],
            "right": [str(iv.right.lo), str(iv.right.hi)],
        }
    _emit(doc)
    return EXIT_OK


def cmd_exact(args) -> int:
    H, lam, G = _model(args, need_host=True)
    k = _colour(H, args.colour)
    dist = occupancy_distribution(G, H, lam, k, budget=args.budget)
    if args.dist:
        with open(args.dist, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["count", "probability_num", "probability_den", "probability_float"])
            for j, p in sorted(dist.mass.items()):
                w.writerow([j, p.numerator, p.denominator, float(p)])
    _emit({
        "colour": k,
        "host_size": dist.host_size,
        "partition_function": str(dist.partition),
        "mean_count": str(dist.mean_count),
        "mean_fraction": str(dist.mean_fraction),
        "mean_fraction_float": float(dist.mean_fraction),
        "distribution": {str(j): str(p) for j, p in sorted(dist.mass.items())},
    })
    return EXIT_OK


def _parse_init(text: str, H, lam):
    if text == "random":
        return "random_valid"
    if text == "pure:max":
        return tuple(extremal_pairs(H, lam).maximizers)
    if text.startswith("pure:"):
        try:
            a, b = text[5:].split(",")
            A = mask_of(int(x) for x in a.split("+") if x)
            B = mask_of(int(x) for x in b.split("+") if x)
        except ValueError:
            raise UsageError(f"bad --init {text!r}; use pure:A,B with colours joined by '+'") from None
        if A >> H.q or B >> H.q:
            raise UsageError("--init names a colour outside H")
        return SubsetPair(A, B, subset_weight(lam, A) * subset_weight(lam, B))
    raise UsageError(f"bad --init {text!r}")


def cmd_mcmc(args) -> int:
    H, lam, G = _model(args, need_host=True)
    init = _parse_init(args.init, H, lam)
    try:
        cfg = ChainConfig(steps=args.steps, burn_in=args.burn, thinning=args.thin, seed=args.seed,
                          init=init, restarts=args.restarts, class_threshold=args.threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stats = run_chain(G, H, lam, cfg)
    _emit(stats.to_dict(), args.out)
    return EXIT_OK


def _tilt_all(G, H, lam, k, delta, budget):
    """Check every term; report the tightest one, failing if any term or the identity fails."""
    results = [bounds.check_tilt_inequality(G, H, lam, k, delta, j, budget) for j in range(G.N + 1)]
    worst = max(results, key=lambda r: r.lhs / r.rhs)
    ok = all(r.holds for r in results) and worst.extra["identity"]
    return bounds.BoundCheckResult(worst.name, worst.lhs, worst.rhs, ok, worst.power, True,
                                   "tightest term over all j", worst.extra)


def cmd_verify(args) -> int:
    check = args.check
    H, lam, G = _model(args, need_host=check not in ("kdd-ub",))
    if check == "entropy":
        if args.d is None:
            raise UsageError("--check entropy needs --d")
        res = bounds.check_entropy_bound(G, H, lam, args.d, args.budget)
    elif check == "gt":
        res = bounds.check_gt_bound(G, H, lam, args.budget)
    elif check == "lb":
        res = bounds.eta_lower_bound(G, H, lam, args.budget)
    elif check == "kdd-ub":
        if args.a is not None and args.b is not None:
            a, b = args.a, args.b
        elif args.d is not None:
            a = b = args.d
        else:
            raise UsageError("--check kdd-ub needs --a and --b, or --d")
        res = bounds.kdd_eta_upper_bound(a, b, H, lam)
    elif check == "tilt":
        k = _colour(H, args.colour)
        if k is None:
            raise UsageError("--check tilt needs --colour")
        delta = as_fraction(args.delta)
        if args.j is None:
            res = _tilt_all(G, H, lam, k, delta, args.budget)
        else:
            res = bounds.check_tilt_inequality(G, H, lam, k, delta, args.j, args.budget)
            if not res.extra["identity"]:
                res = bounds.BoundCheckResult(res.name, res.lhs, res.rhs, False, res.power, True,
                                              "identity failed", res.extra)
    else:
        rep = bounds.check_expansion(G, args.C, args.mode, d=args.d, max_size=args.max_size,
                                     seed=args.seed, trials=args.trials)
        _emit(rep.to_dict())
        return EXIT_OK if rep.holds else EXIT_VERDICT
    _emit(res.to_dict())
    return EXIT_VERDICT if res.holds is False else EXIT_OK


def cmd_run(args) -> int:
    params = _kv(args.params or "")
    if args.preset:
        params.setdefault("preset", args.preset)
    host = _host(args.host) if args.host else None
    cfg = ScenarioConfig(args.scenario, args.model, params, args.seed, args.out, host)
    rep = run_scenario(cfg)
    if not args.out:
        _emit(rep.to_dict())
    for v in rep.verdicts:
        if v.get("holds") is False:
            print(f"verdict failed: {v['check']}", file=sys.stderr)
    return EXIT_VERDICT if rep.failed else EXIT_OK


# ---------------------------------------------------------------------------

def _model_args(p, host=True):
    p.add_argument("--model", help="model file (JSON)")
    p.add_argument("--preset", help="hard_core:lam=x | multistate:k=n,lam=x | complete:q=n")
    if host:
        p.add_argument("--host", help="cycle:L | kab:a,b | regular:n,d[,seed] (overrides the file's G)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="homoscope", description="Weighted H-colourings of bipartite graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extremal", help="maximizing pairs and occupancy interval")
    _model_args(p, host=False)
    p.add_argument("--colour", type=int)
    p.add_argument("--eps", default="1/10")
    p.set_defaults(func=cmd_extremal, host=None)

    p = sub.add_parser("exact", help="exact occupancy law of one colour")
    _model_args(p)
    p.add_argument("--colour", type=int, required=True)
    p.add_argument("--dist", help="write the law as CSV")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("mcmc", help="Glauber dynamics estimates")
    _model_args(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--burn", type=int, default=0)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", default="random", help="random | pure:max | pure:A,B (colours joined by '+')")
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--threshold", type=int, help="record the pure class of each sample")
    p.add_argument("--out", help="stats JSON (default: stdout)")
    p.set_defaults(func=cmd_mcmc)

    p = sub.add_parser("verify", help="exact bound checks")
    _model_args(p)
    p.add_argument("--check", required=True, choices=["entropy", "gt", "lb", "kdd-ub", "tilt", "expansion"])
    p.add_argument("--d", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--delta", default="1")
    p.add_argument("--colour", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--C", type=float, default=4.0)
    p.add_argument("--mode", default="exhaustive", choices=["exhaustive", "sampled"])
    p.add_argument("--max-size", type=int)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run a scenario and write a report")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--model")
    p.add_argument("--preset")
    p.add_argument("--host")
    p.add_argument("--params", help="comma-separated key=value; list values separated by ':'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"homoscope: budget exceeded: {exc}", file=sys.stderr)
    except (UsageError, ModelFileError, ScenarioError, EmptyHom, NoValidStart, RetriesExhausted,
            ValueError, OSError) as exc:
        print(f"homoscope: error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
