"""End-to-end scenarios producing JSON/CSV reports and gnuplot data.

``report.json`` and the CSV tables depend only on the configuration and the
seed; wall time goes to a separate ``timing.json`` so reports stay
byte-for-byte reproducible.
"""
from __future__ import annotations

import csv
import json
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import bounds
from .corpus import random_instance
from .exact import (
    BudgetExceeded,
    class_threshold,
    convolve_distributions,
    kab_occupancy_distribution,
    kdd_occupancy_distribution,
    occupancy_distribution,
)
from .extremal import extremal_pairs, occupancy_interval
from .mcmc import ChainConfig, run_chain
from .model import (
    BipartiteHostGraph,
    ConstraintGraph,
    as_fraction,
    load_model,
    make_rng,
    percolate,
    preset_model,
    random_regular_bipartite,
)

SCENARIOS = (
    "extremal_report",
    "exact_occupancy",
    "kdd_sweep",
    "union_kdd",
    "random_regular_demo",
    "percolation_sweep",
    "bound_corpus",
)


class ScenarioError(ValueError):
    """Invalid scenario parameters or an unusable model."""


def _int_list(s: str) -> list[int]:
    return [int(x) for x in str(s).split(":") if x]


def _frac_list(s: str) -> list[Fraction]:
    return [as_fraction(x) for x in str(s).split(":") if x]


def _opt_int(s):
    return None if s in (None, "", "all") else int(s)


_PRESET = {"preset": (str, None), "lam": (as_fraction, None), "k": (int, None), "q": (int, None)}

_MCMC = {"steps": (int, 200_000), "burn": (int, 20_000), "thin": (int, 10)}

SCHEMAS: dict[str, dict] = {
    "extremal_report": {"colour": (_opt_int, None), "eps": (as_fraction, Fraction(1, 10))},
    "exact_occupancy": {"colour": (_opt_int, None), "budget": (int, 10**7)},
    "kdd_sweep": {"ds": (_int_list, [4, 8, 16, 32]), "eps": (as_fraction, Fraction(3, 20)),
                  "colour": (_opt_int, None)},
    "union_kdd": {"d": (int, 8), "m": (int, 10), "colour": (_opt_int, None),
                  "eps": (as_fraction, Fraction(1, 10))},
    "random_regular_demo": {"half_size": (int, 50), "d": (int, 6), "simple": (int, 0),
                            "colour": (_opt_int, None), "threshold": (_opt_int, None),
                            "chains_per_pair": (int, 1), **_MCMC},
    "percolation_sweep": {"n": (int, 8), "half_size": (int, 200), "simple": (int, 0),
                          "colour": (int, 0), "grid": (_frac_list, [Fraction(1, 10), Fraction(3, 10), 1, 3, 10]),
                          "chains": (int, 4), "exact_budget": (int, 10**5), **_MCMC},
    "bound_corpus": {"count": (int, 100), "max_vertices": (int, 8), "max_q": (int, 4)},
}


@dataclass
class ScenarioConfig:
    scenario: str
    model_path: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str | None = None
    host: BipartiteHostGraph | None = None


@dataclass
class ScenarioReport:
    scenario: str
    seed: int
    params: dict
    tables: dict[str, list[dict]] = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def failed(self) -> bool:
        return any(v.get("holds") is False for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "params": self.params,
            "tables": self.tables,
            "verdicts": self.verdicts,
            "notes": self.notes,
            "failed": self.failed,
        }


def parse_params(text: str | None) -> dict[str, str]:
    out: dict[str, str] = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ScenarioError(f"parameter {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def validate_params(scenario: str, raw: dict) -> dict:
    if scenario not in SCHEMAS:
        raise ScenarioError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    schema = {**_PRESET, **SCHEMAS[scenario]}
    unknown = set(raw) - set(schema)
    if unknown:
        raise ScenarioError(f"unknown parameter(s) for {scenario}: {', '.join(sorted(unknown))}")
    out = {}
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                out[key] = conv(raw[key])
            except (ValueError, ZeroDivisionError) as exc:
                raise ScenarioError(f"parameter {key}={raw[key]!r}: {exc}") from None
        else:
            out[key] = default
    for key in ("steps", "chains", "count", "max_vertices", "max_q", "half_size", "n", "d", "m"):
        if key in out and out[key] is not None and out[key] < 1:
            raise ScenarioError(f"parameter {key} must be positive")
    if "burn" in out and not 0 <= out["burn"] < out["steps"]:
        raise ScenarioError("burn must satisfy 0 <= burn < steps")
    if scenario == "kdd_sweep" and (not out["ds"] or min(out["ds"]) < 1):
        raise ScenarioError("ds must list positive integers")
    if "eps" in out and out["eps"] <= 0:
        raise ScenarioError("eps must be positive")
    return out


def _load(config: ScenarioConfig, p: dict):
    if config.model_path:
        return load_model(config.model_path)
    if p["preset"]:
        kw = {k: p[k] for k in ("lam", "k", "q") if p[k] is not None}
        H, lam = preset_model(p["preset"], **kw)
        return H, lam, None
    raise ScenarioError("a model file (--model) or a preset parameter is required")


def _jsonable(p: dict) -> dict:
    return {k: ([str(x) for x in v] if isinstance(v, list) else (str(v) if isinstance(v, Fraction) else v))
            for k, v in p.items() if v is not None}


def _colours(H: ConstraintGraph, k):
    if k is None:
        return list(range(H.q))
    if not 0 <= k < H.q:
        raise ScenarioError(f"colour {k} outside 0..{H.q - 1}")
    return [k]


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def _extremal_report(H, lam, G, p, rep: ScenarioReport, seed):
    r = extremal_pairs(H, lam)
    rep.tables["maximizers"] = [
        {"A": " ".join(map(str, m.colours_A)), "B": " ".join(map(str, m.colours_B)),
         "product": _q(m.product), "provenance": "exact"}
        for m in r.maximizers
    ]
    rows = []
    for k in _colours(H, p["colour"]):
        iv = occupancy_interval(r, k, p["eps"])
        rows.append({
            "colour": k, "a_minus": _q(r.a_minus[k]), "a_plus": _q(r.a_plus[k]),
            "a_minus_float": float(r.a_minus[k]), "a_plus_float": float(r.a_plus[k]),
            "isolated_target": _q(lam[k] / lam.total),
            "forbidden_left": f"[0,{_q(iv.left.hi)})", "forbidden_right": f"({_q(iv.right.lo)},1]",
            "provenance": "exact",
        })
    rep.tables["extremal"] = rows
    rep.notes.append(f"eta = {_q(r.eta)} with {len(r.maximizers)} maximizing pair(s)")


def _is_complete_bipartite(G: BipartiteHostGraph) -> bool:
    return set(G.edges) == {(i, j) for i in range(G.n_E) for j in range(G.n_O)}


def _exact_occupancy(H, lam, G, p, rep, seed):
    if G is None:
        raise ScenarioError("exact_occupancy needs a host graph G in the model file")
    r = extremal_pairs(H, lam)
    summary = []
    for k in _colours(H, p["colour"]):
        try:
            dist = occupancy_distribution(G, H, lam, k, budget=p["budget"])
        except BudgetExceeded as exc:
            raise BudgetExceeded(f"{exc}. Hint: use kdd_sweep for K_dd hosts or the mcmc command") from None
        rep.tables[f"distribution_colour{k}"] = _dist_rows(dist)
        inside = r.a_minus[k] <= dist.mean_fraction <= r.a_plus[k]
        summary.append({
            "colour": k, "mean_fraction": _q(dist.mean_fraction), "mean_float": float(dist.mean_fraction),
            "a_minus": _q(r.a_minus[k]), "a_plus": _q(r.a_plus[k]), "mean_inside": inside,
            "provenance": "exact",
        })
        if _is_complete_bipartite(G):
            other = kab_occupancy_distribution(G.n_E, G.n_O, H, lam, k)
            rep.verdicts.append({"check": f"kab_agreement_colour{k}", "holds": other.mass == dist.mass})
    rep.tables["summary"] = summary
    rep.notes.append(
        "means outside [a-, a+] are expected at small degree; the band is an asymptotic (large d) statement"
    )


def _dist_rows(dist):
    return [
        {"count": j, "probability_num": pr.numerator, "probability_den": pr.denominator,
         "probability_float": float(pr), "provenance": "exact"}
        for j, pr in sorted(dist.mass.items())
    ]


def _kdd_sweep(H, lam, G, p, rep, seed):
    r = extremal_pairs(H, lam)
    eps = p["eps"]
    rows = []
    for k in _colours(H, p["colour"]):
        prev = None
        for d in p["ds"]:
            dist = kdd_occupancy_distribution(d, H, lam, k)
            out = dist.mass_outside(r.a_minus[k] - eps, r.a_plus[k] + eps)
            rows.append({
                "colour": k, "d": d, "mass_outside": _q(out), "mass_outside_float": float(out),
                "mean_fraction": _q(dist.mean_fraction), "mean_float": float(dist.mean_fraction),
                "decreasing": None if prev is None else out < prev, "provenance": "exact",
            })
            prev = out
    rep.tables["kdd_sweep"] = rows
    rep.notes.append("mass outside [a- - eps, a+ + eps] on K_dd; expected to shrink as d grows")


def _union_kdd(H, lam, G, p, rep, seed):
    r = extremal_pairs(H, lam)
    d, m, eps = p["d"], p["m"], p["eps"]
    rows = []
    for k in _colours(H, p["colour"]):
        single = kdd_occupancy_distribution(d, H, lam, k)
        union = convolve_distributions([single] * m)
        a = single.mean_fraction
        rows.append({
            "colour": k, "d": d, "m": m, "a_minus": _q(r.a_minus[k]), "a": _q(a), "a_float": float(a),
            "a_plus": _q(r.a_plus[k]), "union_mean": _q(union.mean_fraction),
            "mass_within_eps": float(1 - union.mass_outside(a - eps, a + eps)),
            "a_inside_band": r.a_minus[k] <= a <= r.a_plus[k], "provenance": "exact",
        })
        rep.verdicts.append({"check": f"union_mean_equals_single_colour{k}", "holds": union.mean_fraction == a})
    rep.tables["union_kdd"] = rows


def _hist_rows(stats, colours, N):
    rows = []
    for j in range(N + 1):
        row = {"count": j, "fraction": j / N}
        for k in colours:
            row[f"p_colour{k}"] = float(stats.histogram[k, j])
        row["provenance"] = "mcmc"
        rows.append(row)
    return rows


def _random_regular_demo(H, lam, G, p, rep, seed):
    n, d = p["half_size"], p["d"]
    if d > n:
        raise ScenarioError("d cannot exceed half_size")
    G = random_regular_bipartite(n, d, seed, require_simple=bool(p["simple"]))
    r = extremal_pairs(H, lam)
    threshold = p["threshold"] or class_threshold(G.N, d)
    chains = len(r.maximizers) * p["chains_per_pair"]
    cfg = ChainConfig(steps=p["steps"], burn_in=p["burn"], thinning=p["thin"], seed=seed,
                      init=tuple(r.maximizers), restarts=chains - 1, class_threshold=threshold)
    stats = run_chain(G, H, lam, cfg)
    colours = _colours(H, p["colour"])
    rep.tables["histogram"] = _hist_rows(stats, colours, G.N)
    rep.tables["pbar"] = [
        {"colour": k, "pbar": stats.pbar_estimate[k], "a_minus": float(r.a_minus[k]),
         "a_plus": float(r.a_plus[k]), "provenance": "mcmc"}
        for k in colours
    ]
    pure = {(m.A, m.B) for m in r.maximizers}
    freq = Counter((c.E_set, c.O_set) for c in stats.class_trace)
    rep.tables["classes"] = [
        {"E_set": " ".join(str(c) for c in range(H.q) if E >> c & 1),
         "O_set": " ".join(str(c) for c in range(H.q) if O >> c & 1),
         "frequency": cnt / stats.samples_used, "maximizer": (E, O) in pure, "provenance": "mcmc"}
        for (E, O), cnt in sorted(freq.items())
    ]
    rep.notes.append(
        f"simple={G.simple}; threshold {threshold}; {chains} chains started from the {len(r.maximizers)} "
        "maximizing pair(s). Desk-scale N: bimodality here is illustrative, not the asymptotic regime."
    )


def _percolation_sweep(H, lam, G, p, rep, seed):
    n, k = p["n"], p["colour"]
    if not 0 <= k < H.q:
        raise ScenarioError(f"colour {k} outside 0..{H.q - 1}")
    if G is not None and G.regular_degree() == n:
        base = G
    else:
        if n > p["half_size"]:
            raise ScenarioError("n cannot exceed half_size")
        base = random_regular_bipartite(p["half_size"], n, seed, require_simple=bool(p["simple"]))
    r = extremal_pairs(H, lam)
    pure = (r.a_minus[k] + r.a_plus[k]) / 2
    iso = lam[k] / lam.total
    rows = []
    for idx, mult in enumerate(p["grid"]):
        prob = min(Fraction(1), Fraction(mult) / n)
        Gp = percolate(base, float(prob), int(make_rng(seed, 1, idx).integers(2**63)))
        try:
            est = float(occupancy_distribution(Gp, H, lam, k, budget=p["exact_budget"]).mean_fraction)
            prov = "exact"
        except BudgetExceeded:
            cfg = ChainConfig(steps=p["steps"], burn_in=p["burn"], thinning=p["thin"],
                              seed=int(make_rng(seed, 2, idx).integers(2**63)), restarts=p["chains"] - 1)
            est = run_chain(Gp, H, lam, cfg).pbar_estimate[k]
            prov = "mcmc"
        rows.append({
            "p_times_n": float(mult), "p": float(prob), "edges": len(Gp.edges), "pbar": est,
            "a_minus": float(r.a_minus[k]), "a_plus": float(r.a_plus[k]), "isolated_target": float(iso),
            "closer_to": "pure" if abs(est - float(pure)) < abs(est - float(iso)) else "isolated",
            "provenance": prov,
        })
    rep.tables["percolation"] = rows
    rep.notes.append(f"colour {k}: pure-regime band [{_q(r.a_minus[k])}, {_q(r.a_plus[k])}], "
                     f"isolated-regime target {_q(iso)}")


def _bound_corpus(H, lam, G, p, rep, seed):
    rng = make_rng(seed, 3)
    rows = []
    for n in range(p["count"]):
        G, H, lam, d = random_instance(rng, p["max_vertices"], p["max_q"])
        checks = [bounds.check_entropy_bound(G, H, lam, d), bounds.eta_lower_bound(G, H, lam)]
        a, b = int(rng.integers(0, 5)), int(rng.integers(1, 5))
        checks.append(bounds.kdd_eta_upper_bound(a, b, H, lam))
        kk = int(rng.integers(H.q))
        j = int(rng.integers(G.N + 1))
        t = bounds.check_tilt_inequality(G, H, lam, kk, Fraction(1, 2), j)
        checks.append(t)
        rep.verdicts.append({"check": f"tilt_identity#{n}", "holds": t.extra["identity"]})
        if G.regular_degree():
            checks.append(bounds.check_gt_bound(G, H, lam))
        for c in checks:
            rows.append({"instance": n, "check": c.name, "applicable": c.applicable, "holds": c.holds,
                         "slack_log2": c.slack if c.applicable else None, "provenance": "exact"})
            if c.applicable:
                rep.verdicts.append({"check": f"{c.name}#{n}", "holds": c.holds})
    rep.tables["corpus"] = rows


_RUNNERS = {
    "extremal_report": _extremal_report,
    "exact_occupancy": _exact_occupancy,
    "kdd_sweep": _kdd_sweep,
    "union_kdd": _union_kdd,
    "random_regular_demo": _random_regular_demo,
    "percolation_sweep": _percolation_sweep,
    "bound_corpus": _bound_corpus,
}


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    raw = config.params if isinstance(config.params, dict) else parse_params(config.params)
    p = validate_params(config.scenario, {k: str(v) for k, v in raw.items()})
    if config.scenario == "bound_corpus" and not (config.model_path or p["preset"]):
        H = lam = G = None
    else:
        H, lam, G = _load(config, p)
        if config.host is not None:
            G = config.host
    rep = ScenarioReport(config.scenario, config.seed, _jsonable(p))
    t0 = time.perf_counter()
    _RUNNERS[config.scenario](H, lam, G, p, rep, config.seed)
    rep.wall_time = time.perf_counter() - t0
    if config.out_dir:
        write_report(rep, config.out_dir)
    return rep


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

_PLOTS = {
    "kdd_sweep": ("kdd_sweep.csv", "d", "mass_outside_float", "logscale x 2"),
    "percolation_sweep": ("percolation.csv", "p_times_n", "pbar", "logscale x"),
    "random_regular_demo": ("histogram.csv", "fraction", None, None),
}


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    cols = list(rows[0])
    for r in rows[1:]:
        cols.extend(c for c in r if c not in cols)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _gnuplot(rep: ScenarioReport) -> str | None:
    plot = _PLOTS.get(rep.scenario)
    if plot is None or not rep.tables:
        return None
    fname, xcol, ycol, extra = plot
    rows = next(iter(t for t in rep.tables.values() if t and xcol in t[0]), None)
    if rows is None:
        return None
    cols = list(rows[0])
    x = cols.index(xcol) + 1
    ys = [cols.index(ycol) + 1] if ycol else [i + 1 for i, c in enumerate(cols) if c.startswith("p_colour")]
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if extra:
        lines.append(f"set {extra}")
    lines.append("set terminal pngcairo size 800,500")
    lines.append(f"set output '{rep.scenario}.png'")
    lines.append("plot " + ", ".join(f"'{fname}' using {x}:{y} with linespoints" for y in ys))
    return "\n".join(lines) + "\n"


def write_report(rep: ScenarioReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    for name, rows in rep.tables.items():
        _write_csv(out / f"{name}.csv", rows)
    script = _gnuplot(rep)
    if script:
        (out / "plot.gp").write_text(script)
    (out / "timing.json").write_text(json.dumps({"wall_time_s": rep.wall_time}) + "\n")
    return out
