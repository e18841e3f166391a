"""opcap command line: bound reports, check suites, sweeps, irreps and single optimizer runs."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds as bd
from .channels import (
    ChannelError,
    apply,
    apply_extended,
    choi,
    clifford_spec,
    crossed_product_spec,
    depolarizing_weights,
    direct_vn_apply,
    group_random_unitary_spec,
    group_schur_spec,
    nonunital_spec,
    pauli_spec,
    stinespring_isometry,
    uniform,
    vn_channel,
)
from .channels.symbols import SymbolError, from_weights, parse_symbol
from .channels.vn import build_B_and_check, largest_block_input
from .groups import GroupError, irrep_dimensions, parse_group
from .infomeasures import (
    KINDS,
    OptimizerConfig,
    channel_information,
    choi_vv_norm,
    comparison_probe,
    cqe_shift,
    cqe_triple,
    maximize_information,
)
from .matcore import INF, RandomSource, partial_trace, random_density, random_pure_bipartite

DEFAULT_SEED = 0x50434150  # "PCAP"
FAMILIES = ("group-schur", "group-random-unitary", "pauli", "clifford", "crossed-local",
            "crossed-charge", "nonunital", "dephasing", "depolarizing")
SUITES = ("kraus", "conditions", "comparison", "lemma-mu", "cbentropy", "choi-norm", "cqe")
LN2 = float(np.log(2))


class ConfigError(ValueError):
    pass


def fmt(x):
    if x is None:
        return "-"
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return float(f"{v:.12g}") if np.isfinite(v) else str(v)
    return x


# configuration


DEFAULTS = {
    "family": None, "group": "S3", "dim": 2, "k": 1, "f": "uniform", "q": 0.5,
    "p": [2.0], "trials": 50, "restarts": 20, "max_iter": 500, "numerics": False,
    "output": None, "kind": "coherent", "steps": 101, "d": 5, "ln_dm": None, "m": 16,
    "ensembles": 20,
}


def _parse_p(text):
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    return float(t)


def resolve(args):
    """Merge defaults, the optional JSON config file and explicit flags (flags win)."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS) - {"seed", "bits", "json"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    env = os.environ.get("OPCAP_SEED")
    try:
        seed = int(env, 0) if env else DEFAULT_SEED
        if "seed" in cfg:
            seed = int(cfg["seed"])
    except ValueError:
        raise ConfigError("seed must be an integer")
    cfg["seed"] = seed
    for k, v in vars(args).items():
        if v is not None and k not in ("command", "config", "suite", "sweep_kind"):
            cfg[k] = v
    cfg.setdefault("bits", False)
    cfg.setdefault("json", False)
    ps = cfg["p"] if isinstance(cfg["p"], list) else [cfg["p"]]
    try:
        cfg["p"] = [_parse_p(x) for x in ps]
    except ValueError:
        raise ConfigError("p values must be numbers or 'inf'")
    return cfg


def _symbol_data(text):
    t = str(text).strip()
    if t.startswith("["):
        try:
            return np.asarray(json.loads(t), dtype=float)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad symbol data: {exc}")
    return t


def build_instance(cfg):
    """(VNChannelSpec, SymbolDensity) for the configured family."""
    fam = cfg["family"]
    if fam is None:
        raise ConfigError("--family is required")
    if fam not in FAMILIES:
        raise ConfigError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")
    try:
        if fam == "dephasing":
            # a qubit Pauli channel with weight on I and Z only
            q = float(cfg["q"])
            if not 0 <= q <= 1:
                raise ConfigError("q must lie in [0, 1]")
            spec = pauli_spec(2)
            w = np.zeros(4)
            w[0], w[1] = 4 * (1 + q) / 2, 4 * (1 - q) / 2
            return spec, from_weights(spec.symbol, w)
        if fam == "depolarizing":
            q, d = float(cfg["q"]), int(cfg["dim"])
            if not 0 <= q <= 1 or d < 2:
                raise ConfigError("depolarizing needs q in [0, 1] and dim >= 2")
            spec = pauli_spec(d)
            return spec, from_weights(spec.symbol, depolarizing_weights(d, q))
        if int(cfg["dim"]) < 1 or int(cfg["k"]) < 1:
            raise ConfigError("dim and k must be positive")
        if fam == "pauli":
            spec = pauli_spec(int(cfg["dim"]))
        elif fam == "clifford":
            spec = clifford_spec(2 * int(cfg["k"]))
        else:
            g = parse_group(str(cfg["group"]))
            spec = {
                "group-schur": group_schur_spec,
                "group-random-unitary": group_random_unitary_spec,
                "nonunital": nonunital_spec,
                "crossed-local": lambda g: crossed_product_spec(g, "local"),
                "crossed-charge": lambda g: crossed_product_spec(g, "charge"),
            }[fam](g)
        data = _symbol_data(cfg["f"])
        if isinstance(data, np.ndarray) and spec.symbol.kind == "diagonal":
            data = data.reshape(-1)
        return spec, parse_symbol(spec.symbol, data)
    except (GroupError, SymbolError, ChannelError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc))


def optimizer_config(cfg):
    try:
        return OptimizerConfig(restarts=int(cfg["restarts"]), max_iter=int(cfg["max_iter"]), seed=int(cfg["seed"]))
    except ValueError as exc:
        raise ConfigError(str(exc))


def describe(spec):
    extra = ",".join(f"{k}={v}" for k, v in sorted(spec.params.items()))
    return f"{spec.family}({extra})"


# check suites, each returning (passed, worst slack, detail)


def suite_kraus(spec, f, cfg, rng):
    th = vn_channel(spec, f)
    m = spec.m
    tp = float(np.abs(sum(k.conj().T @ k for k in th.kraus) - np.eye(m)).max())
    v = stinespring_isometry(spec, f)
    iso = float(np.abs(v.conj().T @ v - np.eye(m)).max())
    direct = dil = 0.0
    for _ in range(3):
        rho = random_density(m, rng)
        out = apply(th, rho)
        direct = max(direct, float(np.abs(out - direct_vn_apply(spec, f, rho)).max()))
        red = partial_trace(v @ rho @ v.conj().T, [m, v.shape[0] // m], [0])
        dil = max(dil, float(np.abs(out - red).max()))
    worst = max(tp, iso, direct, dil)
    return worst <= 1e-9, worst, {"tp": tp, "isometry": iso, "direct": direct, "dilation": dil}


def suite_conditions(spec, f, cfg, rng):
    rep = build_B_and_check(spec)
    worst = max(rep.bb_star_error, rep.b_star_b_deviation, rep.unitary_error)
    return worst <= 1e-10, worst, {"mu": rep.mu, "c3prime": rep.c3prime_holds, "amplified": rep.amplified}


def suite_comparison(spec, f, cfg, rng):
    worst, detail = np.inf, {}
    for p in cfg["p"]:
        lo, up = comparison_probe(spec, f, p, int(cfg["trials"]), rng.child(int(1000 * min(p, 99))))
        detail[f"p={fmt(p)}"] = [lo, up]
        worst = min(worst, lo, up)
    return worst >= -1e-9, worst, detail


def suite_expectation_absorbs(spec, f, cfg, rng):
    th1 = vn_channel(spec, uniform(spec.symbol))
    thf = vn_channel(spec, f)
    c1 = choi(th1)
    e1 = float(np.abs(c1 - spec.expectation_choi()).max())
    e2 = float(np.abs(apply_extended(th1, choi(thf), spec.m) - c1).max())
    worst = max(e1, e2)
    return worst <= 1e-10, worst, {"theta1_vs_EM": e1, "theta1_thetaf_vs_theta1": e2}


def suite_cbentropy(spec, f, cfg, rng):
    rep = build_B_and_check(spec)
    th = vn_channel(spec, f)
    scb = float(np.log(rep.mu)) + f.tau_flnf()
    res = maximize_information(th, "reverse", optimizer_config(cfg))
    at_mm = channel_information(th, np.eye(spec.m) / spec.m, "reverse")
    d1, d2 = abs(res.value - scb), abs(at_mm - scb)
    return d1 <= 1e-4 and d2 <= 1e-6, max(d1, d2), {"numeric": res.value, "formula": scb, "maximally_mixed": at_mm}


def suite_choi_norm(spec, f, cfg, rng):
    rep = build_B_and_check(spec)
    chi = choi(vn_channel(spec, f))
    worst, detail = 0.0, {}
    for p in sorted({1.0, 2.0, INF} | set(cfg["p"])):
        num = choi_vv_norm(chi, spec.m, p, OptimizerConfig(restarts=4, seed=int(cfg["seed"])))
        expo = 1.0 if p == INF else 1.0 - 1.0 / p
        formula = rep.mu ** expo * f.norm(p)
        detail[f"p={fmt(p)}"] = [num, formula]
        worst = max(worst, abs(num - formula))
    return worst <= 1e-3, worst, detail


def suite_cqe(spec, f, cfg, rng):
    th = vn_channel(spec, f)
    th1 = vn_channel(spec, uniform(spec.symbol))
    t = f.tau_flnf()
    m = spec.m
    worst = -np.inf
    for e in range(int(cfg["ensembles"])):
        r = rng.child(e)
        probs = r.gen.dirichlet(np.ones(3))
        ens = [(float(p), random_pure_bipartite(m, m, r)) for p in probs]
        worst = max(worst, float(cqe_shift(cqe_triple(th, ens), cqe_triple(th1, ens), t).max()))
    return worst <= 1e-9, worst, {"max_cone_coordinate": worst}


SUITE_FUNCS = {
    "kraus": suite_kraus, "conditions": suite_conditions, "comparison": suite_comparison,
    "lemma-mu": suite_expectation_absorbs, "cbentropy": suite_cbentropy, "choi-norm": suite_choi_norm, "cqe": suite_cqe,
}

# the shipped default instances for `check all` without --family
DEFAULT_SUITE = (
    {"family": "group-random-unitary", "group": "S3", "f": "random:1"},
    {"family": "group-schur", "group": "Z4", "f": "random:2"},
    {"family": "pauli", "dim": 2, "f": "random:3"},
    {"family": "clifford", "k": 1, "f": "random:4"},
    {"family": "crossed-local", "group": "Z3", "f": "random:5"},
    {"family": "crossed-charge", "group": "Z3", "f": "random:6"},
    {"family": "nonunital", "group": "S3", "f": "random:7"},
)


def cmd_check(cfg, out):
    suites = SUITES if cfg["suite"] == "all" else (cfg["suite"],)
    instances = [dict(cfg, **inst) for inst in DEFAULT_SUITE] if cfg["family"] is None else [cfg]
    if cfg["family"] is None and cfg["suite"] != "all":
        raise ConfigError("--family is required for a single suite")
    results, ok = [], True
    for inst in instances:
        spec, f = build_instance(inst)
        for name in suites:
            rng = RandomSource(int(cfg["seed"])).child(SUITES.index(name))
            passed, worst, detail = SUITE_FUNCS[name](spec, f, inst, rng)
            ok &= bool(passed)
            results.append({"suite": name, "instance": describe(spec), "pass": bool(passed),
                            "worst": worst, "detail": detail})
    if cfg["json"]:
        out.write(json.dumps(_jsonable(results), indent=2, sort_keys=True) + "\n")
    else:
        for r in results:
            out.write(f"{'PASS' if r['pass'] else 'FAIL'}  {r['suite']:<11} {r['instance']:<40} worst={fmt(r['worst'])}\n")
    return 0 if ok else 1


ENTROPIC = ("tau_flnf", "ln_dM", "omega_entropy", "scb_formula", "hashing_lower", "q1_lower", "q_upper",
            "qea_upper", "q_upper_min", "cea_lower", "cea_upper")


def cmd_bounds(cfg, out):
    spec, f = build_instance(cfg)
    rep = bd.bounds_report(spec, f, bool(cfg["numerics"]), optimizer_config(cfg))
    d = rep.as_dict()
    unit = LN2 if cfg["bits"] else 1.0
    for k in ENTROPIC:
        if d[k] is not None:
            d[k] = d[k] / unit
    d["numerics"] = {k: v / unit for k, v in d["numerics"].items()}
    d["deltas"] = {k: v / unit for k, v in d["deltas"].items()}
    d["instance"] = describe(spec)
    d["units"] = "bits" if cfg["bits"] else "nats"
    d["ordering_violations"] = rep.ordering_violations()
    d["bracket_violations"] = rep.bracket_violations()
    if cfg["json"]:
        out.write(json.dumps(_jsonable(d), indent=2, sort_keys=True) + "\n")
    else:
        rows = [("instance", d["instance"]), ("units", d["units"])]
        rows += [(k, d[k]) for k in ("m", "dim_n", "mu", "unital") + ENTROPIC]
        rows += [(f"cond.{k}", v) for k, v in d["conditions"].items()]
        rows += [(f"numeric.{k}", v) for k, v in d["numerics"].items()]
        rows += [(f"delta.{k}", v) for k, v in d["deltas"].items()]
        rows += [("note", n) for n in d["notes"]]
        rows += [("VIOLATION", n) for n in d["ordering_violations"] + d["bracket_violations"]]
        for k, v in rows:
            out.write(f"{k:<28}{fmt(v)}\n")
    bad = rep.ordering_violations() or rep.bracket_violations()
    return 1 if bad else 0


def cmd_sweep(cfg, out):
    kind, steps = cfg["sweep_kind"], int(cfg["steps"])
    if steps < 1:
        raise ConfigError("steps must be positive")
    if kind == "figure1":
        m = int(cfg["m"])
        ln_dm = float(cfg["ln_dm"]) if cfg["ln_dm"] is not None else 0.25 * np.log(m)
        table = bd.figure1(ln_dm, m, np.linspace(0.0, np.log(m), steps))
    elif kind == "figure2":
        d = int(cfg["d"])
        if d < 2:
            raise ConfigError("d must be at least 2")
        table = bd.figure2(d, bd.figure2_grid(d, steps))
    elif kind == "dephasing":
        table = bd.dephasing_sweep(np.linspace(0.0, 1.0, steps))
    else:
        spec, f = build_instance(cfg)
        table = bd.family_sweep(spec, f, np.linspace(0.0, 1.0, steps))
    if cfg["bits"]:
        table.columns = {k: v / LN2 for k, v in table.columns.items()}
        if table.param == "t":
            table.grid = table.grid / LN2
    text = table.to_csv()
    if cfg["output"]:
        with open(cfg["output"], "w") as fh:
            fh.write(text)
        out.write(f"wrote {len(table.grid)} rows to {cfg['output']}\n")
    else:
        out.write(text)
    return 0


def cmd_irreps(cfg, out):
    try:
        g = parse_group(str(cfg["group"]))
    except (GroupError, ValueError) as exc:
        raise ConfigError(str(exc))
    prof = irrep_dimensions(g, RandomSource(int(cfg["seed"])))
    d = {"group": g.name, "order": g.order, "dims": list(prof.dims), "d_max": prof.d_max,
         "burnside": prof.burnside_ok(g.order)}
    if cfg["json"]:
        out.write(json.dumps(_jsonable(d), sort_keys=True) + "\n")
    else:
        out.write(f"group {g.name} order {g.order}\ndims {' '.join(map(str, prof.dims))}\n"
                  f"d_max {prof.d_max}\nburnside {prof.burnside_ok(g.order)}\n")
    return 0 if prof.burnside_ok(g.order) else 1


def cmd_optimize(cfg, out):
    kind = cfg["kind"]
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}")
    spec, f = build_instance(cfg)
    th = vn_channel(spec, f)
    res = maximize_information(th, kind, optimizer_config(cfg), starts=(largest_block_input(spec),))
    unit = LN2 if cfg["bits"] else 1.0
    if cfg["json"]:
        d = {"instance": describe(spec), "kind": kind, "value": res.value / unit, "converged": res.converged,
             "restarts": [{"start": lab, "value": v / unit} for lab, v in zip(res.labels, res.restart_values)]}
        out.write(json.dumps(_jsonable(d), indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"instance {describe(spec)}\nkind {kind}\n")
        out.write(f"{'restart':<8}{'start':<18}value\n")
        for i, (lab, v) in enumerate(zip(res.labels, res.restart_values)):
            out.write(f"{i:<8}{lab:<18}{fmt(v / unit)}\n")
        out.write(f"best {fmt(res.value / unit)} (restart {res.best_index})\nconverged {res.converged}\n")
    return 0 if res.converged else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with defaults for any flag")
    common.add_argument("--seed", type=lambda s: int(s, 0))
    common.add_argument("--json", action="store_true", default=None)
    common.add_argument("--bits", action="store_true", default=None)
    common.add_argument("-o", "--output")

    inst = argparse.ArgumentParser(add_help=False)
    inst.add_argument("--family", choices=FAMILIES)
    inst.add_argument("--group", help="Z6, D8, S3, Q8, SD2,3 or cayley:PATH")
    inst.add_argument("--dim", type=int)
    inst.add_argument("--k", type=int, help="Clifford modes (2k generators)")
    inst.add_argument("--f", help="uniform | point | random:SEED | JSON array")
    inst.add_argument("--q", type=float)
    inst.add_argument("--restarts", type=int)
    inst.add_argument("--max-iter", dest="max_iter", type=int)

    ap = argparse.ArgumentParser(prog="opcap", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    b = sub.add_parser("bounds", parents=[common, inst])
    b.add_argument("--numerics", action="store_true", default=None)
    c = sub.add_parser("check", parents=[common, inst])
    c.add_argument("suite", choices=SUITES + ("all",))
    c.add_argument("--p", nargs="+")
    c.add_argument("--trials", type=int)
    c.add_argument("--ensembles", type=int)
    s = sub.add_parser("sweep", parents=[common, inst])
    s.add_argument("sweep_kind", choices=("figure1", "figure2", "dephasing", "family"))
    s.add_argument("--steps", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--ln-dm", dest="ln_dm", type=float)
    i = sub.add_parser("irreps", parents=[common])
    i.add_argument("--group")
    o = sub.add_parser("optimize", parents=[common, inst])
    o.add_argument("--kind", choices=KINDS)
    return ap


COMMANDS = {"bounds": cmd_bounds, "check": cmd_check, "sweep": cmd_sweep, "irreps": cmd_irreps,
            "optimize": cmd_optimize}


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        cfg["suite"] = getattr(args, "suite", None)
        cfg["sweep_kind"] = getattr(args, "sweep_kind", None)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"opcap: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
