"""Command-line entry point and scenario runner.

A scenario is a JSON object::

    {"name": "...", "seed": "12345",
     "channels": {"id2": {"kind": "identity", "params": {"dim": 2}}},
     "constraints": {"quarter": {"variant": "linear", "ops": [...], "alphas": [0.25]}},
     "tasks": [{"name": "cap", "op": "constrained_capacity",
                "args": {"channel": "id2", "constraint": "quarter"},
                "assert": {"expect": 0.811278, "tol": 1e-4}, "sink": "cap.csv"}]}

Exit codes: 0 success, 1 an assertion failed, 2 the file does not parse,
3 the scenario does not validate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import additivity, channels, relent, shor, solvers, spectral, states
from .errors import HolevoLabError
from .io import (
    FormatError,
    decode_channel,
    decode_constraint,
    decode_ensemble,
    decode_matrix,
    decode_state,
    dump_json,
    format_seed,
    parse_seed,
    to_jsonable,
    write_gap_csv,
)

EXIT_OK, EXIT_ASSERT, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3


class ValidationError(HolevoLabError, ValueError):
    """Scenario content does not resolve (unknown names, operations or missing seeds)."""


# ---------------------------------------------------------------------------
# argument resolution
# ---------------------------------------------------------------------------

CHANNEL_KEYS = {"channel", "phi", "psi"}
CONSTRAINT_KEYS = {"constraint"}
STATE_KEYS = {"rho", "varrho", "sigma", "vs", "omega", "rho_av"}
MATRIX_KEYS = {"a", "b", "e", "x", "basis", "mix", "op", "op_b"}
ENSEMBLE_KEYS = {"ensemble", "ens_phi", "ens_psi", "probe", "other"}


@dataclass
class Context:
    channels: dict
    constraints: dict
    opts: solvers.SolverOptions
    seed: int


def _resolve_channel(value, ctx: Context):
    if isinstance(value, str):
        if value not in ctx.channels:
            raise ValidationError(f"unknown channel {value!r}")
        return ctx.channels[value]
    return decode_channel(value)


def _resolve_ensemble(value):
    if isinstance(value, dict) and "random" in value:
        spec = value["random"]
        return states.random_ensemble(int(spec["dim"]), int(spec["n"]), parse_seed(spec["seed"]), spec.get("rank"))
    return decode_ensemble(value)


def resolve_args(raw: dict, ctx: Context) -> dict:
    out = {}
    for key, val in raw.items():
        if key in CHANNEL_KEYS:
            out[key] = _resolve_channel(val, ctx)
        elif key == "channels":
            out[key] = [_resolve_channel(v, ctx) for v in val]
        elif key in CONSTRAINT_KEYS:
            if val is None:
                out[key] = None
            elif isinstance(val, str):
                if val not in ctx.constraints:
                    raise ValidationError(f"unknown constraint {val!r}")
                out[key] = ctx.constraints[val]
            else:
                out[key] = decode_constraint(val)
        elif key in STATE_KEYS:
            out[key] = decode_state(val)
        elif key in MATRIX_KEYS:
            out[key] = decode_matrix(val)
        elif key in ENSEMBLE_KEYS:
            out[key] = _resolve_ensemble(val)
        elif key == "probes":
            out[key] = [decode_state(v) for v in val]
        else:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


@dataclass
class Outcome:
    result: object
    passed: object = None  # None: nothing to judge
    rows: list = None
    value: float = None


def _gap_rows(reports, seed, prefix=""):
    return [dict(instance_id=f"{prefix}{r.name}" if prefix else r.name, seed=format_seed(seed), **r.row())
            for r in reports]


def _gap_outcome(reports, seed, prefix=""):
    reports = list(reports)
    return Outcome(reports, all(r.within_bound for r in reports), _gap_rows(reports, seed, prefix),
                   reports[0].gap if len(reports) == 1 else None)


def _value(x):
    return Outcome(x, None, None, float(x))


def _report(rep):
    return Outcome(rep, rep.converged, None, rep.value)


def _t_entropy(a, ctx):
    return _value(spectral.entropy(a["op"]))


def _t_relative_entropy(a, ctx):
    return _value(spectral.relative_entropy(a["op"], a["op_b"]))


def _t_trace_distance(a, ctx):
    return _value(spectral.trace_distance(a["op"], a["op_b"]))


def _t_partial_trace(a, ctx):
    return Outcome(spectral.partial_trace(a["op"], a["dims"], a.get("keep", 0)))


def _t_average_state(a, ctx):
    return Outcome(states.average_state(a["ensemble"]))


def _t_hjw_ensemble(a, ctx):
    return Outcome(states.hjw_ensemble(a["rho"], int(a["n"]), a["mix"]))


def _t_random_state(a, ctx):
    return Outcome(states.random_state(int(a["dim"]), a.get("rank"), ctx.seed))


def _t_random_ensemble(a, ctx):
    return Outcome(states.random_ensemble(int(a["dim"]), int(a["n"]), ctx.seed, a.get("rank")))


def _t_make_channel(a, ctx):
    ch = a["channel"]
    return Outcome({"channel": ch, "choi": ch.choi(), "trace_preserving": ch.trace_preserving})


def _t_apply(a, ctx):
    out = a["channel"].apply(a["rho"])
    return Outcome({"output": out if isinstance(out, np.ndarray) else [b.op for b in out.blocks],
                    "entropy": channels.output_entropy(out)})


def _t_tensor_channels(a, ctx):
    return Outcome(channels.tensor_channels(a["phi"], a["psi"]))


def _t_direct_sum_mixture(a, ctx):
    mix = channels.direct_sum_mixture(a["channels"], a["probs"])
    res = {"dim_in": mix.dim_in}
    if "rho" in a:
        res["output_entropy"] = channels.output_entropy(mix.apply(a["rho"]))
    if "ensemble" in a:
        res["holevo"] = channels.holevo_quantity(mix, a["ensemble"])
    return Outcome(res)


def _t_holevo_quantity(a, ctx):
    return _value(channels.holevo_quantity(a["channel"], a["ensemble"]))


def _t_donald_residual(a, ctx):
    val = channels.donald_residual(a["channel"], a["ensemble"], a["omega"])
    return Outcome(val, bool(abs(val) < a.get("tol", 1e-8)), None, val)


def _t_psi_sub_a(a, ctx):
    ch = channels.psi_sub_A(a["psi"], a["a"], a.get("dim_h"))
    res = {"channel": ch}
    if "rho" in a:
        res["output"] = ch.apply_matrix(a["rho"])
    return Outcome(res)


def _t_measurement_channel(a, ctx):
    m = channels.measurement_channel(a["basis"], int(a.get("dim_k", 1)))
    post = m.apply(a["sigma"])
    gap = additivity.glo_gap(a["sigma"], m)
    return Outcome({"ensemble": post, "glo_gap": gap}, bool(gap >= -1e-10), None, gap)


def _hat_value(ext, a):
    e = a["ensemble"]
    return _value(shor.lifted_holevo(ext, shor.LiftedEnsemble(e, ext.d)))


def _t_shor_hat(a, ctx):
    return _hat_value(shor.shor_hat(a["phi"], a["e"], a["q"], a["d"]), a)


def _t_shor_hat_dp(a, ctx):
    return _hat_value(shor.shor_hat_dp(a["phi"], a["a"], a["p"], a["d"]), a)


def _t_shor_tilde(a, ctx):
    return _value(shor.shor_tilde(a["phi"], a["e"], a["q"], a["d"]).apply(a["rho"]).entropy())


def _t_shor_tilde_dp(a, ctx):
    return _value(shor.shor_tilde_dp(a["phi"], a["a"], a["p"], a["d"]).apply(a["rho"]).entropy())


def _t_tilde_closed_form(a, ctx):
    return _value(shor.tilde_entropy_closed_form(a["phi"], a["a"], a["p"], a["d"], a["rho"]))


def _t_chi_function(a, ctx):
    return _report(solvers.chi_function(a["channel"], a["rho"], ctx.opts))


def _t_constrained_capacity(a, ctx):
    return _report(solvers.constrained_capacity(a["channel"], a.get("constraint"), ctx.opts))


def _t_min_output_entropy(a, ctx):
    return _report(solvers.min_output_entropy(a["channel"], ctx.opts))


def _t_nu_h(a, ctx):
    return _report(solvers.nu_H(a["channel"], a["a"], ctx.opts))


def _t_conjugate_h(a, ctx):
    return _report(solvers.conjugate_H(a["channel"], a["x"], ctx.opts))


def _t_penalized_capacity(a, ctx):
    return _report(solvers.penalized_capacity(a["channel"], a["a"], a["p"], ctx.opts))


def _cert(c):
    return Outcome(c, c.passed, None, c.worst_violation)


def _t_certify_optimal(a, ctx):
    ens = a.get("ensemble")
    if ens is None:
        ens = solvers.constrained_capacity(a["channel"], a["constraint"], ctx.opts).argopt
    adv = ctx.opts.with_(restarts=int(a.get("adversary_restarts", ctx.opts.restarts)))
    return _cert(solvers.certify_optimal(a["channel"], a["constraint"], ens, a.get("tol", 1e-4), adv))


def _t_kkt_certificate(a, ctx):
    rho_av = a.get("rho_av")
    if rho_av is None:
        rho_av = solvers.constrained_capacity(a["channel"], a["constraint"], ctx.opts).argopt.average()
    return _cert(solvers.kkt_certificate(a["channel"], a["constraint"], rho_av, a.get("tol", 1e-4), ctx.opts))


def _t_capacity_estimate(a, ctx):
    return _value(solvers.capacity_estimate(a["channel"], a["rho_av"], a["rho"], ctx.opts))


def _t_eof(a, ctx):
    return _report(solvers.eof(a["sigma"], a["dims"], ctx.opts))


def _t_wootters_eof(a, ctx):
    return _value(solvers.wootters_eof(a["sigma"]))


def _t_inequality_report(a, ctx):
    reps = additivity.inequality_report(a["phi"], a["psi"], a["sigma"], ctx.opts,
                                        include_product=a.get("include_product", True))
    return _gap_outcome(reps.values(), ctx.seed)


def _t_theorem2_gap(a, ctx):
    return _gap_outcome([additivity.theorem2_gap(a["phi"], a["psi"], a["rho"], a["varrho"], ctx.opts)], ctx.seed)


def _t_corollary7_bound(a, ctx):
    return _gap_outcome([additivity.corollary7_bound(a["phi"], a["psi"], a["rho"], a["varrho"], ctx.opts)], ctx.seed)


def _t_prop3_check(a, ctx):
    g = additivity.prop3_check(a["phi"], a.get("psi"), a["e"], a["q"], a["d"], a.get("constraint"), ctx.opts)
    return _gap_outcome([g], ctx.seed)


def _t_prop3_sweep(a, ctx):
    """Random ``(E, q)`` instances at every register size in ``d_list``."""
    rng = np.random.default_rng(ctx.seed)
    lo, hi = a.get("q_range", (0.05, 0.95))
    reports = []
    for i in range(int(a["n_instances"])):
        e = states.random_positive_contraction(a["phi"].dim_in, rng)
        q = float(rng.uniform(lo, hi))
        for d in a["d_list"]:
            g = additivity.prop3_check(a["phi"], a.get("psi"), e, q, d, a.get("constraint"),
                                       ctx.opts.with_(seed=int(rng.integers(2**63))))
            g.name = f"{i}:d={d}"
            reports.append(g)
    return _gap_outcome(reports, ctx.seed)


def _t_asymp_probe(a, ctx):
    return _gap_outcome(additivity.asymp_probe(a["phi"], a["a"], a["p"], a["d_list"], a.get("psi"), ctx.opts),
                        ctx.seed)


def _t_theorem3_ii_gap(a, ctx):
    return _gap_outcome([additivity.theorem3_ii_gap(a["phi"], a["psi"], a["a"], a["b"], ctx.opts)], ctx.seed)


def _t_tilde_moe_probe(a, ctx):
    reps = additivity.tilde_moe_probe(a["phi"], a["psi"], a["a"], a["p"], a["b"], a["r"], a["d_list"], a["e_list"],
                                      ctx.opts)
    return _gap_outcome(reps, ctx.seed)


def _t_s_c_add_check(a, ctx):
    return _gap_outcome([additivity.s_c_add_check(a["psi"], a["rho"], ctx.opts)], ctx.seed)


def _t_cor6_check(a, ctx):
    return _gap_outcome([additivity.cor6_check(a["sigma"], a.get("dims", (2, 2, 2, 2)), ctx.opts)], ctx.seed)


def _t_relaxation_sequence(a, ctx):
    seq = additivity.relaxation_sequence(a["channel"], a["constraint"], a["m_list"], ctx.opts)
    vals = [seq[m].value for m in a["m_list"]]
    ok = all(x >= y - 1e-6 for x, y in zip(vals, vals[1:])) and vals[-1] >= seq["limit"].value - 1e-6
    return Outcome({str(k): v.value for k, v in seq.items()}, ok)


def _t_prop2_check(a, ctx):
    return _gap_outcome(additivity.prop2_check(a["channel"], a["constraint"], a["probes"], ctx.opts), ctx.seed)


def _t_sample_curves(a, ctx):
    pair = relent.sample_curves(a["sigma"], a["vs"], a.get("grid"))
    return Outcome(pair, pair.convex)


def _t_prop5_suite(a, ctx):
    rep = relent.prop5_suite(a["sigma"], a["vs"], a.get("grid"))
    return Outcome(rep, rep.passed)


def _t_mixture_curve(a, ctx):
    phi, psi = a["phi"], a["psi"]
    ens_phi = a.get("ens_phi") or solvers.chi_function(phi, a["rho"], ctx.opts).argopt
    ens_psi = a.get("ens_psi") or solvers.chi_function(psi, a["varrho"], ctx.opts).argopt
    probe = a.get("probe")
    optimal = bool(a.get("optimal", False))
    if probe is None:
        _, probe, _, _, _ = additivity.fixed_marginals_capacity(phi, psi, ens_phi.average(), ens_psi.average(),
                                                               ctx.opts)
        optimal = True
    rep = relent.mixture_curve(phi, psi, ens_phi, ens_psi, probe, a.get("grid"), optimal)
    return Outcome(rep, rep.passed)


# name -> (handler, stochastic)
TASKS = {
    "entropy": (_t_entropy, False),
    "relative_entropy": (_t_relative_entropy, False),
    "trace_distance": (_t_trace_distance, False),
    "partial_trace": (_t_partial_trace, False),
    "average_state": (_t_average_state, False),
    "hjw_ensemble": (_t_hjw_ensemble, False),
    "random_state": (_t_random_state, True),
    "random_ensemble": (_t_random_ensemble, True),
    "make_channel": (_t_make_channel, False),
    "apply": (_t_apply, False),
    "tensor_channels": (_t_tensor_channels, False),
    "direct_sum_mixture": (_t_direct_sum_mixture, False),
    "holevo_quantity": (_t_holevo_quantity, False),
    "donald_residual": (_t_donald_residual, False),
    "psi_sub_A": (_t_psi_sub_a, False),
    "measurement_channel": (_t_measurement_channel, False),
    "shor_hat": (_t_shor_hat, False),
    "shor_hat_dp": (_t_shor_hat_dp, False),
    "shor_tilde": (_t_shor_tilde, False),
    "shor_tilde_dp": (_t_shor_tilde_dp, False),
    "tilde_entropy_closed_form": (_t_tilde_closed_form, False),
    "chi_function": (_t_chi_function, True),
    "constrained_capacity": (_t_constrained_capacity, True),
    "min_output_entropy": (_t_min_output_entropy, True),
    "nu_H": (_t_nu_h, True),
    "conjugate_H": (_t_conjugate_h, True),
    "penalized_capacity": (_t_penalized_capacity, True),
    "certify_optimal": (_t_certify_optimal, True),
    "kkt_certificate": (_t_kkt_certificate, True),
    "capacity_estimate": (_t_capacity_estimate, True),
    "eof": (_t_eof, True),
    "wootters_eof": (_t_wootters_eof, False),
    "inequality_report": (_t_inequality_report, True),
    "theorem2_gap": (_t_theorem2_gap, True),
    "corollary7_bound": (_t_corollary7_bound, True),
    "prop3_check": (_t_prop3_check, True),
    "prop3_sweep": (_t_prop3_sweep, True),
    "asymp_probe": (_t_asymp_probe, True),
    "theorem3_ii_gap": (_t_theorem3_ii_gap, True),
    "tilde_moe_probe": (_t_tilde_moe_probe, True),
    "s_c_add_check": (_t_s_c_add_check, True),
    "cor6_check": (_t_cor6_check, True),
    "relaxation_sequence": (_t_relaxation_sequence, True),
    "prop2_check": (_t_prop2_check, True),
    "sample_curves": (_t_sample_curves, False),
    "prop5_suite": (_t_prop5_suite, False),
    "mixture_curve": (_t_mixture_curve, True),
}


# ---------------------------------------------------------------------------
# scenario handling
# ---------------------------------------------------------------------------


class ScenarioParseError(Exception):
    pass


def load_scenario(path: str) -> dict:
    """Read a scenario file; a bare name falls back to the bundled scenarios."""
    if not os.path.exists(path):
        bundled = resources.files("holevolab") / "scenarios" / (path if path.endswith(".json") else path + ".json")
        if bundled.is_file():
            path = str(bundled)
        else:
            raise ScenarioParseError(f"no such scenario file: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioParseError(str(exc)) from None
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    for key, kind in (("tasks", list), ("channels", dict), ("constraints", dict)):
        if key in doc and not isinstance(doc[key], kind):
            raise ScenarioParseError(f"'{key}' must be a JSON {kind.__name__}")
    return doc


def _task_seed(doc_seed, index: int, task: dict):
    if "seed" in task:
        return parse_seed(task["seed"])
    if doc_seed is None:
        return None
    return int(np.random.SeedSequence([doc_seed, index]).generate_state(1, np.uint64)[0])


def validate(doc: dict, overrides: dict) -> tuple:
    """Build channels and constraints and check every task; raises :class:`ValidationError`."""
    chans, cons = {}, {}
    for name, spec in doc.get("channels", {}).items():
        try:
            chans[name] = decode_channel(spec)
        except (HolevoLabError, KeyError, ValueError) as exc:
            raise ValidationError(f"channel {name!r}: {exc}") from None
    for name, spec in doc.get("constraints", {}).items():
        try:
            cons[name] = decode_constraint(spec)
        except (HolevoLabError, KeyError, ValueError) as exc:
            raise ValidationError(f"constraint {name!r}: {exc}") from None
    seed = overrides.get("seed", doc.get("seed"))
    seed = parse_seed(seed) if seed is not None else None
    names = set()
    tasks = doc.get("tasks", [])
    for i, task in enumerate(tasks):
        if not isinstance(task, dict) or "op" not in task:
            raise ValidationError(f"task {i} must be an object with an 'op'")
        name = task.get("name", f"task{i}")
        if name in names:
            raise ValidationError(f"duplicate task name {name!r}")
        names.add(name)
        if task["op"] not in TASKS:
            raise ValidationError(f"task {name!r}: unknown operation {task['op']!r}")
        for dep in task.get("depends_on", []):
            if dep not in names:
                raise ValidationError(f"task {name!r} depends on {dep!r}, which is not declared before it")
        if TASKS[task["op"]][1] and _task_seed(seed, i, task) is None:
            raise ValidationError(f"task {name!r} is stochastic and needs a seed")
        ctx = Context(chans, cons, solvers.SolverOptions(), 0)
        try:
            resolve_args(task.get("args", {}), ctx)
        except (HolevoLabError, KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"task {name!r}: {exc}") from None
    return chans, cons, seed


def _options(doc: dict, overrides: dict, seed) -> solvers.SolverOptions:
    base = dict(doc.get("options", {}))
    base.update({k: v for k, v in overrides.items() if k in ("restarts", "tol", "max_iters") and v is not None})
    base["seed"] = seed if seed is not None else 0
    return solvers.SolverOptions(**{k: base[k] for k in ("restarts", "tol", "max_iters", "seed") if k in base})


def _judge(task: dict, out: Outcome):
    spec = task.get("assert")
    if spec is None or spec is False:
        return None
    if isinstance(spec, dict):
        if out.value is None:
            return False
        return bool(abs(out.value - float(spec["expect"])) <= float(spec.get("tol", 1e-6)))
    return bool(out.passed) if out.passed is not None else True


def execute_task(doc: dict, index: int, overrides: dict) -> dict:
    """Run one task; returns a JSON-ready summary entry plus CSV rows. Used directly and by worker processes."""
    chans, cons, seed = validate(doc, overrides)
    task = doc["tasks"][index]
    tseed = _task_seed(seed, index, task)
    opts = _options(doc, overrides, tseed)
    ctx = Context(chans, cons, opts, tseed if tseed is not None else 0)
    handler = TASKS[task["op"]][0]
    out = handler(resolve_args(task.get("args", {}), ctx), ctx)
    verdict = _judge(task, out)
    entry = {
        "name": task.get("name", f"task{index}"),
        "op": task["op"],
        "seed": format_seed(tseed) if tseed is not None else None,
        "asserted": task.get("assert") not in (None, False),
        "passed": verdict,
        "value": out.value,
        "result": to_jsonable(out.result),
    }
    return {"entry": entry, "rows": out.rows, "sink": task.get("sink"), "curves": _curve_rows(out.result)}


def _curve_rows(result):
    return result if isinstance(result, relent.CurvePair) else None


def _waves(tasks: list) -> list:
    """Group task indices so each wave only depends on earlier waves."""
    level = {}
    for i, t in enumerate(tasks):
        name = t.get("name", f"task{i}")
        level[name] = 1 + max([level[d] for d in t.get("depends_on", [])], default=-1)
    out = {}
    for i, t in enumerate(tasks):
        out.setdefault(level[t.get("name", f"task{i}")], []).append(i)
    return [out[k] for k in sorted(out)]


def run_scenario(path: str, out_dir: str = ".", jobs: int = 1, echo=print, **overrides) -> int:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        doc = load_scenario(path)
    except ScenarioParseError as exc:
        _err(f"parse error: {exc}")
        return EXIT_PARSE
    try:
        _, _, seed = validate(doc, overrides)
    except (ValidationError, FormatError, HolevoLabError) as exc:
        _err(f"validation error: {exc}")
        return EXIT_INVALID
    tasks = doc.get("tasks", [])
    results = [None] * len(tasks)
    try:
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for wave in _waves(tasks):
                    futs = {i: pool.submit(execute_task, doc, i, overrides) for i in wave}
                    for i, f in futs.items():
                        results[i] = f.result()
        else:
            for i in range(len(tasks)):
                results[i] = execute_task(doc, i, overrides)
    except HolevoLabError as exc:
        _err(f"validation error: {exc}")
        return EXIT_INVALID

    os.makedirs(out_dir, exist_ok=True)
    for res in results:
        if res["sink"]:
            target = os.path.join(out_dir, res["sink"])
            if res["curves"] is not None:
                relent.write_curves_csv(res["curves"], target)
            else:
                write_gap_csv(res["rows"] or [], target)
    entries = [r["entry"] for r in results]
    failed = [e["name"] for e in entries if e["asserted"] and not e["passed"]]
    summary = {
        "scenario": doc.get("name", os.path.basename(path)),
        "seed": format_seed(seed) if seed is not None else None,
        "passed": not failed,
        "failed": failed,
        "tasks": entries,
    }
    dump_json(summary, os.path.join(out_dir, "summary.json"))
    if echo:
        for e in entries:
            mark = "-" if not e["asserted"] else ("PASS" if e["passed"] else "FAIL")
            echo(f"[{mark}] {e['name']} ({e['op']})" + (f" value={e['value']!r}" if e["value"] is not None else ""))
    return EXIT_OK if not failed else EXIT_ASSERT


def _err(msg):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holevolab", description="Constrained Holevo capacity and additivity lab.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file (or the name of a bundled scenario)")
    r.add_argument("scenario")
    r.add_argument("--seed", type=str, default=None, help="overrides the scenario seed (decimal)")
    r.add_argument("--tol", type=float, default=None, help="solver stopping tolerance")
    r.add_argument("--restarts", type=int, default=None, help="solver restarts")
    r.add_argument("--max-iters", type=int, default=None, dest="max_iters")
    r.add_argument("--out-dir", default=".", dest="out_dir")
    r.add_argument("--jobs", type=int, default=1, help="tasks run in parallel")
    s = sub.add_parser("selftest", help="built-in invariants (quick) or the acceptance suite (full)")
    s.add_argument("level", choices=("quick", "full"))
    sub.add_parser("ops", help="list task operation names")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            seed = parse_seed(args.seed) if args.seed is not None else None
        except FormatError as exc:
            print(f"validation error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        return run_scenario(args.scenario, args.out_dir, max(1, args.jobs), seed=seed, tol=args.tol,
                            restarts=args.restarts, max_iters=args.max_iters)
    if args.command == "selftest":
        from .selftest import run

        return run(args.level)
    for name in sorted(TASKS):
        print(name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
