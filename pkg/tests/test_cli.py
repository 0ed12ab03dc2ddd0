import csv
import json

import numpy as np
import pytest

from holevolab import cli
from holevolab.io import encode_matrix

# every operation of the library surface must be reachable from a task name
LIBRARY_OPERATIONS = [
    "entropy", "relative_entropy", "trace_distance", "partial_trace", "average_state", "hjw_ensemble",
    "random_state", "random_ensemble", "make_channel", "apply", "tensor_channels", "direct_sum_mixture",
    "holevo_quantity", "donald_residual", "psi_sub_A", "measurement_channel", "shor_hat", "shor_hat_dp",
    "shor_tilde", "shor_tilde_dp", "tilde_entropy_closed_form", "chi_function", "constrained_capacity",
    "min_output_entropy", "nu_H", "conjugate_H", "penalized_capacity", "certify_optimal", "kkt_certificate",
    "eof", "inequality_report", "theorem2_gap", "corollary7_bound", "prop3_check", "asymp_probe",
    "theorem3_ii_gap", "tilde_moe_probe", "sample_curves", "prop5_suite", "mixture_curve",
]

HALF = [[0.5, 0.0], [0.0, 0.5]]
RHO = [[0.7, 0.2], [0.2, 0.3]]
VR = [[0.4, 0.1], [0.1, 0.6]]
A = [[0.3, 0.0], [0.0, 0.8]]
P0 = [[1.0, 0.0], [0.0, 0.0]]
BELL = encode_matrix(np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2)
ENS = {"items": [{"p": 0.5, "state": P0}, {"p": 0.5, "state": [[0.0, 0.0], [0.0, 1.0]]}]}


def _write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _run(path, out, *extra):
    return cli.main(["run", path, "--out-dir", str(out), *extra])


def all_ops_scenario():
    t = [
        ("entropy", {"op": HALF}, {"expect": 1.0, "tol": 1e-12}),
        ("relative_entropy", {"op": P0, "op_b": HALF}, {"expect": 1.0, "tol": 1e-12}),
        ("trace_distance", {"op": P0, "op_b": [[0.0, 0.0], [0.0, 1.0]]}, {"expect": 2.0, "tol": 1e-12}),
        ("partial_trace", {"op": BELL, "dims": [2, 2], "keep": 0}, None),
        ("average_state", {"ensemble": ENS}, None),
        ("hjw_ensemble", {"rho": RHO, "n": 3, "mix": encode_matrix(np.eye(3)[:, :2])}, None),
        ("random_state", {"dim": 3, "rank": 2}, None),
        ("random_ensemble", {"dim": 2, "n": 3}, None),
        ("make_channel", {"channel": "ad"}, None),
        ("apply", {"channel": "mix", "rho": HALF}, None),
        ("tensor_channels", {"phi": "id", "psi": "ad"}, None),
        ("direct_sum_mixture", {"channels": ["id", "id"], "probs": [0.5, 0.5], "rho": HALF}, None),
        ("holevo_quantity", {"channel": "id", "ensemble": ENS}, {"expect": 1.0, "tol": 1e-12}),
        ("donald_residual", {"channel": "ad", "ensemble": ENS, "omega": RHO}, True),
        ("psi_sub_A", {"psi": "ad", "a": A, "rho": BELL}, None),
        ("measurement_channel", {"basis": encode_matrix(np.eye(2)), "dim_k": 2, "sigma": BELL}, True),
        ("shor_hat", {"phi": "ad", "e": A, "q": 0.3, "d": 4, "ensemble": ENS}, None),
        ("shor_hat_dp", {"phi": "ad", "a": A, "p": 1.0, "d": "2^30", "ensemble": ENS}, None),
        ("shor_tilde", {"phi": "id", "e": [[1, 0], [0, 1]], "q": 1.0, "d": 2, "rho": RHO},
         {"expect": 1.0, "tol": 1e-12}),
        ("shor_tilde_dp", {"phi": "ad", "a": A, "p": 0.5, "d": 8, "rho": RHO}, None),
        ("tilde_entropy_closed_form", {"phi": "ad", "a": A, "p": 0.5, "d": 8, "rho": RHO}, None),
        ("chi_function", {"channel": "id", "rho": HALF}, {"expect": 1.0, "tol": 1e-6}),
        ("constrained_capacity", {"channel": "id", "constraint": "quarter"}, {"expect": 0.811278, "tol": 1e-4}),
        ("min_output_entropy", {"channel": "id"}, {"expect": 0.0, "tol": 1e-6}),
        ("nu_H", {"channel": "id", "a": [[0.2, 0], [0, 0.7]]}, {"expect": 0.2, "tol": 1e-6}),
        ("conjugate_H", {"channel": "id", "x": [[1, 0], [0, 3]]}, {"expect": 3.0, "tol": 1e-6}),
        ("penalized_capacity", {"channel": "id", "a": P0, "p": 1.0}, {"expect": 1.584963, "tol": 1e-4}),
        ("certify_optimal", {"channel": "id", "constraint": "full", "ensemble": ENS}, True),
        ("kkt_certificate", {"channel": "id", "constraint": "quarter", "rho_av": [[0.25, 0], [0, 0.75]]}, True),
        ("capacity_estimate", {"channel": "ad", "rho_av": HALF, "rho": RHO}, None),
        ("eof", {"sigma": BELL, "dims": [2, 2]}, {"expect": 1.0, "tol": 1e-6}),
        ("wootters_eof", {"sigma": BELL}, {"expect": 1.0, "tol": 1e-9}),
        ("inequality_report", {"phi": "cq", "psi": "ad", "sigma": {"random": {"dim": 4, "seed": "3"}}}, True),
        ("theorem2_gap", {"phi": "cq", "psi": "id", "rho": RHO, "varrho": VR}, True),
        ("corollary7_bound", {"phi": "ad", "psi": "id", "rho": RHO, "varrho": VR}, True),
        ("prop3_check", {"phi": "ad", "psi": "dep", "e": A, "q": 0.25, "d": 8}, True),
        ("prop3_sweep", {"phi": "ad", "n_instances": 1, "d_list": [2, 4]}, True),
        ("asymp_probe", {"phi": "id", "a": [[1, 0], [0, 1]], "p": 1.0, "d_list": [2, 16, "2^30"]}, True),
        ("theorem3_ii_gap", {"phi": "cq", "psi": "ad", "a": A, "b": RHO}, True),
        ("tilde_moe_probe", {"phi": "id", "psi": "ad", "a": A, "p": 0.5, "b": A, "r": 0.5,
                             "d_list": [4], "e_list": ["2^30"]}, True),
        ("s_c_add_check", {"psi": "ad", "rho": RHO}, True),
        ("cor6_check", {"sigma": encode_matrix(np.kron(np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2, np.eye(4) / 4))},
         True),
        ("relaxation_sequence", {"channel": "id", "constraint": "quarter", "m_list": [2, 10]}, True),
        ("prop2_check", {"channel": "ad", "constraint": "quarter", "probes": [[[0.2, 0], [0, 0.8]]]}, True),
        ("sample_curves", {"sigma": RHO, "vs": HALF}, True),
        ("prop5_suite", {"sigma": RHO, "vs": VR}, True),
        ("mixture_curve", {"phi": "ad", "psi": "dep", "rho": RHO, "varrho": VR}, True),
    ]
    tasks = []
    for op, args, check in t:
        task = {"name": op, "op": op, "args": args}
        if check is not None:
            task["assert"] = check
        tasks.append(task)
    by_name = {t["name"]: t for t in tasks}
    by_name["sample_curves"]["sink"] = "curves.csv"
    by_name["asymp_probe"]["sink"] = "asymp.csv"
    return {
        "name": "all_ops",
        "seed": "42",
        "options": {"restarts": 2},
        "channels": {
            "id": {"kind": "identity", "params": {"dim": 2}},
            "ad": {"kind": "amplitude_damping", "params": {"gamma": 0.3}},
            "dep": {"kind": "depolarizing", "params": {"p": 0.2}},
            "cq": {"kind": "cq_measure_prepare", "params": {"povm": [P0, [[0, 0], [0, 1]]],
                                                             "states": [P0, HALF]}},
            "mix": {"kind": "kraus", "dim_in": 2, "dim_out": 2,
                    "kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]},
        },
        "constraints": {
            "quarter": {"variant": "linear", "ops": [P0], "alphas": [0.25]},
            "full": {"variant": "full", "dim": 2},
        },
        "tasks": tasks,
    }


def test_task_registry_covers_library():
    missing = [op for op in LIBRARY_OPERATIONS if op not in cli.TASKS]
    assert not missing


def test_all_operations_run(tmp_path, capsys):
    doc = all_ops_scenario()
    code = _run(_write(tmp_path, doc), tmp_path / "out")
    printed = capsys.readouterr().out
    assert code == 0, printed
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["passed"] and len(summary["tasks"]) == len(doc["tasks"])
    ops_run = {t["op"] for t in summary["tasks"]}
    assert set(LIBRARY_OPERATIONS) <= ops_run
    rows = list(csv.reader(open(tmp_path / "out" / "curves.csv")))
    assert rows[0] == ["x", "f", "g", "bound"]
    rows = list(csv.DictReader(open(tmp_path / "out" / "asymp.csv")))
    assert [r["instance_id"] for r in rows] == ["asymp_d=2", "asymp_d=16", "asymp_d=1073741824"]


def test_bundled_scenario(tmp_path):
    assert cli.main(["run", "prop3_qubit", "--out-dir", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "prop3_qubit.csv")))
    assert list(rows[0]) == ["instance_id", "lhs", "rhs", "gap", "bound", "within_bound", "seed"]
    assert rows and all(r["within_bound"] == "true" for r in rows)


def test_incomplete_kraus_channel_exit_3(tmp_path, capsys):
    doc = {"seed": "1", "channels": {"leaky": {"kind": "kraus", "dim_in": 2, "dim_out": 2,
                                               "kraus": [[[1, 0], [0, 0.5]]]}}, "tasks": []}
    assert _run(_write(tmp_path, doc), tmp_path) == 3
    assert "leaky" in capsys.readouterr().err


def test_empty_task_list(tmp_path):
    assert _run(_write(tmp_path, {"tasks": []}), tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["tasks"] == [] and summary["passed"]


def test_parse_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(str(bad), tmp_path) == 2
    assert _run(_write(tmp_path, [1, 2]), tmp_path) == 2
    assert _run(_write(tmp_path, {"tasks": {"a": 1}}), tmp_path) == 2
    assert _run(str(tmp_path / "missing.json"), tmp_path) == 2


@pytest.mark.parametrize("doc", [
    {"tasks": [{"op": "no_such_op"}]},
    {"tasks": [{"op": "chi_function", "args": {"channel": "ghost", "rho": HALF}}]},
    {"tasks": [{"op": "chi_function", "args": {"channel": {"kind": "identity", "params": {"dim": 2}},
                                                "rho": HALF}}]},
    {"seed": "-4", "tasks": []},
    {"tasks": [{"op": "entropy", "name": "x", "args": {"op": HALF}},
               {"op": "entropy", "name": "x", "args": {"op": HALF}}]},
    {"tasks": [{"op": "entropy", "depends_on": ["later"], "args": {"op": HALF}}]},
])
def test_validation_errors_exit_3(tmp_path, doc):
    assert _run(_write(tmp_path, doc), tmp_path) == 3


def test_runtime_library_error_exit_3(tmp_path):
    doc = {"tasks": [{"op": "relative_entropy", "args": {"op": HALF, "op_b": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}}]}
    assert _run(_write(tmp_path, doc), tmp_path) == 3


def test_seed_on_command_line_enables_stochastic_task(tmp_path):
    doc = {"tasks": [{"op": "random_state", "args": {"dim": 2}}]}
    path = _write(tmp_path, doc)
    assert _run(path, tmp_path) == 3
    assert _run(path, tmp_path, "--seed", "18446744073709551615") == 0
    assert _run(path, tmp_path, "--seed", "18446744073709551616") == 3


def test_failed_assertion_exit_1(tmp_path):
    doc = {"tasks": [{"op": "entropy", "args": {"op": HALF}, "assert": {"expect": 0.5, "tol": 1e-6}}]}
    assert _run(_write(tmp_path, doc), tmp_path) == 1
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["failed"] == ["task0"]


def _small_stochastic():
    return {
        "seed": "99",
        "options": {"restarts": 2},
        "channels": {"ad": {"kind": "amplitude_damping", "params": {"gamma": 0.3}}},
        "tasks": [
            {"name": "cap", "op": "constrained_capacity", "args": {"channel": "ad"}},
            {"name": "sweep", "op": "prop3_sweep", "args": {"phi": "ad", "n_instances": 2, "d_list": [2, 4]},
             "sink": "sweep.csv", "depends_on": ["cap"]},
            {"name": "state", "op": "random_state", "args": {"dim": 3}},
        ],
    }


def test_repeat_runs_are_byte_identical(tmp_path):
    path = _write(tmp_path, _small_stochastic())
    outs = []
    for i, jobs in enumerate(("1", "1", "2")):
        out = tmp_path / f"o{i}"
        assert _run(path, out, "--jobs", jobs) == 0
        outs.append(((out / "summary.json").read_bytes(), (out / "sweep.csv").read_bytes()))
    assert outs[0] == outs[1] == outs[2]


def test_seed_override_changes_results(tmp_path):
    path = _write(tmp_path, _small_stochastic())
    _run(path, tmp_path / "a")
    _run(path, tmp_path / "b", "--seed", "100")
    assert (tmp_path / "a" / "sweep.csv").read_bytes() != (tmp_path / "b" / "sweep.csv").read_bytes()


def test_waves_respect_dependencies():
    tasks = [{"name": "a"}, {"name": "b", "depends_on": ["a"]}, {"name": "c"}, {"name": "d", "depends_on": ["b"]}]
    assert cli._waves(tasks) == [[0, 2], [1], [3]]


def test_selftest_and_ops_commands(capsys):
    assert cli.main(["selftest", "quick"]) == 0
    assert cli.main(["ops"]) == 0
    assert "prop3_sweep" in capsys.readouterr().out.split()
