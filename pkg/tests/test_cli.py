"""CLI: commands, config handling, exit codes, CSV stability."""

import json

import pytest

from mbkps.cli import EXIT_CONFIG, EXIT_GUARD, EXIT_IO, EXIT_OK, main


def write_config(tmp_path, name="cfg.json", **kw):
    path = tmp_path / name
    path.write_text(json.dumps(kw))
    return str(path)


def test_storage_command(tmp_path, capsys):
    assert main(
        ["storage", "--M", "1", "--n", "30", "--q", "32", "--q-prime", "64"]
    ) == EXIT_OK
    assert capsys.readouterr().out.strip() == "330"


def test_assign_writes_deployment(tmp_path, capsys):
    dep_path = tmp_path / "dep.txt"
    cfg = write_config(
        tmp_path, kind="mds_rs", n=3, k=2, q=4, M=1, N=16,
        deployment=str(dep_path), id_policy="sequential",
    )
    assert main(["assign", "--config", cfg]) == EXIT_OK
    lines = dep_path.read_text().splitlines()
    assert len(lines) == 17  # header + one line per node
    out = capsys.readouterr().out
    assert "storage_bits_per_node:" in out


def test_assign_storage_report_for_multi_authority(tmp_path, capsys):
    dep_path = tmp_path / "dep.txt"
    cfg = write_config(
        tmp_path, kind="mds_rs", n=30, k=2, q=32, M=3, N=1000, q_prime=64,
        deployment=str(dep_path),
    )
    assert main(["assign", "--config", cfg]) == EXIT_OK
    assert "storage_bits_per_node: 990" in capsys.readouterr().out


def test_assign_too_many_nodes_exit_code(tmp_path):
    cfg = write_config(
        tmp_path, kind="mds_rs", n=3, k=2, q=4, M=1, N=17,
        deployment=str(tmp_path / "d.txt"),
    )
    assert main(["assign", "--config", cfg]) == EXIT_CONFIG


def test_discover_command(tmp_path, capsys):
    dep_path = tmp_path / "dep.txt"
    cfg = write_config(
        tmp_path,
        kind="mds_rs", n=3, k=2, q=4,
        eval_points=[1, 2, 3],
        M=1, N=16, deployment=str(dep_path), id_policy="sequential",
    )
    assert main(["assign", "--config", cfg]) == EXIT_OK
    capsys.readouterr()
    # node 6 <-> message (1,2); node 9 <-> message (2,1); common ref is 9
    assert main(["discover", "--deployment", str(dep_path), "6", "9"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "9"
    assert out[1] == "count: 1"
    # self-discovery yields all M*n refs
    assert main(["discover", "--deployment", str(dep_path), "6", "6"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "count: 3"


def test_discover_disjoint_nodes_empty_list_exit_zero(tmp_path, capsys):
    dep_path = tmp_path / "dep.txt"
    cfg = write_config(
        tmp_path,
        kind="mds_rs", n=3, k=2, q=4, eval_points=[1, 2, 3],
        M=1, N=16, deployment=str(dep_path), id_policy="sequential",
    )
    assert main(["assign", "--config", cfg]) == EXIT_OK
    capsys.readouterr()
    # node 6 carries message (1,2) -> (3,2,0); node 14 carries (3,2) -> (1,0,2);
    # the codewords disagree everywhere
    assert main(["discover", "--deployment", str(dep_path), "6", "14"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ""
    assert out[1] == "count: 0"


def test_discover_unknown_node(tmp_path):
    dep_path = tmp_path / "dep.txt"
    cfg = write_config(
        tmp_path, kind="mds_rs", n=3, k=2, q=4, M=1, N=4,
        deployment=str(dep_path),
    )
    assert main(["assign", "--config", cfg]) == EXIT_OK
    assert main(["discover", "--deployment", str(dep_path), "0", "99"]) == EXIT_CONFIG


def test_analyze_outputs_report_row(tmp_path, capsys):
    cfg = write_config(tmp_path, kind="mds_rs", n=3, k=2, q=4, r=0, seed=1)
    assert main(["analyze", "--config", cfg]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r,D,P_re,P_re_M,method,stderr"
    assert lines[1].startswith("0,72,0.6,0.6,exact_ie")


def test_analyze_brute_force_agrees(tmp_path, capsys):
    common = dict(kind="mds_rs", n=3, k=2, q=4, r=2, seed=11)
    cfg = write_config(tmp_path, "a.json", **common, method="exact")
    assert main(["analyze", "--config", cfg]) == EXIT_OK
    row_exact = capsys.readouterr().out.splitlines()[1]
    cfg2 = write_config(tmp_path, "b.json", **common, method="brute-force")
    assert main(["analyze", "--config", cfg2]) == EXIT_OK
    row_brute = capsys.readouterr().out.splitlines()[1]
    assert row_exact.split(",")[1] == row_brute.split(",")[1]  # same D


def test_simulate_csv_columns(tmp_path, capsys):
    cfg = write_config(
        tmp_path, kind="mds_rs", n=3, k=2, q=4, r=1, seed=2, trials=2000
    )
    assert main(["simulate", "--config", cfg]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r,p_hat,stderr,trials,method,code_id,M"
    fields = lines[1].split(",")
    assert fields[0] == "1" and fields[3] == "2000"
    assert fields[4] == "simulated" and fields[5] == "rs-3-2-4"


def test_sweep_r_empty_grid_header_only(tmp_path, capsys):
    cfg = write_config(tmp_path, kind="mds_rs", n=3, k=2, q=4, r_grid=[])
    assert main(["sweep-r", "--config", cfg]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out == ["code_id,kind,r,p_exact,p_mds_avg,p_sim,stderr"]


def test_sweep_r_rows_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    base = dict(
        kind="mds_rs", n=6, k=2, q=8, r_grid=[1, 3], trials=1500,
        seed=5, collusion_sets=30, code_count=2, code_seed=7,
    )
    cfg1 = write_config(tmp_path, "c1.json", **base, out=str(out1))
    cfg2 = write_config(tmp_path, "c2.json", **base, out=str(out2))
    assert main(["sweep-r", "--config", cfg1]) == EXIT_OK
    assert main(["sweep-r", "--config", cfg2]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    rows = out1.read_text().splitlines()
    # 1 MDS + 2 random codes, two r values each
    assert len(rows) == 1 + 3 * 2
    mds_rows = [r for r in rows[1:] if r.startswith("rs-")]
    assert all(r.split(",")[4] != "" for r in mds_rows)
    lin_rows = [r for r in rows[1:] if r.startswith("lin-")]
    assert all(r.split(",")[4] == "" for r in lin_rows)


def test_sweep_r_p_exact_shares_the_analysis_code_path(tmp_path):
    # the CSV column must equal a direct average_resilience call: no
    # re-derivation drift between the CLI and the analysis module
    from mbkps.codes import make_rs_code
    from mbkps.field import make_field
    from mbkps.resilience import average_resilience

    out = tmp_path / "sweep.csv"
    cfg = write_config(
        tmp_path, kind="mds_rs", n=6, k=2, q=8, r_grid=[2], trials=500,
        seed=9, collusion_sets=25, variants=["mds"], out=str(out),
    )
    assert main(["sweep-r", "--config", cfg]) == EXIT_OK
    row = out.read_text().splitlines()[1].split(",")
    code = make_rs_code(make_field(8), 6, 2)
    avg = average_resilience(code, 2, sets=25, seed=9)
    assert float(row[3]) == avg.p_external_pairs


def test_sweep_r_strictly_increasing_grid_enforced(tmp_path):
    cfg = write_config(
        tmp_path, kind="mds_rs", n=6, k=2, q=8, r_grid=[3, 1]
    )
    assert main(["sweep-r", "--config", cfg]) == EXIT_CONFIG


def test_sweep_storage_rows(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        kind="mds_rs", n=6, k=2, q=8, q_prime=64, M_grid=[1, 2, 3],
        r_grid=[2], trials=1500, seed=3, collusion_sets=40,
    )
    assert main(["sweep-storage", "--config", cfg]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "code_id,M,S_bits,r,p_analytic,p_sim,stderr"
    assert len(rows) == 4
    bits = [int(r.split(",")[2]) for r in rows[1:]]
    assert bits == [bits[0], 2 * bits[0], 3 * bits[0]]  # linear in M
    p_analytic = [float(r.split(",")[4]) for r in rows[1:]]
    assert p_analytic[0] < p_analytic[1] < p_analytic[2]


def test_guard_exit_code(tmp_path):
    cfg = write_config(
        tmp_path, kind="random_linear", n=40, k=4, q=64, r=0, seed=0
    )
    assert main(["analyze", "--config", cfg]) == EXIT_GUARD


def test_io_exit_code(tmp_path):
    cfg = write_config(
        tmp_path, kind="mds_rs", n=3, k=2, q=4, r=0,
        out=str(tmp_path / "missing_dir" / "x.csv"),
    )
    assert main(["analyze", "--config", cfg]) == EXIT_IO


def test_unknown_config_key_rejected(tmp_path):
    cfg = write_config(tmp_path, kind="mds_rs", n=3, k=2, q=4, banana=1)
    assert main(["analyze", "--config", cfg]) == EXIT_CONFIG


def test_discover_without_deployment_file():
    assert main(["discover", "0", "1"]) == EXIT_CONFIG


def test_mds_average_method(tmp_path, capsys):
    cfg = write_config(
        tmp_path, kind="mds_rs", n=3, k=2, q=4, r=1, method="mds-average"
    )
    assert main(["analyze", "--config", cfg]) == EXIT_OK
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[1] == "54.0" and row[4] == "mds_average"


def test_flag_overrides_config(tmp_path, capsys):
    cfg = write_config(tmp_path, M=1, n=30, q=32, q_prime=64)
    assert main(["storage", "--config", cfg, "--M", "3"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "990"
