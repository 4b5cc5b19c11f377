import json

import pytest

from hpstm import cli
from hpstm import fracseries as fs
from hpstm import report as rp
from hpstm.errors import ValidationError
from hpstm.problems import bundled_names, load_problem, loads_problem
from hpstm.solvers import hpstm_solve


def test_fixture_lookup():
    assert len(rp.table_fixtures()) == 100
    assert rp.find_fixture(9, 0.7, "HPSTM").value == 0.2898
    assert rp.find_fixture(4, 0.8, "ADM").value == 0.9345
    assert rp.find_fixture(6, 0.8, "ADM").value == 0.9345
    f = rp.find_fixture(2, 0.8, "HPSTM")
    assert f.kind == "abs_error" and f.value == pytest.approx(1.47e-2)
    assert rp.find_fixture(3, 0.55, "HPSTM") is None
    assert f.source.startswith("Table 2 (")


def test_comparison_example1(examples):
    rep = rp.run_comparison(examples["example1"])
    for a in (1.0, 0.9, 0.8, 0.7):
        for m in rp.METHODS:
            assert rep.value(a, m) is not None, (a, m)
    assert rep.value(0.9, "HPSTM") == pytest.approx(1.5571904443780962, abs=1e-12)
    row = [r for r in rep.rows if r.alpha == 0.9 and r.method == "HPSTM"
           and r.quantity == "value" and r.fixture is not None][0]
    assert row.fixture.value == 1.478
    assert row.discrepancy == pytest.approx(0.0792, abs=1e-4)
    # every example1 fixture ends up in a row
    fixtures = {id(f) for f in (r.fixture for r in rep.rows) if f is not None}
    assert len(fixtures) == sum(1 for f in rp.table_fixtures() if f.example == "example1")


def test_comparison_example2_methods_agree(examples):
    rep = rp.run_comparison(examples["example2"], alphas=[0.8], point=(1.0, 0.1))
    assert rep.value(0.8, "HPSTM") == pytest.approx(rep.value(0.8, "ADM"), abs=1e-10)
    assert all(r.fixture is None for r in rep.rows)  # fixtures only at (1, 0.5)


def test_comparison_rejects_bad_point(examples):
    with pytest.raises(ValidationError):
        rp.run_comparison(examples["example1"], point=(10.0, 0.5))


def test_sensitivity(examples):
    rep = rp.run_sensitivity(examples["example1"], alphas=[0.9], ns=(3, 5, 7))
    vals = [rep.cell(0.9, n).value for n in (3, 5, 7)]
    assert vals[0] == vals[1] == vals[2]
    assert rep.cell(0.9, 7).residual < 1e-10
    rep2 = rp.run_sensitivity(examples["example2"], alphas=[0.9], ns=(3, 5), point=(1.0, 0.05))
    assert rep2.cell(0.9, 5).residual <= rep2.cell(0.9, 3).residual
    assert rep2.cell(0.9, 5).xi_hat > 0
    with pytest.raises(ValidationError):
        rp.run_sensitivity(examples["example2"], ns=())


def test_emit_csv(tmp_path, examples):
    assert rp.emit_csv(None) == ",".join(rp.COMPARE_HEADER) + "\r\n"
    rep = rp.run_comparison(examples["example1"], alphas=[1.0])
    text = rp.emit_csv(rep, tmp_path / "a.csv")
    assert text.splitlines()[0].split(",") == rp.COMPARE_HEADER
    assert (tmp_path / "a.csv").read_bytes() == text.encode()
    again = rp.emit_csv(rp.run_comparison(examples["example1"], alphas=[1.0]))
    assert again == text
    ts, curves = rp.figure_data(examples["example1"], alphas=[1.0, 0.5])
    fig = rp.emit_csv((ts, curves)).splitlines()
    assert fig[0] == "t,alpha=1,alpha=0.5" and len(fig) == 102
    assert fig[-1].split(",")[1] == "2"
    with pytest.raises(TypeError):
        rp.emit_csv(42)


def test_cli_compare_and_solve(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert cli.main(["compare", "example1", "--alpha", "0.9", "--out", str(out)]) == 0
    assert "1.478" in out.read_text()
    assert cli.main(["solve", "example1", "--alpha", "1", "--point", "1,0.5"]) == 0
    stdout = capsys.readouterr().out
    assert "u(1, 0.5) = 1.5" in stdout
    assert cli.main(["fixtures", "--table", "9"]) == 0
    assert "0.2898" in capsys.readouterr().out
    assert cli.main(["sensitivity", "example1", "--alpha", "1", "--n", "3"]) == 0
    assert cli.main(["figures", "example3", "--alpha", "1", "--terms", "2"]) == 0


def test_cli_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "b", "alpha": 0.5,\n "ic": }')
    assert cli.main(["solve", str(bad)]) == 2
    assert "bad.json:2:" in capsys.readouterr().err
    assert cli.main(["solve", "example1", "--alpha", "1.5"]) == 2
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["solve", "example1", "--terms", "0"]) == 2
    weird = tmp_path / "w.json"
    weird.write_text(json.dumps({"name": "w", "alpha": 0.5, "ic": "x", "nonlinear": [{"monomial": "sin(u)"}]}))
    assert cli.main(["solve", str(weird)]) == 2


def test_cli_numerical_failure(tmp_path):
    p = tmp_path / "neg.json"
    p.write_text(json.dumps({"name": "neg", "alpha": 1.0, "ic": "x - 2", "domain": [0, 3],
                             "nonlinear": [{"monomial": "u*uxx"}]}))
    # the series runs fine, the FDM comparator is ill-posed and is reported in the row note
    out = tmp_path / "o.csv"
    assert cli.main(["compare", str(p), "--out", str(out)]) == 0
    assert "StabilityError" in out.read_text()
    assert cli.main(["compare", "example1", "--alpha", "1", "--point", "1,0.5", "--eps", "1.0",
                     "--out", str(out)]) == 0
    assert "IllConditionedError" in out.read_text()
    # a gamma overflow in the series itself is a numerical failure
    huge = tmp_path / "h.json"
    huge.write_text(json.dumps({"name": "h", "alpha": 0.01, "ic": "x", "n": 400,
                                "nonlinear": [{"monomial": "u"}]}))
    assert cli.main(["solve", str(huge), "--point", "1,0.5"]) in (0, 3)


def test_bundled_problems_round_trip():
    assert bundled_names() == ["example1", "example2", "example3"]
    for name in bundled_names():
        p = load_problem(name)
        sol = hpstm_solve(p, 3)
        back = fs.loads(fs.dumps(sol.partial_sum))
        assert fs.dumps(back) == fs.dumps(sol.partial_sum)
    with pytest.raises(ValidationError):
        loads_problem('{"name": "x", "alpha": 2, "ic": "x"}')
