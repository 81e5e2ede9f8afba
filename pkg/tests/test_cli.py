import csv
import io
import json
import subprocess
import sys

import pytest

from sl2orbital.cli import CSV_HEADER, TABLE_HEADER, UsageError, dumps, main, parse_literal
from sl2orbital.local_field import LocalField
from sl2orbital.orbits import AlgebraElement, DualElement, gamma_wald
from sl2orbital.characters import standard_character
from sl2orbital.transform import prefactor, weyl_sum


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_split_close(capsys):
    code, out, _ = run(capsys, "eval", "--p", "5", "--format", "json")
    assert code == 0
    (data,) = json.loads(out)
    assert data["regime"] == "close"
    assert data["value"] == {"re": 2.0, "im": 0.0}
    assert data["structure"]["c0"] == "-2/5"
    assert data["structure"]["constant"] == "0"


def test_eval_with_oracle(capsys):
    code, out, _ = run(capsys, "eval", "--p", "7", "--theta", "pi", "--thetap", "pi", "--s", "3*p^-2",
                       "--oracle", "--format", "json")
    assert code == 0
    (data,) = json.loads(out)
    assert data["regime"] == "bad-shell-same"
    assert data["pass"] is True
    assert data["abs_error"] < 1e-8


@pytest.mark.parametrize(
    "argv",
    [
        ("eval", "--p", "9"),
        ("eval", "--p", "5", "--precision", "4"),
        ("eval", "--p", "5", "--tol", "0.5"),
        ("eval", "--p", "5", "--s", "0*p^1"),
        ("eval", "--p", "5", "--s", "banana"),
        ("eval", "--p", "7", "--epsilon", "2"),
        ("sums", "kloosterman", "--p", "5", "--xi", "5"),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--p", "5", "--theta", "7"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sums", "gamma", "--p", "5"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_parse_literal():
    assert parse_literal("3*p^-2", 5) == (3, -2)
    assert parse_literal("2", 5) == (2, 0)
    assert parse_literal("-1*p^(3)", 7) == (-1, 3)
    # factors of p move from the unit into the exponent
    assert parse_literal("10*p^1", 5) == (2, 2)
    with pytest.raises(UsageError):
        parse_literal("0", 5)


def test_json_round_trip_is_byte_identical(capsys):
    _, out, _ = run(capsys, "verify", "--p", "3", "--quick", "--limit", "25", "--format", "json")
    assert dumps(json.loads(out)) + "\n" == out
    _, out, _ = run(capsys, "eval", "--p", "5", "--theta", "eps", "--s", "2*p^1", "--thetap", "eps", "--format", "json")
    assert dumps(json.loads(out)) + "\n" == out


def test_verify_quick_passes(capsys):
    code, out, err = run(capsys, "verify", "--p", "3", "--quick", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 271
    assert all(r[-1] == "true" for r in rows[1:])
    assert "270 points, 0 failures" in err


def test_verify_perturb_fails(capsys):
    code, _, err = run(capsys, "verify", "--p", "3", "--quick", "--perturb", "--format", "csv")
    assert code == 1
    assert "FAIL" in err


def test_verify_regime_filter(capsys):
    code, out, _ = run(capsys, "verify", "--p", "5", "--regime", "bad-shell", "--format", "json")
    assert code == 0
    regimes = {r["regime"] for r in json.loads(out)}
    assert regimes == {"bad-shell-same", "bad-shell-other"}


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--p", "5", "--quick", "--limit", "40", "--format", "csv")[1]
    second = run(capsys, "verify", "--p", "5", "--quick", "--limit", "40", "--format", "csv")[1]
    assert first == second


def test_csv_header_golden(capsys):
    _, out, _ = run(capsys, "verify", "--p", "3", "--quick", "--limit", "1", "--format", "csv")
    assert out.splitlines()[0] == (
        "p,phi_depth,beta,theta,s,theta_prime,regime,closed_re,closed_im,gamma_re,gamma_im,"
        "oracle_re,oracle_im,abs_error,pass"
    )


def test_sums_values(capsys):
    code, out, _ = run(capsys, "sums", "gauss", "--p", "5", "--format", "json")
    assert code == 0
    value = json.loads(out)["value"]
    assert value["re"] == pytest.approx(1) and value["im"] == pytest.approx(0, abs=1e-12)
    _, out, _ = run(capsys, "sums", "kloosterman", "--p", "5", "--xi", "1", "--format", "json")
    assert json.loads(out)["value"]["re"] == pytest.approx(0.3819660112501051)
    _, out, _ = run(capsys, "sums", "gamma", "--p", "7", "--chi", "nu-half-sgn-pi", "--format", "json")
    value = json.loads(out)["value"]
    assert value["re"] == pytest.approx(0, abs=1e-12) and value["im"] == pytest.approx(-1)


def test_table_sweep(capsys):
    code, out, _ = run(capsys, "table", "--p", "5", "--theta", "1", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 7 * 6
    assert set(rows[0]) == set(TABLE_HEADER)
    field_ = LocalField(5)
    x = DualElement(field_.element(1), field_.element(1), standard_character(5))
    far = [row for row in rows if row["regime"] == "far-same-torus"]
    assert far and all(row["theta_prime"] == "1" for row in far)
    for row in far:
        y = AlgebraElement(field_.from_parts(1, int(row["ord_s"])), field_.element(1))
        expected = prefactor(x, y) / y.abs_disc_inv_sqrt * complex(gamma_wald(x, y)) * complex(weyl_sum(x, y))
        assert complex(row["normalized_re"], row["normalized_im"]) == pytest.approx(expected)
    _, out, _ = run(capsys, "table", "--p", "5", "--sweep", "thetap", "--format", "csv")
    assert len(out.splitlines()) == 1 + 6


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "eval", "--p", "3", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())[0]["p"] == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sl2orbital", "sums", "gauss", "--p", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.strip()
