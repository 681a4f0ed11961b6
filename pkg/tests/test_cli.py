import json

from chlam.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_roundtrip(capsys):
    code, out, _ = run(capsys, "parse", r"(\x.x x)(\x.x x)")
    assert code == 0
    assert out.strip() == r"(\x0. x0 x0) (\x1. x1 x1)"


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "parse", r"\x.")
    assert code == 1
    assert "parse error" in err


def test_reduce_trace_and_summary(capsys):
    code, out, _ = run(capsys, "reduce", "--trace", r"(\b x. \b y. x @b y) @w z @w w")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("interaction ")
    assert lines[-1] == "normal k=2 n=2"


def test_reduce_fuel_exhaustion_exit_code(capsys):
    code, out, _ = run(capsys, "reduce", "--fuel", "50", r"(\w x. x @w x) @w (\w x. x @w x)")
    assert code == 2
    assert "fuel-exhausted k=0 n=50" in out


def test_reduce_respects_env_fuel(capsys, monkeypatch):
    monkeypatch.setenv("CHECKERS_FUEL", "7")
    code, out, _ = run(capsys, "reduce", r"(\w x. x @w x) @w (\w x. x @w x)")
    assert code == 2
    assert "n=7" in out


def test_bohm_ascii_and_json(capsys):
    code, out, _ = run(capsys, "bohm", "--depth", "3", "Y")
    assert code == 0
    assert out.splitlines()[0].startswith("\\")
    code, out, _ = run(capsys, "bohm", "--depth", "2", "--json", r"\x y. x y")
    payload = json.loads(out)
    assert payload["lam"] and payload["head"] == payload["lam"][0]
    code, out, _ = run(capsys, "bohm", "--json", "Om")
    assert json.loads(out) == {"bot": True}


def test_compare_modes(capsys):
    code, out, _ = run(capsys, "compare", "I", r"\x y. x y")
    assert code == 0 and out.splitlines()[0] == "fails"
    assert "witness path" in out
    code, out, _ = run(capsys, "compare", "--mode", "bohm-eta", "I", r"\x y. x y")
    assert code == 0 and out.strip() == "holds"
    code, out, _ = run(capsys, "compare", "K", "K")
    assert out.strip() == "holds"


def test_separate_files_and_exit_codes(tmp_path, capsys):
    left = tmp_path / "t.lam"
    right = tmp_path / "u.lam"
    left.write_text("I")
    right.write_text(r"\x y. x y")
    code, out, _ = run(capsys, "separate", "--json", str(left), str(right))
    assert code == 0
    payload = json.loads(out)
    assert payload["left"]["k"] == 1 and payload["right"]["k"] == 2
    assert payload["K"] >= 1

    same = tmp_path / "same.lam"
    same.write_text("K")
    code, _, err = run(capsys, "separate", str(same), str(same))
    assert code == 3


def test_separate_section5(tmp_path, capsys):
    left = tmp_path / "t5.lam"
    right = tmp_path / "u5.lam"
    left.write_text(r"\x y. x (x Om y) Om")
    right.write_text(r"\x y. x (x y Om) Om")
    code, out, _ = run(capsys, "separate", "--fuel", "1000", "--json", str(left), str(right))
    assert code == 0
    payload = json.loads(out)
    assert payload["left"]["status"] == "normal"
    assert payload["right"]["status"] == "fuel-exhausted"


def test_infer_tight_and_typecheck_pipeline(tmp_path, capsys):
    code, out, _ = run(capsys, "infer-tight", "--json", r"(\b x. \b y. x @b y) @w z @w w")
    assert code == 0
    payload = json.loads(out)
    assert payload["k"] == 2
    deriv = tmp_path / "d.json"
    deriv.write_text(json.dumps(payload["derivation"]))
    code, out, _ = run(capsys, "typecheck", str(deriv))
    assert code == 0 and "valid" in out

    # corrupt the index: the checker must reject with exit 4
    bad = payload["derivation"].copy()
    bad["k"] = bad["k"] + 1
    deriv.write_text(json.dumps(bad))
    code, _, err = run(capsys, "typecheck", str(deriv))
    assert code == 4 and "invalid" in err


def test_infer_tight_fuel_exit(capsys):
    code, _, err = run(capsys, "infer-tight", "--fuel", "30", r"(\w x. x @w x) @w (\w x. x @w x)")
    assert code == 2


def test_typings_lists_family(capsys):
    code, out, _ = run(capsys, "typings", "--cap", "3", r"\b y. x @b y")
    assert code == 0
    assert "|-1" in out
    code, out, _ = run(capsys, "typings", "--json", "--cap", "2", "x")
    payload = json.loads(out)
    assert {"env": {"x": ["X"]}, "k": 0, "type": "X"} in payload


def test_probe_cli(capsys):
    code, out, _ = run(capsys, "probe", "--json", "I", r"\x y. x y")
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] == "counterexample"
    assert payload["left"]["k"] == 1 and payload["right"]["k"] == 2


def test_suite_cli(capsys):
    code, out, _ = run(capsys, "suite", "extraction-property", "--seed", "5")
    assert code == 0
    assert "pass" in out
    code, _, err = run(capsys, "suite", "no-such-suite")
    assert code == 1
