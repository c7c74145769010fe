import json
import subprocess
import sys

import pytest

from tilebill import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_simulate_equilateral(capsys):
    code, doc = run(capsys, "simulate", "--angles", "60/60/60", "--tau", "1/2", "--p0", "1/10")
    assert code == 0
    assert set(doc) == {"version", "config", "result"}
    assert doc["config"]["command"] == "simulate"
    assert doc["result"]["kind"] == "periodic" and doc["result"]["period"] == 6
    assert doc["result"]["enclosed_tree"]["cycle_rank"] == 0


def test_simulate_is_deterministic(capsys):
    argv = ("simulate", "--angles", "70/62/48", "--tau", "3/7", "--cap", "500")
    assert run(capsys, *argv) == run(capsys, *argv)


def test_decimals_need_float_backend(capsys):
    code, _ = run(capsys, "simulate", "--angles", "60/60/60", "--tau", "0.5")
    assert code == 3
    code, _ = run(capsys, "simulate", "--angles", "60/60/60", "--tau", "0.45", "--backend", "float:80")
    assert code == 0


def test_usage_errors(capsys):
    assert run(capsys, "simulate", "--angles", "60/60", "--tau", "1/2")[0] == 3
    assert run(capsys, "simulate", "--angles", "60/60/60", "--tau", "1/2", "--cap", "0")[0] == 3
    assert run(capsys, "simulate", "--tribonacci", "--tau", "1/2", "--backend", "rational")[0] == 3
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 3


def test_classify(capsys):
    code, doc = run(capsys, "classify", "--angles", "80/50/50")
    assert code == 0
    assert doc["result"]["kind"] == "rational-drift"


def test_renormalize_cap_is_inconclusive(capsys):
    code, doc = run(capsys, "renormalize", "--tribonacci", "--cap", "6")
    assert code == 2
    assert doc["config"]["cap"] == 6


def test_words(capsys):
    code, doc = run(capsys, "words", "--max-j", "5")
    assert code == 0
    assert "acbcabcbacbcacbcbacbcabcbcacbcb" in json.dumps(doc)
    code, doc = run(capsys, "words", "--apply", "sigma3", "--word", "cba")
    assert code == 0 and "bacba" in json.dumps(doc)


def test_tree(capsys, tmp_path):
    svg = tmp_path / "tree.svg"
    code, doc = run(capsys, "tree", "--angles", "60/60/60", "--tau", "1/2", "--p0", "1/10", "--svg", str(svg))
    assert code == 0
    assert svg.read_text().startswith("<?xml")


def test_tree_not_closed_is_inconclusive(capsys):
    # this start is drift-periodic, so there is no enclosed tree
    code, _ = run(capsys, "tree", "--angles", "80/50/50", "--tau", "1/2", "--p0", "1/41", "--cap", "500")
    assert code == 2


def test_flower(capsys):
    code, doc = run(capsys, "flower", "--angles", "70/62/48", "--chord-sum", "2/3")
    assert code == 0
    assert doc["config"]["command"] == "flower"
    assert doc["result"]["bounded_property"] is True


def test_fractal_ladder_and_word(capsys, tmp_path):
    code, doc = run(capsys, "fractal", "ladder", "--n", "2000", "--svg", str(tmp_path / "l.svg"))
    assert code == 0 and (tmp_path / "l.svg").exists()
    code, doc = run(capsys, "fractal", "word", "--j", "3")
    assert code == 0


def test_verify_words_and_json_file(capsys, tmp_path):
    out = tmp_path / "v.json"
    code, _ = run(capsys, "verify", "words", "--json", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["status"] == "pass"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tilebill.cli", "words", "--max-j", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["config"]["command"] == "words"


def test_verify_exit_codes_follow_status(capsys, monkeypatch):
    from tilebill import verify

    def failing(seed=0, samples=1):
        rep = verify.SuiteReport("words", samples, seed)
        rep.fail(word="abc")
        return rep

    def undecided(seed=0, samples=1):
        rep = verify.SuiteReport("words", samples, seed)
        rep.inconclusive = 1
        return rep

    monkeypatch.setitem(verify.SUITES, "words", failing)
    code, doc = run(capsys, "verify", "words")
    assert code == 1 and doc["result"]["counterexamples"] == [{"word": "abc"}]
    monkeypatch.setitem(verify.SUITES, "words", undecided)
    assert run(capsys, "verify", "words")[0] == 2
