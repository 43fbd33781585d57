"""Command line interface: subcommands, exit codes, outputs."""

import pytest

from apml.cli import main

from conftest import CORPUS, ROOT

RADDER = str(CORPUS / "radder.apml")
MERGE1 = str(CORPUS / "radder_merge1.apml")
DUR6 = str(CORPUS / "radder_duration6.apml")
RELAY = str(CORPUS / "relay.apml")
TINY = str(CORPUS / "tiny.uni")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# check

def test_check_ok(capsys):
    code, out, _ = run(capsys, "check", RADDER)
    assert code == 0
    assert out.splitlines()[0] == "contract sum: ok"


def test_check_violated(capsys):
    code, out, _ = run(capsys, "check", MERGE1)
    assert code == 1
    assert "C2 violated" in out


def test_check_missing_file(capsys):
    code, _, err = run(capsys, "check", "nonexistent.apml")
    assert code == 3
    assert "error:" in err


def test_check_garbage_input(tmp_path, capsys):
    bad = tmp_path / "bad.apml"
    bad.write_text("this is not a model")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 3
    assert "EXPECTED_PATTERN" in err


def test_check_writes_output_file(tmp_path, capsys):
    out_file = tmp_path / "report.txt"
    code, out, _ = run(capsys, "check", RADDER, "-o", str(out_file))
    assert code == 0
    assert out == ""
    assert out_file.read_text().startswith("contract sum: ok")


# ---------------------------------------------------------------------------
# emit-isar

def test_emit_isar_matches_golden(capsys):
    code, out, _ = run(capsys, "emit-isar", RADDER)
    assert code == 0
    assert out == (ROOT / "tests" / "golden" / "rsum.thy").read_text()


def test_emit_isar_strict_mode_fails_on_unmapped_symbols(capsys):
    code, _, err = run(capsys, "emit-isar", str(CORPUS / "tgmt.apml"),
                       "--strict-symbols")
    assert code == 1
    assert "UNMAPPED_SYMBOL" in err


# ---------------------------------------------------------------------------
# search

def test_search_finds_and_prints_a_proof(capsys):
    code, out, _ = run(capsys, "search", RADDER)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("s0: at 1 have ")
    assert lines[-1].startswith("s3: at 7 have ")


def test_search_reports_no_proof(capsys):
    code, _, err = run(capsys, "search", DUR6)
    assert code == 1
    assert "no-proof-at-bound" in err


def test_search_budget_exceeded(capsys):
    code, _, err = run(capsys, "search", RADDER, "--max-steps", "1")
    assert code == 2
    assert "budget-exceeded" in err


def test_search_unknown_contract(capsys):
    code, _, err = run(capsys, "search", RADDER, "--contract", "nope")
    assert code == 3
    assert "no architecture contract" in err


# ---------------------------------------------------------------------------
# simulate

def test_simulate_holds(capsys):
    code, out, _ = run(capsys, "simulate", RELAY, "--universe", TINY)
    assert code == 0
    assert out == "contract relayed: holds\n"


def test_simulate_counterexample(tmp_path, capsys):
    text = (CORPUS / "relay.apml").read_text().replace("duration 2",
                                                       "duration 1", 1)
    # the architecture now promises the result one tick too early
    broken = tmp_path / "relay.apml"
    broken.write_text(text)
    code, out, _ = run(capsys, "simulate", str(broken), "--universe", TINY)
    assert code == 1
    assert out.splitlines()[0] == "contract relayed: counterexample"
    assert "Stage2.o=" in out


def test_simulate_bad_universe(tmp_path, capsys):
    bad = tmp_path / "bad.uni"
    bad.write_text("frob X: 1 2")
    code, _, err = run(capsys, "simulate", RELAY, "--universe", str(bad))
    assert code == 3
    assert "universe line" in err


# ---------------------------------------------------------------------------
# fmt

def test_fmt_is_idempotent(tmp_path, capsys):
    code, once, _ = run(capsys, "fmt", RADDER)
    assert code == 0
    formatted = tmp_path / "canon.apml"
    formatted.write_text(once)
    code, twice, _ = run(capsys, "fmt", str(formatted))
    assert code == 0
    assert once == twice


@pytest.mark.parametrize("argv", [["check"], ["simulate", RELAY], []])
def test_missing_arguments_exit_nonzero(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code != 0
