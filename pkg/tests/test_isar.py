"""Isabelle theory emission."""

import pathlib

import pytest

from apml.isar import (EmitConfig, Renderer, UnmappedSymbol, abbreviate,
                       emit_locale, emit_theory, port_names, sort_name,
                       unmapped_sorts)
from apml.parser import parse_model

from conftest import load, ROOT

GOLDEN = ROOT / "tests" / "golden"


@pytest.fixture(scope="module")
def radder():
    model, diags = load("radder.apml")
    assert not diags
    return model


def test_golden_theory_byte_exact(radder):
    assert emit_theory(radder) == (GOLDEN / "rsum.thy").read_text()


def test_emission_is_deterministic(radder):
    assert emit_theory(radder) == emit_theory(radder)


def test_locale_assumption_counts(radder):
    locale = emit_locale(radder)
    assume_lines = [l for l in locale.splitlines() if ': "' in l]
    # six contract assumptions then six connection assumptions
    assert len(assume_lines) == 6 + 6
    conn = [l for l in assume_lines if "\\<And>n." in l]
    assert len(conn) == 6


def test_proof_applies_each_rationale_once(radder):
    theory = emit_theory(radder)
    assert theory.count("by blast") == 4
    assert "  thus ?thesis by auto\nqed" in theory
    # the conclusion comes after the last rationale application
    assert theory.rindex("by blast") < theory.index("thus ?thesis")


def test_abbreviate():
    assert abbreviate("Dispatcher") == "d"
    assert abbreviate("Adder1") == "a1"
    assert abbreviate("Merger") == "m"
    assert abbreviate("TrackGate") == "tg"
    assert abbreviate("track_gate") == "tg"
    assert abbreviate("OdometerV2Sensor") == "ov2s"


def test_port_parameter_names(radder):
    names = port_names(radder)
    assert names["Dispatcher.i1"] == "di1"
    assert names["Adder1.o"] == "a1o"
    assert names["Merger.o"] == "mo"


def test_port_name_collision_falls_back_to_full_prefix():
    model, diags = parse_model("""
Pattern P ShortName p {
  DTSpec { DT B ( Sort NAT ) }
  CTypes {
    CType Motor { OutputPorts { OutputPort o (Type: B.NAT) } },
    CType Mixer { OutputPorts { OutputPort o (Type: B.NAT) } }
  }
}""")
    assert not diags
    names = port_names(model)
    assert names["Motor.o"] == "motor_o"
    assert names["Mixer.o"] == "mixer_o"


def test_sort_mapping_and_typedecls():
    assert sort_name("Basic.NAT") == "nat"
    assert sort_name("B.BOOLEAN") == "bool"
    assert sort_name("Track.TrackState") == "TrackState"
    model, _ = parse_model("""
Pattern P ShortName p {
  DTSpec { DT T ( Sort State ) }
  CTypes { CType A { OutputPorts { OutputPort o (Type: T.State) } } }
}""")
    assert unmapped_sorts(model) == ["State"]
    assert "typedecl State" in emit_theory(model)


def test_no_comments_flag(radder):
    theory = emit_theory(radder, EmitConfig(comments=False))
    assert "(*" not in theory
    # structure is otherwise unchanged
    assert theory.count("by blast") == 4


def test_legacy_connection_names(radder):
    theory = emit_theory(radder, EmitConfig(legacy_connection_names=True))
    assert "and a1i1_do1:" in theory
    assert "and do1_a1i1:" in theory
    # the proof cites both spellings
    assert "using a1i1_do1 do1_a1i1 a1i2_do2 do2_a1i2 by simp" in theory


def test_strict_mode_rejects_unmapped_symbols():
    model, _ = load("tgmt.apml")
    with pytest.raises(UnmappedSymbol):
        emit_theory(model, EmitConfig(strict_symbols=True))


def test_large_model_emits_deterministically():
    model, _ = load("tgmt.apml")
    t1 = emit_theory(model)
    t2 = emit_theory(model)
    assert t1 == t2
    assert t1.startswith("theory tgmt")
    # unmapped symbols become locale parameters instead
    assert "locale tgmt =" in t1


def test_proofless_theorem_ends_with_oops():
    model, _ = load("radder_duration6.apml")
    theory = emit_theory(model)
    assert "  oops" in theory
    assert "proof -" not in theory


def test_term_rendering_offsets(radder):
    r = Renderer(radder)
    from apml import model as m
    port = m.PortRef(m.Port("o", "Merger", m.OUTPUT, "Basic.NAT"))
    assert r.term(port, 0) == "mo n"
    assert r.term(port, 7) == "mo (n+7)"
    add = m.App("Basic.add", (m.Var("x", "Basic.NAT"),
                              m.Var("y", "Basic.NAT")))
    assert r.term(add, 0) == "x + y"
    assert r.predicate(m.Eq(port, add), 7) == "mo (n+7) = x + y"
