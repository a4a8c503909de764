import json

import pytest

import hypersynth as hs

MODEL = """mdp
states 4
action 0 0 alpha
action 0 1 beta
action 1 0 alpha
action 1 1 beta
trans 0 0 2 0.7
trans 0 0 3 0.3
trans 0 1 1 0.5
trans 0 1 3 0.5
trans 1 0 2 0.8
trans 1 0 3 0.2
trans 1 1 2 0.4
trans 1 1 3 0.6
trans 2 0 2 1
trans 3 0 3 1
label two 2
"""

SPEC = "exists sigma : forall x in {0, 1}[sigma] : P(x, F two) <= 0.6"


def small_problem():
    return hs.Problem(hs.parse_model(MODEL), hs.parse_spec(SPEC))


def test_round_trip():
    m = hs.parse_model(MODEL)
    assert m.state_count == 4
    assert m.labels == ["two"]
    assert m.actions(0) == ["alpha", "beta"]
    assert hs.parse_model(hs.write_model(m)) == m
    assert hs.write_spec(hs.parse_spec(hs.write_spec(hs.parse_spec(SPEC)))) == hs.write_spec(hs.parse_spec(SPEC))


def test_parse_errors():
    with pytest.raises(hs.ParseError):
        hs.parse_model("mdp\nstates x\n")
    with pytest.raises(ValueError):
        hs.parse_spec("exists : P(")


def test_synthesis_matches_enumeration():
    p = small_problem()
    assert p.family_size == 4
    out = hs.synthesize(p)
    assert out.verdict == "feasible"
    assert out.controllers[0][:2] == [1, 1]
    assert p.check(out.controllers)["holds"]
    for mode in ("feasibility", "complete"):
        assert hs.synthesize(p, mode=mode).verdict == hs.enumerate(p, mode=mode).verdict
    assert hs.synthesize(p, mode="complete", hybrid=True).satisfying_count == 1


def test_check_rejects_bad_controller():
    p = small_problem()
    result = p.check([[0, 0, 0, 0]])
    assert not result["holds"]
    assert len(result["atoms"]) == 2


def test_stats_json():
    p = small_problem()
    doc = json.loads(hs.synthesize(p, mode="complete").stats_json(p))
    assert doc["schema"] == "hypersynth-stats/1"
    assert doc["family_size"] == "4"


def test_generators():
    assert "knuth-yao-pc" in hs.generator_ids()
    b = hs.generate("knuth-yao-pc", {"stages": "1"})
    p = hs.Problem(b["model"], b["spec"])
    assert p.family_size == 156
    assert hs.synthesize(p).verdict == "feasible"
    b = hs.generate("maze-sd", {"variant": "simple"})
    out = hs.synthesize(hs.Problem(b["model"], b["spec"]))
    assert out.verdict == "unfeasible"
    assert out.stats["explored_fraction"] == 1.0
    with pytest.raises(ValueError):
        hs.generate("no-such-benchmark")


def test_enumeration_cap():
    b = hs.generate("knuth-yao-pc", {"stages": "2"})
    with pytest.raises(hs.CapExceededError):
        hs.enumerate(hs.Problem(b["model"], b["spec"]), cap=100)
