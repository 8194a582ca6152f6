import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given

from builders import collapse, finite_instances
from discop import (
    CRat,
    FinSuppFn,
    FiniteInstance,
    LineFamily,
    OrbitFamilyInstance,
    RayLoop,
    Schedule,
    full_report,
    shift_decomposition,
)
from discop.errors import BadParameters, ParseError, ValidationError
from discop.oracle import enumerate_instances, exhaustive_crosscheck
from discop.serialize import (
    dumps,
    generate,
    loads,
    parse_crosscheck,
    parse_decomposition,
    parse_instance,
    parse_report,
    parse_value,
    parse_vector,
    render_crosscheck,
    render_decomposition,
    render_instance,
    render_report,
    render_value,
)

FIXTURES = sorted((Path(__file__).parent / "fixtures").glob("*.json"))
FAMILIES = ["identity:3", "cycle:1,1,1", "cycle:1,2,4", "line:1,1/2", "line:2,3", "ray_loop:2",
            "ray_loop:3/2", "unbounded_normal:4", "collapse:3", "collapse:5"]


class TestParseInstance:
    def test_identity(self):
        inst = parse_instance({"kind": "finite", "points": ["a"], "mu": {"a": "1"}, "phi": {"a": "a"}})
        assert inst == FiniteInstance("a", {"a": 1}, {"a": "a"})

    def test_ray_loop(self):
        inst = parse_instance({"kind": "orbit_family", "orbits": [{"type": "ray_loop", "ratio": "2"}]})
        assert inst == OrbitFamilyInstance((RayLoop(2),))

    def test_unknown_phi_target(self):
        with pytest.raises(ValidationError) as exc:
            parse_instance({"kind": "finite", "points": ["a"], "mu": {"a": "1"}, "phi": {"a": "z"}})
        assert exc.value.field == "phi" and "unknown point" in exc.value.reason

    @pytest.mark.parametrize(
        "doc, field",
        [
            ({"kind": "finite", "points": ["a"], "mu": {"a": "0.5"}, "phi": {"a": "a"}}, "mu.a"),
            ({"kind": "finite", "points": ["a"], "mu": {}, "phi": {"a": "a"}}, "mu"),
            ({"kind": "orbit_family", "orbits": [{"type": "fixed", "weight": "1"}, {"type": "line", "base": "1", "ratio": "-1"}]}, "orbits[1].ratio"),
            ({"kind": "orbit_family", "orbits": [{"type": "ray_loop", "ratio": "1"}]}, "orbits[0].ratio"),
            ({"kind": "orbit_family", "orbits": [{"type": "cycle", "weights": ["1", "x"]}]}, "orbits[0].weights[1]"),
            ({"kind": "orbit_family", "orbits": [{"type": "spiral"}]}, "orbits[0].type"),
            ({"kind": "orbit_family", "orbits": [{"type": "fixed", "weight": "1", "extra": 1}]}, "orbits[0].extra"),
            ({"kind": "torus"}, "kind"),
            ({"points": []}, "kind"),
        ],
    )
    def test_positional_errors(self, doc, field):
        with pytest.raises(ValidationError) as exc:
            parse_instance(doc)
        assert exc.value.field == field

    def test_syntax_error_location(self):
        with pytest.raises(ParseError) as exc:
            loads('{"kind": "finite",\n  "points": [}')
        assert exc.value.location == "line 2, column 14"

    def test_preview_must_match_schedule(self):
        doc = render_instance(OrbitFamilyInstance((), LineFamily(Schedule.reciprocal())), preview=2)
        doc["line_family"]["preview"][1]["ratio"] = "1/3"
        with pytest.raises(ValidationError) as exc:
            parse_instance(doc)
        assert exc.value.field == "line_family.preview[1]"


class TestRoundTrip:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_generated_families(self, family):
        doc = generate(family)
        assert render_instance(parse_instance(doc), preview=len(doc.get("line_family", {}).get("preview", []))) == doc
        text = dumps(doc)
        assert parse_instance(loads(text)) == parse_instance(doc)

    def test_every_small_instance(self):
        for _, inst, _ in enumerate_instances(3, [0, 1, 2]):
            assert parse_instance(loads(dumps(render_instance(inst)))) == inst

    @given(finite_instances())
    def test_random_instances(self, inst):
        assert parse_instance(render_instance(inst)) == inst

    @pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
    def test_fixture_documents(self, path):
        doc = json.loads(path.read_text())
        inst = parse_instance(doc)
        preview = len(doc.get("line_family", {}).get("preview", []))
        assert dumps(render_instance(inst, preview)) == path.read_text()

    @pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
    def test_classification_reports(self, path):
        report = full_report(parse_instance(loads(path.read_text())))
        text = dumps(render_report(report))
        assert parse_report(loads(text)) == report
        assert dumps(render_report(parse_report(loads(text)))) == text

    @given(finite_instances())
    def test_random_reports(self, inst):
        report = full_report(inst)
        assert parse_report(loads(dumps(render_report(report)))) == report

    @pytest.mark.parametrize("family", ["cycle:2,2,2", "line:1,1/2", "unbounded_normal:0", "identity:4"])
    def test_decompositions(self, family):
        dec = shift_decomposition(parse_instance(generate(family)))
        assert parse_decomposition(loads(dumps(render_decomposition(dec)))) == dec

    def test_crosscheck_report(self):
        r = exhaustive_crosscheck(2, [0, 1, 2])
        assert parse_crosscheck(loads(dumps(render_crosscheck(r)))) == r

    @pytest.mark.parametrize(
        "value",
        [None, Fraction(-3, 7), CRat(Fraction(1, 2), 3), FinSuppFn({(0, 1): 2, (0, -1): CRat(0, 1)}), FinSuppFn({"a": 1})],
    )
    def test_values(self, value):
        assert parse_value(loads(dumps(render_value(value)))) == value


class TestGenerate:
    def test_cycle(self):
        inst = parse_instance(generate("cycle:1,1,1"))
        assert isinstance(inst, FiniteInstance) and len(inst.points) == 3

    def test_ray_loop(self):
        assert parse_instance(generate("ray_loop:2")) == OrbitFamilyInstance((RayLoop(2),))

    def test_collapse(self):
        assert parse_instance(generate("collapse:3")) == collapse()

    @pytest.mark.parametrize("family", ["ray_loop:1", "ray_loop:1/2", "identity:0", "identity:1/2", "cycle:1,0",
                                        "line:1", "collapse:1", "spiral:3", "identity:x"])
    def test_bad_parameters(self, family):
        with pytest.raises(BadParameters):
            generate(family)


class TestVectors:
    def test_pair_labels(self):
        inst = OrbitFamilyInstance((RayLoop(2),))
        assert parse_vector(inst, {"0:3": "1,-1"}) == FinSuppFn({(0, 3): CRat(1, -1)})

    def test_bad_value(self):
        with pytest.raises(ValidationError):
            parse_vector(collapse(), {"a": "one"})
