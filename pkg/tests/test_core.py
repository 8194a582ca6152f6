from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from builders import collapse, cycle, finite_instances
from discop import (
    INFINITE_MASS,
    CallbackInstance,
    CRat,
    Cycle,
    FiniteInstance,
    FixedPoint,
    Line,
    LineFamily,
    OrbitFamilyInstance,
    RayLoop,
    Schedule,
    canonical_representative,
    check_nonsingular,
    pushforward,
    support,
)
from discop.core import as_rat, probe_points, resolve_window
from discop.errors import MissingWindow, NotNonsingular, ValidationError


class TestRationals:
    @pytest.mark.parametrize("text, value", [("3", Fraction(3)), ("1/2", Fraction(1, 2)), (" 4/6 ", Fraction(2, 3))])
    def test_parses_exact_forms(self, text, value):
        assert as_rat(text) == value

    @pytest.mark.parametrize("text", ["0.5", "1e3", "x", "1/0", ""])
    def test_rejects_inexact_or_garbage(self, text):
        with pytest.raises(ValidationError):
            as_rat(text, field_name="mu")

    def test_rejects_bool(self):
        with pytest.raises(ValidationError):
            as_rat(True)

    def test_complex_round_trip(self):
        z = CRat.parse("1/2,-3")
        assert (z.re, z.im) == (Fraction(1, 2), Fraction(-3))
        assert CRat.parse(str(z)) == z
        assert CRat.parse("7") == 7

    def test_complex_arithmetic(self):
        z = CRat(Fraction(1), Fraction(1))
        assert z * z.conjugate() == 2
        assert z.abs2() == 2
        assert z - z == 0


class TestFiniteInstance:
    def test_validates_phi_targets(self):
        with pytest.raises(ValidationError) as exc:
            FiniteInstance(["a"], {"a": 1}, {"a": "z"})
        assert exc.value.field == "phi"

    def test_validates_totality_and_sign(self):
        with pytest.raises(ValidationError):
            FiniteInstance(["a", "b"], {"a": 1}, {"a": "a", "b": "a"})
        with pytest.raises(ValidationError):
            FiniteInstance(["a"], {"a": -1}, {"a": "a"})
        with pytest.raises(ValidationError):
            FiniteInstance(["a", "a"], {"a": 1}, {"a": "a"})

    def test_fiber(self):
        assert collapse().fiber("c") == ("a", "b", "c")
        assert collapse().fiber("a") == ()


class TestSupport:
    def test_drops_null_points(self):
        inst = FiniteInstance("ab", {"a": 1, "b": 0}, {"a": "a", "b": "a"})
        assert set(support(inst)) == {"a"}

    def test_all_null(self):
        inst = FiniteInstance("ab", {"a": 0, "b": 0}, {"a": "a", "b": "b"})
        assert support(inst) == ()

    def test_line_window(self):
        inst = OrbitFamilyInstance((Line(1, Fraction(1, 2)),))
        pts = support(inst, 5)
        assert len(pts) == 5
        assert all(inst.weight(x) > 0 for x in pts)


class TestNonsingular:
    def test_mass_into_null_atom(self):
        inst = FiniteInstance("ab", {"a": 1, "b": 0}, {"a": "b", "b": "b"})
        assert check_nonsingular(inst) == "b"

    def test_null_into_support_is_fine(self):
        inst = FiniteInstance("ab", {"a": 1, "b": 0}, {"a": "a", "b": "a"})
        assert check_nonsingular(inst) is None

    @given(finite_instances())
    def test_positive_weights_are_nonsingular(self, inst):
        positive = FiniteInstance(inst.points, {p: 1 for p in inst.points}, inst.phi)
        assert check_nonsingular(positive) is None


class TestCanonicalRepresentative:
    def test_null_point_fixed(self):
        inst = FiniteInstance("ab", {"a": 1, "b": 0}, {"a": "a", "b": "a"})
        assert canonical_representative(inst).phi == {"a": "a", "b": "b"}

    def test_only_null_points_change(self):
        inst = FiniteInstance("abc", {"a": 1, "b": 1, "c": 0}, {"a": "b", "b": "a", "c": "a"})
        assert canonical_representative(inst).phi == {"a": "b", "b": "a", "c": "c"}

    def test_unchanged_when_all_positive(self):
        assert canonical_representative(collapse()) == collapse()

    def test_singular_raises(self):
        with pytest.raises(NotNonsingular):
            canonical_representative(FiniteInstance("ab", {"a": 1, "b": 0}, {"a": "b", "b": "b"}))

    @given(finite_instances())
    def test_agrees_on_support(self, inst):
        psi = canonical_representative(inst)
        for x in inst.points:
            if inst.weight(x) > 0:
                assert psi.image(x) == inst.image(x)
            else:
                assert psi.image(x) == x


class TestPushforward:
    def test_cycle(self):
        assert pushforward(cycle(1, 2, 4), 1, "0") == 4

    def test_collapse(self):
        assert pushforward(collapse(), 1, "c") == 3

    def test_ray_loop(self):
        assert pushforward(OrbitFamilyInstance((RayLoop(2),)), 2, (0, 0)) == 4

    @given(st.integers(1, 6), st.integers(0, 6))
    def test_ray_loop_closed_form_matches_sum(self, n, k):
        inst = OrbitFamilyInstance((RayLoop(3),))
        orb = inst.orbits[0]
        # points j with max(j - n, 0) == k
        expected = sum(orb.mass(j) for j in range(0, k + n + 1) if max(j - n, 0) == k)
        assert pushforward(inst, n, (0, k)) == expected

    @given(finite_instances(), st.integers(1, 4))
    def test_finite_matches_iterated_image(self, inst, n):
        def iterate(y):
            for _ in range(n):
                y = inst.image(y)
            return y

        for x in inst.points:
            expected = sum((inst.weight(y) for y in inst.points if iterate(y) == x), Fraction(0))
            assert pushforward(inst, n, x) == expected

    def test_lazy_infinite_fiber(self):
        lazy = CallbackInstance(
            weight=lambda x: Fraction(1),
            image=lambda x: 0,
            fiber=lambda x: INFINITE_MASS if x == 0 else (),
            enumerate=lambda n: tuple(range(n)),
        )
        assert pushforward(lazy, 1, 0) is INFINITE_MASS


class TestOrbitSpecs:
    def test_ray_loop_masses(self):
        r = RayLoop(Fraction(3, 2))
        assert [r.mass(k) for k in range(3)] == [1, Fraction(1, 2), Fraction(3, 4)]
        assert r.fiber(0) == (0, 1)

    @pytest.mark.parametrize("ratio", ["1", "1/2", "0"])
    def test_ray_loop_needs_ratio_above_one(self, ratio):
        with pytest.raises(ValidationError):
            RayLoop(ratio)

    def test_line_image_and_fiber(self):
        line = Line(2, Fraction(1, 3))
        assert line.image(-4) == -3
        assert line.fiber(0) == (-1,)
        assert line.mass(-1) == 6

    def test_cycle_needs_positive_weights(self):
        with pytest.raises(ValidationError):
            Cycle((1, 0))

    def test_family_requires_ratios_to_vanish(self):
        with pytest.raises(ValidationError):
            LineFamily(Schedule.linear())
        assert LineFamily(Schedule.power("1/2")).orbit(2).ratio == Fraction(1, 8)

    def test_schedule_inversion(self):
        assert Schedule.linear().inverted() == Schedule.reciprocal()
        assert Schedule.power(2).inverted().ratio(0) == Fraction(1, 2)


class TestEnumeration:
    def test_dovetail_reaches_every_orbit(self):
        inst = OrbitFamilyInstance((FixedPoint(1),), LineFamily(Schedule.reciprocal()))
        labels = inst.enumerate(30)
        assert len(set(labels)) == 30
        assert {oid for oid, _ in labels} >= {0, 1, 2, 3}

    def test_finite_family_enumerates_everything(self):
        inst = OrbitFamilyInstance((FixedPoint(1), Cycle((1, 2, 3))))
        assert sorted(inst.enumerate(100)) == [(0, 0), (1, 0), (1, 1), (1, 2)]

    def test_lazy_requires_window(self):
        lazy = CallbackInstance(lambda x: Fraction(1), lambda x: x, lambda x: (x,), lambda n: tuple(range(n)))
        with pytest.raises(MissingWindow):
            resolve_window(lazy, None, "classify")
        pts, exact = probe_points(lazy, 4)
        assert pts == (0, 1, 2, 3) and not exact

    def test_finite_probe_is_exact(self):
        pts, exact = probe_points(collapse(), None)
        assert exact and set(pts) == {"a", "b", "c"}
