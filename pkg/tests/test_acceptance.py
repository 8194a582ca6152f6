"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed in the summary."""

import math
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

from discop import (
    BijectionTemplate,
    Cycle,
    FiniteInstance,
    GeometricSequences,
    Line,
    LineFamily,
    OrbitFamilyInstance,
    RayLoop,
    Schedule,
    almost_surjective,
    check_round_trip,
    check_symmetric,
    classify_normal,
    classify_quasinormal,
    construct_map_for_measure,
    construct_unbounded_normal_measure,
    formally_normal_on_basis,
    full_report,
    is_bounded,
    multiplicative_quasinormal_check,
    pushforward,
    radon_nikodym,
    shift_decomposition,
    verify_unitary_equivalence,
)
from discop.oracle import CORE_PROPERTIES, oracle_quasinormal
from discop.serialize import dumps, loads, parse_instance, parse_report, render_instance, render_report
from discop.verdict import Status

FIXTURES = sorted((Path(__file__).parent / "fixtures").glob("*.json"))
EXPECTED = Path(__file__).parent / "fixtures" / "expected"
WINDOW = 32


def test_exhaustive_oracle_agreement(suite_report, criterion):
    with criterion(1, "exhaustive oracle agreement on 4 points, grid {0,1,2}"):
        r = suite_report
        assert r.instances_enumerated + r.skipped_singular == sum(n**n * (3**n - 1) for n in range(1, 5))
        assert r.instances_enumerated == 10040
        assert r.disagreements_for(*CORE_PROPERTIES) == []


def test_basis_commutator_equivalence(suite_report, criterion):
    with criterion(2, "C C* = C* C on basis vectors <=> normal, on the suite"):
        assert suite_report.disagreements_for("condition_31") == []


def test_quasinormal_chain(suite_report, suite_instances, criterion):
    with criterion(3, "quasinormal <=> triple products <=> multiplicative(4); quasinormal = normal on finite"):
        assert suite_report.disagreements_for("quasinormal", "multiplicative", "finite_collapse") == []
        # direct restatement on a slice, independent of the crosscheck bookkeeping
        for inst in suite_instances[::37]:
            q = classify_quasinormal(inst).ok
            assert q == oracle_quasinormal(inst) == multiplicative_quasinormal_check(inst, 4).ok
            assert q == classify_normal(inst).ok


def test_formal_normality_equivalence(suite_report, criterion):
    with criterion(4, "formally normal on lin E = normal, suite plus named infinite families"):
        assert suite_report.disagreements_for("formally_normal") == []
        families = [OrbitFamilyInstance((Line(1, q),)) for q in (Fraction(1, 3), Fraction(1, 2), 1, 2)]
        families += [OrbitFamilyInstance((RayLoop(2),)), OrbitFamilyInstance((RayLoop(Fraction(3, 2)),))]
        for inst in families:
            assert formally_normal_on_basis(inst, WINDOW).ok == classify_normal(inst, WINDOW).ok
        assert [classify_normal(i, WINDOW).ok for i in families] == [True] * 4 + [False] * 2


def test_symmetric_consequences(suite_instances, criterion):
    with criterion(5, "symmetric => involution, sup h = 1, normal; weight mutation breaks symmetry"):
        symmetric = [i for i in suite_instances if check_symmetric(i).ok]
        assert symmetric
        mutated = 0
        for inst in symmetric:
            pos = [x for x in inst.points if inst.weight(x) > 0]
            assert all(inst.image(inst.image(x)) == x for x in pos)
            assert is_bounded(inst).sup_h.value == 1
            assert classify_normal(inst).holds
            for x in pos:
                y = inst.image(x)
                if y != x and inst.weight(x) == 1:
                    mu = dict(inst.mu, **{x: 2})
                    assert check_symmetric(FiniteInstance(inst.points, mu, inst.phi)).status is Status.FAILS
                    mutated += 1
        assert mutated > 0


def test_ray_loop_quasinormal_not_normal(criterion):
    with criterion(6, "RayLoop(2): quasinormal, not normal (phi(0) = phi(1)), bounded with sup h = 2"):
        inst = OrbitFamilyInstance((RayLoop(2),))
        members = inst.orbit_members(0, WINDOW)
        assert all(radon_nikodym(inst, x) == 2 for x in members)
        assert classify_quasinormal(inst, WINDOW).holds
        normal = classify_normal(inst, WINDOW)
        assert normal.status is Status.FAILS
        assert normal.witness.kind == "non_injective" and normal.witness.points == ((0, 0), (0, 1))
        assert almost_surjective(inst, WINDOW).holds
        b = is_bounded(inst, WINDOW)
        assert b.verdict.holds and b.sup_h.value == 2
        assert multiplicative_quasinormal_check(inst, 4, WINDOW).holds
        for x in members:
            for n in range(1, 5):
                assert radon_nikodym(inst, x) ** n == pushforward(inst, n, x) / inst.weight(x) == 2**n


def _normal_count(max_points: int, positive_values: int) -> int:
    # support of size k: a permutation of it with one weight per cycle, summed over
    # permutations that is (v)(v+1)...(v+k-1); null points map anywhere
    def rising(v, k):
        return math.prod(range(v, v + k))

    return sum(
        math.comb(n, k) * rising(positive_values, k) * n ** (n - k)
        for n in range(1, max_points + 1)
        for k in range(1, n + 1)
    )


def test_shift_decomposition_round_trip(suite_instances, criterion):
    with criterion(7, "normal instances rebuild from their shift decomposition, unitarily equivalent"):
        normal = [i for i in suite_instances if classify_normal(i).holds]
        assert len(normal) == _normal_count(4, 2) == 1740
        families = [OrbitFamilyInstance((Line(1, q),)) for q in (Fraction(1, 3), Fraction(1, 2), 1, 2)]
        families += [OrbitFamilyInstance((Cycle((2, 2, 2)), Line(3, Fraction(5, 7)))),
                     OrbitFamilyInstance((Cycle((1,)),), LineFamily(Schedule.reciprocal()))]
        for inst in normal + families:
            dec = shift_decomposition(inst, WINDOW)
            assert check_round_trip(inst, dec, WINDOW).holds
            assert verify_unitary_equivalence(inst, dec, WINDOW).holds


def test_unbounded_constructions(criterion):
    with criterion(8, "unbounded normal constructions: h strictly increasing on the first 16 lines"):
        a = construct_unbounded_normal_measure(BijectionTemplate())
        b = construct_map_for_measure(GeometricSequences(Schedule.power(Fraction(1, 2))))
        for inst, h_of in ((a, lambda i: i + 1), (b, lambda i: 2 ** (i + 1))):
            r = full_report(inst, WINDOW)
            assert r.normal.holds and r.sup_h.unbounded and r.bounded.status is Status.FAILS
            hs = [radon_nikodym(inst, (i, 0)) for i in range(16)]
            assert hs == [h_of(i) for i in range(16)]
            assert all(x < y for x, y in zip(hs, hs[1:]))
            assert not r.violations


def test_formula_fidelity(suite_report, criterion):
    with criterion(9, "adjoint and product formulas equal oracle matrix columns on every basis vector"):
        props = [f"formula:{op}" for op in ("c_star", "cstar_c", "c_cstar", "cstar_c_c", "c_cstar_c")]
        assert suite_report.disagreements_for(*props, "adjoint_identity") == []


def _classify_subprocess(path: Path, seed: str) -> bytes:
    env = dict(os.environ, PYTHONHASHSEED=seed)
    env.pop("DISCOP_DEFAULT_WINDOW", None)
    out = subprocess.run(
        [sys.executable, "-m", "discop.cli", "classify", "--format", "machine", str(path)],
        capture_output=True,
        env=env,
        check=True,
    )
    return out.stdout


def test_cli_determinism(criterion):
    with criterion(10, "machine reports byte-identical across runs; lossless round trips (20 fixtures)"):
        assert len(FIXTURES) == 20
        for path in FIXTURES:
            first, second = _classify_subprocess(path, "1"), _classify_subprocess(path, "2")
            assert first == second
            assert first == (EXPECTED / f"{path.stem}.classify.json").read_bytes()
            doc = loads(path.read_text())
            inst = parse_instance(doc)
            preview = len(doc.get("line_family", {}).get("preview", []))
            assert dumps(render_instance(inst, preview)) == path.read_text()
            report = parse_report(loads(first.decode()))
            assert dumps(render_report(report)).encode() == first
            assert report == full_report(inst)
