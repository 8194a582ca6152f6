from fractions import Fraction
from math import comb

import pytest
from hypothesis import given

from builders import collapse, cycle, finite_instances, identity
from discop import FinSuppFn, FiniteInstance, OrbitFamilyInstance, RayLoop, apply_c_star, build_matrices
from discop.errors import NotNonsingular
from discop.oracle import (
    crosscheck_instance,
    enumerate_instances,
    exhaustive_crosscheck,
    oracle_adjoint_column,
    oracle_normal,
    oracle_quasinormal,
    oracle_symmetric,
)


def expected_nonsingular_count(max_points: int, positive_values: int) -> int:
    # k positive points: positive points map into the support, null points anywhere
    return sum(
        comb(n, k) * positive_values**k * k**k * n ** (n - k)
        for n in range(1, max_points + 1)
        for k in range(1, n + 1)
    )


def swap(wa, wb):
    return FiniteInstance("ab", {"a": wa, "b": wb}, {"a": "b", "b": "a"})


class TestMatrices:
    def test_identity(self):
        rep = build_matrices(FiniteInstance("ab", {"a": 1, "b": 1}, {"a": "a", "b": "b"}))
        assert rep.m_c == ((1, 0), (0, 1))

    def test_weighted_swap(self):
        rep = build_matrices(swap(1, 2))
        assert rep.m_c == ((0, 1), (1, 0))
        assert rep.m_c_star == ((0, 2), (Fraction(1, 2), 0))

    def test_collapse_single_column(self):
        rep = build_matrices(collapse())
        assert [row[2] for row in rep.m_c] == [1, 1, 1]
        assert all(row[0] == row[1] == 0 for row in rep.m_c)

    def test_singular_rejected(self):
        with pytest.raises(NotNonsingular):
            build_matrices(FiniteInstance("ab", {"a": 1, "b": 0}, {"a": "b", "b": "b"}))

    def test_infinite_rejected(self):
        with pytest.raises(ValueError):
            build_matrices(OrbitFamilyInstance((RayLoop(2),)))

    @given(finite_instances())
    def test_adjoint_pairing(self, inst):
        rep = build_matrices(inst)
        n = len(rep.basis)
        for i in range(n):
            for j in range(n):
                # <M e_i, e_j> = <e_i, M* e_j>
                assert rep.m_c[j][i] * rep.gram[j] == rep.m_c_star[i][j] * rep.gram[i]


class TestPredicates:
    def test_normal(self):
        assert oracle_normal(identity())
        assert not oracle_normal(cycle(1, 2, 4))
        assert oracle_normal(cycle(1, 1, 1))

    def test_quasinormal(self):
        assert oracle_quasinormal(identity())
        assert not oracle_quasinormal(collapse())

    def test_symmetric(self):
        assert oracle_symmetric(swap(1, 1))
        assert not oracle_symmetric(swap(1, 2))

    def test_adjoint_column(self):
        assert oracle_adjoint_column(swap(1, 2), "a") == FinSuppFn({"b": Fraction(1, 2)})
        assert oracle_adjoint_column(identity(), "1") == FinSuppFn.basis("1")

    def test_adjoint_column_lands_on_image(self):
        # C* chi_a sits on phi(a) = c with coefficient mu(a)/mu(c)
        assert oracle_adjoint_column(collapse(), "a") == FinSuppFn({"c": 1})

    @given(finite_instances())
    def test_finite_collapse(self, inst):
        assert oracle_quasinormal(inst) == oracle_normal(inst)

    @given(finite_instances())
    def test_columns_match_adjoint(self, inst):
        for x in inst.points:
            if inst.weight(x) > 0:
                assert oracle_adjoint_column(inst, x) == apply_c_star(inst, FinSuppFn.basis(x))


class TestCrosscheck:
    def test_single_point(self):
        r = exhaustive_crosscheck(1, [1])
        assert (r.instances_enumerated, r.skipped_singular, r.disagreements) == (1, 0, ())

    def test_three_points(self):
        r = exhaustive_crosscheck(3, [0, 1, 2])
        assert r.ok
        total = sum(n**n * (3**n - 1) for n in range(1, 4))
        assert r.instances_enumerated == expected_nonsingular_count(3, 2) == 440
        assert r.instances_enumerated + r.skipped_singular == total

    def test_enumeration_is_stable(self):
        first = [(i, inst) for i, inst, _ in enumerate_instances(2, [0, 1])]
        assert first == [(i, inst) for i, inst, _ in enumerate_instances(2, [0, 1])]
        assert first[0][1] == FiniteInstance(["0"], {"0": 1}, {"0": "0"})

    @pytest.mark.parametrize("grid", [[0], [-1, 1]])
    def test_rejects_bad_grid(self, grid):
        with pytest.raises(ValueError):
            exhaustive_crosscheck(2, grid)

    def test_rejects_too_many_points(self):
        with pytest.raises(ValueError):
            exhaustive_crosscheck(6, [1])

    @given(finite_instances(max_points=6))
    def test_agreement_beyond_the_suite(self, inst):
        mismatches, _ = crosscheck_instance(inst)
        assert mismatches == []
