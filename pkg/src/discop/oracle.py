"""Brute-force ground truth: exact matrices of C_phi and its weighted adjoint.

On a finite instance, C_phi restricted to the support is the 0/1 matrix
M[y][x] = [phi(y) == x], and its adjoint in l^2(mu) is G^-1 M^H G with G the
diagonal Gram matrix of point masses.  Every normality class then becomes an
exact matrix identity.  Nothing here uses the closed-form formulas of
:mod:`discop.operator`, which is what makes the comparison meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, List, Sequence, Tuple

from .classify import (
    DEFAULT_NMAX,
    check_condition_31,
    check_symmetric,
    classify_normal,
    classify_quasinormal,
    formally_normal_on_basis,
    multiplicative_quasinormal_check,
)
from .core import FiniteInstance, Instance, all_points, check_nonsingular, is_finite_instance
from .errors import NotInSupport, NotNonsingular
from .operator import (
    FinSuppFn,
    apply_c_cstar_basis,
    apply_c_cstar_c_basis,
    apply_c_star,
    apply_cstar_c_basis,
    apply_cstar_c_c_basis,
)

Matrix = Tuple[Tuple[Fraction, ...], ...]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b)) if b else []
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


@dataclass(frozen=True)
class WeightedMatrixRep:
    basis: Tuple
    gram: Tuple[Fraction, ...]
    m_c: Matrix
    m_c_star: Matrix

    def index(self, x) -> int:
        try:
            return self.basis.index(x)
        except ValueError:
            raise NotInSupport(x) from None

    def column(self, m: Matrix, x) -> FinSuppFn:
        j = self.index(x)
        return FinSuppFn((self.basis[i], m[i][j]) for i in range(len(self.basis)))

    def pairing(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
        """<u, v>_mu for real coordinate vectors."""
        return sum((a * b * g for a, b, g in zip(u, v, self.gram)), Fraction(0))


def build_matrices(inst: Instance) -> WeightedMatrixRep:
    """Exact matrices of C and C* on the support of a finite instance."""
    if not is_finite_instance(inst):
        raise ValueError("the matrix oracle only handles finite instances")
    if isinstance(inst, FiniteInstance):
        bad = check_nonsingular(inst)
        if bad is not None:
            raise NotNonsingular(bad)
    basis = tuple(x for x in all_points(inst) if inst.weight(x) > 0)
    pos = {x: i for i, x in enumerate(basis)}
    gram = tuple(inst.weight(x) for x in basis)
    n = len(basis)
    m_c = tuple(
        tuple(Fraction(1) if inst.image(y) == x else Fraction(0) for x in basis) for y in basis
    )
    assert all(inst.image(y) in pos for y in basis)
    g = tuple(tuple(gram[i] if i == j else Fraction(0) for j in range(n)) for i in range(n))
    g_inv = tuple(tuple(1 / gram[i] if i == j else Fraction(0) for j in range(n)) for i in range(n))
    # entries are real, so the conjugate transpose is the transpose
    m_c_star = matmul(matmul(g_inv, transpose(m_c)), g)
    return WeightedMatrixRep(basis, gram, m_c, m_c_star)


def _products(rep: WeightedMatrixRep):
    m, s = rep.m_c, rep.m_c_star
    sm, ms = matmul(s, m), matmul(m, s)
    return sm, ms, matmul(sm, m), matmul(ms, m)


def oracle_normal(inst: Instance) -> bool:
    rep = build_matrices(inst)
    sm, ms, _, _ = _products(rep)
    return sm == ms


def oracle_quasinormal(inst: Instance) -> bool:
    rep = build_matrices(inst)
    _, _, smm, msm = _products(rep)
    return smm == msm


def oracle_symmetric(inst: Instance) -> bool:
    """C is symmetric in the mu-pairing exactly when M equals its weighted adjoint."""
    rep = build_matrices(inst)
    return rep.m_c == rep.m_c_star


def oracle_adjoint_column(inst: Instance, x) -> FinSuppFn:
    rep = build_matrices(inst)
    return rep.column(rep.m_c_star, x)


# --------------------------------------------------------------------------
# exhaustive cross-validation


CORE_PROPERTIES = ("normal", "quasinormal", "formally_normal", "symmetric")


@dataclass(frozen=True)
class Disagreement:
    index: int
    instance: FiniteInstance
    property: str
    classifier: str
    oracle: str


@dataclass(frozen=True)
class CrosscheckReport:
    max_points: int
    weight_grid: Tuple[Fraction, ...]
    instances_enumerated: int
    skipped_singular: int
    disagreements: Tuple[Disagreement, ...] = ()
    # how many instances each verdict held on, e.g. {"normal": 123}
    tallies: Tuple[Tuple[str, int], ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def disagreements_for(self, *properties: str) -> List[Disagreement]:
        return [d for d in self.disagreements if d.property in properties]


def enumerate_instances(max_points: int, weight_grid: Sequence) -> Iterator[Tuple[int, FiniteInstance, bool]]:
    """Every map on n = 1..max_points points with every weighting from the grid.

    Yields ``(index, instance, nonsingular)`` in lexicographic order of
    (n, phi, mu); the all-zero measure is skipped.
    """
    grid = sorted(Fraction(w) for w in weight_grid)
    index = 0
    for n in range(1, max_points + 1):
        pts = tuple(str(i) for i in range(n))
        for images in product(range(n), repeat=n):
            phi = {p: pts[i] for p, i in zip(pts, images)}
            for ws in product(grid, repeat=n):
                if not any(ws):
                    continue
                inst = FiniteInstance(pts, dict(zip(pts, ws)), phi)
                yield index, inst, check_nonsingular(inst) is None
                index += 1


_FORMULAS = (
    ("formula:c_star", lambda inst, x: apply_c_star(inst, FinSuppFn.basis(x)), "s"),
    ("formula:cstar_c", apply_cstar_c_basis, "sm"),
    ("formula:c_cstar", apply_c_cstar_basis, "ms"),
    ("formula:cstar_c_c", apply_cstar_c_c_basis, "smm"),
    ("formula:c_cstar_c", apply_c_cstar_c_basis, "msm"),
)


def crosscheck_instance(inst: FiniteInstance, n_max: int = DEFAULT_NMAX, formulas: bool = True):
    """Compare every classifier on one instance with the matrix oracle.

    Returns ``(mismatches, held)``: a list of ``(property, classifier, oracle)``
    triples and the names of the verdicts that held.
    """
    rep = build_matrices(inst)
    sm, ms, smm, msm = _products(rep)
    o_normal, o_quasi, o_sym = sm == ms, smm == msm, rep.m_c == rep.m_c_star

    normal = classify_normal(inst).ok
    quasi = classify_quasinormal(inst).ok
    formal = formally_normal_on_basis(inst).ok
    sym_v = check_symmetric(inst)
    sym = sym_v.ok
    cond31 = check_condition_31(inst).ok
    mult = multiplicative_quasinormal_check(inst, n_max).ok

    out = []

    def cmp(name, got, want):
        if got != want:
            out.append((name, str(got), str(want)))

    cmp("normal", normal, o_normal)
    cmp("quasinormal", quasi, o_quasi)
    cmp("formally_normal", formal, o_normal)
    cmp("symmetric", sym, o_sym)
    cmp("condition_31", cond31, normal)
    cmp("multiplicative", mult, quasi)
    cmp("finite_collapse", quasi, normal)
    if sym:
        cmp("symmetric_consequences", all(ok for _, ok in sym_v.checks) and normal, True)

    n = len(rep.basis)
    for i in range(n):
        for j in range(n):
            mu_col = [rep.m_c[k][i] for k in range(n)]
            sv_col = [rep.m_c_star[k][j] for k in range(n)]
            e_i = [Fraction(k == i) for k in range(n)]
            e_j = [Fraction(k == j) for k in range(n)]
            if rep.pairing(mu_col, e_j) != rep.pairing(e_i, sv_col):
                out.append(("adjoint_identity", f"{rep.basis[i]},{rep.basis[j]}", "pairing mismatch"))

    if formulas:
        mats = {"s": rep.m_c_star, "sm": sm, "ms": ms, "smm": smm, "msm": msm}
        for name, fn, key in _FORMULAS:
            for x in rep.basis:
                got = fn(inst, x)
                want = rep.column(mats[key], x)
                if got != want:
                    out.append((name, f"{x}: {got!r}", repr(want)))
    held = [k for k, v in (("normal", normal), ("quasinormal", quasi), ("symmetric", sym)) if v]
    return out, held


def exhaustive_crosscheck(
    max_points: int, weight_grid: Sequence, n_max: int = DEFAULT_NMAX, formulas: bool = True
) -> CrosscheckReport:
    """Run :func:`crosscheck_instance` on every instance of :func:`enumerate_instances`.

    Singular maps (positive mass sent onto a null point) do not define an
    operator; they are counted in ``skipped_singular`` and not classified.
    """
    if max_points < 1 or max_points > 5:
        raise ValueError("max_points must be between 1 and 5")
    grid = tuple(sorted({Fraction(w) for w in weight_grid}))
    if not any(w > 0 for w in grid):
        raise ValueError("the weight grid needs a positive value")
    if any(w < 0 for w in grid):
        raise ValueError("weights must be nonnegative")
    enumerated = skipped = 0
    disagreements = []
    tallies = {"normal": 0, "quasinormal": 0, "symmetric": 0}
    for index, inst, nonsingular in enumerate_instances(max_points, grid):
        if not nonsingular:
            skipped += 1
            continue
        enumerated += 1
        mismatches, held = crosscheck_instance(inst, n_max, formulas)
        for prop, got, want in mismatches:
            disagreements.append(Disagreement(index, inst, prop, got, want))
        for k in held:
            tallies[k] += 1
    return CrosscheckReport(
        max_points, grid, enumerated, skipped, tuple(disagreements), tuple(sorted(tallies.items()))
    )
