"""Decision procedures, with witnesses, for the normality classes of C_phi.

Every procedure returns a :class:`~discop.verdict.Verdict`.  ``HOLDS`` is a
theorem about the instance (finite and structured instances); on lazy
instances a passing check is only ``VERIFIED_ON_WINDOW``.  A ``FAILS`` verdict
always carries a witness whose two sides can be recomputed with the primitives
of :mod:`discop.operator`.  Witnesses are the least violating labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Optional, Tuple

from .core import (
    INFINITE_MASS,
    Cycle,
    FiniteInstance,
    FixedPoint,
    Instance,
    LazyInstance,
    Line,
    OrbitFamilyInstance,
    RayLoop,
    canonical_representative,
    check_nonsingular,
    is_finite_instance,
    probe_points,
    pushforward,
    resolve_window,
)
from .errors import InfiniteFiber, NotDenselyDefined, NotNonsingular
from .operator import (
    FinSuppFn,
    apply_c,
    apply_c_cstar_basis,
    apply_c_star,
    apply_cstar_c_basis,
    densely_defined,
    inner,
    norm_sq,
    radon_nikodym,
)
from .verdict import Status, Verdict, Witness

DEFAULT_NMAX = 4
# number of lines of an infinite family inspected when reporting unboundedness
FAMILY_PROBE = 16


@dataclass(frozen=True)
class SupH:
    """Supremum of the Radon-Nikodym derivative; ``value is None`` means unbounded."""

    value: Optional[Fraction]
    windowed: bool = False

    @property
    def unbounded(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        if self.value is None:
            return "unbounded"
        return f"{self.value} (window)" if self.windowed else str(self.value)


class Boundedness(NamedTuple):
    verdict: Verdict
    sup_h: SupH
    # anchors of pairwise disjoint infinite orbits along which h grows without bound
    anchors: Tuple = ()


def _guard(inst: Instance) -> None:
    if isinstance(inst, FiniteInstance):
        bad = check_nonsingular(inst)
        if bad is not None:
            raise NotNonsingular(bad)


def _dense(inst: Instance, window: Optional[int]) -> Verdict:
    _guard(inst)
    return densely_defined(inst, window) if isinstance(inst, LazyInstance) else Verdict(Status.HOLDS)


def _points(inst: Instance, window: Optional[int], depth: int = 0):
    w = resolve_window(inst, window)
    pts, exact = probe_points(inst, w, depth)
    return sorted(pts), exact, w


def _h(inst: Instance, x) -> Fraction:
    h = radon_nikodym(inst, x)
    if h is INFINITE_MASS:
        raise InfiniteFiber(x)
    return h


def _positive_fiber(inst: Instance, x) -> Tuple:
    f = inst.fiber(x)
    if f is INFINITE_MASS:
        raise InfiniteFiber(x)
    return tuple(sorted(y for y in f if inst.weight(y) > 0))


# --------------------------------------------------------------------------
# boundedness


def _orbit_sup(orb) -> Fraction:
    if isinstance(orb, FixedPoint):
        return Fraction(1)
    if isinstance(orb, Cycle):
        ws = orb.weights
        return max(ws[i - 1] / ws[i] for i in range(len(ws)))
    if isinstance(orb, Line):
        return 1 / orb.ratio
    return orb.ratio


def is_bounded(inst: Instance, window: Optional[int] = None) -> Boundedness:
    """Decide boundedness through sup h.

    Structured orbits use closed forms: 1 on fixed points, the largest
    mu(i-1)/mu(i) on a cycle, 1/q on a line and c on a ray loop.
    """
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        raise NotDenselyDefined(dense.witness.points[0])
    if isinstance(inst, OrbitFamilyInstance) and not inst.is_finite:
        sup = max((_orbit_sup(o) for o in inst.orbits), default=Fraction(0))
        if inst.family is None:
            return Boundedness(Verdict(Status.HOLDS), SupH(sup))
        m = len(inst.orbits)
        anchors = tuple((m + j, 0) for j in range(FAMILY_PROBE))
        hs = [_h(inst, a) for a in anchors]
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ValueError("line family ratios are not strictly decreasing")
        w = Witness(
            "unbounded",
            anchors,
            hs[-1],
            None,
            f"h = 1/q_j on line j increases strictly over the first {FAMILY_PROBE} lines and q_j -> 0",
        )
        return Boundedness(Verdict.fails(w), SupH(None), anchors)
    pts, exact, w = _points(inst, window)
    sup = max((_h(inst, x) for x in pts), default=Fraction(0))
    return Boundedness(Verdict.passed(exact, w), SupH(sup, windowed=not exact))


# --------------------------------------------------------------------------
# normality


def check_condition_31(inst: Instance, window: Optional[int] = None) -> Verdict:
    """C C* chi_x == C* C chi_x for every basis vector chi_x with x in the support."""
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        raise NotDenselyDefined(dense.witness.points[0])
    pts, exact, w = _points(inst, window)
    for x in pts:
        lhs = apply_c_cstar_basis(inst, x)
        rhs = apply_cstar_c_basis(inst, x)
        if lhs != rhs:
            return Verdict.fails(Witness("condition_31", (x,), lhs, rhs, "C C* chi_x != C* C chi_x"), w)
    return Verdict.passed(exact, w)


def _non_injective(inst: Instance, x, x2) -> Witness:
    # (C C* chi_x)(x2) = mu(x)/mu(phi(x)) while (C* C chi_x)(x2) = 0
    lhs = inst.weight(x) / inst.weight(inst.image(x))
    return Witness("non_injective", (x, x2), lhs, Fraction(0), "phi(x) = phi(x') for distinct support points")


def _uncovered(inst: Instance, x) -> Witness:
    lhs = inst.weight(x) / inst.weight(inst.image(x))
    return Witness("not_surjective", (x,), lhs, Fraction(0), "x has no preimage in the support")


def _classify_normal_finite(inst: FiniteInstance) -> Verdict:
    psi = canonical_representative(inst)
    pos = sorted(x for x in psi.points if psi.mu[x] > 0)
    first_with_image = {}
    for x in pos:
        y = psi.phi[x]
        if y in first_with_image:
            return Verdict.fails(_non_injective(psi, first_with_image[y], x))
        first_with_image[y] = x
    for x in pos:
        if x not in first_with_image:
            return Verdict.fails(_uncovered(psi, x))
    # bijective on the support: every orbit is a cycle, whose measure must be constant
    seen = set()
    for anchor in pos:
        if anchor in seen:
            continue
        x = anchor
        while True:
            seen.add(x)
            y = psi.phi[x]
            if psi.mu[x] != psi.mu[y]:
                return Verdict.fails(
                    Witness("cycle_weight", (x, y), psi.mu[x], psi.mu[y], "a finite orbit must have constant measure")
                )
            x = y
            if x == anchor:
                break
    return Verdict(Status.HOLDS)


def _classify_normal_structured(inst: OrbitFamilyInstance) -> Verdict:
    for oid, orb in enumerate(inst.orbits):
        if isinstance(orb, RayLoop):
            return Verdict.fails(_non_injective(inst, (oid, 0), (oid, 1)))
        if isinstance(orb, Cycle):
            n = len(orb.weights)
            for i in range(n):
                j = (i + 1) % n
                if orb.weights[i] != orb.weights[j]:
                    return Verdict.fails(
                        Witness(
                            "cycle_weight",
                            ((oid, i), (oid, j)),
                            orb.weights[i],
                            orb.weights[j],
                            "a finite orbit must have constant measure",
                        )
                    )
    # fixed points and lines (including the whole tail family) are geometric orbits
    return Verdict(Status.HOLDS)


def _classify_normal_local(inst: Instance, window: Optional[int]) -> Verdict:
    pts, exact, w = _points(inst, window)
    for x in pts:
        pre = _positive_fiber(inst, x)
        if len(pre) >= 2:
            return Verdict.fails(_non_injective(inst, pre[0], pre[1]), w)
        if not pre:
            return Verdict.fails(_uncovered(inst, x), w)
    for x in pts:
        (p,) = _positive_fiber(inst, x)
        y = inst.image(x)
        lhs = inst.weight(p) / inst.weight(x)
        rhs = inst.weight(x) / inst.weight(y)
        if lhs != rhs:
            return Verdict.fails(
                Witness("orbit_ratio", (x,), lhs, rhs, "mu(psi^-1 x)/mu(x) != mu(x)/mu(psi x): orbit not geometric"),
                w,
            )
    return Verdict.passed(exact, w)


def classify_normal(inst: Instance, window: Optional[int] = None) -> Verdict:
    """Normality: the canonical map is bijective on the support and every orbit is geometric.

    Finite orbits must carry constant measure.  Lines are geometric by
    construction.  On lazy instances the local form of the ratio condition,
    mu(psi^{-1}(x))/mu(x) = mu(x)/mu(psi(x)), is checked on the window.
    """
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        return dense
    if isinstance(inst, FiniteInstance):
        return _classify_normal_finite(inst)
    if isinstance(inst, OrbitFamilyInstance):
        return _classify_normal_structured(inst)
    return _classify_normal_local(inst, window)


def formally_normal_on_basis(inst: Instance, window: Optional[int] = None) -> Verdict:
    """Formal normality of C restricted to lin E.

    By polarization, ||C f|| = ||C* f|| on lin E is the same as equality of the
    Gram forms <C chi_x, C chi_y> and <C* chi_x, C* chi_y> on basis pairs.  The
    diagonal compares norms; off the diagonal only pairs with phi(x) = phi(y)
    can be nonzero.
    """
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        raise NotDenselyDefined(dense.witness.points[0])
    pts, exact, w = _points(inst, window)
    for x in pts:
        ex = FinSuppFn.basis(x)
        cx, sx = apply_c(inst, ex), apply_c_star(inst, ex)
        lhs, rhs = norm_sq(inst, cx), norm_sq(inst, sx)
        if lhs != rhs:
            return Verdict.fails(Witness("norm", (x,), lhs, rhs, "||C chi_x||^2 != ||C* chi_x||^2"), w)
        for y in _positive_fiber(inst, inst.image(x)):
            if y == x:
                continue
            ey = FinSuppFn.basis(y)
            lhs = inner(inst, cx, apply_c(inst, ey))
            rhs = inner(inst, sx, apply_c_star(inst, ey))
            if lhs != rhs:
                return Verdict.fails(
                    Witness("pairing", (x, y), lhs, rhs, "<C chi_x, C chi_y> != <C* chi_x, C* chi_y>"), w
                )
    return Verdict.passed(exact, w)


# --------------------------------------------------------------------------
# quasinormality


def classify_quasinormal(inst: Instance, window: Optional[int] = None) -> Verdict:
    """Quasinormality: finite fiber masses and h(y) = h(x) whenever phi(y) = x."""
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        return dense
    pts, exact, w = _points(inst, window, depth=1)
    for x in pts:
        hx = _h(inst, x)
        for y in _positive_fiber(inst, x):
            hy = radon_nikodym(inst, y)
            if hy is INFINITE_MASS:
                return Verdict.fails(Witness("infinite_fiber", (y,), INFINITE_MASS, None, "fiber mass is infinite"), w)
            if hy != hx:
                return Verdict.fails(Witness("fiber_derivative", (y, x), hy, hx, "h(y) != h(phi(y))"), w)
    return Verdict.passed(exact, w)


def multiplicative_quasinormal_check(inst: Instance, n_max: int = DEFAULT_NMAX, window: Optional[int] = None) -> Verdict:
    """h(x)**n == mu(phi^{-n}(x))/mu(x) for every support point x and 1 <= n <= n_max."""
    if n_max < 1:
        raise ValueError("n_max must be a positive integer")
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        return dense
    pts, exact, w = _points(inst, window, depth=n_max)
    for x in pts:
        hx = _h(inst, x)
        wx = inst.weight(x)
        for n in range(1, n_max + 1):
            m = pushforward(inst, n, x)
            if m is INFINITE_MASS:
                raise InfiniteFiber(x)
            lhs, rhs = hx**n, m / wx
            if lhs != rhs:
                return Verdict.fails(Witness("multiplicative", (x,), lhs, rhs, "h(x)^n != h_{phi^n}(x)", order=n), w)
    return Verdict.passed(exact, w)


def almost_surjective(inst: Instance, window: Optional[int] = None) -> Verdict:
    """mu(X \\ phi(X)) = 0: every support point has a preimage of positive measure."""
    _guard(inst)
    pts, exact, w = _points(inst, window)
    for x in pts:
        f = inst.fiber(x)
        if f is INFINITE_MASS:
            continue
        if not any(inst.weight(y) > 0 for y in f):
            return Verdict.fails(Witness("not_in_image", (x,), inst.weight(x), Fraction(0), "x is not in phi(X)"), w)
    return Verdict.passed(exact, w)


# --------------------------------------------------------------------------
# symmetry


def check_symmetric(inst: Instance, window: Optional[int] = None) -> Verdict:
    """<C chi_x, chi_y> == <chi_x, C chi_y> for all support points x, y.

    When that holds the verdict also lists, in ``checks``, the structural
    consequences that must follow, so a report can show them side by side.
    """
    dense = _dense(inst, window)
    if dense.status is Status.FAILS:
        raise NotDenselyDefined(dense.witness.points[0])
    pts, exact, w = _points(inst, window, depth=1)
    for x in pts:
        ex = FinSuppFn.basis(x)
        cx = apply_c(inst, ex)
        candidates = set(_positive_fiber(inst, x)) | {inst.image(x)}
        for y in sorted(candidates):
            ey = FinSuppFn.basis(y)
            lhs = inner(inst, cx, ey)
            rhs = inner(inst, ex, apply_c(inst, ey))
            if lhs != rhs:
                return Verdict.fails(Witness("symmetry", (x, y), lhs, rhs, "<C chi_x, chi_y> != <chi_x, C chi_y>"), w)
    involution = all(inst.image(inst.image(x)) == x for x in pts)
    preserves = all(inst.weight(inst.image(x)) == inst.weight(x) for x in pts)
    sup = is_bounded(inst, window).sup_h
    sup_one = sup.value == 1 or (not pts and sup.value == 0)
    checks = (("phi_involution", involution), ("mu_preserved", preserves), ("sup_h_is_1", sup_one))
    return Verdict.passed(exact, w, checks)


# --------------------------------------------------------------------------
# aggregate report


@dataclass(frozen=True)
class ClassificationReport:
    densely_defined: Verdict
    bounded: Verdict
    normal: Verdict
    quasinormal: Verdict
    formally_normal_on_basis: Verdict
    symmetric: Verdict
    almost_surjective: Verdict
    condition_31: Verdict
    multiplicative: Verdict
    sup_h: SupH
    infinite_orbit_witnesses: Tuple = ()
    window: Optional[int] = None
    n_max: int = DEFAULT_NMAX
    consistency: Tuple[Tuple[str, bool], ...] = field(default=())

    @property
    def violations(self) -> List[str]:
        return [name for name, ok in self.consistency if not ok]

    @property
    def windowed(self) -> bool:
        return any(
            getattr(self, name).status is Status.VERIFIED_ON_WINDOW
            for name in VERDICT_FIELDS
        ) or self.sup_h.windowed


VERDICT_FIELDS = (
    "densely_defined",
    "bounded",
    "normal",
    "quasinormal",
    "formally_normal_on_basis",
    "symmetric",
    "almost_surjective",
    "condition_31",
    "multiplicative",
)


def _definite(v: Verdict) -> bool:
    return v.status is not Status.VERIFIED_ON_WINDOW


def _consistency(r: dict, finite: bool) -> Tuple[Tuple[str, bool], ...]:
    out = []

    def implies(name, a, b):
        if a.holds:
            out.append((name, b.ok))

    def equiv(name, a, b):
        if _definite(a) and _definite(b):
            out.append((name, a.ok == b.ok))

    implies("normal => quasinormal", r["normal"], r["quasinormal"])
    implies("normal => formally_normal_on_basis", r["normal"], r["formally_normal_on_basis"])
    implies("symmetric => bounded", r["symmetric"], r["bounded"])
    implies("quasinormal => almost_surjective", r["quasinormal"], r["almost_surjective"])
    equiv("condition_31 <=> normal", r["condition_31"], r["normal"])
    equiv("formally_normal_on_basis <=> normal", r["formally_normal_on_basis"], r["normal"])
    if finite:
        equiv("quasinormal <=> normal (finite)", r["quasinormal"], r["normal"])
    sym = r["symmetric"]
    if sym.holds:
        out.extend((f"symmetric => {name}", ok) for name, ok in sym.checks)
        out.append(("symmetric => normal", r["normal"].ok))
    return tuple(out)


def full_report(inst: Instance, window: Optional[int] = None, n_max: int = DEFAULT_NMAX) -> ClassificationReport:
    """Run every decision procedure and cross-check the implications between them.

    Implications are only evaluated when their premise holds exactly and
    equivalences only when both sides are definite; any violation is reported
    in ``consistency`` and never reconciled.
    """
    _guard(inst)
    w = resolve_window(inst, window)
    dense = densely_defined(inst, w) if isinstance(inst, LazyInstance) else Verdict(Status.HOLDS)
    r = {"densely_defined": dense}
    anchors: Tuple = ()
    if dense.status is Status.FAILS:
        for name in VERDICT_FIELDS[1:]:
            if name != "almost_surjective":
                r[name] = dense
        sup = SupH(None)
    else:
        b = is_bounded(inst, w)
        r["bounded"], sup = b.verdict, b.sup_h
        r["normal"] = classify_normal(inst, w)
        r["quasinormal"] = classify_quasinormal(inst, w)
        r["formally_normal_on_basis"] = formally_normal_on_basis(inst, w)
        r["symmetric"] = check_symmetric(inst, w)
        r["condition_31"] = check_condition_31(inst, w)
        r["multiplicative"] = multiplicative_quasinormal_check(inst, n_max, w)
        if r["normal"].holds and b.verdict.status is Status.FAILS:
            anchors = b.anchors
    r["almost_surjective"] = almost_surjective(inst, w)
    consistency = _consistency(r, is_finite_instance(inst))
    if anchors:
        ids = [a[0] for a in anchors]
        consistency += (("infinite orbit witnesses are disjoint", len(set(ids)) == len(ids)),)
    return ClassificationReport(
        sup_h=sup,
        infinite_orbit_witnesses=anchors,
        window=w,
        n_max=n_max,
        consistency=consistency,
        **r,
    )
