"""Orbits of bijective maps and the decomposition of normal C_phi into shifts.

A normal composition operator splits along the orbits of its canonical map.
Each orbit block is unitarily equivalent to a backward shift S chi_{k+1} = chi_k
on l^2(gamma), where gamma is the (constant or geometric) measure read along
the orbit.  Orbit member phi^k(anchor) is sent to shift index k+1; on a cycle
of length n the indices are taken mod n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .core import (
    DEFAULT_WINDOW,
    INFINITE_MASS,
    Cycle,
    FiniteInstance,
    FixedPoint,
    Instance,
    LazyInstance,
    Line,
    LineFamily,
    OrbitFamilyInstance,
    RayLoop,
    Schedule,
    canonical_representative,
    check_nonsingular,
    resolve_window,
)
from .classify import FAMILY_PROBE, classify_normal
from .errors import (
    MalformedDecomposition,
    NotBijectiveOnSupport,
    NotDenselyDefined,
    NotNonsingular,
    NotNormal,
    RatiosNotDivergent,
    TemplateLacksInfiniteOrbits,
)
from .operator import FinSuppFn, apply_c
from .verdict import Status, Verdict, Witness

FIXED_POINT = "fixed_point"
CYCLE = "cycle"
INFINITE_LINE = "infinite_line"


@dataclass(frozen=True)
class OrbitRecord:
    """One orbit; ``members[j]`` is phi^(start + j)(anchor)."""

    anchor: object
    kind: str
    members: Tuple
    ratio: Fraction = Fraction(1)
    start: int = 0

    @property
    def length(self) -> Optional[int]:
        return None if self.kind == INFINITE_LINE else len(self.members)


@dataclass(frozen=True)
class ShiftBlock:
    """One summand of the decomposition.

    ``weights`` is the constant tuple gamma for a finite orbit; an infinite
    orbit has ``base = mu(anchor) = gamma(1)`` and ``ratio`` q, so that
    gamma(i) = base * q**(i - 1).  ``indices[j]`` is the shift index assigned
    to ``members[j]``.
    """

    anchor: object
    kind: str
    members: Tuple
    indices: Tuple[int, ...]
    weights: Optional[Tuple[Fraction, ...]] = None
    base: Optional[Fraction] = None
    ratio: Optional[Fraction] = None

    @property
    def finite(self) -> bool:
        return self.weights is not None

    def gamma(self, i: int) -> Fraction:
        if self.finite:
            return self.weights[i % len(self.weights)]
        return self.base * self.ratio ** (i - 1)

    def shift(self, i: int) -> int:
        """Index of S chi_{i}: i - 1, cyclically on finite blocks."""
        return (i - 1) % len(self.weights) if self.finite else i - 1

    def relabeling(self) -> Dict[object, int]:
        return dict(zip(self.members, self.indices))


@dataclass(frozen=True)
class ShiftDecomposition:
    """Blocks for explicit orbits, plus the infinite tail of geometric lines if any.

    The j-th tail line is the block ``Line(tail.base, q_j)`` anchored at
    ``(tail_offset + j, 0)``.
    """

    blocks: Tuple[ShiftBlock, ...] = ()
    tail: Optional[LineFamily] = None
    tail_offset: int = 0
    window: Optional[int] = None
    exact: bool = True

    @property
    def anchors(self) -> Tuple:
        return tuple(b.anchor for b in self.blocks)

    def tail_block(self, j: int, window: int) -> ShiftBlock:
        line = self.tail.orbit(j)
        return _line_block((self.tail_offset + j, 0), line, window)


# --------------------------------------------------------------------------
# orbits


def _bijectivity_witness(inst: Instance, pts) -> Optional[Tuple]:
    first: Dict = {}
    for x in pts:
        y = inst.image(x)
        if y in first:
            return (first[y], x)
        first[y] = x
    return None


def _finite_orbits(inst: FiniteInstance) -> List[OrbitRecord]:
    bad = check_nonsingular(inst)
    if bad is not None:
        raise NotNonsingular(bad)
    psi = canonical_representative(inst)
    pos = sorted(x for x in psi.points if psi.mu[x] > 0)
    pair = _bijectivity_witness(psi, pos)
    if pair is not None:
        raise NotBijectiveOnSupport(pair)
    records, seen = [], set()
    for anchor in pos:
        if anchor in seen:
            continue
        members, x = [], anchor
        while True:
            members.append(x)
            seen.add(x)
            x = psi.phi[x]
            if x == anchor:
                break
        kind = FIXED_POINT if len(members) == 1 else CYCLE
        records.append(OrbitRecord(anchor, kind, tuple(members)))
    return records


def _line_members(oid: int, w: int) -> Tuple:
    return tuple((oid, k) for k in range(-w, w + 1))


def _structured_orbits(inst: OrbitFamilyInstance, w: int, with_tail: bool) -> List[OrbitRecord]:
    records = []
    for oid, orb in enumerate(inst.orbits):
        if isinstance(orb, RayLoop):
            raise NotBijectiveOnSupport(((oid, 0), (oid, 1)))
        if isinstance(orb, FixedPoint):
            records.append(OrbitRecord((oid, 0), FIXED_POINT, ((oid, 0),)))
        elif isinstance(orb, Cycle):
            kind = FIXED_POINT if orb.size == 1 else CYCLE
            records.append(OrbitRecord((oid, 0), kind, tuple((oid, k) for k in range(orb.size))))
        else:
            records.append(OrbitRecord((oid, 0), INFINITE_LINE, _line_members(oid, w), orb.ratio, -w))
    if with_tail and inst.family is not None:
        m = len(inst.orbits)
        for j in range(w):
            q = inst.family.orbit(j).ratio
            records.append(OrbitRecord((m + j, 0), INFINITE_LINE, _line_members(m + j, w), q, -w))
    return records


def _lazy_orbits(inst: LazyInstance, w: int) -> List[OrbitRecord]:
    pts = sorted(x for x in inst.enumerate(w) if inst.weight(x) > 0)

    def preimage(x):
        f = inst.fiber(x)
        if f is INFINITE_MASS:
            raise NotDenselyDefined(x)
        pre = sorted(y for y in f if inst.weight(y) > 0)
        if len(pre) >= 2:
            raise NotBijectiveOnSupport((pre[0], pre[1]))
        if not pre:
            raise NotBijectiveOnSupport((x,))
        return pre[0]

    for x in pts:
        preimage(x)
    records, seen = [], set()
    for anchor in pts:
        if anchor in seen:
            continue
        forward, x = [anchor], inst.image(anchor)
        while x != anchor and len(forward) <= w:
            forward.append(x)
            x = inst.image(x)
        if x == anchor:
            seen.update(forward)
            kind = FIXED_POINT if len(forward) == 1 else CYCLE
            records.append(OrbitRecord(anchor, kind, tuple(forward)))
            continue
        backward, x = [], anchor
        for _ in range(w):
            x = preimage(x)
            backward.append(x)
        members = tuple(reversed(backward)) + tuple(forward)
        seen.update(members)
        ratio = inst.weight(inst.image(anchor)) / inst.weight(anchor)
        records.append(OrbitRecord(anchor, INFINITE_LINE, members, ratio, -len(backward)))
    return records


def orbits(inst: Instance, window: Optional[int] = None) -> List[OrbitRecord]:
    """Partition the support into orbits of the canonical map.

    Raises :class:`NotBijectiveOnSupport` with a pair of support points sharing
    an image (or a point without preimage) when the map is not bijective on
    the support.  Infinite orbits are listed on a window of ``window`` steps
    each way; an infinite tail family contributes its first ``window`` lines.
    """
    if isinstance(inst, FiniteInstance):
        return _finite_orbits(inst)
    w = resolve_window(inst, window, "orbits") or DEFAULT_WINDOW
    if isinstance(inst, OrbitFamilyInstance):
        return _structured_orbits(inst, w, with_tail=True)
    return _lazy_orbits(inst, w)


# --------------------------------------------------------------------------
# decomposition


def _line_block(anchor, line: Line, window: int) -> ShiftBlock:
    oid = anchor[0]
    members = _line_members(oid, window)
    return ShiftBlock(
        anchor,
        INFINITE_LINE,
        members,
        tuple(k + 1 for k in range(-window, window + 1)),
        base=line.mass(0),
        ratio=line.ratio,
    )


def _block(inst: Instance, rec: OrbitRecord) -> ShiftBlock:
    indices = tuple(rec.start + j + 1 for j in range(len(rec.members)))
    if rec.kind == INFINITE_LINE:
        return ShiftBlock(rec.anchor, rec.kind, rec.members, indices, base=inst.weight(rec.anchor), ratio=rec.ratio)
    n = len(rec.members)
    return ShiftBlock(
        rec.anchor,
        rec.kind,
        rec.members,
        tuple(i % n for i in indices),
        weights=tuple(inst.weight(m) for m in rec.members),
    )


def shift_decomposition(inst: Instance, window: Optional[int] = None) -> ShiftDecomposition:
    """Decompose a normal instance into weighted backward shifts, one block per orbit."""
    verdict = classify_normal(inst, window)
    if verdict.status is Status.FAILS:
        raise NotNormal(verdict)
    if isinstance(inst, FiniteInstance):
        recs = _finite_orbits(inst)
        return ShiftDecomposition(tuple(_block(inst, r) for r in recs))
    w = resolve_window(inst, window, "shift_decomposition") or DEFAULT_WINDOW
    if isinstance(inst, OrbitFamilyInstance):
        recs = _structured_orbits(inst, w, with_tail=False)
        return ShiftDecomposition(
            tuple(_block(inst, r) for r in recs), inst.family, len(inst.orbits), w, exact=True
        )
    recs = _lazy_orbits(inst, w)
    return ShiftDecomposition(tuple(_block(inst, r) for r in recs), window=w, exact=False)


def rebuild_from_decomposition(dec: ShiftDecomposition) -> OrbitFamilyInstance:
    """The orbit-family instance realising a decomposition; block j becomes orbit j."""
    specs = []
    for j, b in enumerate(dec.blocks):
        try:
            if b.finite:
                if not b.weights or len(set(b.weights)) != 1:
                    raise MalformedDecomposition(f"block {j}: finite weight tuples must be constant")
                specs.append(FixedPoint(b.weights[0]) if len(b.weights) == 1 else Cycle(b.weights))
            else:
                if b.base is None or b.ratio is None:
                    raise MalformedDecomposition(f"block {j}: geometric block needs base and ratio")
                specs.append(Line(b.base, b.ratio))
        except MalformedDecomposition:
            raise
        except Exception as exc:
            raise MalformedDecomposition(f"block {j}: {exc}") from exc
    if dec.tail is not None and dec.tail_offset != len(specs):
        raise MalformedDecomposition("tail must follow the explicit blocks")
    return OrbitFamilyInstance(tuple(specs), dec.tail)


def _rebuilt_label(j: int, block: ShiftBlock, index: int):
    if block.finite:
        return (j, (index - 1) % len(block.weights))
    return (j, index - 1)


def _tail_blocks(dec: ShiftDecomposition, window: int):
    if dec.tail is None:
        return []
    return [dec.tail_block(j, window) for j in range(window)]


def check_round_trip(inst: Instance, dec: ShiftDecomposition, window: Optional[int] = None) -> Verdict:
    """Check that the rebuilt instance is isomorphic to ``inst`` restricted to its support.

    The isomorphism sends phi^k(anchor of block j) to point (j, k) of the
    rebuilt instance; it must preserve weights and intertwine the two maps, and
    the blocks must partition the support.
    """
    rebuilt = rebuild_from_decomposition(dec)
    w = dec.window or window or DEFAULT_WINDOW
    blocks = list(dec.blocks) + _tail_blocks(dec, w)
    sigma = {}
    for j, b in enumerate(blocks):
        for m, i in zip(b.members, b.indices):
            if m in sigma:
                return Verdict.fails(Witness("overlap", (m,), None, None, "orbit blocks are not disjoint"))
            sigma[m] = _rebuilt_label(j, b, i)
    if isinstance(inst, FiniteInstance):
        pos = {x for x in inst.points if inst.mu[x] > 0}
        missing = sorted(pos - set(sigma))
        if missing or set(sigma) - pos:
            return Verdict.fails(Witness("coverage", tuple(missing), None, None, "blocks do not cover the support"))
    for m in sorted(sigma):
        s = sigma[m]
        if inst.weight(m) != rebuilt.weight(s):
            return Verdict.fails(Witness("weight", (m,), inst.weight(m), rebuilt.weight(s), "weights differ"))
        y = inst.image(m)
        if y not in sigma:
            continue  # window boundary of an infinite orbit
        if sigma[y] != rebuilt.image(s):
            return Verdict.fails(Witness("intertwining", (m,), None, None, "maps are not intertwined"))
    return Verdict.passed(dec.exact, dec.window)


def verify_unitary_equivalence(
    inst: Instance, dec: ShiftDecomposition, window: Optional[int] = None
) -> Verdict:
    """Check U C chi_m == S U chi_m and ||chi_m|| == ||U chi_m|| for each basis vector in the blocks."""
    w = dec.window or window or DEFAULT_WINDOW
    for b in list(dec.blocks) + _tail_blocks(dec, min(w, FAMILY_PROBE)):
        idx = b.relabeling()
        if len(set(b.indices)) != len(b.indices) or len(idx) != len(b.members):
            return Verdict.fails(Witness("relabeling", (b.anchor,), None, None, "relabeling is not injective"))
        for m in b.members:
            g, mu = b.gamma(idx[m]), inst.weight(m)
            if g != mu:
                return Verdict.fails(Witness("unitary_norm", (m,), g, mu, "gamma(U m) != mu(m)"))
            image = apply_c(inst, FinSuppFn.basis(m))
            if any(z not in idx for z in image):
                if b.finite:
                    return Verdict.fails(Witness("intertwining", (m,), None, None, "C chi_m leaves the block"))
                continue  # window boundary
            lhs = FinSuppFn({idx[z]: v for z, v in image.items()})
            rhs = FinSuppFn.basis(b.shift(idx[m]))
            if lhs != rhs:
                return Verdict.fails(Witness("intertwining", (m,), lhs, rhs, "U C chi_m != S U chi_m"))
    return Verdict.passed(dec.exact, dec.window)


# --------------------------------------------------------------------------
# constructions of unbounded normal operators


@dataclass(frozen=True)
class BijectionTemplate:
    """An unweighted bijection: cycles of the given lengths plus ``line_count`` two-sided lines."""

    cycle_lengths: Tuple[int, ...] = ()
    line_count: Union[int, float] = math.inf


@dataclass(frozen=True)
class GeometricSequences:
    """Countably many two-sided geometric sequences base * q_j**k, k in Z."""

    schedule: Schedule
    base: Fraction = Fraction(1)


def construct_unbounded_normal_measure(template: BijectionTemplate) -> OrbitFamilyInstance:
    """Weight a bijection with infinitely many infinite orbits so that C is normal and unbounded.

    Cycles get the counting measure; line j gets mu(k) = (1/(j+1))**k, so h = j+1
    on line j.  The ratio schedule is recorded in the returned family.
    """
    if template.line_count != math.inf:
        raise TemplateLacksInfiniteOrbits(
            f"{template.line_count} infinite orbits: h is bounded on finitely many geometric orbits"
        )
    specs = []
    for n in template.cycle_lengths:
        if n < 1:
            raise TemplateLacksInfiniteOrbits(f"cycle length must be positive, got {n}")
        specs.append(FixedPoint(1) if n == 1 else Cycle((Fraction(1),) * n))
    return OrbitFamilyInstance(tuple(specs), LineFamily(Schedule.reciprocal()))


def construct_map_for_measure(sequences: GeometricSequences) -> OrbitFamilyInstance:
    """A map realising the given measure with an unbounded normal composition operator.

    Each sequence becomes one line.  Ratios tending to infinity are read in the
    opposite direction (q -> 1/q), since h = 1/q on a line and only q -> 0
    makes h unbounded.
    """
    sched = sequences.schedule
    trend = sched.trend
    if trend not in ("zero", "infinity"):
        raise RatiosNotDivergent(f"ratios of schedule {sched.kind} do not tend to 0 or infinity")
    if sched.kind == "custom":
        qs = [sched.ratio(j) for j in range(FAMILY_PROBE)]
        steps = list(zip(qs, qs[1:]))
        monotone = all(b < a for a, b in steps) if trend == "zero" else all(b > a for a, b in steps)
        if not monotone or any(q <= 0 for q in qs):
            raise RatiosNotDivergent(f"ratios are not strictly monotone toward {trend}: {qs[:4]}...")
    if trend == "infinity":
        sched = sched.inverted()
    return OrbitFamilyInstance((), LineFamily(sched, sequences.base))
