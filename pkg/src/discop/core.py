"""Discrete measure spaces with a self-map, in three representations.

Every instance answers the same four queries:

* ``weight(x)``   -- the point mass mu(x), an exact :class:`~fractions.Fraction`;
* ``image(x)``    -- phi(x);
* ``fiber(x)``    -- the preimage phi^{-1}({x}) as a tuple of labels, or
  :data:`INFINITE_MASS` when that preimage carries infinite total mass;
* ``enumerate(n)`` -- the first ``n`` labels in a fixed deterministic order.

:class:`FiniteInstance` stores everything explicitly, :class:`OrbitFamilyInstance`
is a disjoint union of structured orbits (optionally with an infinite tail of
geometric lines) and :class:`LazyInstance` is an abstract black box.  No floating
point is used anywhere.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import count, islice
from typing import Callable, Hashable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .errors import MissingWindow, NotNonsingular, ValidationError

Rat = Fraction
Label = Hashable

DEFAULT_WINDOW = 32


class _InfiniteMass:
    """Marker for a preimage of infinite total mass (a failed finiteness condition)."""

    _instance: Optional["_InfiniteMass"] = None

    def __new__(cls) -> "_InfiniteMass":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE_MASS"

    def __reduce__(self):
        return (_InfiniteMass, ())


INFINITE_MASS = _InfiniteMass()

Fiber = Union[Tuple[Label, ...], _InfiniteMass]
Mass = Union[Fraction, _InfiniteMass]


def as_rat(value: Union[str, int, Fraction], *, field_name: str = "value") -> Fraction:
    """Parse ``"p/q"``, ``"n"``, an int or a Fraction into an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(field_name, f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValidationError(field_name, f"rationals must be written as 'p/q' or 'n', got {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(field_name, f"not a rational: {value!r}") from None
    raise ValidationError(field_name, f"expected a rational string, got {type(value).__name__}")


def rat_str(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class CRat:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def parse(cls, text: str) -> "CRat":
        """Parse ``"re,im"`` or a bare real ``"re"``."""
        parts = text.split(",")
        if len(parts) == 1:
            return cls(as_rat(parts[0]))
        if len(parts) == 2:
            return cls(as_rat(parts[0]), as_rat(parts[1]))
        raise ValidationError("value", f"expected 're,im', got {text!r}")

    def __str__(self) -> str:
        return f"{self.re},{self.im}"

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other: "CRat") -> "CRat":
        other = _lift(other)
        return CRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "CRat":
        return CRat(-self.re, -self.im)

    def __sub__(self, other: "CRat") -> "CRat":
        return self + (-_lift(other))

    def __mul__(self, other) -> "CRat":
        other = _lift(other)
        return CRat(self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, CRat):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def conjugate(self) -> "CRat":
        return CRat(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im


def _lift(value) -> CRat:
    if isinstance(value, CRat):
        return value
    if isinstance(value, (int, Fraction)):
        return CRat(Fraction(value))
    raise TypeError(f"cannot use {type(value).__name__} as an exact complex scalar")


# --------------------------------------------------------------------------
# structured orbits


def _positive(value, what: str) -> Fraction:
    q = as_rat(value, field_name=what)
    if q <= 0:
        raise ValidationError(what, f"must be > 0, got {q}")
    return q


@dataclass(frozen=True)
class FixedPoint:
    weight: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", _positive(self.weight, "weight"))

    size = 1

    def contains(self, k: int) -> bool:
        return k == 0

    def mass(self, k: int) -> Fraction:
        return self.weight

    def image(self, k: int) -> int:
        return 0

    def fiber(self, k: int) -> Tuple[int, ...]:
        return (0,)

    def members(self) -> Iterator[int]:
        yield 0

    def pushforward(self, n: int, k: int) -> Fraction:
        return self.weight


@dataclass(frozen=True)
class Cycle:
    """Points 0..n-1 with i -> i+1 mod n."""

    weights: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValidationError("weights", "a cycle needs at least one point")
        ws = tuple(_positive(w, f"weights[{i}]") for i, w in enumerate(self.weights))
        object.__setattr__(self, "weights", ws)

    @property
    def size(self) -> int:
        return len(self.weights)

    def contains(self, k: int) -> bool:
        return 0 <= k < len(self.weights)

    def mass(self, k: int) -> Fraction:
        return self.weights[k]

    def image(self, k: int) -> int:
        return (k + 1) % len(self.weights)

    def fiber(self, k: int) -> Tuple[int, ...]:
        return ((k - 1) % len(self.weights),)

    def members(self) -> Iterator[int]:
        return iter(range(len(self.weights)))

    def pushforward(self, n: int, k: int) -> Fraction:
        return self.weights[(k - n) % len(self.weights)]


@dataclass(frozen=True)
class Line:
    """Points k in Z with mu(k) = base * ratio**k and k -> k+1."""

    base: Fraction
    ratio: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", _positive(self.base, "base"))
        object.__setattr__(self, "ratio", _positive(self.ratio, "ratio"))

    size = None

    def contains(self, k: int) -> bool:
        return isinstance(k, int)

    def mass(self, k: int) -> Fraction:
        return self.base * self.ratio**k

    def image(self, k: int) -> int:
        return k + 1

    def fiber(self, k: int) -> Tuple[int, ...]:
        return (k - 1,)

    def members(self) -> Iterator[int]:
        yield 0
        for k in count(1):
            yield k
            yield -k

    def pushforward(self, n: int, k: int) -> Fraction:
        return self.mass(k - n)


@dataclass(frozen=True)
class RayLoop:
    """Points n >= 0; 0 -> 0 and n -> n-1, with mu(0) = 1, mu(n) = (c-1) c**(n-1).

    The Radon-Nikodym derivative equals ``ratio`` everywhere, but 0 has two
    preimages, so the composition operator is quasinormal and not normal.
    """

    ratio: Fraction

    def __post_init__(self) -> None:
        c = as_rat(self.ratio, field_name="ratio")
        if c <= 1:
            raise ValidationError("ratio", f"ray_loop ratio must be > 1, got {c}")
        object.__setattr__(self, "ratio", c)

    size = None

    def contains(self, k: int) -> bool:
        return isinstance(k, int) and k >= 0

    def mass(self, k: int) -> Fraction:
        if k == 0:
            return Fraction(1)
        return (self.ratio - 1) * self.ratio ** (k - 1)

    def image(self, k: int) -> int:
        return max(k - 1, 0)

    def fiber(self, k: int) -> Tuple[int, ...]:
        return (0, 1) if k == 0 else (k + 1,)

    def members(self) -> Iterator[int]:
        return count(0)

    def pushforward(self, n: int, k: int) -> Fraction:
        if k == 0:
            # phi^{-n}(0) = {0, 1, ..., n}; the masses telescope to c**n
            return self.ratio**n
        return self.mass(k + n)


OrbitSpec = Union[FixedPoint, Cycle, Line, RayLoop]


# --------------------------------------------------------------------------
# ratio schedules for infinite families of lines


@dataclass(frozen=True)
class Schedule:
    """Ratio q_j for the j-th line (j = 0, 1, 2, ...) of an infinite family.

    ``reciprocal``: q_j = 1/(j+1); ``linear``: q_j = j+1; ``power``: q_j = r**(j+1);
    ``custom``: q_j = rule(j), with a declared trend ("zero" or "infinity").
    """

    kind: str
    param: Optional[Fraction] = None
    rule: Optional[Callable[[int], Fraction]] = None
    declared_trend: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("reciprocal", "linear", "power", "custom"):
            raise ValidationError("schedule", f"unknown schedule {self.kind!r}")
        if self.kind == "power":
            object.__setattr__(self, "param", _positive(self.param, "schedule.param"))
        elif self.param is not None:
            raise ValidationError("schedule.param", f"{self.kind} takes no parameter")
        if self.kind == "custom":
            if self.rule is None or self.declared_trend not in ("zero", "infinity"):
                raise ValidationError("schedule", "custom schedules need a rule and a trend")

    @classmethod
    def reciprocal(cls) -> "Schedule":
        return cls("reciprocal")

    @classmethod
    def power(cls, r) -> "Schedule":
        return cls("power", as_rat(r))

    @classmethod
    def linear(cls) -> "Schedule":
        return cls("linear")

    @classmethod
    def custom(cls, rule: Callable[[int], Fraction], trend: str) -> "Schedule":
        return cls("custom", rule=rule, declared_trend=trend)

    def ratio(self, j: int) -> Fraction:
        if self.kind == "reciprocal":
            return Fraction(1, j + 1)
        if self.kind == "linear":
            return Fraction(j + 1)
        if self.kind == "power":
            return self.param ** (j + 1)
        return Fraction(self.rule(j))

    @property
    def trend(self) -> str:
        """Limit of the ratios: ``"zero"``, ``"infinity"`` or ``"none"``."""
        if self.kind == "reciprocal":
            return "zero"
        if self.kind == "linear":
            return "infinity"
        if self.kind == "power":
            if self.param < 1:
                return "zero"
            return "infinity" if self.param > 1 else "none"
        return self.declared_trend

    def inverted(self) -> "Schedule":
        """The schedule 1/q_j, i.e. the same sequences read in the opposite direction."""
        if self.kind == "reciprocal":
            return Schedule.linear()
        if self.kind == "linear":
            return Schedule.reciprocal()
        if self.kind == "power":
            return Schedule.power(1 / self.param)
        rule = self.rule
        flipped = "zero" if self.declared_trend == "infinity" else "infinity"
        return Schedule.custom(lambda j: 1 / Fraction(rule(j)), flipped)


@dataclass(frozen=True)
class LineFamily:
    """Countably many lines, the j-th being ``Line(base, schedule.ratio(j))``.

    Only families with ratios tending to 0 are stored, so the per-orbit
    derivative 1/q_j is unbounded.
    """

    schedule: Schedule
    base: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", _positive(self.base, "base"))
        if self.schedule.trend != "zero":
            raise ValidationError("schedule", "a line family must have ratios tending to 0")

    def orbit(self, j: int) -> Line:
        return Line(self.base, self.schedule.ratio(j))


# --------------------------------------------------------------------------
# instances


class Instance(abc.ABC):
    """Common query interface; see the module docstring."""

    exact: bool = True

    @abc.abstractmethod
    def weight(self, x: Label) -> Fraction: ...

    @abc.abstractmethod
    def image(self, x: Label) -> Label: ...

    @abc.abstractmethod
    def fiber(self, x: Label) -> Fiber: ...

    @abc.abstractmethod
    def enumerate(self, n: int) -> Tuple[Label, ...]: ...


class FiniteInstance(Instance):
    """Explicit finite (X, mu, phi) with string labels."""

    __slots__ = ("points", "mu", "phi", "_fibers", "_order")

    def __init__(self, points: Sequence[str], mu: Mapping[str, object], phi: Mapping[str, str]) -> None:
        points = tuple(points)
        if len(set(points)) != len(points):
            raise ValidationError("points", "duplicate point labels")
        known = set(points)
        for p in mu:
            if p not in known:
                raise ValidationError("mu", f"unknown point {p!r}")
        for p, q in phi.items():
            if p not in known:
                raise ValidationError("phi", f"unknown point {p!r}")
            if q not in known:
                raise ValidationError("phi", f"unknown point {q!r}")
        weights = {}
        for p in points:
            if p not in mu:
                raise ValidationError("mu", f"missing weight for point {p!r}")
            w = as_rat(mu[p], field_name=f"mu[{p}]")
            if w < 0:
                raise ValidationError(f"mu[{p}]", f"weights must be >= 0, got {w}")
            weights[p] = w
            if p not in phi:
                raise ValidationError("phi", f"missing image for point {p!r}")
        self.points = points
        self.mu = weights
        self.phi = {p: phi[p] for p in points}
        fibers = {p: [] for p in points}
        for p in points:
            fibers[self.phi[p]].append(p)
        self._fibers = {p: tuple(v) for p, v in fibers.items()}

    def __repr__(self) -> str:
        return f"FiniteInstance(points={self.points!r}, mu={self.mu!r}, phi={self.phi!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteInstance):
            return NotImplemented
        return self.points == other.points and self.mu == other.mu and self.phi == other.phi

    def __hash__(self) -> int:
        return hash((self.points, tuple(self.mu.values()), tuple(self.phi.values())))

    def weight(self, x: str) -> Fraction:
        return self.mu[x]

    def image(self, x: str) -> str:
        return self.phi[x]

    def fiber(self, x: str) -> Tuple[str, ...]:
        return self._fibers[x]

    def enumerate(self, n: int) -> Tuple[str, ...]:
        return self.points[:n]


@dataclass(frozen=True, eq=True)
class OrbitFamilyInstance(Instance):
    """Disjoint union of structured orbits; labels are ``(orbit_id, index)``.

    ``orbits`` get ids 0..m-1; the j-th line of ``family`` (if any) gets id m+j.
    """

    orbits: Tuple[OrbitSpec, ...] = ()
    family: Optional[LineFamily] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "orbits", tuple(self.orbits))
        for i, o in enumerate(self.orbits):
            if not isinstance(o, (FixedPoint, Cycle, Line, RayLoop)):
                raise ValidationError(f"orbits[{i}]", f"not an orbit: {o!r}")

    @property
    def orbit_count(self) -> Union[int, float]:
        return math.inf if self.family is not None else len(self.orbits)

    @property
    def is_finite(self) -> bool:
        return self.family is None and all(o.size is not None for o in self.orbits)

    def orbit(self, orbit_id: int) -> OrbitSpec:
        if not isinstance(orbit_id, int) or orbit_id < 0:
            raise KeyError(orbit_id)
        if orbit_id < len(self.orbits):
            return self.orbits[orbit_id]
        if self.family is None:
            raise KeyError(orbit_id)
        return self.family.orbit(orbit_id - len(self.orbits))

    def _split(self, x) -> Tuple[int, int, OrbitSpec]:
        oid, k = x
        orb = self.orbit(oid)
        if not orb.contains(k):
            raise KeyError(x)
        return oid, k, orb

    def weight(self, x) -> Fraction:
        _, k, orb = self._split(x)
        return orb.mass(k)

    def image(self, x) -> Tuple[int, int]:
        oid, k, orb = self._split(x)
        return (oid, orb.image(k))

    def fiber(self, x) -> Tuple[Tuple[int, int], ...]:
        oid, k, orb = self._split(x)
        return tuple((oid, j) for j in orb.fiber(k))

    def orbit_members(self, orbit_id: int, n: int) -> Tuple[Tuple[int, int], ...]:
        """First ``n`` members of one orbit in its own enumeration order."""
        return tuple((orbit_id, k) for k in islice(self.orbit(orbit_id).members(), n))

    def enumerate(self, n: int) -> Tuple[Tuple[int, int], ...]:
        return tuple(islice(self._dovetail(), n))

    def _dovetail(self) -> Iterator[Tuple[int, int]]:
        # stage s visits orbits 0..s, taking one new member from each
        iters = []
        for s in count():
            if s < self.orbit_count:
                iters.append((s, self.orbit(s).members()))
            elif all(it is None for _, it in iters):
                return
            for i, (oid, it) in enumerate(iters):
                if it is None:
                    continue
                k = next(it, None)
                if k is None:
                    iters[i] = (oid, None)
                else:
                    yield (oid, k)


class LazyInstance(Instance):
    """Black-box instance; subclasses supply the four queries.

    Results on lazy instances are only ever verified on an enumeration window.
    ``enumerate(n)`` must be a prefix of ``enumerate(n + 1)``.
    """

    exact = False


class CallbackInstance(LazyInstance):
    """A :class:`LazyInstance` assembled from four callables."""

    def __init__(
        self,
        weight: Callable[[Label], Fraction],
        image: Callable[[Label], Label],
        fiber: Callable[[Label], Fiber],
        enumerate: Callable[[int], Sequence[Label]],
        name: str = "lazy",
    ) -> None:
        self._weight = weight
        self._image = image
        self._fiber = fiber
        self._enumerate = enumerate
        self.name = name

    def __repr__(self) -> str:
        return f"CallbackInstance({self.name!r})"

    def weight(self, x):
        return Fraction(self._weight(x))

    def image(self, x):
        return self._image(x)

    def fiber(self, x):
        f = self._fiber(x)
        return f if f is INFINITE_MASS else tuple(f)

    def enumerate(self, n):
        return tuple(self._enumerate(n))


# --------------------------------------------------------------------------
# operations


def is_finite_instance(inst: Instance) -> bool:
    return isinstance(inst, FiniteInstance) or (isinstance(inst, OrbitFamilyInstance) and inst.is_finite)


def resolve_window(inst: Instance, window: Optional[int], operation: str = "") -> Optional[int]:
    """Window actually used: required for lazy instances, defaulted for infinite orbit families."""
    if window is not None:
        if window <= 0:
            raise ValueError("window must be a positive integer")
        return window
    if isinstance(inst, LazyInstance):
        raise MissingWindow(operation)
    if isinstance(inst, OrbitFamilyInstance) and not inst.is_finite:
        return DEFAULT_WINDOW
    return None


def all_points(inst: Instance) -> Tuple[Label, ...]:
    """Every label of a finite instance, in enumeration order."""
    if isinstance(inst, FiniteInstance):
        return inst.points
    if isinstance(inst, OrbitFamilyInstance) and inst.is_finite:
        return tuple((i, k) for i, o in enumerate(inst.orbits) for k in o.members())
    raise ValueError("instance is infinite")


def support(inst: Instance, window: Optional[int] = None) -> Tuple[Label, ...]:
    """Points of positive measure, restricted to the first ``window`` enumerated labels."""
    w = resolve_window(inst, window, "support")
    labels = all_points(inst) if w is None else inst.enumerate(w)
    return tuple(x for x in labels if inst.weight(x) > 0)


def probe_points(inst: Instance, window: Optional[int] = None, depth: int = 0) -> Tuple[Tuple[Label, ...], bool]:
    """Support points on which local conditions are evaluated, and whether that is exhaustive.

    Finite instances: the whole support (exact).  Orbit families: the first
    ``window`` members of each explicit orbit and of the first ``window`` lines
    of the tail.  Lines are self-similar (k -> k+1 rescales mu by a constant) and
    a ray loop is self-similar beyond its first few points, so every local
    condition involving phi and preimages up to ``depth`` levels is decided
    exactly once ``window > depth + 2``.  Lazy instances: the enumeration
    window, never exact.
    """
    if isinstance(inst, LazyInstance):
        w = resolve_window(inst, window, "probe")
        return tuple(x for x in inst.enumerate(w) if inst.weight(x) > 0), False
    if is_finite_instance(inst):
        return support(inst), True
    w = max(resolve_window(inst, window), depth + 3)
    pts = []
    for oid in range(len(inst.orbits)):
        pts.extend(inst.orbit_members(oid, w))
    if inst.family is not None:
        for j in range(w):
            pts.extend(inst.orbit_members(len(inst.orbits) + j, w))
    return tuple(pts), True


def check_nonsingular(inst: FiniteInstance) -> Optional[str]:
    """Return the least null point whose preimage has positive mass, or None if phi is nonsingular."""
    for x in sorted(inst.points):
        if inst.mu[x] == 0 and any(inst.mu[y] > 0 for y in inst.fiber(x)):
            return x
    return None


def canonical_representative(inst: FiniteInstance) -> FiniteInstance:
    """Same operator, with every null point mapped to itself."""
    bad = check_nonsingular(inst)
    if bad is not None:
        raise NotNonsingular(bad)
    phi = {x: (inst.phi[x] if inst.mu[x] > 0 else x) for x in inst.points}
    if phi == inst.phi:
        return inst
    return FiniteInstance(inst.points, inst.mu, phi)


def pushforward(inst: Instance, n: int, x: Label) -> Mass:
    """mu(phi^{-n}({x})), or INFINITE_MASS if some fiber on the way is infinite."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if isinstance(inst, OrbitFamilyInstance):
        oid, k, orb = inst._split(x)
        return orb.pushforward(n, k) if n else orb.mass(k)
    frontier = [x]
    for _ in range(n):
        nxt = []
        for y in frontier:
            f = inst.fiber(y)
            if f is INFINITE_MASS:
                return INFINITE_MASS
            nxt.extend(f)
        frontier = nxt
    return sum((inst.weight(y) for y in frontier), Fraction(0))
