"""Actions of C_phi and C_phi* (alone or composed) on finitely supported functions.

All results are canonical elements of l^2(mu): values are stored only at points
of positive measure, so two functions are equal exactly when they are equal
as vectors of l^2(mu).
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Optional, Tuple, Union

from .core import INFINITE_MASS, CRat, Instance, Label, LazyInstance, Mass, probe_points, resolve_window
from .errors import InfiniteFiber, NotDenselyDefined, NotInDomain, NotInSupport, NotNonsingular
from .verdict import Status, Verdict, Witness

Scalar = Union[int, Fraction, CRat]

_ZERO = CRat()


class FinSuppFn(Mapping):
    """Immutable finitely supported function X -> Q[i] with no stored zeros."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Union[Mapping[Label, Scalar], Iterable[Tuple[Label, Scalar]], None] = None) -> None:
        items = entries.items() if isinstance(entries, Mapping) else (entries or ())
        data: Dict[Label, CRat] = {}
        for label, value in items:
            v = value if isinstance(value, CRat) else CRat(Fraction(value))
            if v:
                data[label] = v
        self._entries = data
        self._hash = None

    @classmethod
    def basis(cls, x: Label) -> "FinSuppFn":
        """The indicator chi_{x}."""
        return cls({x: 1})

    @classmethod
    def indicator(cls, labels: Iterable[Label], coeff: Scalar = 1) -> "FinSuppFn":
        return cls((x, coeff) for x in labels)

    def __getitem__(self, x: Label) -> CRat:
        return self._entries.get(x, _ZERO)

    def __contains__(self, x) -> bool:
        return x in self._entries

    def __iter__(self) -> Iterator[Label]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, FinSuppFn):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {v}" for k, v in self.sorted_items())
        return f"FinSuppFn({{{body}}})"

    def sorted_items(self):
        return sorted(self._entries.items(), key=lambda kv: kv[0])

    @property
    def support(self) -> frozenset:
        return frozenset(self._entries)

    def __add__(self, other: "FinSuppFn") -> "FinSuppFn":
        data = dict(self._entries)
        for k, v in other._entries.items():
            data[k] = data.get(k, _ZERO) + v
        return FinSuppFn(data)

    def __neg__(self) -> "FinSuppFn":
        return FinSuppFn({k: -v for k, v in self._entries.items()})

    def __sub__(self, other: "FinSuppFn") -> "FinSuppFn":
        return self + (-other)

    def scale(self, c: Scalar) -> "FinSuppFn":
        return FinSuppFn({k: v * c for k, v in self._entries.items()})

    __rmul__ = scale

    def conjugate(self) -> "FinSuppFn":
        return FinSuppFn({k: v.conjugate() for k, v in self._entries.items()})

    def restrict(self, keep) -> "FinSuppFn":
        return FinSuppFn({k: v for k, v in self._entries.items() if keep(k)})


ZERO_FN = FinSuppFn()


class Functional(str, Enum):
    """Summability functionals describing domains of operator products."""

    CSTAR_C = "CstarC"
    C_CSTAR_C = "C_CstarC"
    CSTAR_C_C = "Cstar_C_C"


class DomainCertificate(NamedTuple):
    ok: bool
    value: Optional[Fraction]
    witness: Optional[Label] = None


def _positive(inst: Instance, x: Label) -> bool:
    return inst.weight(x) > 0


def _finite_fiber(inst: Instance, x: Label) -> Tuple[Label, ...]:
    f = inst.fiber(x)
    if f is INFINITE_MASS:
        raise InfiniteFiber(x)
    return f


def fiber_mass(inst: Instance, x: Label) -> Mass:
    """mu(phi^{-1}({x}))."""
    f = inst.fiber(x)
    if f is INFINITE_MASS:
        return INFINITE_MASS
    return sum((inst.weight(y) for y in f), Fraction(0))


def _positive_fiber(inst: Instance, x: Label) -> Tuple[Label, ...]:
    return tuple(y for y in _finite_fiber(inst, x) if inst.weight(y) > 0)


def _require_support(inst: Instance, x: Label) -> Fraction:
    w = inst.weight(x)
    if w <= 0:
        raise NotInSupport(x)
    return w


def _image_weight(inst: Instance, x: Label) -> Tuple[Label, Fraction]:
    y = inst.image(x)
    w = inst.weight(y)
    if w <= 0:
        raise NotNonsingular(y)
    return y, w


def radon_nikodym(inst: Instance, x: Label) -> Mass:
    """h(x) = mu(phi^{-1}(x)) / mu(x) on the support, 0 off it."""
    w = inst.weight(x)
    if w == 0:
        return Fraction(0)
    m = fiber_mass(inst, x)
    return m if m is INFINITE_MASS else m / w


def densely_defined(inst: Instance, window: Optional[int] = None) -> Verdict:
    """Dense definedness: every support point has a fiber of finite mass."""
    if not isinstance(inst, LazyInstance):
        # finite fibers are finite sets; structured orbits have at most two preimages
        return Verdict(Status.HOLDS)
    w = resolve_window(inst, window, "densely_defined")
    points, _ = probe_points(inst, w)
    for x in sorted(points):
        if inst.fiber(x) is INFINITE_MASS:
            return Verdict.fails(Witness("infinite_fiber", (x,), INFINITE_MASS, None, "fiber mass is infinite"), w)
    return Verdict(Status.VERIFIED_ON_WINDOW, window=w)


def in_domain(inst: Instance, f: FinSuppFn) -> DomainCertificate:
    """Whether f lies in D(C_phi), with the exact value of sum |f(x)|^2 mu(phi^{-1}(x))."""
    total = Fraction(0)
    for x in sorted(f):
        if not _positive(inst, x):
            continue
        m = fiber_mass(inst, x)
        if m is INFINITE_MASS:
            return DomainCertificate(False, None, x)
        total += f[x].abs2() * m
    return DomainCertificate(True, total)


def apply_c(inst: Instance, f: FinSuppFn) -> FinSuppFn:
    """(C f)(y) = f(phi(y))."""
    out: Dict[Label, CRat] = {}
    for x in f:
        if not _positive(inst, x):
            continue
        fib = inst.fiber(x)
        if fib is INFINITE_MASS:
            raise NotInDomain(x)
        for y in fib:
            if inst.weight(y) > 0:
                out[y] = f[x]
    return FinSuppFn(out)


def apply_c_star(inst: Instance, f: FinSuppFn) -> FinSuppFn:
    """(C* f)(x) = sum over z in phi^{-1}(x) of f(z) mu(z) / mu(x), for x in the support.

    Evaluated by pushing each z in supp f forward to phi(z), so the support of
    the result lies in phi(supp f).
    """
    out: Dict[Label, CRat] = {}
    for z in f:
        wz = inst.weight(z)
        if wz == 0:
            continue
        x, wx = _image_weight(inst, z)
        if inst.fiber(x) is INFINITE_MASS:
            raise NotDenselyDefined(x)
        out[x] = out.get(x, _ZERO) + f[z] * (wz / wx)
    return FinSuppFn(out)


def apply_cstar_c_basis(inst: Instance, x: Label) -> FinSuppFn:
    """C* C chi_{x} = h(x) chi_{x}."""
    _require_support(inst, x)
    h = radon_nikodym(inst, x)
    if h is INFINITE_MASS:
        raise InfiniteFiber(x)
    return FinSuppFn({x: h})


def apply_c_cstar_basis(inst: Instance, x: Label) -> FinSuppFn:
    """C C* chi_{x} = mu(x)/mu(phi(x)) times the indicator of phi^{-1}(phi(x))."""
    wx = _require_support(inst, x)
    y, wy = _image_weight(inst, x)
    return FinSuppFn.indicator(_positive_fiber(inst, y), wx / wy)


def apply_cstar_c_c_basis(inst: Instance, x: Label) -> FinSuppFn:
    """C* C C chi_{x}: y -> h(y) on phi^{-1}(x), zero elsewhere."""
    _require_support(inst, x)
    out = {}
    for y in _positive_fiber(inst, x):
        h = radon_nikodym(inst, y)
        if h is INFINITE_MASS:
            raise InfiniteFiber(y)
        out[y] = h
    return FinSuppFn(out)


def apply_c_cstar_c_basis(inst: Instance, x: Label) -> FinSuppFn:
    """C C* C chi_{x} = h(x) times the indicator of phi^{-1}(x)."""
    _require_support(inst, x)
    h = radon_nikodym(inst, x)
    if h is INFINITE_MASS:
        raise InfiniteFiber(x)
    return FinSuppFn.indicator(_positive_fiber(inst, x), h)


def product_domain_functional(inst: Instance, f: FinSuppFn, which: Union[Functional, str]) -> Fraction:
    """Exact value of the summability functional describing a product domain.

    ``CstarC``:    sum |f(x)|^2 m(x)^2 / mu(x)
    ``C_CstarC``:  sum |f(x)|^2 m(x)^3 / mu(x)^2
    ``Cstar_C_C``: sum |f(phi(x))|^2 m(x)^2 / mu(x)
    with m(x) = mu(phi^{-1}(x)) and all sums over the support.
    """
    which = Functional(which)

    def mass(x):
        m = fiber_mass(inst, x)
        if m is INFINITE_MASS:
            raise InfiniteFiber(x)
        return m

    total = Fraction(0)
    if which is Functional.CSTAR_C_C:
        # only x with phi(x) in supp f contribute
        for z in sorted(f):
            if not _positive(inst, z):
                continue
            for x in _positive_fiber(inst, z):
                total += f[z].abs2() * mass(x) ** 2 / inst.weight(x)
        return total
    for x in sorted(f):
        w = inst.weight(x)
        if w == 0:
            continue
        m = mass(x)
        if which is Functional.CSTAR_C:
            total += f[x].abs2() * m**2 / w
        else:
            total += f[x].abs2() * m**3 / w**2
    return total


def inner(inst: Instance, f: FinSuppFn, g: FinSuppFn) -> CRat:
    """<f, g> = sum f(x) conj(g(x)) mu(x)."""
    total = CRat()
    for x in f:
        if x in g:
            total = total + f[x] * g[x].conjugate() * inst.weight(x)
    return total


def norm_sq(inst: Instance, f: FinSuppFn) -> Fraction:
    """||f||^2 = sum |f(x)|^2 mu(x)."""
    return sum((v.abs2() * inst.weight(x) for x, v in f.items()), Fraction(0))
