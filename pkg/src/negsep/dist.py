"""Exact finite probability distributions over program memories.

Memories are total maps from variables to integer values (booleans are the
integers 0/1, ordered false < true).  Distributions carry an explicit domain,
have finite support, and keep every mass as an exact `Fraction`; nothing in
this module ever rounds.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .errors import (
    DomainMismatch,
    DomainOverlap,
    InvalidDistribution,
    ParseError,
    SubsetError,
    ZeroMassEvent,
)

DET = "det"
RAND = "rand"

ZERO = Fraction(0)
ONE = Fraction(1)


class VarName:
    """A scalar program variable: base name, optional array index, det/rand kind."""

    __slots__ = ("name", "index", "kind", "_key")

    def __init__(self, name: str, index: tuple = (), kind: str = RAND):
        if kind not in (DET, RAND):
            raise ValueError(f"bad variable kind {kind!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "index", tuple(index))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "_key", (name, self.index, kind))

    def __setattr__(self, *_):
        raise AttributeError("VarName is immutable")

    def __eq__(self, other):
        return isinstance(other, VarName) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        return f"VarName({str(self)!r})"

    def __str__(self):
        return self.name + "".join(f"[{i}]" for i in self.index)


def rv(name: str, *index: int) -> VarName:
    return VarName(name, index, RAND)


def dv(name: str, *index: int) -> VarName:
    return VarName(name, index, DET)


class Mem:
    """An immutable memory: a total map from a finite variable set to values."""

    __slots__ = ("_items", "_map")

    def __init__(self, bindings: Mapping[VarName, int]):
        items = tuple(sorted(bindings.items()))
        object.__setattr__(self, "_items", items)
        object.__setattr__(self, "_map", dict(items))

    def __setattr__(self, *_):
        raise AttributeError("Mem is immutable")

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    def items(self):
        return self._items

    def __getitem__(self, var: VarName) -> int:
        return self._map[var]

    def get(self, var: VarName, default=None):
        return self._map.get(var, default)

    def __contains__(self, var: VarName) -> bool:
        return var in self._map

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._map)

    def __eq__(self, other):
        return isinstance(other, Mem) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def restrict(self, subset: Iterable[VarName]) -> "Mem":
        sub = frozenset(subset)
        missing = sub - self.domain
        if missing:
            raise SubsetError(f"memory lacks {sorted(map(str, missing))}")
        return Mem({v: self._map[v] for v in sub})

    def updated(self, var: VarName, value: int) -> "Mem":
        new = dict(self._map)
        new[var] = value
        return Mem(new)

    def updated_many(self, bindings: Mapping[VarName, int]) -> "Mem":
        new = dict(self._map)
        new.update(bindings)
        return Mem(new)

    def leq(self, other: "Mem") -> bool:
        """Pointwise order; only memories on the same domain are comparable."""
        if self.domain != other.domain:
            return False
        return all(val <= other._map[var] for var, val in self._items)

    def __repr__(self):
        inner = ", ".join(f"{v}={x}" for v, x in self._items)
        return f"[{inner}]"


EMPTY_MEM = Mem({})


def join_mem(m1: Mem, m2: Mem) -> Mem:
    """Union of two memories on disjoint domains."""
    common = m1.domain & m2.domain
    if common:
        raise DomainOverlap(f"memories overlap on {sorted(map(str, common))}")
    new = dict(m1.items())
    new.update(m2.items())
    return Mem(new)


class Dist:
    """A finite-support distribution over memories on a fixed domain.

    Masses must be non-negative `Fraction`s summing to exactly 1; zero-mass
    points are dropped.  Instances are immutable and hashable.
    """

    __slots__ = ("domain", "_mass", "_hash")

    def __init__(self, domain: Iterable[VarName], mass: Mapping[Mem, Fraction]):
        dom = frozenset(domain)
        clean = {}
        total = ZERO
        for mem, p in mass.items():
            p = Fraction(p)
            if p < 0:
                raise InvalidDistribution(f"negative mass {p} at {mem}")
            if mem.domain != dom:
                raise InvalidDistribution(
                    f"support point {mem} not on domain {sorted(map(str, dom))}")
            if p:
                clean[mem] = clean.get(mem, ZERO) + p
            total += p
        if total != ONE:
            raise InvalidDistribution(f"masses sum to {total}, not 1")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "_mass", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *_):
        raise AttributeError("Dist is immutable")

    @property
    def mass(self) -> Mapping[Mem, Fraction]:
        return self._mass

    def prob(self, mem: Mem) -> Fraction:
        return self._mass.get(mem, ZERO)

    def support(self):
        return self._mass.keys()

    def __eq__(self, other):
        return (isinstance(other, Dist) and self.domain == other.domain
                and self._mass == other._mass)

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(
                self, "_hash", hash((self.domain, frozenset(self._mass.items()))))
        return self._hash

    def __repr__(self):
        pts = ", ".join(f"{m}:{p}" for m, p in sorted(
            self._mass.items(), key=lambda kv: kv[0].items()))
        return f"Dist({pts})"

    def expect(self, f: Callable[[Mem], Fraction]) -> Fraction:
        return sum((p * Fraction(f(m)) for m, p in self._mass.items()), ZERO)

    def pushforward(self, f: Callable[[Mem], Mem], domain: Iterable[VarName]) -> "Dist":
        out: dict = {}
        for m, p in self._mass.items():
            fm = f(m)
            out[fm] = out.get(fm, ZERO) + p
        return Dist(domain, out)


def unit_dist() -> Dist:
    """The unique distribution on the empty domain (the unit state)."""
    return Dist(frozenset(), {EMPTY_MEM: ONE})


def dirac(m: Mem) -> Dist:
    return Dist(m.domain, {m: ONE})


def uniform(mems: Iterable[Mem]) -> Dist:
    """Uniform over a multiset of memories (duplicates accumulate mass)."""
    mems = list(mems)
    if not mems:
        raise InvalidDistribution("uniform over an empty collection")
    p = Fraction(1, len(mems))
    acc: dict = {}
    for m in mems:
        acc[m] = acc.get(m, ZERO) + p
    return Dist(mems[0].domain, acc)


def project(mu: Dist, subset: Iterable[VarName]) -> Dist:
    """Marginal of `mu` on `subset` (must be contained in the domain)."""
    sub = frozenset(subset)
    if not sub <= mu.domain:
        raise SubsetError(
            f"{sorted(map(str, sub - mu.domain))} not in distribution domain")
    if sub == mu.domain:
        return mu
    acc: dict = {}
    for m, p in mu.mass.items():
        r = m.restrict(sub)
        acc[r] = acc.get(r, ZERO) + p
    return Dist(sub, acc)


def indep_product(mu1: Dist, mu2: Dist) -> Optional[Dist]:
    """Independent product; `None` when the domains overlap."""
    if mu1.domain & mu2.domain:
        return None
    acc = {}
    for m1, p1 in mu1.mass.items():
        for m2, p2 in mu2.mass.items():
            acc[join_mem(m1, m2)] = p1 * p2
    return Dist(mu1.domain | mu2.domain, acc)


def convex_combine(mu1: Dist, mu2: Dist, rho: Fraction) -> Dist:
    """Pointwise mixture rho*mu1 + (1-rho)*mu2 on a shared domain."""
    rho = Fraction(rho)
    if not (0 <= rho <= 1):
        raise InvalidDistribution(f"mixture weight {rho} outside [0, 1]")
    if mu1.domain != mu2.domain:
        raise DomainMismatch("mixture requires equal domains")
    if rho == 1:
        return mu1
    if rho == 0:
        return mu2
    acc = dict()
    for m, p in mu1.mass.items():
        acc[m] = rho * p
    for m, p in mu2.mass.items():
        acc[m] = acc.get(m, ZERO) + (1 - rho) * p
    return Dist(mu1.domain, acc)


def leq(mu: Dist, nu: Dist) -> bool:
    """Sub-state order: domain inclusion plus exact marginal agreement."""
    if not mu.domain <= nu.domain:
        return False
    return project(nu, mu.domain) == mu


def condition(mu: Dist, ev: Callable[[Mem], bool]):
    """Conditional distribution and the event mass, as a pair.

    Mixing the conditional on `ev` with the conditional on its complement by
    the returned mass recovers `mu` exactly.
    """
    hit = {m: p for m, p in mu.mass.items() if ev(m)}
    mass = sum(hit.values(), ZERO)
    if mass == 0:
        raise ZeroMassEvent("conditioning on a zero-mass event")
    return Dist(mu.domain, {m: p / mass for m, p in hit.items()}), mass


class Config:
    """A program state: a deterministic memory beside a randomized distribution."""

    __slots__ = ("det", "rand")

    def __init__(self, det: Mem = EMPTY_MEM, rand: Optional[Dist] = None):
        if rand is None:
            rand = unit_dist()
        for v in det.domain:
            if v.kind != DET:
                raise InvalidDistribution(f"{v} in deterministic memory but kind={v.kind}")
        for v in rand.domain:
            if v.kind != RAND:
                raise InvalidDistribution(f"{v} in randomized state but kind={v.kind}")
        object.__setattr__(self, "det", det)
        object.__setattr__(self, "rand", rand)

    def __setattr__(self, *_):
        raise AttributeError("Config is immutable")

    def __eq__(self, other):
        return (isinstance(other, Config) and self.det == other.det
                and self.rand == other.rand)

    def __hash__(self):
        return hash((self.det, self.rand))

    def __repr__(self):
        return f"Config(det={self.det}, rand={self.rand})"

    def project_rand(self, subset: Iterable[VarName]) -> "Config":
        return Config(self.det, project(self.rand, subset))


# -- text format ---------------------------------------------------------------
#
# vars: x:bool, y:bool
# x=1, y=0 : 1/2
# x=0, y=1 : 1/2
#
# An optional `det: n=3, flag=true` line supplies a deterministic memory.

_VAR_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)((?:\[\d+\])*)$")


def _parse_varname(text: str, kind: str, lineno: int) -> VarName:
    m = _VAR_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad variable name {text!r}", lineno, 1)
    index = tuple(int(i) for i in re.findall(r"\[(\d+)\]", m.group(2)))
    return VarName(m.group(1), index, kind)


def _parse_value(text: str, lineno: int) -> int:
    text = text.strip().lower()
    if text in ("true", "tt"):
        return 1
    if text in ("false", "ff"):
        return 0
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad value {text!r}", lineno, 1) from None


def _parse_mass(text: str, lineno: int) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational mass {text!r}", lineno, 1) from None


def parse_dist(text: str):
    """Parse the distribution text format.

    Returns `(dist, types)` where `types` maps each domain variable to the
    declared "bool" or "int".
    """
    domain: list = []
    types: dict = {}
    det_bindings: dict = {}
    rows = []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            saw_header = True
            for piece in line[len("vars:"):].split(","):
                piece = piece.strip()
                if not piece:
                    continue
                if ":" not in piece:
                    raise ParseError(f"expected name:type, got {piece!r}", lineno, 1)
                name, ty = (s.strip() for s in piece.split(":", 1))
                if ty not in ("bool", "bit", "int"):
                    raise ParseError(f"unknown type {ty!r}", lineno, 1)
                var = _parse_varname(name, RAND, lineno)
                if var in types:
                    raise ParseError(f"duplicate variable {var}", lineno, 1)
                domain.append(var)
                types[var] = "bool" if ty in ("bool", "bit") else "int"
            continue
        if line.startswith("det:"):
            for piece in line[len("det:"):].split(","):
                piece = piece.strip()
                if not piece:
                    continue
                if "=" not in piece:
                    raise ParseError(f"expected name=value, got {piece!r}", lineno, 1)
                name, val = piece.split("=", 1)
                det_bindings[_parse_varname(name, DET, lineno)] = _parse_value(val, lineno)
            continue
        if ":" not in line:
            raise ParseError("expected 'bindings : mass'", lineno, 1)
        bindings_text, mass_text = line.rsplit(":", 1)
        bindings = {}
        for piece in bindings_text.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" not in piece:
                raise ParseError(f"expected name=value, got {piece!r}", lineno, 1)
            name, val = piece.split("=", 1)
            var = _parse_varname(name, RAND, lineno)
            bindings[var] = _parse_value(val, lineno)
        rows.append((lineno, bindings, _parse_mass(mass_text, lineno)))
    if not saw_header:
        raise ParseError("missing 'vars:' header", 1, 1)
    dom = frozenset(domain)
    mass: dict = {}
    for lineno, bindings, p in rows:
        if frozenset(bindings) != dom:
            raise ParseError("support line does not bind exactly the declared domain",
                             lineno, 1)
        for var, val in bindings.items():
            if types[var] == "bool" and val not in (0, 1):
                raise ParseError(f"{var} is bool but bound to {val}", lineno, 1)
        mem = Mem(bindings)
        mass[mem] = mass.get(mem, ZERO) + p
    try:
        dist = Dist(dom, mass)
    except InvalidDistribution as exc:
        raise ParseError(str(exc), 1, 1) from None
    det = Mem(det_bindings)
    return dist, types, det


def format_dist(mu: Dist, types: Optional[Mapping[VarName, str]] = None) -> str:
    """Render a distribution in the text format (one support point per line)."""
    dom = sorted(mu.domain)
    if types is None:
        types = {}
        for v in dom:
            vals = {m[v] for m in mu.support()}
            types[v] = "bool" if vals <= {0, 1} else "int"
    header = "vars: " + ", ".join(f"{v}:{types.get(v, 'int')}" for v in dom)
    lines = [header]
    for m in sorted(mu.support(), key=lambda m: m.items()):
        binds = ", ".join(f"{v}={m[v]}" for v in dom)
        if not dom:
            binds = ""
        lines.append(f"{binds} : {mu.prob(m)}")
    return "\n".join(lines) + "\n"
