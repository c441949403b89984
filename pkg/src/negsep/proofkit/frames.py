"""Finite Kripke frames with indexed non-deterministic combination, and an
exhaustive validator for the frame conditions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Tuple

from ..dist import Dist, leq as dist_leq, project, unit_dist
from ..errors import FrameTooLarge
from ..negdep import oplus_members_check

DEFAULT_MAX_STATES = 128


@dataclass(frozen=True)
class Violation:
    condition: str
    index: object
    witness: tuple

    def __str__(self):
        return f"{self.condition}[{self.index}]: {self.witness}"


class FiniteFrame:
    """States with a pre-order and, per index, a set-valued operation and units.

    `order` is the pre-order on the index set itself (pairs, reflexive pairs
    implied).
    """

    def __init__(self, states: Iterable, leq: Callable[[object, object], bool],
                 ops: Mapping[object, Callable[[object, object], frozenset]],
                 units: Mapping[object, frozenset],
                 order: Iterable[Tuple[object, object]] = ()):
        self.states = tuple(states)
        self.indices = tuple(ops)
        self._leq = leq
        self._ops = dict(ops)
        self.units = {m: frozenset(s) for m, s in units.items()}
        self.order = {(m, m) for m in self.indices} | set(order)
        self._table: dict = {}

    def leq(self, a, b) -> bool:
        return self._leq(a, b)

    def combine(self, m, a, b) -> frozenset:
        key = (m, a, b)
        got = self._table.get(key)
        if got is None:
            got = frozenset(self._ops[m](a, b))
            self._table[key] = got
        return got


def check_frame(frame: FiniteFrame,
                max_states: int = DEFAULT_MAX_STATES) -> list:
    """Exhaustively test every frame condition; returns all violations found.

    Universals are checked on all state tuples; existentials are searched
    over the whole state set.
    """
    if len(frame.states) > max_states:
        raise FrameTooLarge(
            f"{len(frame.states)} states, validation bound is {max_states}")
    violations = []
    states = frame.states
    below = {s: [t for t in states if frame.leq(t, s)] for s in states}
    above = {s: [t for t in states if frame.leq(s, t)] for s in states}

    for m in frame.indices:
        units = frame.units.get(m, frozenset())

        for x, y in itertools.product(states, repeat=2):
            combined = frame.combine(m, x, y)
            for z in combined:
                # Commutativity
                if z not in frame.combine(m, y, x):
                    violations.append(Violation("Commutativity", m, (x, y, z)))
                # Down-Closed
                for x2 in below[x]:
                    for y2 in below[y]:
                        if not any(frame.leq(z2, z)
                                   for z2 in frame.combine(m, x2, y2)):
                            violations.append(
                                Violation("Down-Closed", m, (x, y, z, x2, y2)))

        # Associativity: w in t + z and t in x + y need s in y + z with w in x + s
        for x, y in itertools.product(states, repeat=2):
            for t in frame.combine(m, x, y):
                for z in states:
                    for w in frame.combine(m, t, z):
                        if not any(w in frame.combine(m, x, s)
                                   for s in frame.combine(m, y, z)):
                            violations.append(
                                Violation("Associativity", m, (x, y, z, t, w)))

        # Unit Existence
        for x in states:
            if not any(x in frame.combine(m, e, x) for e in units):
                violations.append(Violation("Unit Existence", m, (x,)))
        # Unit Coherence
        for e in units:
            for y in states:
                for x in frame.combine(m, y, e):
                    if not frame.leq(y, x):
                        violations.append(Violation("Unit Coherence", m, (e, y, x)))
        # Unit Closure
        for e in units:
            for e2 in above[e]:
                if e2 not in units:
                    violations.append(Violation("Unit Closure", m, (e, e2)))

    # Operation Inclusion across the index order
    for m1, m2 in frame.order:
        if m1 == m2:
            continue
        for x, y in itertools.product(states, repeat=2):
            extra = frame.combine(m1, x, y) - frame.combine(m2, x, y)
            if extra:
                violations.append(
                    Violation("Operation Inclusion", (m1, m2),
                              (x, y, next(iter(extra)))))
    return violations


def frame_product(f1: FiniteFrame, f2: FiniteFrame) -> FiniteFrame:
    """Componentwise product of two frames over the same index pre-order."""
    if set(f1.indices) != set(f2.indices):
        raise ValueError("frames must share the index set")
    states = tuple(itertools.product(f1.states, f2.states))

    def leq(a, b):
        return f1.leq(a[0], b[0]) and f2.leq(a[1], b[1])

    def op(m):
        def combine(a, b):
            return frozenset(
                itertools.product(f1.combine(m, a[0], b[0]),
                                  f2.combine(m, a[1], b[1])))
        return combine

    ops = {m: op(m) for m in f1.indices}
    units = {m: frozenset(itertools.product(f1.units[m], f2.units[m]))
             for m in f1.indices}
    return FiniteFrame(states, leq, ops, units, f1.order | f2.order)


def det_memory_frame(memories, indices=(1, 2)) -> FiniteFrame:
    """Deterministic memories: equal states combine to themselves, otherwise
    nothing; the order is equality and every state is a unit."""
    states = tuple(memories)

    def combine(a, b):
        return frozenset([a]) if a == b else frozenset()

    ops = {m: combine for m in indices}
    units = {m: frozenset(states) for m in indices}
    order = {(a, b) for a, b in itertools.product(indices, repeat=2) if a <= b}
    return FiniteFrame(states, lambda a, b: a == b, ops, units, order)


def _projection_closure(dists) -> tuple:
    seen = {}
    for mu in dists:
        for r in range(len(mu.domain) + 1):
            for sub in itertools.combinations(sorted(mu.domain), r):
                p = project(mu, frozenset(sub))
                seen[p] = None
    seen[unit_dist()] = None
    return tuple(seen)


def dist_frame(dists, max_block: int = 12, max_states: int = DEFAULT_MAX_STATES,
               indices=(1, 2)) -> FiniteFrame:
    """The two-index structure on probabilistic states: index 1 combines by
    independent product, index 2 by the partition-NA combination.

    States are the projection closure of the given distributions plus the
    empty-domain unit, so every witness required by the frame conditions is
    present.
    """
    states = _projection_closure(dists)
    if len(states) > max_states:
        raise FrameTooLarge(
            f"{len(states)} states after closure, bound is {max_states}")

    def combine_indep(a: Dist, b: Dist):
        out = []
        for z in states:
            if (not a.domain & b.domain and z.domain == a.domain | b.domain
                    and project(z, a.domain) == a and project(z, b.domain) == b):
                ok = all(
                    z.prob(m) == a.prob(m.restrict(a.domain)) * b.prob(m.restrict(b.domain))
                    for m in z.support())
                if ok:
                    out.append(z)
        return frozenset(out)

    def combine_pna(a: Dist, b: Dist):
        return frozenset(z for z in states
                         if oplus_members_check(z, a, b, "pna", max_block))

    ops = {indices[0]: combine_indep, indices[1]: combine_pna}
    units = {m: frozenset(states) for m in indices}
    order = {(indices[0], indices[1])}
    return FiniteFrame(states, dist_leq, ops, units, order)


def one_state_frame(indices=(1,)) -> FiniteFrame:
    """The trivial frame: one state combining to itself, which is the unit."""
    s = "*"
    ops = {m: (lambda a, b: frozenset([s])) for m in indices}
    units = {m: frozenset([s]) for m in indices}
    return FiniteFrame((s,), lambda a, b: True, ops, units)
