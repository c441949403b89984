"""Generic bunched-implication formulas with indexed conjunctions, the
Hilbert-style derivation checker, and a Kripke evaluator on finite frames.

Formulas here are abstract (opaque atoms); the index set carries a pre-order
and each index has a separating conjunction, implication, and unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Tuple

from ..errors import ParseError, RuleMismatch, SideConditionFailed
from .frames import FiniteFrame

# -- formulas -------------------------------------------------------------------


@dataclass(frozen=True)
class MAtom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class MTop:
    def __str__(self):
        return "top"


@dataclass(frozen=True)
class MBottom:
    def __str__(self):
        return "bot"


@dataclass(frozen=True)
class MUnit:
    index: object

    def __str__(self):
        return f"I{self.index}"


@dataclass(frozen=True)
class MAnd:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} /\\ {self.right})"


@dataclass(frozen=True)
class MOr:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} \\/ {self.right})"


@dataclass(frozen=True)
class MImp:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class MStar:
    index: object
    left: object
    right: object

    def __str__(self):
        return f"({self.left} *{self.index} {self.right})"


@dataclass(frozen=True)
class MWand:
    index: object
    left: object
    right: object

    def __str__(self):
        return f"({self.left} -*{self.index} {self.right})"


@dataclass(frozen=True)
class Sequent:
    lhs: object
    rhs: object

    def __str__(self):
        return f"{self.lhs} |- {self.rhs}"


# -- derivations -------------------------------------------------------------------


@dataclass(frozen=True)
class HNode:
    """One Hilbert-rule application: a conclusion sequent over premise nodes."""

    rule: str
    conclusion: Sequent
    premises: Tuple["HNode", ...] = ()

    def sequents(self):
        yield self.conclusion
        for p in self.premises:
            yield from p.sequents()


TWO_POINT_ORDER = frozenset({(1, 1), (2, 2), (1, 2)})


def check_hilbert(node: HNode, order: Iterable = TWO_POINT_ORDER,
                  path: str = "root") -> None:
    """Validate every node; raises RuleMismatch or SideConditionFailed with a
    path into the tree."""
    order = frozenset(order)
    for k, p in enumerate(node.premises):
        check_hilbert(p, order, f"{path}.{k}")
    _check_node(node, order, path)


def _fail(path, reason):
    raise RuleMismatch(path, reason)


def _arity(node, path, n):
    if len(node.premises) != n:
        _fail(path, f"{node.rule} expects {n} premises, got {len(node.premises)}")


def _check_node(node: HNode, order, path):
    c = node.conclusion
    rule = node.rule
    prem = tuple(p.conclusion for p in node.premises)

    if rule == "Id":
        _arity(node, path, 0)
        if c.lhs != c.rhs:
            _fail(path, f"Id needs equal sides: {c}")
    elif rule == "Top":
        _arity(node, path, 0)
        if not isinstance(c.rhs, MTop):
            _fail(path, f"Top concludes P |- top: {c}")
    elif rule == "Bot":
        _arity(node, path, 0)
        if not isinstance(c.lhs, MBottom):
            _fail(path, f"Bot concludes bot |- P: {c}")
    elif rule == "OrE":
        _arity(node, path, 2)
        if not (isinstance(c.lhs, MOr) and prem[0] == Sequent(c.lhs.left, c.rhs)
                and prem[1] == Sequent(c.lhs.right, c.rhs)):
            _fail(path, f"OrE mismatch: {c}")
    elif rule == "OrI":
        _arity(node, path, 1)
        if not (isinstance(c.rhs, MOr) and prem[0].lhs == c.lhs
                and prem[0].rhs in (c.rhs.left, c.rhs.right)):
            _fail(path, f"OrI mismatch: {c}")
    elif rule == "AndI":
        _arity(node, path, 2)
        if not (isinstance(c.rhs, MAnd)
                and prem[0] == Sequent(c.lhs, c.rhs.left)
                and prem[1] == Sequent(c.lhs, c.rhs.right)):
            _fail(path, f"AndI mismatch: {c}")
    elif rule == "AndW":
        _arity(node, path, 1)
        if not (isinstance(c.lhs, MAnd) and prem[0] == Sequent(c.lhs.right, c.rhs)):
            _fail(path, f"AndW mismatch: {c}")
    elif rule == "AndE":
        _arity(node, path, 1)
        if not (isinstance(prem[0].rhs, MAnd) and prem[0].lhs == c.lhs
                and c.rhs in (prem[0].rhs.left, prem[0].rhs.right)):
            _fail(path, f"AndE mismatch: {c}")
    elif rule == "ImpI":
        _arity(node, path, 1)
        if not (isinstance(c.rhs, MImp)
                and prem[0] == Sequent(MAnd(c.lhs, c.rhs.left), c.rhs.right)):
            _fail(path, f"ImpI mismatch: {c}")
    elif rule == "ImpE":
        _arity(node, path, 2)
        if not (isinstance(prem[0].rhs, MImp) and prem[0].lhs == c.lhs
                and prem[1] == Sequent(c.lhs, prem[0].rhs.left)
                and prem[0].rhs.right == c.rhs):
            _fail(path, f"ImpE mismatch: {c}")
    elif rule == "WandI":
        _arity(node, path, 1)
        if not (isinstance(c.rhs, MWand)
                and prem[0] == Sequent(MStar(c.rhs.index, c.lhs, c.rhs.left),
                                       c.rhs.right)):
            _fail(path, f"WandI mismatch: {c}")
    elif rule == "WandE":
        _arity(node, path, 2)
        if not (isinstance(c.lhs, MStar) and isinstance(prem[0].rhs, MWand)
                and prem[0].rhs.index == c.lhs.index
                and prem[0].lhs == c.lhs.left
                and prem[1] == Sequent(c.lhs.right, prem[0].rhs.left)
                and prem[0].rhs.right == c.rhs):
            _fail(path, f"WandE mismatch: {c}")
    elif rule == "UnitI":
        _arity(node, path, 0)
        ok = (isinstance(c.rhs, MStar)
              and c.rhs.left == c.lhs
              and c.rhs.right == MUnit(c.rhs.index))
        if not ok:
            _fail(path, f"UnitI concludes P |- P *m Im: {c}")
    elif rule == "UnitE":
        _arity(node, path, 0)
        ok = (isinstance(c.lhs, MStar)
              and c.lhs.left == c.rhs
              and c.lhs.right == MUnit(c.lhs.index))
        if not ok:
            _fail(path, f"UnitE concludes P *m Im |- P: {c}")
    elif rule == "StarConj":
        _arity(node, path, 2)
        ok = (isinstance(c.lhs, MStar) and isinstance(c.rhs, MStar)
              and c.lhs.index == c.rhs.index
              and prem[0] == Sequent(c.lhs.left, c.rhs.left)
              and prem[1] == Sequent(c.lhs.right, c.rhs.right))
        if not ok:
            _fail(path, f"StarConj mismatch: {c}")
    elif rule == "StarComm":
        _arity(node, path, 0)
        ok = (isinstance(c.lhs, MStar) and isinstance(c.rhs, MStar)
              and c.lhs.index == c.rhs.index
              and c.lhs.left == c.rhs.right and c.lhs.right == c.rhs.left)
        if not ok:
            _fail(path, f"StarComm mismatch: {c}")
    elif rule == "StarAssocL":
        _arity(node, path, 0)
        l, r = c.lhs, c.rhs
        ok = (isinstance(l, MStar) and isinstance(l.left, MStar)
              and isinstance(r, MStar) and isinstance(r.right, MStar)
              and l.index == l.left.index == r.index == r.right.index
              and l.left.left == r.left
              and l.left.right == r.right.left
              and l.right == r.right.right)
        if not ok:
            _fail(path, f"StarAssocL concludes (P*Q)*R |- P*(Q*R): {c}")
    elif rule == "StarAssocR":
        _arity(node, path, 0)
        l, r = c.lhs, c.rhs
        ok = (isinstance(r, MStar) and isinstance(r.left, MStar)
              and isinstance(l, MStar) and isinstance(l.right, MStar)
              and r.index == r.left.index == l.index == l.right.index
              and r.left.left == l.left
              and r.left.right == l.right.left
              and r.right == l.right.right)
        if not ok:
            _fail(path, f"StarAssocR concludes P*(Q*R) |- (P*Q)*R: {c}")
    elif rule == "StarIncl":
        _arity(node, path, 0)
        ok = (isinstance(c.lhs, MStar) and isinstance(c.rhs, MStar)
              and c.lhs.left == c.rhs.left and c.lhs.right == c.rhs.right)
        if not ok:
            _fail(path, f"StarIncl mismatch: {c}")
        if (c.lhs.index, c.rhs.index) not in order:
            raise SideConditionFailed(
                path, f"index {c.lhs.index} does not precede {c.rhs.index}")
    elif rule == "Cut":
        _arity(node, path, 2)
        if not (prem[0].lhs == c.lhs and prem[0].rhs == prem[1].lhs
                and prem[1].rhs == c.rhs):
            _fail(path, f"Cut mismatch: {c}")
    else:
        _fail(path, f"unknown rule {rule!r}")


# -- library derivations --------------------------------------------------------


def cut_expansion(d1: HNode, d2: HNode) -> HNode:
    """Cut, derived from only primitive rules (via conjunction and implication)."""
    p, q = d1.conclusion.lhs, d1.conclusion.rhs
    r = d2.conclusion.rhs
    if d2.conclusion.lhs != q:
        raise ValueError("middle formulas do not match")
    weakened = HNode("AndW", Sequent(MAnd(p, q), r), (d2,))
    imp = HNode("ImpI", Sequent(p, MImp(q, r)), (weakened,))
    return HNode("ImpE", Sequent(p, r), (imp, d1))


def _cut(d1: HNode, d2: HNode) -> HNode:
    return HNode("Cut", Sequent(d1.conclusion.lhs, d2.conclusion.rhs), (d1, d2))


def wand_weakening(p, q, m1, m2) -> HNode:
    """(P -*m2 Q) |- (P -*m1 Q) given m1 <= m2."""
    w = MWand(m2, p, q)
    incl = HNode("StarIncl", Sequent(MStar(m1, w, p), MStar(m2, w, p)))
    elim = HNode("WandE", Sequent(MStar(m2, w, p), q),
                 (HNode("Id", Sequent(w, w)), HNode("Id", Sequent(p, p))))
    body = _cut(incl, elim)
    return HNode("WandI", Sequent(w, MWand(m1, p, q)), (body,))


def unit_weakening(m1, m2) -> HNode:
    """I_m2 |- I_m1 given m1 <= m2."""
    i1, i2 = MUnit(m1), MUnit(m2)
    intro = HNode("UnitI", Sequent(i2, MStar(m1, i2, i1)))
    incl = HNode("StarIncl", Sequent(MStar(m1, i2, i1), MStar(m2, i2, i1)))
    comm = HNode("StarComm", Sequent(MStar(m2, i2, i1), MStar(m2, i1, i2)))
    elim = HNode("UnitE", Sequent(MStar(m2, i1, i2), i1))
    return _cut(_cut(_cut(intro, incl), comm), elim)


def star_weakening_instance(p, q, m1, m2) -> HNode:
    return HNode("StarIncl", Sequent(MStar(m1, p, q), MStar(m2, p, q)))


# -- Kripke semantics on finite frames ---------------------------------------------


def msat(frame: FiniteFrame, valuation: Mapping[str, frozenset], state,
         phi) -> bool:
    """Satisfaction on a finite frame; wands quantify over all states."""
    if isinstance(phi, MAtom):
        return state in valuation.get(phi.name, frozenset())
    if isinstance(phi, MTop):
        return True
    if isinstance(phi, MBottom):
        return False
    if isinstance(phi, MUnit):
        return state in frame.units[phi.index]
    if isinstance(phi, MAnd):
        return (msat(frame, valuation, state, phi.left)
                and msat(frame, valuation, state, phi.right))
    if isinstance(phi, MOr):
        return (msat(frame, valuation, state, phi.left)
                or msat(frame, valuation, state, phi.right))
    if isinstance(phi, MImp):
        return all(
            (not msat(frame, valuation, y, phi.left))
            or msat(frame, valuation, y, phi.right)
            for y in frame.states if frame.leq(state, y))
    if isinstance(phi, MStar):
        for x2 in frame.states:
            if not frame.leq(x2, state):
                continue
            for y in frame.states:
                for z in frame.states:
                    if x2 in frame.combine(phi.index, y, z):
                        if (msat(frame, valuation, y, phi.left)
                                and msat(frame, valuation, z, phi.right)):
                            return True
        return False
    if isinstance(phi, MWand):
        for y in frame.states:
            if not msat(frame, valuation, y, phi.left):
                continue
            for z in frame.combine(phi.index, state, y):
                if not msat(frame, valuation, z, phi.right):
                    return False
        return True
    raise TypeError(f"unknown formula {phi!r}")


def sequent_valid(frame: FiniteFrame, valuation, s: Sequent) -> bool:
    return all(
        (not msat(frame, valuation, x, s.lhs)) or msat(frame, valuation, x, s.rhs)
        for x in frame.states)


def persistent_closure(frame: FiniteFrame, states: Iterable) -> frozenset:
    out = set(states)
    for s in list(out):
        out.update(t for t in frame.states if frame.leq(s, t))
    return frozenset(out)


# -- text format --------------------------------------------------------------------


def parse_sequent(text: str) -> Sequent:
    from ..pwhile.parser import tokenize
    toks = tokenize(text)
    parser = _MParser(toks)
    lhs = parser.formula()
    parser.expect("|-")
    rhs = parser.formula()
    parser.expect("eof")
    return Sequent(lhs, rhs)


def parse_mbi_formula(text: str):
    from ..pwhile.parser import tokenize
    parser = _MParser(tokenize(text))
    f = parser.formula()
    parser.expect("eof")
    return f


class _MParser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text!r}", t.line, t.col)
        return t

    def formula(self):
        f = self.or_formula()
        if self.peek().kind == "->":
            self.next()
            return MImp(f, self.formula())
        if self.peek().kind == "-" and self.peek(1).kind == "*":
            self.next(), self.next()
            idx = int(self.expect("int").text)
            return MWand(idx, f, self.formula())
        return f

    def or_formula(self):
        f = self.and_formula()
        while self.peek().kind == "\\/":
            self.next()
            f = MOr(f, self.and_formula())
        return f

    def and_formula(self):
        f = self.star_formula()
        while self.peek().kind == "/\\":
            self.next()
            f = MAnd(f, self.star_formula())
        return f

    def star_formula(self):
        f = self.atom()
        while self.peek().kind == "*":
            self.next()
            idx = int(self.expect("int").text)
            f = MStar(idx, f, self.atom())
        return f

    def atom(self):
        t = self.next()
        if t.kind == "(":
            f = self.formula()
            self.expect(")")
            return f
        if t.kind == "ident":
            if t.text == "top":
                return MTop()
            if t.text == "bot":
                return MBottom()
            if len(t.text) > 1 and t.text[0] == "I" and t.text[1:].isdigit():
                return MUnit(int(t.text[1:]))
            return MAtom(t.text)
        raise ParseError(f"expected a formula, found {t.text!r}", t.line, t.col)
