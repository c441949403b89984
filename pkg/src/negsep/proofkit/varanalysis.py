"""Syntax-directed variable analyses for commands and expressions.

`analyze_vars` computes may-read, must-write, and may-modify cell sets,
over-approximating reads/modifications and under-approximating writes.
`is_monotone_expr` classifies an expression's direction with respect to a
cell set, with an exhaustive table check as the ground-truth fallback.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..dist import EMPTY_MEM, Mem, VarName
from ..errors import TypingError
from ..pwhile.ast import (
    BIT, INT, Assign, Binop, Call, If, Index, Lit, Sample, Seq, Skip, Unop,
    Var, VecLit, While, expr_cells, target_cells, type_of,
)
from ..pwhile.interp import eval_expr

MONOTONE = "monotone"
ANTITONE = "antitone"
NEITHER = "neither"
CONSTANT = "constant"


@dataclass(frozen=True)
class VarSets:
    fv: frozenset
    rv: frozenset
    wv: frozenset
    mv: frozenset


def analyze_vars(c, decls) -> VarSets:
    rv, wv, mv = _analyze(c, decls)
    return VarSets(frozenset(rv | mv), frozenset(rv), frozenset(wv), frozenset(mv))


def _analyze(c, decls):
    if isinstance(c, Skip):
        return set(), set(), set()
    if isinstance(c, Assign):
        reads = expr_cells(c.expr, decls)
        for i in c.target.indices:
            reads |= expr_cells(i, decls)
        cells, exact = target_cells(c.target, decls)
        return reads, (cells if exact else set()), set(cells)
    if isinstance(c, Sample):
        reads = set()
        for i in c.target.indices:
            reads |= expr_cells(i, decls)
        cells, exact = target_cells(c.target, decls)
        return reads, (cells if exact else set()), set(cells)
    if isinstance(c, Seq):
        rv1, wv1, mv1 = _analyze(c.first, decls)
        rv2, wv2, mv2 = _analyze(c.second, decls)
        return rv1 | rv2, wv1 | wv2, mv1 | mv2
    if isinstance(c, If):
        rv1, wv1, mv1 = _analyze(c.then, decls)
        rv2, wv2, mv2 = _analyze(c.els, decls)
        guard = expr_cells(c.guard, decls)
        return guard | rv1 | rv2, wv1 & wv2, mv1 | mv2
    if isinstance(c, While):
        rv, _, mv = _analyze(c.body, decls)
        # a loop may run zero times, so it promises no writes
        return expr_cells(c.guard, decls) | rv, set(), mv
    raise TypingError(f"unknown command {c!r}")


# -- monotonicity ----------------------------------------------------------------


class _Dir:
    """Direction lattice element: which of the two directions still hold."""

    __slots__ = ("mono", "anti")

    def __init__(self, mono, anti):
        self.mono, self.anti = mono, anti

    def verdict(self):
        if self.mono and self.anti:
            return CONSTANT
        if self.mono:
            return MONOTONE
        if self.anti:
            return ANTITONE
        return NEITHER


_BOTH = (True, True)
_NONE = (False, False)


def _join(l: _Dir, r: _Dir) -> _Dir:
    return _Dir(l.mono and r.mono, l.anti and r.anti)


def _flip(d: _Dir) -> _Dir:
    return _Dir(d.anti, d.mono)


def is_monotone_expr(e, over: Iterable[VarName], decls) -> str:
    """Direction of `e` in the cells `over`, by syntactic composition rules.

    Returns one of monotone / antitone / constant / neither; "neither" only
    means the rules could not certify a direction.
    """
    over = frozenset(over)
    return _direction(e, over, decls).verdict()


def _direction(e, over, decls) -> _Dir:
    if isinstance(e, Lit):
        return _Dir(*_BOTH)
    if isinstance(e, (Var, Index)):
        cells = expr_cells(e, decls)
        if not cells & over:
            return _Dir(*_BOTH)
        if isinstance(e, Index):
            # selection by an index that itself varies defeats the analysis
            idx_cells = set()
            node = e
            while isinstance(node, Index):
                idx_cells |= expr_cells(node.index, decls)
                node = node.base
            if idx_cells & over:
                return _Dir(*_NONE)
        return _Dir(True, False)
    if isinstance(e, Unop):
        d = _direction(e.arg, over, decls)
        return _flip(d)
    if isinstance(e, Binop):
        l = _direction(e.left, over, decls)
        r = _direction(e.right, over, decls)
        op = e.op
        if op in ("+", "||", "&&"):
            return _join(l, r)
        if op == "-":
            return _join(l, _flip(r))
        if op == "*":
            if isinstance(e.left, Lit):
                return r if e.left.value >= 0 else _flip(r)
            if isinstance(e.right, Lit):
                return l if e.right.value >= 0 else _flip(l)
            if _nonneg(e.left, decls) and _nonneg(e.right, decls):
                return _join(l, r)
            return _Dir(l.mono and l.anti and r.mono and r.anti,
                        l.mono and l.anti and r.mono and r.anti)
        if op in (">", ">="):
            return _join(l, _flip(r))
        if op in ("<", "<="):
            return _join(_flip(l), r)
        # equality indicators are direction-free unless constant
        both = l.mono and l.anti and r.mono and r.anti
        return _Dir(both, both)
    if isinstance(e, Call):
        if e.fn == "sum":
            return _direction(e.args[0], over, decls)
        if e.fn == "isZero":
            # sound for the non-negative counts this operation is applied to
            return _flip(_direction(e.args[0], over, decls))
        if e.fn == "outer":
            l = _direction(e.args[0], over, decls)
            r = _direction(e.args[1], over, decls)
            return _join(l, r)
        if e.fn == "zero":
            return _Dir(*_BOTH)
        if e.fn == "mod":
            l = _direction(e.args[0], over, decls)
            both = l.mono and l.anti
            r = _direction(e.args[1], over, decls)
            both = both and r.mono and r.anti
            return _Dir(both, both)
        return _Dir(*_NONE)
    if isinstance(e, VecLit):
        d = _Dir(*_BOTH)
        for item in e.items:
            d = _join(d, _direction(item, over, decls))
        return d
    return _Dir(*_NONE)


def _nonneg(e, decls) -> bool:
    try:
        return type_of(e, decls) == BIT
    except TypingError:
        return False


def table_monotonicity(e, ranges: Mapping[VarName, Iterable[int]], decls,
                       sigma: Mem = EMPTY_MEM) -> str:
    """Ground-truth direction by exhaustive evaluation over `ranges`.

    Only cells listed in `ranges` may occur free in `e` (beyond `sigma`).
    """
    cells = sorted(ranges)
    mems = [Mem(dict(zip(cells, vals)))
            for vals in itertools.product(*(list(ranges[c]) for c in cells))]
    values = {m: eval_expr(e, sigma, m, decls) for m in mems}
    mono = anti = True
    for a, b in itertools.combinations(mems, 2):
        for lo, hi in ((a, b), (b, a)):
            if lo.leq(hi):
                if not _value_leq(values[lo], values[hi]):
                    mono = False
                if not _value_leq(values[hi], values[lo]):
                    anti = False
    if mono and anti:
        return CONSTANT
    if mono:
        return MONOTONE
    if anti:
        return ANTITONE
    return NEITHER


def _value_leq(l, r) -> bool:
    if isinstance(l, tuple):
        return all(_value_leq(a, b) for a, b in zip(l, r))
    return l <= r
