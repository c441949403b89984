"""Assertion formulas: atoms over program expressions and two separating
conjunctions, indexed 1 (independence) and 2 (negative association)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from ..dist import VarName
from ..errors import TypingError, UnboundVariable
from ..pwhile.ast import (
    Binop, Call, Index, Lit, Var, VecLit, expr_cells, walk_exprs,
)

INDEP = 1
NA = 2


# -- probability bounds --------------------------------------------------------
#
# The bound position of a probability-comparison atom is a deterministic
# rational-valued expression: sums and products of rational literals and
# powers of a rational base by a deterministic integer exponent.

@dataclass(frozen=True)
class BRat:
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class BPow:
    base: Fraction
    exp: object  # integer program expression over deterministic variables

    def __str__(self):
        return f"({self.base})^({self.exp})"


@dataclass(frozen=True)
class BMul:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} * {self.right}"


@dataclass(frozen=True)
class BAdd:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} + {self.right}"


def eval_bound(b, sigma, decls) -> Fraction:
    from ..pwhile.interp import eval_expr
    from ..dist import EMPTY_MEM

    if isinstance(b, BRat):
        return b.value
    if isinstance(b, BPow):
        exp = eval_expr(b.exp, sigma, EMPTY_MEM, decls)
        if not isinstance(exp, int):
            raise TypingError(f"non-integer exponent in {b}")
        return Fraction(b.base) ** exp
    if isinstance(b, BMul):
        return eval_bound(b.left, sigma, decls) * eval_bound(b.right, sigma, decls)
    if isinstance(b, BAdd):
        return eval_bound(b.left, sigma, decls) + eval_bound(b.right, sigma, decls)
    raise TypingError(f"unknown bound expression {b!r}")


def bound_cells(b, decls):
    if isinstance(b, BRat):
        return set()
    if isinstance(b, BPow):
        return expr_cells(b.exp, decls)
    return bound_cells(b.left, decls) | bound_cells(b.right, decls)


# -- atoms -----------------------------------------------------------------------

@dataclass(frozen=True)
class UnifAtom:
    expr: object
    values: Tuple  # multiset of outcomes; entries are ints or nested tuples

    def __str__(self):
        return f"U[{self.expr}; {{{', '.join(map(str, self.values))}}}]"


@dataclass(frozen=True)
class BernAtom:
    expr: object
    p: Fraction

    def __str__(self):
        return f"B[{self.expr}; {self.p}]"


@dataclass(frozen=True)
class DetmAtom:
    expr: object

    def __str__(self):
        return f"D[{self.expr}]"


@dataclass(frozen=True)
class EqAtom:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} ~ {self.right}"


@dataclass(frozen=True)
class LeAtom:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} <= {self.right}"


@dataclass(frozen=True)
class EventAtom:
    ev: object
    value: int = 1

    def __str__(self):
        if self.value == 1:
            return f"event({self.ev})"
        return f"event({self.ev}; 0)"


@dataclass(frozen=True)
class PrAtom:
    ev: object
    rel: str  # "=", "<=", ">="
    bound: object

    def __str__(self):
        return f"Pr[{self.ev}] {self.rel} {self.bound}"


ATOMS = (UnifAtom, BernAtom, DetmAtom, EqAtom, LeAtom, EventAtom, PrAtom)


# -- connectives -------------------------------------------------------------------

@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "top"


@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return "bot"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} /\\ {self.right})"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} \\/ {self.right})"


@dataclass(frozen=True)
class Imp:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Star:
    index: int
    left: object
    right: object

    def __str__(self):
        op = "(x)" if self.index == INDEP else "(*)"
        return f"({self.left} {op} {self.right})"


@dataclass(frozen=True)
class Wand:
    index: int
    left: object
    right: object

    def __str__(self):
        op = "(-x)" if self.index == INDEP else "(-*)"
        return f"({self.left} {op} {self.right})"


# -- constructors ------------------------------------------------------------------

def own(e) -> EqAtom:
    """Ownership: the expression is defined (e ~ e)."""
    return EqAtom(e, e)


def cell_expr(cell: VarName):
    e = Var(cell.name)
    for i in cell.index:
        e = Index(e, Lit(i))
    return e


def own_cells(cells):
    return big_and([own(cell_expr(c)) for c in sorted(cells)])


def one_hot_values(n: int):
    return tuple(tuple(1 if i == hot else 0 for i in range(n)) for hot in range(n))


def perm_values(values):
    import itertools
    return tuple(itertools.permutations(values))


def onehot_atom(e, n: int) -> UnifAtom:
    return UnifAtom(e, one_hot_values(n))


def perm_atom(e, values) -> UnifAtom:
    return UnifAtom(e, perm_values(tuple(values)))


def _fold(op, items):
    items = list(items)
    if not items:
        return Top()
    out = items[0]
    for item in items[1:]:
        out = op(out, item)
    return out


def big_and(items):
    return _fold(And, items)


def big_or(items):
    return _fold(Or, items)


def big_star(index, items):
    return _fold(lambda a, b: Star(index, a, b), items)


def big_na(items):
    return big_star(NA, items)


def big_indep(items):
    return big_star(INDEP, items)


# -- queries -------------------------------------------------------------------------

def fv(phi, decls) -> set:
    """Conservative set of memory cells the formula depends on."""
    if isinstance(phi, (Top, Bottom)):
        return set()
    if isinstance(phi, UnifAtom):
        return expr_cells(phi.expr, decls)
    if isinstance(phi, BernAtom):
        return expr_cells(phi.expr, decls)
    if isinstance(phi, DetmAtom):
        return expr_cells(phi.expr, decls)
    if isinstance(phi, (EqAtom, LeAtom)):
        return expr_cells(phi.left, decls) | expr_cells(phi.right, decls)
    if isinstance(phi, EventAtom):
        return expr_cells(phi.ev, decls)
    if isinstance(phi, PrAtom):
        return expr_cells(phi.ev, decls) | bound_cells(phi.bound, decls)
    if isinstance(phi, (And, Or, Imp, Star, Wand)):
        return fv(phi.left, decls) | fv(phi.right, decls)
    raise TypingError(f"unknown formula {phi!r}")


def is_wand_free(phi) -> bool:
    if isinstance(phi, Wand):
        return False
    if isinstance(phi, (And, Or, Imp, Star)):
        return is_wand_free(phi.left) and is_wand_free(phi.right)
    return True


def subst_expr(e, name: str, repl):
    """Substitute `repl` for the variable `name` in a program expression."""
    if isinstance(e, Var):
        return repl if e.name == name else e
    if isinstance(e, Lit):
        return e
    if isinstance(e, Index):
        return Index(subst_expr(e.base, name, repl), subst_expr(e.index, name, repl))
    from ..pwhile.ast import Unop
    if isinstance(e, Unop):
        return Unop(e.op, subst_expr(e.arg, name, repl))
    if isinstance(e, Binop):
        return Binop(e.op, subst_expr(e.left, name, repl),
                     subst_expr(e.right, name, repl))
    if isinstance(e, Call):
        return Call(e.fn, tuple(subst_expr(a, name, repl) for a in e.args))
    if isinstance(e, VecLit):
        return VecLit(tuple(subst_expr(a, name, repl) for a in e.items))
    raise TypingError(f"unknown expression {e!r}")


def _subst_bound(b, name, repl):
    if isinstance(b, BRat):
        return b
    if isinstance(b, BPow):
        return BPow(b.base, subst_expr(b.exp, name, repl))
    if isinstance(b, BMul):
        return BMul(_subst_bound(b.left, name, repl), _subst_bound(b.right, name, repl))
    if isinstance(b, BAdd):
        return BAdd(_subst_bound(b.left, name, repl), _subst_bound(b.right, name, repl))
    raise TypingError(f"unknown bound expression {b!r}")


def subst(phi, name: str, repl):
    """Substitute an expression for a scalar variable throughout a formula."""
    if isinstance(phi, (Top, Bottom)):
        return phi
    if isinstance(phi, UnifAtom):
        return UnifAtom(subst_expr(phi.expr, name, repl), phi.values)
    if isinstance(phi, BernAtom):
        return BernAtom(subst_expr(phi.expr, name, repl), phi.p)
    if isinstance(phi, DetmAtom):
        return DetmAtom(subst_expr(phi.expr, name, repl))
    if isinstance(phi, EqAtom):
        return EqAtom(subst_expr(phi.left, name, repl), subst_expr(phi.right, name, repl))
    if isinstance(phi, LeAtom):
        return LeAtom(subst_expr(phi.left, name, repl), subst_expr(phi.right, name, repl))
    if isinstance(phi, EventAtom):
        return EventAtom(subst_expr(phi.ev, name, repl), phi.value)
    if isinstance(phi, PrAtom):
        return PrAtom(subst_expr(phi.ev, name, repl), phi.rel,
                      _subst_bound(phi.bound, name, repl))
    ctor = type(phi)
    if isinstance(phi, (Star, Wand)):
        return ctor(phi.index, subst(phi.left, name, repl), subst(phi.right, name, repl))
    if isinstance(phi, (And, Or, Imp)):
        return ctor(subst(phi.left, name, repl), subst(phi.right, name, repl))
    raise TypingError(f"unknown formula {phi!r}")
