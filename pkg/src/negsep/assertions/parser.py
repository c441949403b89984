"""Text syntax for assertion formulas.

    own(x) (*) own(y)          NA conjunction
    own(x) (x) own(y)          independence conjunction
    P (-*) Q, P (-x) Q         separating implications (syntax only)
    P /\\ Q, P \\/ Q, P -> Q, top, bot
    U[x; {0,1}]  U[bin; oh(2)]  U[g; perm([1,2,3])]
    B[x; 1/2]  D[x]  x ~ e  e <= e'  event(ev)  Pr[ev] <= 1/4
    bigNA(i, 0, N, own(b[i]))  and bigInd/bigAnd/bigOr alike

The separating operators are recognized positionally, so parenthesized
expressions like `(x)` keep their ordinary meaning in operand position.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import ParseError
from ..pwhile.ast import Binop, Lit
from ..pwhile.parser import _Parser, tokenize
from .formula import (
    And, BAdd, BMul, BPow, BRat, BernAtom, Bottom, DetmAtom, EqAtom,
    EventAtom, Imp, LeAtom, Or, PrAtom, Star, Top, UnifAtom, Wand, big_and,
    big_na, big_indep, big_or, onehot_atom, own, perm_atom, INDEP, NA,
)

_BIG_OPS = {"bigNA": big_na, "bigInd": big_indep, "bigAnd": big_and, "bigOr": big_or}


class _FormulaParser(_Parser):
    def __init__(self, tokens, decls, consts):
        super().__init__(tokens, consts)
        self.decls = dict(decls or {})

    # -- separating-operator lookahead ------------------------------------

    def _sep_op(self):
        """The separating operator starting at the cursor, if any."""
        t0, t1, t2, t3 = (self.peek(k) for k in range(4))
        if t0.kind != "(":
            return None
        if t1.kind == "*" and t2.kind == ")":
            return ("star", NA, 3)
        if t1.kind == "ident" and t1.text == "x" and t2.kind == ")":
            return ("star", INDEP, 3)
        if t1.kind == "-" and t2.kind == "*" and t3.kind == ")":
            return ("wand", NA, 4)
        if t1.kind == "-" and t2.kind == "ident" and t2.text == "x" and t3.kind == ")":
            return ("wand", INDEP, 4)
        return None

    def _consume(self, n):
        self.i += n

    # -- grammar -----------------------------------------------------------

    def formula(self):
        f = self.or_formula()
        if self.at("->"):
            self.next()
            return Imp(f, self.formula())
        op = self._sep_op()
        if op and op[0] == "wand":
            self._consume(op[2])
            return Wand(op[1], f, self.formula())
        return f

    def or_formula(self):
        f = self.and_formula()
        while self.at("\\/"):
            self.next()
            f = Or(f, self.and_formula())
        return f

    def and_formula(self):
        f = self.star_formula()
        while self.at("/\\"):
            self.next()
            f = And(f, self.star_formula())
        return f

    def star_formula(self):
        f = self.unit_formula()
        while True:
            op = self._sep_op()
            if op and op[0] == "star":
                self._consume(op[2])
                f = Star(op[1], f, self.unit_formula())
            else:
                return f

    def unit_formula(self):
        t = self.peek()
        if t.kind == "ident":
            if t.text == "top":
                self.next()
                return Top()
            if t.text == "bot":
                self.next()
                return Bottom()
            if t.text in _BIG_OPS:
                return self.big_formula()
            if t.text in ("U", "B", "D") and self.peek(1).kind == "[":
                return self.bracket_atom()
            if t.text == "Pr" and self.peek(1).kind == "[":
                return self.pr_atom()
            if t.text == "event" and self.peek(1).kind == "(":
                return self.event_atom()
            if t.text == "own" and self.peek(1).kind == "(":
                self.next()
                self.next()
                e = self.expr()
                self.expect(")")
                return own(e)
        if t.kind == "(":
            save = self.i
            try:
                self.next()
                f = self.formula()
                self.expect(")")
                return f
            except ParseError:
                self.i = save
        return self.relation_atom()

    def relation_atom(self):
        t = self.peek()
        e = self.expr()
        if self.at("~"):
            self.next()
            return EqAtom(e, self.expr())
        # a top-level comparison expression reads as the pointwise atom
        if isinstance(e, Binop) and e.op in ("=", "<=", "<", ">=", ">"):
            if e.op == "=":
                return EqAtom(e.left, e.right)
            if e.op == "<=":
                return LeAtom(e.left, e.right)
            if e.op == "<":
                return LeAtom(Binop("+", e.left, Lit(1)), e.right)
            if e.op == ">=":
                return LeAtom(e.right, e.left)
            return LeAtom(Binop("+", e.right, Lit(1)), e.left)
        raise ParseError(f"expected an atomic formula at {t.text!r}", t.line, t.col)

    def big_formula(self):
        ctor = _BIG_OPS[self.next().text]
        self.expect("(")
        index = self.expect("ident").text
        if index in self.consts:
            self.error(f"big-operator index {index} shadows a constant")
        self.expect(",")
        lo = self.const_expr()
        self.expect(",")
        hi = self.const_expr()
        self.expect(",")
        if lo >= hi:
            self.error("big operator needs a nonempty index range")
        start = self.i
        parts = []
        for value in range(lo, hi):
            self.i = start
            self.consts[index] = value
            parts.append(self.formula())
        del self.consts[index]
        self.expect(")")
        return ctor(parts)

    def bracket_atom(self):
        head = self.next().text
        self.expect("[")
        e = self.expr()
        if head == "D":
            self.expect("]")
            return DetmAtom(e)
        self.expect(";")
        if head == "B":
            p = self.rational()
            self.expect("]")
            return BernAtom(e, p)
        # U[e; ...]
        t = self.peek()
        if t.kind == "oh":
            self.next()
            self.expect("(")
            n = self.const_expr()
            self.expect(")")
            self.expect("]")
            return onehot_atom(e, n)
        if t.kind == "perm":
            self.next()
            self.expect("(")
            if self.at("["):
                self.next()
                values = self.const_list("]")
                self.expect("]")
            else:
                values = self.const_list(")")
            self.expect(")")
            self.expect("]")
            return perm_atom(e, values)
        self.expect("{")
        values = self.const_list("}")
        self.expect("}")
        self.expect("]")
        return UnifAtom(e, tuple(values))

    def event_atom(self):
        self.next()
        self.expect("(")
        ev = self.expr()
        value = 1
        if self.at(";"):
            self.next()
            value = self.const_expr()
            if value not in (0, 1):
                self.error("event value must be 0 or 1")
        self.expect(")")
        return EventAtom(ev, value)

    def pr_atom(self):
        self.next()
        self.expect("[")
        ev = self.expr()
        self.expect("]")
        t = self.next()
        if t.kind not in ("<=", ">=", "="):
            raise ParseError(f"expected a probability relation, found {t.text!r}",
                             t.line, t.col)
        return PrAtom(ev, t.kind, self.bound_sum())

    # -- probability bounds --------------------------------------------------

    def rational(self) -> Fraction:
        num = int(self.expect("int").text)
        if self.at("/"):
            self.next()
            den = int(self.expect("int").text)
            if den == 0:
                self.error("zero denominator")
            return Fraction(num, den)
        return Fraction(num)

    def bound_sum(self):
        b = self.bound_prod()
        while self.at("+"):
            self.next()
            b = BAdd(b, self.bound_prod())
        return b

    def bound_prod(self):
        b = self.bound_atom()
        while self.at("*"):
            self.next()
            b = BMul(b, self.bound_atom())
        return b

    def bound_atom(self):
        if self.at("("):
            self.next()
            inner = self.bound_sum()
            self.expect(")")
            if self.at("^"):
                self.next()
                if not isinstance(inner, BRat):
                    self.error("power base must be a rational constant")
                return BPow(inner.value, self.bound_exponent())
            return inner
        value = self.rational()
        if self.at("^"):
            self.next()
            return BPow(value, self.bound_exponent())
        return BRat(value)

    def bound_exponent(self):
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Lit(int(t.text))
        if t.kind == "ident":
            if t.text in self.consts:
                self.next()
                return Lit(self.consts[t.text])
            from ..pwhile.ast import Var
            self.next()
            return Var(t.text)
        self.error("expected an exponent")


def parse_formula(text: str, decls=None, consts=None):
    """Parse a formula against a declaration table."""
    parser = _FormulaParser(tokenize(text), decls, consts or {})
    f = parser.formula()
    parser.expect("eof")
    return f
