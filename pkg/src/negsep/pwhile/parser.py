"""Parser and static checks for the program text format.

Programs are UTF-8 text with `#` comments, `;`-separated statements, `{}`
blocks, `const`/`det`/`rand` declarations, `:=` assignment, and `<-$`
sampling from `unif{...}`, `oh(N)`, or `perm([...])`.
"""

from __future__ import annotations

import re

from ..dist import DET, RAND
from ..errors import ParseError, StaticRestrictionViolation, TypingError
from .ast import (
    BIT, INT, Assign, Binop, Call, If, Index, Lit, OneHotSampler, PermSampler,
    Program, Sample, Seq, Skip, Target, UnifSampler, Unop, Var, VarDecl,
    VecLit, While, is_vec, mentions_rand, seq, target_type, type_of, vec,
)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><-\$|\.\.|:=|<=|>=|!=|&&|\|\||\|-|->|/\\|\\/|[-+*=<>!;:,{}()\[\]~^/])
""", re.VERBOSE)

KEYWORDS = {"const", "det", "rand", "int", "bit", "bool", "skip", "if", "else",
            "while", "true", "false", "unif", "oh", "perm"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.text!r}@{self.line}:{self.col})"


def tokenize(text: str):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(tok)
        else:
            if kind == "ident" and tok in KEYWORDS:
                kind = tok
            elif kind == "op":
                kind = tok
            tokens.append(Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens, consts):
        self.toks = tokens
        self.i = 0
        self.consts = dict(consts)
        self.decls: dict = {}

    # -- token helpers ---------------------------------------------------

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind):
        return self.peek().kind == kind

    def expect(self, kind):
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text!r}", t.line, t.col)
        return t

    def error(self, msg):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- program ----------------------------------------------------------

    def program(self) -> Program:
        while self.peek().kind in ("const", "det", "rand"):
            self.declaration()
        body = self.stmt_seq() if not self.at("eof") else Skip()
        self.expect("eof")
        return Program(self.decls, self.consts, body)

    def declaration(self):
        t = self.next()
        if t.kind == "const":
            name = self.expect("ident").text
            self.expect("=")
            value = self.const_expr()
            self.expect(";")
            # an externally supplied parameter overrides the file default
            self.consts.setdefault(name, value)
            return
        kind = DET if t.kind == "det" else RAND
        name_tok = self.expect("ident")
        name = name_tok.text
        if name in self.decls or name in self.consts:
            raise ParseError(f"duplicate declaration of {name}",
                             name_tok.line, name_tok.col)
        self.expect(":")
        ty_tok = self.next()
        if ty_tok.kind not in ("int", "bit", "bool"):
            raise ParseError(f"expected a type, found {ty_tok.text!r}",
                             ty_tok.line, ty_tok.col)
        base = INT if ty_tok.kind == "int" else BIT
        shape = []
        while self.at("["):
            self.next()
            n = self.const_expr()
            if n <= 0:
                raise ParseError("array dimension must be positive",
                                 ty_tok.line, ty_tok.col)
            shape.append(n)
            self.expect("]")
        self.expect(";")
        if kind == DET and shape:
            raise ParseError("deterministic variables must be scalars",
                             name_tok.line, name_tok.col)
        self.decls[name] = VarDecl(name, kind, base, tuple(shape))

    # -- statements --------------------------------------------------------

    def stmt_seq(self):
        stmts = [self.stmt()]
        while self.at(";"):
            self.next()
            if self.peek().kind in ("}", "eof"):
                break
            stmts.append(self.stmt())
        return seq(*stmts)

    def stmt(self):
        t = self.peek()
        if t.kind == "skip":
            self.next()
            return Skip()
        if t.kind == "if":
            self.next()
            guard = self.expr()
            then = self.block()
            els = Skip()
            if self.at("else"):
                self.next()
                els = self.block()
            return If(guard, then, els)
        if t.kind == "while":
            self.next()
            guard = self.expr()
            return While(guard, self.block())
        if t.kind == "ident":
            target = self.target()
            op = self.next()
            if op.text == ":=":
                return Assign(target, self.expr())
            if op.text == "<-$":
                return Sample(target, self.sampler())
            raise ParseError(f"expected ':=' or '<-$', found {op.text!r}",
                             op.line, op.col)
        self.error(f"expected a statement, found {t.text!r}")

    def block(self):
        self.expect("{")
        if self.at("}"):
            self.next()
            return Skip()
        body = self.stmt_seq()
        self.expect("}")
        return body

    def target(self) -> Target:
        name = self.expect("ident").text
        indices = []
        while self.at("["):
            self.next()
            indices.append(self.expr())
            self.expect("]")
        return Target(name, tuple(indices))

    def sampler(self):
        t = self.next()
        if t.kind == "unif":
            self.expect("{")
            values = self.const_list("}")
            self.expect("}")
            return UnifSampler(tuple(values))
        if t.kind == "oh":
            self.expect("(")
            n = self.const_expr()
            self.expect(")")
            if n <= 0:
                raise ParseError("oh() needs a positive length", t.line, t.col)
            return OneHotSampler(n)
        if t.kind == "perm":
            self.expect("(")
            if self.at("["):
                self.next()
                values = self.const_list("]")
                self.expect("]")
            else:
                values = self.const_list(")")
            self.expect(")")
            if not values:
                raise ParseError("perm() needs a nonempty multiset", t.line, t.col)
            return PermSampler(tuple(values))
        raise ParseError(f"expected a sampler, found {t.text!r}", t.line, t.col)

    def const_list(self, closer):
        if self.peek().kind == closer:
            return []
        values = [self.const_range_or_value()]
        while self.at(","):
            self.next()
            values.append(self.const_range_or_value())
        out = []
        for v in values:
            out.extend(v if isinstance(v, list) else [v])
        return out

    def const_range_or_value(self):
        lo = self.const_expr()
        if self.at(".."):
            self.next()
            hi = self.const_expr()
            if hi < lo:
                self.error("empty range")
            return list(range(lo, hi + 1))
        return lo

    # -- expressions ---------------------------------------------------------

    def const_expr(self) -> int:
        e = self.expr()
        try:
            return _fold_const(e, self.consts)
        except TypingError as exc:
            self.error(str(exc))

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        e = self.and_expr()
        while self.peek().text == "||":
            self.next()
            e = Binop("||", e, self.and_expr())
        return e

    def and_expr(self):
        e = self.not_expr()
        while self.peek().text == "&&":
            self.next()
            e = Binop("&&", e, self.not_expr())
        return e

    def not_expr(self):
        if self.peek().text == "!":
            self.next()
            return Unop("!", self.not_expr())
        return self.cmp_expr()

    def cmp_expr(self):
        e = self.add_expr()
        if self.peek().text in ("=", "!=", "<", "<=", ">", ">="):
            op = self.next().text
            e = Binop(op, e, self.add_expr())
        return e

    def add_expr(self):
        e = self.mul_expr()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            e = Binop(op, e, self.mul_expr())
        return e

    def mul_expr(self):
        e = self.unary()
        while self.peek().text == "*":
            self.next()
            e = Binop("*", e, self.unary())
        return e

    def unary(self):
        if self.peek().text == "-":
            self.next()
            return Unop("-", self.unary())
        return self.postfix()

    def postfix(self):
        e = self.atom()
        while self.at("["):
            self.next()
            e = Index(e, self.expr())
            self.expect("]")
        return e

    def atom(self):
        t = self.next()
        if t.kind == "int":
            return Lit(int(t.text))
        if t.kind == "true":
            return Lit(1, bool_syntax=True)
        if t.kind == "false":
            return Lit(0, bool_syntax=True)
        if t.kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "[":
            items = [self.expr()]
            while self.at(","):
                self.next()
                items.append(self.expr())
            self.expect("]")
            return VecLit(tuple(items))
        if t.kind == "ident":
            if t.text in self.consts:
                return Lit(self.consts[t.text])
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.next()
                        args.append(self.expr())
                self.expect(")")
                return Call(t.text, tuple(args))
            return Var(t.text)
        raise ParseError(f"expected an expression, found {t.text!r}", t.line, t.col)


def _fold_const(e, consts) -> int:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        if e.name in consts:
            return consts[e.name]
        raise TypingError(f"{e.name} is not a constant")
    if isinstance(e, Unop) and e.op == "-":
        return -_fold_const(e.arg, consts)
    if isinstance(e, Binop) and e.op in ("+", "-", "*"):
        l, r = _fold_const(e.left, consts), _fold_const(e.right, consts)
        return l + r if e.op == "+" else l - r if e.op == "-" else l * r
    raise TypingError("expected a constant expression")


# -- static checks ------------------------------------------------------------------


def check_program(prog: Program):
    """Type checking plus the det/rand discipline; raises on violation."""
    _check_command(prog.body, prog.decls, rand_guard_depth=0)


def _check_command(c, decls, rand_guard_depth):
    if isinstance(c, Skip):
        return
    if isinstance(c, Seq):
        _check_command(c.first, decls, rand_guard_depth)
        _check_command(c.second, decls, rand_guard_depth)
        return
    if isinstance(c, Assign):
        d = decls.get(c.target.name)
        if d is None:
            raise TypingError(f"undeclared variable {c.target.name}")
        for i in c.target.indices:
            if type_of(i, decls) not in (INT, BIT):
                raise TypingError(f"array index must be an integer in {c.target}")
        tty = target_type(c.target, decls)
        ety = type_of(c.expr, decls)
        if not _assignable(tty, ety, c.expr):
            raise TypingError(
                f"cannot assign a value of shape {ety} to {c.target} of shape {tty}")
        if d.kind == DET:
            if rand_guard_depth:
                raise StaticRestrictionViolation(
                    f"assignment to deterministic {c.target.name} under a randomized guard")
            if mentions_rand(c.expr, decls) or any(
                    mentions_rand(i, decls) for i in c.target.indices):
                raise StaticRestrictionViolation(
                    f"deterministic {c.target.name} assigned from randomized state")
        return
    if isinstance(c, Sample):
        d = decls.get(c.target.name)
        if d is None:
            raise TypingError(f"undeclared variable {c.target.name}")
        if d.kind == DET:
            raise StaticRestrictionViolation(
                f"sampling into deterministic variable {c.target.name}")
        tty = target_type(c.target, decls)
        s = c.sampler
        if isinstance(s, UnifSampler):
            if tty == INT:
                pass
            elif tty == BIT:
                if not set(s.values) <= {0, 1}:
                    raise TypingError(f"{c.target} is a bit but {s} samples non-bits")
            else:
                raise TypingError(f"unif samples a scalar, {c.target} is an array")
        elif isinstance(s, OneHotSampler):
            if tty != vec(s.n, BIT):
                raise TypingError(f"{s} needs a bit[{s.n}] target, got {c.target}")
        elif isinstance(s, PermSampler):
            n = len(s.values)
            if not (is_vec(tty) and tty[1] == n and tty[2] in (INT, BIT)):
                raise TypingError(f"{s} needs a length-{n} array target")
            if tty[2] == BIT and not set(s.values) <= {0, 1}:
                raise TypingError(f"{c.target} is a bit array but {s} has non-bits")
        return
    if isinstance(c, (If, While)):
        if type_of(c.guard, decls) != BIT:
            raise TypingError(f"guard must be a bit: {c.guard}")
        inner = rand_guard_depth + (1 if mentions_rand(c.guard, decls) else 0)
        if isinstance(c, If):
            _check_command(c.then, decls, inner)
            _check_command(c.els, decls, inner)
        else:
            _check_command(c.body, decls, inner)
        return
    raise TypingError(f"unknown command {c!r}")


def _assignable(target_ty, expr_ty, expr) -> bool:
    if target_ty == expr_ty:
        return True
    if target_ty == INT and expr_ty == BIT:
        return True
    if target_ty == BIT and expr_ty == INT:
        # 0/1 literals may be written to bits
        return isinstance(expr, Lit) and expr.value in (0, 1)
    if is_vec(target_ty) and is_vec(expr_ty) and target_ty[1] == expr_ty[1]:
        return _assignable(target_ty[2], expr_ty[2], expr)
    return False


def parse_program(text: str, params=None) -> Program:
    """Parse and statically check a program; `params` pre-binds constants."""
    parser = _Parser(tokenize(text), params or {})
    prog = parser.program()
    check_program(prog)
    return prog


def parse_expr(text: str, decls=None, consts=None):
    """Parse a single expression against a declaration table."""
    parser = _Parser(tokenize(text), consts or {})
    parser.decls = dict(decls or {})
    e = parser.expr()
    parser.expect("eof")
    if decls is not None:
        type_of(e, parser.decls)
    return e
