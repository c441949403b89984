"""AST for the probabilistic imperative language.

Booleans are the 0/1 integers ("bit"); arrays desugar to indexed scalar
cells at the memory level.  Expression and command nodes are immutable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..dist import DET, RAND, VarName
from ..errors import TypingError

INT = ("int",)
BIT = ("bit",)


def vec(n: int, elem) -> tuple:
    return ("vec", n, elem)


def is_vec(ty) -> bool:
    return ty[0] == "vec"


def format_type(ty) -> str:
    if ty == INT:
        return "int"
    if ty == BIT:
        return "bit"
    return f"{format_type(ty[2])}[{ty[1]}]"


# -- expressions -----------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: int
    bool_syntax: bool = False

    def __str__(self):
        if self.bool_syntax:
            return "true" if self.value else "false"
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: "Expr"

    def __str__(self):
        return f"{self.base}[{self.index}]"


@dataclass(frozen=True)
class Unop:
    op: str  # "-" | "!"
    arg: "Expr"

    def __str__(self):
        return f"{self.op}({self.arg})"


@dataclass(frozen=True)
class Binop:
    op: str  # + - * && || = != < <= > >=
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    fn: str  # mod | sum | isZero | outer | zero
    args: Tuple["Expr", ...]

    def __str__(self):
        return f"{self.fn}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class VecLit:
    items: Tuple["Expr", ...]

    def __str__(self):
        return "[" + ", ".join(map(str, self.items)) + "]"


Expr = (Lit, Var, Index, Unop, Binop, Call, VecLit)


# -- samplers --------------------------------------------------------------------

@dataclass(frozen=True)
class UnifSampler:
    values: Tuple[int, ...]  # a multiset; duplicates weight outcomes

    def __str__(self):
        return "unif{" + ", ".join(map(str, self.values)) + "}"


@dataclass(frozen=True)
class OneHotSampler:
    n: int

    def __str__(self):
        return f"oh({self.n})"


@dataclass(frozen=True)
class PermSampler:
    values: Tuple[int, ...]

    def __str__(self):
        return "perm([" + ", ".join(map(str, self.values)) + "])"


# -- commands --------------------------------------------------------------------

@dataclass(frozen=True)
class Target:
    name: str
    indices: Tuple["Expr", ...] = ()

    def __str__(self):
        return self.name + "".join(f"[{i}]" for i in self.indices)


@dataclass(frozen=True)
class Skip:
    def __str__(self):
        return "skip"


@dataclass(frozen=True)
class Assign:
    target: Target
    expr: "Expr"

    def __str__(self):
        return f"{self.target} := {self.expr}"


@dataclass(frozen=True)
class Sample:
    target: Target
    sampler: object

    def __str__(self):
        return f"{self.target} <-$ {self.sampler}"


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"

    def __str__(self):
        return f"{self.first}; {self.second}"


@dataclass(frozen=True)
class If:
    guard: "Expr"
    then: "Command"
    els: "Command"

    def __str__(self):
        return f"if {self.guard} {{ {self.then} }} else {{ {self.els} }}"


@dataclass(frozen=True)
class While:
    guard: "Expr"
    body: "Command"

    def __str__(self):
        return f"while {self.guard} {{ {self.body} }}"


Command = (Skip, Assign, Sample, Seq, If, While)


def seq(*commands) -> object:
    """Right-nested sequence of commands (empty yields skip)."""
    commands = [c for c in commands if not isinstance(c, Skip)]
    if not commands:
        return Skip()
    out = commands[-1]
    for c in reversed(commands[:-1]):
        out = Seq(c, out)
    return out


# -- declarations ----------------------------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str  # det | rand
    base: tuple  # INT | BIT
    shape: Tuple[int, ...] = ()

    @property
    def type(self) -> tuple:
        ty = self.base
        for n in reversed(self.shape):
            ty = vec(n, ty)
        return ty

    def cells(self):
        if not self.shape:
            return [VarName(self.name, (), self.kind)]
        return [VarName(self.name, idx, self.kind)
                for idx in itertools.product(*(range(n) for n in self.shape))]


@dataclass(frozen=True)
class Program:
    decls: "dict[str, VarDecl]"
    consts: "dict[str, int]"
    body: object

    def det_cells(self):
        return [c for d in self.decls.values() if d.kind == DET for c in d.cells()]

    def rand_cells(self):
        return [c for d in self.decls.values() if d.kind == RAND for c in d.cells()]


# -- expression typing and variable queries ---------------------------------------

def type_of(e, decls) -> tuple:
    """Static type of an expression; raises TypingError when ill-typed."""
    if isinstance(e, Lit):
        return BIT if e.value in (0, 1) else INT
    if isinstance(e, Var):
        d = decls.get(e.name)
        if d is None:
            raise TypingError(f"undeclared variable {e.name}")
        return d.type
    if isinstance(e, Index):
        base = type_of(e.base, decls)
        if not is_vec(base):
            raise TypingError(f"indexing a non-array value: {e}")
        if type_of(e.index, decls) not in (INT, BIT):
            raise TypingError(f"array index must be an integer: {e}")
        return base[2]
    if isinstance(e, Unop):
        ty = type_of(e.arg, decls)
        if e.op == "!":
            if ty != BIT:
                raise TypingError(f"'!' needs a bit operand: {e}")
            return BIT
        if ty not in (INT, BIT):
            raise TypingError(f"'-' needs an integer operand: {e}")
        return INT
    if isinstance(e, Binop):
        lt, rt = type_of(e.left, decls), type_of(e.right, decls)
        if e.op in ("&&", "||"):
            if lt == BIT and rt == BIT:
                return BIT
            if e.op == "||" and is_vec(lt) and lt == rt and _elem(lt) == BIT:
                return lt
            raise TypingError(f"'{e.op}' needs bit operands: {e}")
        if e.op in ("+", "-", "*"):
            if lt in (INT, BIT) and rt in (INT, BIT):
                return INT
            raise TypingError(f"'{e.op}' needs integer operands: {e}")
        if e.op in ("=", "!="):
            if (lt in (INT, BIT)) != (rt in (INT, BIT)):
                raise TypingError(f"comparing scalar with array: {e}")
            if is_vec(lt) and lt != rt:
                raise TypingError(f"comparing arrays of different shape: {e}")
            return BIT
        if e.op in ("<", "<=", ">", ">="):
            if lt in (INT, BIT) and rt in (INT, BIT):
                return BIT
            raise TypingError(f"'{e.op}' needs integer operands: {e}")
        raise TypingError(f"unknown operator {e.op}")
    if isinstance(e, Call):
        return _type_of_call(e, decls)
    if isinstance(e, VecLit):
        if not e.items:
            raise TypingError("empty vector literal")
        tys = [type_of(item, decls) for item in e.items]
        elem = tys[0]
        for t in tys[1:]:
            if t != elem and {t, elem} <= {INT, BIT}:
                elem = INT
            elif t != elem:
                raise TypingError(f"mixed element types in {e}")
        return vec(len(e.items), elem)
    raise TypingError(f"unknown expression {e!r}")


def _elem(ty):
    while is_vec(ty):
        ty = ty[2]
    return ty


def _type_of_call(e: Call, decls) -> tuple:
    args = e.args
    if e.fn == "mod":
        if len(args) != 2:
            raise TypingError("mod takes two arguments")
        for a in args:
            if type_of(a, decls) not in (INT, BIT):
                raise TypingError(f"mod needs integer arguments: {e}")
        return INT
    if e.fn == "sum":
        if len(args) != 1 or not is_vec(type_of(args[0], decls)):
            raise TypingError("sum takes one array argument")
        return INT
    if e.fn == "isZero":
        if len(args) != 1:
            raise TypingError("isZero takes one array argument")
        ty = type_of(args[0], decls)
        if not is_vec(ty) or ty[2] not in (INT, BIT):
            raise TypingError("isZero needs a one-dimensional array")
        return vec(ty[1], BIT)
    if e.fn == "outer":
        if len(args) != 2:
            raise TypingError("outer takes two arguments")
        lt, rt = (type_of(a, decls) for a in args)
        if not (is_vec(lt) and is_vec(rt) and lt[2] == BIT and rt[2] == BIT):
            raise TypingError("outer needs two bit vectors")
        return vec(lt[1], vec(rt[1], BIT))
    if e.fn == "zero":
        for a in args:
            if not isinstance(a, Lit):
                raise TypingError("zero takes constant dimensions")
        ty = BIT
        for a in reversed(args):
            ty = vec(a.value, ty)
        return ty
    raise TypingError(f"unknown function {e.fn}")


def walk_exprs(e):
    yield e
    for attr in ("base", "index", "arg", "left", "right"):
        child = getattr(e, attr, None)
        if child is not None:
            yield from walk_exprs(child)
    for child in getattr(e, "args", ()) or ():
        yield from walk_exprs(child)
    for child in getattr(e, "items", ()) or ():
        yield from walk_exprs(child)


def base_names(e):
    """Base names of all variables an expression mentions."""
    return {node.name for node in walk_exprs(e) if isinstance(node, Var)}


def mentions_rand(e, decls) -> bool:
    return any(decls[n].kind == RAND for n in base_names(e) if n in decls)


def expr_cells(e, decls):
    """Conservative set of memory cells an expression may read.

    A variable indexed by non-constant expressions contributes all its cells.
    """
    cells: set = set()

    def walk(node):
        if isinstance(node, Var):
            d = decls.get(node.name)
            if d is not None:
                cells.update(d.cells())
            return
        if isinstance(node, Index):
            # collapse constant index chains onto a single cell
            chain = []
            base = node
            while isinstance(base, Index):
                chain.append(base.index)
                base = base.base
            chain.reverse()
            if isinstance(base, Var) and all(isinstance(i, Lit) for i in chain):
                d = decls.get(base.name)
                if d is not None and len(chain) == len(d.shape):
                    idx = tuple(i.value for i in chain)
                    if all(0 <= i < n for i, n in zip(idx, d.shape)):
                        cells.add(VarName(base.name, idx, d.kind))
                        return
            walk(node.base)
            for i in chain:
                walk(i)
            return
        for attr in ("arg", "left", "right"):
            child = getattr(node, attr, None)
            if child is not None:
                walk(child)
        for child in getattr(node, "args", ()) or ():
            walk(child)
        for child in getattr(node, "items", ()) or ():
            walk(child)

    walk(e)
    return cells


def target_cells(t: Target, decls):
    """(cells-that-may-be-written, statically-exact) for an assignment target."""
    d = decls.get(t.name)
    if d is None:
        raise TypingError(f"undeclared variable {t.name}")
    if len(t.indices) > len(d.shape):
        raise TypingError(f"too many indices on {t}")
    if all(isinstance(i, Lit) for i in t.indices):
        prefix = tuple(i.value for i in t.indices)
        for i, n in zip(prefix, d.shape):
            if not 0 <= i < n:
                raise TypingError(f"index out of bounds in {t}")
        rest = d.shape[len(prefix):]
        cells = [VarName(t.name, prefix + idx, d.kind)
                 for idx in itertools.product(*(range(n) for n in rest))]
        return set(cells), True
    return set(d.cells()), False


def target_type(t: Target, decls) -> tuple:
    d = decls[t.name]
    ty = d.type
    for _ in t.indices:
        if not is_vec(ty):
            raise TypingError(f"too many indices on {t}")
        ty = ty[2]
    return ty
