"""Exact denotational interpreter.

Configurations are transformed exactly: sampling splits mass into equal
rational shares, randomized conditionals run both branches on conditional
slices and recombine, and loops iterate until the guard-true residual mass is
exactly zero (or the fuel budget runs out).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping, Optional

from ..dist import Config, Dist, Mem, VarName, EMPTY_MEM
from ..errors import (
    FuelExhausted,
    IndexOutOfRange,
    StaticRestrictionViolation,
    TypingError,
    UnboundVariable,
)
from .ast import (
    Assign, Binop, Call, If, Index, Lit, OneHotSampler, PermSampler, Program,
    Sample, Seq, Skip, Target, UnifSampler, Unop, Var, VecLit, While,
    mentions_rand,
)

DEFAULT_FUEL = 10 ** 5

ZERO = Fraction(0)


def _read_var(name: str, sigma: Mem, m: Mem, decls):
    d = decls.get(name)
    if d is not None:
        store = sigma if d.kind == "det" else m
        if not d.shape:
            cell = VarName(name, (), d.kind)
            if cell not in store:
                raise UnboundVariable(f"{cell} is unbound")
            return store[cell]

        def read(prefix, shape):
            if not shape:
                cell = VarName(name, prefix, d.kind)
                if cell not in store:
                    raise UnboundVariable(f"{cell} is unbound")
                return store[cell]
            return tuple(read(prefix + (i,), shape[1:]) for i in range(shape[0]))

        return read((), d.shape)
    # undeclared: fall back to a scalar cell in either store
    for kind, store in (("rand", m), ("det", sigma)):
        cell = VarName(name, (), kind)
        if cell in store:
            return store[cell]
    raise UnboundVariable(f"{name} is unbound")


def eval_expr(e, sigma: Mem, m: Mem, decls=None):
    """Evaluate an expression on a deterministic memory and one support memory."""
    decls = decls or {}
    return _eval(e, sigma, m, decls)


def _eval(e, sigma, m, decls):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return _read_var(e.name, sigma, m, decls)
    if isinstance(e, Index):
        base = _eval(e.base, sigma, m, decls)
        idx = _eval(e.index, sigma, m, decls)
        if not isinstance(base, tuple):
            raise TypingError(f"indexing a scalar in {e}")
        if not isinstance(idx, int):
            raise TypingError(f"non-integer index in {e}")
        if not 0 <= idx < len(base):
            raise IndexOutOfRange(f"index {idx} out of range in {e}")
        return base[idx]
    if isinstance(e, Unop):
        v = _eval(e.arg, sigma, m, decls)
        if e.op == "!":
            _need_bit(v, e)
            return 1 - v
        return -v
    if isinstance(e, Binop):
        l = _eval(e.left, sigma, m, decls)
        r = _eval(e.right, sigma, m, decls)
        op = e.op
        if op == "&&":
            _need_bit(l, e), _need_bit(r, e)
            return 1 if l and r else 0
        if op == "||":
            if isinstance(l, tuple) or isinstance(r, tuple):
                return _pointwise_or(l, r, e)
            _need_bit(l, e), _need_bit(r, e)
            return 1 if l or r else 0
        if op in ("+", "-", "*"):
            _need_int(l, e), _need_int(r, e)
            return l + r if op == "+" else l - r if op == "-" else l * r
        if op == "=":
            return 1 if l == r else 0
        if op == "!=":
            return 0 if l == r else 1
        _need_int(l, e), _need_int(r, e)
        if op == "<":
            return 1 if l < r else 0
        if op == "<=":
            return 1 if l <= r else 0
        if op == ">":
            return 1 if l > r else 0
        return 1 if l >= r else 0
    if isinstance(e, Call):
        return _eval_call(e, sigma, m, decls)
    if isinstance(e, VecLit):
        return tuple(_eval(item, sigma, m, decls) for item in e.items)
    raise TypingError(f"unknown expression {e!r}")


def _need_bit(v, e):
    if v not in (0, 1):
        raise TypingError(f"expected a bit, got {v} in {e}")


def _need_int(v, e):
    if not isinstance(v, int):
        raise TypingError(f"expected an integer, got {v!r} in {e}")


def _pointwise_or(l, r, e):
    if not (isinstance(l, tuple) and isinstance(r, tuple) and len(l) == len(r)):
        raise TypingError(f"'||' on mismatched shapes in {e}")
    out = []
    for a, b in zip(l, r):
        if isinstance(a, tuple):
            out.append(_pointwise_or(a, b, e))
        else:
            _need_bit(a, e), _need_bit(b, e)
            out.append(1 if a or b else 0)
    return tuple(out)


def _eval_call(e: Call, sigma, m, decls):
    if e.fn == "mod":
        a = _eval(e.args[0], sigma, m, decls)
        b = _eval(e.args[1], sigma, m, decls)
        if b == 0:
            raise TypingError("mod by zero")
        return a % b
    if e.fn == "sum":
        v = _eval(e.args[0], sigma, m, decls)

        def total(x):
            if isinstance(x, tuple):
                return sum(total(y) for y in x)
            return x

        return total(v)
    if e.fn == "isZero":
        v = _eval(e.args[0], sigma, m, decls)
        return tuple(1 if x == 0 else 0 for x in v)
    if e.fn == "outer":
        a = _eval(e.args[0], sigma, m, decls)
        b = _eval(e.args[1], sigma, m, decls)
        return tuple(tuple(1 if (x and y) else 0 for y in b) for x in a)
    if e.fn == "zero":
        dims = [_eval(a, sigma, m, decls) for a in e.args]

        def zeros(ds):
            if not ds:
                return 0
            return tuple(zeros(ds[1:]) for _ in range(ds[0]))

        return zeros(dims)
    raise TypingError(f"unknown function {e.fn}")


# -- assignment targets -------------------------------------------------------------


def _flatten(value, shape, where):
    """Flatten a (possibly nested) value against a shape, row-major."""
    if not shape:
        if isinstance(value, tuple):
            raise TypingError(f"array value for scalar target in {where}")
        return [value]
    if not isinstance(value, tuple) or len(value) != shape[0]:
        raise TypingError(f"shape mismatch writing {where}")
    out = []
    for item in value:
        out.extend(_flatten(item, shape[1:], where))
    return out


def _target_cells_runtime(t: Target, sigma, m, decls):
    d = decls.get(t.name)
    if d is None:
        # undeclared scalar target: randomized by default
        if t.indices:
            raise TypingError(f"undeclared array variable {t.name}")
        return [VarName(t.name, (), "rand")], (), "rand"
    if len(t.indices) > len(d.shape):
        raise TypingError(f"too many indices on {t}")
    prefix = []
    for i, bound in zip(t.indices, d.shape):
        idx = _eval(i, sigma, m, decls)
        if not isinstance(idx, int):
            raise TypingError(f"non-integer index in {t}")
        if not 0 <= idx < bound:
            raise IndexOutOfRange(f"index {idx} out of range in {t}")
        prefix.append(idx)
    rest = d.shape[len(prefix):]
    cells = [VarName(t.name, tuple(prefix) + idx, d.kind)
             for idx in itertools.product(*(range(n) for n in rest))]
    return cells, rest, d.kind


# -- the transformer -----------------------------------------------------------------


def _merge(acc: dict, mem: Mem, p: Fraction):
    acc[mem] = acc.get(mem, ZERO) + p


def _run(c, sigma: Mem, mass: dict, decls, fuel: int):
    if isinstance(c, Skip):
        return sigma, mass
    if isinstance(c, Seq):
        sigma, mass = _run(c.first, sigma, mass, decls, fuel)
        return _run(c.second, sigma, mass, decls, fuel)
    if isinstance(c, Assign):
        return _run_assign(c, sigma, mass, decls)
    if isinstance(c, Sample):
        return _run_sample(c, sigma, mass, decls)
    if isinstance(c, If):
        return _run_if(c, sigma, mass, decls, fuel)
    if isinstance(c, While):
        return _run_while(c, sigma, mass, decls, fuel)
    raise TypingError(f"unknown command {c!r}")


def _run_assign(c: Assign, sigma, mass, decls):
    d = decls.get(c.target.name)
    if d is not None and d.kind == "det":
        cells, rest, _ = _target_cells_runtime(c.target, sigma, EMPTY_MEM, decls)
        value = _eval(c.expr, sigma, EMPTY_MEM, decls)
        flat = _flatten(value, rest, c.target)
        return sigma.updated_many(dict(zip(cells, flat))), mass
    acc: dict = {}
    for m, p in mass.items():
        cells, rest, _ = _target_cells_runtime(c.target, sigma, m, decls)
        value = _eval(c.expr, sigma, m, decls)
        flat = _flatten(value, rest, c.target)
        _merge(acc, m.updated_many(dict(zip(cells, flat))), p)
    return sigma, acc


def _sampler_outcomes(s):
    if isinstance(s, UnifSampler):
        return [(v, ()) for v in s.values]
    if isinstance(s, OneHotSampler):
        outs = []
        for hot in range(s.n):
            outs.append((tuple(1 if i == hot else 0 for i in range(s.n)), (s.n,)))
        return outs
    if isinstance(s, PermSampler):
        return [(perm, (len(s.values),))
                for perm in itertools.permutations(s.values)]
    raise TypingError(f"unknown sampler {s!r}")


def _run_sample(c: Sample, sigma, mass, decls):
    outcomes = _sampler_outcomes(c.sampler)
    share = Fraction(1, len(outcomes))
    acc: dict = {}
    for m, p in mass.items():
        cells, rest, kind = _target_cells_runtime(c.target, sigma, m, decls)
        if kind == "det":
            raise StaticRestrictionViolation(
                f"sampling into deterministic variable {c.target.name}")
        for value, _shape in outcomes:
            flat = _flatten(value, rest, c.target)
            _merge(acc, m.updated_many(dict(zip(cells, flat))), p * share)
    return sigma, acc


def _split_by_guard(guard, sigma, mass, decls):
    true_part: dict = {}
    false_part: dict = {}
    for m, p in mass.items():
        v = _eval(guard, sigma, m, decls)
        _need_bit(v, guard)
        (true_part if v else false_part)[m] = p
    return true_part, false_part


def _run_if(c: If, sigma, mass, decls, fuel):
    true_part, false_part = _split_by_guard(c.guard, sigma, mass, decls)
    if not false_part:
        return _run(c.then, sigma, true_part, decls, fuel)
    if not true_part:
        return _run(c.els, sigma, false_part, decls, fuel)
    sigma_t, mass_t = _run(c.then, sigma, true_part, decls, fuel)
    sigma_f, mass_f = _run(c.els, sigma, false_part, decls, fuel)
    if sigma_t != sigma or sigma_f != sigma:
        raise StaticRestrictionViolation(
            "branches of a randomized conditional changed deterministic memory")
    merged = dict(mass_t)
    for m, p in mass_f.items():
        _merge(merged, m, p)
    return sigma, merged


def _run_while(c: While, sigma, mass, decls, fuel):
    settled: dict = {}
    randomized = mentions_rand(c.guard, decls)
    for _ in range(fuel):
        true_part, false_part = _split_by_guard(c.guard, sigma, mass, decls)
        for m, p in false_part.items():
            _merge(settled, m, p)
        if not true_part:
            return sigma, settled
        new_sigma, mass = _run(c.body, sigma, true_part, decls, fuel)
        if (randomized or settled) and new_sigma != sigma:
            raise StaticRestrictionViolation(
                "loop body changed deterministic memory while mass had settled")
        sigma = new_sigma
    raise FuelExhausted(f"loop did not settle within {fuel} iterations")


def exec_command(c, cfg: Config, decls=None, fuel: int = DEFAULT_FUEL) -> Config:
    """Run a command on a configuration, exactly."""
    decls = decls or {}
    sigma, mass = _run(c, cfg.det, dict(cfg.rand.mass), decls, fuel)
    domain = next(iter(mass)).domain if mass else frozenset()
    return Config(sigma, Dist(domain, mass))


def initial_config(prog: Program) -> Config:
    """All declared deterministic and randomized cells initialized to zero."""
    sigma = Mem({cell: 0 for cell in prog.det_cells()})
    mu = Dist(frozenset(prog.rand_cells()),
              {Mem({cell: 0 for cell in prog.rand_cells()}): Fraction(1)})
    return Config(sigma, mu)


def run_program(prog: Program, fuel: int = DEFAULT_FUEL,
                start: Optional[Config] = None) -> Config:
    return exec_command(prog.body, start or initial_config(prog), prog.decls, fuel)


def expectation(cfg: Config, e, decls=None) -> Fraction:
    """Exact expected value of an integer expression."""
    decls = decls or {}
    total = ZERO
    for m, p in cfg.rand.mass.items():
        v = _eval(e, cfg.det, m, decls)
        if not isinstance(v, int):
            raise TypingError(f"expectation of a non-numeric value in {e}")
        total += p * v
    return total


def prob_event(cfg: Config, ev, decls=None) -> Fraction:
    """Exact probability of a 0/1-valued event expression."""
    decls = decls or {}
    total = ZERO
    for m, p in cfg.rand.mass.items():
        v = _eval(ev, cfg.det, m, decls)
        if v not in (0, 1):
            raise TypingError(f"event expression is not 0/1-valued: {ev}")
        if v:
            total += p
    return total
