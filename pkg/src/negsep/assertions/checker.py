"""Model checker for the wand-free assertion fragment on concrete configurations.

Splits for the separating conjunctions range over subsets of the randomized
domain; every candidate part is forced to be a marginal, so the enumeration is
exhaustive.  Verdicts are exact.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Optional

from ..dist import Config, Dist, Mem, VarName, project
from ..errors import (
    ImplicationScopeLimited, TypingError, UnboundVariable, WandNotSupported,
)
from ..negdep import Partition, is_PNA, set_partitions, union_partition
from ..pwhile.interp import eval_expr
from .formula import (
    And, BernAtom, Bottom, DetmAtom, EqAtom, EventAtom, Imp, LeAtom, Or,
    PrAtom, Star, Top, UnifAtom, Wand, big_na, cell_expr, eval_bound, fv,
    is_wand_free, own, INDEP, NA,
)

ZERO = Fraction(0)


def _value_leq(l, r, where) -> bool:
    if isinstance(l, tuple) and isinstance(r, tuple) and len(l) == len(r):
        return all(_value_leq(a, b, where) for a, b in zip(l, r))
    if isinstance(l, int) and isinstance(r, int):
        return l <= r
    raise TypingError(f"cannot order {l!r} against {r!r} in {where}")


def _pushforward(cfg: Config, e, decls) -> dict:
    out: dict = {}
    for m, p in cfg.rand.mass.items():
        v = eval_expr(e, cfg.det, m, decls)
        out[v] = out.get(v, ZERO) + p
    return out


def check_atom(atom, cfg: Config, decls=None) -> bool:
    """Exact truth of an atomic proposition; unbound variables make it false."""
    decls = decls or {}
    try:
        return _check_atom(atom, cfg, decls)
    except UnboundVariable:
        return False


def _check_atom(atom, cfg: Config, decls) -> bool:
    if isinstance(atom, UnifAtom):
        got = _pushforward(cfg, atom.expr, decls)
        share = Fraction(1, len(atom.values))
        want: dict = {}
        for v in atom.values:
            want[v] = want.get(v, ZERO) + share
        return got == want
    if isinstance(atom, BernAtom):
        got = _pushforward(cfg, atom.expr, decls)
        want = {v: p for v, p in ((1, Fraction(atom.p)), (0, 1 - Fraction(atom.p))) if p}
        return got == want
    if isinstance(atom, DetmAtom):
        return len(_pushforward(cfg, atom.expr, decls)) == 1
    if isinstance(atom, EqAtom):
        return all(
            eval_expr(atom.left, cfg.det, m, decls) ==
            eval_expr(atom.right, cfg.det, m, decls)
            for m in cfg.rand.support())
    if isinstance(atom, LeAtom):
        return all(
            _value_leq(eval_expr(atom.left, cfg.det, m, decls),
                       eval_expr(atom.right, cfg.det, m, decls), atom)
            for m in cfg.rand.support())
    if isinstance(atom, EventAtom):
        for m in cfg.rand.support():
            v = eval_expr(atom.ev, cfg.det, m, decls)
            if v not in (0, 1):
                raise TypingError(f"event is not 0/1-valued: {atom.ev}")
            if v != atom.value:
                return False
        return True
    if isinstance(atom, PrAtom):
        mass = ZERO
        for m, p in cfg.rand.mass.items():
            v = eval_expr(atom.ev, cfg.det, m, decls)
            if v not in (0, 1):
                raise TypingError(f"event is not 0/1-valued: {atom.ev}")
            if v:
                mass += p
        delta = eval_bound(atom.bound, cfg.det, decls)
        if atom.rel == "=":
            return mass == delta
        if atom.rel == "<=":
            return mass <= delta
        return mass >= delta
    raise TypingError(f"not an atom: {atom!r}")


class Checker:
    """Checks wand-free formulas against one configuration.

    Sub-configurations arising from splits are always marginals of the
    top-level distribution, so results are memoized per (formula, domain).
    """

    def __init__(self, cfg: Config, decls=None, max_block: int = 12,
                 max_side: int = 5):
        self.cfg = cfg
        self.decls = decls or {}
        self.max_block = max_block
        self.max_side = max_side
        self._proj: dict = {cfg.rand.domain: cfg.rand}
        self._memo: dict = {}
        self._pna: dict = {}

    # -- cached projections and oracles ---------------------------------

    def _projection(self, domain: frozenset) -> Dist:
        mu = self._proj.get(domain)
        if mu is None:
            mu = project(self.cfg.rand, domain)
            self._proj[domain] = mu
        return mu

    def _config_at(self, domain: frozenset) -> Config:
        return Config(self.cfg.det, self._projection(domain))

    def _is_pna(self, domain: frozenset, partition: Partition) -> bool:
        key = (domain, partition)
        got = self._pna.get(key)
        if got is None:
            got = is_PNA(self._projection(domain), partition, self.max_block)
            self._pna[key] = got
        return got

    def _partitions(self, vars_: frozenset):
        if not vars_:
            return [Partition([])]
        return [Partition(g) for g in set_partitions(sorted(vars_))]

    def _in_oplus(self, s: frozenset, a: frozenset, b: frozenset) -> bool:
        """Membership of the S-marginal in the PNA combination of the A- and
        B-marginals (domain agreement holds by construction)."""
        for p1 in self._partitions(a):
            if not self._is_pna(a, p1):
                continue
            for p2 in self._partitions(b):
                if not self._is_pna(b, p2):
                    continue
                if not self._is_pna(s, union_partition(p1, p2)):
                    return False
        return True

    def _in_otimes(self, s: frozenset, a: frozenset, b: frozenset) -> bool:
        mu_s = self._projection(s)
        mu_a, mu_b = self._projection(a), self._projection(b)
        for m, p in mu_s.mass.items():
            if p != mu_a.prob(m.restrict(a)) * mu_b.prob(m.restrict(b)):
                return False
        return True

    # -- the satisfaction relation ---------------------------------------

    def check(self, phi) -> bool:
        if not is_wand_free(phi):
            raise WandNotSupported("formula contains a separating implication")
        return self._check(phi, self.cfg.rand.domain)

    def _check(self, phi, domain: frozenset) -> bool:
        key = (phi, domain)
        got = self._memo.get(key)
        if got is None:
            got = self._eval(phi, domain)
            self._memo[key] = got
        return got

    def _eval(self, phi, domain: frozenset) -> bool:
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bottom):
            return False
        if isinstance(phi, And):
            return self._check(phi.left, domain) and self._check(phi.right, domain)
        if isinstance(phi, Or):
            return self._check(phi.left, domain) or self._check(phi.right, domain)
        if isinstance(phi, Imp):
            needed = {c for c in fv(phi, self.decls) if c.kind == "rand"}
            if not needed <= domain:
                raise ImplicationScopeLimited(
                    f"implication mentions {sorted(map(str, needed - domain))} "
                    "outside the configuration")
            # sound because wand-free truth depends only on the FV-marginal,
            # which every extension of the configuration preserves
            return (not self._check(phi.left, domain)) or self._check(phi.right, domain)
        if isinstance(phi, Star):
            return self._eval_star(phi, domain)
        if isinstance(phi, Wand):
            raise WandNotSupported("formula contains a separating implication")
        return check_atom(phi, self._config_at(domain), self.decls)

    def _eval_star(self, phi: Star, domain: frozenset) -> bool:
        members = self._in_otimes if phi.index == INDEP else self._in_oplus
        dom = sorted(domain)
        for r in range(len(dom) + 1):
            for s_tuple in itertools.combinations(dom, r):
                s = frozenset(s_tuple)
                for k in range(len(s_tuple) + 1):
                    for a_tuple in itertools.combinations(s_tuple, k):
                        a = frozenset(a_tuple)
                        b = s - a
                        if not members(s, a, b):
                            continue
                        if self._check(phi.left, a) and self._check(phi.right, b):
                            return True
        return False


def check(phi, cfg: Config, decls=None, max_block: int = 12) -> bool:
    """One-shot satisfaction check of a wand-free formula."""
    return Checker(cfg, decls, max_block).check(phi)


def na_characterization(cfg: Config, vars_: Iterable[VarName], decls=None,
                        max_block: int = 12) -> bool:
    """Negative association of the listed variables, via the iterated
    NA-conjunction of ownership atoms (goes through the model checker)."""
    phi = big_na([own(cell_expr(v)) for v in sorted(frozenset(vars_))])
    return check(phi, cfg, decls, max_block)


# -- conservative closure classification --------------------------------------

CC_YES = "yes"
UNKNOWN = "unknown"


def classify_CC(phi) -> str:
    """Closed under conditioning: support-pointwise atoms under and/or."""
    if isinstance(phi, (Top, EqAtom, LeAtom, EventAtom)):
        return CC_YES
    if isinstance(phi, (And, Or)):
        if classify_CC(phi.left) == CC_YES and classify_CC(phi.right) == CC_YES:
            return CC_YES
    return UNKNOWN


def classify_CM(phi) -> str:
    """Closed under mixtures: upper probability bounds under conjunction.

    Disjunctions are not mixture-closed (a mixture can straddle the two
    disjuncts), and the separating conjunctions are known not to be, so
    everything else is unknown.
    """
    if isinstance(phi, Top):
        return CC_YES
    if isinstance(phi, PrAtom) and phi.rel == "<=":
        return CC_YES
    if isinstance(phi, And):
        if classify_CM(phi.left) == CC_YES and classify_CM(phi.right) == CC_YES:
            return CC_YES
    return UNKNOWN
