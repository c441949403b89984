"""Decision oracles for negative association and its partitioned variants.

All verdicts are exact.  The quantification over monotone test functions is
decided on finitely many up-set indicators: every non-negative monotone
function on a finite poset is a non-negative combination of up-set indicators,
and the product-form deficit is multilinear with non-negative coefficients, so
indicator tuples are a complete test family.  Antitone families are handled by
order reversal (down-sets).  For the two-set covariance form, constants drop
out and complements swap up-sets with down-sets, so checking up-set pairs
alone is complete there.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .dist import Dist, Mem, VarName, project, unit_dist
from .errors import (
    BlockMismatch,
    CarrierNotInDomain,
    NotDisjoint,
    NotInDomain,
    OutputClash,
    PosetTooLarge,
)

#: hard cap on memories per partition block when deciding PNA
DEFAULT_MAX_BLOCK = 12
#: cap on the product poset handed to the public up-set enumerator
DEFAULT_MAX_POSET = 4096
#: cap on variables per side when enumerating partitions for membership checks
DEFAULT_MAX_SIDE = 5

MONOTONE = "monotone"
ANTITONE = "antitone"


class Partition:
    """A set of pairwise-disjoint nonempty variable sets."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[Iterable[VarName]]):
        bs = []
        seen: set = set()
        for b in blocks:
            fb = frozenset(b)
            if not fb:
                raise BlockMismatch("empty partition block")
            if fb & seen:
                raise NotDisjoint("partition blocks overlap")
            seen |= fb
            bs.append(fb)
        object.__setattr__(self, "blocks", tuple(sorted(bs, key=sorted)))

    def __setattr__(self, *_):
        raise AttributeError("Partition is immutable")

    @property
    def carrier(self) -> frozenset:
        return frozenset().union(*self.blocks) if self.blocks else frozenset()

    def __eq__(self, other):
        return isinstance(other, Partition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(str(v) for v in sorted(b)) + "}"
                          for b in self.blocks)
        return f"[{inner}]"


def singletons(vars_: Iterable[VarName]) -> Partition:
    return Partition([{v} for v in vars_])


def union_partition(p1: Partition, p2: Partition) -> Partition:
    return Partition(list(p1.blocks) + list(p2.blocks))


@dataclass(frozen=True)
class UpSet:
    """An upward-closed subset of the memories on a carrier variable set."""

    carrier: frozenset
    members: frozenset

    def validate(self, universe: Iterable[Mem]) -> bool:
        for m in self.members:
            if m.domain != self.carrier:
                return False
        for m in universe:
            if m in self.members:
                continue
            if any(u.leq(m) for u in self.members):
                return False
        return True

    def indicator(self) -> Callable[[Mem], int]:
        return lambda m: 1 if m in self.members else 0


@dataclass(frozen=True)
class MonotoneFn:
    """A tabulated function on memories with a claimed direction."""

    carrier: frozenset
    table: Mapping[Mem, Fraction]
    direction: str = MONOTONE
    nonneg: bool = False

    def validate(self) -> bool:
        if self.nonneg and any(v < 0 for v in self.table.values()):
            return False
        for a, b in itertools.combinations(self.table, 2):
            for lo, hi in ((a, b), (b, a)):
                if lo.leq(hi):
                    lov, hiv = self.table[lo], self.table[hi]
                    if self.direction == MONOTONE and lov > hiv:
                        return False
                    if self.direction == ANTITONE and lov < hiv:
                        return False
        return True

    def __call__(self, m: Mem) -> Fraction:
        return self.table[m.restrict(self.carrier)]


def set_partitions(items: Sequence):
    """All partitions of `items` into nonempty groups (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1:]
        yield part + [[first]]


def coarsenings(p: Partition):
    """Every partition of the same carrier whose blocks are unions of `p`'s."""
    out = []
    for grouping in set_partitions(list(p.blocks)):
        out.append(Partition([frozenset().union(*g) for g in grouping]))
    return out


# -- up-set enumeration ----------------------------------------------------------


@lru_cache(maxsize=4096)
def _upsets_of_poset(mems: tuple, reverse: bool, max_size) -> tuple:
    """All upward-closed subsets of `mems` under the pointwise order.

    With `reverse=True` the order is flipped, which enumerates down-sets.
    Returns frozensets, including the empty set and the full set.
    """
    n = len(mems)
    if max_size is not None and n > max_size:
        raise PosetTooLarge(f"poset has {n} memories, bound is {max_size}")

    def above(i):
        return [j for j in range(n) if j != i
                and (mems[j].leq(mems[i]) if reverse else mems[i].leq(mems[j]))]

    ups = [above(i) for i in range(n)]
    # strictly larger elements always have strictly fewer elements above them,
    # so sorting by that count yields a top-down linear extension
    order = sorted(range(n), key=lambda i: len(ups[i]))
    chosen = [False] * n
    current: list = []
    results: list = []

    def rec(k):
        if k == n:
            results.append(frozenset(current))
            return
        i = order[k]
        rec(k + 1)
        if all(chosen[j] for j in ups[i]):
            chosen[i] = True
            current.append(mems[i])
            rec(k + 1)
            current.pop()
            chosen[i] = False

    rec(0)
    return tuple(results)


def enumerate_upsets(carrier: Iterable[VarName],
                     ranges: Mapping[VarName, Sequence[int]],
                     max_size: int = DEFAULT_MAX_POSET):
    """Every up-set of the full product poset over `carrier`, exactly once."""
    carrier = sorted(frozenset(carrier))
    spaces = []
    for v in carrier:
        if v not in ranges:
            raise NotInDomain(f"no value range for {v}")
        spaces.append([(v, val) for val in ranges[v]])
    mems = tuple(Mem(dict(choice)) for choice in itertools.product(*spaces))
    if len(mems) > max_size:
        raise PosetTooLarge(f"product poset has {len(mems)} memories, bound is {max_size}")
    fs = frozenset(carrier)
    return [UpSet(fs, members) for members in _upsets_of_poset(mems, False, max_size)]


# -- deficit machinery -----------------------------------------------------------


def _support_vectors(mu: Dist):
    support = tuple(mu.support())
    masses = tuple(mu.prob(m) for m in support)
    return support, masses


def _block_indicators(support, block, reverse, max_block):
    """(bitmask, expectation-numerator) pairs for each nonempty up-set of the block poset."""
    proj = [m.restrict(block) for m in support]
    distinct = tuple(dict.fromkeys(proj))
    upsets = _upsets_of_poset(distinct, reverse, max_block)
    out = []
    for members in upsets:
        if not members:
            continue
        mask = 0
        for i, pm in enumerate(proj):
            if pm in members:
                mask |= 1 << i
        out.append((mask, members))
    return out


def _mask_mass(mask, masses):
    total = Fraction(0)
    i = 0
    while mask:
        if mask & 1:
            total += masses[i]
        mask >>= 1
        i += 1
    return total


def _product_violation(mu: Dist, blocks, reverse, max_block):
    """A tuple of block up-sets with E[prod] > prod E, or None if none exists."""
    support, masses = _support_vectors(mu)
    full = (1 << len(support)) - 1
    per_block = []
    for b in blocks:
        entries = []
        for mask, members in _block_indicators(support, b, reverse, max_block):
            entries.append((mask, _mask_mass(mask, masses), members))
        per_block.append(entries)
    for combo in itertools.product(*per_block):
        nontrivial = sum(1 for mask, _, _ in combo if mask != full)
        if nontrivial < 2:
            continue
        joint_mask = full
        prod = Fraction(1)
        for mask, expect, _ in combo:
            joint_mask &= mask
            prod *= expect
        if _mask_mass(joint_mask, masses) > prod:
            return combo
    return None


def ab_na_witness(mu: Dist, a: Iterable[VarName], b: Iterable[VarName],
                  max_block: int = DEFAULT_MAX_BLOCK):
    """A pair of up-sets witnessing positive covariance, or None if (A,B)-NA."""
    a, b = frozenset(a), frozenset(b)
    if a & b:
        raise NotDisjoint("the two variable sets overlap")
    if not (a <= mu.domain and b <= mu.domain):
        raise NotInDomain("variable sets escape the distribution domain")
    if not a or not b:
        return None
    combo = _product_violation(project(mu, a | b), [a, b], False, max_block)
    if combo is None:
        return None
    (_, _, mem_a), (_, _, mem_b) = combo
    return UpSet(a, mem_a), UpSet(b, mem_b)


def is_AB_NA(mu: Dist, a: Iterable[VarName], b: Iterable[VarName],
             max_block: int = DEFAULT_MAX_BLOCK) -> bool:
    """Negative association between two disjoint variable sets."""
    return ab_na_witness(mu, a, b, max_block) is None


def is_NA(mu: Dist, s: Iterable[VarName],
          max_block: int = DEFAULT_MAX_BLOCK) -> bool:
    """Negative association of the set `s`: every disjoint pair passes."""
    s = sorted(frozenset(s))
    if not frozenset(s) <= mu.domain:
        raise NotInDomain("variable set escapes the distribution domain")
    for r in range(1, len(s)):
        for a in itertools.combinations(s, r):
            rest = [v for v in s if v not in a]
            for r2 in range(1, len(rest) + 1):
                for b in itertools.combinations(rest, r2):
                    # unordered pairs suffice: the check is symmetric
                    if a > b:
                        continue
                    if not is_AB_NA(mu, a, b, max_block):
                        return False
    return True


def pna_witness(mu: Dist, p: Partition, max_block: int = DEFAULT_MAX_BLOCK):
    """A (coarsening, direction, up-set tuple) violating PNA, or None."""
    if not p.carrier <= mu.domain:
        raise CarrierNotInDomain("partition carrier escapes the distribution domain")
    restricted = project(mu, p.carrier)
    for coarse in coarsenings(p):
        if len(coarse) < 2:
            continue  # single-factor inequality is an equality
        for reverse in (False, True):
            combo = _product_violation(restricted, list(coarse.blocks),
                                       reverse, max_block)
            if combo is not None:
                direction = ANTITONE if reverse else MONOTONE
                witness = tuple(UpSet(blk, members) for blk, (_, _, members)
                                in zip(coarse.blocks, combo))
                return coarse, direction, witness
    return None


def is_PNA(mu: Dist, p: Partition, max_block: int = DEFAULT_MAX_BLOCK) -> bool:
    """Partition negative association of `mu` for partition `p`."""
    return pna_witness(mu, p, max_block) is None


def is_strong_NA(mu: Dist, max_block: int = DEFAULT_MAX_BLOCK) -> bool:
    """NA of the whole domain, decided as singleton-partition PNA."""
    return is_PNA(mu, singletons(mu.domain), max_block)


# -- combination-operation membership ---------------------------------------------


def _agrees_with_parts(mu: Dist, mu1: Dist, mu2: Dist) -> bool:
    if mu1.domain & mu2.domain:
        return False
    if mu.domain != mu1.domain | mu2.domain:
        return False
    return project(mu, mu1.domain) == mu1 and project(mu, mu2.domain) == mu2


def _partitions_of(vars_: frozenset, max_side: int):
    if len(vars_) > max_side:
        raise PosetTooLarge(
            f"partition enumeration over {len(vars_)} variables, bound is {max_side}")
    if not vars_:
        yield Partition([])
        return
    for grouping in set_partitions(sorted(vars_)):
        yield Partition(grouping)


def oplus_members_check(mu: Dist, mu1: Dist, mu2: Dist, which: str,
                        max_block: int = DEFAULT_MAX_BLOCK,
                        max_side: int = DEFAULT_MAX_SIDE) -> bool:
    """Membership of `mu` in the strong / partitioned / weak combination of the parts.

    `which` selects the flavour: "strong" demands NA of the whole domain,
    "weak" only the cross-pair inequality, and "pna" quantifies over every
    partition pair under which the parts are already partition-NA.
    """
    if which not in ("strong", "pna", "weak"):
        raise ValueError(f"unknown combination flavour {which!r}")
    if not _agrees_with_parts(mu, mu1, mu2):
        return False
    if which == "strong":
        return is_strong_NA(mu, max_block)
    if which == "weak":
        return is_AB_NA(mu, mu1.domain, mu2.domain, max_block)
    for p1 in _partitions_of(mu1.domain, max_side):
        if not is_PNA(mu1, p1, max_block):
            continue
        for p2 in _partitions_of(mu2.domain, max_side):
            if not is_PNA(mu2, p2, max_block):
                continue
            if not is_PNA(mu, union_partition(p1, p2), max_block):
                return False
    return True


# -- blockwise maps ---------------------------------------------------------------


def apply_blockwise_map(mu: Dist, p: Partition,
                        fns: Mapping[frozenset, Callable[[Mem], Mem]]) -> Dist:
    """Pushforward of `mu` under independent per-block memory maps."""
    if p.carrier != mu.domain:
        raise BlockMismatch("partition must carry exactly the distribution domain")
    if frozenset(fns) != frozenset(p.blocks):
        raise BlockMismatch("one map per partition block required")
    out_domains: dict = {}
    acc: dict = {}
    for m, mass in mu.mass.items():
        pieces = []
        for block in p.blocks:
            img = fns[block](m.restrict(block))
            known = out_domains.get(block)
            if known is None:
                out_domains[block] = img.domain
            elif img.domain != known:
                raise BlockMismatch(f"map on {set(map(str, block))} changed output domain")
            pieces.append(img)
        merged: dict = {}
        for img in pieces:
            for var, val in img.items():
                if var in merged:
                    raise OutputClash(f"blockwise outputs clash on {var}")
                merged[var] = val
        out = Mem(merged)
        acc[out] = acc.get(out, Fraction(0)) + mass
    domain = frozenset().union(*out_domains.values()) if out_domains else frozenset()
    return Dist(domain, acc)


# -- the open associativity question ----------------------------------------------


def random_rational_dist(rng: random.Random, vars_: Sequence[VarName],
                         values=(0, 1), max_weight: int = 5) -> Dist:
    """A random distribution with small rational masses over a value grid."""
    mems = [Mem(dict(zip(vars_, vals)))
            for vals in itertools.product(values, repeat=len(vars_))]
    while True:
        weights = [rng.randint(0, max_weight) for _ in mems]
        total = sum(weights)
        if total:
            break
    return Dist(frozenset(vars_),
                {m: Fraction(w, total) for m, w in zip(mems, weights) if w})


def search_weakNA_associativity_counterexample(
        budget: int, seed: int = 0,
        max_block: int = DEFAULT_MAX_BLOCK) -> Optional[Dist]:
    """Random search for a distribution that is (R+S,T)-NA and (R,S)-NA but
    not (R,S+T)-NA.

    Returns a witness distribution if one turns up within `budget` trials and
    None otherwise; a None result asserts nothing.  Strong-NA samples are
    skipped, since they satisfy every cross-pair inequality.
    """
    rng = random.Random(seed)
    r, s, t = VarName("r"), VarName("s"), VarName("t")
    for _ in range(budget):
        mu = random_rational_dist(rng, (r, s, t))
        if is_strong_NA(mu, max_block):
            continue
        if not is_AB_NA(mu, {r, s}, {t}, max_block):
            continue
        if not is_AB_NA(mu, {r}, {s}, max_block):
            continue
        if not is_AB_NA(mu, {r}, {s, t}, max_block):
            return mu
    return None
