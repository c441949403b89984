import itertools
import random
from fractions import Fraction as F

import pytest

from negsep.dist import Dist, Mem, dirac, indep_product, project, rv, uniform, unit_dist
from negsep.errors import BlockMismatch, NotDisjoint, OutputClash, PosetTooLarge
from negsep import negdep as nd
from negsep.negdep import (
    MonotoneFn, Partition, UpSet, ab_na_witness, apply_blockwise_map,
    coarsenings, enumerate_upsets, is_AB_NA, is_NA, is_PNA, is_strong_NA,
    oplus_members_check, pna_witness, random_rational_dist,
    search_weakNA_associativity_counterexample, set_partitions, singletons,
    union_partition,
)

X, Y, Z, W = rv("x"), rv("y"), rv("z"), rv("w")
BOOL = (0, 1)


def mem(**kw):
    return Mem({rv(k): v for k, v in kw.items()})


def fair_bit(v):
    return uniform([Mem({v: 0}), Mem({v: 1})])


def one_hot(vars_):
    mems = []
    for hot in range(len(vars_)):
        mems.append(Mem({v: (1 if i == hot else 0) for i, v in enumerate(vars_)}))
    return uniform(mems)


def correlated_pair():
    return uniform([mem(x=0, y=0), mem(x=1, y=1)])


def product_bits(*vars_):
    mu = fair_bit(vars_[0])
    for v in vars_[1:]:
        mu = indep_product(mu, fair_bit(v))
    return mu


def perm_dist(vars_, values):
    mems = [Mem(dict(zip(vars_, perm))) for perm in itertools.permutations(values)]
    return uniform(mems)


def brute_force_upset_count(n_vars):
    """Independent oracle: filter all subsets of the boolean cube for up-closure."""
    vars_ = [rv(c) for c in "abc"[:n_vars]]
    mems = [Mem(dict(zip(vars_, vals)))
            for vals in itertools.product(BOOL, repeat=n_vars)]
    count = 0
    for bits in itertools.product((0, 1), repeat=len(mems)):
        members = {m for m, b in zip(mems, bits) if b}
        if all(not m1.leq(m2) or m2 in members
               for m1 in members for m2 in mems):
            count += 1
    return count


class TestUpsetEnumeration:
    def test_single_bool_chain(self):
        ups = enumerate_upsets([X], {X: BOOL})
        assert len(ups) == 3
        member_sets = {u.members for u in ups}
        assert frozenset() in member_sets
        assert frozenset([Mem({X: 1})]) in member_sets

    @pytest.mark.parametrize("n_vars,expected", [(1, 3), (2, 6), (3, 20)])
    def test_counts_match_brute_force(self, n_vars, expected):
        vars_ = [rv(c) for c in "abc"[:n_vars]]
        ups = enumerate_upsets(vars_, {v: BOOL for v in vars_})
        assert len(ups) == expected
        assert brute_force_upset_count(n_vars) == expected
        # exactly once each
        assert len({u.members for u in ups}) == len(ups)

    def test_all_results_are_upclosed(self):
        vars_ = [rv("a"), rv("b")]
        mems = [Mem(dict(zip(vars_, vals)))
                for vals in itertools.product(BOOL, repeat=2)]
        for u in enumerate_upsets(vars_, {v: BOOL for v in vars_}):
            assert u.validate(mems)

    def test_poset_too_large(self):
        vars_ = [rv(f"v{i}") for i in range(13)]
        with pytest.raises(PosetTooLarge):
            enumerate_upsets(vars_, {v: BOOL for v in vars_})


class TestPairwiseNA:
    def test_one_hot_pair(self):
        assert is_AB_NA(one_hot([X, Y]), {X}, {Y})

    def test_independent_bits(self):
        assert is_AB_NA(product_bits(X, Y), {X}, {Y})

    def test_correlated_pair_fails_with_witness(self):
        mu = correlated_pair()
        assert not is_AB_NA(mu, {X}, {Y})
        wa, wb = ab_na_witness(mu, {X}, {Y})
        # by hand: Cov(1_{x=1}, 1_{y=1}) = 1/2 - 1/4 = 1/4 > 0
        fa, fb = wa.indicator(), wb.indicator()
        e_joint = mu.expect(lambda m: fa(m.restrict({X})) * fb(m.restrict({Y})))
        e_a = mu.expect(lambda m: fa(m.restrict({X})))
        e_b = mu.expect(lambda m: fb(m.restrict({Y})))
        assert e_joint > e_a * e_b

    def test_disjointness_required(self):
        with pytest.raises(NotDisjoint):
            is_AB_NA(product_bits(X, Y), {X}, {X, Y})

    def test_empty_side_is_trivial(self):
        assert is_AB_NA(correlated_pair(), set(), {Y})


class TestSetNA:
    def test_one_hot_three(self):
        assert is_NA(one_hot([X, Y, Z]), {X, Y, Z})

    def test_uniform_permutation(self):
        g = [rv("g", i) for i in range(3)]
        assert is_NA(perm_dist(g, (1, 2, 3)), g)

    def test_correlated_pair(self):
        assert not is_NA(correlated_pair(), {X, Y})


class TestCoarsenings:
    def test_bell_two(self):
        p = Partition([{rv("a")}, {rv("b")}])
        cs = coarsenings(p)
        assert len(cs) == 2
        assert p in cs
        assert Partition([{rv("a"), rv("b")}]) in cs

    def test_bell_three(self):
        p = singletons([rv("a"), rv("b"), rv("c")])
        assert len(coarsenings(p)) == 5

    def test_single_block(self):
        p = Partition([{rv("a"), rv("b")}])
        assert coarsenings(p) == [p]

    def test_bell_numbers(self):
        for n, bell in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)]:
            assert sum(1 for _ in set_partitions(range(n))) == bell

    def test_coarsening_projection_commutes(self):
        # both orders of coarsen/restrict yield the same block structures
        a, b, c = rv("a"), rv("b"), rv("c")
        p = singletons([a, b, c])
        for x in [{a}, {a, b}, {b, c}, {a, b, c}]:
            restricted = Partition([blk & x for blk in p.blocks if blk & x])
            via_restrict_first = {q for q in map(
                lambda q: frozenset(q.blocks), coarsenings(restricted))}
            via_coarsen_first = set()
            for q in coarsenings(p):
                blocks = [blk & x for blk in q.blocks if blk & x]
                via_coarsen_first.add(frozenset(Partition(blocks).blocks))
            assert via_restrict_first == via_coarsen_first


class TestPNA:
    def test_one_block_is_vacuous(self):
        mu = correlated_pair()
        assert is_PNA(mu, Partition([{X, Y}]))

    def test_one_hot_singletons(self):
        assert is_PNA(one_hot([X, Y]), singletons([X, Y]))

    def test_correlated_pair_fails(self):
        coarse, direction, witness = pna_witness(correlated_pair(), singletons([X, Y]))
        assert coarse == singletons([X, Y])
        assert len(witness) == 2

    def test_coarsening_closure(self):
        rng = random.Random(7)
        vars_ = [X, Y, Z]
        for _ in range(40):
            mu = random_rational_dist(rng, vars_)
            p = singletons(vars_)
            if is_PNA(mu, p):
                assert all(is_PNA(mu, q) for q in coarsenings(p))

    def test_strong_na_equals_na_equals_singleton_pna(self):
        rng = random.Random(11)
        for _ in range(60):
            n = rng.choice((2, 3))
            vars_ = [X, Y, Z][:n]
            mu = random_rational_dist(rng, vars_)
            expected = is_NA(mu, vars_)
            assert is_strong_NA(mu) == expected
            assert is_PNA(mu, singletons(vars_)) == expected

    def test_dirac_is_strong_na(self):
        assert is_strong_NA(dirac(mem(x=1, y=0, z=1)))

    def test_block_bound(self):
        vars_ = [rv(f"v{i}") for i in range(4)]
        mems = [Mem(dict(zip(vars_, vals)))
                for vals in itertools.product(BOOL, repeat=4)]
        mu = uniform(mems)
        with pytest.raises(PosetTooLarge):
            is_AB_NA(mu, vars_[:1], vars_[1:], max_block=4)


class TestOplusMembership:
    def test_product_and_one_hot_both_members(self):
        mu1, mu2 = fair_bit(X), fair_bit(Y)
        prod = indep_product(mu1, mu2)
        oh = one_hot([X, Y])
        for which in ("strong", "pna", "weak"):
            assert oplus_members_check(prod, mu1, mu2, which)
            assert oplus_members_check(oh, mu1, mu2, which)
        assert prod != oh

    def test_correlated_pair_rejected_everywhere(self):
        mu1, mu2 = fair_bit(X), fair_bit(Y)
        for which in ("strong", "pna", "weak"):
            assert not oplus_members_check(correlated_pair(), mu1, mu2, which)

    def test_projection_mismatch_rejected(self):
        assert not oplus_members_check(
            one_hot([X, Y]), dirac(Mem({X: 1})), fair_bit(Y), "weak")

    def test_unit_combination(self):
        mu = one_hot([X, Y])
        assert oplus_members_check(mu, mu, unit_dist(), "pna")

    def test_interpolation_on_random_triples(self):
        rng = random.Random(3)
        for _ in range(60):
            n = rng.choice((2, 3))
            vars_ = [X, Y, Z][:n]
            mu = random_rational_dist(rng, vars_)
            k = rng.randint(1, n - 1)
            s, t = frozenset(vars_[:k]), frozenset(vars_[k:])
            mu1, mu2 = project(mu, s), project(mu, t)
            strong = oplus_members_check(mu, mu1, mu2, "strong")
            pna = oplus_members_check(mu, mu1, mu2, "pna")
            weak = oplus_members_check(mu, mu1, mu2, "weak")
            assert (not strong or pna) and (not pna or weak)

    def test_independent_product_of_pna_parts(self):
        # products of partition-NA factors stay partition-NA on the union
        rng = random.Random(5)
        done = 0
        while done < 30:
            mu1 = random_rational_dist(rng, [X, Y])
            mu2 = random_rational_dist(rng, [Z, W])
            p1 = rng.choice(coarsenings(singletons([X, Y])))
            p2 = rng.choice(coarsenings(singletons([Z, W])))
            if not (is_PNA(mu1, p1) and is_PNA(mu2, p2)):
                continue
            prod = indep_product(mu1, mu2)
            assert is_PNA(prod, union_partition(p1, p2))
            done += 1


class TestBlockwiseMap:
    def test_identity(self):
        mu = one_hot([X, Y])
        p = singletons([X, Y])
        fns = {blk: (lambda m: m) for blk in p.blocks}
        assert apply_blockwise_map(mu, p, fns) == mu

    def test_antitone_flip_preserves_strong_na(self):
        mu = one_hot([X, Y])
        p = singletons([X, Y])
        fns = {blk: (lambda m, b=blk: Mem({v: 1 - m[v] for v in b}))
               for blk in p.blocks}
        out = apply_blockwise_map(mu, p, fns)
        assert is_strong_NA(out)

    def test_or_fold_stays_na(self):
        # bitwise-or of an NA pair with fresh one-hot halves, per block
        bloom = one_hot([X, Y])
        bits = indep_product(bloom, one_hot([Z, W]))
        p = Partition([{X, Z}, {Y, W}])
        out0, out1 = rv("o", 0), rv("o", 1)
        fns = {
            frozenset({X, Z}): lambda m: Mem({out0: m[X] | m[Z]}),
            frozenset({Y, W}): lambda m: Mem({out1: m[Y] | m[W]}),
        }
        pushed = apply_blockwise_map(bits, p, fns)
        assert is_strong_NA(pushed)

    def test_block_mismatch(self):
        mu = one_hot([X, Y])
        with pytest.raises(BlockMismatch):
            apply_blockwise_map(mu, singletons([X]), {frozenset({X}): lambda m: m})

    def test_output_clash(self):
        mu = one_hot([X, Y])
        p = singletons([X, Y])
        fns = {blk: (lambda m: Mem({Z: 0})) for blk in p.blocks}
        with pytest.raises(OutputClash):
            apply_blockwise_map(mu, p, fns)


def random_monotone_fn(rng, carrier, mems, direction=nd.MONOTONE, nonneg=True):
    base = {m: F(rng.randint(0 if nonneg else -4, 4)) for m in mems}
    table = {}
    for m in mems:
        related = [base[m2] for m2 in mems
                   if (m2.leq(m) if direction == nd.MONOTONE else m.leq(m2))]
        table[m] = max(related)
    return MonotoneFn(frozenset(carrier), table, direction, nonneg)


class TestConeReduction:
    def test_monotone_fn_validation(self):
        mems = [mem(x=0), mem(x=1)]
        good = MonotoneFn(frozenset({X}), {mems[0]: F(0), mems[1]: F(2)})
        bad = MonotoneFn(frozenset({X}), {mems[0]: F(2), mems[1]: F(0)})
        assert good.validate()
        assert not bad.validate()

    def test_random_pairs_agree_with_indicator_verdict(self):
        rng = random.Random(17)
        for _ in range(200):
            mu = random_rational_dist(rng, [X, Y, Z])
            a = frozenset({X}) if rng.random() < 0.5 else frozenset({X, Y})
            b = frozenset({Z}) if X in a and Y in a else frozenset({Y, Z})
            mems_a = sorted({m.restrict(a) for m in mu.support()},
                            key=lambda m: m.items())
            mems_b = sorted({m.restrict(b) for m in mu.support()},
                            key=lambda m: m.items())
            direction = rng.choice((nd.MONOTONE, nd.ANTITONE))
            f = random_monotone_fn(rng, a, mems_a, direction, nonneg=False)
            g = random_monotone_fn(rng, b, mems_b, direction, nonneg=False)
            assert f.validate() and g.validate()
            e_fg = mu.expect(lambda m: f(m) * g(m))
            e_f = mu.expect(f)
            e_g = mu.expect(g)
            if is_AB_NA(mu, a, b):
                assert e_fg <= e_f * e_g
            else:
                wa, wb = ab_na_witness(mu, a, b)
                ia, ib = wa.indicator(), wb.indicator()
                assert mu.expect(lambda m: ia(m.restrict(a)) * ib(m.restrict(b))) > \
                    mu.expect(lambda m: ia(m.restrict(a))) * \
                    mu.expect(lambda m: ib(m.restrict(b)))

    def test_two_block_product_form(self):
        rng = random.Random(23)
        for _ in range(100):
            mu = random_rational_dist(rng, [X, Y])
            p = singletons([X, Y])
            direction = rng.choice((nd.MONOTONE, nd.ANTITONE))
            fs = {}
            for blk in p.blocks:
                mems = sorted({m.restrict(blk) for m in mu.support()},
                              key=lambda m: m.items())
                fs[blk] = random_monotone_fn(rng, blk, mems, direction, nonneg=True)
            prod_e = F(1)
            for blk in p.blocks:
                prod_e *= mu.expect(fs[blk])
            e_joint = mu.expect(lambda m: fs[p.blocks[0]](m) * fs[p.blocks[1]](m))
            if is_PNA(mu, p):
                assert e_joint <= prod_e
            else:
                coarse, direction, witness = pna_witness(mu, p)
                inds = [u.indicator() for u in witness]
                blocks = coarse.blocks
                e_j = mu.expect(lambda m: inds[0](m.restrict(blocks[0])) *
                                inds[1](m.restrict(blocks[1])))
                e_p = mu.expect(lambda m: inds[0](m.restrict(blocks[0]))) * \
                    mu.expect(lambda m: inds[1](m.restrict(blocks[1])))
                assert e_j > e_p


class TestAssociativitySearch:
    def test_zero_budget(self):
        assert search_weakNA_associativity_counterexample(0) is None

    def test_witness_self_consistency(self):
        witness = search_weakNA_associativity_counterexample(150, seed=42)
        if witness is not None:
            r, s, t = (nd.VarName(n) for n in "rst")
            assert is_AB_NA(witness, {r, s}, {t})
            assert is_AB_NA(witness, {r}, {s})
            assert not is_AB_NA(witness, {r}, {s, t})

    def test_strong_na_never_a_witness(self):
        rng = random.Random(9)
        r, s, t = (nd.VarName(n) for n in "rst")
        checked = 0
        while checked < 20:
            mu = random_rational_dist(rng, (r, s, t))
            if not is_strong_NA(mu):
                continue
            checked += 1
            assert is_AB_NA(mu, {r}, {s, t})
