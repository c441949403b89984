import itertools
import random
from fractions import Fraction as F

import pytest

from negsep.assertions import (
    And, BPow, BRat, BernAtom, Bottom, DetmAtom, EqAtom, EventAtom, Imp,
    LeAtom, Or, PrAtom, Star, Top, UnifAtom, Wand, Checker, big_na, check,
    check_atom, classify_CC, classify_CM, cell_expr, eval_bound, fv,
    na_characterization, onehot_atom, own, parse_formula, subst, INDEP, NA,
    CC_YES, UNKNOWN,
)
from negsep.dist import (
    Config, Dist, Mem, dirac, dv, indep_product, project, rv, uniform,
)
from negsep.errors import ImplicationScopeLimited, WandNotSupported
from negsep.negdep import is_NA, random_rational_dist
from negsep.pwhile import parse_expr, parse_program
from negsep.pwhile.ast import Lit, Var

X, Y, Z = rv("x"), rv("y"), rv("z")


def mem(**kw):
    return Mem({rv(k): v for k, v in kw.items()})


def fair_bit(v):
    return uniform([Mem({v: 0}), Mem({v: 1})])


def one_hot_xy():
    return uniform([mem(x=1, y=0), mem(x=0, y=1)])


DECLS = parse_program("""
rand x : bit; rand y : bit; rand z : bit;
rand bin : bit[2];
det n : int;
skip
""").decls


def cfg_of(mu, det=None):
    return Config(det or Mem({}), mu)


class TestAtoms:
    def test_unif_fair_bit(self):
        atom = parse_formula("U[x; {0,1}]", DECLS)
        assert check_atom(atom, cfg_of(fair_bit(X)), DECLS)

    def test_one_hot_vector_atom(self):
        bin0, bin1 = rv("bin", 0), rv("bin", 1)
        mu = uniform([Mem({bin0: 1, bin1: 0}), Mem({bin0: 0, bin1: 1})])
        atom = onehot_atom(Var("bin"), 2)
        assert check_atom(atom, cfg_of(mu), DECLS)
        assert not check_atom(atom, cfg_of(indep_product(fair_bit(bin0), fair_bit(bin1))), DECLS)

    def test_detm(self):
        atom = parse_formula("D[x]", DECLS)
        assert not check_atom(atom, cfg_of(fair_bit(X)), DECLS)
        assert check_atom(atom, cfg_of(dirac(mem(x=1))), DECLS)

    def test_eq_le_event(self):
        mu = dirac(mem(x=1, y=0))
        assert check_atom(parse_formula("x ~ 1", DECLS), cfg_of(mu), DECLS)
        assert check_atom(parse_formula("y <= x", DECLS), cfg_of(mu), DECLS)
        assert check_atom(parse_formula("event(x = 1)", DECLS), cfg_of(mu), DECLS)
        assert not check_atom(parse_formula("event(x = 1; 0)", DECLS), cfg_of(mu), DECLS)

    def test_bernoulli(self):
        mu = Dist({X}, {mem(x=1): F(1, 3), mem(x=0): F(2, 3)})
        assert check_atom(parse_formula("B[x; 1/3]", DECLS), cfg_of(mu), DECLS)
        assert not check_atom(parse_formula("B[x; 1/2]", DECLS), cfg_of(mu), DECLS)

    def test_pr_atom_with_bound_expression(self):
        mu = one_hot_xy()
        sigma = Mem({dv("n"): 2})
        atom = parse_formula("Pr[x = 1] <= (1/2)^(n)", DECLS)
        assert not check_atom(atom, Config(sigma, mu), DECLS)
        atom2 = parse_formula("Pr[x = 1] = (1/2)^(1)", DECLS)
        assert check_atom(atom2, Config(sigma, mu), DECLS)

    def test_unbound_variables_make_atoms_false(self):
        assert not check_atom(parse_formula("z ~ 1", DECLS), cfg_of(fair_bit(X)), DECLS)
        assert not check_atom(parse_formula("U[z; {0,1}]", DECLS), cfg_of(fair_bit(X)), DECLS)

    def test_own_is_definedness(self):
        assert check_atom(parse_formula("own(x)", DECLS), cfg_of(fair_bit(X)), DECLS)
        assert not check_atom(parse_formula("own(y)", DECLS), cfg_of(fair_bit(X)), DECLS)


class TestChecker:
    def test_one_hot_satisfies_na_conjunction(self):
        phi = parse_formula("own(x) (*) own(y)", DECLS)
        assert check(phi, cfg_of(one_hot_xy()), DECLS)

    def test_one_hot_fails_independence_conjunction(self):
        phi = parse_formula("own(x) (x) own(y)", DECLS)
        assert not check(phi, cfg_of(one_hot_xy()), DECLS)

    def test_product_satisfies_independence(self):
        mu = indep_product(fair_bit(X), fair_bit(Y))
        assert check(parse_formula("own(x) (x) own(y)", DECLS), cfg_of(mu), DECLS)

    def test_correlated_pair_fails_na_conjunction(self):
        mu = uniform([mem(x=0, y=0), mem(x=1, y=1)])
        assert not check(parse_formula("own(x) (*) own(y)", DECLS), cfg_of(mu), DECLS)

    def test_boolean_connectives(self):
        cfg = cfg_of(fair_bit(X))
        assert check(parse_formula("top", DECLS), cfg, DECLS)
        assert not check(parse_formula("bot", DECLS), cfg, DECLS)
        assert check(parse_formula("U[x; {0,1}] /\\ top", DECLS), cfg, DECLS)
        assert check(parse_formula("bot \\/ U[x; {0,1}]", DECLS), cfg, DECLS)
        assert check(parse_formula("D[x] -> bot", DECLS), cfg, DECLS)

    def test_implication_scope_limit(self):
        cfg = cfg_of(fair_bit(X))
        with pytest.raises(ImplicationScopeLimited):
            check(parse_formula("own(y) -> own(y)", DECLS), cfg, DECLS)

    def test_wand_rejected(self):
        phi = parse_formula("own(x) (-*) own(y)", DECLS)
        with pytest.raises(WandNotSupported):
            check(phi, cfg_of(one_hot_xy()), DECLS)
        phi2 = parse_formula("own(x) (-x) own(y)", DECLS)
        with pytest.raises(WandNotSupported):
            check(phi2, cfg_of(one_hot_xy()), DECLS)

    def test_star_weakening_semantically(self):
        rng = random.Random(5)
        phi_ind = parse_formula("own(x) (x) own(y)", DECLS)
        phi_na = parse_formula("own(x) (*) own(y)", DECLS)
        for _ in range(40):
            mu = random_rational_dist(rng, [X, Y])
            cfg = cfg_of(mu)
            if check(phi_ind, cfg, DECLS):
                assert check(phi_na, cfg, DECLS)

    def test_na_characterization_matches_oracle(self):
        rng = random.Random(13)
        for _ in range(40):
            n = rng.choice((2, 3))
            vars_ = [X, Y, Z][:n]
            mu = random_rational_dist(rng, vars_)
            assert na_characterization(cfg_of(mu), vars_, DECLS) == is_NA(mu, vars_)

    def test_single_variable_na_is_vacuous(self):
        assert na_characterization(cfg_of(fair_bit(X)), [X], DECLS)

    def test_big_operator_order_indifferent(self):
        mu = uniform([
            Mem({X: 1, Y: 0, Z: 0}), Mem({X: 0, Y: 1, Z: 0}), Mem({X: 0, Y: 0, Z: 1}),
        ])
        cfg = cfg_of(mu)
        results = set()
        for order in itertools.permutations([X, Y, Z]):
            phi = big_na([own(cell_expr(v)) for v in order])
            results.add(check(phi, cfg, DECLS))
        assert results == {True}


def random_formula(rng, vars_, depth):
    if depth == 0:
        v = cell_expr(rng.choice(vars_))
        return rng.choice([
            own(v),
            UnifAtom(v, (0, 1)),
            DetmAtom(v),
            EqAtom(v, Lit(rng.choice((0, 1)))),
            LeAtom(v, cell_expr(rng.choice(vars_))),
            EventAtom(parse_expr(f"{v} = 1", DECLS)),
            PrAtom(parse_expr(f"{v} = 1", DECLS), "<=", BRat(F(1, 2))),
            Top(),
        ])
    l = random_formula(rng, vars_, depth - 1)
    r = random_formula(rng, vars_, depth - 1)
    ctor = rng.choice([And, Or, lambda a, b: Star(INDEP, a, b),
                       lambda a, b: Star(NA, a, b)])
    return ctor(l, r)


class TestRestrictionAndPersistence:
    def test_restriction_on_generated_pairs(self):
        rng = random.Random(29)
        for _ in range(120):
            mu = random_rational_dist(rng, [X, Y, Z])
            phi = random_formula(rng, [X, Y], rng.choice((0, 1, 2)))
            cfg = cfg_of(mu)
            cells = {c for c in fv(phi, DECLS) if c.kind == "rand"}
            projected = cfg_of(project(mu, cells & mu.domain))
            assert check(phi, cfg, DECLS) == check(phi, projected, DECLS)

    def test_persistence_under_extension(self):
        rng = random.Random(31)
        for _ in range(80):
            mu = random_rational_dist(rng, [X, Y])
            # extend with a correlated third variable whose marginal keeps mu
            acc = {}
            for m, p in mu.mass.items():
                w = F(rng.randint(0, 4), 4)
                if w:
                    acc[Mem({**dict(m.items()), Z: 1})] = p * w
                if 1 - w:
                    acc[Mem({**dict(m.items()), Z: 0})] = acc.get(
                        Mem({**dict(m.items()), Z: 0}), F(0)) + p * (1 - w)
            nu = Dist({X, Y, Z}, acc)
            assert project(nu, {X, Y}) == mu
            phi = random_formula(rng, [X, Y], rng.choice((0, 1, 2)))
            if check(phi, cfg_of(mu), DECLS):
                assert check(phi, cfg_of(nu), DECLS)


class TestClassification:
    def test_cc_examples(self):
        assert classify_CC(parse_formula("n ~ 2", DECLS)) == CC_YES
        assert classify_CC(parse_formula("x <= 1 /\\ event(y = 0)", DECLS)) == CC_YES
        assert classify_CC(parse_formula("x ~ 1 \\/ y ~ 1", DECLS)) == CC_YES
        assert classify_CC(parse_formula("Pr[x = 1] <= 1/2", DECLS)) == UNKNOWN
        assert classify_CC(parse_formula("D[x]", DECLS)) == UNKNOWN

    def test_cm_examples(self):
        assert classify_CM(parse_formula("Pr[x = 1] <= 1/4", DECLS)) == CC_YES
        assert classify_CM(parse_formula("top /\\ Pr[x = 1] <= 1/4", DECLS)) == CC_YES
        assert classify_CM(parse_formula("own(x) (*) own(y)", DECLS)) == UNKNOWN
        assert classify_CM(parse_formula("Pr[x = 1] >= 1/4", DECLS)) == UNKNOWN
        assert classify_CM(parse_formula("Pr[x=1] <= 1/2 \\/ Pr[y=1] <= 1/2",
                                         DECLS)) == UNKNOWN

    def test_cm_counterexample_for_disjunction(self):
        # justifies keeping disjunction out of the CM whitelist
        from negsep.dist import convex_combine
        phi = parse_formula("Pr[x=1] <= 1/4 \\/ Pr[y=1] <= 1/4", DECLS)
        mu1 = indep_product(dirac(mem(x=0)), dirac(mem(y=1)))
        mu2 = indep_product(dirac(mem(x=1)), dirac(mem(y=0)))
        mix = convex_combine(mu1, mu2, F(1, 2))
        assert check(phi, cfg_of(mu1), DECLS) and check(phi, cfg_of(mu2), DECLS)
        assert not check(phi, cfg_of(mix), DECLS)


class TestParserAndSubst:
    def test_parse_round_trip_connectives(self):
        phi = parse_formula("(own(x) (*) own(y)) /\\ (D[x] -> bot)", DECLS)
        assert isinstance(phi, And)
        assert isinstance(phi.left, Star) and phi.left.index == NA
        assert isinstance(phi.right, Imp)

    def test_big_na_expansion(self):
        phi = parse_formula("bigNA(i, 0, 2, own(bin[i]))", DECLS)
        assert isinstance(phi, Star) and phi.index == NA
        assert str(phi.left) == "bin[0] ~ bin[0]"

    def test_parenthesized_expression_still_parses(self):
        phi = parse_formula("(x) ~ 1", DECLS)
        assert isinstance(phi, EqAtom)

    def test_bound_expressions(self):
        sigma = Mem({dv("n"): 3})
        atom = parse_formula("Pr[x = 1] <= (1/2)^(n) * 2 + 1/8", DECLS)
        assert eval_bound(atom.bound, sigma, DECLS) == F(1, 4) + F(1, 8)

    def test_subst_det_var(self):
        atom = parse_formula("Pr[x = 1] <= (1/2)^(n)", DECLS)
        bumped = subst(atom, "n", parse_expr("n + 1", DECLS))
        sigma = Mem({dv("n"): 1})
        assert eval_bound(bumped.bound, sigma, DECLS) == F(1, 4)

    def test_fv(self):
        phi = parse_formula("own(bin[0]) (*) (n ~ 2)", DECLS)
        cells = fv(phi, DECLS)
        assert rv("bin", 0) in cells and dv("n") in cells
