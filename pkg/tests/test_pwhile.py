import itertools
from fractions import Fraction as F

import pytest

from negsep.dist import Config, Dist, Mem, dirac, rv, dv, uniform, unit_dist
from negsep.errors import (
    FuelExhausted, IndexOutOfRange, ParseError, StaticRestrictionViolation,
    TypingError, UnboundVariable,
)
from negsep.pwhile import (
    Assign, If, OneHotSampler, Sample, Skip, Seq, While,
    eval_expr, exec_command, expectation, initial_config, parse_expr,
    parse_program, prob_event, run_program,
)


def mem(**kw):
    return Mem({rv(k): v for k, v in kw.items()})


BLOOM_TEXT = """
# repeated one-hot insertion into a bit array
const N = 2;
const M = 1;
const H = 1;
det m : int;
det h : int;
rand bloom : bit[N];
rand bin : bit[N];
rand upd : bit[N];

bloom := zero(N);
m := 0;
while m < M {
  h := 0;
  while h < H {
    bin <-$ oh(N);
    upd := bloom || bin;
    bloom := upd;
    h := h + 1;
  };
  m := m + 1;
};
"""


class TestParser:
    def test_skip(self):
        prog = parse_program("skip")
        assert isinstance(prog.body, Skip)

    def test_bloom_shape(self):
        prog = parse_program(BLOOM_TEXT)
        body = prog.body
        # init; init; while
        assert isinstance(body, Seq)
        outer = body.second.second
        assert isinstance(outer, While)
        inner = outer.body.second.first
        assert isinstance(inner, While)
        first_stmt = inner.body.first
        assert isinstance(first_stmt, Sample)
        assert isinstance(first_stmt.sampler, OneHotSampler)
        assert first_stmt.sampler.n == 2

    def test_params_override_const(self):
        prog = parse_program(BLOOM_TEXT, params={"N": 3})
        assert prog.consts["N"] == 3
        assert prog.decls["bloom"].shape == (3,)

    def test_det_from_rand_rejected(self):
        with pytest.raises(StaticRestrictionViolation):
            parse_program("det x : int; rand y : int; y <-$ unif{0,1}; x := y")

    def test_det_assign_under_randomized_guard_rejected(self):
        text = """
        det d : int; rand b : bit;
        b <-$ unif{0,1};
        if b = 1 { d := 1 }
        """
        with pytest.raises(StaticRestrictionViolation):
            parse_program(text)

    def test_sampling_into_det_rejected(self):
        with pytest.raises(StaticRestrictionViolation):
            parse_program("det x : int; x <-$ unif{0,1}")

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_program("det x : int;\nx := := 1")
        assert err.value.line == 2

    def test_type_errors(self):
        with pytest.raises(TypingError):
            parse_program("rand x : bit; x := 2")
        with pytest.raises(TypingError):
            parse_program("rand x : bit[2]; x <-$ oh(3)")
        with pytest.raises(TypingError):
            parse_program("rand x : int; while x { skip }")

    def test_unif_range_syntax(self):
        prog = parse_program("const N = 4; rand x : int; x <-$ unif{0..N-1}")
        stmt = prog.body
        assert stmt.sampler.values == (0, 1, 2, 3)

    def test_perm_sampler(self):
        prog = parse_program("rand g : int[3]; g <-$ perm([5, 5, 7])")
        assert prog.body.sampler.values == (5, 5, 7)


class TestEvalExpr:
    def test_arith(self):
        decls = parse_program("rand x : int; skip").decls
        e = parse_expr("x + 1", decls)
        assert eval_expr(e, Mem({}), mem(x=2), decls) == 3

    def test_mod(self):
        decls = parse_program("rand g : int[8]; det B : int; skip").decls
        e = parse_expr("mod(g[7], B)", decls)
        sigma = Mem({dv("B"): 3})
        m = Mem({rv("g", i): i for i in range(8)})
        assert eval_expr(e, sigma, m, decls) == 1

    def test_vector_or(self):
        decls = parse_program("rand a : bit[2]; rand b : bit[2]; skip").decls
        e = parse_expr("a || b", decls)
        m = Mem({rv("a", 0): 1, rv("a", 1): 0, rv("b", 0): 0, rv("b", 1): 0})
        assert eval_expr(e, Mem({}), m, decls) == (1, 0)

    def test_builtins(self):
        decls = parse_program("rand v : int[3]; skip").decls
        m = Mem({rv("v", 0): 0, rv("v", 1): 2, rv("v", 2): 0})
        assert eval_expr(parse_expr("sum(v)", decls), Mem({}), m, decls) == 2
        assert eval_expr(parse_expr("isZero(v)", decls), Mem({}), m, decls) == (1, 0, 1)

    def test_outer(self):
        decls = parse_program("rand a : bit[2]; rand b : bit[2]; skip").decls
        m = Mem({rv("a", 0): 1, rv("a", 1): 0, rv("b", 0): 0, rv("b", 1): 1})
        assert eval_expr(parse_expr("outer(a, b)", decls), Mem({}), m, decls) == \
            ((0, 1), (0, 0))

    def test_unbound_and_bounds(self):
        decls = parse_program("rand v : int[2]; rand i : int; skip").decls
        with pytest.raises(UnboundVariable):
            eval_expr(parse_expr("v[0]", decls), Mem({}), Mem({}), decls)
        m = Mem({rv("v", 0): 0, rv("v", 1): 0, rv("i"): 5})
        with pytest.raises(IndexOutOfRange):
            eval_expr(parse_expr("v[i]", decls), Mem({}), m, decls)


class TestExec:
    def test_unif_from_empty(self):
        prog = parse_program("rand x : bit; x <-$ unif{0,1}")
        cfg = exec_command(prog.body, Config(), prog.decls)
        assert cfg.rand == uniform([mem(x=0), mem(x=1)])

    def test_oh_sampling(self):
        prog = parse_program("rand bin : bit[2]; bin <-$ oh(2)")
        cfg = run_program(prog)
        assert cfg.rand == uniform([
            Mem({rv("bin", 0): 1, rv("bin", 1): 0}),
            Mem({rv("bin", 0): 0, rv("bin", 1): 1}),
        ])

    def test_perm_with_duplicates_keeps_labels(self):
        prog = parse_program("rand g : int[2]; g <-$ perm([4, 4])")
        cfg = run_program(prog)
        m = Mem({rv("g", 0): 4, rv("g", 1): 4})
        assert cfg.rand == dirac(m)

    def test_overwrite_semantics(self):
        prog = parse_program("rand x : bit; x <-$ unif{0,1}; x := 1")
        cfg = run_program(prog)
        assert cfg.rand == dirac(mem(x=1))

    def test_randomized_index_write(self):
        text = """
        rand i : int; rand v : bit[2];
        i <-$ unif{0,1};
        v[i] := 1
        """
        cfg = run_program(parse_program(text))
        expected = uniform([
            Mem({rv("i"): 0, rv("v", 0): 1, rv("v", 1): 0}),
            Mem({rv("i"): 1, rv("v", 0): 0, rv("v", 1): 1}),
        ])
        assert cfg.rand == expected

    def test_randomized_conditional_recombines(self):
        text = """
        rand x : bit; rand y : bit;
        x <-$ unif{0,1};
        if x = 1 { y := 1 } else { y <-$ unif{0,1} }
        """
        cfg = run_program(parse_program(text))
        assert cfg.rand.prob(mem(x=1, y=1)) == F(1, 2)
        assert cfg.rand.prob(mem(x=0, y=0)) == F(1, 4)
        assert cfg.rand.prob(mem(x=0, y=1)) == F(1, 4)

    def test_mass_is_conserved(self):
        text = """
        rand x : int; rand steps : int;
        x <-$ unif{0,1,2,3};
        while x > 0 {
          x := x - 1;
          steps := steps + 1
        }
        """
        cfg = run_program(parse_program(text))
        assert sum(cfg.rand.mass.values()) == 1
        assert expectation(cfg, parse_expr("steps", parse_program(text).decls),
                           parse_program(text).decls) == F(3, 2)

    def test_fuel_exhausted(self):
        prog = parse_program("det x : int; while 0 = 0 { x := x + 1 }")
        with pytest.raises(FuelExhausted):
            run_program(prog, fuel=10)

    def test_seq_compositionality(self):
        text = "rand x : bit; rand y : bit; x <-$ unif{0,1}; y <-$ unif{0,1}"
        prog = parse_program(text)
        whole = run_program(prog)
        first = exec_command(prog.body.first, initial_config(prog), prog.decls)
        then = exec_command(prog.body.second, first, prog.decls)
        assert whole == then

    def test_det_memory_stable_under_randomized_branching(self):
        text = """
        det d : int; rand x : bit;
        d := 7;
        x <-$ unif{0,1};
        if x = 1 { skip } else { skip }
        """
        cfg = run_program(parse_program(text))
        assert cfg.det[dv("d")] == 7


class TestBloom:
    def run_bloom(self, n, m, h):
        prog = parse_program(BLOOM_TEXT, params={"N": n, "M": m, "H": h})
        return prog, run_program(prog)

    def bloom_cells(self, n):
        return [rv("bloom", i) for i in range(n)]

    def oracle_bloom(self, n, m, h):
        """Enumerate all hash-choice tuples directly."""
        acc = {}
        total = n ** (m * h)
        for choices in itertools.product(range(n), repeat=m * h):
            bloom = [0] * n
            for c in choices:
                bloom[c] = 1
            key = Mem({rv("bloom", i): bloom[i] for i in range(n)})
            acc[key] = acc.get(key, F(0)) + F(1, total)
        return Dist(frozenset(self.bloom_cells(n)), acc)

    @pytest.mark.parametrize("n,m,h", [(2, 1, 1), (2, 2, 1), (2, 1, 2), (3, 2, 1)])
    def test_matches_brute_force(self, n, m, h):
        from negsep.dist import project
        prog, cfg = self.run_bloom(n, m, h)
        got = project(cfg.rand, frozenset(self.bloom_cells(n)))
        assert got == self.oracle_bloom(n, m, h)

    @pytest.mark.parametrize("n,m,h", [(2, 1, 1), (2, 2, 2), (4, 1, 2)])
    def test_expected_occupancy_closed_form(self, n, m, h):
        prog, cfg = self.run_bloom(n, m, h)
        e = parse_expr("sum(bloom)", prog.decls)
        expected = n * (1 - (1 - F(1, n)) ** (m * h))
        assert expectation(cfg, e, prog.decls) == expected

    def test_bloom_2_1_1_expectation_is_one(self):
        prog, cfg = self.run_bloom(2, 1, 1)
        e = parse_expr("sum(bloom)", prog.decls)
        assert expectation(cfg, e, prog.decls) == 1


class TestObservables:
    def test_expectation_fair_bit(self):
        prog = parse_program("rand x : bit; x <-$ unif{0,1}")
        cfg = run_program(prog)
        assert expectation(cfg, parse_expr("x", prog.decls), prog.decls) == F(1, 2)

    def test_expectation_constant(self):
        prog = parse_program("skip")
        assert expectation(run_program(prog), parse_expr("3", {}), {}) == 3

    def test_prob_event(self):
        prog = parse_program("rand x : bit; x <-$ unif{0,1}")
        cfg = run_program(prog)
        assert prob_event(cfg, parse_expr("x = 1", prog.decls), prog.decls) == F(1, 2)
        assert prob_event(cfg, parse_expr("false", prog.decls), prog.decls) == 0

    def test_prob_event_requires_bit(self):
        prog = parse_program("rand x : int; x <-$ unif{0,3}")
        cfg = run_program(prog)
        with pytest.raises(TypingError):
            prob_event(cfg, parse_expr("x + 1", prog.decls), prog.decls)


class TestRandomizedGuards:
    def test_loop_with_randomized_guard(self):
        text = """
        rand n : int; rand hits : int;
        n <-$ unif{0,1,2};
        hits := 0;
        while hits < n {
          hits := hits + 1
        }
        """
        cfg = run_program(parse_program(text))
        decls = parse_program(text).decls
        assert prob_event(cfg, parse_expr("hits = n", decls), decls) == 1
        assert sum(cfg.rand.mass.values()) == 1

    def test_sampling_under_randomized_guard(self):
        text = """
        rand flips : int; rand coin : bit;
        coin := 1;
        flips := 0;
        while coin = 1 {
          coin <-$ unif{0,1};
          flips := flips + 1;
          if flips > 3 { coin := 0 } else { skip }
        }
        """
        cfg = run_program(parse_program(text))
        assert sum(cfg.rand.mass.values()) == 1
