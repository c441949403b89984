from .ast import (  # noqa: F401
    Assign, Binop, Call, If, Index, Lit, OneHotSampler, PermSampler, Program,
    Sample, Seq, Skip, Target, UnifSampler, Unop, Var, VarDecl, VecLit, While,
    base_names, expr_cells, mentions_rand, seq, target_cells, type_of,
)
from .parser import check_program, parse_expr, parse_program  # noqa: F401
from .interp import (  # noqa: F401
    DEFAULT_FUEL, eval_expr, exec_command, expectation, initial_config,
    prob_event, run_program,
)
