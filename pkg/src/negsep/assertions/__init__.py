from .formula import (  # noqa: F401
    And, BAdd, BMul, BPow, BRat, BernAtom, Bottom, DetmAtom, EqAtom,
    EventAtom, Imp, LeAtom, Or, PrAtom, Star, Top, UnifAtom, Wand,
    big_and, big_indep, big_na, big_or, cell_expr, eval_bound, fv,
    is_wand_free, one_hot_values, onehot_atom, own, own_cells, perm_atom,
    perm_values, subst, subst_expr, INDEP, NA,
)
from .checker import (  # noqa: F401
    Checker, check, check_atom, classify_CC, classify_CM, na_characterization,
    CC_YES, UNKNOWN,
)
from .parser import parse_formula  # noqa: F401
