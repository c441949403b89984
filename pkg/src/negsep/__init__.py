"""Exact workbench for negative dependence of randomized programs.

Subpackages provide exact rational distributions (`dist`), decision oracles
for negative association and its partitioned variants (`negdep`), a small
probabilistic imperative language with an exact interpreter (`pwhile`), a
model checker for assertions with two separating conjunctions (`assertions`),
derivation checkers and axiom machinery (`proofkit`), and a command-line
front end (`cli`).
"""

__version__ = "0.1.0"
