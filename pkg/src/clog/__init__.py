"""Exact tools for [0,1]-valued logic over finite probability spaces.

Subpackages:

- syntax: formula ASTs, sugar, parser, printer
- semantics: exact piecewise-linear decision procedures (validity,
  satisfiability, entailment, witnesses)
- proofs: Hilbert-style proof checking, half-elimination, proof search
- rv: finite probability spaces and [0,1]-valued random variables
- randomisation: random families of finite metric structures
- hall: probabilistic marriage condition and exact allocations
- cli: the `clog` command line tool
"""

__version__ = "0.1.0"
