"""Bundled SMT-LIB v2 prover for quantifier-free SIP arithmetic.

Runs as a subprocess (`python -m sipgame.solver.minismt` or the
`sipgame-smt` script) so the solver client exercises the same text protocol
it would use against any external prover.
"""

from .core import check  # noqa: F401
