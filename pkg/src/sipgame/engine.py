"""The invariant analysis engine.

Characterizes player proposals against the evolving invariant state,
promotes potential invariants via a greatest-fixpoint consecution
computation, prunes displaced (implied) invariants, detects when a level is
solved, and produces concrete rule-out feedback.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import interp
from .interp import State, Trace
from .lang import Binary, BoolLit, Expr, Program, conjoin, expr_to_text
from .vcgen import (
    DEFAULT_UNROLL,
    GoalKind,
    assertion_goal,
    build_consecution,
    build_exit_check,
    build_loop_unrolled,
    build_upto_loop,
)
from .solver import SolverClient, SolverVerdict


class Characterization(enum.Enum):
    TYPE_TAUTOLOGY = "type-tautology"
    DISPLACED = "displaced"
    DISPLACED_POT = "displaced-pot"
    NON_INV = "non-inv"
    INDUCTIVE = "inductive"
    POTENTIAL = "potential"
    UNKNOWN = "unknown"


# Order in which propose_loop_inv runs its checks; instrumented by tests.
CHECK_ORDER = (
    "tautology", "displaced", "displaced-pot", "initiation", "loop",
)


@dataclass
class InvariantState:
    """Inductive and potential invariant lists, insertion-ordered."""

    iinvs: list[Expr] = field(default_factory=list)
    pinvs: list[Expr] = field(default_factory=list)

    def copy(self) -> "InvariantState":
        return InvariantState(list(self.iinvs), list(self.pinvs))

    def contains(self, e: Expr) -> bool:
        return e in self.iinvs or e in self.pinvs


@dataclass
class Feedback:
    kind: Optional[Characterization] = None
    rule_out_state: Optional[State] = None
    trace: Optional[Trace] = None
    state_pair: Optional[tuple[State, State]] = None
    solved: bool = False
    removed_invariants: list[Expr] = field(default_factory=list)
    promoted_invariants: list[Expr] = field(default_factory=list)
    diagnostic: Optional[str] = None


class DuplicateProposalError(Exception):
    pass


class NotPotentialError(Exception):
    pass


class PromotableError(Exception):
    """The queried potential invariant can now be promoted instead."""


class UnknownVerdictError(Exception):
    pass


class FeedbackConsistencyError(Exception):
    """A feedback state failed its own re-verification."""


def _const_value(e: Expr) -> Optional[bool]:
    try:
        v = interp.eval_expr(e, {})
    except (KeyError, interp.EvalError):
        return None
    return v if isinstance(v, bool) else None


class InvariantEngine:
    """Per-program engine; all operations take and return InvariantState."""

    def __init__(
        self,
        program: Program,
        solver: SolverClient,
        unroll: int = DEFAULT_UNROLL,
        displaced_pot_subset: int = 2,
        event_sink: Optional[Callable[[dict], None]] = None,
        seed: int = 0,
    ):
        self.program = program
        self.solver = solver
        self.unroll = unroll
        self.displaced_pot_subset = displaced_pot_subset
        self.event_sink = event_sink
        self.seed = seed

    # -- logging ---------------------------------------------------------------

    def _log(self, **event):
        if self.event_sink is not None:
            self.event_sink(dict(event))

    def _checked(self, stage: str, expr: Expr, verdict: SolverVerdict) -> SolverVerdict:
        self._log(op="check", stage=stage, expr=expr_to_text(expr),
                  verdict=verdict.status)
        return verdict

    # -- characterization ----------------------------------------------------------

    def propose_loop_inv(
        self, s: InvariantState, e: Expr
    ) -> tuple[Characterization, Feedback, InvariantState]:
        """Characterize a proposal; the state is only mutated via promotion
        when the proposal lands in the potential set."""
        if s.contains(e):
            raise DuplicateProposalError(expr_to_text(e))
        p = self.program

        folded = _const_value(e)
        if folded is True:
            self._log(op="check", stage="tautology", expr=expr_to_text(e),
                      verdict="proved")
            return (Characterization.TYPE_TAUTOLOGY,
                    Feedback(Characterization.TYPE_TAUTOLOGY), s)

        verdict = self._checked(
            "tautology", e,
            self.solver.gen_chk_vcs(p, assertion_goal(p, e, GoalKind.TAUTOLOGY)),
        )
        if verdict.proved:
            return (Characterization.TYPE_TAUTOLOGY,
                    Feedback(Characterization.TYPE_TAUTOLOGY), s)

        verdict = self._checked(
            "displaced", e,
            self.solver.gen_chk_vcs(
                p, assertion_goal(p, e, GoalKind.DISPLACED, hyps=list(s.iinvs))
            ),
        )
        if verdict.proved:
            return (Characterization.DISPLACED,
                    Feedback(Characterization.DISPLACED), s)

        if self.displaced_pot_subset > 0 and s.pinvs:
            if self.displaced_pot_check(s, e, self.displaced_pot_subset):
                return (Characterization.DISPLACED_POT,
                        Feedback(Characterization.DISPLACED_POT), s)

        verdict = self._checked(
            "initiation", e,
            self.solver.gen_chk_vcs(p, build_upto_loop(p, e)),
        )
        if verdict.has_counterexample:
            trace = self._trace_from_model(verdict)
            return (Characterization.NON_INV,
                    Feedback(Characterization.NON_INV, trace=trace), s)
        if verdict.unknown:
            return (Characterization.UNKNOWN,
                    Feedback(Characterization.UNKNOWN, diagnostic=verdict.reason), s)

        verdict = self._checked(
            "loop", e,
            self.solver.gen_chk_vcs(p, build_loop_unrolled(p, e, self.unroll)),
        )
        if verdict.has_counterexample:
            trace = self._trace_from_model(verdict)
            return (Characterization.NON_INV,
                    Feedback(Characterization.NON_INV, trace=trace), s)
        # an unknown bounded-invariance check just means no evidence against
        # the proposal; it still becomes a potential invariant

        s2 = s.copy()
        s2.pinvs.append(e)
        s2, promoted, removed = self.promote(s2)
        kind = (Characterization.INDUCTIVE if e in s2.iinvs
                else Characterization.POTENTIAL)
        feedback = Feedback(
            kind,
            removed_invariants=removed,
            promoted_invariants=[x for x in promoted if x != e],
        )
        self._log(op="proposal", expr=expr_to_text(e), kind=kind.value,
                  promoted=[expr_to_text(x) for x in promoted],
                  removed=[expr_to_text(x) for x in removed])
        return kind, feedback, s2

    def _trace_from_model(self, verdict: SolverVerdict) -> Optional[Trace]:
        if verdict.model is None:
            return None
        inputs = {
            name: verdict.model.get(name, interp.type_default(ty))
            for name, ty in self.program.params
        }
        try:
            return interp.exec_trace(
                self.program, inputs, seed=self.seed,
                cassign_solver=lambda targets, phi, values:
                    self.solver.cassign_model(self.program, targets, phi, values),
            )
        except interp.SipRuntimeError:
            return None

    # -- promotion -----------------------------------------------------------------

    def promote(
        self, s: InvariantState
    ) -> tuple[InvariantState, list[Expr], list[Expr]]:
        """Greatest-fixpoint promotion.

        Starts from every potential invariant and removes any whose
        consecution under (inductive + survivors + test) is not proved,
        until stable.  Returns (state, promoted, removed-as-displaced).
        """
        p = self.program
        X = list(s.pinvs)
        changed = True
        while changed:
            changed = False
            for x in list(X):
                verdict = self._checked(
                    "consecution", x,
                    self.solver.gen_chk_vcs(
                        p, build_consecution(p, list(s.iinvs) + X, x)
                    ),
                )
                if not verdict.proved:
                    X.remove(x)
                    changed = True
        out = InvariantState(
            list(s.iinvs) + X,
            [q for q in s.pinvs if q not in X],
        )
        out, removed = self.rem_displaced(out)
        return out, X, removed

    def rem_displaced(
        self, s: InvariantState
    ) -> tuple[InvariantState, list[Expr]]:
        """Greedy oldest-first removal of invariants implied by the rest."""
        p = self.program
        iinvs = list(s.iinvs)
        removed: list[Expr] = []
        changed = True
        while changed:
            changed = False
            for inv in list(iinvs):
                others = [i for i in iinvs if i != inv]
                verdict = self._checked(
                    "displacement", inv,
                    self.solver.gen_chk_vcs(
                        p, assertion_goal(p, inv, GoalKind.DISPLACED, hyps=others)
                    ),
                )
                if verdict.proved:
                    iinvs.remove(inv)
                    removed.append(inv)
                    changed = True
        return InvariantState(iinvs, list(s.pinvs)), removed

    def displaced_pot_check(
        self, s: InvariantState, e: Expr, max_subset: Optional[int] = None
    ) -> bool:
        """Is e provably equivalent, under the inductive set, to the
        conjunction of some subset of potential invariants?  Bounded search."""
        p = self.program
        bound = max_subset if max_subset is not None else self.displaced_pot_subset
        for size in range(1, min(bound, len(s.pinvs)) + 1):
            for subset in itertools.combinations(s.pinvs, size):
                equivalence = Binary("=", conjoin(subset), e)
                verdict = self._checked(
                    "displaced-pot", e,
                    self.solver.gen_chk_vcs(
                        p,
                        assertion_goal(
                            p, equivalence, GoalKind.DISPLACED_POT,
                            hyps=list(s.iinvs),
                        ),
                    ),
                )
                if verdict.proved:
                    return True
        return False

    # -- solved check and feedback ----------------------------------------------------

    def check_solved(
        self, s: InvariantState
    ) -> tuple[bool, Optional[State]]:
        """Exit check under the inductive invariants; records the
        counterexample when the guarantee is not yet provable."""
        verdict = self._checked(
            "solved", self.program.post,
            self.solver.gen_chk_vcs(
                self.program, build_exit_check(self.program, list(s.iinvs))
            ),
        )
        if verdict.proved:
            return True, None
        if verdict.has_counterexample:
            return False, verdict.loop_head
        return False, None

    def gen_feedback(
        self, s: InvariantState, solved_ctrex: Optional[State]
    ) -> Feedback:
        """Rule-out state for an unsolved level.

        Prefers a state that also satisfies the potential invariants (it
        demonstrates more invariants are needed even if all potentials get
        promoted); falls back to the solved-query counterexample; degrades
        to an apologetic diagnostic when the solver cannot help."""
        verdict = self._checked(
            "feedback", self.program.post,
            self.solver.gen_chk_vcs(
                self.program,
                build_exit_check(self.program, list(s.iinvs) + list(s.pinvs)),
            ),
        )
        if verdict.has_counterexample and verdict.loop_head is not None:
            return Feedback(rule_out_state=verdict.loop_head)
        if solved_ctrex is not None:
            return Feedback(rule_out_state=solved_ctrex)
        return Feedback(diagnostic="could not generate any useful feedback")

    def why_not_inductive(
        self, s: InvariantState, q: Expr
    ) -> tuple[State, State]:
        """Why is q only potential?  A loop-head state satisfying everything
        known whose successor after one body execution falsifies q."""
        if q not in s.pinvs:
            raise NotPotentialError(expr_to_text(q))
        p = self.program
        verdict = self._checked(
            "why-not-inductive", q,
            self.solver.gen_chk_vcs(
                p, build_consecution(p, list(s.iinvs) + list(s.pinvs), q)
            ),
        )
        if verdict.proved:
            raise PromotableError(expr_to_text(q))
        if not verdict.has_counterexample or verdict.loop_head is None:
            raise UnknownVerdictError(verdict.reason or "solver returned unknown")

        before = verdict.loop_head
        values = dict(before.values)
        runner = interp.StmtRunner(
            p.type_env, values, random.Random(self.seed)
        )
        runner.run_stmt(p.body)
        after = State(values, "after-body")

        for hyp in list(s.iinvs) + list(s.pinvs) + [p.test]:
            if not interp.eval_expr(hyp, before.values):
                raise FeedbackConsistencyError(
                    f"before-state fails {expr_to_text(hyp)}"
                )
        if interp.eval_expr(q, after.values):
            raise FeedbackConsistencyError("after-state still satisfies the query")
        return before, after

    # -- audit helpers -------------------------------------------------------------

    def reprove_inductive(self, s: InvariantState) -> tuple[bool, Optional[str]]:
        """Re-prove initiation and consecution of the inductive conjunction.

        Returns (ok, failure description); an unknown verdict reports
        'inconclusive' rather than failure."""
        p = self.program
        conj = conjoin(s.iinvs) if s.iinvs else BoolLit(True)
        verdict = self.solver.gen_chk_vcs(p, build_upto_loop(p, conj))
        if verdict.unknown:
            return True, "inconclusive: initiation unknown"
        if not verdict.proved:
            return False, f"initiation of {expr_to_text(conj)} refuted"
        for inv in s.iinvs:
            verdict = self.solver.gen_chk_vcs(
                p, build_consecution(p, list(s.iinvs), inv)
            )
            if verdict.unknown:
                return True, f"inconclusive: consecution of {expr_to_text(inv)} unknown"
            if not verdict.proved:
                return False, f"consecution of {expr_to_text(inv)} refuted"
        return True, None

    def conjunction_equivalent(self, before: list[Expr], after: list[Expr]) -> bool:
        """Solver-checked equivalence of two invariant conjunctions under T."""
        p = self.program
        forward = assertion_goal(p, conjoin(after), GoalKind.DISPLACED, hyps=before)
        backward = assertion_goal(p, conjoin(before), GoalKind.DISPLACED, hyps=after)
        return (self.solver.gen_chk_vcs(p, forward).proved
                and self.solver.gen_chk_vcs(p, backward).proved)
