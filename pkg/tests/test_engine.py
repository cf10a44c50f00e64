import itertools

import pytest

from sipgame import interp
from sipgame.engine import (
    CHECK_ORDER,
    Characterization,
    DuplicateProposalError,
    InvariantEngine,
    InvariantState,
    NotPotentialError,
    PromotableError,
    UnknownVerdictError,
)
from sipgame.lang import expr_to_text, parse_expr, parse_program
from sipgame.solver import SolverClient, SolverConfig
from sipgame.vcgen import build_consecution


def E(program, text):
    return parse_expr(text, program.type_env)


def propose_all(engine, program, texts, state=None):
    s = state or InvariantState()
    kinds = []
    for text in texts:
        kind, fb, s = engine.propose_loop_inv(s, E(program, text))
        kinds.append(kind)
    return kinds, s


class TestCharacterizations:
    def test_first_three_are_inductive(self, l1, l1_engine):
        kinds, _ = propose_all(l1_engine, l1, ["odd >= 1", "cnt >= 0", "odd % 2 = 1"])
        assert kinds == [Characterization.INDUCTIVE] * 3

    def test_square_shape_is_potential(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1, ["odd >= 1", "cnt >= 0", "odd % 2 = 1"])
        kind, fb, s = l1_engine.propose_loop_inv(s, E(l1, "sqr = (cnt+1)^2"))
        assert kind is Characterization.POTENTIAL
        assert s.pinvs == [E(l1, "sqr = (cnt+1)^2")]

    def test_type_tautology(self, levels, solver):
        program = levels["bounds-play"].program
        engine = InvariantEngine(program, solver)
        kind, _, _ = engine.propose_loop_inv(InvariantState(), E(program, "y - x <= y"))
        assert kind is Characterization.TYPE_TAUTOLOGY

    def test_constant_true_folds_to_tautology(self, l1, l1_engine):
        kind, _, _ = l1_engine.propose_loop_inv(InvariantState(), E(l1, "1 = 1"))
        assert kind is Characterization.TYPE_TAUTOLOGY

    def test_displaced_by_direct_implication(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1, ["odd >= 1"])
        kind, _, s2 = l1_engine.propose_loop_inv(s, E(l1, "odd >= 0"))
        assert kind is Characterization.DISPLACED
        assert s2.iinvs == s.iinvs  # dismissed, not stored

    def test_non_inv_with_trace_first_row(self, l1, l1_engine):
        kind, fb, _ = l1_engine.propose_loop_inv(InvariantState(), E(l1, "cnt >= 1"))
        assert kind is Characterization.NON_INV
        assert fb.trace is not None
        assert fb.trace.rows[0].values["cnt"] == 0
        assert not interp.eval_expr(E(l1, "cnt >= 1"), fb.trace.rows[0].values)

    def test_non_inv_found_by_loop_check(self, l1, l1_engine):
        # holds at entry (1 = 0 + 1) but breaks after one iteration: the
        # first falsifying row is (cnt, odd, sqr) = (1, 3, 4) for any n >= 1
        target = E(l1, "sqr = cnt + 1")
        kind, fb, _ = l1_engine.propose_loop_inv(InvariantState(), target)
        assert kind is Characterization.NON_INV
        falsifying = next(
            row for row in fb.trace.rows
            if not interp.eval_expr(target, row.values)
        )
        assert (falsifying.values["cnt"], falsifying.values["odd"],
                falsifying.values["sqr"]) == (1, 3, 4)

    def test_duplicates_rejected_before_solving(self, l1, l1_engine, solver):
        _, s = propose_all(l1_engine, l1, ["odd >= 1"])
        queries_before = solver.stats["queries"]
        with pytest.raises(DuplicateProposalError):
            l1_engine.propose_loop_inv(s, E(l1, "odd >= 1"))
        assert solver.stats["queries"] == queries_before

    def test_unknown_when_solver_is_disabled(self, l1):
        with SolverClient(SolverConfig(timeout=0.0, fuzz_samples=0)) as client:
            engine = InvariantEngine(l1, client)
            kind, fb, _ = engine.propose_loop_inv(InvariantState(), E(l1, "cnt >= 0"))
            assert kind is Characterization.UNKNOWN
            assert fb.diagnostic

    def test_check_order_instrumented(self, l1, solver):
        events = []
        engine = InvariantEngine(l1, solver, event_sink=events.append)
        engine.propose_loop_inv(InvariantState(), E(l1, "odd = cnt * 2 + 1"))
        stages = [e["stage"] for e in events if e.get("op") == "check"]
        ordered = [st for st in stages if st in CHECK_ORDER]
        assert ordered == [st for st in CHECK_ORDER if st in ordered]
        assert ordered[:2] == ["tautology", "displaced"]
        assert "initiation" in ordered and "loop" in ordered


class TestPromotion:
    def test_narrative_promotion_step(self, l1, l1_engine):
        _, s = propose_all(
            l1_engine, l1,
            ["odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr = (cnt+1)^2", "sqr >= odd"],
        )
        kind, fb, s = l1_engine.propose_loop_inv(s, E(l1, "odd = cnt*2+1"))
        assert kind is Characterization.INDUCTIVE
        assert fb.promoted_invariants == [E(l1, "sqr = (cnt+1)^2")]
        assert len(fb.removed_invariants) == 3
        assert s.pinvs == []

    def test_promote_empty_potentials_is_identity(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1, ["odd >= 1"])
        out, promoted, removed = l1_engine.promote(s.copy())
        assert promoted == [] and removed == []
        assert out.iinvs == s.iinvs

    def test_promote_matches_bruteforce_maximal_subset(self, l1, l1_engine, solver):
        iinvs = [E(l1, "odd >= 1"), E(l1, "cnt >= 0"), E(l1, "odd % 2 = 1")]
        pinvs = [E(l1, "sqr = (cnt+1)^2"), E(l1, "odd = cnt*2+1"), E(l1, "sqr >= 100")]
        s = InvariantState(list(iinvs), list(pinvs))
        out, promoted, _ = l1_engine.promote(s)

        def closed(subset):
            return all(
                solver.gen_chk_vcs(
                    l1, build_consecution(l1, iinvs + list(subset), x)
                ).proved
                for x in subset
            )

        best = max(
            (sub for r in range(len(pinvs) + 1)
             for sub in itertools.combinations(pinvs, r) if closed(sub)),
            key=len,
        )
        assert set(promoted) == set(best)
        # every closed subset is contained in the greatest fixpoint
        for r in range(len(pinvs) + 1):
            for sub in itertools.combinations(pinvs, r):
                if closed(sub):
                    assert set(sub) <= set(promoted)


class TestRemDisplaced:
    def test_singleton_unchanged(self, l1, l1_engine):
        s = InvariantState([E(l1, "cnt >= 0")], [])
        out, removed = l1_engine.rem_displaced(s)
        assert removed == [] and out.iinvs == s.iinvs

    def test_redundant_triple_removed_and_equivalent(self, l1, l1_engine):
        full = [
            E(l1, "odd >= 1"), E(l1, "cnt >= 0"), E(l1, "odd % 2 = 1"),
            E(l1, "sqr >= odd"), E(l1, "odd = cnt*2+1"), E(l1, "sqr = (cnt+1)^2"),
        ]
        out, removed = l1_engine.rem_displaced(InvariantState(list(full), []))
        assert len(removed) == 3
        survivors = set(expr_to_text(e) for e in out.iinvs)
        assert "odd = cnt * 2 + 1" in survivors
        assert "sqr = (cnt + 1) * (cnt + 1)" in survivors
        assert l1_engine.conjunction_equivalent(full, out.iinvs)

    def test_no_member_implied_by_rest_afterwards(self, l1, l1_engine, solver):
        from sipgame.vcgen import GoalKind, assertion_goal

        full = [E(l1, "odd >= 1"), E(l1, "odd = cnt*2+1"), E(l1, "cnt >= 0")]
        out, _ = l1_engine.rem_displaced(InvariantState(full, []))
        for inv in out.iinvs:
            others = [i for i in out.iinvs if i != inv]
            goal = assertion_goal(l1, inv, GoalKind.DISPLACED, hyps=others)
            assert not solver.gen_chk_vcs(l1, goal).proved


class TestDisplacedPot:
    def test_symmetric_equality_is_displaced_pot(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1,
                           ["odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr = (cnt+1)^2"])
        kind, _, s2 = l1_engine.propose_loop_inv(s, E(l1, "(cnt+1)^2 = sqr"))
        assert kind is Characterization.DISPLACED_POT
        assert s2.pinvs == s.pinvs  # never stored

    def test_empty_potentials_never_displaced_pot(self, l1, l1_engine):
        assert l1_engine.displaced_pot_check(
            InvariantState(), E(l1, "sqr = (cnt+1)^2"), 2
        ) is False

    def test_conjunction_of_two_potentials(self, solver):
        program = parse_program("""
        fn f(a: Integer, b: Integer, c: Integer): Integer {
          post(true);
          var i: Integer;
          i := 0;
          while (i < 1) { i := i + 1; }
        }
        """)
        engine = InvariantEngine(program, solver)
        s = InvariantState([], [E(program, "a = b"), E(program, "b = c")])
        assert engine.displaced_pot_check(s, E(program, "a = c & b = c"), 2)


class TestSolvedAndFeedback:
    SOLVING = ["odd = cnt*2+1", "sqr = (cnt+1)^2", "cnt^2 <= n"]

    def test_solving_invariants_solve(self, l1, l1_engine):
        s = InvariantState([E(l1, t) for t in self.SOLVING], [])
        solved, ctrex = l1_engine.check_solved(s)
        assert solved and ctrex is None

    def test_empty_invariants_do_not_solve(self, l1, l1_engine):
        solved, ctrex = l1_engine.check_solved(InvariantState())
        assert not solved
        assert ctrex is not None

    def test_trivial_guarantee_solves_immediately(self, levels, solver):
        program = levels["bounds-play"].program
        engine = InvariantEngine(program, solver)
        solved, _ = engine.check_solved(InvariantState())
        assert solved

    def test_rule_out_state_properties(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1, ["odd >= 1", "cnt >= 0", "odd % 2 = 1"])
        solved, ctrex = l1_engine.check_solved(s)
        assert not solved
        fb = l1_engine.gen_feedback(s, ctrex)
        state = fb.rule_out_state
        assert state is not None
        for inv in s.iinvs:
            assert interp.eval_expr(inv, state.values)
        assert not interp.eval_expr(l1.test, state.values)
        assert not interp.eval_expr(l1.post, state.values)

    def test_feedback_state_also_satisfies_potentials(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1,
                           ["odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr = (cnt+1)^2"])
        solved, ctrex = l1_engine.check_solved(s)
        fb = l1_engine.gen_feedback(s, ctrex)
        assert fb.rule_out_state is not None
        for inv in s.iinvs + s.pinvs:
            assert interp.eval_expr(inv, fb.rule_out_state.values)

    def test_degenerate_solver_yields_diagnostic(self, l1):
        with SolverClient(SolverConfig(timeout=0.0, fuzz_samples=0)) as client:
            engine = InvariantEngine(l1, client)
            fb = engine.gen_feedback(InvariantState(), None)
            assert fb.rule_out_state is None
            assert "useful feedback" in fb.diagnostic


class TestWhyNotInductive:
    def fig2b_state(self, l1, l1_engine):
        _, s = propose_all(l1_engine, l1,
                           ["odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr = (cnt+1)^2"])
        return s

    def test_state_pair_semantics(self, l1, l1_engine):
        s = self.fig2b_state(l1, l1_engine)
        q = E(l1, "sqr = (cnt+1)^2")
        before, after = l1_engine.why_not_inductive(s, q)
        for hyp in s.iinvs + s.pinvs + [l1.test]:
            assert interp.eval_expr(hyp, before.values)
        assert not interp.eval_expr(q, after.values)
        # after really is one body execution from before
        values = dict(before.values)
        runner = interp.StmtRunner(l1.type_env, values)
        runner.run_stmt(l1.body)
        assert values == after.values

    def test_not_potential_is_an_error(self, l1, l1_engine):
        s = self.fig2b_state(l1, l1_engine)
        with pytest.raises(NotPotentialError):
            l1_engine.why_not_inductive(s, E(l1, "cnt >= 100"))

    def test_promotable_is_reported(self, l1, l1_engine):
        # with odd = 2cnt+1 inductive, the square shape becomes promotable
        s = InvariantState(
            [E(l1, "odd = cnt*2+1")], [E(l1, "sqr = (cnt+1)^2")]
        )
        with pytest.raises(PromotableError):
            l1_engine.why_not_inductive(s, E(l1, "sqr = (cnt+1)^2"))

    def test_unknown_solver_raises(self, l1):
        with SolverClient(SolverConfig(timeout=0.0, fuzz_samples=0)) as client:
            engine = InvariantEngine(l1, client)
            s = InvariantState([], [E(l1, "sqr = (cnt+1)^2")])
            with pytest.raises(UnknownVerdictError):
                engine.why_not_inductive(s, E(l1, "sqr = (cnt+1)^2"))

    def test_unsatisfiable_hypotheses_report_promotable(self, l1, l1_engine):
        # hypotheses inconsistent with the test make consecution vacuous
        s = InvariantState([E(l1, "false")], [E(l1, "sqr = (cnt+1)^2")])
        with pytest.raises(PromotableError):
            l1_engine.why_not_inductive(s, E(l1, "sqr = (cnt+1)^2"))


class TestCassignPrograms:
    SOURCE = """
    fn wander(n: Natural): Integer {
      post(true);
      var x: Integer;
      x := 0;
      while (x < n) {
        cassign([x], x >= 0 & x <= n);
      }
    }
    """

    def test_nondeterministic_body_invariant(self, solver):
        program = parse_program(self.SOURCE)
        engine = InvariantEngine(program, solver)
        kind, _, s = engine.propose_loop_inv(InvariantState(), E(program, "x >= 0"))
        assert kind is Characterization.INDUCTIVE

    def test_upper_bound_not_invariant(self, solver):
        program = parse_program(self.SOURCE)
        engine = InvariantEngine(program, solver)
        # x <= 3 fails once n allows larger choices; the engine must find
        # witnesses through the nondeterministic assignment
        kind, fb, _ = engine.propose_loop_inv(InvariantState(), E(program, "x <= 3"))
        assert kind in (Characterization.NON_INV, Characterization.POTENTIAL)


class TestCassignSolverEscalation:
    def test_model_outside_sampling_range(self, l1, solver):
        # random sampling draws from [-100, 100]; only the prover can hit this
        phi = E(l1, "odd = 1234567")
        model = solver.cassign_model(l1, ("odd",), phi,
                                     {"n": 0, "cnt": 0, "odd": 0, "sqr": 0})
        assert model == {"odd": 1234567}

    def test_proved_unsatisfiable(self, l1, solver):
        phi = E(l1, "odd > 1 & odd < 1")
        model = solver.cassign_model(l1, ("odd",), phi,
                                     {"n": 0, "cnt": 0, "odd": 0, "sqr": 0})
        assert model is None


class TestRationalStates:
    def test_why_not_with_rational_values(self, levels, solver):
        from fractions import Fraction

        program = levels["half-steps"].program
        engine = InvariantEngine(program, solver)
        s = InvariantState([], [E(program, "acc <= 10")])
        before, after = engine.why_not_inductive(s, E(program, "acc <= 10"))
        assert interp.eval_expr(E(program, "acc <= 10"), before.values)
        assert not interp.eval_expr(E(program, "acc <= 10"), after.values)
        assert Fraction(after.values["acc"]) == Fraction(before.values["acc"]) + Fraction(1, 2)


class TestStateSoundness:
    def test_inductive_set_reproves_after_narrative(self, l1, l1_engine):
        _, s = propose_all(
            l1_engine, l1,
            ["odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr = (cnt+1)^2",
             "sqr >= odd", "odd = cnt*2+1", "cnt^2 <= n"],
        )
        ok, reason = l1_engine.reprove_inductive(s)
        assert ok, reason

    def test_monotone_progress(self, l1, l1_engine, solver):
        from sipgame.lang import conjoin
        from sipgame.vcgen import GoalKind, assertion_goal

        s = InvariantState()
        previous = []
        for text in ["odd >= 1", "cnt >= 0", "sqr = (cnt+1)^2", "odd = cnt*2+1"]:
            kind, _, s = l1_engine.propose_loop_inv(s, E(l1, text))
            current = s.iinvs + s.pinvs
            if previous:
                goal = assertion_goal(
                    l1, conjoin(previous), GoalKind.DISPLACED, hyps=current
                )
                assert solver.gen_chk_vcs(l1, goal).proved
            previous = current
