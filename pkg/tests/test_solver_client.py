import sys
from pathlib import Path

import pytest

from sipgame.lang import parse_expr
from sipgame.solver import SolverClient, SolverConfig, replay_goal
from sipgame.vcgen import GoalKind, assertion_goal, build_upto_loop

MOCK = str(Path(__file__).parent / "mock_prover.py")


def E(program, text):
    return parse_expr(text, program.type_env)


def mock_client(mode: str, *extra, **kwargs) -> SolverClient:
    cfg = SolverConfig(
        command=(sys.executable, "-u", MOCK, mode, *extra),
        timeout=kwargs.pop("timeout", 5.0),
        fuzz_samples=kwargs.pop("fuzz_samples", 200),
        **kwargs,
    )
    return SolverClient(cfg)


class TestVerdicts:
    def test_type_tautology_example(self, levels, solver):
        # x: Natural, y: Integer |= y - x <= y
        program = levels["bounds-play"].program
        goal = assertion_goal(program, E(program, "y - x <= y"))
        assert solver.gen_chk_vcs(program, goal).proved

    def test_upto_loop_counterexample_carries_naturals(self, l1, solver):
        verdict = solver.gen_chk_vcs(l1, build_upto_loop(l1, E(l1, "cnt >= 1")))
        assert verdict.has_counterexample
        assert verdict.model["n"] >= 0

    def test_assert_true_is_proved(self, l1, solver):
        assert solver.gen_chk_vcs(l1, assertion_goal(l1, E(l1, "true"))).proved

    def test_verdicts_are_cached(self, l1):
        with SolverClient(SolverConfig(timeout=5.0)) as client:
            goal = build_upto_loop(l1, E(l1, "odd >= 1"))
            client.gen_chk_vcs(l1, goal)
            before = client.stats["queries"]
            client.gen_chk_vcs(l1, build_upto_loop(l1, E(l1, "odd >= 1")))
            assert client.stats["queries"] == before
            assert client.stats["cache_hits"] >= 1

    def test_zero_timeout_never_wrong_only_unknown(self, l1):
        with SolverClient(SolverConfig(timeout=0.0, fuzz_samples=0)) as client:
            verdict = client.gen_chk_vcs(l1, build_upto_loop(l1, E(l1, "odd >= 1")))
            assert verdict.unknown


class TestFuzzFallback:
    def test_fuzz_finds_input_independent_violation(self, l1, solver):
        goal = build_upto_loop(l1, E(l1, "cnt >= 1"))
        found = solver.fuzz_counterexample(l1, goal)
        assert found is not None
        assert replay_goal(goal, found).outcome == "violated"

    def test_fuzz_exhausts_on_valid_goal(self, l1):
        with SolverClient(SolverConfig(timeout=5.0, fuzz_samples=60)) as client:
            goal = build_upto_loop(l1, E(l1, "cnt >= 0"))
            assert client.fuzz_counterexample(l1, goal) is None

    def test_infeasible_assume_never_violates(self, l1, solver):
        from sipgame.lang import Assert, Assume
        from sipgame.vcgen import Goal

        goal = Goal(
            dict(l1.type_env),
            (Assume(E(l1, "false")), Assert(E(l1, "false"))),
            frozenset(l1.type_env),
        )
        assert solver.fuzz_counterexample(l1, goal) is None
        assert solver.gen_chk_vcs(l1, goal).proved


class TestTransport:
    def test_external_unsat_prover(self, l1):
        with mock_client("unsat") as client:
            goal = assertion_goal(l1, E(l1, "cnt >= 1"))
            assert client.gen_chk_vcs(l1, goal).proved

    def test_sat_model_is_replay_verified(self, l1):
        # the mock claims n=0 violates cnt >= 1 at loop entry - true claim
        with mock_client("sat-n0") as client:
            verdict = client.gen_chk_vcs(l1, build_upto_loop(l1, E(l1, "cnt >= 1")))
            assert verdict.has_counterexample
            assert verdict.model == {"n": 0}

    def test_unreadable_model_degrades_not_guesses(self, l1):
        with mock_client("sat-bad", fuzz_samples=0) as client:
            verdict = client.gen_chk_vcs(l1, build_upto_loop(l1, E(l1, "cnt >= 0")))
            assert verdict.unknown

    def test_bad_model_for_real_violation_recovered_by_fuzz(self, l1):
        with mock_client("sat-bad", fuzz_samples=300) as client:
            verdict = client.gen_chk_vcs(l1, build_upto_loop(l1, E(l1, "cnt >= 1")))
            assert verdict.has_counterexample

    def test_garbage_answer_is_transport_not_unknown(self, l1):
        with mock_client("garbage", fuzz_samples=0) as client:
            verdict = client.gen_chk_vcs(l1, assertion_goal(l1, E(l1, "cnt >= 0")))
            assert verdict.unknown
            assert "transport" in verdict.reason

    def test_crash_retried_once_then_succeeds(self, l1, tmp_path):
        marker = tmp_path / "crashed-once"
        with mock_client("crash-once", str(marker)) as client:
            goal = assertion_goal(l1, E(l1, "cnt >= 1"))
            assert client.gen_chk_vcs(l1, goal).proved
            assert client.stats["transport_retries"] == 1

    def test_persistent_crash_degrades_to_unknown(self, l1):
        with mock_client("crash", fuzz_samples=0) as client:
            verdict = client.gen_chk_vcs(l1, assertion_goal(l1, E(l1, "cnt >= 0")))
            assert verdict.unknown
            assert "transport" in verdict.reason


class TestProvedNeverContradicted:
    def test_proved_goals_have_no_concrete_counterexample(self, l1, solver):
        # a proved verdict cannot coexist with a verified violation
        for text in ("odd >= 1", "cnt >= 0", "odd % 2 = 1"):
            goal = build_upto_loop(l1, E(l1, text))
            verdict = solver.gen_chk_vcs(l1, goal)
            assert verdict.proved
            assert solver.fuzz_counterexample(l1, goal) is None
