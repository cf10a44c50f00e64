"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
pass/fail lines.
"""

import itertools
import random
import time

import pytest

from sipgame import interp
from sipgame.engine import Characterization, InvariantEngine, InvariantState
from sipgame.lang import conjoin, expr_to_text, parse_expr, parse_program
from sipgame.solver import SolverClient, SolverConfig
from sipgame.vcgen import GoalKind, assertion_goal, build_consecution

from .linear_levels import random_candidates, random_linear_program


def E(program, text):
    return parse_expr(text, program.type_env)


NARRATIVE = [
    ("odd >= 1", Characterization.INDUCTIVE),
    ("cnt >= 0", Characterization.INDUCTIVE),
    ("odd % 2 = 1", Characterization.INDUCTIVE),
    ("sqr = (cnt+1)^2", Characterization.POTENTIAL),
    ("sqr >= odd", Characterization.INDUCTIVE),
    ("odd = cnt*2+1", Characterization.INDUCTIVE),
    ("cnt^2 <= n", Characterization.INDUCTIVE),
]

SOLUTIONS = {
    "warmup": ["x <= n"],
    "int-sqrt": ["odd = cnt*2+1", "sqr = (cnt+1)^2", "cnt^2 <= n"],
    "gauss-sum": ["2*s = i*(i+1)", "i <= n"],
    "slow-multiply": ["p = a*c", "c <= b"],
    "half-steps": ["2*acc = k", "k <= n"],
    "bounds-play": [],
}


def report(criterion: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {criterion}" + (f" - {detail}" if detail else ""))
    assert ok, f"{criterion}: {detail}"


class TestAcceptance:
    def test_narrative_replay(self, l1, solver):
        """Walkthrough replay: characterizations, promotion, removal, solve."""
        started = time.monotonic()
        engine = InvariantEngine(l1, solver)
        s = InvariantState()
        solved = False
        for index, (text, expected) in enumerate(NARRATIVE):
            kind, feedback, s = engine.propose_loop_inv(s, E(l1, text))
            assert kind is expected, f"{text}: got {kind}, expected {expected}"
            if index == 5:  # the promotion step
                assert feedback.promoted_invariants == [E(l1, "sqr = (cnt+1)^2")], \
                    "promotion must promote exactly the squared-shape invariant"
                assert len(feedback.removed_invariants) == 3, \
                    f"expected exactly 3 removals, got {len(feedback.removed_invariants)}"
            if kind in (Characterization.INDUCTIVE, Characterization.POTENTIAL):
                solved, _ = engine.check_solved(s)
        elapsed = time.monotonic() - started
        report(
            "narrative replay",
            solved and elapsed <= 120.0,
            f"solved={solved} in {elapsed:.1f}s (limit 120s)",
        )

    def test_greatest_fixpoint_oracle(self, solver):
        """promote == brute-force maximal consecution-closed subset, 50 levels."""
        started = time.monotonic()
        rng = random.Random(20240901)
        levels_checked = 0
        mismatches = []
        while levels_checked < 50:
            program = random_linear_program(rng)
            engine = InvariantEngine(program, solver)
            pool = random_candidates(program, rng)
            candidates = []
            for cand in pool:
                if len(candidates) >= 9 or cand in candidates:
                    continue
                from sipgame.vcgen import build_upto_loop

                if solver.gen_chk_vcs(program, build_upto_loop(program, cand)).proved:
                    candidates.append(cand)
            # every other level starts from a nonempty inductive set,
            # promoted out of the first few candidates
            iinvs: list = []
            if levels_checked % 2 == 1 and len(candidates) > 3:
                seeded, candidates = candidates[:3], candidates[3:]
                base, _, _ = engine.promote(InvariantState([], seeded))
                iinvs = base.iinvs
            pinvs = candidates[:6]
            if len(pinvs) < 2:
                continue
            levels_checked += 1
            state = InvariantState(list(iinvs), list(pinvs))
            _, promoted, _ = engine.promote(state)

            def closed(subset) -> bool:
                return all(
                    solver.gen_chk_vcs(
                        program,
                        build_consecution(program, list(iinvs) + list(subset), x),
                    ).proved
                    for x in subset
                )

            best: tuple = ()
            for r in range(len(pinvs), -1, -1):
                for subset in itertools.combinations(pinvs, r):
                    if closed(subset):
                        best = subset
                        break
                if best or r == 0:
                    break
            if set(promoted) != set(best):
                mismatches.append(
                    (expr_to_text(conjoin(pinvs)),
                     sorted(expr_to_text(x) for x in promoted),
                     sorted(expr_to_text(x) for x in best))
                )
        elapsed = time.monotonic() - started
        report(
            "greatest-fixpoint oracle",
            not mismatches and elapsed <= 600.0,
            f"{levels_checked} levels, {len(mismatches)} mismatches, {elapsed:.0f}s (limit 600s)",
        )

    def test_counterexample_replay(self, levels, solver):
        """Every NonInv trace, rule-out state and why-not pair re-verifies."""
        failures = []
        l1 = levels["int-sqrt"].program
        engine = InvariantEngine(l1, solver)

        # NonInv traces across a batch of bad proposals
        for text in ("cnt >= 1", "sqr = cnt + 1", "odd = 1", "cnt <= 2",
                     "sqr <= 30", "odd > sqr"):
            target = E(l1, text)
            kind, fb, _ = engine.propose_loop_inv(InvariantState(), target)
            if kind is not Characterization.NON_INV:
                failures.append(f"{text}: expected non-inv, got {kind.value}")
                continue
            if fb.trace is None:
                failures.append(f"{text}: missing trace")
                continue
            rows = fb.trace.rows
            if not any(not interp.eval_expr(target, r.values) for r in rows):
                failures.append(f"{text}: no trace row falsifies it")
            for before, after in zip(rows, rows[1:]):
                values = dict(before.values)
                interp.StmtRunner(l1.type_env, values).run_stmt(l1.body)
                if values != after.values:
                    failures.append(f"{text}: rows {before.location}->{after.location} diverge")

        # rule-out states along partial plays of several levels
        partial_plays = {
            "int-sqrt": [text for text, _ in NARRATIVE[:-1]],
            "gauss-sum": ["i <= n", "2*s = i*(i+1)"],
            "slow-multiply": ["c >= 0", "p = a*c"],
            "half-steps": ["2*acc = k"],
        }
        for level_id, texts in partial_plays.items():
            program = levels[level_id].program
            eng = InvariantEngine(program, solver)
            s = InvariantState()
            for text in texts:
                kind, fb, s = eng.propose_loop_inv(s, E(program, text))
                if kind not in (Characterization.INDUCTIVE,
                                Characterization.POTENTIAL):
                    continue
                solved, ctrex = eng.check_solved(s)
                if solved:
                    continue
                fb2 = eng.gen_feedback(s, ctrex)
                state = fb2.rule_out_state
                if state is None:
                    failures.append(f"{level_id}/{text}: no rule-out state")
                    continue
                for inv in s.iinvs + s.pinvs:
                    if not interp.eval_expr(inv, state.values):
                        failures.append(
                            f"{level_id}/{text}: rule-out fails {expr_to_text(inv)}"
                        )
                if interp.eval_expr(program.test, state.values):
                    failures.append(f"{level_id}/{text}: rule-out satisfies the loop test")
                if interp.eval_expr(program.post, state.values):
                    failures.append(f"{level_id}/{text}: rule-out satisfies the guarantee")

        # why-not-inductive pair at the potential-invariant point
        s = InvariantState()
        for text in ("odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr = (cnt+1)^2"):
            _, _, s = engine.propose_loop_inv(s, E(l1, text))
        q = E(l1, "sqr = (cnt+1)^2")
        before, after = engine.why_not_inductive(s, q)
        for hyp in s.iinvs + s.pinvs + [l1.test]:
            if not interp.eval_expr(hyp, before.values):
                failures.append(f"why-not: before fails {expr_to_text(hyp)}")
        values = dict(before.values)
        interp.StmtRunner(l1.type_env, values).run_stmt(l1.body)
        if values != after.values:
            failures.append("why-not: after is not one body execution of before")
        if interp.eval_expr(q, after.values):
            failures.append("why-not: after satisfies the query")

        report("counterexample replay", not failures, "; ".join(failures[:4]))

    def test_soundness_audit(self, levels, solver):
        """1,000 randomized engine steps; the inductive set always re-proves."""
        rng = random.Random(77)
        programs = [levels[k].program for k in
                    ("warmup", "gauss-sum", "slow-multiply", "int-sqrt")]
        pools = {
            p.name: random_candidates(p, rng, textual=True) for p in programs
        }
        engines = {p.name: InvariantEngine(p, solver) for p in programs}
        states = {p.name: InvariantState() for p in programs}
        failures = []
        inconclusive = 0
        steps = 0
        while steps < 1000:
            program = programs[rng.randrange(len(programs))]
            pool = pools[program.name]
            text = pool[rng.randrange(len(pool))]
            steps += 1
            try:
                expr = parse_expr(text, program.type_env)
            except Exception:
                continue
            engine = engines[program.name]
            s = states[program.name]
            if s.contains(expr):
                continue
            before = (list(s.iinvs), list(s.pinvs))
            kind, _, s2 = engine.propose_loop_inv(s, expr)
            states[program.name] = s2
            mutated = (list(s2.iinvs), list(s2.pinvs)) != before
            if mutated:
                ok, reason = engine.reprove_inductive(s2)
                if not ok:
                    failures.append(f"{program.name}: {reason}")
                elif reason is not None:
                    inconclusive += 1
        report(
            "soundness audit",
            not failures,
            f"{steps} steps, {inconclusive} inconclusive, {len(failures)} failures",
        )

    def test_solved_levels_runtime_correctness(self, levels, solver):
        """Each solved fixture: 1,000 random inputs end satisfying the guarantee."""
        rng = random.Random(5)
        violations = []
        for level_id, texts in SOLUTIONS.items():
            program = levels[level_id].program
            engine = InvariantEngine(program, solver)
            s = InvariantState()
            for text in texts:
                _, _, s = engine.propose_loop_inv(s, E(program, text))
            solved, _ = engine.check_solved(s)
            if not solved:
                violations.append(f"{level_id}: not solved by its solution set")
                continue
            for _ in range(1000):
                inputs = {
                    name: interp.sample_value(ty, rng)
                    for name, ty in program.params
                }
                if program.pre is not None and not interp.eval_expr(
                        program.pre, inputs):
                    continue
                trace = interp.exec_trace(program, inputs)
                if not interp.eval_expr(program.post, trace.post.values):
                    violations.append(f"{level_id}: guarantee fails on {inputs}")
                    break
        report("solved => runtime correctness", not violations,
               "; ".join(violations[:3]))

    def test_type_tautology_example(self, levels, solver):
        """x: Natural, y: Integer |- y - x <= y is a type tautology."""
        program = levels["bounds-play"].program
        engine = InvariantEngine(program, solver)
        kind, _, _ = engine.propose_loop_inv(
            InvariantState(), E(program, "y - x <= y")
        )
        report("type-tautology example", kind is Characterization.TYPE_TAUTOLOGY,
               f"got {kind.value}")

    def test_rem_displaced_equivalence(self, levels, solver):
        """Removal never changes the provable meaning of the conjunction."""
        failures = []
        fixture_sets = {
            "int-sqrt": [
                ["odd >= 1", "cnt >= 0", "odd % 2 = 1", "sqr >= odd",
                 "odd = cnt*2+1", "sqr = (cnt+1)^2"],
                ["cnt >= 0", "cnt >= 0 | odd >= 1"],
            ],
            "gauss-sum": [["i >= 0", "2*s = i*(i+1)", "2*s >= 0", "s >= 0"]],
            "slow-multiply": [["c >= 0", "p = a*c", "c <= b"]],
            "warmup": [["x <= n", "x <= n + 1"]],
            "half-steps": [["2*acc = k", "k <= n", "2*acc <= n"]],
        }
        for level_id, sets in fixture_sets.items():
            program = levels[level_id].program
            engine = InvariantEngine(program, solver)
            for texts in sets:
                exprs = [E(program, t) for t in texts]
                out, removed = engine.rem_displaced(InvariantState(exprs, []))
                if not engine.conjunction_equivalent(exprs, out.iinvs):
                    failures.append(f"{level_id}: {texts} not equivalent after removal")
        report("rem_displaced equivalence", not failures, "; ".join(failures[:3]))
