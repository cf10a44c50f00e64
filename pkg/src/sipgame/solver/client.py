"""GenChkVCs over an external prover, plus the random-testing fallback.

The prover is any SMT-LIB v2 process reading commands on stdin; by default
the bundled `sipgame-smt` prover is launched.  Key guarantees:

  * `proved` is only ever derived from an `unsat` answer;
  * every counterexample is replayed concretely through the interpreter
    before being reported - models that fail replay degrade to the random
    fallback, and then to `unknown`, never to a fabricated state;
  * a crashed or misbehaving prover is restarted and the query retried once
    (a transport error is distinct from an `unknown` verdict).
"""

from __future__ import annotations

import itertools
import queue
import random
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .. import interp
from ..interp import State, Value
from ..lang import Assert, Assume, Binary, Expr, IntLit, Program, Type, Unary, negate
from ..vcgen import Goal, GoalKind, symexec_to_vc
from .minismt.sexpr import balanced
from .smtlib import ModelParseError, formula_to_script, parse_model

DEFAULT_TIMEOUT = 10.0
DEFAULT_FUZZ_SAMPLES = 2000


def default_prover_command() -> tuple[str, ...]:
    return (sys.executable, "-u", "-m", "sipgame.solver.minismt")


class SolverTransportError(Exception):
    """Prover process crash or protocol violation (not an unknown verdict)."""


@dataclass
class SolverConfig:
    command: tuple[str, ...] = field(default_factory=default_prover_command)
    timeout: float = DEFAULT_TIMEOUT
    fuzz_samples: int = DEFAULT_FUZZ_SAMPLES
    seed: int = 0
    pool_size: int = 2

    def __post_init__(self):
        if self.timeout < 0:
            raise ValueError("timeout must be non-negative")


@dataclass(frozen=True)
class SolverVerdict:
    status: str  # "proved" | "counterexample" | "unknown"
    model: Optional[dict[str, Value]] = None
    loop_head: Optional[State] = None
    reason: Optional[str] = None

    @property
    def proved(self) -> bool:
        return self.status == "proved"

    @property
    def has_counterexample(self) -> bool:
        return self.status == "counterexample"

    @property
    def unknown(self) -> bool:
        return self.status == "unknown"


PROVED = SolverVerdict("proved")


# --------------------------------------------------------------------------
# Prover process handling
# --------------------------------------------------------------------------

class ProverProcess:
    """One external prover on a pipe; queries are serialized per process."""

    def __init__(self, command: tuple[str, ...]):
        self.command = command
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()

    def start(self):
        self._lines = queue.Queue()
        self._proc = subprocess.Popen(
            list(self.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
        thread = threading.Thread(target=self._pump, args=(self._proc,), daemon=True)
        thread.start()

    def _pump(self, proc: subprocess.Popen):
        assert proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def stop(self):
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.kill()
            except OSError:
                pass
        self._proc = None

    @property
    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    def _send(self, text: str):
        if self._proc is None or self._proc.stdin is None:
            raise SolverTransportError("prover not running")
        try:
            self._proc.stdin.write(text + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverTransportError(f"prover pipe failed: {exc}")

    def _read_line(self, deadline: float) -> str:
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise SolverTransportError("prover reply timed out")
            try:
                line = self._lines.get(timeout=min(remaining, 0.5))
            except queue.Empty:
                continue
            if line is None:
                raise SolverTransportError("prover closed its output")
            if line.strip():
                return line.strip()

    def query(self, script: str, timeout: float) -> tuple[str, Optional[str]]:
        """Run one check-sat cycle; returns (verdict, raw model text)."""
        if not self.alive:
            self.start()
        # the prover self-limits via :timeout; this deadline is only slack
        # against a wedged process
        deadline = time.monotonic() + timeout * 1.5 + 5.0
        self._send("(reset)")
        self._send(script)
        self._send("(check-sat)")
        answer = self._read_line(deadline)
        if answer.startswith("(error"):
            raise SolverTransportError(f"prover error: {answer}")
        if answer not in ("sat", "unsat", "unknown"):
            raise SolverTransportError(f"unexpected prover answer {answer!r}")
        if answer != "sat":
            return answer, None
        self._send("(get-model)")
        chunks = []
        while True:
            chunks.append(self._read_line(deadline))
            text = "\n".join(chunks)
            if balanced(text) and text.count("(") > 0:
                return "sat", text


class SolverPool:
    """Bounded pool of prover processes shared across sessions."""

    def __init__(self, config: SolverConfig):
        self.config = config
        self._idle: list[ProverProcess] = []
        self._lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(max(1, config.pool_size))

    def acquire(self) -> ProverProcess:
        self._slots.acquire()
        with self._lock:
            if self._idle:
                return self._idle.pop()
        return ProverProcess(self.config.command)

    def release(self, proc: ProverProcess):
        with self._lock:
            self._idle.append(proc)
        self._slots.release()

    def discard(self, proc: ProverProcess):
        proc.stop()
        self._slots.release()

    def shutdown(self):
        with self._lock:
            for proc in self._idle:
                proc.stop()
            self._idle.clear()


# --------------------------------------------------------------------------
# Goal replay
# --------------------------------------------------------------------------

@dataclass
class ReplayResult:
    outcome: str  # "violated" | "ok" | "infeasible" | "stuck"
    failing_state: Optional[dict[str, Value]] = None


def replay_goal(
    goal: Goal,
    free_values: Mapping[str, Value],
    pins: Optional[Mapping[tuple[str, int], Value]] = None,
    seed: int = 0,
) -> ReplayResult:
    """Execute a goal's statements concretely.

    `free_values` supplies the goal's free variables; `pins` optionally fixes
    cassign results by (variable, static site index), which is how a prover
    model is replayed.  Unpinned cassigns fall back to seeded random search.
    """
    values = {
        name: free_values.get(name, interp.type_default(ty))
        for name, ty in goal.type_env.items()
    }
    rng = random.Random(seed)

    def hook(site: int, targets, phi, current):
        if pins is not None and all((t, site) in pins for t in targets):
            updated = dict(current)
            for t in targets:
                updated[t] = pins[(t, site)]
            if not interp.eval_expr(phi, updated):
                raise interp.InfeasibleAssumeError(phi)
            return updated
        return interp.solve_cassign(targets, phi, current, goal.type_env, rng)

    runner = interp.StmtRunner(goal.type_env, values, rng, cassign_hook=hook)
    try:
        runner.run(goal.stmts)
    except interp.SipAssertionError as exc:
        return ReplayResult("violated", exc.values)
    except interp.InfeasibleAssumeError:
        return ReplayResult("infeasible")
    except (interp.DivisionByZeroError, interp.BadModulusError):
        # partiality guards are obligations, so hitting one is a violation
        return ReplayResult("violated", dict(values))
    except interp.SipRuntimeError:
        return ReplayResult("stuck")
    return ReplayResult("ok")


# --------------------------------------------------------------------------
# The client
# --------------------------------------------------------------------------

class SolverClient:
    """Dispatches goals to the prover; memoizes verdicts per canonical goal."""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.pool = SolverPool(self.config)
        self._cache: dict = {}
        self._cache_lock = threading.Lock()
        self.stats = {
            "queries": 0, "cache_hits": 0, "fuzz_runs": 0, "transport_retries": 0,
        }

    def close(self):
        self.pool.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- cache keys ----------------------------------------------------------

    def _goal_key(self, goal: Goal):
        from ..lang.pretty import _stmt_lines

        env = tuple(sorted((n, t.value) for n, t in goal.type_env.items()))
        stmts = tuple(line for s in goal.stmts for line in _stmt_lines(s, ""))
        return (env, stmts, tuple(sorted(goal.free_vars)),
                int(self.config.timeout * 1000))

    # -- main entry ----------------------------------------------------------

    def gen_chk_vcs(self, program: Program, goal: Goal) -> SolverVerdict:
        """Check a goal: proved, counterexample (replay-verified), or unknown."""
        key = self._goal_key(goal)
        with self._cache_lock:
            if key in self._cache:
                self.stats["cache_hits"] += 1
                return self._cache[key]
        verdict = self._check(program, goal)
        with self._cache_lock:
            self._cache[key] = verdict
        return verdict

    def _check(self, program: Program, goal: Goal) -> SolverVerdict:
        self.stats["queries"] += 1
        formula = symexec_to_vc(goal)
        script = formula_to_script(
            formula,
            timeout_ms=int(self.config.timeout * 1000),
            seed=self.config.seed,
        )
        reason = None
        try:
            answer, raw_model = self._query_with_retry(script)
        except SolverTransportError as exc:
            answer, raw_model = None, None
            reason = f"transport: {exc}"

        if answer == "unsat":
            return PROVED

        if answer == "sat" and raw_model is not None:
            try:
                model = parse_model(raw_model, formula.sorts)
            except ModelParseError as exc:
                model = None
                reason = f"model unreadable: {exc}"
            if model is not None:
                verdict = self._confirm_model(program, goal, formula, model)
                if verdict is not None:
                    return verdict
                reason = "model failed concrete replay"
        elif answer == "unknown":
            reason = "prover returned unknown"

        fallback = self._fuzz_verdict(program, goal)
        if fallback is not None:
            return fallback
        return SolverVerdict("unknown", reason=reason or "timeout")

    def _query_with_retry(self, script: str) -> tuple[str, Optional[str]]:
        last_error: Optional[SolverTransportError] = None
        for attempt in range(2):
            proc = self.pool.acquire()
            try:
                result = proc.query(script, self.config.timeout)
                self.pool.release(proc)
                return result
            except SolverTransportError as exc:
                self.pool.discard(proc)
                last_error = exc
                if attempt == 0:
                    self.stats["transport_retries"] += 1
        assert last_error is not None
        raise last_error

    # -- model confirmation ----------------------------------------------------

    def _confirm_model(self, program: Program, goal: Goal, formula,
                       model: dict) -> Optional[SolverVerdict]:
        inputs: dict[str, Value] = {}
        for name in formula.free_inputs:
            if name in model:
                inputs[name] = model[name]
            else:
                inputs[name] = interp.type_default(goal.type_env[name])
        pins: dict[tuple[str, int], Value] = {}
        for sym, (var, site) in formula.var_map.items():
            if sym != var and sym in model:
                pins[(var, site)] = model[sym]
        replay = replay_goal(goal, inputs, pins, seed=self.config.seed)
        if replay.outcome != "violated":
            return None
        return self._verdict_from_inputs(program, goal, inputs)

    def _verdict_from_inputs(self, program: Program, goal: Goal,
                             inputs: dict) -> SolverVerdict:
        loop_head: Optional[State] = None
        if goal.kind in (GoalKind.CONSECUTION, GoalKind.EXIT,
                         GoalKind.TAUTOLOGY, GoalKind.DISPLACED,
                         GoalKind.DISPLACED_POT):
            loop_head = State(
                {
                    name: inputs.get(name, interp.type_default(ty))
                    for name, ty in program.type_env.items()
                },
                "loop-head",
            )
        elif goal.kind in (GoalKind.LOOP_UNROLLED, GoalKind.UPTO_LOOP):
            loop_head = self._find_falsifying_row(program, goal, inputs)
        program_inputs = {
            name: value for name, value in inputs.items()
            if name in program.type_env
        }
        return SolverVerdict("counterexample", model=program_inputs,
                             loop_head=loop_head)

    def _find_falsifying_row(self, program: Program, goal: Goal,
                             inputs: dict) -> Optional[State]:
        if goal.target is None:
            return None
        try:
            trace = interp.exec_trace(
                program,
                {n: inputs[n] for n in program.param_names},
                seed=self.config.seed,
            )
        except interp.SipRuntimeError:
            return None
        limit = goal.unroll + 1 if goal.kind is GoalKind.LOOP_UNROLLED else 1
        for row in trace.rows[:limit]:
            try:
                if not interp.eval_expr(goal.target, row.values):
                    return row
            except interp.EvalError:
                return row
        return None

    # -- random-testing fallback -------------------------------------------------

    def fuzz_counterexample(self, program: Program, goal: Goal) -> Optional[dict]:
        """Seeded input search whose concrete run violates the goal's assert."""
        self.stats["fuzz_runs"] += 1
        rng = random.Random(self.config.seed)
        free = sorted(goal.free_vars)
        small = [0, 1, 2, -1, 3, -2, 4, -3, 5]
        budget = self.config.fuzz_samples
        count = 0

        def attempt(draw: dict[str, Value]) -> bool:
            replay = replay_goal(goal, draw, pins=None,
                                 seed=rng.randint(0, 2 ** 30))
            return replay.outcome == "violated"

        if 0 < len(free) <= 4:
            pools = []
            for name in free:
                ty = goal.type_env[name]
                if ty is Type.BOOLEAN:
                    pools.append([False, True])
                elif ty is Type.NATURAL:
                    pools.append(sorted({abs(v) for v in small}))
                else:
                    pools.append(list(small))
            for combo in itertools.islice(itertools.product(*pools), min(800, budget)):
                count += 1
                draw = dict(zip(free, combo))
                if attempt(draw):
                    return draw
        while count < budget:
            count += 1
            draw = {name: interp.sample_value(goal.type_env[name], rng)
                    for name in free}
            if attempt(draw):
                return draw
        return None

    def _fuzz_verdict(self, program: Program, goal: Goal) -> Optional[SolverVerdict]:
        draw = self.fuzz_counterexample(program, goal)
        if draw is None:
            return None
        return self._verdict_from_inputs(program, goal, draw)

    # -- cassign escalation ----------------------------------------------------

    def cassign_model(self, program: Program, targets, phi: Expr,
                      values: Mapping[str, Value]) -> Optional[dict[str, Value]]:
        """Model search for cassign: a dict of target values, or None when
        the constraint is proved unsatisfiable under the pinned state."""
        pinned = [
            Assume(Binary("=", _var(name), _value_expr(values[name])))
            for name in sorted(values)
            if name not in targets and name in program.type_env
        ]
        goal = Goal(
            type_env=dict(program.type_env),
            stmts=tuple(pinned + [Assert(negate(phi))]),
            free_vars=frozenset(program.type_env),
            kind=GoalKind.RAW,
            target=phi,
        )
        verdict = self.gen_chk_vcs(program, goal)
        if verdict.proved:
            return None
        if verdict.has_counterexample and verdict.model is not None:
            return {t: verdict.model[t] for t in targets if t in verdict.model}
        raise interp.CassignUnsatisfiableError(phi, proved=False)


def _var(name: str) -> Expr:
    from ..lang import Var

    return Var(name)


def _value_expr(value: Value) -> Expr:
    from fractions import Fraction

    if isinstance(value, bool):
        from ..lang import BoolLit

        return BoolLit(value)
    if isinstance(value, int):
        return IntLit(value) if value >= 0 else Unary("-", IntLit(-value))
    f = Fraction(value)
    expr: Expr = Binary("/", IntLit(abs(f.numerator)), IntLit(f.denominator))
    if f.numerator < 0:
        expr = Unary("-", expr)
    return expr
