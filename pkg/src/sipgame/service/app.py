"""HTTP/JSON API: level catalog, sessions, proposal dispatch and scoring.

Request handlers run concurrently; mutations of one (session, level) state
are serialized through a per-key queue with a bounded number of waiters
(excess requests get 429).  Solver work is bounded globally by the prover
process pool.
"""

from __future__ import annotations

import contextvars
import json
import logging
import secrets
import threading
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import interp
from ..engine import (
    Characterization,
    DuplicateProposalError,
    Feedback,
    InvariantEngine,
    InvariantState,
    NotPotentialError,
    PromotableError,
    UnknownVerdictError,
)
from ..interp import State, Trace
from ..lang import (
    Expr,
    ProgramStructureError,
    SipSyntaxError,
    SipTypeError,
    expr_to_text,
    parse_expr,
)
from ..solver import SolverClient
from .config import ServiceConfig
from .levels import Level, load_levels
from .store import EventStore

logger = logging.getLogger("sipgame.service")

# session attribution for solver checks made on a shared per-level engine
_active_session: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar(
    "sipgame_session", default=None
)

SCORE_TABLE = {
    Characterization.INDUCTIVE: 3,
    Characterization.POTENTIAL: 2,
    Characterization.TYPE_TAUTOLOGY: 0,
    Characterization.DISPLACED: 0,
    Characterization.DISPLACED_POT: 0,
    Characterization.NON_INV: 0,
    Characterization.UNKNOWN: 0,
}
SOLVE_BONUS = 10
PROMOTION_UPGRADE = 1  # potential (2) retroactively becomes inductive (3)


def score_update(kind: Characterization) -> int:
    """Points awarded for a single characterization."""
    return SCORE_TABLE[kind]


def state_to_json(state: State) -> dict:
    return {
        "values": {k: interp.value_to_json(v) for k, v in state.values.items()},
        "location": str(state.location),
    }


def feedback_to_json(fb: Feedback, texts) -> dict:
    return {
        "kind": fb.kind.value if fb.kind else None,
        "ruleOutState": state_to_json(fb.rule_out_state) if fb.rule_out_state else None,
        "trace": interp.trace_to_json(fb.trace) if fb.trace else None,
        "statePair": (
            {
                "before": state_to_json(fb.state_pair[0]),
                "after": state_to_json(fb.state_pair[1]),
            }
            if fb.state_pair
            else None
        ),
        "solved": fb.solved,
        "removedInvariants": [texts(e) for e in fb.removed_invariants],
        "promotedInvariants": [texts(e) for e in fb.promoted_invariants],
        "diagnostic": fb.diagnostic,
    }


@dataclass
class LevelSession:
    """Mutable per-(session, level) game state."""

    invariants: InvariantState = field(default_factory=InvariantState)
    texts: dict[Expr, str] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)
    score: int = 0
    solved: bool = False
    upgraded: set[str] = field(default_factory=set)

    def text_of(self, e: Expr) -> str:
        return self.texts.get(e, expr_to_text(e))

    def invariant_lists(self) -> tuple[list[str], list[str]]:
        return (
            [self.text_of(e) for e in self.invariants.iinvs],
            [self.text_of(e) for e in self.invariants.pinvs],
        )


class QueueSaturatedError(Exception):
    pass


class GameService:
    """Coordinator: owns the solver pool, level catalog and session states."""

    def __init__(self, config: Optional[ServiceConfig] = None):
        self.config = config or ServiceConfig.from_env()
        self.levels: dict[str, Level] = load_levels(self.config.levels_dir)
        self.solver = SolverClient(self.config.solver_config())
        store_path = None
        if self.config.data_dir is not None:
            store_path = self.config.data_dir / "events.sqlite3"
        self.store = EventStore(store_path)
        self._engines: dict[str, InvariantEngine] = {}
        self._states: dict[tuple[str, str], LevelSession] = {}
        self._locks: dict[tuple[str, str], threading.Lock] = {}
        self._waiters: dict[tuple[str, str], int] = {}
        self._guard = threading.Lock()

    def close(self):
        self.solver.close()
        self.store.close()

    # -- helpers ---------------------------------------------------------------

    def _engine(self, level: Level) -> InvariantEngine:
        if level.id not in self._engines:
            def sink(ev: dict, level_id: str = level.id):
                session = _active_session.get()
                logger.info(json.dumps({"level": level_id, "session": session, **ev}))
                if session is not None:
                    self.store.append(session, level_id, "check", ev)

            self._engines[level.id] = InvariantEngine(
                level.program,
                self.solver,
                unroll=level.unroll_bound,
                event_sink=sink,
            )
        return self._engines[level.id]

    def level_or_404(self, level_id: str) -> Level:
        if level_id not in self.levels:
            raise HTTPException(404, f"unknown level {level_id!r}")
        return self.levels[level_id]

    def session_or_404(self, session_id: str) -> str:
        if not self.store.session_exists(session_id):
            raise HTTPException(404, "unknown session")
        return session_id

    def _key_lock(self, key: tuple[str, str]) -> threading.Lock:
        with self._guard:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
                self._waiters[key] = 0
            if self._waiters[key] >= self.config.max_queue_waiters:
                raise QueueSaturatedError()
            self._waiters[key] += 1
        return self._locks[key]

    def _release(self, key: tuple[str, str]):
        with self._guard:
            self._waiters[key] -= 1

    def state_for(self, session_id: str, level: Level) -> LevelSession:
        key = (session_id, level.id)
        if key not in self._states:
            ls = self._replay(session_id, level)
            if not ls.history and not ls.solved:
                # a trivial guarantee needs no invariants at all
                solved, _ = self._engine(level).check_solved(ls.invariants)
                ls.solved = solved
            self._states[key] = ls
        return self._states[key]

    def _replay(self, session_id: str, level: Level) -> LevelSession:
        """Rebuild a level session from its recorded proposal outcomes."""
        ls = LevelSession()
        env = level.program.type_env
        for event in self.store.events(session_id, level.id, kind="propose"):
            expr = parse_expr(event["expr"], env)
            ls.texts.setdefault(expr, event["expr"])
            ls.history.append(
                {k: event[k] for k in ("expr", "kind", "scoreDelta") if k in event}
            )
            ls.score += event.get("scoreDelta", 0)
            ls.solved = ls.solved or event.get("solved", False)
            ls.upgraded |= set(event.get("upgraded", []))
            iinvs = [parse_expr(t, env) for t in event.get("iinvs", [])]
            pinvs = [parse_expr(t, env) for t in event.get("pinvs", [])]
            ls.invariants = InvariantState(iinvs, pinvs)
            for e in iinvs + pinvs:
                ls.texts.setdefault(e, expr_to_text(e))
        return ls

    # -- operations -------------------------------------------------------------

    def create_session(self) -> str:
        session_id = secrets.token_hex(16)
        self.store.create_session(session_id)
        logger.info(json.dumps({"event": "session-created", "session": session_id}))
        return session_id

    def propose(self, session_id: str, level: Level, text: str) -> dict:
        key = (session_id, level.id)
        lock = self._key_lock(key)
        token = _active_session.set(session_id)
        try:
            with lock:
                return self._propose_locked(session_id, level, text)
        finally:
            _active_session.reset(token)
            self._release(key)

    def _propose_locked(self, session_id: str, level: Level, text: str) -> dict:
        ls = self.state_for(session_id, level)
        env = level.program.type_env
        expr = parse_expr(text, env)
        if ls.invariants.contains(expr):
            raise DuplicateProposalError(text)

        engine = self._engine(level)
        kind, feedback, new_state = engine.propose_loop_inv(ls.invariants, expr)

        delta = score_update(kind)
        upgraded_now: list[str] = []
        if kind in (Characterization.INDUCTIVE, Characterization.POTENTIAL):
            ls.invariants = new_state
            ls.texts.setdefault(expr, text)
            for promoted in feedback.promoted_invariants:
                ptext = ls.text_of(promoted)
                if ptext not in ls.upgraded:
                    ls.upgraded.add(ptext)
                    upgraded_now.append(ptext)
                    delta += PROMOTION_UPGRADE
            if not ls.solved:
                solved, ctrex = engine.check_solved(ls.invariants)
                if solved:
                    feedback.solved = True
                    ls.solved = True
                    delta += SOLVE_BONUS
                else:
                    rule_out = engine.gen_feedback(ls.invariants, ctrex)
                    feedback.rule_out_state = rule_out.rule_out_state
                    feedback.diagnostic = feedback.diagnostic or rule_out.diagnostic
            else:
                feedback.solved = True

        ls.score += delta
        entry = {"expr": text, "kind": kind.value, "scoreDelta": delta}
        ls.history.append(entry)
        iinvs, pinvs = ls.invariant_lists()
        self.store.append(
            session_id, level.id, "propose",
            {
                **entry,
                "iinvs": iinvs,
                "pinvs": pinvs,
                "solved": ls.solved,
                "upgraded": upgraded_now,
            },
        )
        logger.info(json.dumps({
            "event": "propose", "session": session_id, "level": level.id,
            "expr": text, "kind": kind.value, "solved": ls.solved,
        }))
        return {
            "kind": kind.value,
            "inductive": iinvs,
            "potential": pinvs,
            "feedback": feedback_to_json(feedback, ls.text_of),
            "solved": ls.solved,
            "score": ls.score,
            "scoreDelta": delta,
        }

    def trace(self, session_id: str, level: Level, raw_inputs: dict) -> Trace:
        params = dict(level.program.params)
        typed = {}
        for name, raw in raw_inputs.items():
            if name not in params:
                raise interp.InputError(f"unexpected input {name!r}")
            typed[name] = interp.value_from_json(raw, params[name])
        program = level.program
        trace = interp.exec_trace(
            program, typed,
            cassign_solver=lambda targets, phi, values:
                self.solver.cassign_model(program, targets, phi, values),
        )
        self.store.append(session_id, level.id, "trace",
                          {"inputs": dict(raw_inputs)})
        return trace

    def why_not(self, session_id: str, level: Level, text: str) -> tuple[State, State]:
        key = (session_id, level.id)
        lock = self._key_lock(key)
        token = _active_session.set(session_id)
        try:
            with lock:
                ls = self.state_for(session_id, level)
                expr = parse_expr(text, level.program.type_env)
                engine = self._engine(level)
                pair = engine.why_not_inductive(ls.invariants, expr)
                self.store.append(session_id, level.id, "whynot", {"expr": text})
                return pair
        finally:
            _active_session.reset(token)
            self._release(key)

    def level_state(self, session_id: str, level: Level) -> dict:
        ls = self.state_for(session_id, level)
        iinvs, pinvs = ls.invariant_lists()
        return {
            "inductive": iinvs,
            "potential": pinvs,
            "solved": ls.solved,
            "score": ls.score,
            "history": list(ls.history),
        }


def level_summary(level: Level) -> dict:
    return {"id": level.id, "title": level.title, "tutorial": level.tutorial}


def level_detail(level: Level) -> dict:
    p = level.program
    return {
        **level_summary(level),
        "source": level.source,
        "starterInputs": dict(level.starter_inputs),
        "unrollBound": level.unroll_bound,
        "guarantee": expr_to_text(p.post),
        "parameters": [name for name, _ in p.params],
        "variables": {name: ty.value for name, ty in p.type_env.items()},
    }


def create_app(config: Optional[ServiceConfig] = None,
               service: Optional[GameService] = None) -> FastAPI:
    app = FastAPI(title="sipgame", docs_url=None, redoc_url=None)
    svc = service or GameService(config)
    app.state.service = svc

    @app.exception_handler(QueueSaturatedError)
    async def saturated(request: Request, exc: QueueSaturatedError):
        return JSONResponse({"detail": "queue saturated"}, status_code=429)

    @app.get("/api/levels")
    def list_levels():
        return [level_summary(lv) for lv in svc.levels.values()]

    @app.get("/api/levels/{level_id}")
    def get_level(level_id: str):
        return level_detail(svc.level_or_404(level_id))

    @app.post("/api/sessions", status_code=201)
    def create_session():
        return {"sessionId": svc.create_session()}

    @app.get("/api/sessions/{sid}/levels/{level_id}/state")
    def get_state(sid: str, level_id: str):
        svc.session_or_404(sid)
        return svc.level_state(sid, svc.level_or_404(level_id))

    @app.post("/api/sessions/{sid}/levels/{level_id}/propose")
    def propose(sid: str, level_id: str, body: dict):
        svc.session_or_404(sid)
        level = svc.level_or_404(level_id)
        text = body.get("expr", "")
        try:
            return svc.propose(sid, level, text)
        except (SipSyntaxError, SipTypeError, ProgramStructureError) as exc:
            raise HTTPException(400, f"bad expression: {exc}")
        except DuplicateProposalError:
            raise HTTPException(409, "expression already proposed")

    @app.post("/api/sessions/{sid}/levels/{level_id}/trace")
    def trace(sid: str, level_id: str, body: dict):
        svc.session_or_404(sid)
        level = svc.level_or_404(level_id)
        try:
            result = svc.trace(sid, level, body.get("inputs", {}))
        except interp.InputError as exc:
            raise HTTPException(400, str(exc))
        except interp.PreconditionError as exc:
            raise HTTPException(422, str(exc))
        except interp.IterationCapError as exc:
            raise HTTPException(422, f"trace truncated: {exc}")
        except interp.SipRuntimeError as exc:
            raise HTTPException(422, str(exc))
        return interp.trace_to_json(result)

    @app.post("/api/sessions/{sid}/levels/{level_id}/whynot")
    def whynot(sid: str, level_id: str, body: dict):
        svc.session_or_404(sid)
        level = svc.level_or_404(level_id)
        text = body.get("expr", "")
        try:
            before, after = svc.why_not(sid, level, text)
        except (SipSyntaxError, SipTypeError) as exc:
            raise HTTPException(400, f"bad expression: {exc}")
        except NotPotentialError:
            raise HTTPException(404, "not a potential invariant")
        except PromotableError:
            raise HTTPException(409, "expression is now promotable")
        except UnknownVerdictError as exc:
            raise HTTPException(503, f"solver could not answer: {exc}")
        return {"before": state_to_json(before), "after": state_to_json(after)}

    ui_dir = svc.config.ui_dir
    if ui_dir is not None and ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
