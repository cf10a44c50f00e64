"""Append-only per-session event log in a single SQLite file."""

from __future__ import annotations

import json
import sqlite3
import threading
import time
from pathlib import Path
from typing import Optional

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    id TEXT PRIMARY KEY,
    created REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS events (
    session_id TEXT NOT NULL,
    seq INTEGER NOT NULL,
    level_id TEXT,
    kind TEXT NOT NULL,
    payload TEXT NOT NULL,
    created REAL NOT NULL,
    PRIMARY KEY (session_id, seq)
);
"""


class EventStore:
    """Single-writer event log; reads are cheap, writes are serialized."""

    def __init__(self, path: Optional[Path] = None):
        self._path = str(path) if path is not None else ":memory:"
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(self._path, check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self):
        with self._lock:
            self._conn.close()

    def create_session(self, session_id: str):
        with self._lock:
            self._conn.execute(
                "INSERT INTO sessions (id, created) VALUES (?, ?)",
                (session_id, time.time()),
            )
            self._conn.commit()

    def session_exists(self, session_id: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM sessions WHERE id = ?", (session_id,)
            ).fetchone()
        return row is not None

    def append(self, session_id: str, level_id: Optional[str], kind: str,
               payload: dict) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT COALESCE(MAX(seq), -1) + 1 FROM events WHERE session_id = ?",
                (session_id,),
            ).fetchone()
            seq = row[0]
            self._conn.execute(
                "INSERT INTO events (session_id, seq, level_id, kind, payload, created)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (session_id, seq, level_id, kind, json.dumps(payload), time.time()),
            )
            self._conn.commit()
        return seq

    def events(self, session_id: str, level_id: Optional[str] = None,
               kind: Optional[str] = None) -> list[dict]:
        query = "SELECT seq, level_id, kind, payload FROM events WHERE session_id = ?"
        args: list = [session_id]
        if level_id is not None:
            query += " AND level_id = ?"
            args.append(level_id)
        if kind is not None:
            query += " AND kind = ?"
            args.append(kind)
        query += " ORDER BY seq"
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [
            {"seq": seq, "level_id": lid, "kind": k, **json.loads(payload)}
            for seq, lid, k, payload in rows
        ]
