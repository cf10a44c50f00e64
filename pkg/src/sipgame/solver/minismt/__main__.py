"""SMT-LIB v2 read-eval loop over stdin/stdout.

Supports the command subset the game needs: set-option/set-logic/set-info,
declare-const, declare-fun (zero arity), assert, check-sat, get-model,
reset, echo and exit.  Answers are 'sat', 'unsat' or 'unknown'; models use
the standard (define-fun name () Sort value) shape.
"""

from __future__ import annotations

import sys

from . import core
from .sexpr import SExprError, balanced, parse_all, render_value


class Session:
    def __init__(self):
        self.reset()

    def reset(self):
        self.sorts: dict[str, str] = {}
        self.assertions: list = []
        self.timeout_ms: int | None = None
        self.seed = 0
        self.last_model: dict | None = None

    def handle(self, cmd, out) -> bool:
        """Process one command; returns False when the session should end."""
        if not isinstance(cmd, list) or not cmd:
            print("(error \"expected a command\")", file=out, flush=True)
            return True
        head = cmd[0]
        if head == "exit":
            return False
        if head == "reset":
            self.reset()
        elif head in ("set-logic", "set-info", "push", "pop"):
            pass
        elif head == "set-option":
            if len(cmd) >= 3 and cmd[1] == ":timeout":
                try:
                    self.timeout_ms = int(cmd[2])
                except ValueError:
                    pass
            if len(cmd) >= 3 and cmd[1] == ":random-seed":
                try:
                    self.seed = int(cmd[2])
                except ValueError:
                    pass
        elif head == "echo":
            print(cmd[1].strip('"') if len(cmd) > 1 else "", file=out, flush=True)
        elif head in ("declare-const", "declare-fun"):
            name = cmd[1]
            sort = cmd[-1]
            if not isinstance(name, str) or sort not in ("Bool", "Int", "Real"):
                print("(error \"bad declaration\")", file=out, flush=True)
                return True
            if head == "declare-fun" and cmd[2] != []:
                print("(error \"only zero-arity functions\")", file=out, flush=True)
                return True
            self.sorts[name] = sort
        elif head == "assert":
            try:
                self.assertions.append(core.build_term(cmd[1], self.sorts))
            except (core.UnsupportedTerm, IndexError) as exc:
                print(f"(error \"{exc}\")", file=out, flush=True)
        elif head == "check-sat":
            status, model = core.check(
                self.sorts, self.assertions, self.timeout_ms, self.seed
            )
            self.last_model = model
            print(status, file=out, flush=True)
        elif head == "get-model":
            if self.last_model is None:
                print("(error \"no model available\")", file=out, flush=True)
            else:
                parts = [
                    f"  (define-fun {name} () {self.sorts[name]} "
                    f"{render_value(self.last_model[name], self.sorts[name])})"
                    for name in sorted(self.last_model)
                ]
                print("(\n" + "\n".join(parts) + "\n)", file=out, flush=True)
        elif head == "get-info":
            print("(:name \"sipgame-smt\")", file=out, flush=True)
        else:
            print(f"(error \"unsupported command {head}\")", file=out, flush=True)
        return True


def main() -> int:
    session = Session()
    buffer = ""
    for line in sys.stdin:
        buffer += line
        if not balanced(buffer):
            continue
        text, buffer = buffer, ""
        try:
            commands = parse_all(text)
        except SExprError as exc:
            print(f"(error \"{exc}\")", flush=True)
            continue
        for cmd in commands:
            if not session.handle(cmd, sys.stdout):
                return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
