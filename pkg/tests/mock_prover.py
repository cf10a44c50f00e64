"""Scripted stand-in prover for transport tests.

Behavior is selected by argv[1]:
  unsat       answer unsat to every check-sat
  sat-n0      answer sat with the model n = 0
  sat-bad     answer sat, then emit an unreadable model
  garbage     answer check-sat with nonsense
  crash       exit hard on the first check-sat
  crash-once  crash the first process, behave like unsat afterwards
              (coordination through the marker file in argv[2])
"""

import os
import sys

mode = sys.argv[1] if len(sys.argv) > 1 else "unsat"
marker = sys.argv[2] if len(sys.argv) > 2 else None

for line in sys.stdin:
    if "(exit)" in line:
        sys.exit(0)
    if "(get-model)" in line:
        if mode == "sat-n0":
            print("((define-fun n () Int 0))", flush=True)
        else:
            print("((define-fun n () Int banana))", flush=True)
        continue
    if "(check-sat)" not in line:
        continue
    if mode == "crash":
        sys.exit(3)
    if mode == "crash-once":
        if marker and not os.path.exists(marker):
            open(marker, "w").close()
            sys.exit(3)
        print("unsat", flush=True)
    elif mode == "garbage":
        print("maybe-so", flush=True)
    elif mode in ("sat-n0", "sat-bad"):
        print("sat", flush=True)
    else:
        print("unsat", flush=True)
