"""Satisfiability core for quantifier-free integer/rational arithmetic.

The boolean layer enumerates cubes (with early pruning); each cube of
arithmetic atoms is decided by:

  * polynomial normalization and constant folding,
  * substitution of implied linear equalities (collapses most nonlinear
    hypotheses onto matching monomials),
  * abstraction of the remaining nonlinear monomials as fresh variables
    augmented with sound sign lemmas (squares are nonnegative; over the
    integers x**2 >= x and x**2 >= -x; products of nonnegatives are
    nonnegative),
  * the linear solver.

'unsat' is only reported when every cube is refuted by sound reasoning.
'sat' models are always re-verified against the original atoms with exact
arithmetic, falling back to a bounded concrete search; failto do either and
the answer degrades to 'unknown'.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from math import ceil, floor
from typing import Optional

from . import poly
from .linear import BudgetExceeded, LinCon, LinearSolver, ModelGap
from .sexpr import SExpr, is_numeral, parse_numeral

MAX_BRANCHES = 20000
FALLBACK_TRIES = 1500


class UnsupportedTerm(Exception):
    pass


# --------------------------------------------------------------------------
# Terms: ('var', name) | ('bool', b) | ('num', Fraction) | (op, arg, ...)
# --------------------------------------------------------------------------

_CMP_OPS = {"<", "<=", ">", ">=", "="}
_ARITH_OPS = {"+", "-", "*", "/"}


def build_term(sx: SExpr, sorts: dict[str, str]):
    if isinstance(sx, str):
        if sx == "true":
            return ("bool", True)
        if sx == "false":
            return ("bool", False)
        if is_numeral(sx):
            return ("num", parse_numeral(sx))
        if sx in sorts:
            return ("var", sx)
        raise UnsupportedTerm(f"unknown symbol {sx!r}")
    if not sx:
        raise UnsupportedTerm("empty application")
    head = sx[0]
    if not isinstance(head, str):
        raise UnsupportedTerm("higher-order application")
    args = [build_term(a, sorts) for a in sx[1:]]
    if head == "to_real":
        return args[0]
    if head == "-" and len(args) == 1:
        return ("neg", args[0])
    if head in ("and", "or", "not", "=>", "ite", "distinct", "+", "-", "*", "/",
                "<", "<=", ">", ">=", "="):
        return (head, *args)
    raise UnsupportedTerm(f"unsupported operator {head!r}")


def term_sort(t, sorts: dict[str, str]) -> str:
    op = t[0]
    if op == "var":
        return "Bool" if sorts.get(t[1]) == "Bool" else "Num"
    if op == "bool":
        return "Bool"
    if op == "num":
        return "Num"
    if op in ("and", "or", "not", "=>") or op in ("<", "<=", ">", ">="):
        return "Bool"
    if op in ("+", "-", "*", "/", "neg"):
        return "Num"
    if op == "ite":
        return term_sort(t[2], sorts)
    if op in ("=", "distinct"):
        return "Bool"
    raise UnsupportedTerm(op)


# --------------------------------------------------------------------------
# Normalization to and/or trees over literals
# --------------------------------------------------------------------------
# Literals: ("atom", rel, term_l, term_r)  rel in <,<=,>,>=,=,!=
#           ("bvar", name, polarity)

def _nnf(t, positive: bool, sorts):
    op = t[0]
    if op == "bool":
        return ("true",) if t[1] == positive else ("false",)
    if op == "var":
        return ("bvar", t[1], positive)
    if op == "not":
        return _nnf(t[1], not positive, sorts)
    if op == "=>":
        left, right = t[1], t[2]
        if positive:
            return ("or", _nnf(left, False, sorts), _nnf(right, True, sorts))
        return ("and", _nnf(left, True, sorts), _nnf(right, False, sorts))
    if op in ("and", "or"):
        out = "and" if (op == "and") == positive else "or"
        return (out, *[_nnf(a, positive, sorts) for a in t[1:]])
    if op == "ite":
        cond, a, b = t[1], t[2], t[3]
        return ("or",
                ("and", _nnf(cond, True, sorts), _nnf(a, positive, sorts)),
                ("and", _nnf(cond, False, sorts), _nnf(b, positive, sorts)))
    if op in ("=", "distinct"):
        args = t[1:]
        if term_sort(args[0], sorts) == "Bool":
            if len(args) != 2:
                raise UnsupportedTerm("n-ary boolean (dis)equality")
            a, b = args
            same = (op == "=") == positive
            if same:
                return ("or", ("and", _nnf(a, True, sorts), _nnf(b, True, sorts)),
                        ("and", _nnf(a, False, sorts), _nnf(b, False, sorts)))
            return ("or", ("and", _nnf(a, True, sorts), _nnf(b, False, sorts)),
                    ("and", _nnf(a, False, sorts), _nnf(b, True, sorts)))
        if len(args) != 2:
            pairs = [("=", args[i], args[j]) for i in range(len(args))
                     for j in range(i + 1, len(args))]
            joined = ("and", *pairs) if op == "=" else ("and", *[("not", p) for p in pairs])
            return _nnf(joined, positive, sorts)
        rel = "=" if (op == "=") == positive else "!="
        return ("atom", rel, args[0], args[1])
    if op in ("<", "<=", ">", ">="):
        if positive:
            return ("atom", op, t[1], t[2])
        flipped = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}[op]
        return ("atom", flipped, t[1], t[2])
    raise UnsupportedTerm(f"boolean context: {op}")


def _find_ite(t):
    if t[0] == "ite":
        return t
    if t[0] in ("var", "bool", "num"):
        return None
    for a in t[1:]:
        found = _find_ite(a)
        if found is not None:
            return found
    return None


def _subst_ite_term(t, cond, take_then: bool):
    """Resolve every conditional term whose condition equals `cond`."""
    if t[0] in ("var", "bool", "num"):
        return t
    if t[0] == "ite" and t[1] == cond:
        return _subst_ite_term(t[2] if take_then else t[3], cond, take_then)
    return (t[0], *[_subst_ite_term(a, cond, take_then) for a in t[1:]])


def _subst_ite_tree(node, cond, take_then: bool):
    """Same resolution over an NNF formula tree (atoms hold raw terms)."""
    op = node[0]
    if op == "atom":
        return ("atom", node[1],
                _subst_ite_term(node[2], cond, take_then),
                _subst_ite_term(node[3], cond, take_then))
    if op in ("and", "or"):
        return (op, *[_subst_ite_tree(a, cond, take_then) for a in node[1:]])
    return node


def _term_to_poly(t) -> poly.Poly:
    op = t[0]
    if op == "num":
        return poly.const(t[1])
    if op == "var":
        return poly.var(t[1])
    if op == "neg":
        return poly.neg(_term_to_poly(t[1]))
    if op == "+":
        out: poly.Poly = {}
        for a in t[1:]:
            out = poly.add(out, _term_to_poly(a))
        return out
    if op == "-":
        out = _term_to_poly(t[1])
        for a in t[2:]:
            out = poly.sub(out, _term_to_poly(a))
        return out
    if op == "*":
        out = poly.const(1)
        for a in t[1:]:
            out = poly.mul(out, _term_to_poly(a))
        return out
    if op == "/":
        left = _term_to_poly(t[1])
        right = _term_to_poly(t[2])
        c = poly.constant_value(right)
        if c is None or c == 0:
            raise UnsupportedTerm("non-constant division")
        return poly.scale(left, Fraction(1, 1) / c)
    raise UnsupportedTerm(f"arithmetic context: {op}")


# --------------------------------------------------------------------------
# Cube decision
# --------------------------------------------------------------------------

class _Cube:
    """Conjunction of polynomial atoms (rel in 'eq','le','lt','ne')."""

    def __init__(self):
        self.atoms: list[tuple[str, poly.Poly]] = []  # rel, p  meaning p REL 0

    def add_atom(self, rel: str, lhs, rhs) -> Optional[str]:
        p = poly.sub(_term_to_poly(lhs), _term_to_poly(rhs))
        mapping = {
            "<": ("lt", p), "<=": ("le", p),
            ">": ("lt", poly.neg(p)), ">=": ("le", poly.neg(p)),
            "=": ("eq", p), "!=": ("ne", p),
        }
        nrel, np = mapping[rel]
        c = poly.constant_value(np)
        if c is not None:
            holds = {"eq": c == 0, "ne": c != 0, "le": c <= 0, "lt": c < 0}[nrel]
            return None if holds else "conflict"
        self.atoms.append((nrel, np))
        return None


def _implied_nonneg_vars(atoms) -> set[str]:
    out = set()
    for rel, p in atoms:
        if rel not in ("le", "lt", "eq"):
            continue
        lin = {m for m in p if m != poly.CONST}
        if len(lin) != 1:
            continue
        (m,) = lin
        if poly.degree(m) != 1:
            continue
        (v, _), = m
        coeff = p[m]
        const = p.get(poly.CONST, Fraction(0))
        # coeff*v + const <= 0 with coeff < 0  ->  v >= const/-coeff
        if rel in ("le", "lt") and coeff < 0 and const / (-coeff) >= 0:
            out.add(v)
        if rel == "eq" and -const / coeff >= 0:
            out.add(v)
    return out


def _decide_cube(cube: _Cube, sorts: dict[str, str], deadline: float,
                 rng: random.Random):
    """-> ('unsat', None) | ('sat', model) | ('unknown', None)"""
    original = list(cube.atoms)
    atoms = list(cube.atoms)

    # 1. disequality splitting happened upstream; atoms here are eq/le/lt
    # 2. derive equalities from complementary inequality pairs
    seen: set[tuple] = set()
    extra_eqs = []
    for rel, p in atoms:
        if rel != "le":
            continue
        key = poly.primitive_signed(p)
        if poly.primitive_signed(poly.neg(p)) in seen and key not in seen:
            extra_eqs.append(("eq", p))
        seen.add(key)
    atoms.extend(extra_eqs)

    # 3. substitute linear unit-coefficient equalities into everything
    subs: list[tuple[str, poly.Poly]] = []
    for _ in range(40):
        if time.monotonic() > deadline:
            return "unknown", None
        picked = None
        for idx, (rel, p) in enumerate(atoms):
            if rel != "eq":
                continue
            prim = dict(poly.primitive_form(p))
            for m, c in prim.items():
                if poly.degree(m) != 1:
                    continue
                (v, _), = m
                occurs_elsewhere = any(
                    any(vv == v for vv, _ in mm) for mm in prim if mm != m
                )
                if occurs_elsewhere:
                    continue
                if sorts.get(v) != "Real" and abs(c) != 1:
                    continue
                # v = -(rest)/c
                rest = {mm: Fraction(cc) for mm, cc in prim.items() if mm != m}
                replacement = poly.scale(rest, Fraction(-1, c))
                picked = (idx, v, replacement)
                break
            if picked:
                break
        if not picked:
            break
        idx, v, replacement = picked
        subs.append((v, replacement))
        new_atoms = []
        for j, (rel, p) in enumerate(atoms):
            if j == idx:
                continue
            new_atoms.append((rel, poly.substitute(p, v, replacement)))
        atoms = new_atoms

    # 4. constant folding after substitution
    pending = []
    for rel, p in atoms:
        c = poly.constant_value(p)
        if c is None:
            pending.append((rel, p))
            continue
        holds = {"eq": c == 0, "le": c <= 0, "lt": c < 0}[rel]
        if not holds:
            return "unsat", None
    atoms = pending

    # 5. abstract nonlinear monomials
    nonneg = _implied_nonneg_vars(atoms)
    mono_names: dict[poly.Monomial, str] = {}
    lemmas: list[tuple[str, poly.Poly]] = []

    def abstract(p: poly.Poly) -> poly.Poly:
        out: poly.Poly = {}
        for m, c in p.items():
            if poly.degree(m) <= 1:
                out = poly.add(out, {m: c})
                continue
            if m not in mono_names:
                name = f"_m{len(mono_names)}"
                mono_names[m] = name
                _monomial_lemmas(m, name, sorts, nonneg, lemmas)
            out = poly.add(out, {((mono_names[m], 1),): c})
        return out

    linear_atoms = [(rel, abstract(p)) for rel, p in atoms]
    linear_atoms.extend(lemmas)

    int_vars = {v for v, s in sorts.items() if s in ("Int",)}
    for m, name in mono_names.items():
        if all(sorts.get(v) == "Int" for v, _ in m):
            int_vars.add(name)

    cons = []
    for rel, p in linear_atoms:
        coeffs, const = poly.to_linear(p)
        cons.append(LinCon(coeffs, const, rel))

    try:
        solver = LinearSolver(cons, int_vars, deadline)
        status, lin_model = solver.solve()
    except BudgetExceeded:
        return "unknown", None
    except ModelGap:
        status, lin_model = "gap", None

    if status == "unsat":
        return "unsat", None

    # 6. candidate model: undo substitutions, verify against original atoms
    candidate = None
    if status == "sat" and lin_model is not None:
        candidate = {v: lin_model.get(v, Fraction(0)) for v in sorts}
        for v, replacement in reversed(subs):
            candidate[v] = poly.evaluate(replacement, candidate)
        if _verify(original, candidate, sorts):
            return "sat", candidate

    # 7. the abstraction was too coarse: enumerate small values for the
    # nonlinear base variables, leaving exact linear residual systems
    model = _enumerate_bases(atoms, mono_names, subs, original, sorts,
                             int_vars, deadline)
    if model is not None:
        return "sat", model

    # 8. bounded concrete search over the original atoms
    model = _fallback_search(original, sorts, deadline, rng, hint=candidate)
    if model is not None:
        return "sat", model
    return "unknown", None


def _enumerate_bases(atoms, mono_names, subs, original, sorts, int_vars,
                     deadline):
    base_vars = sorted({v for m in mono_names for v, _ in m})
    if not 1 <= len(base_vars) <= 2:
        return None
    if not all(sorts.get(v) == "Int" for v in base_vars):
        return None
    values = sorted((Fraction(k) for k in range(-12, 13)), key=abs)
    if len(base_vars) == 1:
        combos = [(a,) for a in values]
    else:
        combos = [(a, b) for a in values for b in values][:420]
    for combo in combos:
        if time.monotonic() > deadline:
            return None
        pinned = []
        conflict = False
        for rel, p in atoms:
            q = p
            for v, val in zip(base_vars, combo):
                q = poly.substitute(q, v, poly.const(val))
            c = poly.constant_value(q)
            if c is not None:
                holds = {"eq": c == 0, "le": c <= 0, "lt": c < 0}[rel]
                if not holds:
                    conflict = True
                    break
                continue
            if not poly.is_linear(q):
                conflict = True
                break
            coeffs, const = poly.to_linear(q)
            pinned.append(LinCon(coeffs, const, rel))
        if conflict:
            continue
        try:
            status, lin_model = LinearSolver(pinned, set(int_vars), deadline).solve()
        except (BudgetExceeded, ModelGap):
            continue
        if status != "sat" or lin_model is None:
            continue
        model = {v: lin_model.get(v, Fraction(0)) for v in sorts}
        for v, val in zip(base_vars, combo):
            model[v] = val
        for v, replacement in reversed(subs):
            model[v] = poly.evaluate(replacement, model)
        if _verify(original, model, sorts):
            return model
    return None


def _monomial_lemmas(m: poly.Monomial, name: str, sorts, nonneg, lemmas):
    u = poly.var(name)
    if all(e % 2 == 0 for _, e in m):
        lemmas.append(("le", poly.neg(u)))  # u >= 0
    elif all(v in nonneg for v, _ in m):
        lemmas.append(("le", poly.neg(u)))
    if len(m) == 1 and m[0][1] == 2 and sorts.get(m[0][0]) == "Int":
        x = poly.var(m[0][0])
        lemmas.append(("le", poly.sub(x, u)))        # u >= x
        lemmas.append(("le", poly.sub(poly.neg(x), u)))  # u >= -x


def _verify(atoms, model, sorts) -> bool:
    for v, s in sorts.items():
        if s == "Int" and Fraction(model[v]).denominator != 1:
            return False
    for rel, p in atoms:
        val = poly.evaluate(p, model)
        ok = {"eq": val == 0, "ne": val != 0, "le": val <= 0, "lt": val < 0}[rel]
        if not ok:
            return False
    return True


def _fallback_search(atoms, sorts, deadline, rng, hint=None):
    names = sorted({v for _, p in atoms for v in poly.poly_vars(p)})
    if not names:
        return {v: Fraction(0) for v in sorts}
    candidates: dict[str, list[Fraction]] = {}
    smalls = [Fraction(k) for k in
              (0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5, 9, 16, 25, 10, -10)]
    full_hint = dict(hint or {})
    for v in names:
        opts = list(smalls)
        h = full_hint.get(v)
        if h is not None:
            for candidate in (h, Fraction(floor(h)), Fraction(ceil(h))):
                if candidate not in opts:
                    opts.insert(0, candidate)
        if sorts.get(v) == "Real":
            opts.extend([Fraction(1, 2), Fraction(-1, 2), Fraction(3, 2)])
        if sorts.get(v) == "Int":
            opts = [o for o in opts if o.denominator == 1]
        candidates[v] = opts

    # systematic pass over small tuples first, then random draws
    tries = 0
    base = {v: candidates[v][0] for v in names}
    stack = [(0, base)]
    while stack and tries < FALLBACK_TRIES:
        if time.monotonic() > deadline:
            return None
        depth, assignment = stack.pop()
        tries += 1
        if _verify(atoms, {**{v: Fraction(0) for v in sorts}, **assignment}, sorts):
            return {**{v: Fraction(0) for v in sorts}, **assignment}
        if depth < len(names):
            v = names[depth]
            for opt in reversed(candidates[v][:7]):
                nxt = dict(assignment)
                nxt[v] = opt
                stack.append((depth + 1, nxt))
    while tries < FALLBACK_TRIES:
        if time.monotonic() > deadline:
            return None
        tries += 1
        assignment = {}
        for v in names:
            if rng.random() < 0.5:
                assignment[v] = candidates[v][rng.randrange(len(candidates[v]))]
            elif sorts.get(v) == "Real":
                assignment[v] = Fraction(rng.randint(-40, 40), rng.randint(1, 8))
            else:
                assignment[v] = Fraction(rng.randint(-60, 60))
        if _verify(atoms, {**{v: Fraction(0) for v in sorts}, **assignment}, sorts):
            return {**{v: Fraction(0) for v in sorts}, **assignment}
    return None


# --------------------------------------------------------------------------
# Search over the boolean structure
# --------------------------------------------------------------------------

class _Search:
    def __init__(self, sorts, deadline, rng):
        self.sorts = sorts
        self.deadline = deadline
        self.rng = rng
        self.branches = 0
        self.saw_unknown = False

    def run(self, work: list, cube: _Cube, bools: dict[str, bool], defer: list):
        """-> ('sat', model) | None (this branch refuted or unknown)."""
        self.branches += 1
        if self.branches > MAX_BRANCHES or time.monotonic() > self.deadline:
            self.saw_unknown = True
            return None
        work = list(work)
        defer = list(defer)
        branch_node = None
        while work:
            node = work.pop()
            op = node[0]
            if op == "true":
                continue
            if op == "false":
                return None
            if op == "and":
                work.extend(node[1:])
            elif op == "bvar":
                name, pol = node[1], node[2]
                if bools.get(name, pol) != pol:
                    return None
                if name not in bools:
                    bools = dict(bools)
                    bools[name] = pol
            elif op == "atom":
                ite = _find_ite(node[2]) or _find_ite(node[3])
                if ite is not None:
                    # branch on the condition once, resolving every
                    # conditional that shares it throughout the problem
                    cond = ite[1]
                    rest = work + [node] + defer
                    for take in (True, False):
                        arm = ("and", _nnf(cond, take, self.sorts),
                               *[_subst_ite_tree(x, cond, take) for x in rest])
                        result = self.run([arm], cube, bools, [])
                        if result is not None:
                            return result
                    return None
                if node[1] == "!=":
                    defer.append(node)
                    continue
                cube2 = _Cube()
                cube2.atoms = list(cube.atoms)
                try:
                    conflict = cube2.add_atom(node[1], node[2], node[3])
                except UnsupportedTerm:
                    self.saw_unknown = True
                    return None
                if conflict:
                    return None
                cube = cube2
            elif op == "or":
                branch_node = node
                break
            else:
                self.saw_unknown = True
                return None

        if branch_node is not None:
            for arm in branch_node[1:]:
                result = self.run(work + [arm], cube, bools, defer)
                if result is not None:
                    return result
            return None

        if defer:
            node = defer.pop()
            lt = ("atom", "<", node[2], node[3])
            gt = ("atom", ">", node[2], node[3])
            for arm in (lt, gt):
                result = self.run([arm], cube, bools, defer)
                if result is not None:
                    return result
            return None

        status, model = _decide_cube(cube, self.sorts, self.deadline, self.rng)
        if status == "sat":
            full = {v: model.get(v, Fraction(0)) for v in self.sorts}
            out = dict(full)
            for b, val in bools.items():
                out[b] = val
            return "sat", out
        if status == "unknown":
            self.saw_unknown = True
        return None


def check(sorts: dict[str, str], assertions: list, timeout_ms: Optional[int],
          seed: int = 0):
    """-> ('sat', model) | ('unsat', None) | ('unknown', None)

    `sorts` maps constants to 'Bool' | 'Int' | 'Real'; assertions are built
    terms.  A model maps every constant to bool or Fraction.
    """
    budget = (timeout_ms if timeout_ms is not None else 60_000) / 1000.0
    deadline = time.monotonic() + budget
    if budget <= 0:
        return "unknown", None
    try:
        trees = [_nnf(a, True, sorts) for a in assertions]
    except UnsupportedTerm:
        return "unknown", None
    rng = random.Random(seed)
    search = _Search(sorts, deadline, rng)
    result = search.run(trees, _Cube(), {}, [])
    if result is not None:
        status, model = result
        typed = {}
        for v, s in sorts.items():
            if s == "Bool":
                typed[v] = bool(model.get(v, False))
            else:
                typed[v] = Fraction(model.get(v, Fraction(0)))
        return "sat", typed
    if search.saw_unknown:
        return "unknown", None
    return "unsat", None
