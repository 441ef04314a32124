"""Weighted normal-logic programs: rule representation, text format, grounding.

Supported fragment (all the reasoner ever constructs): weighted ground facts,
HARD definite auxiliary rules, and weighted/HARD integrity constraints. A
consequent with skolem terms is carried through lifted rules as a BodyGroup
and compiled at grounding time into one auxiliary atom plus HARD definite
rules, one per candidate part.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .logic import (
    Atom,
    Conjunction,
    Const,
    PredicateSym,
    SkolemApp,
    Var,
    attr_pred,
    cls_pred,
    rel_pred,
    subst_atom,
)

HARD = None  # weight sentinel
LOGIT_EPS = 1e-6


class ProgramError(ValueError):
    pass


class NoAdmissibleWorldError(ProgramError):
    """The HARD core of the program admits no world."""


class EnumerationBoundError(ProgramError):
    """Too many base atoms for exact enumeration; caller may fall back to BP."""


def logit(s: float) -> float:
    """ln(s / (1-s)), with s clamped to [eps, 1-eps]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"probability out of range: {s}")
    s = min(max(s, LOGIT_EPS), 1.0 - LOGIT_EPS)
    return math.log(s / (1.0 - s))


def sigmoid(w: float) -> float:
    if w >= 0:
        return 1.0 / (1.0 + math.exp(-w))
    e = math.exp(w)
    return e / (1.0 + e)


@dataclass(frozen=True)
class BodyGroup:
    """A skolemized conjunction used as a single body unit of a lifted rule.

    Compiled during grounding into aux_<preds>(o) plus HARD definite rules
    ranging over the object's candidate parts.
    """

    atoms: tuple[Atom, ...]

    @property
    def aux_name(self) -> str:
        return "aux_" + "_".join(sorted(a.pred.name for a in self.atoms))

    def skolem_fns(self):
        fns = []
        for a in self.atoms:
            for t in a.args:
                if isinstance(t, SkolemApp) and t.fn not in fns:
                    fns.append(t.fn)
        return fns


BodyItem = Atom | BodyGroup


@dataclass(frozen=True)
class WeightedRule:
    weight: float | None  # None = HARD
    head: Atom | None  # None = integrity constraint
    pos_body: tuple[BodyItem, ...] = ()
    neg_body: tuple[BodyItem, ...] = ()

    def is_fact(self) -> bool:
        return self.head is not None and not self.pos_body and not self.neg_body

    def is_constraint(self) -> bool:
        return self.head is None

    def is_definite(self) -> bool:
        return self.head is not None and (self.pos_body or self.neg_body)


@dataclass
class WeightedProgram:
    rules: list[WeightedRule] = field(default_factory=list)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __add__(self, other: "WeightedProgram") -> "WeightedProgram":
        return WeightedProgram(self.rules + other.rules)

    def add(self, rule: WeightedRule):
        self.rules.append(rule)

    def atom_universe(self) -> set[Atom]:
        atoms: set[Atom] = set()
        for r in self.rules:
            if r.head is not None:
                atoms.add(r.head)
            for item in (*r.pos_body, *r.neg_body):
                if isinstance(item, Atom):
                    atoms.add(item)
                else:
                    atoms.update(item.atoms)
        return atoms

    def is_ground(self) -> bool:
        return all(
            isinstance(it, Atom) and it.is_ground()
            for r in self.rules
            for it in ((r.head,) if r.head else ()) + r.pos_body + r.neg_body
        )


# ---------------------------------------------------------------------------
# text format: `<weight>| <head> :- <posbody>, not <negbody>.`  (#hard for HARD)


def _atom_str(a: Atom) -> str:
    args = ",".join(str(t) for t in a.args)
    return f"{a.pred.name}({args})"


def _item_str(item: BodyItem, negated: bool) -> str:
    if isinstance(item, BodyGroup):
        inner = " & ".join(_atom_str(a) for a in item.atoms)
        s = "{" + inner + "}"
    else:
        s = _atom_str(item)
    return f"not {s}" if negated else s


def rule_to_text(r: WeightedRule) -> str:
    w = "#hard" if r.weight is HARD else f"{r.weight:.6f}"
    body = [_item_str(it, False) for it in r.pos_body]
    body += [_item_str(it, True) for it in r.neg_body]
    head = _atom_str(r.head) if r.head is not None else ""
    if body:
        sep = " " if head else ""
        return f"{w}| {head}{sep}:- {', '.join(body)}."
    return f"{w}| {head}."


def program_to_text(p: WeightedProgram) -> str:
    return "\n".join(rule_to_text(r) for r in p.rules) + ("\n" if p.rules else "")


_ATOM_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\(([^()]*)\))?$")


def _parse_term(tok: str):
    tok = tok.strip()
    if tok and tok[0].isupper():
        return Var(tok)
    return Const(tok)


def parse_atom(s: str, kinds: dict[str, PredicateSym] | None = None) -> Atom:
    m = _ATOM_RE.match(s.strip())
    if not m:
        raise ProgramError(f"cannot parse atom: {s!r}")
    name, argstr = m.group(1), m.group(2)
    args = tuple(_parse_term(t) for t in argstr.split(",")) if argstr else ()
    if not args:
        raise ProgramError(f"propositional atoms not supported: {s!r}")
    if kinds and name in kinds:
        pred = kinds[name]
    elif len(args) == 2:
        pred = rel_pred(name)
    else:
        pred = cls_pred(name)
    return Atom(pred, args)


def parse_program(text: str, kinds: dict[str, PredicateSym] | None = None) -> WeightedProgram:
    """Parse the one-rule-per-line text format (ground or simple lifted rules;
    body groups are not parsed back)."""
    prog = WeightedProgram()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        try:
            wstr, rest = line.split("|", 1)
        except ValueError:
            raise ProgramError(f"line {lineno}: missing weight separator")
        weight = HARD if wstr.strip() == "#hard" else float(wstr)
        rest = rest.strip()
        if not rest.endswith("."):
            raise ProgramError(f"line {lineno}: missing terminating period")
        rest = rest[:-1].strip()
        if ":-" in rest:
            head_s, body_s = rest.split(":-", 1)
            head = parse_atom(head_s, kinds) if head_s.strip() else None
            pos, neg = [], []
            for part in _split_body(body_s):
                part = part.strip()
                if part.startswith("not "):
                    neg.append(parse_atom(part[4:], kinds))
                else:
                    pos.append(parse_atom(part, kinds))
            prog.add(WeightedRule(weight, head, tuple(pos), tuple(neg)))
        else:
            prog.add(WeightedRule(weight, parse_atom(rest, kinds)))
    return prog


def _split_body(s: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return parts


# ---------------------------------------------------------------------------
# grounding


def _rule_vars(r: WeightedRule) -> set[str]:
    out: set[str] = set()
    items = list(r.pos_body) + list(r.neg_body) + ([r.head] if r.head else [])
    for item in items:
        atoms = item.atoms if isinstance(item, BodyGroup) else (item,)
        for a in atoms:
            for t in a.args:
                if isinstance(t, Var):
                    out.add(t.name)
                elif isinstance(t, SkolemApp) and isinstance(t.arg, Var):
                    out.add(t.arg.name)
    return out


def ground(
    program: WeightedProgram,
    entities: list[str],
    part_candidates: dict[str, list[str]] | None = None,
) -> WeightedProgram:
    """Instantiate lifted rules per entity and compile BodyGroups into aux
    atoms backed by HARD definite rules over candidate parts."""
    part_candidates = part_candidates or {}
    out = WeightedProgram()
    aux_rules_emitted: set[tuple] = set()

    for rule in program:
        vs = _rule_vars(rule)
        if not vs:
            out.add(_compile_groups(rule, None, part_candidates, out, aux_rules_emitted))
            continue
        if len(vs) > 1:
            raise ProgramError(f"rule has multiple free variables: {sorted(vs)}")
        (v,) = vs
        for ent in sorted(entities):
            binding = {v: Const(ent)}
            g = _bind_rule(rule, binding)
            out.add(_compile_groups(g, ent, part_candidates, out, aux_rules_emitted))
    return out


def _bind_rule(rule: WeightedRule, binding) -> WeightedRule:
    def bind_item(item: BodyItem) -> BodyItem:
        if isinstance(item, BodyGroup):
            return BodyGroup(tuple(subst_atom(a, binding) for a in item.atoms))
        return subst_atom(item, binding)

    return WeightedRule(
        rule.weight,
        subst_atom(rule.head, binding) if rule.head is not None else None,
        tuple(bind_item(i) for i in rule.pos_body),
        tuple(bind_item(i) for i in rule.neg_body),
    )


def _compile_groups(rule, ent, part_candidates, out, emitted) -> WeightedRule:
    def compile_item(item: BodyItem) -> Atom:
        if isinstance(item, Atom):
            if not item.is_ground():
                raise ProgramError(f"unrestricted variable in {_atom_str(item)}")
            return item
        if ent is None:
            raise ProgramError("body group outside any entity binding")
        aux = Atom(cls_pred(item.aux_name), (Const(ent),))
        fns = item.skolem_fns()
        if not fns:
            key = (aux, item.atoms)
            if key not in emitted:
                emitted.add(key)
                out.add(WeightedRule(HARD, aux, item.atoms, ()))
            return aux
        cands = part_candidates.get(ent, [])
        for combo in _combinations(cands, len(fns)):
            fn_binding = dict(zip(fns, combo))
            body = tuple(_resolve_skolems(a, fn_binding) for a in item.atoms)
            key = (aux, body)
            if key not in emitted:
                emitted.add(key)
                out.add(WeightedRule(HARD, aux, body, ()))
        return aux

    return WeightedRule(
        rule.weight,
        rule.head,
        tuple(compile_item(i) for i in rule.pos_body),
        tuple(compile_item(i) for i in rule.neg_body),
    )


def _combinations(cands: list[str], n: int):
    """Ordered n-tuples of distinct candidates (n is 1 in practice)."""
    if n == 0:
        return
    if n == 1:
        for c in cands:
            yield (c,)
        return
    for c in cands:
        for rest in _combinations([x for x in cands if x != c], n - 1):
            yield (c, *rest)


def _resolve_skolems(atom: Atom, fn_binding) -> Atom:
    args = []
    for t in atom.args:
        if isinstance(t, SkolemApp):
            args.append(Const(fn_binding[t.fn]))
        else:
            args.append(t)
    return Atom(atom.pred, tuple(args))
