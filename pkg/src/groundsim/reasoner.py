"""Bridges perception and knowledge: scene and KB translation into weighted
programs, polar/multiple-choice query answering, concept differences."""

from __future__ import annotations

from dataclasses import dataclass

from .logic import (
    Atom,
    Conjunction,
    Const,
    Prop,
    Ques,
    SkolemApp,
    attr_pred,
    canonicalize,
    cls_pred,
    cons_key,
    rel_pred,
)
from .memory import KBEntry
from .perception import SceneGraph, concept_diff  # re-exported  # noqa: F401
from .program import (
    BodyGroup,
    WeightedProgram,
    WeightedRule,
    ground,
    logit,
)
from .exact import MarginalTable, solve_exact

THETA_SURE = 0.5


class UnknownPredicateError(KeyError):
    pass


@dataclass(frozen=True)
class ReliabilityParams:
    """How far the agent trusts its symbolic knowledge."""

    u_d: float = 0.95  # deductive-violation penalty
    u_a: float = 0.95  # failure-to-explain penalty


def scene_to_program(sg: SceneGraph) -> WeightedProgram:
    """One soft fact logit(s): gamma(o...) per scored observation,
    deterministically ordered."""
    prog = WeightedProgram()
    for eid in sorted(sg.nodes):
        node = sg.nodes[eid]
        for name in sorted(node.class_scores):
            prog.add(
                WeightedRule(logit(node.class_scores[name]), Atom(cls_pred(name), (Const(eid),)))
            )
        for name in sorted(node.attr_scores):
            prog.add(
                WeightedRule(logit(node.attr_scores[name]), Atom(attr_pred(name), (Const(eid),)))
            )
    for (i, j) in sorted(sg.edges):
        for name in sorted(sg.edges[(i, j)]):
            prog.add(
                WeightedRule(
                    logit(sg.edges[(i, j)][name]),
                    Atom(rel_pred(name), (Const(i), Const(j))),
                )
            )
    return prog


def _cons_unit(prop: Prop):
    """Consequent as a single body unit: a bare atom, or a BodyGroup when the
    conjunction is skolemized or compound."""
    atoms = prop.cons.atoms
    if len(atoms) == 1 and not any(
        isinstance(t, SkolemApp) for t in atoms[0].args
    ):
        return atoms[0]
    return BodyGroup(atoms)


def _ante_unit(prop: Prop):
    atoms = prop.ante.atoms
    if len(atoms) == 1:
        return atoms[0]
    return BodyGroup(atoms)


def kb_to_program(kb, u: ReliabilityParams = ReliabilityParams()) -> WeightedProgram:
    """Lifted penalty constraints per the KB translation:

    - each entry: deductive constraint logit(U_d): :- Ante, not Cons
      (negated consequents cancel the default negation: :- Ante, Cons);
    - each group of entries sharing an identical positive consequent: one
      abductive constraint logit(U_a): :- Cons, not Ante_1, ..., not Ante_n.
      Negated consequents generate no abductive constraint.
    """
    props = []
    for entry in kb:
        prop = entry.prop if isinstance(entry, KBEntry) else entry
        if not prop.generic:
            raise ValueError("KB translation expects generic props")
        props.append(canonicalize(prop))

    prog = WeightedProgram()
    w_d, w_a = logit(u.u_d), logit(u.u_a)
    for prop in props:
        cons = _cons_unit(prop)
        if prop.cons_negated:
            prog.add(WeightedRule(w_d, None, prop.ante.atoms + (cons,), ()))
        else:
            prog.add(WeightedRule(w_d, None, prop.ante.atoms, (cons,)))

    groups: dict = {}
    for prop in props:
        if prop.cons_negated:
            continue
        groups.setdefault(cons_key(prop), []).append(prop)
    for key in groups:
        members = groups[key]
        cons = _cons_unit(members[0])
        antes = tuple(_ante_unit(p) for p in members)
        prog.add(WeightedRule(w_a, None, (cons,), antes))
    return prog


def build_program(sg: SceneGraph, kb, u: ReliabilityParams = ReliabilityParams()) -> WeightedProgram:
    """Ground Pi_O union Pi_K for the given scene."""
    objects = sorted(sg.object_parts)
    return scene_to_program(sg) + ground(kb_to_program(kb, u), objects, sg.object_parts)


def _restrict(prog: WeightedProgram, queries: list[Atom]) -> WeightedProgram:
    """Keep only rules in the connected components of the query atoms."""
    parent: dict[Atom, Atom] = {}

    def find(a):
        while parent[a] is not a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rule_atoms = []
    for r in prog:
        atoms = ([r.head] if r.head is not None else []) + list(r.pos_body) + list(r.neg_body)
        rule_atoms.append(atoms)
        for a in atoms:
            parent.setdefault(a, a)
        for a in atoms[1:]:
            ra, rb = find(atoms[0]), find(a)
            if ra is not rb:
                parent[ra] = rb

    missing = [q for q in queries if q not in parent]
    if missing:
        raise UnknownPredicateError(f"atoms unknown to the program: {missing}")
    roots = {find(q) for q in queries}
    out = WeightedProgram()
    for r, atoms in zip(prog, rule_atoms):
        if find(atoms[0]) in roots:
            out.add(r)
    return out


def marginals_for(
    sg: SceneGraph, kb, u: ReliabilityParams, queries: list[Atom]
) -> MarginalTable:
    prog = build_program(sg, kb, u)
    return solve_exact(_restrict(prog, queries))


def answer_polar(sg: SceneGraph, kb, u: ReliabilityParams, ques: Ques) -> float:
    """Marginal probability of a polar question's atom; negated queries
    return the complement."""
    if ques.kind != "polar":
        raise ValueError("answer_polar expects a polar question")
    prop = ques.prop
    if len(prop.cons) != 1 or len(prop.ante) != 0:
        raise ValueError("polar queries are single ground atoms")
    atom = prop.cons.atoms[0]
    m = marginals_for(sg, kb, u, [atom])[atom]
    return 1.0 - m if prop.cons_negated else m


def classify(
    sg: SceneGraph,
    kb,
    u: ReliabilityParams,
    candidates: list[str],
    obj: str,
    theta_sure: float = THETA_SURE,
) -> str | None:
    """Argmax class marginal over candidates, or None (not sure) when no
    candidate clears theta. Ties break lexicographically."""
    if not candidates:
        raise ValueError("candidates must be non-empty")
    atoms = {c: Atom(cls_pred(c), (Const(obj),)) for c in sorted(candidates)}
    table = marginals_for(sg, kb, u, list(atoms.values()))
    best, best_p = None, theta_sure
    for name in sorted(atoms):
        p = table[atoms[name]]
        if p > best_p:
            best, best_p = name, p
    return best


def polar_ques(pred_name: str, obj: str, kind: str = "class", negated: bool = False) -> Ques:
    """Convenience constructor for '?p(o)' questions."""
    pred = cls_pred(pred_name) if kind == "class" else attr_pred(pred_name)
    prop = Prop(
        ante=Conjunction(()),
        cons=Conjunction((Atom(pred, (Const(obj),)),)),
        cons_negated=negated,
    )
    return Ques("polar", prop=prop)
