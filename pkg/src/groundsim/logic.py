"""First-order fragment for dialogue propositions and questions.

Atoms range over object classes, attributes and binary relations; generic
statements are antecedent => consequent propositions with an optional
negation flag on the whole consequent conjunction. Part descriptions such
as "brandy glasses have short stems" are stored in skolemized form:
cls(O) => have(O, f(O)), short(f(O)), stem(f(O)).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

CLASS = "class"
ATTRIBUTE = "attribute"
RELATION = "relation"

_CANON_VARS = "OPQRSTUVWXYZ"
_SKOLEM_LETTERS = "fghijk"


@dataclass(frozen=True)
class PredicateSym:
    name: str
    arity: int = 1
    kind: str = CLASS

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"arity must be >= 1: {self.name}")
        if self.kind == RELATION and self.arity != 2:
            raise ValueError(f"relation predicate {self.name} must be binary")


def cls_pred(name: str) -> PredicateSym:
    return PredicateSym(name, 1, CLASS)


def attr_pred(name: str) -> PredicateSym:
    return PredicateSym(name, 1, ATTRIBUTE)


def rel_pred(name: str) -> PredicateSym:
    return PredicateSym(name, 2, RELATION)


HAVE = rel_pred("have")


@dataclass(frozen=True)
class Const:
    ident: str

    def __str__(self):
        return self.ident


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class SkolemFn:
    """Skolem function id, derived deterministically from (class, part)."""

    cls: str
    part: str


@dataclass(frozen=True)
class SkolemApp:
    fn: SkolemFn
    arg: "Term"

    def __post_init__(self):
        if isinstance(self.arg, SkolemApp):
            raise ValueError("skolem applications nest to depth 1")


Term = Const | Var | SkolemApp


@dataclass(frozen=True)
class Atom:
    pred: PredicateSym
    args: tuple[Term, ...]

    def __post_init__(self):
        if len(self.args) != self.pred.arity:
            raise ValueError(
                f"{self.pred.name}/{self.pred.arity} applied to {len(self.args)} args"
            )

    def is_ground(self) -> bool:
        return all(_term_ground(t) for t in self.args)


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True


@dataclass(frozen=True)
class Conjunction:
    atoms: tuple[Atom, ...] = ()

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)


@dataclass(frozen=True)
class Prop:
    """Ante => Cons proposition; `generic` marks the G quantifier."""

    ante: Conjunction
    cons: Conjunction
    generic: bool = False
    cons_negated: bool = False
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.cons) == 0:
            raise ValueError("consequent may not be empty")
        if self.generic:
            occ = _vars_of(self.ante) & _vars_of(self.cons)
            if not occ:
                raise ValueError("generic prop must share a variable between ante and cons")
        else:
            for atom in (*self.ante, *self.cons):
                if not atom.is_ground():
                    raise ValueError("non-generic prop must be ground")


@dataclass(frozen=True)
class Ques:
    """polar(?psi) | wh(?lX.psi) | conceptDiff(p1, p2)."""

    kind: str  # "polar" | "wh" | "conceptDiff"
    prop: Prop | None = None
    var: str | None = None
    pair: tuple[PredicateSym, PredicateSym] | None = None

    def __post_init__(self):
        if self.kind == "conceptDiff":
            p1, p2 = self.pair
            if p1.kind != CLASS or p2.kind != CLASS:
                raise ValueError("conceptDiff arguments must be object-class predicates")


def _term_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, SkolemApp):
        return _term_ground(t.arg)
    return True


def _vars_of(conj: Conjunction) -> set[str]:
    out: set[str] = set()
    for atom in conj:
        for t in atom.args:
            if isinstance(t, Var):
                out.add(t.name)
            elif isinstance(t, SkolemApp) and isinstance(t.arg, Var):
                out.add(t.arg.name)
    return out


# ---------------------------------------------------------------------------
# substitution


def _subst_term(t: Term, binding: dict[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in binding:
        return binding[t.name]
    if isinstance(t, SkolemApp):
        inner = _subst_term(t.arg, binding)
        if isinstance(inner, SkolemApp):
            raise ValueError("binding would nest skolem applications")
        return SkolemApp(t.fn, inner)
    return t


def subst_atom(atom: Atom, binding: dict[str, Term]) -> Atom:
    return Atom(atom.pred, tuple(_subst_term(t, binding) for t in atom.args))


def substitute(formula: Conjunction | Prop, binding: dict[str, Term]):
    """Replace every bound variable, including inside skolem applications."""
    if isinstance(formula, Conjunction):
        return Conjunction(tuple(subst_atom(a, binding) for a in formula))
    new_vars = tuple(v for v in formula.variables if v not in binding) + tuple(
        t.name for t in binding.values() if isinstance(t, Var)
    )
    generic = formula.generic and len(new_vars) > 0
    return replace(
        formula,
        ante=substitute(formula.ante, binding),
        cons=substitute(formula.cons, binding),
        variables=new_vars,
        generic=generic,
    )


# ---------------------------------------------------------------------------
# predicate swap and implicatures


def _swap_name(name: str, a: PredicateSym, b: PredicateSym) -> str:
    if name == a.name:
        return b.name
    if name == b.name:
        return a.name
    return name


def swap_predicates(p: Prop, a: PredicateSym, b: PredicateSym) -> Prop:
    """p^{a<->b}: every occurrence of a becomes b and vice versa (involution)."""
    if a.arity != b.arity or a.kind != b.kind:
        raise ValueError(f"cannot swap {a.name} with {b.name}: arity/kind mismatch")

    def swap_term(t: Term) -> Term:
        if isinstance(t, SkolemApp):
            fn = SkolemFn(_swap_name(t.fn.cls, a, b), _swap_name(t.fn.part, a, b))
            return SkolemApp(fn, t.arg)
        return t

    def swap_atom(atom: Atom) -> Atom:
        pred = atom.pred
        if pred == a:
            pred = b
        elif pred == b:
            pred = a
        return Atom(pred, tuple(swap_term(t) for t in atom.args))

    def swap_conj(c: Conjunction) -> Conjunction:
        return Conjunction(tuple(swap_atom(x) for x in c))

    return replace(p, ante=swap_conj(p.ante), cons=swap_conj(p.cons))


def derive_neg_implicature(psi: Prop, p: PredicateSym, q: PredicateSym) -> Prop:
    """Negative implicature of a contrastive answer: Ante(psi^{p<->q}) => ~Cons(psi^{p<->q})."""
    if not psi.generic:
        raise ValueError("negative implicature requires a generic prop")
    in_ante = {a.pred for a in psi.ante}
    if (p in in_ante) == (q in in_ante):
        raise ValueError("exactly one of the swapped predicates must occur in the antecedent")
    swapped = swap_predicates(psi, p, q)
    return replace(swapped, cons_negated=not swapped.cons_negated)


# ---------------------------------------------------------------------------
# canonicalization and structural comparison


def canonicalize(p: Prop) -> Prop:
    """Rename variables to canonical names (O, P, ...) in order of appearance."""
    order: list[str] = []
    for atom in (*p.ante, *p.cons):
        for t in atom.args:
            v = t if isinstance(t, Var) else (t.arg if isinstance(t, SkolemApp) else None)
            if isinstance(v, Var) and v.name not in order:
                order.append(v.name)
    if len(order) > len(_CANON_VARS):
        raise ValueError("too many variables to canonicalize")
    binding = {name: Var(_CANON_VARS[i]) for i, name in enumerate(order)}
    q = substitute(p, binding)
    return replace(q, variables=tuple(_CANON_VARS[: len(order)]))


def _conj_key(conj: Conjunction, fn_ids: dict[SkolemFn, int]):
    """Order-insensitive key; skolem fn ids canonicalized by appearance."""

    def term_key(t: Term):
        if isinstance(t, Const):
            return ("c", t.ident)
        if isinstance(t, Var):
            return ("v", t.name)
        if t.fn not in fn_ids:
            fn_ids[t.fn] = len(fn_ids)
        return ("s", fn_ids[t.fn], term_key(t.arg))

    keys = [
        (a.pred.name, a.pred.arity, a.pred.kind, tuple(term_key(t) for t in a.args))
        for a in conj
    ]
    return tuple(sorted(keys))


def prop_key(p: Prop):
    """Structural identity key: canonical variables, canonical skolem ids,
    order-insensitive conjunctions."""
    q = canonicalize(p)
    fn_ids: dict[SkolemFn, int] = {}
    return (q.generic, q.cons_negated, _conj_key(q.ante, fn_ids), _conj_key(q.cons, fn_ids))


def cons_key(p: Prop):
    """Identity of the consequent alone, for abductive grouping."""
    q = canonicalize(p)
    return (q.cons_negated, _conj_key(q.cons, {}))


def contradicts(p1: Prop, p2: Prop) -> bool:
    """True iff antecedents match up to renaming and the consequents are exact
    polarity-negations of each other. Deliberately weak: partial conjunction
    overlap does not count."""
    if not (p1.generic and p2.generic):
        raise ValueError("contradicts is defined for generic props")
    q1, q2 = canonicalize(p1), canonicalize(p2)
    f1: dict[SkolemFn, int] = {}
    f2: dict[SkolemFn, int] = {}
    if _conj_key(q1.ante, f1) != _conj_key(q2.ante, f2):
        return False
    return (
        _conj_key(q1.cons, f1) == _conj_key(q2.cons, f2)
        and q1.cons_negated != q2.cons_negated
    )


# ---------------------------------------------------------------------------
# skolemized part descriptions


def skolem_fn_for(cls: PredicateSym, part: PredicateSym) -> SkolemFn:
    return SkolemFn(cls.name, part.name)


def skolemize_part_description(
    cls: PredicateSym, attr: PredicateSym, part: PredicateSym
) -> Prop:
    """G O. cls(O) => have(O, f(O)), attr(f(O)), part(f(O))."""
    if cls.kind != CLASS or part.kind != CLASS or attr.kind != ATTRIBUTE:
        raise ValueError("expected (object-class, attribute, object-class)")
    o = Var("O")
    fo = SkolemApp(skolem_fn_for(cls, part), o)
    return Prop(
        ante=Conjunction((Atom(cls, (o,)),)),
        cons=Conjunction((Atom(HAVE, (o, fo)), Atom(attr, (fo,)), Atom(part, (fo,)))),
        generic=True,
        variables=("O",),
    )


# ---------------------------------------------------------------------------
# text rendering (debug dumps, transcripts)


def _render_term(t: Term, fn_letters: dict[SkolemFn, str]) -> str:
    if isinstance(t, SkolemApp):
        if t.fn not in fn_letters:
            fn_letters[t.fn] = _SKOLEM_LETTERS[len(fn_letters) % len(_SKOLEM_LETTERS)]
        return f"{fn_letters[t.fn]}({_render_term(t.arg, fn_letters)})"
    return str(t)


def _render_conj(conj: Conjunction, fn_letters: dict[SkolemFn, str]) -> str:
    return ", ".join(
        f"{a.pred.name}({','.join(_render_term(t, fn_letters) for t in a.args)})"
        for a in conj
    )


def prop_to_text(p: Prop) -> str:
    fn_letters: dict[SkolemFn, str] = {}
    cons = _render_conj(p.cons, fn_letters)
    if p.cons_negated:
        cons = f"~({cons})"
    prefix = ""
    if p.generic:
        prefix = f"G {' '.join(p.variables)}. "
    if len(p.ante) == 0:
        return f"{prefix}{cons}"
    ante = _render_conj(p.ante, fn_letters)
    return f"{prefix}{ante} => {cons}"


def ques_to_text(q: Ques) -> str:
    if q.kind == "polar":
        return f"?{prop_to_text(q.prop)}"
    if q.kind == "wh":
        return f"?l{q.var}.{prop_to_text(q.prop)}"
    p1, p2 = q.pair
    return f"?conceptDiff({p1.name},{p2.name})"


def form_to_text(form) -> str:
    if isinstance(form, Prop):
        return prop_to_text(form)
    if isinstance(form, Ques):
        return ques_to_text(form)
    return str(form)
