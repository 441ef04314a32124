"""Long-term stores: symbolic KB with provenance, episodic memory, lexicon.

The visual exemplar base lives in `perception`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .logic import (
    ATTRIBUTE,
    CLASS,
    Prop,
    PredicateSym,
    SkolemApp,
    prop_key,
    prop_to_text,
)

EXPLICIT = "explicit-utterance"
NEG_IMPLICATURE = "neg-implicature"
SCALAR_IMPLICATURE = "scalar-implicature"

THETA_COUNTEREXAMPLE = 0.8


@dataclass
class KBEntry:
    prop: Prop
    provenance: set[str]
    origin_episodes: list[int]


class KnowledgeBase:
    """Generic props deduplicated by structural equality, with source tags."""

    def __init__(self):
        self.entries: list[KBEntry] = []
        self._index: dict = {}

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def add(self, prop: Prop, source: str, episode: int) -> KBEntry:
        if not prop.generic:
            raise ValueError("KB holds generic props only")
        key = prop_key(prop)
        entry = self._index.get(key)
        if entry is None:
            entry = KBEntry(prop, {source}, [episode])
            self.entries.append(entry)
            self._index[key] = entry
        else:
            entry.provenance.add(source)
            if episode not in entry.origin_episodes:
                entry.origin_episodes.append(episode)
        return entry

    def contains(self, prop: Prop) -> bool:
        return prop_key(prop) in self._index

    def remove(self, entry: KBEntry):
        self.entries.remove(entry)
        del self._index[prop_key(entry.prop)]


@dataclass
class EpisodicRecord:
    episode: int
    true_class: str  # teacher-asserted, hence confirmed
    object_eid: str
    property_scores: dict  # (attr, part) -> perceived confidence at answer time
    transcript: list[str]
    answer: str  # class name or "not-sure"
    outcome: str  # correct | incorrect | not-sure

    def to_json(self) -> str:
        d = dict(self.__dict__)
        d["property_scores"] = {f"{a}/{p}": s for (a, p), s in self.property_scores.items()}
        return json.dumps(d, sort_keys=True)


class EpisodicMemory:
    """Append-only per-episode records."""

    def __init__(self):
        self.records: list[EpisodicRecord] = []

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def append(self, record: EpisodicRecord):
        self.records.append(record)

    def dump_jsonl(self) -> str:
        return "\n".join(r.to_json() for r in self.records) + ("\n" if self.records else "")


def _cons_properties(prop: Prop) -> list[tuple[str, str]]:
    """(attribute, part) conjuncts of a skolemized consequent."""
    by_fn: dict = {}
    for atom in prop.cons:
        for t in atom.args:
            if isinstance(t, SkolemApp):
                slot = by_fn.setdefault(t.fn, {"attrs": [], "part": None})
                if atom.pred.kind == ATTRIBUTE:
                    slot["attrs"].append(atom.pred.name)
                elif atom.pred.kind == CLASS:
                    slot["part"] = atom.pred.name
    out = []
    for slot in by_fn.values():
        if slot["part"]:
            out.extend((attr, slot["part"]) for attr in slot["attrs"])
    return out


def find_counterexamples(
    episodic: EpisodicMemory, prop: Prop, theta: float = THETA_COUNTEREXAMPLE
) -> list[int]:
    """Episodes whose teacher-confirmed class matches Ante(prop) and whose
    perceived properties contradict Cons(prop) at confidence >= theta."""
    if not prop.generic:
        raise ValueError("counterexample search expects a generic prop")
    ante_classes = [a.pred.name for a in prop.ante if a.pred.kind == CLASS]
    if not ante_classes:
        raise ValueError("prop has no class antecedent")
    ante_cls = ante_classes[0]
    conjuncts = _cons_properties(prop)
    hits = []
    for rec in episodic:
        if rec.true_class != ante_cls:
            continue
        scores = [rec.property_scores.get(c) for c in conjuncts]
        if any(s is None for s in scores) or not scores:
            continue
        if prop.cons_negated:
            # rule says the class lacks the conjunction; refuted when every
            # conjunct was confidently perceived
            if all(s >= theta for s in scores):
                hits.append(rec.episode)
        else:
            if any(s <= 1.0 - theta for s in scores):
                hits.append(rec.episode)
    return hits


# ---------------------------------------------------------------------------
# lexicon


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    pos: str  # "noun" | "adj" | "rel"
    pred: PredicateSym


class Lexicon:
    """Content words introduced by the teacher; one predicate per surface
    form within a kind."""

    def __init__(self):
        self._by_surface: dict[tuple[str, str], LexiconEntry] = {}
        self._by_pred: dict[str, LexiconEntry] = {}

    def __len__(self):
        return len(self._by_pred)

    def add(self, surface: str, pos: str, pred: PredicateSym) -> LexiconEntry:
        key = (surface, pos)
        if key in self._by_surface:
            existing = self._by_surface[key]
            if existing.pred != pred:
                raise ValueError(f"surface {surface!r} already bound to {existing.pred.name}")
            return existing
        entry = LexiconEntry(surface, pos, pred)
        self._by_surface[key] = entry
        self._by_pred[pred.name] = entry
        return entry

    def lookup_surface(self, surface: str, pos: str) -> LexiconEntry | None:
        return self._by_surface.get((surface, pos))

    def lookup_pred(self, name: str) -> LexiconEntry | None:
        return self._by_pred.get(name)

    def knows_pred(self, name: str) -> bool:
        return name in self._by_pred

    def class_predicates(self) -> list[PredicateSym]:
        return sorted(
            (e.pred for e in self._by_pred.values() if e.pred.kind == CLASS),
            key=lambda p: p.name,
        )
