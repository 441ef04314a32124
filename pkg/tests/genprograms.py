"""Random ground-program generators shared by the solver test modules."""

import numpy as np

from groundsim.logic import Atom, Const, cls_pred
from groundsim.program import HARD, WeightedProgram, WeightedRule


def base_atom(i: int) -> Atom:
    return Atom(cls_pred(f"a{i}"), (Const("o"),))


def aux_atom(i: int) -> Atom:
    return Atom(cls_pred(f"aux{i}"), (Const("o"),))


def random_program(rng: np.random.Generator, max_base: int = 6) -> WeightedProgram:
    """Arbitrary program within the supported fragment: soft facts, HARD
    definite aux rules and soft/HARD constraints over base and aux atoms."""
    n = int(rng.integers(1, max_base + 1))
    atoms = [base_atom(i) for i in range(n)]
    prog = WeightedProgram()
    for a in atoms:
        if rng.random() < 0.9:
            prog.add(WeightedRule(float(rng.normal() * 2.0), a))

    n_aux = int(rng.integers(0, 3))
    aux = []
    for j in range(n_aux):
        head = aux_atom(j)
        aux.append(head)
        for _ in range(int(rng.integers(1, 3))):
            size = int(rng.integers(1, min(3, n) + 1))
            body = tuple(
                atoms[k] for k in rng.choice(n, size=size, replace=False)
            )
            prog.add(WeightedRule(HARD, head, body, ()))

    pool = atoms + aux
    for _ in range(int(rng.integers(0, 4))):
        size = int(rng.integers(1, min(3, len(pool)) + 1))
        picked = [pool[k] for k in rng.choice(len(pool), size=size, replace=False)]
        pos = tuple(a for a in picked if rng.random() < 0.5)
        neg = tuple(a for a in picked if a not in pos)
        weight = HARD if rng.random() < 0.15 else float(rng.normal() * 2.0)
        prog.add(WeightedRule(weight, None, pos, neg))
    return prog


def random_tree_program(rng: np.random.Generator, max_atoms: int = 10) -> WeightedProgram:
    """Facts plus pairwise constraints forming a forest-shaped factor graph
    (each constraint attaches a new atom to an earlier one)."""
    n = int(rng.integers(2, max_atoms + 1))
    atoms = [base_atom(i) for i in range(n)]
    prog = WeightedProgram()
    for a in atoms:
        prog.add(WeightedRule(float(rng.normal() * 2.0), a))
    for i in range(1, n):
        if rng.random() < 0.7:
            j = int(rng.integers(0, i))
            pair = [atoms[i], atoms[j]]
            pos = tuple(a for a in pair if rng.random() < 0.5)
            neg = tuple(a for a in pair if a not in pos)
            if not pos and not neg:
                continue
            weight = HARD if rng.random() < 0.2 else float(rng.normal() * 2.0)
            prog.add(WeightedRule(weight, None, pos, neg))
    return prog
