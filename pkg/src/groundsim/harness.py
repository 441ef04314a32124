"""Experiment runner: episode sequencing, mistake counting, mid-term exams,
AP/mAP metrics, confusion matrices, multi-seed aggregation, file emission."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .agents import (
    LearnerState,
    TeacherState,
    cancel_scalar_implicatures,
    domain_lexicon,
    learner_answer_probe,
    learner_ask_diff,
    learner_hear,
    learner_integrate_generics,
    learner_perceive,
    teacher_answer_diff,
    teacher_probe,
    teacher_respond,
)
from .dialogue import transcript_line
from .logic import Atom, Const, attr_pred, cls_pred
from .memory import EpisodicMemory, EpisodicRecord, KnowledgeBase, Lexicon
from .perception import (
    DomainSpec,
    ExemplarBase,
    FeatureModel,
    generate_scene,
    init_priors,
)
from .program import program_to_text
from .reasoner import build_program, classify, marginals_for

DIFFICULTIES = {
    "fineEasy": {
        "classes": ("brandyGlass", "burgundyGlass", "champagneCoupe"),
        "n_total": 30,
        "n_exam": 5,
    },
    "fineHard": {
        "classes": (
            "brandyGlass",
            "burgundyGlass",
            "champagneCoupe",
            "bordeauxGlass",
            "martiniGlass",
        ),
        "n_total": 60,
        "n_exam": 10,
    },
}

STRATEGY_COMBOS = {
    "minHelp": ("minHelp", "semOnly"),
    "medHelp": ("medHelp", "semOnly"),
    "maxHelp_semOnly": ("maxHelp", "semOnly"),
    "maxHelp_semNeg": ("maxHelp", "semNeg"),
    "maxHelp_semNegScal": ("maxHelp", "semNegScal"),
}

EPISODE_CAP = 2000  # safety bound on runaway sequences
NOT_SURE_LABEL = "not-sure"


@dataclass
class ExperimentConfig:
    difficulty: str = "fineEasy"
    strategies: tuple[str, ...] = tuple(STRATEGY_COMBOS)
    seeds: tuple[int, ...] = tuple(range(40))
    test_set_size: int = 20
    n_distractors: int = 2
    feature_seed: int = 0
    out_dir: str | None = None
    dump_programs: bool = False

    def __post_init__(self):
        if self.difficulty not in DIFFICULTIES:
            raise ValueError(f"unknown difficulty: {self.difficulty}")
        for s in self.strategies:
            if s not in STRATEGY_COMBOS:
                raise ValueError(f"unknown strategy combo: {s}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        spec = DIFFICULTIES[self.difficulty]
        if spec["n_exam"] > spec["n_total"]:
            raise ValueError("exam interval exceeds mistake budget")

    @property
    def classes(self) -> tuple[str, ...]:
        return DIFFICULTIES[self.difficulty]["classes"]

    @property
    def n_total(self) -> int:
        return DIFFICULTIES[self.difficulty]["n_total"]

    @property
    def n_exam(self) -> int:
        return DIFFICULTIES[self.difficulty]["n_exam"]


@dataclass
class ExamResult:
    mistakes: int
    ranked: dict  # concept -> list of (score, is_positive)
    ap: dict  # concept -> AP (or None when the concept had no positives)
    map: float


@dataclass
class SequenceResult:
    strategy: str
    seed: int
    exams: list[ExamResult]
    confusion: dict  # true class -> {predicted or not-sure: rate}
    transcript: list[str]
    episodes: int
    program_dumps: list[str] | None = None  # final-exam query programs, text format


# ---------------------------------------------------------------------------
# metrics


def average_precision(ranked: list[tuple[float, bool]]) -> float:
    """Area under the interpolated precision-recall curve.

    Sort is stable on the input order for tied scores; interpolated precision
    at recall r is the max precision at any recall >= r.
    """
    n_pos = sum(1 for _, pos in ranked if pos)
    if n_pos == 0:
        raise ValueError("average precision needs at least one positive")
    order = sorted(range(len(ranked)), key=lambda i: -ranked[i][0])
    precisions = []  # precision at each positive hit, in rank order
    hits = 0
    for rank, i in enumerate(order, start=1):
        if ranked[i][1]:
            hits += 1
            precisions.append(hits / rank)
    total = 0.0
    best = 0.0
    for p in reversed(precisions):
        best = max(best, p)
        total += best
    return total / n_pos


def mean_ci95(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if len(arr) < 2:
        return mean, 0.0
    half = 1.96 * float(arr.std(ddof=1)) / math.sqrt(len(arr))
    return mean, half


# ---------------------------------------------------------------------------
# episode loop


def _property_scores(sg, eid: str, domain: DomainSpec) -> dict:
    """Perceived confidence that object eid has an <attr> <part>, per pair."""
    out = {}
    for attr in domain.attributes:
        for part in domain.parts:
            best = 0.0
            for pe in sg.object_parts.get(eid, ()):
                node = sg.nodes[pe]
                s = min(node.attr_scores.get(attr, 0.0), node.class_scores.get(part, 0.0))
                best = max(best, s)
            out[(attr, part)] = best
    return out


def _perceive(learner, scene, config, domain):
    class_concepts = list(config.classes) + list(domain.parts)
    return learner_perceive(learner, scene, class_concepts, list(domain.attributes))


def run_episode(
    teacher: TeacherState,
    learner: LearnerState,
    model: FeatureModel,
    config: ExperimentConfig,
    target: str,
    episode: int,
    rng,
) -> tuple[bool, list[str]]:
    """One probe-answer-feedback episode. Returns (mistake, transcript)."""
    domain = teacher.domain
    scene = generate_scene(model, target, rng, config.n_distractors)
    sg = _perceive(learner, scene, config, domain)
    eid = scene[0].eid

    transcript = []

    probe = teacher_probe(teacher, eid)
    learner_hear(learner, probe)
    transcript.append(transcript_line(probe))

    answer_utt, answer = learner_answer_probe(learner, sg, list(config.classes), eid)
    transcript.append(transcript_line(answer_utt))

    feedback = teacher_respond(teacher, eid, target, answer)
    for utt in feedback:
        learner_hear(learner, utt)
        transcript.append(transcript_line(utt))

    mistake = answer != target
    if mistake:
        feature = scene[0].class_feature
        if answer is None:
            learner.xb.add(target, feature, positive=True)
        elif teacher.strategy == "minHelp":
            # label withheld: only the denied class gets a negative exemplar
            learner.xb.add(answer, feature, positive=False)
        else:
            learner.xb.process_correction(answer, target, feature)

        if teacher.strategy == "maxHelp" and answer is not None:
            diff_q = learner_ask_diff(learner, (target, answer))
            if diff_q is not None:
                transcript.append(transcript_line(diff_q))
                generics = teacher_answer_diff(teacher, (target, answer))
                statements = []
                for utt in generics:
                    statements.append(learner_hear(learner, utt))
                    transcript.append(transcript_line(utt))
                learner_integrate_generics(
                    learner,
                    statements,
                    (cls_pred(target), cls_pred(answer)),
                    episode,
                )

    outcome = "correct" if not mistake else ("not-sure" if answer is None else "incorrect")
    learner.episodic.append(
        EpisodicRecord(
            episode=episode,
            true_class=target,
            object_eid=eid,
            property_scores=_property_scores(sg, eid, domain),
            transcript=list(transcript),
            answer=answer if answer is not None else NOT_SURE_LABEL,
            outcome=outcome,
        )
    )
    if mistake:
        cancel_scalar_implicatures(learner)
    return mistake, transcript


# ---------------------------------------------------------------------------
# exams


def make_test_set(model: FeatureModel, config: ExperimentConfig, seed: int):
    """Held-out single-object scenes, test_set_size per target class, from a
    seed stream disjoint from the training episodes."""
    rng = np.random.default_rng([seed, 0x7E57])
    out = []
    for cls in config.classes:
        for i in range(config.test_set_size):
            out.append(model.sample_object(cls, f"t{len(out) + 1}", rng))
    return out


def run_exam(learner: LearnerState, test_set, config, domain, mistakes: int) -> ExamResult:
    """Polar-mode confidences for every (test object, concept); read-only."""
    ranked = {c: [] for c in config.classes}
    for obj in test_set:
        sg = _perceive(learner, [obj], config, domain)
        atoms = {c: Atom(cls_pred(c), (Const(obj.eid),)) for c in config.classes}
        table = marginals_for(sg, learner.kb, learner.u, list(atoms.values()))
        for c in config.classes:
            ranked[c].append((table[atoms[c]], obj.cls == c))
    ap = {}
    for c in config.classes:
        has_pos = any(pos for _, pos in ranked[c])
        ap[c] = average_precision(ranked[c]) if has_pos else None
    scores = [v for v in ap.values() if v is not None]
    return ExamResult(mistakes=mistakes, ranked=ranked, ap=ap, map=sum(scores) / len(scores))


def exam_confusion(learner: LearnerState, test_set, config, domain) -> dict:
    """Row-normalized multiple-choice confusion rates, not-sure as a column."""
    counts = {
        t: {c: 0 for c in config.classes} | {NOT_SURE_LABEL: 0} for t in config.classes
    }
    for obj in test_set:
        sg = _perceive(learner, [obj], config, domain)
        pred = classify(sg, learner.kb, learner.u, list(config.classes), obj.eid)
        counts[obj.cls][pred if pred is not None else NOT_SURE_LABEL] += 1
    out = {}
    for t, row in counts.items():
        total = sum(row.values())
        out[t] = {k: v / total for k, v in row.items()}
    return out


# ---------------------------------------------------------------------------
# sequences and suites


def run_sequence(config: ExperimentConfig, strategy: str, seed: int) -> SequenceResult:
    domain = DomainSpec.builtin_glasses()
    teacher_strategy, learner_strategy = STRATEGY_COMBOS[strategy]
    model = FeatureModel(domain, seed=config.feature_seed)

    teacher = TeacherState(domain=domain, strategy=teacher_strategy, lexicon=domain_lexicon(domain))
    learner_lexicon = Lexicon()
    for part in domain.parts:
        learner_lexicon.add(part, "noun", cls_pred(part))
    for attr in domain.attributes:
        learner_lexicon.add(attr, "adj", attr_pred(attr))
    xb = ExemplarBase()
    init_priors(xb, model, np.random.default_rng([seed, 3]))
    learner = LearnerState(
        xb=xb,
        kb=KnowledgeBase(),
        episodic=EpisodicMemory(),
        lexicon=learner_lexicon,
        strategy=learner_strategy,
    )

    rng = np.random.default_rng([seed, 1])
    test_set = make_test_set(model, config, seed)

    transcript = []
    exams = []
    mistakes = 0
    episode = 0
    queue = []
    while mistakes < config.n_total and episode < EPISODE_CAP:
        if not queue:
            order = rng.permutation(len(config.classes))
            queue = [config.classes[i] for i in order]
        target = queue.pop(0)
        episode += 1
        made_mistake, lines = run_episode(teacher, learner, model, config, target, episode, rng)
        transcript.append(f"# episode {episode} target={target}")
        transcript.extend(lines)
        if made_mistake:
            mistakes += 1
            if mistakes % config.n_exam == 0:
                exams.append(run_exam(learner, test_set, config, domain, mistakes))

    confusion = exam_confusion(learner, test_set, config, domain)
    dumps = dump_exam_programs(learner, test_set, config, domain) if config.dump_programs else None
    return SequenceResult(
        strategy=strategy,
        seed=seed,
        exams=exams,
        confusion=confusion,
        transcript=transcript,
        episodes=episode,
        program_dumps=dumps,
    )


def dump_exam_programs(learner: LearnerState, test_set, config, domain) -> list[str]:
    """Text-format grounded program per final-exam query object, for audit."""
    dumps = []
    for obj in test_set:
        sg = _perceive(learner, [obj], config, domain)
        prog = build_program(sg, learner.kb, learner.u)
        header = f"# query object {obj.eid} (true class {obj.cls}), candidates: " + ", ".join(
            config.classes
        )
        dumps.append(header + "\n" + program_to_text(prog))
    return dumps


def run_suite(config: ExperimentConfig) -> dict:
    """All (strategy, seed) cells with shared seeds; writes result files when
    config.out_dir is set."""
    results: dict[str, list[SequenceResult]] = {s: [] for s in config.strategies}
    for strategy in config.strategies:
        for seed in config.seeds:
            try:
                results[strategy].append(run_sequence(config, strategy, seed))
            except Exception as exc:
                raise RuntimeError(f"cell ({strategy}, seed={seed}) failed: {exc}") from exc
    if config.out_dir is not None:
        write_outputs(config, results)
    return results


def write_outputs(config: ExperimentConfig, results: dict):
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    os.makedirs(os.path.join(out, "transcripts"), exist_ok=True)

    with open(os.path.join(out, "curves.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "seed", "mistakes", "concept", "AP", "mAP"])
        for strategy in config.strategies:
            for res in results[strategy]:
                for exam in res.exams:
                    for concept in config.classes:
                        ap = exam.ap[concept]
                        w.writerow(
                            [
                                strategy,
                                res.seed,
                                exam.mistakes,
                                concept,
                                "" if ap is None else f"{ap:.6f}",
                                f"{exam.map:.6f}",
                            ]
                        )

    with open(os.path.join(out, "aggregate.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "mistakes", "mean_mAP", "ci95_half_width", "n_seeds"])
        for strategy in config.strategies:
            by_mistakes: dict[int, list[float]] = {}
            for res in results[strategy]:
                for exam in res.exams:
                    by_mistakes.setdefault(exam.mistakes, []).append(exam.map)
            for mistakes in sorted(by_mistakes):
                mean, half = mean_ci95(by_mistakes[mistakes])
                w.writerow(
                    [strategy, mistakes, f"{mean:.6f}", f"{half:.6f}", len(by_mistakes[mistakes])]
                )

    for strategy in config.strategies:
        avg = average_confusion([r.confusion for r in results[strategy]], config)
        with open(os.path.join(out, f"confusion_{strategy}.json"), "w") as fh:
            json.dump(avg, fh, indent=2, sort_keys=True)
        for res in results[strategy]:
            path = os.path.join(out, "transcripts", f"{strategy}_{res.seed}.log")
            with open(path, "w") as fh:
                fh.write("\n".join(res.transcript) + "\n")
            if res.program_dumps is not None:
                os.makedirs(os.path.join(out, "programs"), exist_ok=True)
                ppath = os.path.join(out, "programs", f"{strategy}_{res.seed}.lp")
                with open(ppath, "w") as fh:
                    fh.write("\n\n".join(res.program_dumps) + "\n")


def average_confusion(matrices: list[dict], config: ExperimentConfig) -> dict:
    cols = list(config.classes) + [NOT_SURE_LABEL]
    out = {}
    for t in config.classes:
        out[t] = {c: sum(m[t][c] for m in matrices) / len(matrices) for c in cols}
    return out
