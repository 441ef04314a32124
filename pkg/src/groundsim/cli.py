"""Command-line entry point.

`groundsim run` executes multi-seed experiment suites and writes curves,
confusion matrices and transcripts; `--interactive` swaps the simulated
teacher for a human typing template sentences on stdin.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .agents import (
    LearnerState,
    cancel_scalar_implicatures,
    learner_answer_probe,
    learner_ask_diff,
    learner_integrate_generics,
)
from .dialogue import (
    CORRECT,
    NOT_SURE,
    ParseError,
    Utterance,
    parse,
    transcript_line,
)
from .harness import (
    DIFFICULTIES,
    STRATEGY_COMBOS,
    ExperimentConfig,
    _perceive,
    _property_scores,
    mean_ci95,
    run_suite,
)
from .logic import Prop, Ques, attr_pred, cls_pred
from .memory import EXPLICIT, EpisodicMemory, EpisodicRecord, KnowledgeBase, Lexicon
from .perception import DomainSpec, ExemplarBase, FeatureModel, generate_scene, init_priors

CONFIG_KEYS = ("difficulty", "strategies", "seeds", "test_set_size", "n_distractors", "feature_seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groundsim")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment suite")
    run.add_argument("--difficulty", choices=sorted(DIFFICULTIES), default=None)
    run.add_argument(
        "--strategy",
        action="append",
        choices=sorted(STRATEGY_COMBOS),
        default=None,
        help="strategy combo; repeatable (default: all)",
    )
    run.add_argument("--seeds", type=int, default=None, help="number of shared seeds (0..N-1)")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument(
        "--dump-program",
        action="store_true",
        help="write final-exam query programs in text format for audit",
    )
    run.add_argument(
        "--interactive",
        action="store_true",
        help="human teacher: type template sentences on stdin",
    )
    run.add_argument("--config", default=None, help="JSON file overriding defaults")
    return parser


def config_from_args(args) -> ExperimentConfig:
    """Defaults < config file < explicit CLI flags."""
    values: dict = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(CONFIG_KEYS)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    if args.difficulty is not None:
        values["difficulty"] = args.difficulty
    if args.strategy is not None:
        values["strategies"] = args.strategy
    if args.seeds is not None:
        values["seeds"] = args.seeds
    if isinstance(values.get("seeds"), int):
        values["seeds"] = range(values["seeds"])
    if "seeds" in values:
        values["seeds"] = tuple(values["seeds"])
    if "strategies" in values:
        values["strategies"] = tuple(values["strategies"])
    return ExperimentConfig(out_dir=args.out, dump_programs=args.dump_program, **values)


def run_batch(config: ExperimentConfig) -> int:
    results = run_suite(config)
    for strategy in config.strategies:
        finals = [r.exams[-1].map for r in results[strategy]]
        mean, half = mean_ci95(finals)
        print(f"{strategy:20s} final mAP {mean:.3f} +/- {half:.3f} over {len(finals)} seeds")
    if config.out_dir:
        print(f"results written to {config.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# interactive mode


def _print_scene(scene, domain: DomainSpec):
    obj = scene[0]
    attrs = {p.kind: ", ".join(p.attrs) if p.attrs else "(plain)" for p in obj.parts}
    print(f"[scene] the demonstratum is a {domain.surfaces[obj.cls]}; "
          + "; ".join(f"{k} is {v}" for k, v in attrs.items()))
    print("[scene] you are the teacher and know the true class; the learner does not.")


def _read_teacher_line(prompt: str) -> str | None:
    try:
        line = input(prompt)
    except EOFError:
        return None
    return line.strip()


def interactive_loop(config: ExperimentConfig, strategy: str, seed: int) -> int:
    """Probe-answer-feedback episodes with a human teacher on stdin.

    The human types template sentences ("What is this?", "Correct.",
    "This is a burgundy glass.", "Burgundy glasses have wide bowls." ...).
    A blank line ends the current episode.
    """
    _, learner_strategy = STRATEGY_COMBOS[strategy]
    domain = DomainSpec.builtin_glasses()
    model = FeatureModel(domain, seed=config.feature_seed)

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

    print(f"interactive mode: learner strategy {learner_strategy}, seed {seed}")
    print("type teacher sentences; blank line = next episode; Ctrl-D = quit")

    episode = 0
    queue: list[str] = []
    while True:
        if not queue:
            order = rng.permutation(len(config.classes))
            queue = [config.classes[i] for i in order]
        target = queue.pop(0)
        episode += 1
        scene = generate_scene(model, target, rng, config.n_distractors)
        sg = _perceive(learner, scene, config, domain)
        eid = scene[0].eid
        print(f"\n# episode {episode}")
        _print_scene(scene, domain)

        answer: str | None = None
        answered = False
        mistake = False
        transcript: list[str] = []
        pending_diff: tuple[str, str] | None = None
        statements: list[Prop] = []

        while True:
            line = _read_teacher_line("teacher> ")
            if line is None:
                print()
                return 0
            if not line:
                break
            try:
                form = parse(line, learner.lexicon, demonstratum=eid)
            except ParseError as exc:
                print(f"  [no template matches: {exc}]")
                continue
            utt = Utterance("teacher", line, form, eid)
            transcript.append(transcript_line(utt))

            if isinstance(form, Ques) and form.kind == "wh":
                answer_utt, answer = learner_answer_probe(
                    learner, sg, list(config.classes), eid
                )
                answered = True
                transcript.append(transcript_line(answer_utt))
                print(f"learner> {answer_utt.surface}")
                continue
            if form == CORRECT:
                break
            if form == NOT_SURE:
                print("  [the teacher cannot be unsure]")
                continue
            if isinstance(form, Prop) and not form.generic and len(form.ante) == 0:
                atoms = form.cons.atoms
                if len(atoms) == 1 and atoms[0].pred.kind == "class":
                    cls = atoms[0].pred.name
                    feature = scene[0].class_feature
                    if form.cons_negated:
                        learner.xb.add(cls, feature, positive=False)
                        mistake = True
                    else:
                        mistake = True
                        if answered and answer is not None and answer != cls:
                            learner.xb.process_correction(answer, cls, feature)
                        else:
                            learner.xb.add(cls, feature, positive=True)
                        if answer is not None and answer != cls:
                            diff_q = learner_ask_diff(learner, (cls, answer))
                            if diff_q is not None:
                                pending_diff = (cls, answer)
                                statements = []
                                transcript.append(transcript_line(diff_q))
                                print(f"learner> {diff_q.surface}")
                    continue
            if isinstance(form, Prop) and form.generic:
                if pending_diff is None:
                    # no contrastive question pending: no implicatures licensed,
                    # the statement is stored verbatim
                    learner.kb.add(form, EXPLICIT, episode)
                else:
                    statements.append(form)
                continue
            print("  [sentence understood but not usable as teacher feedback here]")

        if pending_diff is not None and statements:
            learner_integrate_generics(
                learner,
                statements,
                (cls_pred(pending_diff[0]), cls_pred(pending_diff[1])),
                episode,
            )
        outcome = "correct" if not mistake else (
            "not-sure" if answer is None else "incorrect"
        )
        learner.episodic.append(
            EpisodicRecord(
                episode=episode,
                true_class=target,
                object_eid=eid,
                property_scores=_property_scores(sg, eid, domain),
                transcript=list(transcript),
                answer=answer if answer is not None else "not-sure",
                outcome=outcome,
            )
        )
        if mistake:
            cancel_scalar_implicatures(learner)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        config = config_from_args(args)
        if args.interactive:
            strategies = config.strategies
            strategy = strategies[0] if strategies else "maxHelp_semNegScal"
            return interactive_loop(config, strategy, config.seeds[0])
        return run_batch(config)
    return 2


if __name__ == "__main__":
    sys.exit(main())
