"""Dialogue walkthrough.

Drives teaching episodes directly with the library (the same pieces the
harness uses): a fineEasy domain, the most helpful teacher, and a learner
that also adopts negative implicatures (semNeg). It prints the transcript
until shortly after the first contrastive exchange, then shows what ended
up in the learner's knowledge base and where each entry came from.

Run: python3 demos/dialogue_walkthrough.py
"""

import numpy as np

from groundsim.agents import LearnerState, TeacherState, domain_lexicon
from groundsim.dialogue import SEP
from groundsim.harness import ExperimentConfig, run_episode
from groundsim.logic import attr_pred, cls_pred, prop_to_text
from groundsim.memory import EpisodicMemory, KnowledgeBase, Lexicon
from groundsim.perception import DomainSpec, ExemplarBase, FeatureModel, init_priors


def main():
    config = ExperimentConfig(difficulty="fineEasy")
    domain = DomainSpec.builtin_glasses()
    model = FeatureModel(domain, seed=config.feature_seed)
    seed = 0

    teacher = TeacherState(
        domain=domain, strategy="maxHelp", lexicon=domain_lexicon(domain)
    )
    lexicon = Lexicon()
    for part in domain.parts:
        lexicon.add(part, "noun", cls_pred(part))
    for attr in domain.attributes:
        lexicon.add(attr, "adj", attr_pred(attr))
    xb = ExemplarBase()
    init_priors(xb, model, np.random.default_rng([seed, 3]))
    learner = LearnerState(
        xb=xb,
        kb=KnowledgeBase(),
        episodic=EpisodicMemory(),
        lexicon=lexicon,
        strategy="semNeg",
    )

    rng = np.random.default_rng([seed, 1])
    print("=== transcript ===")
    seen_diff = False
    episode = 0
    queue = []
    while not (seen_diff and not queue) and episode < 30:
        if not queue:
            order = rng.permutation(len(config.classes))
            queue = [config.classes[i] for i in order]
        target = queue.pop(0)
        episode += 1
        _, lines = run_episode(teacher, learner, model, config, target, episode, rng)
        print(f"# episode {episode} target={target}")
        for line in lines:
            speaker, surface, _ = line.split(SEP)
            print(f"  {speaker:8s} {surface}")
            if "different?" in surface:
                seen_diff = True

    print("\n=== knowledge base after these episodes ===")
    for entry in learner.kb:
        provs = ", ".join(sorted(entry.provenance))
        print(f"  {prop_to_text(entry.prop)}")
        print(f"      provenance: {provs}; episodes: {entry.origin_episodes}")


if __name__ == "__main__":
    main()
