"""Shared fixtures: the 20-seed experiment suite reused by the acceptance
tests, and a terminal summary section listing per-criterion pass/fail lines."""

import time
from dataclasses import dataclass

import pytest

from groundsim.harness import ExperimentConfig, run_suite
from groundsim.memory import KnowledgeBase

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@dataclass
class SuiteRun:
    config: ExperimentConfig
    results: dict  # strategy -> list[SequenceResult]
    removed_provenances: list  # provenance sets of every KB entry removed
    elapsed: float


@pytest.fixture(scope="session")
def suite20(tmp_path_factory):
    """fineEasy suite over all five strategy combos with 20 shared seeds.

    KnowledgeBase.remove is instrumented for the duration so the cancellation
    criterion can check the provenance of every entry ever removed.
    """
    removed = []
    original_remove = KnowledgeBase.remove

    def recording_remove(self, entry):
        removed.append(frozenset(entry.provenance))
        return original_remove(self, entry)

    KnowledgeBase.remove = recording_remove
    config = ExperimentConfig(
        difficulty="fineEasy",
        seeds=tuple(range(20)),
        out_dir=str(tmp_path_factory.mktemp("suite20")),
    )
    start = time.perf_counter()
    try:
        results = run_suite(config)
    finally:
        KnowledgeBase.remove = original_remove
    return SuiteRun(config, results, removed, time.perf_counter() - start)
