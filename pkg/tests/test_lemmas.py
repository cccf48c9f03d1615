import pytest

from mlqcc.corpus import spawn
from mlqcc.lemma_checks import CHECKS, pure_pinsker_gap, run_lemma_suite, uhlmann_gap


@pytest.fixture(scope="module")
def report():
    return run_lemma_suite(100, 7)


def test_every_lemma_passes(report):
    failed = [r.name for r in report.results if r.passed != r.trials]
    assert not failed
    assert report.all_passed


def test_all_checks_reported(report):
    names = [r.name for r in report.results]
    assert names[: len(CHECKS)] == list(CHECKS)
    assert names[-1] == "concavity_grid"


def test_deterministic_for_seed(report):
    assert run_lemma_suite(100, 7).to_csv() == report.to_csv()
    assert run_lemma_suite(100, 8).to_csv() != report.to_csv()


def test_csv_documents_seed(report):
    lines = report.to_csv().splitlines()
    assert lines[0] == "# mlqcc lemmas seed=7 trials=100"
    assert lines[1] == "lemma,trials,passed,worst_margin"


def test_zero_trials_rejected():
    with pytest.raises(ValueError):
        run_lemma_suite(0, 1)


def test_gap_helpers_small():
    g = spawn(3, 1)[0]
    assert max(pure_pinsker_gap(g) for _ in range(50)) <= 1e-9
    assert max(uhlmann_gap(g, 4) for _ in range(50)) <= 1e-8
