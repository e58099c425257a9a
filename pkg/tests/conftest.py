from pathlib import Path

import pytest

from anyref.cli.synth import gen_synthetic_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Six synthetic 1024x768 images; returns the corpus.jsonl path."""
    out = tmp_path_factory.mktemp("small_corpus")
    gen_synthetic_corpus(6, seed=3, out_dir=out)
    return out / "corpus.jsonl"


# criterion number -> (title, passed); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
