import pytest

from nerprobe.corpus import Corpus, Sentence

KOSTUNICA_WORDS = ("Faced with massive demonstrations and Russia’s backing of Kostunica , "
                "he agreed to step down in October.").split()
KOSTUNICA_TAGS = ["O"] * len(KOSTUNICA_WORDS)
KOSTUNICA_TAGS[5] = "B-GPE"
KOSTUNICA_TAGS[8] = "B-PER"
KOSTUNICA_TAGS[-1] = "B-DATE"


@pytest.fixture
def kostunica_corpus():
    return Corpus((Sentence.from_lists(KOSTUNICA_WORDS, KOSTUNICA_TAGS, doc_id="nw/sample", source="nw"),))


@pytest.fixture
def three_source_corpus():
    rows = [
        ("bc/a/1", "bc", ["Mary", "spoke"], ["B-PER", "O"]),
        ("bn/b/1", "bn", ["In", "Paris", "today"], ["O", "B-GPE", "O"]),
        ("tc/c/1", "tc", ["uh", "John", "Smith"], ["O", "B-PER", "I-PER"]),
        ("bn/b/1", "bn", ["UN", "said"], ["B-ORG", "O"]),
        ("bc/a/1", "bc", ["yes"], ["O"]),
    ]
    seen = {}
    sents = []
    for doc, src, words, tags in rows:
        i = seen.get(doc, 0)
        seen[doc] = i + 1
        sents.append(Sentence.from_lists(words, tags, doc_id=doc, source=src, index=i))
    return Corpus(tuple(sents))


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
