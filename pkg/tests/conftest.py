from pathlib import Path

import pytest

from focal.corpus import load_dataset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def ten_sentence_example():
    return load_dataset(FIXTURES / "ten_sentences.json")[0]


@pytest.fixture(scope="session")
def tiny_dataset():
    return load_dataset(FIXTURES / "tiny_dataset.json")
