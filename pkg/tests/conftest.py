from pathlib import Path

import pytest

from hatefuse.schema import DEFAULT_SCHEMAS

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def schemas():
    return dict(DEFAULT_SCHEMAS)


@pytest.fixture
def fixture_train_tsv() -> Path:
    return DATA_DIR / "synthetic_train.tsv"


@pytest.fixture
def fixture_dev_tsv() -> Path:
    return DATA_DIR / "synthetic_dev.tsv"
