import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cmvwalk import SparseSpec, VerblunskySequence, coin_sequence, truncate, verblunsky
from cmvwalk.qwalk import coins_to_cmv

from oracles import random_sequence


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def battery_sequences() -> dict[str, VerblunskySequence]:
    """The finitely supported models most checks run over."""
    spec = SparseSpec.default(eta=0.5, count=4)
    return {
        "free": VerblunskySequence.zero(),
        "random16": random_sequence(np.random.default_rng(7), 16),
        "sparse3": truncate(verblunsky(spec), 3),
        "walk3": coins_to_cmv(
            coin_sequence(SparseSpec(0.5, (2, 4, 16))).coin_map()
        ),
    }


@pytest.fixture(scope="session")
def battery():
    return battery_sequences()
