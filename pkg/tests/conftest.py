from pathlib import Path

import pytest

from crowdjoin.core import Pair
from crowdjoin.ordering import GroundTruth

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def running_example() -> tuple[list[Pair], GroundTruth]:
    """Eight candidate pairs over six objects, likelihood-ranked p1..p8.

    True entities: {o1,o2,o3}, {o4,o5}, {o6}; so p1,p2,p4,p5 match and
    p3,p6,p7,p8 do not.
    """
    pairs = [
        Pair("p1", "o2", "o3", 0.9),
        Pair("p2", "o1", "o2", 0.8),
        Pair("p3", "o1", "o6", 0.7),
        Pair("p4", "o1", "o3", 0.6),
        Pair("p5", "o4", "o5", 0.5),
        Pair("p6", "o4", "o6", 0.4),
        Pair("p7", "o2", "o4", 0.3),
        Pair("p8", "o5", "o6", 0.2),
    ]
    truth = GroundTruth(
        {"o1": "e1", "o2": "e1", "o3": "e1", "o4": "e2", "o5": "e2", "o6": "e3"}
    )
    return pairs, truth


@pytest.fixture
def order_triangle() -> tuple[list[Pair], GroundTruth]:
    """The order-sensitivity triangle: one matching pair, two non-matching."""
    pairs = [
        Pair("p1", "o1", "o2", 0.9),
        Pair("p2", "o2", "o3", 0.5),
        Pair("p3", "o1", "o3", 0.1),
    ]
    truth = GroundTruth({"o1": "e1", "o2": "e1", "o3": "e2"})
    return pairs, truth
