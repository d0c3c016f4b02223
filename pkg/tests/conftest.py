import pytest
from hypothesis import settings

from chancekit.model import CCProgram, CCRow

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


@pytest.fixture
def one_dim():
    """min x s.t. x >= xi, 0 <= x <= 10."""
    return CCProgram([1.0], [CCRow.separable([-1.0], 0.0, [1.0])], 0.05, lower=[0.0], upper=[10.0])
