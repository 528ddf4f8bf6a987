import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture()
def noiseless():
    from repeater_sched.states import NoiseParams

    return NoiseParams(gate_error=0.0)
