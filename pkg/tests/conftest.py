import numpy as np
import pytest

from luxsec.channel import ChannelState, OpticalParams
from luxsec.noma import NoiseModel, RateRequirements
from luxsec.sim import Scenario, trial_state

PARAMS = OpticalParams()
W = PARAMS.bandwidth


def random_state(rng: np.random.Generator, n: int, los_scale=3e-6, irs_scale=1.3e-6) -> ChannelState:
    """Synthetic channel with gains of realistic magnitude."""
    h_los = rng.uniform(0.2, 1.0, size=2) * los_scale
    h_tilde = rng.uniform(0.0, 1.0, size=(2, n)) * irs_scale
    return ChannelState(h_los, h_tilde)


def room_state(n: int, trial: int, mode="combined", snr_db=80.0, seed=0) -> tuple[ChannelState, Scenario]:
    scn = Scenario(n_elements=n, snr_tx_db=snr_db, seed=seed, mode=mode, trials=1)
    return trial_state(scn, trial).for_mode(mode), scn


@pytest.fixture
def params():
    return PARAMS


@pytest.fixture
def noise80():
    return NoiseModel.from_snr_db(80.0, PARAMS)


@pytest.fixture
def loose_req():
    return RateRequirements(1e-7 * W, 1e-7 * W)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.VERDICTS:
            terminalreporter.write_line(line)
