import pytest

from pmodsim.modes import MimoMode
from pmodsim.sim import SimConfig, run_campaign

# shared CI-scale sweep: 5000 frames of 256 symbols per point, default
# maritime channel, one campaign per mode set on common per-point seeds
CI_SNRS = (0.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 25.0)
CI_MASTER_SEED = 7

MODE_SETS = {
    "SISO": (MimoMode.SISO,),
    "PMOD": (MimoMode.PMOD,),
    "OPTBC+VBLAST": (MimoMode.OPTBC, MimoMode.VBLAST),
    "OPTBC+VBLAST+PMOD": (MimoMode.OPTBC, MimoMode.VBLAST, MimoMode.PMOD),
}


def ci_config(modes, **overrides):
    kwargs = dict(avg_snr_db_list=CI_SNRS, frames_per_point=5000,
                  symbols_per_frame=256, modes=modes, master_seed=CI_MASTER_SEED)
    kwargs.update(overrides)
    return SimConfig(**kwargs)


@pytest.fixture(scope="session")
def ci_campaigns():
    """Campaign metrics per mode set over the shared CI sweep."""
    return {label: run_campaign(ci_config(modes), jobs=4)
            for label, modes in MODE_SETS.items()}
