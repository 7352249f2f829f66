from .seeding import make_rng, mix64, trial_seed
from .units import (
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    thermal_noise_power,
    watts_to_dbm,
    wavelength,
)
