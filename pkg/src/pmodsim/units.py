"""dB <-> linear power-ratio conversions.

All capacity functions work on linear SNR; LUT thresholds and feedback
travel in dB. These two helpers are the only place the conversion lives.
"""

import numpy as np


def db_to_lin(db):
    """10^(db/10); accepts scalars or arrays."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def lin_to_db(lin):
    """10*log10(lin); returns -inf for a zero power ratio."""
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(lin)
    return out if np.ndim(lin) else float(out)
