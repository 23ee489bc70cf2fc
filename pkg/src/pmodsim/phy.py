"""Physical layer abstraction for frame-level simulation.

Condenses the N channel snapshots of a frame into one effective SNR per bit
stream (capacity-domain averaging, inverted back to SNR) and predicts
codeword decode outcomes by comparing effective SNR against MCS thresholds.
No symbol-level detection happens anywhere; the effective SNR stands in for
the decoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capacity import phi_s, phi_s_inv, phi_p_inv, pmod_ip_bound
from .units import lin_to_db

__all__ = [
    "SYMBOL_MEAN_CAPACITY_CLAMP",
    "POLARIZATION_MEAN_CAPACITY_CLAMP",
    "EffectiveSnrPair",
    "mrc_symbol_snr",
    "mrc_snr_per_symbol",
    "symbol_stream_effective_snr",
    "effective_snr_symbols",
    "effective_snr_polarization",
    "effective_snr_pair",
    "predict_decode",
]

# capacity means are clamped below the asymptotes before inversion, since the
# inverse maps diverge at saturation
SYMBOL_MEAN_CAPACITY_CLAMP = 2.0 - 1e-6
POLARIZATION_MEAN_CAPACITY_CLAMP = 1.0 - 1e-9


@dataclass(frozen=True)
class EffectiveSnrPair:
    """Effective SNRs [dB] of the two streams plus saturation diagnostics."""

    symbols_db: float
    polarization_db: float
    symbols_saturated: bool = False
    polarization_saturated: bool = False


def mrc_symbol_snr(gamma, h, k):
    """Post-combining SNR of a symbol sent on polarization ``k`` in {1, 2}.

    Maximum ratio combining over the two receive polarizations:
    gamma * (|H1k|^4 + |H2k|^4 + 2|H1k|^2|H2k|^2) / (|H1k|^2 + |H2k|^2),
    which reduces to gamma * ||h_k||^2. Returns 0 for a dead column.
    """
    h = np.asarray(h)
    a = abs(h[0, k - 1]) ** 2
    b = abs(h[1, k - 1]) ** 2
    denom = a + b
    if denom == 0.0:
        return 0.0
    return gamma * (a * a + b * b + 2.0 * a * b) / denom


def mrc_snr_per_symbol(gamma, frames):
    """Per-symbol MRC SNRs for both transmit polarizations.

    Args:
        gamma: average linear SNR.
        frames: (N, 2, 2) channel snapshots, one per symbol instant.

    Returns:
        (N, 2) array; column k holds the SNR a symbol would see when sent
        on transmit polarization k. Dead columns yield 0.
    """
    p = np.abs(np.asarray(frames)) ** 2          # (N, 2, 2) entry powers
    a, b = p[:, 0, :], p[:, 1, :]                # receive branch 1 / 2
    denom = a + b
    num = a * a + b * b + 2.0 * a * b
    with np.errstate(invalid="ignore"):
        snr = np.where(denom > 0.0, num / np.where(denom > 0.0, denom, 1.0), 0.0)
    return gamma * snr


def symbol_stream_effective_snr(per_symbol_snr):
    """Capacity-domain average of per-symbol SNRs mapped back to one SNR.

    Returns (effective linear SNR, saturated flag); the mean capacity is
    clamped just below 2 bits before inversion when the stream saturates.
    """
    mean_bits = float(np.mean(phi_s(np.asarray(per_symbol_snr, dtype=float))))
    saturated = mean_bits > SYMBOL_MEAN_CAPACITY_CLAMP
    if saturated:
        mean_bits = SYMBOL_MEAN_CAPACITY_CLAMP
    return phi_s_inv(mean_bits), saturated


def effective_snr_symbols(gamma, frames):
    """Effective linear SNR of the symbol stream over a frame.

    Maps each polarization's per-symbol SNRs through the symbol capacity,
    averages, inverts, then keeps the worse of the two polarizations.
    """
    snr = mrc_snr_per_symbol(gamma, frames)
    eff = [symbol_stream_effective_snr(snr[:, k])[0] for k in (0, 1)]
    return min(eff)


def effective_snr_polarization(gamma, frames, symbol_energy=1.0):
    """Effective linear SNR of the polarization stream over a frame.

    Averages the per-snapshot polarization capacity bound and inverts it
    through the polarization capacity law, clamping the mean into [0, 1).
    """
    frames = np.asarray(frames)
    bits = pmod_ip_bound(gamma, symbol_energy, frames[:, :, 0], frames[:, :, 1])
    mean_bits = float(np.mean(bits))
    mean_bits = min(max(mean_bits, 0.0), POLARIZATION_MEAN_CAPACITY_CLAMP)
    return phi_p_inv(mean_bits)


def effective_snr_pair(gamma, frames, symbol_energy=1.0):
    """Both effective SNRs of a frame in dB, with saturation flags."""
    frames = np.asarray(frames)
    snr = mrc_snr_per_symbol(gamma, frames)
    eff_s = []
    sat_s = False
    for k in (0, 1):
        eff, saturated = symbol_stream_effective_snr(snr[:, k])
        eff_s.append(eff)
        sat_s = sat_s or saturated
    bits = pmod_ip_bound(gamma, symbol_energy, frames[:, :, 0], frames[:, :, 1])
    mean_bits = float(np.mean(bits))
    sat_p = mean_bits > POLARIZATION_MEAN_CAPACITY_CLAMP
    mean_bits = min(max(mean_bits, 0.0), POLARIZATION_MEAN_CAPACITY_CLAMP)
    return EffectiveSnrPair(
        symbols_db=lin_to_db(min(eff_s)),
        polarization_db=lin_to_db(phi_p_inv(mean_bits)),
        symbols_saturated=sat_s,
        polarization_saturated=sat_p,
    )


def predict_decode(effective_snr_db, mcs):
    """True (ACK) when the codeword decodes: effective SNR >= threshold."""
    return effective_snr_db >= mcs.threshold_db
