"""Open-loop MIMO transmission modes and predicted-throughput switching.

Four modes share the dual-polarized link: single polarization (SISO),
polarization-time block coding (OPTBC), spatial multiplexing across
polarizations (VBLAST) and polarized modulation (PMOD). Each mode reduces a
frame to one effective SNR per coded stream; the transmitter switches to
whichever mode predicts the highest spectral efficiency from the delayed
feedback. The OPTBC combining gain and the VBLAST per-layer MMSE SINR are
standard-receiver substitutes and are isolated here so alternates can be
swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import phy
from .adaptation import (McsEntry, POLARIZATION_MCS_TABLE, SYMBOL_MCS_TABLE,
                         lut_lookup)
from .units import lin_to_db

__all__ = [
    "MimoMode",
    "MODE_PRIORITY",
    "ModePrediction",
    "stream_count",
    "mode_effective_snrs",
    "prediction_from_snrs",
    "pmod_prediction",
    "siso_prediction",
    "optbc_prediction",
    "vblast_prediction",
    "select_mode",
]


class MimoMode(Enum):
    SISO = "SISO"
    OPTBC = "OPTBC"
    VBLAST = "VBLAST"
    PMOD = "PMOD"


# tie-break order for equal predicted spectral efficiency
MODE_PRIORITY = (MimoMode.PMOD, MimoMode.VBLAST, MimoMode.OPTBC, MimoMode.SISO)

_STREAMS = {MimoMode.SISO: 1, MimoMode.OPTBC: 1, MimoMode.VBLAST: 2, MimoMode.PMOD: 2}


def stream_count(mode):
    """Number of independently coded streams the mode transmits."""
    return _STREAMS[mode]


def stream_tables(mode):
    """Lookup table per stream; only the PMOD hop stream uses the 1-bit set."""
    if mode is MimoMode.PMOD:
        return (SYMBOL_MCS_TABLE, POLARIZATION_MCS_TABLE)
    return (SYMBOL_MCS_TABLE,) * _STREAMS[mode]


@dataclass(frozen=True)
class ModePrediction:
    """Per-mode outcome of the link adaptation step."""

    mode: MimoMode
    effective_snrs_db: tuple[float, ...]
    predicted_se: float                    # bits/symbol if every stream decodes
    mcs: tuple[McsEntry, ...]
    below_range: tuple[bool, ...]


def _vblast_layer_sinrs(gamma, frames):
    """Per-symbol linear MMSE SINR of each layer at power gamma/2 per layer.

    Closed form from the 2x2 Gram matrix G = H^H H:
    SINR_k = det(I + c G)/(1 + c G_jj) - 1 with c = gamma/2 and j the other
    layer. Singular or dead channels fall to zero SINR.
    """
    frames = np.asarray(frames)
    h1 = frames[:, :, 0]
    h2 = frames[:, :, 1]
    g11 = np.sum(np.abs(h1) ** 2, axis=1)
    g22 = np.sum(np.abs(h2) ** 2, axis=1)
    g12sq = np.abs(np.sum(np.conj(h1) * h2, axis=1)) ** 2
    c = gamma / 2.0
    det = (1.0 + c * g11) * (1.0 + c * g22) - c * c * g12sq
    sinr1 = det / (1.0 + c * g22) - 1.0
    sinr2 = det / (1.0 + c * g11) - 1.0
    return np.maximum(sinr1, 0.0), np.maximum(sinr2, 0.0)


def mode_effective_snrs(mode, gamma, frames, symbol_energy=1.0):
    """Receiver-side effective SNRs [dB] of one frame for the given mode."""
    frames = np.asarray(frames)
    if mode is MimoMode.PMOD:
        pair = phy.effective_snr_pair(gamma, frames, symbol_energy)
        return (pair.symbols_db, pair.polarization_db)
    if mode is MimoMode.SISO:
        # single transmit and receive polarization: co-polar entry only
        per_symbol = gamma * np.abs(frames[:, 0, 0]) ** 2
        return (lin_to_db(phy.symbol_stream_effective_snr(per_symbol)[0]),)
    if mode is MimoMode.OPTBC:
        # full-diversity combining at half power per branch
        frob = np.sum(np.abs(frames) ** 2, axis=(1, 2))
        per_symbol = gamma * frob / 2.0
        return (lin_to_db(phy.symbol_stream_effective_snr(per_symbol)[0]),)
    if mode is MimoMode.VBLAST:
        sinr1, sinr2 = _vblast_layer_sinrs(gamma, frames)
        return (lin_to_db(phy.symbol_stream_effective_snr(sinr1)[0]),
                lin_to_db(phy.symbol_stream_effective_snr(sinr2)[0]))
    raise ValueError("unknown mode %r" % (mode,))


def prediction_from_snrs(mode, eff_snrs_db, margins_db, tables=None):
    """Predicted spectral efficiency of a mode from (delayed) effective SNRs.

    Each stream's SNR gets its margin added before the table lookup; the
    prediction sums the selected entries' spectral efficiencies. ``tables``
    overrides the built-in per-stream lookup tables.
    """
    if tables is None:
        tables = stream_tables(mode)
    entries = []
    flags = []
    for snr_db, margin_db, table in zip(eff_snrs_db, margins_db, tables):
        entry, below = lut_lookup(table, snr_db + margin_db)
        entries.append(entry)
        flags.append(below)
    return ModePrediction(
        mode=mode,
        effective_snrs_db=tuple(eff_snrs_db),
        predicted_se=sum(e.spectral_efficiency for e in entries),
        mcs=tuple(entries),
        below_range=tuple(flags),
    )


def _predict(mode, gamma, frames, margins_db, symbol_energy=1.0, tables=None):
    snrs = mode_effective_snrs(mode, gamma, frames, symbol_energy)
    return prediction_from_snrs(mode, snrs, margins_db, tables)


def pmod_prediction(gamma, frames, margins_db=(0.0, 0.0), symbol_energy=1.0, tables=None):
    """Polarized modulation: a symbol stream plus a polarization-hop stream."""
    return _predict(MimoMode.PMOD, gamma, frames, margins_db, symbol_energy, tables)


def siso_prediction(gamma, frames, margins_db=(0.0,), tables=None):
    """Single-polarization reference mode."""
    return _predict(MimoMode.SISO, gamma, frames, margins_db, tables=tables)


def optbc_prediction(gamma, frames, margins_db=(0.0,), tables=None):
    """Polarization-time block coding: one stream with full diversity."""
    return _predict(MimoMode.OPTBC, gamma, frames, margins_db, tables=tables)


def vblast_prediction(gamma, frames, margins_db=(0.0, 0.0), tables=None):
    """Spatial multiplexing: two independent streams, one per polarization."""
    return _predict(MimoMode.VBLAST, gamma, frames, margins_db, tables=tables)


def select_mode(predictions, enabled=None):
    """Mode with the highest predicted spectral efficiency.

    Ties break by the fixed priority PMOD > VBLAST > OPTBC > SISO. Passing
    ``enabled`` restricts the choice to that subset.
    """
    pool = list(predictions)
    if enabled is not None:
        pool = [p for p in pool if p.mode in enabled]
    if not pool:
        raise ValueError("no enabled mode to select from")
    best = max(pool, key=lambda p: (p.predicted_se, -MODE_PRIORITY.index(p.mode)))
    return best.mode
