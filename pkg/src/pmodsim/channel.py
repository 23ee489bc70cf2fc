"""Dual-polarized mobile satellite channel generator.

Rician line-of-sight plus a first-order Gauss-Markov diffuse component,
evolving per symbol so frame-level capacity averaging sees the fading.
Cross-polar entries (both LOS and diffuse) sit at the configured XPD below
the co-polar ones; nothing is renormalized, so a unit co-polar gain matches
the SNR definition used by the capacity laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import j0

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelConfig",
    "ChannelGenerator",
    "derive_doppler",
    "static_channel",
    "write_trace",
    "read_trace",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def derive_doppler(speed_kmh, carrier_hz):
    """Maximum Doppler shift [Hz] for a terminal speed and carrier."""
    if speed_kmh < 0 or carrier_hz < 0:
        raise ValueError("speed and carrier frequency must be nonnegative")
    return (speed_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT


@dataclass(frozen=True)
class ChannelConfig:
    """Maritime dual-polarized channel parameters.

    ``rician_k_copolar`` is the linear Rician K factor shared by all entries;
    ``xpd_db`` sets the mean cross-polar power 10^(-xpd/10) relative to the
    co-polar entries. ``doppler_hz=None`` derives the Doppler from speed and
    carrier; ``symbol_rate_hz=None`` defers to the frame geometry of the
    simulation that owns the generator.
    """

    rician_k_copolar: float = 90.0
    xpd_db: float = 6.0
    doppler_hz: float | None = None
    symbol_rate_hz: float | None = None
    carrier_hz: float = 1.6e9
    speed_kmh: float = 10.0
    seed: int = 0

    def resolved_doppler_hz(self):
        if self.doppler_hz is not None:
            return float(self.doppler_hz)
        return derive_doppler(self.speed_kmh, self.carrier_hz)


class ChannelGenerator:
    """Stateful per-symbol snapshot generator (single owner, not thread-safe).

    H_n = sqrt(K/(K+1)) * H_LOS + sqrt(1/(K+1)) * D_n with the diffuse part
    following D_n = rho*D_{n-1} + sqrt(1-rho^2)*W_n, rho = J0(2*pi*fD*Ts).
    State advances across frames, so consecutive frames are continuous.
    """

    def __init__(self, config: ChannelConfig, symbol_rate_hz=None, seed=None):
        self.config = config
        rate = symbol_rate_hz if symbol_rate_hz is not None else config.symbol_rate_hz
        if rate is None or rate <= 0:
            raise ValueError("symbol_rate_hz must be positive")
        doppler = config.resolved_doppler_hz()
        if doppler < 0:
            raise ValueError("doppler_hz must be nonnegative")
        self.rho = float(np.clip(j0(2.0 * math.pi * doppler / rate), 0.0, 1.0))
        self._innovation = math.sqrt(max(0.0, 1.0 - self.rho * self.rho))

        k = config.rician_k_copolar
        if k < 0:
            raise ValueError("rician_k_copolar must be nonnegative")
        if k == 0:
            los_w, diff_w = 0.0, 1.0
        elif math.isinf(k):
            los_w, diff_w = 1.0, 0.0
        else:
            los_w = math.sqrt(1.0 / (1.0 + 1.0 / k))
            diff_w = math.sqrt(1.0 / (1.0 + k))
        x_amp = 10.0 ** (-config.xpd_db / 20.0)  # cross-polar amplitude
        self._los_term = los_w * np.array([[1.0, x_amp], [x_amp, 1.0]], dtype=complex)
        self._diffuse_weight = diff_w
        self._entry_std = np.array([[1.0, x_amp], [x_amp, 1.0]])

        self._rng = np.random.default_rng(config.seed if seed is None else seed)
        self._state = self._draw_gaussian(1)[0]  # stationary start
        self.frames_generated = 0

    def _draw_gaussian(self, n):
        w = (self._rng.standard_normal((n, 2, 2))
             + 1j * self._rng.standard_normal((n, 2, 2))) / math.sqrt(2.0)
        return w * self._entry_std

    def next_frame(self, n_symbols):
        """Generate the next ``n_symbols`` snapshots, shape (N, 2, 2)."""
        if n_symbols < 1:
            raise ValueError("n_symbols must be positive")
        w = self._draw_gaussian(n_symbols)
        diffuse, _ = lfilter([self._innovation], [1.0, -self.rho], w,
                             axis=0, zi=(self.rho * self._state)[None])
        self._state = diffuse[-1]
        self.frames_generated += 1
        return self._los_term[None, :, :] + self._diffuse_weight * diffuse


def static_channel(h, n_symbols):
    """Frame of ``n_symbols`` identical snapshots of the 2x2 matrix ``h``."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValueError("channel matrix must be 2x2")
    return np.broadcast_to(h, (int(n_symbols), 2, 2)).copy()


def write_trace(path, frames):
    """Dump snapshots to a little-endian complex64 trace (4 values each).

    Entry order per snapshot: H11, H12, H21, H22.
    """
    arr = np.ascontiguousarray(np.asarray(frames, dtype=complex).reshape(-1, 2, 2))
    arr.astype("<c8").tofile(path)


def read_trace(path):
    """Read a trace written by :func:`write_trace`; returns (N, 2, 2)."""
    flat = np.fromfile(path, dtype="<c8")
    if flat.size % 4:
        raise ValueError("trace file is truncated")
    return flat.astype(complex).reshape(-1, 2, 2)
