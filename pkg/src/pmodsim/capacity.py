"""Capacity laws of the dual-polarized QPSK link.

Closed-form exponential capacity fits for the two bit streams (constellation
symbols and polarization hops), their inverses, the per-snapshot polarization
capacity bound, Monte Carlo mutual-information oracles used to validate the
fits, and the nonlinear least-squares routine that estimates fit coefficients
from sampled capacity curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "QPSK",
    "SYMBOL_CAPACITY_MAX",
    "POLARIZATION_CAPACITY_MAX",
    "SaturationError",
    "FitError",
    "ExpFitModel",
    "phi_s",
    "phi_p",
    "phi_s_inv",
    "phi_p_inv",
    "pmod_ip_bound",
    "diagonal_ip_bound",
    "mc_polarization_mi",
    "mc_polarization_mi_ci",
    "mc_qpsk_mi",
    "mc_qpsk_mi_ci",
    "fit_exponential_capacity",
]

# unit-energy QPSK constellation
QPSK = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)

# symbol-capacity fit: 2*(1 - a1*e^(-b1*g) - a2*e^(-b2*g)) with a2 = 1 - a1
_SYM_A = (0.8551, 0.1449)
_SYM_B = (0.5718, 1.55)
SYMBOL_CAPACITY_MAX = 2.0

# polarization-capacity fit: 1 - e^(-1.30*g)
_POL_RATE = 1.30
POLARIZATION_CAPACITY_MAX = 1.0


class SaturationError(ValueError):
    """Capacity at or beyond the asymptote requested from an inverse."""


class FitError(RuntimeError):
    """Curve fit failed. ``model`` carries the best fit found, if any."""

    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model


def _check_nonneg_snr(gamma):
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("linear SNR must be nonnegative")


def phi_s(gamma):
    """QPSK constrained capacity [bits/symbol] at linear SNR ``gamma``.

    Strictly increasing, 0 at gamma=0, saturates at 2 bits. Accepts scalars
    or arrays.
    """
    _check_nonneg_snr(gamma)
    g = np.asarray(gamma, dtype=float)
    # expm1 form of 2*(1 - a1*e^(-b1 g) - a2*e^(-b2 g)): exact zero at g=0
    out = 2.0 * (-_SYM_A[0] * np.expm1(-_SYM_B[0] * g) - _SYM_A[1] * np.expm1(-_SYM_B[1] * g))
    return out if out.ndim else float(out)


def phi_p(gamma):
    """Polarization-bit capacity [bits/symbol] at linear SNR ``gamma``.

    Strictly increasing, 0 at gamma=0, saturates at 1 bit.
    """
    _check_nonneg_snr(gamma)
    g = np.asarray(gamma, dtype=float)
    out = -np.expm1(-_POL_RATE * g)
    return out if out.ndim else float(out)


def _phi_s_scalar(g):
    return 2.0 * (-_SYM_A[0] * math.expm1(-_SYM_B[0] * g)
                  - _SYM_A[1] * math.expm1(-_SYM_B[1] * g))


def _phi_s_slope(g):
    return 2.0 * (_SYM_A[0] * _SYM_B[0] * math.exp(-_SYM_B[0] * g)
                  + _SYM_A[1] * _SYM_B[1] * math.exp(-_SYM_B[1] * g))


def phi_s_inv(bits, tol=1e-9):
    """Linear SNR at which the symbol stream reaches ``bits`` of capacity.

    The two-exponential sum has no closed-form inverse, so this runs Newton
    iteration safeguarded by bisection on the bracket [0, 1e4] (expanded if
    ever needed). Converges to |phi_s(g) - bits| <= tol.
    """
    b = float(bits)
    if b < 0.0:
        raise ValueError("capacity must be nonnegative")
    if b >= SYMBOL_CAPACITY_MAX:
        raise SaturationError("symbol capacity saturates at 2 bits")
    if b == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0e4
    while _phi_s_scalar(hi) < b:
        hi *= 2.0
        if hi > 1.0e12:
            raise SaturationError("capacity %r not reachable" % b)
    g = 1.0
    converged = False
    for _ in range(200):
        f = _phi_s_scalar(g) - b
        if abs(f) <= tol:
            converged = True
        if f > 0.0:
            hi = g
        else:
            lo = g
        slope = _phi_s_slope(g)
        # Newton step only while the slope can absorb it without overflow
        nxt = g - f / slope if abs(f) < slope * 1e9 else None
        if nxt is None or not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        # keep polishing past tol so the SNR itself converges, not just bits
        if converged and abs(nxt - g) <= 1e-12 * max(g, 1.0):
            return nxt
        g = nxt
    if converged:
        return g
    raise ArithmeticError("phi_s_inv did not converge for bits=%r" % b)


def phi_p_inv(bits):
    """Closed-form inverse of the polarization capacity: -ln(1-bits)/1.30."""
    b = float(bits)
    if b < 0.0:
        raise ValueError("capacity must be nonnegative")
    if b >= POLARIZATION_CAPACITY_MAX:
        raise SaturationError("polarization capacity saturates at 1 bit")
    return -np.log1p(-b) / _POL_RATE


def pmod_ip_bound(gamma, symbol_energy, h1, h2):
    """Per-snapshot polarization-bit capacity bound from the column gap.

    log2(2 / (1 + exp(-gamma*|s|^2*||h1-h2||^2))), always in [0, 1]; zero
    exactly when the two columns coincide or the SNR is zero. ``h1``/``h2``
    broadcast over leading axes (last axis = receive polarization).
    """
    if gamma < 0:
        raise ValueError("linear SNR must be nonnegative")
    if symbol_energy <= 0:
        raise ValueError("symbol energy must be positive")
    gap = np.sum(np.abs(np.asarray(h1) - np.asarray(h2)) ** 2, axis=-1)
    out = np.log2(2.0 / (1.0 + np.exp(-gamma * symbol_energy * gap)))
    return out if np.ndim(out) else float(out)


def diagonal_ip_bound(gamma):
    """Polarization capacity bound on the normalized diagonal channel.

    Special case of :func:`pmod_ip_bound` for sqrt(2)*I columns and unit
    symbol energy: log2(2 / (1 + exp(-4*gamma))).
    """
    g = np.asarray(gamma, dtype=float)
    out = np.log2(2.0 / (1.0 + np.exp(-4.0 * g)))
    return out if out.ndim else float(out)


def _posterior_entropy_bits(logp):
    """Shannon entropy [bits] of the posterior rows given unnormalized logs."""
    logp = logp - logp.max(axis=1, keepdims=True)
    p = np.exp(logp)
    p /= p.sum(axis=1, keepdims=True)
    plogp = np.where(p > 0.0, p * np.log2(np.maximum(p, 1e-300)), 0.0)
    return -plogp.sum(axis=1)


def _polarization_mi_samples(gamma, channel, constellation, n_samples, seed):
    """Per-sample information [bits] carried by the polarization index.

    Transmits (s, l) uniformly through y = sqrt(gamma)*h_l*s + w with
    w ~ CN(0, I2); the detector resolves the index with the symbol known,
    so each sample contributes 1 - H(l | y, s).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if gamma < 0:
        raise ValueError("linear SNR must be nonnegative")
    rng = np.random.default_rng(seed)
    h = np.asarray(channel, dtype=complex)
    cols = np.stack([h[:, 0], h[:, 1]])                              # (2, 2)
    s = np.asarray(constellation)[rng.integers(0, len(constellation), n_samples)]
    l = rng.integers(0, 2, n_samples)
    w = (rng.standard_normal((n_samples, 2))
         + 1j * rng.standard_normal((n_samples, 2))) / np.sqrt(2.0)
    amp = np.sqrt(gamma)
    y = amp * cols[l] * s[:, None] + w
    logp = np.stack(
        [-np.sum(np.abs(y - amp * cols[j] * s[:, None]) ** 2, axis=1) for j in (0, 1)],
        axis=1,
    )
    return 1.0 - _posterior_entropy_bits(logp)


def mc_polarization_mi(gamma, channel, constellation=QPSK, n_samples=100_000, seed=0):
    """Monte Carlo estimate of the polarization-index mutual information.

    Index prior entropy minus the mean posterior entropy at the detector,
    estimated over ``n_samples`` random transmissions. Deterministic for a
    fixed seed; the estimate is unbiased for I(y; l | s).
    """
    return float(np.mean(_polarization_mi_samples(gamma, channel, constellation,
                                                  n_samples, seed)))


def mc_polarization_mi_ci(gamma, channel, constellation=QPSK, n_samples=100_000, seed=0):
    """Same estimate plus its 95% confidence half-width."""
    vals = _polarization_mi_samples(gamma, channel, constellation, n_samples, seed)
    return float(vals.mean()), float(1.96 * vals.std(ddof=1) / np.sqrt(len(vals)))


def _qpsk_mi_samples(gamma, n_samples, seed):
    """Per-sample information [bits] of QPSK on the scalar AWGN channel."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if gamma < 0:
        raise ValueError("linear SNR must be nonnegative")
    rng = np.random.default_rng(seed)
    pts = np.sqrt(gamma) * QPSK
    idx = rng.integers(0, len(pts), n_samples)
    w = (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)) / np.sqrt(2.0)
    y = pts[idx] + w
    logp = -np.abs(y[:, None] - pts[None, :]) ** 2
    return 2.0 - _posterior_entropy_bits(logp)


def mc_qpsk_mi(gamma, n_samples=100_000, seed=0):
    """Monte Carlo QPSK constrained capacity on the scalar AWGN channel."""
    return float(np.mean(_qpsk_mi_samples(gamma, n_samples, seed)))


def mc_qpsk_mi_ci(gamma, n_samples=100_000, seed=0):
    """Same estimate plus its 95% confidence half-width."""
    vals = _qpsk_mi_samples(gamma, n_samples, seed)
    return float(vals.mean()), float(1.96 * vals.std(ddof=1) / np.sqrt(len(vals)))


@dataclass(frozen=True)
class ExpFitModel:
    """Saturating multi-exponential capacity model.

    bits(g) = saturation * (1 - sum_i amp_i * exp(-rate_i * g)) with the
    amplitudes summing to one, so the model is zero at g=0 and increases
    monotonically toward ``saturation``.
    """

    weights: tuple[tuple[float, float], ...]   # (amplitude, decay rate) pairs
    saturation: float
    residual_rms: float

    def __call__(self, gamma):
        g = np.asarray(gamma, dtype=float)
        acc = np.zeros_like(g)
        for amp, rate in self.weights:
            acc += amp * np.exp(-rate * g)
        out = self.saturation * (1.0 - acc)
        return out if out.ndim else float(out)


def fit_exponential_capacity(samples, n_terms):
    """Fit a saturating sum of exponentials to sampled capacity points.

    Args:
        samples: iterable of (linear SNR, bits) pairs; at least 10 points
            spanning 20 dB or more of SNR.
        n_terms: number of exponential terms.

    Returns:
        ExpFitModel with amplitudes summing to one and positive decay rates.

    Raises:
        FitError: degenerate input data or no convergence within the
            iteration cap (the best model so far rides on the exception).
    """
    pts = np.asarray([(float(g), float(b)) for g, b in samples], dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 10:
        raise ValueError("need at least 10 (snr, bits) samples")
    gammas, bits = pts[:, 0], pts[:, 1]
    if np.any(gammas < 0):
        raise ValueError("linear SNR must be nonnegative")
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    pos = gammas[gammas > 0]
    # 20 dB span among the positive samples; a gamma=0 point does not count
    if pos.size == 0 or pos.max() / pos.min() < 100.0 * (1.0 - 1e-9):
        raise ValueError("samples must span at least 20 dB of SNR")
    if np.ptp(bits) < 1e-9 or bits.max() <= 0:
        raise FitError("degenerate samples: no capacity growth to fit")

    # free parameters: softmax logits for amplitudes (first pinned to 0),
    # log decay rates, log saturation
    rate0 = np.geomspace(0.1, 3.0, n_terms)
    p0 = np.concatenate([np.zeros(n_terms - 1), np.log(rate0),
                         [np.log(max(bits.max(), 1e-3))]])

    def unpack(p):
        logits = np.concatenate([[0.0], p[:n_terms - 1]])
        amps = np.exp(logits - logits.max())
        amps /= amps.sum()
        rates = np.exp(p[n_terms - 1:2 * n_terms - 1])
        sat = np.exp(p[-1])
        return amps, rates, sat

    def residuals(p):
        amps, rates, sat = unpack(p)
        model = sat * (1.0 - np.exp(-np.outer(gammas, rates)) @ amps)
        return model - bits

    sol = least_squares(residuals, p0, method="lm", max_nfev=20_000)
    amps, rates, sat = unpack(sol.x)
    order = np.argsort(rates)
    model = ExpFitModel(
        weights=tuple((float(amps[i]), float(rates[i])) for i in order),
        saturation=float(sat),
        residual_rms=float(np.sqrt(np.mean(sol.fun ** 2))),
    )
    if not np.all(np.isfinite(sol.x)):
        raise FitError("fit diverged", model=None)
    if sol.status == 0:
        raise FitError("no convergence within the iteration cap", model=model)
    return model
