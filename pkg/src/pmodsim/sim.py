"""Frame-loop campaign engine.

Per frame: draw channel snapshots, pick mode and MCS from round-trip-delayed
feedback, predict each codeword's decode outcome from the current effective
SNRs, queue the receiver report, and update the transmit margins when the
report finally arrives. A frame counts toward spectral efficiency only when
every transmitted codeword decodes.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import phy
from .adaptation import FeedbackDelayLine, next_margin
from .channel import ChannelConfig, ChannelGenerator
from .modes import (MimoMode, mode_effective_snrs, prediction_from_snrs,
                    select_mode, stream_count)
from .units import db_to_lin

__all__ = [
    "SimConfig",
    "FrameReport",
    "CampaignMetrics",
    "iter_frames",
    "run_point",
    "run_campaign",
]


@dataclass(frozen=True)
class SimConfig:
    """Everything one campaign needs; defaults mirror the full-scale setup."""

    avg_snr_db_list: tuple[float, ...] = (0.0,)
    frames_per_point: int = 40_000
    symbols_per_frame: int = 2_560
    frame_duration_s: float = 0.08
    mu: float = 0.05
    p0: float = 0.01
    delay_frames: int = 7
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    modes: tuple[MimoMode, ...] = (MimoMode.PMOD,)
    master_seed: int = 0
    symbol_energy: float = 1.0
    margin_trace_decimation: int = 100

    def symbol_rate_hz(self):
        return self.symbols_per_frame / self.frame_duration_s

    def validate(self):
        if not self.avg_snr_db_list:
            raise ValueError("avg_snr_db_list must not be empty")
        if self.frames_per_point < 1 or self.symbols_per_frame < 1:
            raise ValueError("frames_per_point and symbols_per_frame must be positive")
        if self.frame_duration_s <= 0:
            raise ValueError("frame_duration_s must be positive")
        if not self.modes:
            raise ValueError("at least one mode must be enabled")
        if self.delay_frames < 0:
            raise ValueError("delay_frames must be nonnegative")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if not 0.0 < self.p0 < 1.0 or self.mu <= 0.0:
            raise ValueError("need 0 < p0 < 1 and mu > 0")


@dataclass(frozen=True)
class FrameReport:
    """What one simulated frame did; consumed by tests and metrics."""

    index: int
    mode: MimoMode
    eff_snrs_db: tuple[float, ...]     # transmitted mode, current frame
    rates: tuple[float, ...]           # coding rate per stream
    stream_se: tuple[float, ...]       # bits/symbol per stream if decoded
    naks: tuple[int, ...]              # 1 = codeword failed
    below_range: tuple[bool, ...]
    cold_start: bool
    symbols_saturated: bool
    polarization_saturated: bool


@dataclass
class _ModeFeedback:
    """Receiver report traveling through the feedback delay line."""

    index: int
    eff_snrs_db: dict
    mode: MimoMode | None = None
    naks: tuple[int, ...] | None = None


def _cold_start_feedback(enabled):
    """Warmup stand-in: floor SNRs force the most protected selections."""
    return _ModeFeedback(index=-1,
                         eff_snrs_db={m: (-math.inf,) * stream_count(m) for m in enabled})


def point_seed(config, point_index):
    """Deterministic per-SNR-point seed; independent of the mode set so the
    same channel realization underlies every mode-set comparison."""
    return np.random.SeedSequence((config.master_seed, config.channel.seed,
                                   int(point_index)))


def iter_frames(config, snr_db, point_index=0, channel_override=None):
    """Yield (FrameReport, live margins dict) pairs for one average-SNR point.

    ``channel_override(frame_index, snapshots) -> snapshots`` lets tests
    perturb specific frames without touching the random stream. The margins
    dict is the controller's working state; copy it if you keep it.
    """
    config.validate()
    gamma = db_to_lin(snr_db)
    enabled = tuple(config.modes)
    gen = ChannelGenerator(config.channel, symbol_rate_hz=config.symbol_rate_hz(),
                           seed=point_seed(config, point_index))
    margins = {m: [0.0] * stream_count(m) for m in enabled}
    delay = FeedbackDelayLine(config.delay_frames,
                              cold_start=_cold_start_feedback(enabled))

    for i in range(config.frames_per_point):
        frames = gen.next_frame(config.symbols_per_frame)
        if channel_override is not None:
            frames = channel_override(i, frames)

        # receiver side: effective SNRs of every enabled mode, current frame
        eff = {}
        sat_s = sat_p = False
        for m in enabled:
            if m is MimoMode.PMOD:
                pair = phy.effective_snr_pair(gamma, frames, config.symbol_energy)
                eff[m] = (pair.symbols_db, pair.polarization_db)
                sat_s, sat_p = pair.symbols_saturated, pair.polarization_saturated
            else:
                eff[m] = mode_effective_snrs(m, gamma, frames, config.symbol_energy)

        record = _ModeFeedback(index=i, eff_snrs_db=eff)
        fb = delay.push_pop(record)

        # transmitter side: selection sees only the delayed report
        predictions = [prediction_from_snrs(m, fb.eff_snrs_db[m], margins[m])
                       for m in enabled]
        sel_mode = select_mode(predictions)
        sel = next(p for p in predictions if p.mode is sel_mode)

        # decode prediction against today's channel
        naks = tuple(0 if phy.predict_decode(eff[sel_mode][j], sel.mcs[j]) else 1
                     for j in range(stream_count(sel_mode)))
        record.mode = sel_mode
        record.naks = naks

        # the report that arrived this frame drives the margin update
        if fb.mode is not None:
            for j, nak in enumerate(fb.naks):
                margins[fb.mode][j] = next_margin(margins[fb.mode][j], nak,
                                                  config.mu, config.p0)

        yield FrameReport(
            index=i,
            mode=sel_mode,
            eff_snrs_db=eff[sel_mode],
            rates=tuple(e.coding_rate for e in sel.mcs),
            stream_se=tuple(e.spectral_efficiency for e in sel.mcs),
            naks=naks,
            below_range=sel.below_range,
            cold_start=fb.index < 0,
            symbols_saturated=sat_s,
            polarization_saturated=sat_p,
        ), margins


@dataclass
class CampaignMetrics:
    """Aggregated outcome of one (mode set, average SNR) simulation."""

    snr_db: float
    modes: tuple[str, ...]
    frames: int
    avg_spectral_efficiency: float
    fer: float                       # cumulative, whole run
    fer_last_half: float             # windowed, second half of the run
    fer_s: float                     # any symbol codeword failed
    fer_p: float                     # polarization codeword failed (PMOD frames)
    nak_rate_s_last_half: float
    nak_rate_p_last_half: float
    mcs_share_s: dict
    mcs_share_p: dict
    top_mcs_s: float
    top_mcs_p: float
    mode_share: dict
    margin_trace: dict
    below_range_s: int
    below_range_p: int
    clamped_s: int
    clamped_p: int


def run_point(config, snr_db, point_index=0, channel_override=None):
    """Simulate ``frames_per_point`` frames at one average SNR."""
    m_frames = config.frames_per_point
    half_start = m_frames // 2
    se_sum = 0.0
    err_frames = 0
    err_frames_half = 0
    sym_nak_frames = 0
    sym_nak_half = 0
    pol_frames = 0
    pol_nak_frames = 0
    pol_nak_half = 0
    half_frames = m_frames - half_start
    mcs_s = Counter()
    mcs_p = Counter()
    mode_hist = Counter()
    below_s = below_p = 0
    clamped_s = clamped_p = 0
    trace = {m.value: [] for m in config.modes}

    for report, margins in iter_frames(config, snr_db, point_index, channel_override):
        failed = any(report.naks)
        if not failed:
            se_sum += sum(report.stream_se)
        err_frames += failed
        in_half = report.index >= half_start
        err_frames_half += failed and in_half

        if report.mode is MimoMode.PMOD:
            sym_nak = report.naks[0] == 1
            pol_nak = report.naks[1] == 1
            pol_frames += 1
            pol_nak_frames += pol_nak
            pol_nak_half += pol_nak and in_half
            mcs_p[report.rates[1]] += 1
            below_p += report.below_range[1]
            mcs_s[report.rates[0]] += 1
            below_s += report.below_range[0]
        else:
            sym_nak = any(report.naks)
            for rate in report.rates:
                mcs_s[rate] += 1
            below_s += any(report.below_range)
        sym_nak_frames += sym_nak
        sym_nak_half += sym_nak and in_half

        clamped_s += report.symbols_saturated
        clamped_p += report.polarization_saturated
        mode_hist[report.mode.value] += 1
        if report.index % config.margin_trace_decimation == 0:
            for m, values in margins.items():
                trace[m.value].append(tuple(values))

    def share(counter, total):
        return {k: v / total for k, v in sorted(counter.items())} if total else {}

    def top(counter):
        return max(counter.items(), key=lambda kv: kv[1])[0] if counter else float("nan")

    sym_codewords = sum(mcs_s.values())
    return CampaignMetrics(
        snr_db=float(snr_db),
        modes=tuple(m.value for m in config.modes),
        frames=m_frames,
        avg_spectral_efficiency=se_sum / m_frames,
        fer=err_frames / m_frames,
        fer_last_half=err_frames_half / half_frames,
        fer_s=sym_nak_frames / m_frames,
        fer_p=pol_nak_frames / pol_frames if pol_frames else float("nan"),
        nak_rate_s_last_half=sym_nak_half / half_frames,
        nak_rate_p_last_half=pol_nak_half / half_frames if pol_frames else float("nan"),
        mcs_share_s=share(mcs_s, sym_codewords),
        mcs_share_p=share(mcs_p, sum(mcs_p.values())),
        top_mcs_s=top(mcs_s),
        top_mcs_p=top(mcs_p),
        mode_share=share(mode_hist, m_frames),
        margin_trace=trace,
        below_range_s=below_s,
        below_range_p=below_p,
        clamped_s=clamped_s,
        clamped_p=clamped_p,
    )


def _point_job(args):
    config, snr_db, point_index = args
    return run_point(config, snr_db, point_index)


def run_campaign(config, jobs=1):
    """Run every SNR point of the campaign; output order matches the input.

    Points are independent (seeds derive from the point index), so ``jobs``
    workers can run them concurrently without changing any result.
    """
    config.validate()
    work = [(config, snr, i) for i, snr in enumerate(config.avg_snr_db_list)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_point_job, work))
    return [_point_job(w) for w in work]
