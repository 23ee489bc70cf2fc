"""Dual-LUT MCS selection with adaptive margins and delayed feedback.

One lookup table per bit stream maps effective SNR (plus an adaptive dB
margin) to a coding rate. Margins drift up slowly on ACKs and drop sharply
on NAKs so each stream settles at a target error rate of half the frame
error objective.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, replace

__all__ = [
    "MARGIN_LIMIT_DB",
    "McsEntry",
    "McsTable",
    "SYMBOL_MCS_TABLE",
    "POLARIZATION_MCS_TABLE",
    "AdaptationState",
    "FeedbackRecord",
    "FeedbackDelayLine",
    "lut_lookup",
    "select_mcs",
    "next_margin",
    "update_margins",
    "load_mcs_table",
]

MARGIN_LIMIT_DB = 20.0


@dataclass(frozen=True)
class McsEntry:
    """One selectable scheme: QPSK at a fixed coding rate."""

    coding_rate: float
    spectral_efficiency: float   # bits/symbol carried by the stream
    threshold_db: float


@dataclass(frozen=True)
class McsTable:
    entries: tuple[McsEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("MCS table must not be empty")
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.threshold_db <= prev.threshold_db or cur.coding_rate <= prev.coding_rate:
                raise ValueError("thresholds and rates must increase together")

    @property
    def thresholds_db(self):
        return [e.threshold_db for e in self.entries]


# symbol-stream MCS set: spectral efficiency = 2 * coding rate (QPSK)
SYMBOL_MCS_TABLE = McsTable(entries=(
    McsEntry(0.34, 0.68, -2.15),
    McsEntry(0.40, 0.80, -1.21),
    McsEntry(0.48, 0.96, -0.09),
    McsEntry(0.55, 1.10, 0.83),
    McsEntry(0.63, 1.26, 1.84),
    McsEntry(0.70, 1.40, 2.74),
    McsEntry(0.77, 1.54, 3.67),
    McsEntry(0.83, 1.66, 4.54),
    McsEntry(0.87, 1.74, 5.19),
))

# polarization-stream MCS set: one bit per symbol at most
POLARIZATION_MCS_TABLE = McsTable(entries=(
    McsEntry(0.1, 0.1, -10.91),
    McsEntry(0.2, 0.2, -7.03),
    McsEntry(0.3, 0.3, -5.02),
    McsEntry(0.4, 0.4, -4.00),
    McsEntry(0.5, 0.5, -2.13),
    McsEntry(0.6, 0.6, -1.32),
    McsEntry(0.7, 0.7, -0.55),
    McsEntry(0.8, 0.8, 0.93),
    McsEntry(0.9, 0.9, 2.40),
))


def lut_lookup(table, snr_db):
    """Highest-rate entry whose threshold the SNR meets (boundary counts).

    Below the bottom threshold the lowest-rate entry is returned with the
    below-range flag set; transmission continues regardless.

    Returns:
        (McsEntry, below_range flag)
    """
    idx = bisect_right(table.thresholds_db, snr_db) - 1
    if idx < 0:
        return table.entries[0], True
    return table.entries[idx], False


@dataclass(frozen=True)
class AdaptationState:
    """Controller state: the two stream margins plus loop constants."""

    margin_s_db: float = 0.0
    margin_p_db: float = 0.0
    mu: float = 0.05
    p0: float = 0.01
    delay_frames: int = 7


@dataclass
class FeedbackRecord:
    """Receiver report for one frame, delivered after the round trip.

    ``ack_s``/``ack_p`` carry the decode outcome of each codeword: 1 flags
    an error (NAK), 0 a success (ACK).
    """

    frame_index: int
    eff_snr_s_db: float
    eff_snr_p_db: float
    ack_s: int
    ack_p: int


def select_mcs(state, fb, symbol_table=SYMBOL_MCS_TABLE,
               polarization_table=POLARIZATION_MCS_TABLE):
    """Pick the MCS pair from delayed effective SNRs plus current margins."""
    m_s, _ = lut_lookup(symbol_table, fb.eff_snr_s_db + state.margin_s_db)
    m_p, _ = lut_lookup(polarization_table, fb.eff_snr_p_db + state.margin_p_db)
    return m_s, m_p


def next_margin(margin_db, nak, mu, p0):
    """One margin update step; ``nak`` is 1 on decode failure, else 0."""
    out = margin_db - mu * (nak - 0.5 * p0)
    return min(max(out, -MARGIN_LIMIT_DB), MARGIN_LIMIT_DB)


def update_margins(state, ack_s, ack_p):
    """Advance both margins from their own stream's acknowledgement.

    Small increase (mu*p0/2) on an ACK, sharp decrease (about mu) on a NAK;
    the fixed point sits where each stream errs at rate p0/2. Margins clamp
    at +/-20 dB.
    """
    return replace(
        state,
        margin_s_db=next_margin(state.margin_s_db, ack_s, state.mu, state.p0),
        margin_p_db=next_margin(state.margin_p_db, ack_p, state.mu, state.p0),
    )


class FeedbackDelayLine:
    """FIFO emulating a round trip of ``delay_frames`` on the return channel.

    ``push_pop`` hands in the record produced this frame and returns the one
    produced ``delay_frames`` frames ago (the same record for zero delay).
    During warmup the configured cold-start record is returned instead.
    """

    def __init__(self, delay_frames, cold_start=None):
        if delay_frames < 0:
            raise ValueError("delay must be nonnegative")
        self.delay_frames = int(delay_frames)
        self.cold_start = cold_start
        self._queue = deque()

    def push_pop(self, record):
        self._queue.append(record)
        if len(self._queue) > self.delay_frames:
            return self._queue.popleft()
        if self.cold_start is None:
            raise ValueError("feedback requested during warmup and no "
                             "cold-start record is configured")
        return self.cold_start


def load_mcs_table(path):
    """Read an MCS table from a plain-text file.

    One entry per line: coding_rate, spectral_efficiency, threshold_db,
    separated by commas or whitespace. '#' starts a comment.
    """
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 3:
                raise ValueError("%s:%d: expected 3 columns, got %d"
                                 % (path, lineno, len(parts)))
            rate, se, th = (float(p) for p in parts)
            entries.append(McsEntry(rate, se, th))
    return McsTable(entries=tuple(entries))
