"""Campaign configuration files.

One TOML document per campaign with [link], [channel], [controller], [modes]
and [output] sections. Unknown keys are rejected so typos surface instead of
silently falling back to defaults. A campaign expands into one SimConfig per
enabled mode set; every output file embeds the resolved, serialized campaign
for reproducibility.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import ChannelConfig
from .modes import MimoMode
from .sim import SimConfig

__all__ = ["ConfigError", "CampaignSpec", "parse_campaign", "parse_campaign_text",
           "serialize_campaign", "mode_set_label"]


class ConfigError(ValueError):
    """Malformed or inconsistent campaign configuration."""


_LINK_KEYS = {"snr_db", "frames_per_point", "symbols_per_frame",
              "frame_duration_s", "master_seed"}
_CHANNEL_KEYS = {"k_factor", "xpd_db", "doppler_hz", "carrier_hz",
                 "speed_kmh", "seed"}
_CONTROLLER_KEYS = {"mu", "p0", "delay_frames"}
_MODES_KEYS = {"sets"}
_OUTPUT_KEYS = {"margin_trace_decimation"}
_SECTIONS = {"link": _LINK_KEYS, "channel": _CHANNEL_KEYS,
             "controller": _CONTROLLER_KEYS, "modes": _MODES_KEYS,
             "output": _OUTPUT_KEYS}


@dataclass(frozen=True)
class CampaignSpec:
    """Parsed campaign: shared link/channel/controller plus the mode sets."""

    snr_db: tuple[float, ...]
    frames_per_point: int = 40_000
    symbols_per_frame: int = 2_560
    frame_duration_s: float = 0.08
    master_seed: int = 0
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    mu: float = 0.05
    p0: float = 0.01
    delay_frames: int = 7
    mode_sets: tuple[tuple[MimoMode, ...], ...] = ((MimoMode.PMOD,),)
    margin_trace_decimation: int = 100

    def sim_config(self, mode_set):
        return SimConfig(
            avg_snr_db_list=self.snr_db,
            frames_per_point=self.frames_per_point,
            symbols_per_frame=self.symbols_per_frame,
            frame_duration_s=self.frame_duration_s,
            mu=self.mu,
            p0=self.p0,
            delay_frames=self.delay_frames,
            channel=self.channel,
            modes=tuple(mode_set),
            master_seed=self.master_seed,
            margin_trace_decimation=self.margin_trace_decimation,
        )

    def sim_configs(self):
        """(label, SimConfig) per mode set, in file order."""
        return [(mode_set_label(ms), self.sim_config(ms)) for ms in self.mode_sets]


def mode_set_label(mode_set):
    return "+".join(m.value for m in mode_set)


def _reject_unknown(section, table, allowed):
    for key in table:
        if key not in allowed:
            raise ConfigError("unknown key '%s' in [%s]" % (key, section))


def _number(section, table, key, default, minimum=None, integer=False):
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("[%s] %s must be a number" % (section, key))
    if integer:
        if int(value) != value:
            raise ConfigError("[%s] %s must be an integer" % (section, key))
        value = int(value)
    else:
        value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigError("[%s] %s must be >= %s" % (section, key, minimum))
    return value


def parse_campaign_text(text):
    """Parse a campaign TOML document from a string."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("invalid TOML: %s" % exc) from exc

    for section in doc:
        if section not in _SECTIONS:
            raise ConfigError("unknown section [%s]" % section)
        if not isinstance(doc[section], dict):
            raise ConfigError("[%s] must be a table" % section)
        _reject_unknown(section, doc[section], _SECTIONS[section])

    link = doc.get("link", {})
    snr = link.get("snr_db")
    if (not isinstance(snr, list) or not snr
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in snr)):
        raise ConfigError("[link] snr_db must be a non-empty list of numbers")

    chan = doc.get("channel", {})
    doppler = chan.get("doppler_hz")
    if doppler is not None:
        doppler = _number("channel", chan, "doppler_hz", None, minimum=0.0)
    channel = ChannelConfig(
        rician_k_copolar=_number("channel", chan, "k_factor",
                                 ChannelConfig.rician_k_copolar, minimum=0.0),
        xpd_db=_number("channel", chan, "xpd_db", ChannelConfig.xpd_db),
        doppler_hz=doppler,
        carrier_hz=_number("channel", chan, "carrier_hz",
                           ChannelConfig.carrier_hz, minimum=0.0),
        speed_kmh=_number("channel", chan, "speed_kmh",
                          ChannelConfig.speed_kmh, minimum=0.0),
        seed=_number("channel", chan, "seed", ChannelConfig.seed,
                     minimum=0, integer=True),
    )

    ctrl = doc.get("controller", {})
    modes_tbl = doc.get("modes", {})
    sets_raw = modes_tbl.get("sets", [["PMOD"]])
    if not isinstance(sets_raw, list) or not sets_raw:
        raise ConfigError("[modes] sets must be a non-empty list of mode lists")
    mode_sets = []
    for one in sets_raw:
        if not isinstance(one, list) or not one:
            raise ConfigError("[modes] each set must be a non-empty list")
        try:
            mode_sets.append(tuple(MimoMode(name) for name in one))
        except ValueError as exc:
            raise ConfigError("unknown mode in [modes] sets: %s" % exc) from exc

    out = doc.get("output", {})
    return CampaignSpec(
        snr_db=tuple(float(v) for v in snr),
        frames_per_point=_number("link", link, "frames_per_point", 40_000,
                                 minimum=1, integer=True),
        symbols_per_frame=_number("link", link, "symbols_per_frame", 2_560,
                                  minimum=1, integer=True),
        frame_duration_s=_number("link", link, "frame_duration_s", 0.08,
                                 minimum=1e-9),
        master_seed=_number("link", link, "master_seed", 0, minimum=0, integer=True),
        channel=channel,
        mu=_number("controller", ctrl, "mu", 0.05, minimum=1e-12),
        p0=_number("controller", ctrl, "p0", 0.01, minimum=1e-12),
        delay_frames=_number("controller", ctrl, "delay_frames", 7,
                             minimum=0, integer=True),
        mode_sets=tuple(mode_sets),
        margin_trace_decimation=_number("output", out, "margin_trace_decimation",
                                        100, minimum=1, integer=True),
    )


def parse_campaign(path):
    """Parse a campaign TOML file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_campaign_text(fh.read())


def _toml_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"%s"' % value
    if isinstance(value, (list, tuple)):
        return "[%s]" % ", ".join(_toml_value(v) for v in value)
    raise TypeError("cannot serialize %r" % (value,))


def serialize_campaign(spec):
    """Render a CampaignSpec back to TOML; parsing the output is lossless."""
    chan = spec.channel
    lines = [
        "[link]",
        "snr_db = %s" % _toml_value(list(spec.snr_db)),
        "frames_per_point = %d" % spec.frames_per_point,
        "symbols_per_frame = %d" % spec.symbols_per_frame,
        "frame_duration_s = %s" % _toml_value(spec.frame_duration_s),
        "master_seed = %d" % spec.master_seed,
        "",
        "[channel]",
        "k_factor = %s" % _toml_value(chan.rician_k_copolar),
        "xpd_db = %s" % _toml_value(chan.xpd_db),
    ]
    if chan.doppler_hz is not None:
        lines.append("doppler_hz = %s" % _toml_value(chan.doppler_hz))
    lines += [
        "carrier_hz = %s" % _toml_value(chan.carrier_hz),
        "speed_kmh = %s" % _toml_value(chan.speed_kmh),
        "seed = %d" % chan.seed,
        "",
        "[controller]",
        "mu = %s" % _toml_value(spec.mu),
        "p0 = %s" % _toml_value(spec.p0),
        "delay_frames = %d" % spec.delay_frames,
        "",
        "[modes]",
        "sets = %s" % _toml_value([[m.value for m in ms] for ms in spec.mode_sets]),
        "",
        "[output]",
        "margin_trace_decimation = %d" % spec.margin_trace_decimation,
        "",
    ]
    return "\n".join(lines)
