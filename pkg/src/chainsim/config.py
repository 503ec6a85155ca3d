"""Scenario configuration: a strict key-value-with-sections text format.

Sections in square brackets, ``key = value`` lines, ``#`` comments.  Unknown
keys are rejected with the offending line number.  Quantities carry their
unit in the key name; dB-valued fields are suffixed ``_db``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dcf import MacParams
from .radio import RadioConfig, two_ray_rx_power


class ConfigError(ValueError):
    """Malformed scenario configuration; message carries the line number."""


_RADIO_KEYS = {
    "tx_power", "antenna_height_tx", "antenna_height_rx",
    "antenna_gain_tx", "antenna_gain_rx",
    "rx_threshold", "cs_threshold", "transmission_range", "cs_range",
    "capture_sinr", "capture_sinr_db", "noise_floor", "shadowing_sigma_db",
}

_MAC_KEYS = {
    "slot_time_us", "sifs_us", "difs_us", "cw_min", "cw_max", "retry_limit",
    "data_rate_bps", "payload_size_bytes", "phy_overhead_us",
    "ack_duration_us", "queue_capacity",
}

_STUDY_KEYS = {
    "name", "seed",
    # per-study parameters; validated further at dispatch time
    "positions", "links",
    "nodes", "cs_ranges_m", "hops", "width_m", "height_m",
    "signature", "load", "loads", "duration_s",
    "assignments",
    "classes", "samples", "n_nodes", "simulate", "pairs_per_deployment",
    "event_log",
}

_OUTPUT_KEYS = {"dir", "formats"}

_SECTIONS = {
    "radio": _RADIO_KEYS,
    "mac": _MAC_KEYS,
    "study": _STUDY_KEYS,
    "output": _OUTPUT_KEYS,
}

STUDY_NAMES = ("classify", "census", "run-chain", "sweep", "nhop",
               "cross-chain", "flow-in-middle")


@dataclass(frozen=True)
class ScenarioConfig:
    radio: RadioConfig
    mac: MacParams
    study: tuple[tuple[str, str], ...]  # ordered (key, value) pairs, name included
    output_dir: str
    formats: str
    seed: int

    def study_dict(self) -> dict[str, str]:
        return dict(self.study)

    @property
    def study_name(self) -> str:
        return self.study_dict()["name"]


def _parse_sections(text: str, origin: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                raise ConfigError(f"{origin}:{lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"{origin}:{lineno}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTIONS[current]:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        sections[current][key] = (value, lineno)
    return sections


def _number(section: str, key: str, value: str, lineno: int, origin: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{origin}:{lineno}: [{section}] {key} must be numeric, "
                          f"got {value!r}") from None


def _integer(section: str, key: str, value: str, lineno: int, origin: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{origin}:{lineno}: [{section}] {key} must be an integer, "
                          f"got {value!r}") from None


def _resolve_radio(raw: dict[str, tuple[str, int]], origin: str) -> RadioConfig:
    for a, b in (("rx_threshold", "transmission_range"), ("cs_threshold", "cs_range"),
                 ("capture_sinr", "capture_sinr_db")):
        if a in raw and b in raw:
            lineno = raw[b][1]
            raise ConfigError(f"{origin}:{lineno}: give either {a} or {b}, not both")
    cfg = RadioConfig()
    updates: dict[str, float] = {}
    for key, (value, lineno) in raw.items():
        v = _number("radio", key, value, lineno, origin)
        if key == "shadowing_sigma_db":
            updates["shadowing_sigma"] = v
        elif key == "capture_sinr_db":
            updates["capture_sinr"] = 10.0 ** (v / 10.0)
        elif key in ("transmission_range", "cs_range"):
            continue  # resolved below, after the base constants are known
        else:
            updates[key] = v
    try:
        cfg = replace(cfg, **updates)
        # range keys convert through the two-ray law under the final constants
        range_updates = {}
        for key, dest in (("transmission_range", "rx_threshold"), ("cs_range", "cs_threshold")):
            if key in raw:
                value, lineno = raw[key]
                r = _number("radio", key, value, lineno, origin)
                if r <= 0:
                    raise ConfigError(f"{origin}:{lineno}: {key} must be positive")
                range_updates[dest] = two_ray_rx_power(r, cfg)
        if range_updates:
            cfg = replace(cfg, **range_updates)
    except ConfigError:
        raise
    except ValueError as exc:
        lineno = min(l for _, l in raw.values())
        raise ConfigError(f"{origin}:{lineno}: invalid radio constants: {exc}") from None
    return cfg


def _resolve_mac(raw: dict[str, tuple[str, int]], origin: str) -> MacParams:
    rename = {
        "slot_time_us": "slot_time", "sifs_us": "sifs", "difs_us": "difs",
        "data_rate_bps": "data_rate", "payload_size_bytes": "payload_size",
        "phy_overhead_us": "phy_overhead", "ack_duration_us": "ack_duration",
    }
    ints = {"cw_min", "cw_max", "retry_limit", "payload_size_bytes", "queue_capacity"}
    updates = {}
    for key, (value, lineno) in raw.items():
        if key in ints:
            updates[rename.get(key, key)] = _integer("mac", key, value, lineno, origin)
        else:
            updates[rename.get(key, key)] = _number("mac", key, value, lineno, origin)
    try:
        return replace(MacParams(), **updates)
    except ValueError as exc:
        lineno = min(l for _, l in raw.values())
        raise ConfigError(f"{origin}:{lineno}: invalid MAC parameters: {exc}") from None


def parse_config_text(text: str, origin: str = "<config>") -> ScenarioConfig:
    sections = _parse_sections(text, origin)
    radio = _resolve_radio(sections.get("radio", {}), origin)
    mac = _resolve_mac(sections.get("mac", {}), origin)
    study_raw = sections.get("study", {})
    if "name" not in study_raw:
        last = len(text.splitlines())
        raise ConfigError(f"{origin}:{last}: [study] section must set 'name' "
                          f"(one of {', '.join(STUDY_NAMES)})")
    name, name_line = study_raw["name"]
    if name not in STUDY_NAMES:
        raise ConfigError(f"{origin}:{name_line}: unknown study {name!r}")
    seed = 0
    if "seed" in study_raw:
        seed = _integer("study", "seed", *study_raw["seed"], origin)
    study_pairs = tuple(sorted((k, v) for k, (v, _) in study_raw.items()))
    out_raw = sections.get("output", {})
    out_dir = out_raw.get("dir", ("out", 0))[0]
    formats = out_raw.get("formats", ("csv", 0))[0]
    if formats != "csv":
        lineno = out_raw["formats"][1]
        raise ConfigError(f"{origin}:{lineno}: only 'csv' output is supported")
    return ScenarioConfig(radio=radio, mac=mac, study=study_pairs,
                          output_dir=out_dir, formats=formats, seed=seed)


def parse_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file; defaults fill omitted keys."""
    p = Path(path)
    return parse_config_text(p.read_text(), origin=str(p))


def default_config(study_pairs: dict[str, str]) -> ScenarioConfig:
    """Config from defaults plus explicit study parameters (CLI path)."""
    pairs = dict(study_pairs)
    seed = int(pairs.get("seed", "0"))
    pairs.setdefault("seed", str(seed))
    return ScenarioConfig(radio=RadioConfig(), mac=MacParams(),
                          study=tuple(sorted(pairs.items())),
                          output_dir="out", formats="csv", seed=seed)


def format_config(sc: ScenarioConfig) -> str:
    """Fully resolved echo; re-parsing it reproduces an identical config."""
    r = sc.radio
    m = sc.mac
    lines = [
        "[radio]",
        f"tx_power = {r.tx_power!r}",
        f"antenna_height_tx = {r.antenna_height_tx!r}",
        f"antenna_height_rx = {r.antenna_height_rx!r}",
        f"antenna_gain_tx = {r.antenna_gain_tx!r}",
        f"antenna_gain_rx = {r.antenna_gain_rx!r}",
        f"rx_threshold = {r.rx_threshold!r}",
        f"cs_threshold = {r.cs_threshold!r}",
        f"capture_sinr = {r.capture_sinr!r}",
        f"noise_floor = {r.noise_floor!r}",
        f"shadowing_sigma_db = {r.shadowing_sigma!r}",
        "",
        "[mac]",
        f"slot_time_us = {m.slot_time!r}",
        f"sifs_us = {m.sifs!r}",
        f"difs_us = {m.difs!r}",
        f"cw_min = {m.cw_min}",
        f"cw_max = {m.cw_max}",
        f"retry_limit = {m.retry_limit}",
        f"data_rate_bps = {m.data_rate!r}",
        f"payload_size_bytes = {m.payload_size}",
        f"phy_overhead_us = {m.phy_overhead!r}",
        f"ack_duration_us = {m.ack_duration!r}",
        f"queue_capacity = {m.queue_capacity}",
        "",
        "[study]",
    ]
    for key, value in sc.study:
        lines.append(f"{key} = {value}")
    lines += [
        "",
        "[output]",
        f"dir = {sc.output_dir}",
        f"formats = {sc.formats}",
        "",
    ]
    return "\n".join(lines)
