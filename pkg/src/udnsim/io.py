"""Sectioned key-value config files and CSV result files.

Config layout (every key optional, unknown keys rejected)::

    [radio]     fc_hz, bandwidth_hz, p_sbs_dbm, p_user_dbm, noise_power_dbm, residual_si_dbm,
                n_tx_sbs, n_tx_user, los_decay_m, n_nlos_paths, n_dl_users, n_ul_users
    [geometry]  macro_radius_m, sector_angle_deg, close_zone_radius_m, sc_radius_m
    [sweep]     densities_per_km2, trials, seed
    [schemes]   schemes, alpha_weak, alpha_strong, oma_alpha_weak, oma_alpha_strong,
                own_cell_ue_interference
"""

from __future__ import annotations

import configparser
import csv
import io as _io
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .channel import RadioConfig
from .engine import SweepConfig, SweepResult
from .schemes import Scheme, SchemeConfig
from .topology import SectorGeometry

__all__ = [
    "ConfigError",
    "ConfigSyntaxError",
    "UnknownKeyError",
    "TypeMismatchError",
    "ConstraintError",
    "parse_config",
    "load_config",
    "serialize_config",
    "write_csv",
    "format_csv",
    "CSV_HEADER",
]

CSV_HEADER = (
    "density_per_km2", "scheme", "trials", "mean_sum_rate_bps",
    "std_dev_bps", "ci95_low_bps", "ci95_high_bps",
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ConfigSyntaxError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


class TypeMismatchError(ConfigError):
    pass


class ConstraintError(ConfigError):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip().upper().replace("-", "_") for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(text) if re.fullmatch(r"\s*[+-]?\d+\s*", text) else int(value)


# section -> key -> (parser, default); defaults are the deployment values.
_SCHEMA: dict[str, dict[str, tuple]] = {
    "radio": {
        "fc_hz": (float, 28e9),
        "bandwidth_hz": (float, 100e6),
        "p_sbs_dbm": (float, 24.0),
        "p_user_dbm": (float, 20.0),
        "noise_power_dbm": (float, -104.0),
        "residual_si_dbm": (float, -110.0),
        "n_tx_sbs": (_int, 64),
        "n_tx_user": (_int, 32),
        "los_decay_m": (float, 100.0),
        "n_nlos_paths": (_int, 2),
        "n_dl_users": (_int, 2),
        "n_ul_users": (_int, 2),
    },
    "geometry": {
        "macro_radius_m": (float, 500.0),
        "sector_angle_deg": (float, 60.0),
        "close_zone_radius_m": (float, 250.0),
        "sc_radius_m": (float, 100.0),
    },
    "sweep": {
        "densities_per_km2": (_float_list, (10.0, 25.0, 50.0, 100.0, 200.0, 400.0, 700.0, 1000.0)),
        "trials": (_int, 1000),
        "seed": (_int, 1),
    },
    "schemes": {
        "schemes": (_name_list, ("OMA_HD", "NOMA_HD", "NOMA_FD")),
        "alpha_weak": (float, 0.7),
        "alpha_strong": (float, 0.3),
        "oma_alpha_weak": (float, 0.5),
        "oma_alpha_strong": (float, 0.5),
        "own_cell_ue_interference": (_bool, True),
    },
}


@dataclass
class _Located:
    value: object
    line: int | None = None
    column: int | None = None


def _locate(text: str) -> dict[tuple[str, str], tuple[int, int]]:
    """Map (section, key) to the 1-based line and value column of its assignment."""
    out = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]\s*", line)
        if m and section is not None:
            out[(section, m.group(1).strip().lower())] = (lineno, m.end() + 1)
    return out


def _section_lines(text: str) -> dict[str, int]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            out.setdefault(m.group(1).strip().lower(), lineno)
    return out


def load_config(text: str) -> tuple[SweepConfig, set[tuple[str, str]]]:
    """Parse a config document; also return the (section, key) pairs it set explicitly."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       default_section="__none__")
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigSyntaxError("key outside of any [section]", exc.lineno, 1) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigSyntaxError(str(exc).split(": ", 1)[-1], exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigSyntaxError("malformed line, expected `key = value`", lineno, 1) from None

    where = _locate(text)
    sections = _section_lines(text)
    values: dict[str, dict[str, _Located]] = {}
    explicit = set()
    for section in parser.sections():
        schema = _SCHEMA.get(section)
        if schema is None:
            raise UnknownKeyError(f"unknown section [{section}]", sections.get(section), 1)
        for key, raw in parser.items(section):
            line, col = where.get((section, key), (None, None))
            if key not in schema:
                raise UnknownKeyError(f"unknown key {key!r} in [{section}]", line, 1)
            conv = schema[key][0]
            try:
                value = conv(raw)
            except ValueError:
                raise TypeMismatchError(
                    f"{section}.{key}: cannot read {raw!r} as {_type_name(conv)}", line, col
                ) from None
            values.setdefault(section, {})[key] = _Located(value, line, col)
            explicit.add((section, key))

    def get(section, key):
        loc = values.get(section, {}).get(key)
        return loc.value if loc else _SCHEMA[section][key][1]

    def constraint(section, key, exc):
        loc = values.get(section, {}).get(key)
        line = loc.line if loc else sections.get(section)
        return ConstraintError(str(exc), line, 1 if line else None)

    try:
        radio = RadioConfig(
            fc=get("radio", "fc_hz"),
            bandwidth=get("radio", "bandwidth_hz"),
            p_sbs=get("radio", "p_sbs_dbm"),
            p_user=get("radio", "p_user_dbm"),
            noise_power=get("radio", "noise_power_dbm"),
            residual_si=get("radio", "residual_si_dbm"),
            n_tx_sbs=get("radio", "n_tx_sbs"),
            n_tx_user=get("radio", "n_tx_user"),
            los_decay=get("radio", "los_decay_m"),
            n_nlos_paths=get("radio", "n_nlos_paths"),
            n_dl=get("radio", "n_dl_users"),
            n_ul=get("radio", "n_ul_users"),
        )
    except ValueError as exc:
        raise constraint("radio", None, exc) from None
    if radio.n_dl != 2:
        raise constraint("radio", "n_dl_users", ValueError("DL NOMA pairing needs n_dl_users = 2"))

    try:
        geometry = SectorGeometry(
            macro_radius=get("geometry", "macro_radius_m"),
            sector_angle=math.radians(get("geometry", "sector_angle_deg")),
            close_zone_radius=get("geometry", "close_zone_radius_m"),
            sc_radius=get("geometry", "sc_radius_m"),
        )
    except ValueError as exc:
        raise constraint("geometry", None, exc) from None

    schemes = []
    for name in get("schemes", "schemes"):
        try:
            scheme = Scheme(name)
        except ValueError:
            raise constraint("schemes", "schemes", ValueError(f"unknown scheme {name!r}")) from None
        prefix = "oma_" if scheme is Scheme.OMA_HD else ""
        try:
            schemes.append(SchemeConfig(scheme, get("schemes", prefix + "alpha_weak"),
                                        get("schemes", prefix + "alpha_strong")))
        except ValueError as exc:
            raise constraint("schemes", prefix + "alpha_weak", exc) from None

    try:
        cfg = SweepConfig(
            densities=get("sweep", "densities_per_km2"),
            trials=get("sweep", "trials"),
            base_seed=get("sweep", "seed"),
            schemes=tuple(schemes),
            radio=radio,
            geometry=geometry,
            own_cell_ue_interference=get("schemes", "own_cell_ue_interference"),
        )
    except ValueError as exc:
        raise constraint("sweep", None, exc) from None
    return cfg, explicit


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a config document; omitted keys take their defaults."""
    return load_config(text)[0]


def _type_name(conv) -> str:
    return {float: "a number", _int: "an integer", _bool: "a boolean",
            _float_list: "a comma-separated list of numbers",
            _name_list: "a comma-separated list of names"}.get(conv, "a value")


def _num(x: float) -> str:
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def serialize_config(cfg: SweepConfig) -> str:
    r, g = cfg.radio, cfg.geometry
    by_scheme = {s.scheme: s for s in cfg.schemes}
    noma = by_scheme.get(Scheme.NOMA_HD) or by_scheme.get(Scheme.NOMA_FD) or SchemeConfig(Scheme.NOMA_HD)
    oma = by_scheme.get(Scheme.OMA_HD) or SchemeConfig(Scheme.OMA_HD)
    sections = {
        "radio": [
            ("fc_hz", _num(r.fc)),
            ("bandwidth_hz", _num(r.bandwidth)),
            ("p_sbs_dbm", _num(r.p_sbs)),
            ("p_user_dbm", _num(r.p_user)),
            ("noise_power_dbm", _num(r.noise_power)),
            ("residual_si_dbm", _num(r.residual_si)),
            ("n_tx_sbs", str(r.n_tx_sbs)),
            ("n_tx_user", str(r.n_tx_user)),
            ("los_decay_m", _num(r.los_decay)),
            ("n_nlos_paths", str(r.n_nlos_paths)),
            ("n_dl_users", str(r.n_dl)),
            ("n_ul_users", str(r.n_ul)),
        ],
        "geometry": [
            ("macro_radius_m", _num(g.macro_radius)),
            ("sector_angle_deg", _num(round(math.degrees(g.sector_angle), 12))),
            ("close_zone_radius_m", _num(g.close_zone_radius)),
            ("sc_radius_m", _num(g.sc_radius)),
        ],
        "sweep": [
            ("densities_per_km2", ", ".join(_num(d) for d in cfg.densities)),
            ("trials", str(cfg.trials)),
            ("seed", str(cfg.base_seed)),
        ],
        "schemes": [
            ("schemes", ", ".join(s.name for s in cfg.schemes)),
            ("alpha_weak", _num(noma.alpha_weak)),
            ("alpha_strong", _num(noma.alpha_strong)),
            ("oma_alpha_weak", _num(oma.alpha_weak)),
            ("oma_alpha_strong", _num(oma.alpha_strong)),
            ("own_cell_ue_interference", "true" if cfg.own_cell_ue_interference else "false"),
        ],
    }
    lines = []
    for name, items in sections.items():
        if lines:
            lines.append("")
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in items)
    return "\n".join(lines) + "\n"


def _g6(x: float) -> str:
    return f"{x:.6g}"


def format_csv(result: SweepResult) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in sorted(result.rows, key=lambda r: r.density):  # stable: keeps scheme order
        writer.writerow([_g6(r.density), r.scheme, r.trials, _g6(r.mean), _g6(r.std_dev),
                         _g6(r.ci95_low), _g6(r.ci95_high)])
    return buf.getvalue()


def write_csv(result: SweepResult, path) -> Path:
    path = Path(path)
    try:
        path.write_text(format_csv(result), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
    return path
