"""Delimited-text arrays, key = value configs, and run manifests.

Numeric arrays are comma-separated with a single header line
``# rows=R cols=C`` and 17-significant-digit floats, so re-running a
seeded command reproduces files byte for byte.
"""
from __future__ import annotations

import numpy as np

FLOAT_FMT = "%.17g"


class ConfigError(ValueError):
    """Bad configuration file or option value."""


class InputFileError(RuntimeError):
    """Missing or malformed input file; message names file and line."""


def write_matrix(path, arr) -> None:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("only 1-D or 2-D arrays are written")
    with open(path, "w") as fh:
        fh.write(f"# rows={arr.shape[0]} cols={arr.shape[1]}\n")
        for row in arr:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")


def read_matrix(path) -> np.ndarray:
    try:
        fh = open(path)
    except OSError as exc:
        raise InputFileError(f"{path}: cannot open ({exc.strerror})") from exc
    with fh:
        header = fh.readline()
        if not header.startswith("# rows="):
            raise InputFileError(f"{path}:1: expected a '# rows=R cols=C' header")
        try:
            fields = dict(part.split("=") for part in header[2:].split())
            rows, cols = int(fields["rows"]), int(fields["cols"])
        except (ValueError, KeyError) as exc:
            raise InputFileError(f"{path}:1: malformed header {header!r}") from exc
        out = np.empty((rows, cols))
        for i in range(rows):
            line = fh.readline()
            if not line:
                raise InputFileError(f"{path}:{i + 2}: expected {rows} data rows")
            parts = line.strip().split(",")
            if len(parts) != cols:
                raise InputFileError(
                    f"{path}:{i + 2}: expected {cols} values, got {len(parts)}"
                )
            try:
                out[i] = [float(p) for p in parts]
            except ValueError as exc:
                raise InputFileError(f"{path}:{i + 2}: non-numeric value") from exc
    return out


def _float_list(text: str) -> tuple:
    return tuple(float(p) for p in str(text).split(",") if p.strip() != "")


def _fmt_float_list(values) -> str:
    return ",".join(FLOAT_FMT % v for v in values)


def _fmt_float(v) -> str:
    return FLOAT_FMT % v


# key -> (parse, format, default); flat namespace shared by all commands
CONFIG_SCHEMA = {
    "mode": (str, str, "post-stack-1d"),
    "epochs": (int, str, 500),
    "learning_rate": (float, _fmt_float, 0.1),
    "reg_weight": (float, _fmt_float, 0.1),
    "rng_seed": (int, str, 0),
    "grad_method": (str, str, "adjoint"),
    "fd_delta": (float, _fmt_float, 1e-4),
    "spsa_epsilon": (float, _fmt_float, 0.01),
    "spsa_num_samples": (int, str, 1),
    "n_layers": (int, str, 2),
    "rotation_axis": (str, str, "x"),
    "ansatz": (str, str, "basic-entangler"),
    "n_qubits": (int, str, 0),
    "angles": (_float_list, _fmt_float_list, (0.0,)),
    "wavelet_frequency": (float, _fmt_float, 40.0),
    "dt": (float, _fmt_float, 0.002),
    "gamma": (float, _fmt_float, 0.5),
    "prior_window": (int, str, 15),
    "bounds_margin": (float, _fmt_float, 0.2),
    "patience": (int, str, 0),
    "threads": (int, str, 1),
    # synthetic-model keys (used by the synth command)
    "n_samples": (int, str, 64),
    "n_traces": (int, str, 16),
    "n_sections": (int, str, 2),
    "zp_values": (_float_list, _fmt_float_list, (6.0, 8.5, 6.0)),
    "zs_values": (_float_list, _fmt_float_list, (3.8, 3.0, 3.8)),
    "boundaries": (_float_list, _fmt_float_list, (0.35, 0.7)),
    "wedge_top": (float, _fmt_float, 0.25),
    "wedge_ramps": (_float_list, _fmt_float_list, (0.55, 0.85, 0.5, 0.8)),
    "noise_sigma": (float, _fmt_float, 0.0),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; unknown keys are configuration errors."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        raw[key] = value.strip()
    return raw


def resolve_config(raw: dict) -> dict:
    """Typed mapping with every default materialized."""
    out = {}
    for key, (parse, _fmt, default) in CONFIG_SCHEMA.items():
        if key in raw:
            try:
                out[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key!r}: bad value {raw[key]!r}") from exc
        else:
            out[key] = default
    unknown = set(raw) - set(CONFIG_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return out


def load_config(path) -> dict:
    try:
        text = open(path).read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return resolve_config(parse_config_text(text, source=str(path)))


def dump_config(resolved: dict) -> str:
    """Canonical serialization; parse(dump(c)) == c."""
    lines = []
    for key, (_parse, fmt, _default) in CONFIG_SCHEMA.items():
        lines.append(f"{key} = {fmt(resolved[key])}")
    return "\n".join(lines) + "\n"


def write_manifest(path, entries: dict) -> None:
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")
