"""CSV and JSON report writers plus run-config parsing.

Numbers are written as ``%.17e`` so that files round-trip exactly and are
byte-identical across runs with the same inputs.
"""

from dataclasses import dataclass, field
import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

COMMANDS = ("ou-analyze", "ou-decay", "jacobi-bound", "sandbox-check", "laguerre-bound", "selftest")

DEFAULT_TOLERANCES = {
    "bound": 1e-10,       # slack on every decay/variation inequality
    "residual": 1e-10,    # identity residuals (intertwinings, axioms)
}

SECTION_KEYS = {
    "ou": {"Q", "B", "f", "ts", "t_max", "n_t", "n_checks"},
    "jacobi": {"gamma1", "m", "N", "mu", "h", "t_grid"},
    "sandbox": {"spectrum", "m_values", "laguerre_m", "N", "eps", "mixing", "t_grid", "samples", "adjoint", "frame_seed"},
    "laguerre": {"m", "N", "t_grid"},
}
COMMAND_SECTION = {"ou-analyze": "ou", "ou-decay": "ou", "jacobi-bound": "jacobi",
                   "sandbox-check": "sandbox", "laguerre-bound": "laguerre", "selftest": None}
TOP_KEYS = {"command", "seed", "out", "tolerances"} | set(SECTION_KEYS)


def fmt(x):
    return f"{float(x):.17e}"


def write_csv(path, header, rows):
    """Write ``rows`` (2-d numeric) under a comma separated ``header``."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
    except OSError as exc:
        raise InvalidInputError(f"cannot write {path}: {exc}") from None
    return path


def emit_curve(curve, path):
    """DecayCurve -> CSV with columns ``t,ratio,envelope,margin``."""
    rows = np.column_stack([curve.ts, curve.ratios, curve.envelope, curve.margin])
    return write_csv(path, ["t", "ratio", "envelope", "margin"], rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, complex):
        return [fmt(obj.real), fmt(obj.imag)]
    return obj


def write_report(path, report):
    path = Path(path)
    try:
        path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n", encoding="ascii")
    except OSError as exc:
        raise InvalidInputError(f"cannot write {path}: {exc}") from None
    return path


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "."
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def tol(self, name):
        return self.tolerances[name]


def parse_config(data, command=None):
    """Validate a decoded config mapping into a :class:`RunConfig`.

    ``command`` (from the command line) overrides or supplies ``data["command"]``.
    """
    if not isinstance(data, dict):
        raise InvalidInputError("config must be a JSON object")
    unknown = set(data) - TOP_KEYS
    if unknown:
        raise InvalidInputError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cmd = command or data.get("command")
    if cmd not in COMMANDS:
        raise InvalidInputError(f"field 'command' must be one of {', '.join(COMMANDS)}; got {cmd!r}")
    tols = dict(DEFAULT_TOLERANCES)
    for k, v in (data.get("tolerances") or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise InvalidInputError(f"unknown tolerance 'tolerances.{k}'")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not np.isfinite(v):
            raise InvalidInputError(f"field 'tolerances.{k}' must be a positive number")
        tols[k] = float(v)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise InvalidInputError("field 'seed' must be a non-negative integer")
    for sec, keys in SECTION_KEYS.items():
        if sec in data:
            if not isinstance(data[sec], dict):
                raise InvalidInputError(f"field '{sec}' must be an object")
            bad = set(data[sec]) - keys
            if bad:
                raise InvalidInputError(f"unknown key(s) in '{sec}': {', '.join(sorted(bad))}")
    sec = COMMAND_SECTION[cmd]
    params = dict(data.get(sec) or {}) if sec else {}
    out = data.get("out", ".")
    if not isinstance(out, str):
        raise InvalidInputError("field 'out' must be a string")
    return RunConfig(command=cmd, params=params, seed=seed, out=out, tolerances=tols)


def load_config(path, command=None):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data, command)


def matrix_field(params, name, required=True):
    if name not in params:
        if required:
            raise InvalidInputError(f"field '{name}' is required")
        return None
    try:
        A = np.asarray(params[name], dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"field '{name}' must be a numeric row-major matrix") from None
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise InvalidInputError(f"field '{name}' must be a 2-d row-major matrix")
    return A


def number_field(params, name, default=None, positive=False, integer=False):
    v = params.get(name, default)
    if v is None:
        raise InvalidInputError(f"field '{name}' is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidInputError(f"field '{name}' must be a number")
    if integer and int(v) != v:
        raise InvalidInputError(f"field '{name}' must be an integer")
    if positive and not v > 0:
        raise InvalidInputError(f"field '{name}' must be positive")
    return int(v) if integer else float(v)


def complex_list(values, name):
    """Numbers or ``[re, im]`` pairs -> complex array."""
    out = []
    for v in values:
        if isinstance(v, (list, tuple)) and len(v) == 2:
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(complex(v))
        else:
            raise InvalidInputError(f"field '{name}' entries must be numbers or [re, im] pairs")
    return np.array(out, dtype=complex)
