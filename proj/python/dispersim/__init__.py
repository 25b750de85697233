"""Two-scale dispersion solver.

Configurations can be given as a preset name, a dict, JSON text or a
``RunConfig``. Arrays come back as numpy arrays.
"""

import json

from ._dispersim import (
    ConfigError,
    ContractViolation,
    DispersionTable,
    InvalidGeometry,
    IoError,
    RunConfig,
    SingularSystem,
    preset_names,
    run_command,
)
from . import _dispersim as _core

__all__ = [
    "ConfigError",
    "ContractViolation",
    "DispersionTable",
    "InvalidGeometry",
    "IoError",
    "RunConfig",
    "SingularSystem",
    "build_table",
    "cell_mesh",
    "config",
    "config_schema",
    "dispersion_tensor",
    "macro_mesh",
    "preset",
    "preset_names",
    "run",
    "run_command",
    "stokes",
    "study",
]


def config(spec, patch=None):
    """Returns a RunConfig from a preset name, dict, JSON text or RunConfig."""
    if isinstance(spec, RunConfig):
        cfg = spec
    elif isinstance(spec, dict):
        cfg = _core.parse_config(json.dumps(spec))
    elif isinstance(spec, str) and spec.lstrip().startswith("{"):
        cfg = _core.parse_config(spec)
    elif isinstance(spec, str):
        cfg = _core.load_preset(spec)
    else:
        raise TypeError(f"cannot build a configuration from {type(spec).__name__}")
    if patch:
        cfg = _core.with_patch(cfg, json.dumps(patch))
    return cfg


def preset(name):
    """The merged configuration of a preset as a dict."""
    return json.loads(_core.load_preset(name).json)


def config_schema():
    return json.loads(_core.config_schema())


def macro_mesh(spec):
    return _core.macro_mesh(config(spec))


def cell_mesh(spec):
    return _core.cell_mesh(config(spec))


def stokes(spec):
    return _core.stokes(config(spec))


def dispersion_tensor(spec, p):
    return _core.dispersion_tensor(config(spec), float(p))


def build_table(spec, knots=None, jobs=0):
    return _core.build_table(config(spec), None if knots is None else [float(k) for k in knots], jobs)


def run(spec, mode=None, jobs=0, patch=None):
    return _core.run(config(spec, patch), mode, jobs)


def study(spec, axis="", jobs=0, patch=None):
    return _core.study(config(spec, patch), axis, jobs)
