"""Loss-weight schedules, optimizers and training diagnostics.

Configs and schedules may be given as JSON text or as plain dicts/lists.
"""

import json

from . import _lossdecay
from ._lossdecay import (
    ConfigError,
    ParseError,
    detect_plateau_break,
    gradient_check as _gradient_check,
    preset_names,
    probe_quadratic,
    stationary_loss_floor,
)

__all__ = [
    "ConfigError",
    "ParseError",
    "detect_plateau_break",
    "gradient_check",
    "normalize_config",
    "preset",
    "preset_names",
    "probe_quadratic",
    "run",
    "schedule_trace",
    "schedule_weight",
    "stationary_loss_floor",
    "sweep",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def _schedule_text(spec):
    # A bare preset name is accepted as shorthand for its JSON string.
    if isinstance(spec, str) and not spec.lstrip().startswith(("{", '"')):
        return json.dumps(spec)
    return _text(spec)


def _overrides(overrides):
    if overrides is None:
        return []
    if isinstance(overrides, dict):
        return [f"{k}={v if isinstance(v, str) else json.dumps(v)}" for k, v in overrides.items()]
    return list(overrides)


def preset(name):
    return json.loads(_lossdecay.preset(name))


def schedule_weight(spec, p):
    return _lossdecay.schedule_weight(_schedule_text(spec), p)


def schedule_trace(spec, total_steps, steps_per_epoch, seed=0):
    return _lossdecay.schedule_trace(_schedule_text(spec), total_steps, steps_per_epoch, seed)


def normalize_config(config, overrides=None):
    return json.loads(_lossdecay.normalize_config(_text(config), _overrides(overrides)))


def run(config, overrides=None, trajectory=False):
    """Trains one config. Returns a dict with the status, final loss and
    accuracy, per-step records as numpy columns and the summary row."""
    return _lossdecay.run(_text(config), _overrides(overrides), trajectory)


def sweep(doc, overrides=None, parallelism=1):
    return _lossdecay.sweep(_text(doc), _overrides(overrides), parallelism)


def gradient_check(config, draws=5, seed=0):
    return _gradient_check(_text(config), draws, seed)
