"""
Runtime configuration: settings defaults, an optional JSON file, then flags.
"""
import copy
import json
import logging
from dataclasses import dataclass

from django.conf import settings
from django.core.exceptions import ValidationError

from .forms import ConfigForm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Config:
    paths: dict
    k1: float
    b: float
    field_weights: dict
    term_weights: dict
    role_weights: dict
    groups: list
    seed: int
    scorers: list
    threads: int

    def path(self, name):
        return self.paths.get(name) or ''


def _merge(base, overrides):
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def load_config(path=None, overrides=None):
    """
    Build a Config. Keys in the file that the project does not know are
    rejected; `overrides` (usually parsed flags) win over the file, and
    `None` override values are ignored.
    """
    data = copy.deepcopy(settings.W5H)
    if path:
        with open(path, encoding='utf-8') as handle:
            try:
                from_file = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    "Config file %(path)s is not valid JSON: %(error)s",
                    code='malformed_json',
                    params={'path': path, 'error': exc.msg},
                )
        if not isinstance(from_file, dict):
            raise ValidationError("Config file %(path)s must hold an object.", code='invalid_config', params={'path': path})
        unknown = sorted(set(from_file) - set(data))
        if unknown:
            raise ValidationError(
                "Unknown config keys: %(keys)s.", code='unknown_config_key', params={'keys': ', '.join(unknown)}
            )
        data = _merge(data, from_file)
        logger.debug("Loaded config file %s", path)

    if overrides:
        data = _merge(data, {key: value for key, value in overrides.items() if value is not None})

    form = ConfigForm(data=data)
    if not form.is_valid():
        raise ValidationError(
            "; ".join(f"{name}: {' '.join(errors)}" for name, errors in form.errors.items()),
            code='invalid_config',
        )
    return Config(**form.cleaned_data)
