"""Configuration management for preprocessing and training runs.

Config files are one flat JSON (or YAML) object whose keys mirror the CLI flag
names; ``edge-aug-p`` and ``edge_aug_p`` are the same key. Values are merged
as ``defaults <- file <- explicit flags``.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from .exceptions import GraphLeafError, InputError, UsageError
from .models.config import ModelConfig
from .utils.file_utils import atomic_write_text
from .utils.validation import (
    validate_open_fraction,
    validate_positive_integer,
    validate_positive_real,
)

# Optional YAML support
try:
    import yaml
    HAS_YAML = True
except ImportError:
    yaml = None
    HAS_YAML = False

logger = logging.getLogger(__name__)

THREADS_ENV = "GRAPHLEAF_THREADS"

# Preprocessing settings that shape every graph; prediction has to repeat them.
GRAPH_KEYS = ('segments', 'compactness', 'max_iter', 'image_size')


@dataclass
class PreprocessConfig:
    """Settings for turning an image corpus into graph caches."""
    data: Optional[str] = None
    out: Optional[str] = None
    segments: int = 50
    compactness: float = 10.0
    max_iter: int = 10
    split: float = 0.8
    seed: int = 0
    image_size: int = 128

    def validate(self) -> None:
        validate_positive_integer(self.segments, "segments")
        validate_positive_real(self.compactness, "compactness")
        validate_positive_integer(self.max_iter, "max_iter")
        validate_open_fraction(self.split, "split")
        validate_positive_integer(self.seed, "seed", min_value=0)
        validate_positive_integer(self.image_size, "image_size")
        if self.segments > self.image_size * self.image_size:
            raise InputError(f"segments ({self.segments}) exceeds the pixel count of a "
                             f"{self.image_size}x{self.image_size} image")

    def graph_settings(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in GRAPH_KEYS}

    @classmethod
    def from_graph_settings(cls, settings: Mapping[str, Any]) -> "PreprocessConfig":
        unknown = set(settings) - set(GRAPH_KEYS)
        if unknown:
            raise InputError(f"unknown preprocessing settings: {', '.join(sorted(unknown))}")
        return cls(**dict(settings))


@dataclass
class RunConfig:
    """One training run: model architecture, optimisation settings and paths."""
    model: ModelConfig = field(default_factory=ModelConfig)
    epochs: int = 100
    batch_size: int = 32
    lr: float = 0.001
    seed: int = 0
    cache: Optional[str] = None
    out: Optional[str] = None
    # Graph settings the cache was built with, when known.
    preprocess: Optional[Dict[str, Any]] = None

    def validate(self) -> None:
        self.model.validate()
        validate_positive_integer(self.epochs, "epochs")
        validate_positive_integer(self.batch_size, "batch_size")
        validate_positive_integer(self.seed, "seed", min_value=0)
        if isinstance(self.lr, bool) or not isinstance(self.lr, (int, float)) or self.lr < 0:
            raise InputError(f"lr must be a non-negative number, got {self.lr!r}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["model"] = self.model.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        values = dict(data)
        model = ModelConfig.from_dict(dict(values.pop("model", {})))
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise InputError(f"unknown run config keys: {', '.join(sorted(unknown))}")
        return cls(model=model, **values)


# Flat keys accepted in config files, per subcommand.
PREPROCESS_KEYS = ('data', 'out', 'segments', 'compactness', 'max_iter', 'split',
                   'seed', 'image_size')
TRAIN_KEYS = ('cache', 'model', 'epochs', 'batch', 'lr', 'edge_aug_p', 'seed', 'out',
              'hidden_dim', 'heads', 'readout', 'negative_slope')
KNOWN_KEYS = frozenset(PREPROCESS_KEYS) | frozenset(TRAIN_KEYS)


def normalize_key(key: str) -> str:
    return key.strip().lstrip('-').replace('-', '_')


class ConfigManager:
    """Loads flat config files and merges them with defaults and flags."""

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        self.config_path = Path(config_path) if config_path else None

    def load_file(self, config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
        """Read the flat mapping from a ``.json``, ``.yaml`` or ``.yml`` file."""
        if config_path:
            self.config_path = Path(config_path)
        if self.config_path is None:
            return {}

        config_file = self.config_path
        if not config_file.exists():
            raise UsageError(f"config file not found: {config_file}")

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                if config_file.suffix.lower() in ['.yaml', '.yml']:
                    if not HAS_YAML:
                        raise UsageError("PyYAML is required for YAML config files. "
                                         "Install with: pip install PyYAML")
                    data = yaml.safe_load(f)
                else:
                    data = json.load(f)
        except GraphLeafError:
            raise
        except Exception as e:
            raise UsageError(f"cannot parse config file {config_file}: {e}")

        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise UsageError(f"config file {config_file} must hold a single flat object")

        values = {}
        for key, value in data.items():
            name = normalize_key(str(key))
            if name not in KNOWN_KEYS:
                raise UsageError(f"unknown key '{key}' in config file {config_file}")
            if isinstance(value, (dict, list)):
                raise UsageError(f"config key '{key}' must be a scalar")
            values[name] = value

        logger.info(f"Loaded configuration from {config_file}")
        return values

    @staticmethod
    def merge(defaults: Mapping[str, Any], file_values: Mapping[str, Any],
              flags: Mapping[str, Any], keys) -> Dict[str, Any]:
        """``defaults <- file <- flags``, restricted to ``keys``."""
        merged = {k: v for k, v in defaults.items() if k in keys}
        merged.update({k: v for k, v in file_values.items() if k in keys})
        merged.update({k: v for k, v in flags.items() if k in keys})
        return merged

    def build_preprocess_config(self, flags: Mapping[str, Any]) -> PreprocessConfig:
        defaults = asdict(PreprocessConfig())
        values = self.merge(defaults, self.load_file(), flags, PREPROCESS_KEYS)
        try:
            cfg = PreprocessConfig(**values)
            cfg.validate()
        except (InputError, TypeError) as e:
            raise UsageError(str(e))
        return cfg

    def build_run_config(self, flags: Mapping[str, Any], num_classes: int) -> RunConfig:
        defaults_model = ModelConfig(num_classes=max(2, num_classes))
        defaults = {
            'model': defaults_model.variant,
            'epochs': RunConfig.epochs,
            'batch': RunConfig.batch_size,
            'lr': RunConfig.lr,
            'edge_aug_p': defaults_model.edge_aug_p,
            'seed': RunConfig.seed,
            'hidden_dim': defaults_model.hidden_dim,
            'heads': defaults_model.heads,
            'readout': defaults_model.readout,
            'negative_slope': defaults_model.negative_slope,
        }
        values = self.merge(defaults, self.load_file(), flags, TRAIN_KEYS)
        try:
            model = ModelConfig(
                variant=values['model'],
                num_classes=num_classes,
                hidden_dim=values['hidden_dim'],
                heads=values['heads'],
                edge_aug_p=values['edge_aug_p'],
                negative_slope=values['negative_slope'],
                readout=values['readout'],
            )
            cfg = RunConfig(
                model=model,
                epochs=values['epochs'],
                batch_size=values['batch'],
                lr=values['lr'],
                seed=values['seed'],
                cache=values.get('cache'),
                out=values.get('out'),
            )
            cfg.validate()
        except InputError as e:
            raise UsageError(e.detail)
        return cfg

    @staticmethod
    def save_config(cfg: RunConfig, path: Union[str, Path]) -> None:
        """Write the effective run configuration as JSON."""
        atomic_write_text(path, json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        logger.info(f"Configuration saved to {path}")

    @staticmethod
    def save_graph_settings(cfg: PreprocessConfig, path: Union[str, Path]) -> None:
        atomic_write_text(path, json.dumps(cfg.graph_settings(), indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load_graph_settings(path: Union[str, Path]) -> Optional[Dict[str, Any]]:
        """Graph settings written next to a cache; ``None`` when the file is absent."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            return None
        except json.JSONDecodeError as e:
            raise InputError(f"preprocessing settings {path} are not valid JSON: {e}")
        if not isinstance(data, dict):
            raise InputError(f"preprocessing settings {path} must hold an object")
        cfg = PreprocessConfig.from_graph_settings(data)
        cfg.validate()
        return cfg.graph_settings()

    @staticmethod
    def load_run_config(path: Union[str, Path]) -> RunConfig:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise InputError(f"run config not found: {path}")
        except json.JSONDecodeError as e:
            raise InputError(f"run config {path} is not valid JSON: {e}")
        return RunConfig.from_dict(data)


def resolve_thread_count(environ: Optional[Mapping[str, str]] = None) -> int:
    """Worker count from ``GRAPHLEAF_THREADS``; unset or 0 means one per CPU."""
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV, "").strip()
    if not raw:
        requested = 0
    else:
        try:
            requested = int(raw)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a non-negative integer, got '{raw}'")
        if requested < 0:
            raise UsageError(f"{THREADS_ENV} must be a non-negative integer, got '{raw}'")
    if requested == 0:
        return max(1, os.cpu_count() or 1)
    return requested
