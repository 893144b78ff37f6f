#!/usr/bin/env python3
"""
Run configuration files

A run is described by an INI-style file with sections [run], [data],
[architecture], [dp] and [training]. Every key has a default; unknown sections
or keys are rejected. The fully resolved configuration is written next to the
run's outputs so the run can be reconstructed from its directory.
"""

import configparser
import io
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

try:
    from .data import Schema
    from .dp_optim import DpSgdConfig
    from .errors import ConfigError
    from .gan import GanArchitecture
    from .settings import DEFAULT_DELTA, LAMBDA_MAX, OUTPUT_DIR, WORKERS
    from .training import TrainLoopConfig
except ImportError:
    from data import Schema
    from dp_optim import DpSgdConfig
    from errors import ConfigError
    from gan import GanArchitecture
    from settings import DEFAULT_DELTA, LAMBDA_MAX, OUTPUT_DIR, WORKERS
    from training import TrainLoopConfig

# Create logger for this module
logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = 'resolved_config.ini'
# Written by generate, evaluate and attack; ignored when the file is loaded as a run config
COMMAND_SECTION = 'command'


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _int_list(text: str) -> Tuple[int, ...]:
    text = text.strip()
    return tuple(int(part) for part in text.split(',')) if text else ()


def _optional_float(text: str) -> Optional[float]:
    text = text.strip()
    return float(text) if text else None


def _format(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple):
        return ','.join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# section -> key -> (parser, default)
FIELDS: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]] = {
    'run': {
        'seed': (int, 0),
        'output_dir': (str, str(OUTPUT_DIR)),
        'run_id': (str, 'run'),
    },
    'data': {
        'train_csv': (str, ''),
        'schema': (str, ''),
        'label': (str, ''),
    },
    'architecture': {
        'generator_kind': (str, 'mlp'),
        'noise_dim': (int, 64),
        'hidden_sizes': (_int_list, (128, 128)),
        'critic_hidden_sizes': (_int_list, (128, 128)),
        'lstm_hidden': (int, 64),
        'activation': (str, 'relu'),
    },
    'dp': {
        'clip_bound': (float, 1.0),
        'noise_scale': (float, 1.0),
        'lot_size': (int, 64),
        'learning_rate': (float, 0.05),
        'clip_decay': (float, 1.0),
        'decay_floor': (_optional_float, None),
    },
    'training': {
        'epsilon_target': (float, 8.0),
        'delta': (float, DEFAULT_DELTA),
        'n_disc': (int, 5),
        'batch_count': (int, 1),
        'gp_weight': (float, 10.0),
        'max_generator_iterations': (int, 1000),
        'metrics_every': (int, 10),
        'generator_batch': (int, 64),
        'generator_learning_rate': (float, 1e-4),
        'adam_beta1': (float, 0.0),
        'adam_beta2': (float, 0.9),
        'private': (_bool, True),
        'workers': (int, WORKERS),
        'lambda_max': (int, LAMBDA_MAX),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved run settings; ``values`` holds every key of every section"""
    values: Mapping[str, Mapping[str, Any]]
    source: Optional[Path] = None

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    @property
    def seed(self) -> int:
        return self.get('run', 'seed')

    @property
    def run_id(self) -> str:
        return self.get('run', 'run_id')

    @property
    def output_dir(self) -> Path:
        return Path(self.get('run', 'output_dir'))

    @property
    def label(self) -> Optional[str]:
        return self.get('data', 'label') or None

    def _data_path(self, key: str) -> Path:
        value = self.get('data', key)
        if not value:
            raise ConfigError(f"[data] {key} is required")
        path = Path(value)
        if not path.is_absolute() and self.source is not None:
            path = self.source.parent / path
        return path

    @property
    def train_csv(self) -> Path:
        return self._data_path('train_csv')

    @property
    def schema_path(self) -> Path:
        return self._data_path('schema')

    def dp_config(self) -> DpSgdConfig:
        return DpSgdConfig(**self.values['dp'])

    def train_loop_config(self) -> TrainLoopConfig:
        return TrainLoopConfig(dp=self.dp_config(), **self.values['training'])

    def architecture(self, schema: Schema) -> GanArchitecture:
        return GanArchitecture(schema=schema, **self.values['architecture'])

    def with_overrides(self, section: str, **changes) -> 'RunConfig':
        values = {s: dict(v) for s, v in self.values.items()}
        for key, value in changes.items():
            if key not in FIELDS[section]:
                raise ConfigError(f"Unknown key '{key}' in section [{section}]")
            values[section][key] = value
        return replace(self, values=values)

    def to_text(self) -> str:
        """Every section and key, defaults included; data paths made absolute"""
        parser = configparser.ConfigParser(interpolation=None)
        for section, fields in FIELDS.items():
            parser[section] = {key: _format(self.values[section][key]) for key in fields}
        for key in ('train_csv', 'schema'):
            if self.values['data'][key]:
                parser['data'][key] = str(self._data_path(key).resolve())
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()

    def write_resolved(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / RESOLVED_CONFIG_NAME
        path.write_text(self.to_text(), encoding='utf-8')
        return path


def default_config() -> RunConfig:
    return RunConfig({section: {k: d for k, (_, d) in fields.items()} for section, fields in FIELDS.items()})


def parse_run_config(text: str, source: Optional[Path] = None) -> RunConfig:
    """
    Parse config text, filling defaults

    Raises:
        ConfigError: unknown section or key, or a value that does not parse
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(source or '<config>'))
    except configparser.Error as e:
        raise ConfigError(f"Cannot parse config {source or '<config>'}: {e}") from e

    values = {s: dict(v) for s, v in default_config().values.items()}
    for section in parser.sections():
        if section == COMMAND_SECTION:
            continue
        if section not in FIELDS:
            raise ConfigError(f"Unknown config section [{section}]")
        for key, raw in parser[section].items():
            if key not in FIELDS[section]:
                raise ConfigError(f"Unknown key '{key}' in section [{section}]")
            convert = FIELDS[section][key][0]
            try:
                values[section][key] = convert(raw)
            except ValueError as e:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {e}") from e
    return RunConfig(values, source=source)


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    config = parse_run_config(path.read_text(encoding='utf-8'), source=path)
    logger.debug(f"Loaded run config {path}")
    return config


def write_command_config(directory, command: str, settings: Mapping[str, Any], checkpoint=None) -> Path:
    """
    Record how a command was run

    The file holds a [command] section with every resolved argument, followed
    by the sections of the training run's resolved config when one sits beside
    the checkpoint. Loading it with ``load_run_config`` skips [command], so the
    training run can be repeated from the command's output directory.

    Returns:
        Path: resolved_config.ini in ``directory``, or <command>_resolved_config.ini
            when ``directory`` is the training run's own directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    parser = configparser.ConfigParser(interpolation=None)
    parser[COMMAND_SECTION] = {'name': command}
    parser[COMMAND_SECTION].update({key: _format(value) for key, value in settings.items()})

    target = directory / RESOLVED_CONFIG_NAME
    if checkpoint is None:
        source = None
    else:
        source = Path(checkpoint).resolve().parent / RESOLVED_CONFIG_NAME
    if source is not None and source.is_file():
        training = configparser.ConfigParser(interpolation=None)
        training.read_string(source.read_text(encoding='utf-8'), source=str(source))
        for section in training.sections():
            if section != COMMAND_SECTION:
                parser[section] = dict(training[section])
        if target.resolve() == source:
            target = directory / f"{command}_{RESOLVED_CONFIG_NAME}"
    elif source is not None:
        logger.warning(f"No {RESOLVED_CONFIG_NAME} beside {checkpoint}; recording the {command} settings only")

    buffer = io.StringIO()
    parser.write(buffer)
    target.write_text(buffer.getvalue(), encoding='utf-8')
    return target
