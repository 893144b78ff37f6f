#!/usr/bin/env python3
"""
Versioned binary checkpoints and their JSON metadata sidecar

Layout:
    b"DPGANCKP"                   magic
    uint32 little-endian          format version
    uint32 little-endian          descriptor length in bytes
    UTF-8 JSON descriptor         architecture, parameter names and shapes
    float64 little-endian arrays  generator parameters, then critic parameters
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

try:
    from .errors import ConfigError, DataError
    from .gan import GanArchitecture, GanModel, critic_parameter_shapes, generator_parameter_shapes
except ImportError:
    from errors import ConfigError, DataError
    from gan import GanArchitecture, GanModel, critic_parameter_shapes, generator_parameter_shapes

# Create logger for this module
logger = logging.getLogger(__name__)

MAGIC = b"DPGANCKP"
FORMAT_VERSION = 1
_HEADER = struct.Struct('<II')


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + '.meta.json')


def config_digest(text: str) -> str:
    """SHA-256 of the resolved config text"""
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def save_checkpoint(model: GanModel, path, strip_discriminator: bool = False, metadata: Optional[dict] = None) -> Path:
    """
    Write a checkpoint and, when ``metadata`` is given, its sidecar

    Args:
        model: model to store
        path: checkpoint file path
        strip_discriminator: omit theta_D (release artifact)
        metadata: sidecar content (seed, config digest, epsilon, delta, iterations)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    include_critic = model.has_critic and not strip_discriminator

    arrays: List[Tuple[str, np.ndarray]] = list(model.generator_params.items())
    if include_critic:
        arrays += list(model.critic_params.items())

    descriptor = {
        'architecture': model.architecture.to_dict(),
        'seed': model.seed,
        'has_discriminator': include_critic,
        'parameters': [{'name': name, 'shape': list(value.shape)} for name, value in arrays],
    }
    encoded = json.dumps(descriptor, sort_keys=True).encode('utf-8')

    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(_HEADER.pack(FORMAT_VERSION, len(encoded)))
        f.write(encoded)
        for _, value in arrays:
            f.write(np.ascontiguousarray(value, dtype='<f8').tobytes())

    if metadata is not None:
        write_sidecar(path, metadata)
    logger.info(f"Saved checkpoint {path} ({'with' if include_critic else 'without'} discriminator)")
    return path


def load_checkpoint(path) -> GanModel:
    """
    Read a checkpoint written by ``save_checkpoint``

    Raises:
        DataError: missing, truncated or foreign file
        ConfigError: unsupported format version
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Checkpoint not found: {path}")
    blob = path.read_bytes()
    if not blob.startswith(MAGIC):
        raise DataError(f"{path} is not a checkpoint (bad magic)")
    offset = len(MAGIC)
    if len(blob) < offset + _HEADER.size:
        raise DataError(f"{path}: truncated header")
    version, length = _HEADER.unpack_from(blob, offset)
    if version != FORMAT_VERSION:
        raise ConfigError(f"{path}: checkpoint format version {version}, this build reads version {FORMAT_VERSION}")
    offset += _HEADER.size
    try:
        descriptor = json.loads(blob[offset:offset + length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"{path}: unreadable descriptor: {e}") from e
    offset += length

    arch = GanArchitecture.from_dict(descriptor['architecture'])
    values: Dict[str, np.ndarray] = {}
    for entry in descriptor['parameters']:
        shape = tuple(entry['shape'])
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(blob):
            raise DataError(f"{path}: truncated parameter '{entry['name']}'")
        values[entry['name']] = np.frombuffer(blob, dtype='<f8', count=count, offset=offset).reshape(shape).astype(np.float64)
        offset = end
    if offset != len(blob):
        raise DataError(f"{path}: {len(blob) - offset} trailing bytes")

    generator = {name: values[name] for name in generator_parameter_shapes(arch)}
    critic = None
    if descriptor['has_discriminator']:
        critic = {name: values[name] for name in critic_parameter_shapes(arch)}
    return GanModel(arch, generator, critic, seed=int(descriptor.get('seed', 0)))


def write_sidecar(checkpoint_path, metadata: dict) -> Path:
    path = sidecar_path(checkpoint_path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(metadata, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_sidecar(checkpoint_path) -> dict:
    path = sidecar_path(checkpoint_path)
    if not path.is_file():
        raise DataError(f"Checkpoint metadata not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)
