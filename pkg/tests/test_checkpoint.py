"""
Tests for checkpoint files and their metadata sidecar
"""

import struct

import numpy as np
import pytest

from dpgan.checkpoint import (
    FORMAT_VERSION, MAGIC, config_digest, load_checkpoint, read_sidecar, save_checkpoint, sidecar_path,
)
from dpgan.errors import ConfigError, DataError
from dpgan.gan import build_model, generator_forward


def _params_equal(left, right):
    assert list(left) == list(right)
    for name in left:
        np.testing.assert_array_equal(left[name], right[name], err_msg=name)


def test_round_trip_is_bit_exact(small_model, tmp_path):
    path = save_checkpoint(small_model, tmp_path / 'model.ckpt')
    restored = load_checkpoint(path)

    assert restored.architecture == small_model.architecture
    assert restored.seed == small_model.seed
    _params_equal(restored.generator_params, small_model.generator_params)
    _params_equal(restored.critic_params, small_model.critic_params)

    noise = np.random.default_rng(0).standard_normal((7, 4))
    np.testing.assert_array_equal(generator_forward(restored, noise), generator_forward(small_model, noise))
    assert path.read_bytes().startswith(MAGIC)
    assert not sidecar_path(path).exists()


def test_recurrent_round_trip(series_arch, tmp_path):
    model = build_model(series_arch, seed=1)
    restored = load_checkpoint(save_checkpoint(model, tmp_path / 'series.ckpt'))
    _params_equal(restored.generator_params, model.generator_params)
    assert restored.architecture.series_length == 6


def test_stripped_checkpoint_drops_critic(small_model, tmp_path):
    full = save_checkpoint(small_model, tmp_path / 'full.ckpt')
    release = save_checkpoint(small_model, tmp_path / 'release.ckpt', strip_discriminator=True)

    restored = load_checkpoint(release)
    assert not restored.has_critic
    assert release.stat().st_size < full.stat().st_size
    _params_equal(restored.generator_params, small_model.generator_params)


def test_sidecar_metadata(small_model, tmp_path):
    metadata = {
        'seed': 3, 'config_sha256': config_digest('[run]\nseed = 3\n'), 'epsilon': 1.25,
        'delta': 1e-5, 'iterations': 4,
    }
    path = save_checkpoint(small_model, tmp_path / 'model.ckpt', metadata=metadata)
    assert sidecar_path(path).name == 'model.ckpt.meta.json'
    assert read_sidecar(path) == metadata
    assert len(metadata['config_sha256']) == 64
    with pytest.raises(DataError):
        read_sidecar(tmp_path / 'other.ckpt')


def test_rejects_foreign_file(tmp_path):
    path = tmp_path / 'notes.txt'
    path.write_bytes(b'hello, this is not a model')
    with pytest.raises(DataError, match="bad magic"):
        load_checkpoint(path)
    with pytest.raises(DataError, match="not found"):
        load_checkpoint(tmp_path / 'absent.ckpt')


def test_rejects_other_format_version(small_model, tmp_path):
    path = save_checkpoint(small_model, tmp_path / 'model.ckpt')
    blob = bytearray(path.read_bytes())
    struct.pack_into('<I', blob, len(MAGIC), FORMAT_VERSION + 1)
    path.write_bytes(bytes(blob))
    with pytest.raises(ConfigError, match="version"):
        load_checkpoint(path)


def test_rejects_truncated_and_padded_files(small_model, tmp_path):
    path = save_checkpoint(small_model, tmp_path / 'model.ckpt')
    blob = path.read_bytes()

    path.write_bytes(blob[:-8])
    with pytest.raises(DataError, match="truncated"):
        load_checkpoint(path)

    path.write_bytes(blob[:len(MAGIC) + 2])
    with pytest.raises(DataError, match="truncated"):
        load_checkpoint(path)

    path.write_bytes(blob + b'\x00' * 8)
    with pytest.raises(DataError, match="trailing"):
        load_checkpoint(path)
