from dataclasses import replace

import pytest

from urllc_diversity.config import (
    default_config,
    init_config,
    load_config,
    load_config_data,
    save_config,
)
from urllc_diversity.errors import ConfigError


def test_init_creates_default(tmp_path):
    path = tmp_path / "urllc-diversity.yaml"
    init_config(path)
    config = load_config(path)
    assert config == default_config()
    assert (config.k_bits, config.u, config.antennas) == (256, 200, 6)
    assert (config.p, config.q, config.d) == (4, 16, 24)
    assert path.read_text(encoding="utf-8").startswith("#")


def test_init_requires_overwrite_flag(tmp_path):
    path = tmp_path / "urllc-diversity.yaml"
    init_config(path)
    with pytest.raises(ConfigError):
        init_config(path)
    init_config(path, overwrite=True)


def test_comments_and_partial_files(tmp_path):
    path = tmp_path / "params.yaml"
    path.write_text("# overheads only\np: 2\nq: 8 # measurement\n", encoding="utf-8")
    assert load_config_data(path) == {"p": 2, "q": 8}


def test_empty_file_is_empty_mapping(tmp_path):
    path = tmp_path / "params.yaml"
    path.write_text("", encoding="utf-8")
    assert load_config_data(path) == {}


def test_nested_values_rejected(tmp_path):
    path = tmp_path / "params.yaml"
    path.write_text("channel:\n  m: 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config_data(path)


def test_malformed_file(tmp_path):
    path = tmp_path / "params.yaml"
    path.write_text("u: [1, 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config_data(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")


def test_save_replaces_existing_file(tmp_path):
    path = tmp_path / "urllc-diversity.yaml"
    init_config(path)
    updated = replace(default_config(), mean_snr_db=8.0, scheme="sc")
    save_config(path, updated)
    assert load_config(path) == updated
    assert list(tmp_path.iterdir()) == [path]
