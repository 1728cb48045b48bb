from __future__ import annotations

import tempfile
from pathlib import Path

from .errors import ConfigError
from .schema import EvalParams

PathLike = Path | str

_HEADER = "# urllc-diversity parameters (reference configuration)\n"


def default_config() -> EvalParams:
    return EvalParams(
        k_bits=256,
        u=200,
        antennas=6,
        nakagami_m=2.0,
        mean_snr_db=12.0,
        p=4,
        q=16,
        d=24,
        scheme="ssc",
        strategy="opt",
    )


def init_config(path: PathLike, *, overwrite: bool = False) -> EvalParams:
    target = Path(path)
    if target.exists() and not overwrite:
        raise ConfigError(f"Config file already exists: {target}")
    config = default_config()
    save_config(target, config)
    return config


def load_config(path: PathLike) -> EvalParams:
    return EvalParams.from_dict(load_config_data(path))


def load_config_data(path: PathLike) -> dict:
    raw = _load_yaml(Path(path))
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("Config must be a flat key: value mapping")
    for key, value in raw.items():
        if isinstance(value, (dict, list)):
            raise ConfigError(f"Config values must be scalars (key '{key}')")
    return raw


def save_config(path: PathLike, config: EvalParams) -> None:
    _dump_yaml(Path(path), config.to_dict())


def _load_yaml(path: Path) -> object:
    try:
        import yaml
    except ImportError as exc:
        raise ConfigError("PyYAML is required to load config files") from exc
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        try:
            return yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ConfigError(f"Config is not valid key: value text: {exc}") from exc


def _dump_yaml(path: Path, data: dict) -> None:
    try:
        import yaml
    except ImportError as exc:
        raise ConfigError("PyYAML is required to save config files") from exc
    content = _HEADER + yaml.safe_dump(data, sort_keys=False)
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        mode="w",
        encoding="utf-8",
        delete=False,
        dir=path.parent,
        prefix=f"{path.name}.",
        suffix=".tmp",
    ) as handle:
        temp_path = Path(handle.name)
        handle.write(content)
    try:
        temp_path.replace(path)
    finally:
        if temp_path.exists():
            temp_path.unlink()
