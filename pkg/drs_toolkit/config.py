"""Configuration loading and validation for the DRS toolkit."""
from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any

import voluptuous as vol
import yaml

from .const import (
    CONF_INVENTORY,
    CONF_JOBS,
    CONF_LANGUAGES,
    CONF_MASK_RATE,
    CONF_OPERATORS,
    CONF_RELATIONS,
    CONF_RESTARTS,
    CONF_SEED,
    CONF_STRICT_SCOPE,
    DEFAULT_MASK_RATE,
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    ENV_PREFIX,
    LANGUAGES,
    MANIFEST_COUNTS,
    MANIFEST_LANGUAGES,
    MANIFEST_RELEASE,
    SPLITS,
    TIERS,
)
from .exceptions import ConfigError, DataError
from .sequence_model import DEFAULT_INVENTORY, SymbolInventory

_LOGGER = logging.getLogger(__name__)

_SYMBOL = vol.All(str, vol.Match(r"^[A-Z]+$", msg="must be uppercase letters"))

INVENTORY_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_OPERATORS): [_SYMBOL],
        vol.Required(CONF_RELATIONS): [_SYMBOL],
    }
)

RUN_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.Coerce(int),
        vol.Optional(CONF_RESTARTS, default=DEFAULT_RESTARTS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_MASK_RATE, default=DEFAULT_MASK_RATE): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
        ),
        vol.Optional(CONF_JOBS, default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_LANGUAGES, default=list(LANGUAGES)): [vol.In(LANGUAGES)],
        vol.Optional(CONF_INVENTORY, default=None): vol.Any(None, vol.IsFile()),
        vol.Optional(CONF_STRICT_SCOPE, default=False): vol.Boolean(),
    }
)

_COUNT_KEY = vol.Match(
    rf"^({'|'.join(LANGUAGES)})/({'|'.join(TIERS)})/({'|'.join(SPLITS)})$",
    msg="must be lang/tier/split",
)

MANIFEST_SCHEMA = vol.Schema(
    {
        vol.Required(MANIFEST_RELEASE): str,
        vol.Required(MANIFEST_LANGUAGES): [vol.In(LANGUAGES)],
        vol.Optional(MANIFEST_COUNTS, default={}): {
            _COUNT_KEY: vol.All(int, vol.Range(min=0))
        },
    }
)

# settings that can come from the environment
_ENV_KEYS = (CONF_SEED, CONF_RESTARTS, CONF_MASK_RATE, CONF_JOBS, CONF_INVENTORY, CONF_LANGUAGES)


def load_inventory(path: Path | str | None) -> SymbolInventory:
    """Load a symbol inventory from YAML, or return the default one."""
    if path is None:
        return DEFAULT_INVENTORY
    try:
        with open(path, encoding="utf-8") as file:
            data = yaml.safe_load(file)
        data = INVENTORY_SCHEMA(data)
    except (OSError, yaml.YAMLError) as err:
        _LOGGER.error("Cannot read inventory %s: %s", path, err)
        raise ConfigError(f"Cannot read inventory {path}: {err}") from err
    except vol.Invalid as err:
        _LOGGER.error("Invalid inventory %s: %s", path, err)
        raise ConfigError(f"Invalid inventory {path}: {err}") from err

    inventory = SymbolInventory.from_lists(data[CONF_OPERATORS], data[CONF_RELATIONS])
    _LOGGER.debug(
        "Loaded %d operators and %d relations from %s",
        len(inventory.operators),
        len(inventory.discourse_relations),
        path,
    )
    return inventory


def validate_manifest(data: Any) -> dict[str, Any]:
    """Validate a corpus manifest."""
    try:
        return MANIFEST_SCHEMA(data)
    except vol.Invalid as err:
        raise DataError(f"Invalid manifest: {err}") from err


def environment_overrides(environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    """Return settings given as DRS_TOOLKIT_* environment variables."""
    environ = os.environ if environ is None else environ
    overrides: dict[str, Any] = {}
    for key in _ENV_KEYS:
        value = environ.get(f"{ENV_PREFIX}{key.upper()}")
        if value is None or value == "":
            continue
        overrides[key] = value.split(",") if key == CONF_LANGUAGES else value
    return overrides


def validate_input(data: Mapping[str, Any]) -> dict[str, Any]:
    """Validate run settings against the schema."""
    try:
        return RUN_CONFIG_SCHEMA(dict(data))
    except vol.Invalid as err:
        raise ConfigError(f"Invalid configuration: {err}") from err


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every subcommand."""

    seed: int = DEFAULT_SEED
    restarts: int = DEFAULT_RESTARTS
    mask_rate: float = DEFAULT_MASK_RATE
    jobs: int = 1
    languages: tuple[str, ...] = LANGUAGES
    inventory_path: str | None = None
    strict_scope: bool = False

    @classmethod
    def from_sources(
        cls,
        flags: Mapping[str, Any] | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> RunConfig:
        """Resolve flags over environment over defaults."""
        merged = environment_overrides(environ)
        merged.update(
            {key: value for key, value in (flags or {}).items() if value is not None}
        )
        known = {key: value for key, value in merged.items() if key in _RUN_KEYS}
        data = validate_input(known)
        return cls(
            seed=data[CONF_SEED],
            restarts=data[CONF_RESTARTS],
            mask_rate=data[CONF_MASK_RATE],
            jobs=data[CONF_JOBS],
            languages=tuple(data[CONF_LANGUAGES]),
            inventory_path=data[CONF_INVENTORY],
            strict_scope=data[CONF_STRICT_SCOPE],
        )

    @cached_property
    def inventory(self) -> SymbolInventory:
        """Return the configured symbol inventory."""
        return load_inventory(self.inventory_path)


_RUN_KEYS = frozenset(
    (
        CONF_SEED,
        CONF_RESTARTS,
        CONF_MASK_RATE,
        CONF_JOBS,
        CONF_LANGUAGES,
        CONF_INVENTORY,
        CONF_STRICT_SCOPE,
    )
)
