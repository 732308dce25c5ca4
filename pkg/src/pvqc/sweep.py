"""Sweep configuration files: INI-style sections expanded into experiment configs.

Grammar (parsed with :mod:`configparser`; ``#`` and ``;`` start comments)::

    [sweep]                      # optional; defaults shared by every task
    variants = all               # or a comma list of variant names
    n_qubits = 4                 # blobs default to n_qubits = d instead
    depth = 2
    epochs = 40
    batch_size = 20
    n_train = 200
    n_test = 100
    seeds = 0, 1, 2, 3, 4
    lr_circuit = 0.01
    lr_observable = 0.1
    lr_controller = 0.01
    latent_dim = 16
    obs_dtype = float64
    output_dir = results         # optional

    [task:moons]
    noise = 0.1, 0.2, 0.3        # one config per listed value

    [task:circles]
    noise = 0.05, 0.1, 0.2
    factor = 0.5

    [task:blobs]
    d = 8, 10, 12
    class_sep = 1.0

Any ``[sweep]`` key may be overridden inside a task section.  A file with a
single task can also write ``task = moons`` plus its grid keys directly under
``[sweep]``.  Configs are ordered task section, then grid value, then variant.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from . import models
from .experiment import FAMILIES, ExperimentConfig


class ConfigError(ValueError):
    """Malformed or invalid sweep file; ``lineno`` is set for syntax errors."""

    def __init__(self, message: str, lineno: int | None = None, source: str | None = None):
        where = ""
        if source is not None:
            where = f"{source}:{lineno}: " if lineno is not None else f"{source}: "
        elif lineno is not None:
            where = f"line {lineno}: "
        super().__init__(where + message)
        self.lineno = lineno


INT_KEYS = ("n_qubits", "depth", "epochs", "batch_size", "n_train", "n_test", "latent_dim")
FLOAT_KEYS = ("lr_circuit", "lr_observable", "lr_controller")
SHARED_KEYS = set(INT_KEYS) | set(FLOAT_KEYS) | {"variants", "seeds", "obs_dtype", "output_dir"}
TASK_KEYS = {
    "moons": {"noise"},
    "circles": {"noise", "factor"},
    "blobs": {"d", "class_sep"},
}
GRID_KEY = {"moons": "noise", "circles": "noise", "blobs": "d"}


@dataclass
class SweepSpec:
    configs: list[ExperimentConfig] = field(default_factory=list)
    source: str | None = None

    def __len__(self) -> int:
        return len(self.configs)


def _split(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _number(kind, raw: str, key: str, source):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}", source=source) from None


def _variants(raw: str, source) -> tuple[str, ...]:
    names = _split(raw)
    if names == ["all"]:
        return models.VARIANTS
    for name in names:
        if name not in models.VARIANTS:
            raise ConfigError(
                f"unknown variant {name!r}; valid kinds: {', '.join(models.VARIANTS)}", source=source
            )
    if not names:
        raise ConfigError("variants list is empty", source=source)
    return tuple(names)


def _task_sections(parser: configparser.ConfigParser, source):
    tasks = []
    for section in parser.sections():
        if section == "sweep":
            continue
        head, _, family = section.partition(":")
        if head.strip() != "task" or family.strip() not in FAMILIES:
            raise ConfigError(
                f"unknown section [{section}]; expected [sweep] or [task:<{'|'.join(FAMILIES)}>]",
                source=source,
            )
        tasks.append((family.strip(), dict(parser[section])))
    if parser.has_section("sweep") and "task" in parser["sweep"]:
        family = parser["sweep"]["task"].strip()
        if family not in FAMILIES:
            raise ConfigError(f"unknown task {family!r}; expected one of {FAMILIES}", source=source)
        own = {k: v for k, v in parser["sweep"].items() if k in TASK_KEYS[family]}
        tasks.insert(0, (family, own))
    return tasks


def _expand(family: str, shared: dict, own: dict, source) -> list[ExperimentConfig]:
    merged = {**shared, **own}
    allowed = SHARED_KEYS | TASK_KEYS[family] | {"task"}
    unknown = sorted(set(merged) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) for task {family}: {', '.join(unknown)}", source=source)
    base: dict = {"family": family}
    for key in INT_KEYS:
        if key in merged:
            base[key] = _number(int, merged[key], key, source)
    for key in FLOAT_KEYS:
        if key in merged:
            base[key] = _number(float, merged[key], key, source)
    if "seeds" in merged:
        base["seeds"] = tuple(_number(int, s, "seeds", source) for s in _split(merged["seeds"]))
    if "obs_dtype" in merged:
        base["obs_dtype"] = merged["obs_dtype"].strip()
    if "output_dir" in merged:
        base["output_dir"] = merged["output_dir"].strip()
    if family == "circles" and "factor" in merged:
        base["factor"] = _number(float, merged["factor"], "factor", source)
    if family == "blobs" and "class_sep" in merged:
        base["class_sep"] = _number(float, merged["class_sep"], "class_sep", source)
    variants = _variants(merged.get("variants", "all"), source)

    grid_key = GRID_KEY[family]
    if grid_key not in merged:
        raise ConfigError(f"task {family} needs a '{grid_key}' list", source=source)
    kind = int if family == "blobs" else float
    grid = [_number(kind, raw, grid_key, source) for raw in _split(merged[grid_key])]
    if not grid:
        raise ConfigError(f"task {family}: '{grid_key}' list is empty", source=source)

    configs = []
    for value in grid:
        params = dict(base)
        if family == "blobs":
            params["n_features"] = value
            params.setdefault("n_qubits", value)
        else:
            params["noise"] = value
        for variant in variants:
            try:
                configs.append(ExperimentConfig(variant=variant, **params))
            except ValueError as exc:
                raise ConfigError(f"task {family} {grid_key}={value}: {exc}", source=source) from None
    return configs


def parse_config_text(text: str, source: str | None = None) -> SweepSpec:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__"
    )
    try:
        parser.read_string(text, source=source or "<string>")
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", exc.lineno, source) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], exc.lineno, source) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", lineno, source) from None

    shared = {}
    if parser.has_section("sweep"):
        shared = {k: v for k, v in parser["sweep"].items() if k != "task" and k not in ("noise", "factor", "d", "class_sep")}
        extra = set(parser["sweep"]) - SHARED_KEYS - {"task", "noise", "factor", "d", "class_sep"}
        if extra:
            raise ConfigError(f"unknown key(s) in [sweep]: {', '.join(sorted(extra))}", source=source)
    configs = []
    for family, own in _task_sections(parser, source):
        configs.extend(_expand(family, shared, own, source))
    return SweepSpec(configs, source)


def parse_config(path) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config_text(text, source=str(path))
