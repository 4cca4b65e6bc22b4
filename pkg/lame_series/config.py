"""
Run configuration for the CLI.

A RunConfig is everything one CLI invocation needs: parameters, kind,
mode, x sweep, truncation and output format. It can be built from flags,
from a YAML/JSON file (--config), from a bundled preset (--preset), or
from a JSON document previously written by the CLI itself (the "config"
block is picked out).

Layering, lowest to highest priority:
    preset  →  --config file  →  explicit flags

Usage:
    cfg = RunConfig.load("sweep.yaml")
    cfg = RunConfig.from_dict(merge_flags(cfg.to_dict(), {"tol": 1e-10}))
    cfg.save("sweep.json")
"""

from __future__ import annotations
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import yaml

from .errors import InvalidParamsError, SpecViolationError
from .models import IndicialRoot, LameParams, PolynomialSpec, SeriesMode, Sign, TruncationSpec
from .numerics import Precision

logger = logging.getLogger(__name__)

# x sweeps longer than this are refused
MAX_X_VALUES = 100_000


class OutputFormat(Enum):
    HUMAN = "human"
    CSV = "csv"
    JSON = "json"


# ── x values ─────────────────────────────────────────────────────────

def _parse_range(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidParamsError(f"x range must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InvalidParamsError(f"x range must be numeric, got {text!r}") from None
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise InvalidParamsError(f"x range must be finite, got {text!r}")
    if step == 0 or (stop - start) * step < 0:
        raise InvalidParamsError(f"x range {text!r} never reaches stop")
    # stop is inclusive; the epsilon absorbs 0.1-style step rounding
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count > MAX_X_VALUES:
        raise InvalidParamsError(f"x range {text!r} has {count} points (max {MAX_X_VALUES})")
    last = start + (count - 1) * step
    return tuple(float(v) for v in np.linspace(start, last, count))


def parse_x_values(value: Union[str, float, Sequence[float], None]) -> tuple[float, ...]:
    """
    x values from a number, a list, "x1,x2,…" or "start:stop:step"
    (stop included when it lies on the grid).
    """
    if value is None:
        return ()
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        values = (float(value),)
    elif isinstance(value, str):
        text = value.strip()
        if not text:
            return ()
        if ":" in text:
            values = _parse_range(text)
        else:
            try:
                values = tuple(float(v) for v in text.split(",") if v.strip())
            except ValueError:
                raise InvalidParamsError(f"x list must be comma-separated numbers, got {text!r}") from None
    else:
        try:
            values = tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise InvalidParamsError(f"x values must be numbers, got {value!r}") from None
    for v in values:
        if not math.isfinite(v):
            raise InvalidParamsError(f"x values must be finite, got {v}")
    return values


def parse_alpha_seq(value: Union[str, Sequence[int]]) -> tuple[int, ...]:
    """'1,1,2' or [1, 1, 2] → (1, 1, 2)."""
    if isinstance(value, str):
        items = [v.strip() for v in value.split(",") if v.strip()]
    else:
        items = list(value)
    out = []
    for item in items:
        try:
            number = float(item)
        except (TypeError, ValueError):
            raise SpecViolationError(f"alpha_seq entries must be integers, got {item!r}") from None
        if not number.is_integer():
            raise SpecViolationError(f"alpha_seq entries must be integers, got {item!r}")
        out.append(int(number))
    return tuple(out)


# ── RunConfig ────────────────────────────────────────────────────────

@dataclass
class RunConfig:
    """
    One CLI run. spec is present exactly when mode is polynomial; in that
    mode params.alpha is replaced by the eigenvalue the spec selects.

    x_range keeps the descriptor the user typed ("0:1:0.1") so that a
    saved config reproduces the sweep the same way it was written.
    """
    params: LameParams
    kind: IndicialRoot = IndicialRoot.FIRST_KIND
    mode: SeriesMode = SeriesMode.INFINITE
    spec: Optional[PolynomialSpec] = None
    x_values: tuple[float, ...] = ()
    x_range: Optional[str] = None
    trunc: TruncationSpec = field(default_factory=TruncationSpec)
    output: OutputFormat = OutputFormat.HUMAN
    force: bool = False
    depth: Optional[int] = None
    precision: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        self.kind = IndicialRoot.parse(self.kind)
        try:
            self.mode = SeriesMode(self.mode)
            self.output = OutputFormat(self.output)
        except ValueError as e:
            raise InvalidParamsError(str(e)) from None

        if (self.spec is not None) != (self.mode is SeriesMode.POLYNOMIAL):
            raise SpecViolationError(
                f"spec must be given exactly for polynomial mode "
                f"(mode={self.mode.value}, spec={'set' if self.spec else 'missing'})"
            )
        if self.spec is not None:
            alpha = self.spec.alpha(self.kind)
            if self.params.alpha not in (0.0, alpha):
                logger.info(f"polynomial mode: alpha={self.params.alpha} replaced by {alpha}")
            self.params = self.params.with_alpha(alpha)

        if self.x_range and not self.x_values:
            self.x_values = parse_x_values(self.x_range)
        self.x_values = parse_x_values(self.x_values)

        if self.depth is not None:
            if int(self.depth) != self.depth or self.depth < 1:
                raise InvalidParamsError(f"depth must be a positive integer, got {self.depth!r}")
            self.depth = int(self.depth)
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidParamsError(f"workers must be a positive integer, got {self.workers!r}")
        self.workers = int(self.workers)
        if self.precision is not None:
            self.precision = Precision.resolve(self.precision).value

    @property
    def oracle_depth(self) -> int:
        """Frobenius depth for compare/residual: --depth, else 2·i_max + n_max."""
        return self.depth if self.depth is not None else self.trunc.depth

    def to_dict(self) -> dict:
        """Serialize to dict (for saving)."""
        return {
            "params": self.params.to_dict(),
            "lambda": self.kind.label,
            "mode": self.mode.value,
            "spec": self.spec.to_dict() if self.spec else None,
            "x": self.x_range if self.x_range else list(self.x_values),
            "trunc": self.trunc.to_dict(),
            "output": self.output.value,
            "force": self.force,
            "depth": self.depth,
            "precision": self.precision,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        """
        Deserialize from dict. A CLI JSON output document is accepted too:
        its "config" block is used and the rows are ignored.
        """
        if not isinstance(data, dict):
            raise InvalidParamsError(f"config must be a mapping, got {type(data).__name__}")
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        if "params" not in data:
            raise InvalidParamsError("config has no 'params' block")

        x = data.get("x")
        x_range = x if isinstance(x, str) and ":" in x else None
        try:
            return cls(
                params=LameParams.from_dict(data["params"]),
                kind=data.get("lambda", "0"),
                mode=data.get("mode", SeriesMode.INFINITE.value),
                spec=PolynomialSpec.from_dict(data["spec"]) if data.get("spec") else None,
                x_values=() if x_range else parse_x_values(x),
                x_range=x_range,
                trunc=TruncationSpec.from_dict(data.get("trunc") or {}),
                output=data.get("output", OutputFormat.HUMAN.value),
                force=bool(data.get("force", False)),
                depth=data.get("depth"),
                precision=data.get("precision"),
                workers=data.get("workers", 1),
            )
        except KeyError as e:
            raise InvalidParamsError(f"config is missing {e}") from None

    def to_yaml(self) -> str:
        return yaml.dump(self.to_dict(), default_flow_style=False, sort_keys=False)

    @classmethod
    def from_yaml(cls, yaml_str: str) -> RunConfig:
        try:
            return cls.from_dict(yaml.safe_load(yaml_str))
        except yaml.YAMLError as e:
            raise InvalidParamsError(f"invalid YAML config: {e}") from None

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, json_str: str) -> RunConfig:
        try:
            return cls.from_dict(json.loads(json_str))
        except json.JSONDecodeError as e:
            raise InvalidParamsError(f"invalid JSON config: {e}") from None

    def save(self, path: Union[str, Path]) -> None:
        """Save to file (YAML or JSON based on extension)."""
        p = Path(path)
        content = self.to_yaml() if p.suffix in (".yaml", ".yml") else self.to_json()
        p.write_text(content)

    @classmethod
    def load(cls, path: Union[str, Path]) -> RunConfig:
        """Load from file (YAML or JSON based on extension)."""
        return cls.from_dict(load_config_dict(path))

    def clone(self, **overrides) -> RunConfig:
        """Copy with flat flag-style overrides (see merge_flags)."""
        return RunConfig.from_dict(merge_flags(self.to_dict(), overrides))


def load_config_dict(path: Union[str, Path]) -> dict:
    """Raw config mapping from a YAML or JSON file."""
    p = Path(path)
    try:
        content = p.read_text()
    except OSError as e:
        raise InvalidParamsError(f"cannot read config {p}: {e}") from None
    try:
        data = yaml.safe_load(content) if p.suffix in (".yaml", ".yml") else json.loads(content)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise InvalidParamsError(f"cannot parse config {p}: {e}") from None
    if not isinstance(data, dict):
        raise InvalidParamsError(f"config {p} must hold a mapping")
    if isinstance(data.get("config"), dict):
        data = data["config"]
    return data


# ── Flag overlay ─────────────────────────────────────────────────────

_PARAM_KEYS = ("a", "b", "c", "q", "alpha")
_TRUNC_KEYS = ("n_max", "i_max", "tol")
_SPEC_KEYS = ("j", "alpha_seq", "sign")
_TOP_KEYS = ("lambda", "mode", "x", "output", "force", "depth", "precision", "workers")


def merge_flags(base: Optional[dict], flags: dict) -> dict:
    """
    Overlay flat flag values (None means "not given") onto a nested
    config dict. Switching mode to infinite drops the spec block.
    """
    data = json.loads(json.dumps(base or {}))
    params = dict(data.get("params") or {})
    trunc = dict(data.get("trunc") or {})
    spec = dict(data.get("spec") or {})

    for key, value in flags.items():
        if value is None:
            continue
        if key in _PARAM_KEYS:
            params[key] = value
        elif key in _TRUNC_KEYS:
            trunc[key] = value
        elif key in _SPEC_KEYS:
            spec[key] = list(parse_alpha_seq(value)) if key == "alpha_seq" else value
        elif key in _TOP_KEYS:
            data[key] = value
        else:
            raise InvalidParamsError(f"unknown config key {key!r}")

    if isinstance(spec.get("sign"), Sign):
        spec["sign"] = spec["sign"].value
    data["params"] = params
    data["trunc"] = trunc
    if data.get("mode", SeriesMode.INFINITE.value) == SeriesMode.POLYNOMIAL.value:
        if "alpha_seq" not in spec:
            raise SpecViolationError("polynomial mode needs --alpha-seq")
        data["spec"] = spec
    else:
        if spec.get("alpha_seq"):
            logger.debug("infinite mode: alpha_seq ignored")
        data["spec"] = None
    return data


# ── Presets ──────────────────────────────────────────────────────────

class PresetLoader:
    """
    Loads bundled run presets from the presets/ directory.

    Each preset is a YAML mapping in RunConfig.to_dict() layout (partial
    mappings are fine; missing keys take their defaults) plus an optional
    "description".
    """

    def __init__(self, presets_dir: Union[str, Path] = None):
        if presets_dir:
            self._dir = Path(presets_dir)
        else:
            self._dir = Path(__file__).parent / "presets"
        self._cache: dict[str, dict] = {}

    def get(self, name: str) -> Optional[dict]:
        """Raw preset mapping, or None when missing or unreadable."""
        if name in self._cache:
            return self._cache[name]

        path = self._dir / f"{name}.yaml"
        if not path.exists():
            logger.debug(f"No preset: {name}")
            return None

        try:
            with open(path, "r") as f:
                data = yaml.safe_load(f)
            if not isinstance(data, dict):
                logger.error(f"Preset {path} is not a mapping")
                return None
            data.pop("description", None)
            self._cache[name] = data
            return data
        except Exception as e:
            logger.error(f"Failed to load {path}: {e}")
            return None

    def describe(self, name: str) -> str:
        path = self._dir / f"{name}.yaml"
        try:
            with open(path, "r") as f:
                return (yaml.safe_load(f) or {}).get("description", "")
        except Exception:
            return ""

    def list_presets(self) -> list[str]:
        if not self._dir.exists():
            return []
        return sorted(p.stem for p in self._dir.glob("*.yaml") if not p.name.startswith("_"))
