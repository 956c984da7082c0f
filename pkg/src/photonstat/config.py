"""Scenario configuration parsing and flat-file result output.

Configs are plain JSON; every validation failure carries the dotted path of
the offending field.  Results go to CSV (one header row, RFC-4180 quoting,
floats as shortest round-trip reprs so identical runs are byte-identical)
with a JSON sidecar echoing the full config, tool version, and wall clock.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError
from .quantum import CorrelationOrder

PRESETS = ("forward", "off-axis", "explicit")


def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return cfg[key]


def _as_positive_int(value, path: str) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected integer, got {value!r}") from None
    if out < 1:
        raise ConfigError(path, f"must be >= 1, got {out}")
    return out


def _as_grid(value, path: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        raise ConfigError(path, "must be a non-empty list")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(path, "entries must be numbers") from None


@dataclass
class ScenarioConfig:
    """Validated scenario: state family, geometry, order, directions, sweep."""

    state: dict
    ensemble: dict
    order: CorrelationOrder
    directions: dict
    sweep: dict
    realizations: int
    samples: int
    seed: int
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, cfg: dict) -> "ScenarioConfig":
        if not isinstance(cfg, dict):
            raise ConfigError("", "config root must be a JSON object")

        order_cfg = cfg.get("order", {})
        try:
            order = CorrelationOrder(int(order_cfg.get("m", 0)), int(order_cfg.get("n", 0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError("order", str(exc)) from None

        state = cfg.get("state", {"kind": "pulse", "theta": math.pi})
        kind = state.get("kind")
        if kind not in ("pulse", "driven", "moments", "classical"):
            raise ConfigError("state.kind", f"unknown state kind {kind!r}")
        if kind == "pulse" and "theta" not in state:
            raise ConfigError("state.theta", "missing required field")
        if kind == "driven" and "s" not in state:
            raise ConfigError("state.s", "missing required field")
        if kind == "classical" and "e_incoh" not in state:
            raise ConfigError("state.e_incoh", "missing required field")

        ens = cfg.get("ensemble", {})
        if "positions" not in ens:
            _as_positive_int(ens.get("n", 0) or 0, "ensemble.n")

        directions = cfg.get("directions", {"preset": "forward"})
        if "vectors" in directions:
            vecs = np.asarray(directions["vectors"], dtype=float)
            if vecs.ndim != 2 or vecs.shape[1] != 3:
                raise ConfigError("directions.vectors", "must be a list of 3-vectors")
            if vecs.shape[0] != order.total:
                raise ConfigError(
                    "directions.vectors",
                    f"need {order.total} vectors for order ({order.m},{order.n}), "
                    f"got {vecs.shape[0]}",
                )
        else:
            preset = directions.get("preset", "forward")
            if preset not in ("forward", "off-axis"):
                raise ConfigError("directions.preset", f"unresolvable preset {preset!r}")

        sweep = cfg.get("sweep", {})
        parsed_sweep: dict[str, list[float]] = {}
        for axis in ("n_grid", "r_grid", "theta_grid", "s_grid"):
            if axis in sweep:
                parsed_sweep[axis] = _as_grid(sweep[axis], f"sweep.{axis}")
        if "n_grid" in parsed_sweep:
            parsed_sweep["n_grid"] = [
                _as_positive_int(v, "sweep.n_grid") for v in parsed_sweep["n_grid"]
            ]
        state_axes = [a for a in ("r_grid", "theta_grid", "s_grid") if a in parsed_sweep]
        if len(state_axes) > 1:
            raise ConfigError("sweep", f"at most one state axis allowed, got {state_axes}")

        realizations = _as_positive_int(cfg.get("realizations", 1), "realizations")
        samples = int(cfg.get("samples", 0) or 0)
        if samples < 0:
            raise ConfigError("samples", "must be non-negative")
        seed = int(cfg.get("seed", 0) or 0)

        return cls(
            state=state,
            ensemble=ens,
            order=order,
            directions=directions,
            sweep=parsed_sweep,
            realizations=realizations,
            samples=samples,
            seed=seed,
            raw=cfg,
        )

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        return cls.from_dict(cfg)


def format_cell(value: Any) -> str:
    """Deterministic text form: shortest round-trip repr for floats."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@dataclass
class ResultTable:
    """Row-major records with a fixed column schema."""

    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def append(self, **cells) -> None:
        unknown = set(cells) - set(self.columns)
        if unknown:
            raise KeyError(f"cells {unknown} not in schema")
        self.rows.append(tuple(cells.get(col) for col in self.columns))

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(v) for v in row])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())


def write_sidecar(path, config_echo: dict, wall_clock_s: float, extra: dict | None = None):
    from . import __version__

    payload = {
        "tool": "photonstat",
        "version": __version__,
        "wall_clock_s": wall_clock_s,
        "config": config_echo,
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


class Stopwatch:
    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self._t0
        return False
