"""Experiment configuration: strict JSON schema, validation and hashing.

A config describes one target plus one or more algorithm ladders run on it.
Unknown keys are rejected so that a typo in a temperature ladder cannot
silently change a comparison.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .target import TargetSpec, build_modes
from .tempering import PTOptions, ReplicaLadder


class ConfigError(ValueError):
    """Invalid experiment config; carries the offending field path."""

    def __init__(self, field_path: str, message: str, line: int | None = None):
        self.field_path = field_path
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"config field {field_path!r}{where}: {message}")


_TOP_KEYS = {"name", "tags", "target", "ladders", "swap_rule", "rounds",
             "burnin", "balancing", "seed", "record"}
_TARGET_KEYS = {"p", "theta", "modes"}
_LADDER_KEYS = {"betas", "kinds", "L0", "iters_between_swaps"}
_BURNIN_KEYS = {"multiplicity", "iters"}
_BALANCING_KEYS = {"kind", "gamma0", "adapt", "freeze_after_burnin"}
_RECORD_KEYS = {"tvd", "hits", "wall_clock", "stop_when_all_modes_found"}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    target: TargetSpec
    ladders: dict                      # label -> ReplicaLadder
    swap_rule: str
    rounds: int
    burnin_multiplicity: int
    burnin_iters: int
    gamma0: float
    adapt: bool
    freeze_after_burnin: bool
    seed: int
    record_tvd: bool
    record_hits: bool
    record_wall_clock: bool
    stop_when_all_modes_found: bool
    tags: tuple = ()
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def resolved_swap_rule(self, label: str) -> str:
        """'auto' picks the Z-corrected rule only for direct-weight ladders."""
        if self.swap_rule != "auto":
            return self.swap_rule
        return ("z_corrected" if self.ladders[label].direct_weight
                else "standard")

    def pt_options(self, label: str, rounds: int | None = None) -> PTOptions:
        return PTOptions(
            rounds=self.rounds if rounds is None else rounds,
            swap_rule=self.resolved_swap_rule(label),
            gamma0=self.gamma0,
            adapt=self.adapt,
            freeze_after_burnin=self.freeze_after_burnin,
            burnin_multiplicity=self.burnin_multiplicity,
            burnin_iters=self.burnin_iters,
            record_tvd=self.record_tvd,
            record_hits=self.record_hits,
            record_wall_clock=self.record_wall_clock,
            stop_when_all_modes_found=self.stop_when_all_modes_found,
            algorithm_label=label,
        )


def _find_line(text: str, key: str) -> int | None:
    needle = f'"{key.split(".")[-1]}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _require(d: dict, key: str, path: str, text: str):
    if key not in d:
        raise ConfigError(f"{path}{key}", "missing required field",
                          _find_line(text, path.rstrip(".")))
    return d[key]


def _check_keys(d: dict, allowed: set, path: str, text: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(path.rstrip(".") or "<root>", "must be an object",
                          _find_line(text, path.rstrip(".")))
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{path}{k}", "unknown field",
                              _find_line(text, k))


def _typed(value, types, path: str, text: str):
    if not isinstance(value, types) or isinstance(value, bool) and bool not in (
            types if isinstance(types, tuple) else (types,)):
        names = "/".join(t.__name__ for t in
                         (types if isinstance(types, tuple) else (types,)))
        raise ConfigError(path, f"expected {names}, got {type(value).__name__}",
                          _find_line(text, path))
    return value


def parse_config(data: dict, text: str = "") -> ExperimentConfig:
    _check_keys(data, _TOP_KEYS, "", text)
    name = _typed(_require(data, "name", "", text), str, "name", text)

    tblock = _require(data, "target", "", text)
    _check_keys(tblock, _TARGET_KEYS, "target.", text)
    p = _typed(_require(tblock, "p", "target.", text), int, "target.p", text)
    theta = _typed(_require(tblock, "theta", "target.", text), (int, float),
                   "target.theta", text)
    modes_spec = _typed(_require(tblock, "modes", "target.", text), list,
                        "target.modes", text)
    try:
        target = TargetSpec(build_modes(p, modes_spec), float(theta), beta=1.0)
    except ValueError as e:
        raise ConfigError("target", str(e), _find_line(text, "target")) from e

    lblock = _require(data, "ladders", "", text)
    if not isinstance(lblock, dict) or not lblock:
        raise ConfigError("ladders", "must be a nonempty object of ladders",
                          _find_line(text, "ladders"))
    ladders = {}
    for label, ld in lblock.items():
        lpath = f"ladders.{label}."
        _check_keys(ld, _LADDER_KEYS, lpath, text)
        try:
            ladders[label] = ReplicaLadder(
                betas=tuple(_require(ld, "betas", lpath, text)),
                kinds=tuple(_require(ld, "kinds", lpath, text)),
                L0=ld.get("L0", 1),
                iters_between_swaps=ld.get("iters_between_swaps", 1),
            )
        except ValueError as e:
            raise ConfigError(f"ladders.{label}", str(e),
                              _find_line(text, label)) from e

    swap_rule = data.get("swap_rule", "auto")
    if swap_rule not in ("auto", "standard", "z_corrected"):
        raise ConfigError("swap_rule", f"unknown swap rule {swap_rule!r}",
                          _find_line(text, "swap_rule"))
    rounds = _typed(_require(data, "rounds", "", text), int, "rounds", text)
    if rounds < 1:
        raise ConfigError("rounds", "must be positive",
                          _find_line(text, "rounds"))
    seed = _typed(_require(data, "seed", "", text), int, "seed", text)

    bb = data.get("burnin", {})
    _check_keys(bb, _BURNIN_KEYS, "burnin.", text)
    bal = data.get("balancing", {})
    _check_keys(bal, _BALANCING_KEYS, "balancing.", text)
    gamma0 = float(bal.get("gamma0", 1.0))
    if gamma0 < 1.0:
        raise ConfigError("balancing.gamma0", "must be at least 1",
                          _find_line(text, "gamma0"))
    rec = data.get("record", {})
    _check_keys(rec, _RECORD_KEYS, "record.", text)

    tags = tuple(data.get("tags", []))
    return ExperimentConfig(
        name=name,
        target=target,
        ladders=ladders,
        swap_rule=swap_rule,
        rounds=rounds,
        burnin_multiplicity=int(bb.get("multiplicity", 0)),
        burnin_iters=int(bb.get("iters", 0)),
        gamma0=gamma0,
        adapt=bool(bal.get("adapt", True)),
        freeze_after_burnin=bool(bal.get("freeze_after_burnin", True)),
        seed=seed,
        record_tvd=bool(rec.get("tvd", False)),
        record_hits=bool(rec.get("hits", True)),
        record_wall_clock=bool(rec.get("wall_clock", False)),
        stop_when_all_modes_found=bool(
            rec.get("stop_when_all_modes_found", False)),
        tags=tags,
        raw=data,
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<json>", e.msg, e.lineno) from e
    return parse_config(data, text)


def config_hash(config: ExperimentConfig) -> str:
    """Hash of the semantic config content (canonical JSON, sorted keys)."""
    canonical = json.dumps(config.raw, sort_keys=True,
                           separators=(",", ":")).encode()
    return hashlib.sha256(canonical).hexdigest()
