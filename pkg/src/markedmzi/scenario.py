"""Scenario settings and the flat ``key = value`` config format."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Dict, Optional, Union

from .experiment import MeasurementKind, Mode

MODES = tuple(m.value for m in Mode)
MEASUREMENTS = tuple(m.value for m in MeasurementKind)


class ScenarioError(ValueError):
    """Malformed or out-of-range scenario setting."""


@dataclass(frozen=True)
class Scenario:
    phi_deg: float = 30.0
    alpha_deg: float = 0.0
    mode: str = "wave"
    measurement: str = "usd"
    pairs: int = 100_000
    trials: int = 100
    seed: int = 1

    @property
    def phi(self) -> float:
        return math.radians(self.phi_deg)

    @property
    def alpha(self) -> float:
        return math.radians(self.alpha_deg)

    def validate(self, check_phi: bool = True) -> "Scenario":
        if not math.isfinite(self.alpha_deg):
            raise ScenarioError("alpha_deg must be finite")
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.measurement not in MEASUREMENTS:
            raise ScenarioError(
                f"measurement must be one of {', '.join(MEASUREMENTS)}, got {self.measurement!r}"
            )
        if self.pairs < 0:
            raise ScenarioError(f"pairs must be >= 0, got {self.pairs}")
        if self.trials < 1:
            raise ScenarioError(f"trials must be >= 1, got {self.trials}")
        if self.pairs > 0 and self.trials < 2:
            raise ScenarioError("error bars need trials >= 2 when pairs > 0")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("seed must be in [0, 2**64 - 1]")
        if check_phi:
            check_phi_deg(self.phi_deg, self.measurement)
        return self


def phi_range_deg(measurement: str):
    return (22.5, 45.0) if measurement == "usd" else (0.0, 45.0)


def check_phi_deg(phi_deg: float, measurement: str) -> None:
    lo, hi = phi_range_deg(measurement)
    if not (math.isfinite(phi_deg) and lo <= phi_deg <= hi):
        raise ScenarioError(
            f"phi_deg = {phi_deg:g} out of range: {measurement} requires {lo:g} <= phi_deg <= {hi:g}"
        )


_TYPES = {f.name: f.type for f in fields(Scenario)}


def _convert(key: str, raw: str, where: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw, 10)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ScenarioError(f"{where}: {key} expects {kind}, got {raw!r}") from None
    return raw


def parse_scenario_text(text: str, source: str = "<config>") -> Dict[str, object]:
    """Parse config text into a dict of the keys it sets (values converted)."""
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ScenarioError(f"{where}: expected 'key = value', got {line!r}")
        if key not in _TYPES:
            raise ScenarioError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ScenarioError(f"{where}: duplicate key {key!r}")
        values[key] = _convert(key, raw, where)
    return values


def parse_scenario(
    file: Union[str, Path, None] = None,
    overrides: Optional[Dict[str, object]] = None,
    check_phi: bool = True,
) -> Scenario:
    """Defaults, then the config file, then ``overrides`` (CLI flags); validated."""
    values: Dict[str, object] = {}
    if file is not None:
        path = Path(file)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_scenario_text(text, str(path)))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario(**values).validate(check_phi=check_phi)


def format_scenario(s: Scenario) -> str:
    """Canonical config text; ``parse_scenario_text`` reads it back exactly."""
    lines = []
    for key, value in asdict(s).items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


def with_phi(s: Scenario, phi_deg: float) -> Scenario:
    return replace(s, phi_deg=phi_deg)


def with_alpha(s: Scenario, alpha_deg: float) -> Scenario:
    return replace(s, alpha_deg=alpha_deg)
