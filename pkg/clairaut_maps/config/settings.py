"""
Numeric settings for verification runs.

Values are layered: dataclass defaults, then CLAIRAUT_* environment
variables (a .env file is honoured), then a scenario's ``tolerances``
block, then per-check ``tol``, then command-line overrides.
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from clairaut_maps.models import ScenarioError

import logging
logger = logging.getLogger(__name__)

ENV_PREFIX = 'CLAIRAUT_'


@dataclass(frozen=True)
class VerificationSettings:
    """Tolerances and step sizes shared by every check of a run."""
    residual_tol: float = 1e-8
    rank_tol: float = 1e-10
    rank_ambiguity_factor: float = 100.0
    geodesic_step: float = 1e-3
    geodesic_t_end: float = 1.0
    drift_tol: float = 1e-5
    blowup_limit: float = 1e12
    fd_step: float = 1e-5
    pd_tol: float = 1e-10
    trig_zero: float = 1e-12
    seed: int = 0
    log_level: str = 'WARNING'

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VerificationSettings':
        """Create VerificationSettings from dictionary."""
        return cls().updated(data)

    def updated(self, overrides: Optional[Dict[str, Any]]) -> 'VerificationSettings':
        """
        A copy with ``overrides`` applied.

        Raises:
            ScenarioError: on unknown keys or values of the wrong type
        """
        if not overrides:
            return self
        known = {f.name: f for f in fields(self)}
        converted: Dict[str, Any] = {}
        for key, value in overrides.items():
            if key not in known:
                raise ScenarioError(f"Unknown setting {key!r}")
            converted[key] = _coerce(key, known[key].type, value)
        return replace(self, **converted)

    @classmethod
    def from_env(cls, dotenv: bool = True) -> 'VerificationSettings':
        """Defaults overridden by CLAIRAUT_<FIELD> environment variables."""
        if dotenv:
            load_dotenv()
        overrides = {}
        for f in fields(cls):
            raw = os.getenv(f"{ENV_PREFIX}{f.name.upper()}")
            if raw is not None and raw.strip():
                overrides[f.name] = raw.strip()
        if overrides:
            logger.info(f"Settings from environment: {sorted(overrides)}")
        return cls().updated(overrides)


def _coerce(key: str, kind: Any, value: Any) -> Any:
    name = kind if isinstance(kind, str) else getattr(kind, '__name__', str(kind))
    try:
        if name == 'int':
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if name == 'float':
            if isinstance(value, bool):
                raise ValueError(value)
            result = float(value)
            if result <= 0:
                raise ValueError(value)
            return result
        return str(value).upper() if key == 'log_level' else str(value)
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"Invalid value for {key}: {value!r}") from e
