import json
import os
from typing import Any, Callable, Dict, Optional

from delmar.admm import AdmmConfig
from delmar.exceptions import ConfigurationError
from delmar.pipeline import DEFAULT_MAX_LAYERS


def to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip().lower() in ("1", "true", "yes", "on"):
        return True
    if isinstance(value, str) and value.strip().lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean: {!r}".format(value))


def _optional_int(value: Any) -> Optional[int]:
    return None if value is None else int(value)


CAST = {
    "beta": float,
    "eta": float,
    "tol": float,
    "max_iter": int,
    "mode": str,
    "seed": int,
    "initial_rank": _optional_int,
    "max_layers": int,
    "mbp": to_bool,
    "mbp_sweeps": int,
    "threshold": float,
}  # type: Dict[str, Callable[[Any], Any]]

ADMM_KEYS = ("beta", "eta", "tol", "max_iter", "mode", "seed")


class RunConfig:
    """
    Solver settings plus the pipeline parameters of one decomposition run.

    ``threshold`` binarizes feature maps when they are compared to templates.
    """

    def __init__(
        self,
        admm: Optional[AdmmConfig] = None,
        initial_rank: Optional[int] = None,
        max_layers: int = DEFAULT_MAX_LAYERS,
        mbp: bool = True,
        mbp_sweeps: int = 1,
        threshold: float = 0.0,
    ) -> None:
        self.admm = admm or AdmmConfig()
        self.initial_rank = initial_rank
        self.max_layers = max_layers
        self.mbp = mbp
        self.mbp_sweeps = mbp_sweeps
        self.threshold = threshold
        if initial_rank is not None and initial_rank < 1:
            raise ConfigurationError("initial_rank must be >= 1, got {}".format(initial_rank))
        if max_layers < 1:
            raise ConfigurationError("max_layers must be >= 1, got {}".format(max_layers))
        if mbp_sweeps < 1:
            raise ConfigurationError("mbp_sweeps must be >= 1, got {}".format(mbp_sweeps))

    @classmethod
    def from_dict(cls, params: Dict[str, Any]) -> "RunConfig":
        """Build from flat, possibly string-valued, parameters (CLI flags, json or yaml)."""
        unknown = set(params) - set(CAST)
        if unknown:
            raise ConfigurationError("Unknown config keys: {}".format(", ".join(sorted(unknown))))
        values = {}  # type: Dict[str, Any]
        for key, val in params.items():
            try:
                values[key] = CAST[key](val)
            except (TypeError, ValueError):
                raise ConfigurationError("Config key {} has an invalid value {!r}".format(key, val))
        admm = AdmmConfig(**{key: values.pop(key) for key in ADMM_KEYS if key in values})
        return cls(admm=admm, **values)

    def to_dict(self) -> Dict[str, Any]:
        params = self.admm.to_dict()
        params.update(
            {
                "initial_rank": self.initial_rank,
                "max_layers": self.max_layers,
                "mbp": self.mbp,
                "mbp_sweeps": self.mbp_sweeps,
                "threshold": self.threshold,
            }
        )
        return params

    def __eq__(self, other) -> bool:
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "RunConfig({})".format(self.to_dict())


def load_config_file(config_file: str) -> Dict[str, Any]:
    _, extension = os.path.splitext(config_file)
    if extension in (".yml", ".yaml"):
        try:
            import yaml
        except ImportError:
            raise ConfigurationError("PyYAML is required to read {}".format(config_file))

        with open(config_file, "r") as f:
            config = yaml.safe_load(f)
    elif extension == ".json":
        with open(config_file, "r") as f:
            config = json.load(f)
    else:
        raise ConfigurationError(
            "Unknown config extension {}, only .yml and .json are supported".format(extension)
        )
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigurationError("Config file {} must hold a mapping".format(config_file))
    return config


def build_run_config(
    config_file: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """File values first, then every override that is not ``None``."""
    params = load_config_file(config_file) if config_file else {}
    for key, val in (overrides or {}).items():
        if val is not None:
            params[key] = val
    return RunConfig.from_dict(params)
