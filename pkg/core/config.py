"""
Run configuration.

Values come from ``settings.MINMAX`` (itself read from the environment), then
from an optional ``KEY=value`` config file, then from keyword overrides such
as command-line flags. The merged mapping is validated by
:class:`core.serializers.ConfigSerializer`.

Services read their defaults through :func:`minmax_settings`. Inside
:func:`applied` those are the values of one run; elsewhere they are
``settings.MINMAX``. Django settings are never modified.
"""

import contextvars
import logging
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from typing import Optional

from decouple import RepositoryEnv
from django.conf import settings

from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

_active_settings = contextvars.ContextVar("minmax_active_settings", default=None)


@dataclass(frozen=True)
class PipelineConfig:
    grid_size: int
    time_samples: int
    epsilon_1: float
    epsilon_0: Optional[float]
    epsilon_su: float
    delta: float
    delta_0: float
    delta_decay: float
    solver_tol: float
    solver_max_iter: int
    replace_tol: float
    replace_max_iter: int
    probe_replace_tol: float
    jacobian_floor: float
    noise_floor: float
    threads: int
    seed: int
    target: str
    scenario: str
    output_dir: str
    rounds: int
    smooth_width: float
    patch_center: tuple
    patch_radius: float
    continuity_factor: float
    homotopy_samples: int
    property_star_samples: int
    degenerate_threshold: float
    trend_window: int
    cauchy_tol: float
    bubble_radius_factor: float
    neck_delta: float
    nu: float

    @property
    def eps0(self):
        """epsilon_0, defaulting to epsilon_1 / 12."""
        return self.epsilon_1 / 12.0 if self.epsilon_0 is None else self.epsilon_0

    @property
    def delta_schedule(self):
        return [self.delta_0 * self.delta_decay ** n for n in range(self.rounds)]

    def to_settings(self):
        """The configuration as a ``MINMAX`` settings dict."""
        return {f.name.upper(): getattr(self, f.name) for f in fields(self)}

    def to_dict(self):
        data = asdict(self)
        data["patch_center"] = list(self.patch_center)
        return data


def read_config_file(path):
    """
    Parse a ``KEY=value`` file; keys may carry the ``MINMAX_`` prefix.

    Raises:
        ConfigError: when the file cannot be read.
    """
    try:
        data = RepositoryEnv(str(path)).data
    except (OSError, ValueError) as e:
        raise ConfigError(f"Reading config file {path} failed: {e}") from e
    return {key.upper().removeprefix("MINMAX_"): value for key, value in data.items()}


def load_config(path=None, **overrides) -> PipelineConfig:
    """
    Build a validated :class:`PipelineConfig`.

    Override keywords use the lowercase field names; ``None`` values are ignored.

    Raises:
        ConfigError: on unknown keys or values failing validation.
    """
    from core.serializers import ConfigSerializer

    merged = dict(settings.MINMAX)
    if path is not None:
        merged.update(read_config_file(path))
    merged.update({key.upper(): value for key, value in overrides.items() if value is not None})

    serializer = ConfigSerializer(data=merged)
    if not serializer.is_valid():
        raise ConfigError(f"Invalid configuration: {dict(serializer.errors)}")
    values = {key.lower(): value for key, value in serializer.validated_data.items()}
    values["patch_center"] = tuple(values["patch_center"])
    config = PipelineConfig(**values)
    logger.debug("loaded config %s", config)
    return config


def minmax_settings():
    """The ``MINMAX`` values in effect for the current context."""
    active = _active_settings.get()
    return settings.MINMAX if active is None else active


@contextmanager
def applied(config: PipelineConfig):
    """Make ``config`` the source of service defaults until the block exits."""
    token = _active_settings.set(config.to_settings())
    try:
        yield config
    finally:
        _active_settings.reset(token)
