"""
run configuration

defaults ship in nnlab_config.ini (regenerate with write_config.py); NNLAB_CONFIG points at another file and
NNLAB_PRECISION_BITS overrides the starting interval precision
"""

import os
import json
import hashlib
import logging
from dataclasses import dataclass, asdict, replace
from configparser import ConfigParser, Error as ConfigParserError

from nnlab.errors import ConfigError

log = logging.getLogger(__name__)

CONFIG_PATH = os.path.join(os.path.dirname(__file__), 'nnlab_config.ini')
MODES = ('exact', 'float')


@dataclass(frozen=True)
class RunConfig:
    mode: str = 'exact'
    exact_cap: int = 5000
    float_slack: float = 1e-9
    tower_bit_cap: int = 2 ** 24
    stage_window: int = 0
    max_length: int = 100000
    precision_bits: int = 128
    precision_retries: int = 12
    orbit_limit: int = 100000
    checkpoint_ratio: float = 1.25
    shortfall_tolerance: float = 0.02
    tail_fraction: float = 0.25
    history: int = 0
    seed: int = 0
    log_level: str = 'WARNING'

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode must be one of %s, got %r" % (MODES, self.mode))
        if self.exact_cap < 1:
            raise ConfigError("exact_cap must be at least 1")
        if not self.checkpoint_ratio > 1:
            raise ConfigError("checkpoint_ratio must be > 1")
        if self.precision_bits < 2:
            raise ConfigError("precision_bits must be at least 2")
        if not 0 <= self.tail_fraction < 1:
            raise ConfigError("tail_fraction must lie in [0, 1)")

    @property
    def exact(self):
        return self.mode == 'exact'

    def with_overrides(self, **overrides):
        overrides = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **overrides)

    def digest(self):
        """
        sha256 of the canonical json form, recorded in every manifest
        """
        canonical = json.dumps(asdict(self), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def as_dict(self):
        return asdict(self)


def load_config(path=None, **overrides):
    """
    read the ini file (shipped defaults unless told otherwise) and apply environment + keyword overrides
    """
    path = path or os.environ.get('NNLAB_CONFIG') or CONFIG_PATH
    config = ConfigParser()
    if not config.read(path):
        raise ConfigError("cannot read config file %s" % path)

    try:
        values = dict(
            mode=config.get('arithmetic', 'mode'),
            exact_cap=config.getint('arithmetic', 'exact_cap'),
            float_slack=config.getfloat('arithmetic', 'float_slack'),
            tower_bit_cap=config.getint('synthesis', 'tower_bit_cap'),
            stage_window=config.getint('synthesis', 'stage_window'),
            max_length=config.getint('synthesis', 'max_length'),
            precision_bits=config.getint('expansion', 'precision_bits'),
            precision_retries=config.getint('expansion', 'precision_retries'),
            orbit_limit=config.getint('expansion', 'orbit_limit'),
            checkpoint_ratio=config.getfloat('reports', 'checkpoint_ratio'),
            shortfall_tolerance=config.getfloat('reports', 'shortfall_tolerance'),
            tail_fraction=config.getfloat('reports', 'tail_fraction'),
            history=config.getint('reports', 'history'),
            seed=config.getint('reports', 'seed'),
            log_level=config.get('logging', 'level'),
        )
    except (ValueError, KeyError, ConfigParserError) as exc:
        raise ConfigError("bad config file %s: %s" % (path, exc)) from exc

    env_bits = os.environ.get('NNLAB_PRECISION_BITS')
    if env_bits:
        try:
            values['precision_bits'] = int(env_bits)
        except ValueError:
            raise ConfigError("NNLAB_PRECISION_BITS must be an integer, got %r" % env_bits)

    values.update({key: value for key, value in overrides.items() if value is not None})
    log.debug("config loaded from %s", path)
    return RunConfig(**values)


def _import_settings():
    """
    library-wide defaults; a broken NNLAB_CONFIG or NNLAB_PRECISION_BITS leaves the built-in values in place and the
    command line reports the error when it loads its own config
    """
    try:
        return load_config()
    except ConfigError as exc:
        log.warning("%s, using built-in defaults", exc)
        return RunConfig()


settings = _import_settings()
