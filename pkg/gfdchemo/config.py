#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Run configurations

A SimulationConfig is a Bunch with a fixed key set.  Values come, in
increasing precedence, from the defaults, a built-in preset, an INI file
and command line flags.

INI layout (lists are comma separated):

    [run]             preset
    [discretization]  grid, cloud, domain, perturbation, star_size,
                      weight_power, seed
    [time]            dt, t_final, report_times, snapshot_times
    [model]           gamma, mu, initial, bump_a, bump_b, constant_value,
                      override_hypotheses
    [stability]       mode, cadence
    [output]          output_dir
"""
import configparser
import copy
import io
import logging
import numbers
import os

import numpy as np

from gfdchemo._utilities import Bunch
from gfdchemo.errors import ConfigError
from gfdchemo.geometry import S_MIN
from gfdchemo.model import GAMMAS, INITIAL_CONDITIONS

logger = logging.getLogger(__name__)

STABILITY_MODES = ('off', 'warn', 'strict')
REQUIRED = ('dt', 't_final', 'gamma', 'mu', 'initial')
TIME_TOL = 1e-9

IRREGULAR_CLOUD = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                               'clouds', 'irregular-361.txt')

DEFAULTS = {
    'grid': None,
    'cloud': None,
    'domain': (0.0, 1.0, 0.0, 1.0),
    'perturbation': 0.0,
    'star_size': 8,
    'weight_power': 1.0,
    'dt': None,
    't_final': None,
    'report_times': [],
    'snapshot_times': [],
    'gamma': None,
    'mu': None,
    'initial': None,
    'bump_a': 0.1,
    'bump_b': 5.0,
    'constant_value': 1.0,
    'override_hypotheses': False,
    'stability': 'warn',
    'stability_cadence': 100,
    'output_dir': 'output',
    'seed': 0,
}


class SimulationConfig(Bunch):
    """
    Bunch of run settings.  Only the keys of DEFAULTS exist; setting any
    other key raises ConfigError.
    """

    def __init__(self, *args, **kwargs):
        Bunch.__init__(self, copy.deepcopy(DEFAULTS))
        self.set(*args, **kwargs)

    def __setattr__(self, name, value):
        self.set(**{name: value})

    def set(self, *args, **kwargs):
        try:
            self.update_values(*args, strict=True, **kwargs)
        except KeyError as err:
            raise ConfigError(err.args[0], "unknown configuration key")
        return self

    @property
    def n_steps(self):
        return self.step_index(self.t_final)

    def step_index(self, t):
        return int(round(t / self.dt))

    def validate(self):
        """Check every key; returns self or raises ConfigError naming the key."""
        for key in REQUIRED:
            if self[key] is None:
                raise ConfigError(key, "required")

        if (self.grid is None) == (self.cloud is None):
            raise ConfigError('grid', "exactly one of grid and cloud must be set")
        if self.grid is not None and not (_is_int(self.grid) and self.grid >= 3):
            raise ConfigError('grid', "must be an integer >= 3, got %r" % (self.grid,))
        if self.cloud is not None and not isinstance(self.cloud, (str, os.PathLike)):
            raise ConfigError('cloud', "must be a path")
        dom = self.domain
        if (len(dom) != 4 or not all(_is_real(b) for b in dom)
                or not (dom[1] > dom[0] and dom[3] > dom[2])):
            raise ConfigError('domain', "must be xmin xmax ymin ymax with positive area")
        if not (_is_real(self.perturbation) and 0.0 <= self.perturbation < 0.5):
            raise ConfigError('perturbation', "must lie in [0, 0.5)")
        if self.perturbation > 0 and self.grid is None:
            raise ConfigError('perturbation', "applies to regular grids only")
        if not (_is_int(self.star_size) and self.star_size >= S_MIN):
            raise ConfigError('star_size', "must be an integer >= %d" % S_MIN)
        _positive(self, 'weight_power')
        _positive(self, 'dt')
        _positive(self, 't_final')
        _multiple_of_dt(self, 't_final', [self.t_final])
        for key in ('report_times', 'snapshot_times'):
            times = list(self[key])
            if not all(_is_real(t) and t >= 0 for t in times):
                raise ConfigError(key, "times must be non-negative numbers")
            if times and max(times) > self.t_final + TIME_TOL:
                raise ConfigError(key, "time %g beyond t_final %g"
                                  % (max(times), self.t_final))
            _multiple_of_dt(self, key, times)

        if self.gamma not in GAMMAS:
            raise ConfigError('gamma', "must be one of %s" % sorted(GAMMAS))
        _positive(self, 'mu')
        if self.initial not in INITIAL_CONDITIONS:
            raise ConfigError('initial', "must be one of %s" % sorted(INITIAL_CONDITIONS))
        _positive(self, 'bump_a')
        _positive(self, 'bump_b')
        _positive(self, 'constant_value')
        if not isinstance(self.override_hypotheses, bool):
            raise ConfigError('override_hypotheses', "must be true or false")

        if self.stability not in STABILITY_MODES:
            raise ConfigError('stability', "must be one of %s" % (STABILITY_MODES,))
        if not (_is_int(self.stability_cadence) and self.stability_cadence >= 1):
            raise ConfigError('stability_cadence', "must be an integer >= 1")
        if not isinstance(self.output_dir, (str, os.PathLike)):
            raise ConfigError('output_dir', "must be a path")
        if not _is_int(self.seed):
            raise ConfigError('seed', "must be an integer")
        return self


def _is_int(v):
    return isinstance(v, numbers.Integral) and not isinstance(v, bool)


def _is_real(v):
    return (isinstance(v, numbers.Real) and not isinstance(v, bool)
            and np.isfinite(v))


def _positive(config, key):
    v = config[key]
    if not (_is_real(v) and v > 0):
        raise ConfigError(key, "must be a positive number, got %r" % (v,))


def _multiple_of_dt(config, key, times):
    for t in times:
        if abs(t - config.step_index(t) * config.dt) > TIME_TOL:
            raise ConfigError(key, "%g is not a multiple of dt=%g" % (t, config.dt))


_TABLE_TIMES = [0.05, 1.0, 2.5, 5.0, 10.0]
_MIXED_TIMES = [0.05, 0.1, 0.25, 0.5, 1.0, 2.5]
_EQUILIBRIUM_TIMES = [0.25, 0.5, 0.75, 1.0]

_EXAMPLE1 = dict(grid=19, dt=1e-3, t_final=10.0, report_times=_TABLE_TIMES,
                 snapshot_times=[0.0] + _TABLE_TIMES, gamma='gamma1', mu=3.0,
                 initial='bump', bump_a=0.1, bump_b=5.0)
_EXAMPLE2 = dict(_EXAMPLE1, gamma='gamma2', mu=5.0, initial='cosine')
_EXAMPLE3 = dict(grid=19, dt=1e-3, t_final=2.5, report_times=_MIXED_TIMES,
                 snapshot_times=[0.0] + _MIXED_TIMES, mu=5.0, initial='mixed')

PRESETS = {
    'example1': _EXAMPLE1,
    'example2': _EXAMPLE2,
    'example3-gamma1': dict(_EXAMPLE3, gamma='gamma1'),
    'example3-gamma2': dict(_EXAMPLE3, gamma='gamma2'),
    # closer node pairs on the irregular cloud shorten the explicit step limit
    'example1-irregular': dict(_EXAMPLE1, grid=None, cloud=IRREGULAR_CLOUD, dt=5e-4),
    'example2-irregular': dict(_EXAMPLE2, grid=None, cloud=IRREGULAR_CLOUD, dt=5e-4),
    'equilibrium': dict(grid=19, dt=1e-3, t_final=1.0, report_times=_EQUILIBRIUM_TIMES,
                        gamma='gamma1', mu=3.0, initial='constant', constant_value=1.0),
    'logistic': dict(grid=19, dt=1e-3, t_final=1.0, report_times=_EQUILIBRIUM_TIMES,
                     gamma='gamma1', mu=3.0, initial='constant', constant_value=0.5),
}

# compare runs one base configuration under each motility function
COMPARISONS = {
    'example3': 'example3-gamma1',
}


def config_from_preset(name):
    try:
        values = PRESETS[name]
    except KeyError:
        raise ConfigError('preset', "unknown preset %r, must be one of %s"
                          % (name, sorted(PRESETS)))
    return SimulationConfig(copy.deepcopy(values))


def _optional(convert):
    def parse(text):
        if text.strip().lower() in ('', 'none'):
            return None
        return convert(text)
    return parse


def _float_list(text):
    return [float(t) for t in text.replace(',', ' ').split()]


def _domain(text):
    bounds = tuple(_float_list(text))
    if len(bounds) != 4:
        raise ValueError("need four bounds")
    return bounds


def _boolean(text):
    try:
        return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]
    except KeyError:
        raise ValueError("not a boolean")


def _string(text):
    return text.strip()


# section -> {option: (config key, converter)}
SECTIONS = {
    'run': {'preset': ('preset', _string)},
    'discretization': {
        'grid': ('grid', _optional(int)),
        'cloud': ('cloud', _optional(_string)),
        'domain': ('domain', _domain),
        'perturbation': ('perturbation', float),
        'star_size': ('star_size', int),
        'weight_power': ('weight_power', float),
        'seed': ('seed', int),
    },
    'time': {
        'dt': ('dt', float),
        't_final': ('t_final', float),
        'report_times': ('report_times', _float_list),
        'snapshot_times': ('snapshot_times', _float_list),
    },
    'model': {
        'gamma': ('gamma', _string),
        'mu': ('mu', float),
        'initial': ('initial', _string),
        'bump_a': ('bump_a', float),
        'bump_b': ('bump_b', float),
        'constant_value': ('constant_value', float),
        'override_hypotheses': ('override_hypotheses', _boolean),
    },
    'stability': {
        'mode': ('stability', _string),
        'cadence': ('stability_cadence', int),
    },
    'output': {'output_dir': ('output_dir', _string)},
}


def _read_text(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, 'r', encoding='utf-8') as fh:
            return fh.read()
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode('utf-8')
    return text


def parse_config(source, base=None):
    """
    DESCRIPTION:
    ----------
    Read an INI run configuration.  A [run] preset is applied first, then
    the remaining sections, then the result is validated.

    INPUTS:
    ----------
    source    path, text stream or byte stream
    base      SimulationConfig to start from instead of the defaults

    OUTPUT:
    ----------
    SimulationConfig
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_file(io.StringIO(_read_text(source)))
    except configparser.Error as err:
        raise ConfigError('<document>', str(err).strip())

    values = {}
    preset = None
    for section in parser.sections():
        options = SECTIONS.get(section)
        if options is None:
            raise ConfigError(section, "unknown section, must be one of %s"
                              % sorted(SECTIONS))
        for option, text in parser.items(section):
            if option not in options:
                raise ConfigError("%s.%s" % (section, option), "unknown key")
            key, convert = options[option]
            try:
                value = convert(text)
            except ValueError:
                raise ConfigError(key, "cannot parse %r" % text)
            if key == 'preset':
                preset = value
            else:
                values[key] = value

    if preset is not None:
        config = config_from_preset(preset)
    elif base is not None:
        config = SimulationConfig(base)
    else:
        config = SimulationConfig()
    # a file naming a cloud replaces the preset's grid and vice versa
    if values.get('cloud') is not None:
        values.setdefault('grid', None)
    if values.get('grid') is not None:
        values.setdefault('cloud', None)
    config.set(values)
    logger.debug("parsed configuration:\n%s", config)
    return config.validate()
