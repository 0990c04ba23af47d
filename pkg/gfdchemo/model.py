#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Model data of the rescaled parabolic-elliptic chemotaxis system

    u_t = Lap(gamma(v) u) + mu u (1 - u)
    0   = Lap(v) - v + u

on a rectangle with homogeneous Neumann conditions.  u is the bacterial
density and v the AHL concentration, both dimensionless.

Motility functions gamma carry analytic first to third derivatives.  The
hypotheses on gamma are

    gamma >= 0, gamma' <= 0, gamma'' >= 0, gamma''' <= 0 on s >= 0
    -2 gamma'(s) + gamma''(s) s <= mu0 < mu
    |gamma'(s)|^2 / gamma(s) <= c_gamma

and the initial density must be strictly positive.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from gfdchemo._utilities import match_args_return
from gfdchemo.errors import GammaDomainError, HypothesisError

logger = logging.getLogger(__name__)

S_MAX = 50.0
N_SAMPLES = 100000


@dataclass(frozen=True)
class MotilityFunction:
    """
    gamma(s) with derivatives d1, d2, d3, all callables of s >= 0.
    mu0 and c_gamma are the analytic suprema when known, else None.
    """
    name: str
    func: object
    d1: object
    d2: object
    d3: object
    mu0: float = None
    c_gamma: float = None

    def __call__(self, s):
        return self.func(s)


# gamma1(s) = exp(-s)
@match_args_return
def _exp_decay(s):
    return np.exp(-s)


@match_args_return
def _exp_decay_d1(s):
    return -np.exp(-s)


@match_args_return
def _exp_decay_d3(s):
    return -np.exp(-s)


# gamma2(s) = (1 + s)^-2
@match_args_return
def _inv_square(s):
    return (1.0 + s)**-2


@match_args_return
def _inv_square_d1(s):
    return -2.0 * (1.0 + s)**-3


@match_args_return
def _inv_square_d2(s):
    return 6.0 * (1.0 + s)**-4


@match_args_return
def _inv_square_d3(s):
    return -24.0 * (1.0 + s)**-5


# sup of 2e^-s + s e^-s on s >= 0 is 2, at s = 0
gamma1 = MotilityFunction('gamma1', _exp_decay, _exp_decay_d1, _exp_decay,
                          _exp_decay_d3, mu0=2.0, c_gamma=1.0)
# sup of (4 + 10s)/(1 + s)^4 on s >= 0 is 4, at s = 0
gamma2 = MotilityFunction('gamma2', _inv_square, _inv_square_d1, _inv_square_d2,
                          _inv_square_d3, mu0=4.0, c_gamma=4.0)

GAMMAS = {g.name: g for g in (gamma1, gamma2)}


def get_gamma(name):
    try:
        return GAMMAS[name]
    except KeyError:
        raise ValueError("unknown motility function %r, must be one of %s"
                         % (name, sorted(GAMMAS)))


def gamma_derivatives(g, s):
    """
    DESCRIPTION:
    ----------
    gamma and its first three derivatives at s.

    INPUTS:
    ----------
    g     MotilityFunction
    s     concentration(s), s >= 0

    OUTPUT:
    ----------
    tuple (gamma, gamma', gamma'', gamma''')
    """
    sa = np.asarray(s, dtype=float)
    if np.any(sa < 0) or np.any(np.isnan(sa)):
        raise GammaDomainError("%s evaluated at negative concentration %g"
                               % (g.name, np.min(sa)))
    return g.func(s), g.d1(s), g.d2(s), g.d3(s)


@dataclass(frozen=True)
class ModelParams:
    mu: float
    gamma: MotilityFunction

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise ValueError("mu must be positive, got %r" % (self.mu,))


@dataclass(frozen=True)
class HypothesisReport:
    mu0: float
    c_gamma: float
    sign_chain_ok: bool
    passes: bool
    mu: float
    gamma: str

    def __str__(self):
        return ("gamma       : %s\n"
                "mu          : %g\n"
                "mu0         : %.6g\n"
                "c_gamma     : %.6g\n"
                "sign chain  : %s\n"
                "passes      : %s\n"
                % (self.gamma, self.mu, self.mu0, self.c_gamma,
                   "ok" if self.sign_chain_ok else "violated",
                   "yes" if self.passes else "no"))


def _hypothesis_samples(s_max, n_samples):
    uniform = np.linspace(0.0, s_max, n_samples)
    near = s_max * np.geomspace(1e-12, 1e-2, 200)
    s = np.concatenate([uniform, near, s_max - near])
    return np.unique(s[(s >= 0.0) & (s <= s_max)])


def validate_hypotheses(params, s_max=S_MAX, n_samples=N_SAMPLES, analytic=True):
    """
    DESCRIPTION:
    ----------
    Check the hypotheses on gamma by sampling [0, s_max] on a uniform grid
    refined geometrically towards both endpoints.  For the built-in
    functions the analytic mu0 and c_gamma replace the sampled estimates
    unless analytic is False.

    INPUTS:
    ----------
    params      ModelParams
    s_max       upper end of the sampled range (> 0)
    n_samples   number of uniform samples (>= 100)
    analytic    use known suprema where the function provides them

    OUTPUT:
    ----------
    HypothesisReport; passes = sign chain holds and mu0 < mu and c_gamma
    finite
    """
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    if n_samples < 100:
        raise ValueError("need at least 100 samples, got %d" % n_samples)
    g = params.gamma
    s = _hypothesis_samples(s_max, int(n_samples))
    g0, g1, g2, g3 = gamma_derivatives(g, s)
    sign_ok = bool(np.all(g0 >= 0) and np.all(g1 <= 0) and
                   np.all(g2 >= 0) and np.all(g3 <= 0))
    mu0 = float(np.max(-2.0 * g1 + g2 * s))
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(g0 > 0, g1**2 / g0, np.where(g1 == 0, 0.0, np.inf))
    c_gamma = float(np.max(ratio))
    if analytic:
        if g.mu0 is not None:
            mu0 = g.mu0
        if g.c_gamma is not None:
            c_gamma = g.c_gamma
    passes = sign_ok and mu0 < params.mu and bool(np.isfinite(c_gamma))
    report = HypothesisReport(mu0, c_gamma, sign_ok, passes, params.mu, g.name)
    logger.debug("hypotheses for %s, mu=%g: mu0=%.6g c_gamma=%.6g passes=%s",
                 g.name, params.mu, mu0, c_gamma, passes)
    return report


@dataclass(frozen=True)
class InitialCondition:
    """u0(x, y); params records the constants it was built with."""
    name: str
    func: object
    params: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return self.func(x, y)


@match_args_return
def bump_phi(r):
    """exp(-1/(1/4 - r^2)) for r < 1/2, exactly 0 otherwise."""
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        return np.where(r < 0.5, np.exp(-1.0 / (0.25 - r**2)), 0.0)


def bump(a=0.1, b=5.0):
    """a + b phi(r), r the distance to (1/2, 1/2)."""
    if not (a > 0 and b > 0):
        raise ValueError("bump needs a, b > 0, got a=%r b=%r" % (a, b))

    @match_args_return
    def u0(x, y):
        return a + b * bump_phi(np.hypot(x - 0.5, y - 0.5))
    return InitialCondition('bump', u0, {'a': a, 'b': b})


@match_args_return
def _cosine(x, y):
    return 6.0 + 5.0 * np.cos(np.pi * x) + 0.0 * y


def cosine():
    """6 + 5 cos(pi x)"""
    return InitialCondition('cosine', _cosine)


@match_args_return
def _mixed(x, y):
    inside = (x > 0.0) & (x < 1.0)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        envelope = np.where(inside, np.exp(-1.0 / (x * (1.0 - x))), 0.0)
    return 1.0 + 50.0 * np.cos(np.pi * y) * envelope


def mixed():
    """1 + 50 cos(pi y) exp(-1/(x(1 - x))), the envelope vanishing off 0 < x < 1."""
    return InitialCondition('mixed', _mixed)


def constant(c=1.0):
    if not np.isfinite(c):
        raise ValueError("constant initial value must be finite")

    @match_args_return
    def u0(x, y):
        return c + 0.0 * (x + y)
    return InitialCondition('constant', u0, {'c': c})


INITIAL_CONDITIONS = {
    'bump': bump,
    'cosine': cosine,
    'mixed': mixed,
    'constant': constant,
}


def get_initial(name, **params):
    try:
        factory = INITIAL_CONDITIONS[name]
    except KeyError:
        raise ValueError("unknown initial condition %r, must be one of %s"
                         % (name, sorted(INITIAL_CONDITIONS)))
    return factory(**params)


def eval_initial(ic, cloud):
    """
    DESCRIPTION:
    ----------
    Evaluate u0 on the cloud.  Fictitious nodes take the value of the inner
    node they mirror.

    INPUTS:
    ----------
    ic      InitialCondition
    cloud   PointCloud

    OUTPUT:
    ----------
    (m,) array; raises HypothesisError when u0 is not strictly positive at
    some inner or boundary node
    """
    u = np.empty(len(cloud))
    phys = cloud.physical_ids
    pts = cloud.points[phys]
    u[phys] = ic(pts[:, 0], pts[:, 1])
    ghosts = cloud.fictitious_ids
    u[ghosts] = u[cloud.mirror[ghosts]]
    bad = phys[~(np.isfinite(u[phys]) & (u[phys] > 0))]
    if bad.size:
        raise HypothesisError("initial density %s is %g at node %d, must be > 0"
                              % (ic.name, u[bad[0]], bad[0]))
    logger.debug("u0 %s: min %.6g max %.6g", ic.name, u[phys].min(), u[phys].max())
    return u


def gamma_crossing(g1=gamma1, g2=gamma2, lo=1.0, hi=5.0, xtol=1e-12):
    """Point in [lo, hi] where g1 and g2 cross, by bisection."""
    f = lambda s: g1(s) - g2(s)
    if f(lo) * f(hi) > 0:
        raise ValueError("%s and %s do not cross on [%g, %g]"
                         % (g1.name, g2.name, lo, hi))
    return optimize.bisect(f, lo, hi, xtol=xtol)


@match_args_return
def logistic_solution(c, mu, t):
    """Exact solution of u' = mu u (1 - u), u(0) = c > 0."""
    return 1.0 / (1.0 + (1.0 / c - 1.0) * np.exp(-mu * t))
