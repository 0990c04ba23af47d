#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exceptions raised by gfdchemo.

Every error derives from GfdError and from the closest builtin, so callers
catching ValueError for bad input keep working.
"""


class GfdError(Exception):
    """Base class for all gfdchemo errors."""


class DiscretizationError(GfdError, ValueError):
    """Invalid point cloud, grid or star request."""


class CloudParseError(DiscretizationError):
    """Malformed record in a cloud file."""

    def __init__(self, line, message):
        self.line = line
        super().__init__("line %d: %s" % (line, message))


class SingularWeightError(GfdError, ValueError):
    """A star offset of zero length has no finite weight."""


class DegenerateStarError(GfdError, ValueError):
    """The normal-equation matrix of one or more stars is not positive definite."""

    def __init__(self, center_ids, detail=""):
        self.center_ids = tuple(int(c) for c in center_ids)
        shown = ", ".join(str(c) for c in self.center_ids[:20])
        if len(self.center_ids) > 20:
            shown += ", ..."
        msg = "degenerate star at node(s) %s" % shown
        if detail:
            msg += " (%s)" % detail
        super().__init__(msg)


class HypothesisError(GfdError, ValueError):
    """Model data violates the hypotheses on gamma or u0."""


class GammaDomainError(GfdError, ValueError):
    """Motility function evaluated at a negative concentration."""


class SolverSetupError(GfdError, RuntimeError):
    """The elliptic system could not be factorized."""

    def __init__(self, message, pivot=None):
        self.pivot = pivot
        super().__init__(message)


class NumericError(GfdError, ValueError):
    """Non-finite input handed to a solver."""


class DivergenceError(GfdError, RuntimeError):
    """The explicit update produced a non-finite or runaway value."""

    def __init__(self, message, node=None, step=None, state=None, result=None):
        self.node = node
        self.step = step
        self.state = state
        self.result = result
        super().__init__(message)


class StabilityError(GfdError, RuntimeError):
    """Strict mode: the time step exceeds the monitored stability bound."""

    def __init__(self, message, bound=None, dt=None, step=None, result=None):
        self.bound = bound
        self.dt = dt
        self.step = step
        self.result = result
        super().__init__(message)


class ConfigError(GfdError, ValueError):
    """Invalid run configuration; names the offending key."""

    def __init__(self, key, message):
        self.key = key
        super().__init__("%s: %s" % (key, message))


class ComparisonError(GfdError, ValueError):
    """Error reports that cannot be compared."""
