#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Error norms, report tables and independent checks of the discretization

linf_vs_one measures the distance to the homogeneous state (1, 1).  The
manufactured elliptic study and the term-by-term right-hand side oracle
check the solver against solutions and code paths that do not share its
assembly.
"""
import csv
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from gfdchemo import solver
from gfdchemo.errors import ComparisonError
from gfdchemo.geometry import DEFAULT_STAR_SIZE, add_fictitious_nodes, build_regular_grid
from gfdchemo.stencil import DEFAULT_WEIGHTS, apply, build_stencil_set

logger = logging.getLogger(__name__)

_TIME_TOL = 1e-12


def format_float(x):
    return format(float(x), '.17g')


def write_csv(dest, header, rows):
    owned = isinstance(dest, (str, os.PathLike))
    fh = open(dest, 'w', newline='', encoding='utf-8') if owned else dest
    try:
        w = csv.writer(fh, lineterminator='\n')
        w.writerow(header)
        w.writerows(rows)
    finally:
        if owned:
            fh.close()


def linf_vs_one(field, cloud):
    """max |field - 1| over inner and boundary nodes."""
    f = np.asarray(field, dtype=float)
    return float(np.max(np.abs(f[cloud.physical_ids] - 1.0)))


@dataclass
class ErrorReport:
    """||U - 1|| and ||V - 1|| in the max norm at the report times."""
    times: list = field(default_factory=list)
    err_u: list = field(default_factory=list)
    err_v: list = field(default_factory=list)

    def __post_init__(self):
        if not len(self.times) == len(self.err_u) == len(self.err_v):
            raise ValueError("times, err_u and err_v must share their length")

    def __len__(self):
        return len(self.times)

    def append(self, t, err_u, err_v):
        if err_u < 0 or err_v < 0:
            raise ValueError("error norms must be non-negative")
        self.times.append(float(t))
        self.err_u.append(float(err_u))
        self.err_v.append(float(err_v))

    def at(self, t):
        """(err_u, err_v) at report time t."""
        for ti, eu, ev in zip(self.times, self.err_u, self.err_v):
            if abs(ti - t) <= _TIME_TOL * max(1.0, abs(t)):
                return eu, ev
        raise KeyError(t)

    def to_csv(self, dest):
        write_csv(dest, ('t', 'err_u', 'err_v'),
                  [(format_float(t), format_float(eu), format_float(ev))
                   for t, eu, ev in zip(self.times, self.err_u, self.err_v)])


@dataclass
class ConvergenceStudy:
    resolutions: list
    spacings: list
    errors: list
    order: float

    def to_csv(self, dest):
        write_csv(dest, ('n', 'h', 'error'),
                  [(str(n), format_float(h), format_float(e))
                   for n, h, e in zip(self.resolutions, self.spacings, self.errors)])


def estimate_order(spacings, errors):
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(spacings, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.size < 2 or h.size != e.size:
        raise ValueError("need at least two (h, error) pairs")
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("spacings and errors must be positive")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def manufactured_v(x, y):
    return np.cos(np.pi * x) * np.cos(np.pi * y)


def manufactured_u(x, y):
    return (1.0 + 2.0 * np.pi**2) * manufactured_v(x, y)


def manufactured_elliptic_study(resolutions=(11, 21, 41), s=DEFAULT_STAR_SIZE,
                                scheme=DEFAULT_WEIGHTS):
    """
    DESCRIPTION:
    ----------
    Solve V - Lap V = U on n x n grids of the unit square with
    U = (1 + 2 pi^2) cos(pi x) cos(pi y), whose exact solution
    v = cos(pi x) cos(pi y) satisfies the Neumann condition, and fit the
    order of the max nodal error.

    INPUTS:
    ----------
    resolutions   increasing grid sizes, each >= 5
    s             star size
    scheme        WeightScheme

    OUTPUT:
    ----------
    ConvergenceStudy
    """
    res = [int(n) for n in resolutions]
    if not res or any(n < 5 for n in res) or any(b <= a for a, b in zip(res, res[1:])):
        raise ValueError("resolutions must increase and be >= 5, got %r" % (res,))
    spacings, errors = [], []
    for n in res:
        cloud = add_fictitious_nodes(build_regular_grid(n))
        stencils = build_stencil_set(cloud, s, scheme, include_boundary=True)
        system = solver.assemble_elliptic(cloud, stencils)
        x, y = cloud.points.T
        V = solver.solve_elliptic(system, manufactured_u(x, y))
        phys = cloud.physical_ids
        err = float(np.max(np.abs(V[phys] - manufactured_v(x[phys], y[phys]))))
        spacings.append(1.0 / (n - 1))
        errors.append(err)
        logger.info("manufactured elliptic n=%d: max error %.6g", n, err)
    order = estimate_order(spacings, errors) if len(res) > 1 else np.nan
    logger.info("fitted order %.3f", order)
    return ConvergenceStudy(res, spacings, errors, order)


def rhs_oracle_compare(state, stencils, params):
    """
    DESCRIPTION:
    ----------
    Recompute the explicit right-hand side node by node, one derivative
    at a time through stencil.apply, and compare with the vectorized
    solver.parabolic_rhs.

    INPUTS:
    ----------
    state      State
    stencils   StencilSet
    params     ModelParams

    OUTPUT:
    ----------
    max nodal |production - oracle|
    """
    U = np.asarray(state.U, dtype=float)
    V = np.asarray(state.V, dtype=float)
    production = solver.parabolic_rhs(U, V, stencils, params)
    g = params.gamma
    worst = 0.0
    for st in stencils:
        c = st.center_id
        u0, v0 = U[c], V[c]
        s = max(v0, 0.0)
        lap_u = apply(st, U, 'lap')
        ux, uy = apply(st, U, 'dx'), apply(st, U, 'dy')
        vx, vy = apply(st, V, 'dx'), apply(st, V, 'dy')
        diffusion = g.func(s) * lap_u
        cross = 2.0 * g.d1(s) * ux * vx + 2.0 * g.d1(s) * uy * vy
        gradient = u0 * g.d2(s) * vx * vx + u0 * g.d2(s) * vy * vy
        exchange = u0 * g.d1(s) * (v0 - u0)
        growth = params.mu * u0 * (1.0 - u0)
        oracle = diffusion + cross + gradient + exchange + growth
        worst = max(worst, abs(production[c] - oracle))
    return worst


@dataclass
class DominanceTable:
    """Per report time: is report a strictly below report b, for U and V."""
    times: list
    err_u_a: list
    err_u_b: list
    u_a_less: list
    err_v_a: list
    err_v_b: list
    v_a_less: list

    @property
    def u_dominates(self):
        return bool(self.u_a_less) and all(self.u_a_less)

    @property
    def v_dominates(self):
        return bool(self.v_a_less) and all(self.v_a_less)

    @property
    def dominates(self):
        return self.u_dominates and self.v_dominates

    def to_csv(self, dest):
        rows = zip(self.times, self.err_u_a, self.err_u_b, self.u_a_less,
                   self.err_v_a, self.err_v_b, self.v_a_less)
        write_csv(dest, ('t', 'err_u_a', 'err_u_b', 'u_a_less',
                         'err_v_a', 'err_v_b', 'v_a_less'),
                  [(format_float(t), format_float(ua), format_float(ub), int(ul),
                    format_float(va), format_float(vb), int(vl))
                   for t, ua, ub, ul, va, vb, vl in rows])


def comparison_report(report_a, report_b):
    """
    Compare two error reports taken at the same times.  Raises
    ComparisonError when the time lists differ.
    """
    ta = np.asarray(report_a.times, dtype=float)
    tb = np.asarray(report_b.times, dtype=float)
    if ta.shape != tb.shape or not np.allclose(ta, tb, rtol=0.0, atol=_TIME_TOL):
        raise ComparisonError("reports have different times: %r vs %r"
                              % (list(report_a.times), list(report_b.times)))
    u_less = [a < b for a, b in zip(report_a.err_u, report_b.err_u)]
    v_less = [a < b for a, b in zip(report_a.err_v, report_b.err_v)]
    table = DominanceTable(list(report_a.times), list(report_a.err_u),
                           list(report_b.err_u), u_less, list(report_a.err_v),
                           list(report_b.err_v), v_less)
    logger.info("dominance: U %s, V %s", table.u_dominates, table.v_dominates)
    return table
