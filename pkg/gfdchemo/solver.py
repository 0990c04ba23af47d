#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Time stepping for the chemotaxis system

Each step advances U explicitly with the GFD right-hand side

    (U0' - U0)/dt = gamma(V0) Lap U + 2 gamma'(V0) (Ux Vx + Uy Vy)
                    + U0 gamma''(V0) (Vx^2 + Vy^2)
                    + U0 gamma'(V0) (V0 - U0) + mu U0 (1 - U0)

at inner and boundary nodes, refreshes the fictitious nodes from their
mirrors, and then solves the elliptic equation V - Lap V = U for all nodes
with a sparse LU factorization computed once per run.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from gfdchemo import analysis
from gfdchemo.errors import (DivergenceError, HypothesisError, NumericError,
                             SolverSetupError, StabilityError)
from gfdchemo.geometry import (Rectangle, add_fictitious_nodes, build_regular_grid,
                               load_cloud, perturb_grid)
from gfdchemo.model import (ModelParams, eval_initial, gamma_derivatives, get_gamma,
                            get_initial, validate_hypotheses)
from gfdchemo.stencil import WeightScheme, build_stencil_set

logger = logging.getLogger(__name__)

OVERFLOW_GUARD = 1e6
MAX_PRINCIPLE_TOL = 1e-10
_PIVOT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class State:
    """
    U, V    nodal fields on all nodes, fictitious included
    step    time index n, time = n*dt
    """
    U: np.ndarray
    V: np.ndarray
    step: int = 0
    dt: float = 0.0

    def __post_init__(self):
        for name in ('U', 'V'):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def time(self):
        return self.step * self.dt


class EllipticSystem:
    """
    Sparse matrix of V - Lap V = U with the Neumann closure, and its LU
    factorization.  Rows of inner and boundary nodes hold 1 + lambda_0 on
    the diagonal and -lambda_i on the star neighbours; rows of fictitious
    nodes hold V_f - V_mirror = 0.
    """

    def __init__(self, cloud, matrix, lu, min_pivot):
        self.cloud = cloud
        self.matrix = matrix
        self.lu = lu
        self.min_pivot = min_pivot

    @property
    def shape(self):
        return self.matrix.shape


def assemble_elliptic(cloud, stencils):
    """
    DESCRIPTION:
    ----------
    Assemble and factorize the elliptic system.  Depends only on geometry
    and stencils, so one factorization serves a whole run.

    INPUTS:
    ----------
    cloud      PointCloud with fictitious nodes
    stencils   StencilSet with a stencil at every inner and boundary node

    OUTPUT:
    ----------
    EllipticSystem
    """
    if cloud.boundary_ids.size and cloud.fictitious_ids.size == 0:
        raise SolverSetupError("cloud has no fictitious nodes for the Neumann closure")
    missing = np.setdiff1d(cloud.physical_ids, stencils.center_ids)
    if missing.size:
        raise SolverSetupError("node %d has no stencil; build the stencil set "
                               "with include_boundary=True" % missing[0])
    m = len(cloud)
    ghosts = cloud.fictitious_ids
    closure = sparse.coo_matrix((np.ones(ghosts.size), (ghosts, cloud.mirror[ghosts])),
                                shape=(m, m))
    matrix = (sparse.identity(m, format='csr') - stencils.operator('lap')
              - closure.tocsr()).tocsc()
    try:
        lu = splinalg.splu(matrix)
    except RuntimeError as err:
        raise SolverSetupError("elliptic matrix is singular (%s)" % err, pivot=0.0)
    pivots = np.abs(lu.U.diagonal())
    min_pivot = float(pivots.min())
    if min_pivot <= _PIVOT_TOL * pivots.max():
        raise SolverSetupError("elliptic matrix is numerically singular, smallest "
                               "pivot %.3g" % min_pivot, pivot=min_pivot)
    logger.info("factorized elliptic system: %d unknowns, %d nonzeros, "
                "smallest pivot %.3g", m, matrix.nnz, min_pivot)
    return EllipticSystem(cloud, matrix, lu, min_pivot)


def solve_elliptic(system, U):
    """V on all nodes from the density U; fictitious entries of U are ignored."""
    U = np.asarray(U, dtype=float)
    if U.shape != (system.shape[0],):
        raise NumericError("U has shape %r, expected (%d,)" % (U.shape, system.shape[0]))
    if not np.all(np.isfinite(U)):
        raise NumericError("non-finite density at node %d"
                           % np.flatnonzero(~np.isfinite(U))[0])
    rhs = U.copy()
    rhs[system.cloud.fictitious_ids] = 0.0
    return system.lu.solve(rhs)


def _derivatives(stencils, U, V):
    ids = stencils.center_ids
    op = stencils.operator
    return (ids, (op('lap') @ U)[ids], (op('dx') @ U)[ids], (op('dy') @ U)[ids],
            (op('dx') @ V)[ids], (op('dy') @ V)[ids])


def parabolic_rhs(U, V, stencils, params):
    """
    Right-hand side of the explicit update at every stencil center, zero
    elsewhere.  gamma is evaluated at max(V, 0).
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    ids, lapU, Ux, Uy, Vx, Vy = _derivatives(stencils, U, V)
    U0 = U[ids]
    V0 = V[ids]
    g, g1, g2, _ = gamma_derivatives(params.gamma, np.maximum(V0, 0.0))
    rhs = np.zeros_like(U)
    rhs[ids] = (g * lapU
                + 2.0 * g1 * (Ux * Vx + Uy * Vy)
                + U0 * g2 * (Vx**2 + Vy**2)
                + U0 * g1 * (V0 - U0)
                + params.mu * U0 * (1.0 - U0))
    return rhs


def parabolic_step(state, stencils, params, dt):
    """
    DESCRIPTION:
    ----------
    One forward Euler step of the density.  Stencil centers get
    U + dt*RHS; fictitious nodes then copy their mirror node.

    INPUTS:
    ----------
    state      State with V solved from U
    stencils   StencilSet covering inner and boundary nodes
    params     ModelParams
    dt         time step > 0

    OUTPUT:
    ----------
    (m,) array U at the next step
    """
    if not dt > 0:
        raise ValueError("dt must be positive, got %r" % (dt,))
    rhs = parabolic_rhs(state.U, state.V, stencils, params)
    U = state.U + dt * rhs
    ids = stencils.center_ids
    bad = ids[~np.isfinite(U[ids])]
    if bad.size:
        raise DivergenceError("non-finite density at node %d in step %d"
                              % (bad[0], state.step + 1),
                              node=int(bad[0]), step=state.step + 1, state=state)
    cloud = stencils.cloud
    ghosts = cloud.fictitious_ids
    U[ghosts] = U[cloud.mirror[ghosts]]
    return U


@dataclass(frozen=True, eq=False)
class StabilityBound:
    """
    Admissible time step per inner star.  per_star is NaN for stars whose
    denominator is not positive; those ids are listed in excluded and left
    out of global_bound.
    """
    center_ids: np.ndarray
    per_star: np.ndarray
    a1p: np.ndarray
    a1pp: np.ndarray
    b1: np.ndarray
    global_bound: float
    excluded: tuple


def stability_bound(state, stencils, params):
    """
    DESCRIPTION:
    ----------
    Time step bound of the convergence estimate, evaluated at every inner
    star:

        dt < (2 + |l0| + sum|l_i|) / ((|1 - l0| + sum|l_i|)(A1' + A1'') + B1)

    with l the Laplacian coefficients.  Exact solution samples are replaced
    by U, V and mean-value points by V0.  B1 is taken per unit time step.

    INPUTS:
    ----------
    state      State
    stencils   StencilSet
    params     ModelParams

    OUTPUT:
    ----------
    StabilityBound
    """
    U = np.asarray(state.U, dtype=float)
    V = np.asarray(state.V, dtype=float)
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
        raise NumericError("stability bound needs finite U and V")
    ids = stencils.inner_ids
    op = stencils.operator
    lapU = (op('lap') @ U)[ids]
    Ux, Uy = (op('dx') @ U)[ids], (op('dy') @ U)[ids]
    Vx, Vy = (op('dx') @ V)[ids], (op('dy') @ V)[ids]
    U0, V0 = U[ids], V[ids]
    l0 = stencils.center_coefficients('lap')[ids]
    labs = stencils.neighbor_abs_sums('lap')[ids]
    # center coefficients equal the neighbour sums
    lx = stencils.center_coefficients('dx')[ids]
    ly = stencils.center_coefficients('dy')[ids]
    g, g1, g2, g3 = gamma_derivatives(params.gamma, np.maximum(V0, 0.0))
    mu = params.mu

    bracket = (-g * l0 - 2.0 * g1 * lx * Vx - 2.0 * g1 * ly * Vy
               + g2 * (Vx**2 + Vy**2) + g1 * (V0 - U0) + mu - 2.0 * mu * U0)
    a1p = -bracket
    a1pp = (np.abs(g1 * l0) + 2.0 * np.abs(g2 * Vx * lx)
            + 2.0 * np.abs(g2 * Vy * ly))
    b1 = (np.abs(g1 * lapU + 2.0 * g2 * (Ux * Vx + Uy * Vy)
                 - 2.0 * g1 * (Ux * lx + Uy * ly)
                 + U0 * g3 * (Vx**2 + Vy**2)
                 - 2.0 * U0 * g2 * (Vx * lx + Vy * ly)
                 + U0 * V0 * g2 - U0**2 * g2)
          + 2.0 * np.abs(g1 * Ux * lx) + 2.0 * np.abs(g1 * Uy * ly)
          + 2.0 * np.abs(U0 * g2 * Vx * lx) + 2.0 * np.abs(U0 * g2 * Vy * ly))

    lip = np.abs(1.0 - l0) + labs
    num = 2.0 + np.abs(l0) + labs
    den = lip * (a1p + a1pp) + b1
    ok = np.isfinite(den) & (den > 0)
    per_star = np.full(ids.size, np.nan)
    per_star[ok] = num[ok] / den[ok]
    excluded = tuple(int(i) for i in ids[~ok])
    if excluded:
        logger.warning("%d star(s) give no informative time step bound, first at "
                       "node %d", len(excluded), excluded[0])
    global_bound = float(per_star[ok].min()) if np.any(ok) else np.nan
    return StabilityBound(ids, per_star, a1p, a1pp, b1, global_bound, excluded)


@dataclass(frozen=True)
class BoundRecord:
    step: int
    t: float
    global_bound: float
    excluded: int


@dataclass
class RunResult:
    """Everything a run produces; also attached to errors that abort a run."""
    config: object
    cloud: object = None
    hypotheses: object = None
    report: object = field(default_factory=lambda: analysis.ErrorReport())
    snapshots: list = field(default_factory=list)
    bound_log: list = field(default_factory=list)
    final_state: State = None
    stability_violations: int = 0
    max_principle_violations: int = 0


def build_cloud(config):
    """Augmented point cloud for a configuration."""
    if config.cloud is not None:
        cloud = load_cloud(config.cloud)
    elif config.perturbation > 0:
        cloud = perturb_grid(config.grid, Rectangle(*config.domain),
                             config.perturbation, config.seed)
    else:
        cloud = build_regular_grid(config.grid, Rectangle(*config.domain))
    return add_fictitious_nodes(cloud)


def _initial_condition(config):
    if config.initial == 'bump':
        return get_initial('bump', a=config.bump_a, b=config.bump_b)
    if config.initial == 'constant':
        return get_initial('constant', c=config.constant_value)
    return get_initial(config.initial)


def _check_max_principle(state, cloud, result):
    phys = cloud.physical_ids
    vmin = state.V[phys].min()
    if state.U[phys].min() >= 0 and vmin < -MAX_PRINCIPLE_TOL:
        if result.max_principle_violations == 0:
            logger.warning("t=%g: V reaches %.3g with U >= 0", state.time, vmin)
        result.max_principle_violations += 1


def run(config):
    """
    DESCRIPTION:
    ----------
    Solve the system from u0 to t_final: V from U0, then alternate the
    explicit step for U and the elliptic solve for V.  Error norms are
    recorded at the report times, full states at the snapshot times, and
    the stability bound every stability_cadence steps.

    INPUTS:
    ----------
    config    SimulationConfig

    OUTPUT:
    ----------
    RunResult.  DivergenceError and StabilityError carry the partial result
    and the last valid state.
    """
    config.validate()
    result = RunResult(config)
    cloud = build_cloud(config)
    result.cloud = cloud
    stencils = build_stencil_set(cloud, config.star_size,
                                 WeightScheme(config.weight_power),
                                 include_boundary=True)
    params = ModelParams(config.mu, get_gamma(config.gamma))
    hyp = validate_hypotheses(params)
    result.hypotheses = hyp
    if not hyp.passes:
        msg = ("hypotheses on %s fail for mu=%g (mu0=%.6g, sign chain %s)"
               % (params.gamma.name, params.mu, hyp.mu0,
                  "ok" if hyp.sign_chain_ok else "violated"))
        if not config.override_hypotheses:
            raise HypothesisError(msg)
        logger.warning("%s; running anyway", msg)

    U = eval_initial(_initial_condition(config), cloud)
    system = assemble_elliptic(cloud, stencils)
    dt = config.dt
    state = State(U, solve_elliptic(system, U), 0, dt)

    n_steps = config.n_steps
    report_steps = {config.step_index(t) for t in config.report_times}
    snapshot_steps = {config.step_index(t) for t in config.snapshot_times}
    mode = config.stability
    phys = cloud.physical_ids
    logger.info("running %d steps of dt=%g on %d nodes (%s, mu=%g, u0=%s)",
                n_steps, dt, len(cloud), params.gamma.name, params.mu, config.initial)

    for step in range(n_steps + 1):
        t = state.time
        _check_max_principle(state, cloud, result)
        if step in report_steps:
            eu = analysis.linf_vs_one(state.U, cloud)
            ev = analysis.linf_vs_one(state.V, cloud)
            result.report.append(t, eu, ev)
            logger.info("t=%-8g |U-1|=%.6g |V-1|=%.6g", t, eu, ev)
        if step in snapshot_steps:
            result.snapshots.append(state)
        if mode != 'off' and step % config.stability_cadence == 0:
            bound = stability_bound(state, stencils, params)
            result.bound_log.append(BoundRecord(step, t, bound.global_bound,
                                                len(bound.excluded)))
            if dt >= bound.global_bound:
                msg = ("dt=%g exceeds the stability bound %.6g at step %d"
                       % (dt, bound.global_bound, step))
                if mode == 'strict':
                    result.final_state = state
                    raise StabilityError(msg, bound=bound.global_bound, dt=dt,
                                         step=step, result=result)
                if result.stability_violations == 0:
                    logger.warning(msg)
                result.stability_violations += 1
        if step == n_steps:
            break

        try:
            U = parabolic_step(state, stencils, params, dt)
        except DivergenceError as err:
            result.final_state = state
            err.result = result
            raise
        runaway = phys[np.abs(U[phys]) > OVERFLOW_GUARD]
        if runaway.size:
            result.final_state = state
            raise DivergenceError("|U| exceeds %g at node %d in step %d"
                                  % (OVERFLOW_GUARD, runaway[0], step + 1),
                                  node=int(runaway[0]), step=step + 1,
                                  state=state, result=result)
        state = State(U, solve_elliptic(system, U), step + 1, dt)

    if result.stability_violations:
        logger.warning("dt exceeded the stability bound at %d of %d checks",
                       result.stability_violations, len(result.bound_log))
    if result.max_principle_violations:
        logger.warning("V went negative with U >= 0 at %d step(s)",
                       result.max_principle_violations)
    result.final_state = state
    return result
