#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Generalized finite difference formulas on E_s-stars

For a star with offsets (h_i, k_i) and weights w_i the five derivatives at
the center (dx, dy, dxx, dyy, dxy) minimize the weighted squared error of
the second order Taylor expansion.  The normal equations give

    A = C^T W^2 C,    c_i = (h_i, k_i, h_i^2/2, k_i^2/2, h_i k_i)

and the derivative formulas

    D_r U = -lambda_0r U_0 + sum_i lambda_ir U_i,
    lambda_ir = w_i^2 (A^-1 c_i)_r,   lambda_0r = sum_i lambda_ir.

The Laplacian row is the sum of the dxx and dyy rows.
"""
import logging
import os
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse

from gfdchemo.errors import DegenerateStarError, SingularWeightError
from gfdchemo.geometry import DEFAULT_STAR_SIZE, select_star

logger = logging.getLogger(__name__)

DERIVATIVES = ('dx', 'dy', 'dxx', 'dyy', 'dxy')
SELECTORS = DERIVATIVES + ('lap',)

# Cholesky pivots below this fraction of the largest diagonal entry of A
# mark a degenerate star
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class WeightScheme:
    """
    Inverse-distance weights w_i = (h_i^2 + k_i^2)^(-power).

    power = 1 gives w_i = 1/(h_i^2 + k_i^2).
    """
    power: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.power) and self.power > 0):
            raise ValueError("weight power must be positive, got %r" % (self.power,))


DEFAULT_WEIGHTS = WeightScheme()


def compute_weights(star, scheme=DEFAULT_WEIGHTS):
    """
    Weights of the star's neighbours, strictly positive and decreasing with
    distance.  A zero offset raises SingularWeightError.
    """
    d2 = star.h**2 + star.k**2
    zero = np.flatnonzero(d2 == 0.0)
    if zero.size:
        raise SingularWeightError("star at node %d: neighbour %d coincides with "
                                  "the center" % (star.center_id,
                                                  star.neighbor_ids[zero[0]]))
    return d2 ** (-scheme.power)


def taylor_matrix(offsets):
    """Rows c_i = (h, k, h^2/2, k^2/2, h k) for an (s, 2) array of offsets."""
    h = offsets[:, 0]
    k = offsets[:, 1]
    return np.column_stack([h, k, 0.5 * h**2, 0.5 * k**2, h * k])


def assemble_A(star, weights):
    """
    5x5 normal-equation matrix A = C^T W^2 C of the star.  Exactly
    symmetric; positive definite unless the star is degenerate.
    """
    C = taylor_matrix(star.offsets)
    A = C.T @ (weights[:, None]**2 * C)
    return 0.5 * (A + A.T)


def cholesky_factor(A, center_id=-1, tol=PIVOT_TOL):
    """
    Lower Cholesky factor L of A (A = L L^T).

    Raises DegenerateStarError when factorization fails or a pivot L_kk^2
    falls below tol times the largest diagonal entry of A.
    """
    try:
        c, _ = linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError:
        raise DegenerateStarError([center_id], "A is not positive definite")
    L = np.tril(c)
    pivots = np.diag(L)**2
    if pivots.min() <= tol * np.diag(A).max():
        raise DegenerateStarError([center_id], "Cholesky pivot %.3g below tolerance"
                                  % pivots.min())
    return L


@dataclass(frozen=True, eq=False)
class DerivativeStencil:
    """
    lam   : (5, s) coefficients, rows dx, dy, dxx, dyy, dxy
    lam0  : (5,) row sums, the center coefficients
    lap   : (s,) Laplacian coefficients, lam[2] + lam[3]
    lap0  : Laplacian center coefficient
    cond  : condition estimate of A from the Cholesky diagonal
    """
    center_id: int
    neighbor_ids: np.ndarray
    lam: np.ndarray
    lam0: np.ndarray
    lap: np.ndarray
    lap0: float
    cond: float

    def coefficients(self, which):
        """(neighbour coefficients, center coefficient) for a selector."""
        if which == 'lap':
            return self.lap, self.lap0
        try:
            r = DERIVATIVES.index(which)
        except ValueError:
            raise ValueError("unknown derivative selector %r, must be one of %s"
                             % (which, SELECTORS))
        return self.lam[r], self.lam0[r]


def solve_lambdas(star, weights, A, tol=PIVOT_TOL):
    """
    DESCRIPTION:
    ----------
    Factorize A by Cholesky and solve for lambda_ir = w_i^2 (A^-1 c_i)_r.

    INPUTS:
    ----------
    star      Star
    weights   (s,) weights of the star's neighbours
    A         5x5 symmetric matrix from assemble_A
    tol       relative pivot tolerance

    OUTPUT:
    ----------
    DerivativeStencil
    """
    L = cholesky_factor(A, star.center_id, tol)
    C = taylor_matrix(star.offsets)
    lam = linalg.cho_solve((L, True), C.T) * weights**2
    lam0 = lam.sum(axis=1)
    lap = lam[2] + lam[3]
    d = np.diag(L)
    for a in (lam, lam0, lap):
        a.setflags(write=False)
    return DerivativeStencil(center_id=star.center_id,
                             neighbor_ids=star.neighbor_ids,
                             lam=lam, lam0=lam0, lap=lap,
                             lap0=float(lam0[2] + lam0[3]),
                             cond=float((d.max() / d.min())**2))


def apply(stencil, field, which):
    """
    Derivative of a nodal field at the stencil's center:
    -lambda_0r field[center] + sum_i lambda_ir field[neighbour_i].
    """
    coef, coef0 = stencil.coefficients(which)
    field = np.asarray(field, dtype=float)
    return float(-coef0 * field[stencil.center_id] +
                 coef @ field[stencil.neighbor_ids])


class StencilSet:
    """
    Derivative stencils of a point cloud, keyed by center node id.

    operator(which) returns the stencils for one selector as an m x m CSR
    matrix (rows without a stencil are empty), so that operator(which) @ U
    evaluates the derivative at every center at once.
    """

    def __init__(self, cloud, stencils, weight_scheme, star_size):
        self.cloud = cloud
        self.stencils = dict(stencils)
        self.weight_scheme = weight_scheme
        self.star_size = star_size
        self.center_ids = np.array(sorted(self.stencils), dtype=int)
        conds = [st.cond for st in self.stencils.values()]
        self.cond_min = min(conds) if conds else np.nan
        self.cond_max = max(conds) if conds else np.nan
        self._operators = {}

    def __len__(self):
        return len(self.stencils)

    def __getitem__(self, node_id):
        return self.stencils[node_id]

    def __contains__(self, node_id):
        return node_id in self.stencils

    def __iter__(self):
        return (self.stencils[i] for i in self.center_ids)

    @property
    def inner_ids(self):
        return self.center_ids[np.isin(self.center_ids, self.cloud.inner_ids)]

    def operator(self, which):
        if which not in self._operators:
            rows, cols, vals = [], [], []
            for st in self:
                coef, coef0 = st.coefficients(which)
                rows.append(np.full(coef.size + 1, st.center_id))
                cols.append(np.concatenate([[st.center_id], st.neighbor_ids]))
                vals.append(np.concatenate([[-coef0], coef]))
            m = len(self.cloud)
            if rows:
                mat = sparse.coo_matrix((np.concatenate(vals),
                                         (np.concatenate(rows), np.concatenate(cols))),
                                        shape=(m, m)).tocsr()
            else:
                mat = sparse.csr_matrix((m, m))
            self._operators[which] = mat
        return self._operators[which]

    def center_coefficients(self, which):
        """(m,) array of lambda_0 for the selector, zero where no stencil."""
        out = np.zeros(len(self.cloud))
        for st in self:
            out[st.center_id] = st.coefficients(which)[1]
        return out

    def neighbor_abs_sums(self, which):
        """(m,) array of sum_i |lambda_i| for the selector."""
        out = np.zeros(len(self.cloud))
        for st in self:
            out[st.center_id] = np.abs(st.coefficients(which)[0]).sum()
        return out


def build_stencil_set(cloud, s=DEFAULT_STAR_SIZE, scheme=DEFAULT_WEIGHTS,
                      include_boundary=False):
    """
    DESCRIPTION:
    ----------
    Select a star, assemble A and solve for the coefficients at every inner
    node (and every boundary node when include_boundary is set).

    INPUTS:
    ----------
    cloud             PointCloud, normally augmented with fictitious nodes
    s                 star size
    scheme            WeightScheme
    include_boundary  also build stars centred on boundary nodes

    OUTPUT:
    ----------
    StencilSet.  Degenerate stars are collected and reported together in
    one DegenerateStarError.
    """
    centers = cloud.inner_ids
    if include_boundary:
        centers = np.sort(np.concatenate([centers, cloud.boundary_ids]))
    stencils = {}
    failed = []
    for c in centers:
        star = select_star(cloud, c, s)
        w = compute_weights(star, scheme)
        try:
            stencils[int(c)] = solve_lambdas(star, w, assemble_A(star, w))
        except DegenerateStarError:
            failed.append(int(c))
    if failed:
        raise DegenerateStarError(failed)
    result = StencilSet(cloud, stencils, scheme, s)
    logger.info("built %d stencils (s=%d, p=%g), cond(A) in [%.3g, %.3g]",
                len(result), s, scheme.power, result.cond_min, result.cond_max)
    return result


def write_stencil_table(stencil_set, dest):
    """
    Debug dump of the coefficients.  One block per star:

        # node <id>
        neighbors <id_1> ... <id_s>
        dx  <lambda_0> <lambda_1> ... <lambda_s>
        ...
        dxy <lambda_0> <lambda_1> ... <lambda_s>
    """
    owned = isinstance(dest, (str, os.PathLike))
    fh = open(dest, 'w', encoding='utf-8') if owned else dest
    try:
        fh.write("# star_size %d weight_power %s\n"
                 % (stencil_set.star_size, format(stencil_set.weight_scheme.power, '.17g')))
        for st in stencil_set:
            fh.write("# node %d\n" % st.center_id)
            fh.write("neighbors %s\n" % " ".join(str(i) for i in st.neighbor_ids))
            for r, name in enumerate(DERIVATIVES):
                coefs = np.concatenate([[st.lam0[r]], st.lam[r]])
                fh.write("%s %s\n" % (name, " ".join(format(v, '.17g') for v in coefs)))
    finally:
        if owned:
            fh.close()
