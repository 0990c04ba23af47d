#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Point clouds for the GFD method

Nodes, rectangular domains, regular and perturbed grids, cloud files,
fictitious (ghost) nodes for homogeneous Neumann conditions and E_s-star
selection by nearest neighbours.
"""
import enum
import io
import logging
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from gfdchemo.errors import CloudParseError, DiscretizationError

logger = logging.getLogger(__name__)

# five unknown derivatives per star
S_MIN = 5
DEFAULT_STAR_SIZE = 8

# relative tolerance for "on the boundary" and for distance ties
_GEOM_TOL = 1e-12
_TIE_DIGITS = 9


class NodeKind(enum.IntEnum):
    INNER = 0
    BOUNDARY = 1
    FICTITIOUS = 2


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise DiscretizationError(
                "domain %r has no positive area" % (self.bounds,))

    @property
    def bounds(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    @property
    def tol(self):
        return _GEOM_TOL * max(self.width, self.height)

    def contains(self, points):
        """Boolean mask of points inside the closed rectangle."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        t = self.tol
        return ((p[:, 0] >= self.xmin - t) & (p[:, 0] <= self.xmax + t) &
                (p[:, 1] >= self.ymin - t) & (p[:, 1] <= self.ymax + t))

    def outward_normals(self, point):
        """Outward unit normals of every side the point lies on (two at corners)."""
        x, y = point
        t = self.tol
        normals = []
        if abs(x - self.xmin) <= t:
            normals.append((-1.0, 0.0))
        if abs(x - self.xmax) <= t:
            normals.append((1.0, 0.0))
        if abs(y - self.ymin) <= t:
            normals.append((0.0, -1.0))
        if abs(y - self.ymax) <= t:
            normals.append((0.0, 1.0))
        return [np.array(n) for n in normals]


UNIT_SQUARE = Rectangle(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple
    kind: NodeKind
    mirror_id: int = None


@dataclass(frozen=True, eq=False)
class Star:
    """
    E_s-star: the s neighbours used to build the derivative formulas at
    center_id, with offsets (h_i, k_i) = neighbour - center.
    """
    center_id: int
    neighbor_ids: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.neighbor_ids, dtype=int)
        off = np.asarray(self.offsets, dtype=float).reshape(-1, 2)
        if ids.size != off.shape[0]:
            raise DiscretizationError("star at node %d: %d ids for %d offsets"
                                      % (self.center_id, ids.size, off.shape[0]))
        if ids.size < S_MIN:
            raise DiscretizationError("star at node %d has %d neighbours, "
                                      "need at least %d"
                                      % (self.center_id, ids.size, S_MIN))
        if np.unique(ids).size != ids.size or np.any(ids == self.center_id):
            raise DiscretizationError("star at node %d repeats a node"
                                      % self.center_id)
        ids.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, 'neighbor_ids', ids)
        object.__setattr__(self, 'offsets', off)

    @property
    def size(self):
        return self.neighbor_ids.size

    @property
    def h(self):
        return self.offsets[:, 0]

    @property
    def k(self):
        return self.offsets[:, 1]

    @classmethod
    def from_offsets(cls, offsets, center_id=0):
        """Free-standing star with neighbours numbered 1..s."""
        off = np.asarray(offsets, dtype=float).reshape(-1, 2)
        ids = np.arange(1, off.shape[0] + 1) + center_id
        return cls(center_id, ids, off)


class PointCloud:
    """
    Immutable set of nodes on a rectangular domain.

    Positions, kinds and mirror links are stored as read-only arrays; the
    list-of-Node view is built on demand.  Fictitious nodes carry the id of
    the inner node they mirror, every other node has mirror -1.
    """

    def __init__(self, points, kinds, domain, mirror=None):
        pts = np.array(points, dtype=float).reshape(-1, 2)
        knd = np.array(kinds, dtype=int).reshape(-1)
        m = pts.shape[0]
        if knd.size != m:
            raise DiscretizationError("%d kinds for %d nodes" % (knd.size, m))
        if m == 0:
            raise DiscretizationError("empty point cloud")
        if mirror is None:
            mir = np.full(m, -1, dtype=int)
        else:
            mir = np.array(mirror, dtype=int).reshape(-1)
        if not isinstance(domain, Rectangle):
            domain = Rectangle(*domain)

        if not np.all(np.isfinite(pts)):
            raise DiscretizationError("non-finite node position")
        if np.any((knd < NodeKind.INNER) | (knd > NodeKind.FICTITIOUS)):
            raise DiscretizationError("unknown node kind")
        fict = knd == NodeKind.FICTITIOUS
        if np.any(fict != (mir >= 0)):
            bad = int(np.flatnonzero(fict != (mir >= 0))[0])
            raise DiscretizationError(
                "node %d: mirror link must be set iff the node is fictitious" % bad)
        if np.any(fict):
            targets = mir[fict]
            if np.any(targets >= m) or np.any(knd[targets] != NodeKind.INNER):
                raise DiscretizationError("fictitious nodes must mirror inner nodes")

        inside = domain.contains(pts)
        bad = np.flatnonzero(~fict & ~inside)
        if bad.size:
            raise DiscretizationError("node %d at (%g, %g) lies outside the domain %r"
                                      % (bad[0], pts[bad[0], 0], pts[bad[0], 1],
                                         domain.bounds))
        bad = np.flatnonzero(fict & inside)
        if bad.size:
            raise DiscretizationError("fictitious node %d lies inside the domain"
                                      % bad[0])

        if m > 1:
            dist, idx = cKDTree(pts).query(pts, k=2)
            j = int(np.argmin(dist[:, 1]))
            min_sep = float(dist[j, 1])
            if min_sep <= 0.0:
                other = int(idx[j, 0] if idx[j, 1] == j else idx[j, 1])
                raise DiscretizationError("nodes %d and %d share the position (%g, %g)"
                                          % (min(j, other), max(j, other),
                                             pts[j, 0], pts[j, 1]))
            nn = dist[:, 1]
        else:
            min_sep = np.inf
            nn = np.array([np.inf])

        for a in (pts, knd, mir):
            a.setflags(write=False)
        self.points = pts
        self.kinds = knd
        self.mirror = mir
        self.domain = domain
        self.min_separation = min_sep
        self._nn = nn

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return ("PointCloud(%d inner, %d boundary, %d fictitious, domain=%r)"
                % (self.inner_ids.size, self.boundary_ids.size,
                   self.fictitious_ids.size, self.domain.bounds))

    @property
    def n_nodes(self):
        return len(self)

    @cached_property
    def nodes(self):
        return [Node(i, (float(p[0]), float(p[1])), NodeKind(k),
                     int(mi) if mi >= 0 else None)
                for i, (p, k, mi) in enumerate(zip(self.points, self.kinds,
                                                   self.mirror))]

    @cached_property
    def inner_ids(self):
        return np.flatnonzero(self.kinds == NodeKind.INNER)

    @cached_property
    def boundary_ids(self):
        return np.flatnonzero(self.kinds == NodeKind.BOUNDARY)

    @cached_property
    def fictitious_ids(self):
        return np.flatnonzero(self.kinds == NodeKind.FICTITIOUS)

    @cached_property
    def physical_mask(self):
        """True for inner and boundary nodes."""
        return self.kinds != NodeKind.FICTITIOUS

    @cached_property
    def physical_ids(self):
        return np.flatnonzero(self.physical_mask)

    @cached_property
    def median_spacing(self):
        """Median nearest-neighbour distance over non-fictitious nodes."""
        return float(np.median(self._nn[self.physical_mask]))

    @cached_property
    def tree(self):
        return cKDTree(self.points)


def build_regular_grid(n, domain=UNIT_SQUARE):
    """
    DESCRIPTION:
    ----------
    n x n grid of nodes spanning the domain, uniform spacing in each axis.
    Perimeter nodes are boundary nodes, the rest inner.  Node ids run with x
    fastest: id = j*n + i for column i, row j.

    INPUTS:
    ----------
    n         nodes per axis (n >= 3)
    domain    Rectangle, default the unit square

    OUTPUT:
    ----------
    PointCloud with n**2 nodes, 4(n-1) of them boundary
    """
    if int(n) != n or n < 3:
        raise DiscretizationError("grid needs n >= 3 nodes per axis, got %r" % (n,))
    n = int(n)
    if not isinstance(domain, Rectangle):
        domain = Rectangle(*domain)
    xs = np.linspace(domain.xmin, domain.xmax, n)
    ys = np.linspace(domain.ymin, domain.ymax, n)
    X, Y = np.meshgrid(xs, ys)
    I, J = np.meshgrid(np.arange(n), np.arange(n))
    edge = (I == 0) | (I == n - 1) | (J == 0) | (J == n - 1)
    kinds = np.where(edge, NodeKind.BOUNDARY, NodeKind.INNER).ravel()
    cloud = PointCloud(np.column_stack([X.ravel(), Y.ravel()]), kinds, domain)
    logger.debug("regular grid %dx%d on %r", n, n, domain.bounds)
    return cloud


def perturb_grid(n, domain=UNIT_SQUARE, amplitude=0.25, seed=0):
    """
    Irregular cloud from an n x n grid: inner nodes move by up to
    amplitude*h in each axis, side nodes slide along their side by up to
    amplitude*h, corners stay put.  Deterministic for a given seed.
    """
    if not 0.0 <= amplitude < 0.5:
        raise DiscretizationError("perturbation amplitude must lie in [0, 0.5)")
    grid = build_regular_grid(n, domain)
    dom = grid.domain
    hx = dom.width / (n - 1)
    hy = dom.height / (n - 1)
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-amplitude, amplitude, size=(len(grid), 2)) * (hx, hy)
    pts = grid.points.copy()
    on_x = (np.abs(pts[:, 0] - dom.xmin) <= dom.tol) | (np.abs(pts[:, 0] - dom.xmax) <= dom.tol)
    on_y = (np.abs(pts[:, 1] - dom.ymin) <= dom.tol) | (np.abs(pts[:, 1] - dom.ymax) <= dom.tol)
    # nodes on a vertical side keep x, nodes on a horizontal side keep y
    jitter[on_x, 0] = 0.0
    jitter[on_y, 1] = 0.0
    pts += jitter
    return PointCloud(pts, grid.kinds, dom)


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, 'r', encoding='utf-8'), True
    if isinstance(source, io.TextIOBase):
        return source, False
    return io.TextIOWrapper(source, encoding='utf-8'), False


def load_cloud(source):
    """
    DESCRIPTION:
    ----------
    Read a cloud file: an optional first record "domain xmin xmax ymin ymax"
    followed by "x y kind" records, kind 0 = inner, 1 = boundary.
    Whitespace separated; '#' starts a comment.  Without a domain record
    the bounding box of the nodes is used.

    INPUTS:
    ----------
    source    path, text stream or byte stream

    OUTPUT:
    ----------
    PointCloud (no fictitious nodes)
    """
    fh, owned = _open_text(source)
    domain = None
    pts, kinds, lines = [], [], []
    try:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split('#', 1)[0].strip()
            if not text:
                continue
            tokens = text.split()
            if tokens[0].lower() == 'domain':
                if pts or domain is not None:
                    raise CloudParseError(lineno, "domain record must come first")
                if len(tokens) != 5:
                    raise CloudParseError(lineno, "domain needs xmin xmax ymin ymax")
                try:
                    bounds = [float(t) for t in tokens[1:]]
                except ValueError:
                    raise CloudParseError(lineno, "non-numeric domain bound")
                try:
                    domain = Rectangle(*bounds)
                except DiscretizationError as err:
                    raise CloudParseError(lineno, str(err))
                continue
            if len(tokens) != 3:
                raise CloudParseError(lineno, "expected 'x y kind', got %r" % text)
            try:
                x, y = float(tokens[0]), float(tokens[1])
                kind = int(tokens[2])
            except ValueError:
                raise CloudParseError(lineno, "expected 'x y kind', got %r" % text)
            if kind not in (NodeKind.INNER, NodeKind.BOUNDARY):
                raise CloudParseError(lineno, "kind must be 0 (inner) or 1 (boundary)")
            if not (np.isfinite(x) and np.isfinite(y)):
                raise CloudParseError(lineno, "non-finite coordinate")
            pts.append((x, y))
            kinds.append(kind)
            lines.append(lineno)
    finally:
        if owned:
            fh.close()

    if not pts:
        raise DiscretizationError("cloud file holds no nodes")
    pts = np.array(pts)
    if domain is None:
        domain = Rectangle(pts[:, 0].min(), pts[:, 0].max(),
                           pts[:, 1].min(), pts[:, 1].max())
    outside = np.flatnonzero(~domain.contains(pts))
    if outside.size:
        i = outside[0]
        raise DiscretizationError("line %d: node (%g, %g) lies outside the domain %r"
                                  % (lines[i], pts[i, 0], pts[i, 1], domain.bounds))
    cloud = PointCloud(pts, kinds, domain)
    logger.info("loaded cloud: %d inner, %d boundary nodes",
                cloud.inner_ids.size, cloud.boundary_ids.size)
    return cloud


def save_cloud(cloud, dest):
    """Write the cloud file format; fictitious nodes are not written."""
    owned = isinstance(dest, (str, os.PathLike))
    fh = open(dest, 'w', encoding='utf-8') if owned else dest
    try:
        fh.write("domain %s\n" % " ".join(format(b, '.17g') for b in cloud.domain.bounds))
        for i in cloud.physical_ids:
            x, y = cloud.points[i]
            fh.write("%s %s %d\n" % (format(x, '.17g'), format(y, '.17g'),
                                     cloud.kinds[i]))
    finally:
        if owned:
            fh.close()


def add_fictitious_nodes(cloud):
    """
    DESCRIPTION:
    ----------
    Add one fictitious node outside the domain per boundary node and outward
    normal (two at corners).  For boundary node b with outward normal n the
    nearest inner node q having (q - b).(-n) > 0 within 3 median spacings is
    chosen (ties to the lowest id); the fictitious node is placed at
    b + d*n, d = (q - b).(-n), and mirrors q.

    Clouds that already hold fictitious nodes are returned unchanged.

    INPUTS:
    ----------
    cloud     PointCloud whose boundary nodes sit on the rectangle sides

    OUTPUT:
    ----------
    PointCloud with the fictitious nodes appended after the original ones
    """
    if cloud.fictitious_ids.size:
        logger.debug("cloud already holds %d fictitious nodes",
                     cloud.fictitious_ids.size)
        return cloud
    inner = cloud.inner_ids
    if inner.size == 0:
        raise DiscretizationError("no inner nodes to mirror")
    reach = 3.0 * cloud.median_spacing
    tree = cKDTree(cloud.points[inner])
    dom = cloud.domain

    new_pts, new_mirror = [], []
    for b in cloud.boundary_ids:
        pb = cloud.points[b]
        normals = dom.outward_normals(pb)
        if not normals:
            raise DiscretizationError("boundary node %d at (%g, %g) is not on the "
                                      "domain perimeter" % (b, pb[0], pb[1]))
        cand = inner[np.asarray(tree.query_ball_point(pb, reach), dtype=int)]
        for n in normals:
            depth = (cloud.points[cand] - pb) @ (-n)
            ok = depth > dom.tol
            if not np.any(ok):
                raise DiscretizationError(
                    "boundary node %d has no inner node within %g along the "
                    "inward normal (%g, %g)" % (b, reach, -n[0], -n[1]))
            c, d = cand[ok], depth[ok]
            dist = np.hypot(*(cloud.points[c] - pb).T)
            first = np.lexsort((c, np.round(dist / reach, _TIE_DIGITS)))[0]
            new_pts.append(pb + d[first] * n)
            new_mirror.append(c[first])

    m = len(cloud)
    pts = np.vstack([cloud.points, np.array(new_pts)])
    kinds = np.concatenate([cloud.kinds, np.full(len(new_pts), NodeKind.FICTITIOUS)])
    mirror = np.concatenate([cloud.mirror, np.array(new_mirror, dtype=int)])
    augmented = PointCloud(pts, kinds, dom, mirror)
    logger.info("added %d fictitious nodes to %d-node cloud", len(augmented) - m, m)
    return augmented


def select_star(cloud, center_id, s=DEFAULT_STAR_SIZE):
    """
    DESCRIPTION:
    ----------
    E_s-star of a node: the s nodes nearest to the center (Euclidean
    distance, ties to the lowest id).  Fictitious nodes are eligible.

    INPUTS:
    ----------
    cloud      PointCloud
    center_id  inner or boundary node
    s          star size (>= 5)

    OUTPUT:
    ----------
    Star
    """
    if s < S_MIN:
        raise DiscretizationError("star size %d below the minimum %d" % (s, S_MIN))
    center_id = int(center_id)
    if not 0 <= center_id < len(cloud):
        raise DiscretizationError("node %d is not in the cloud" % center_id)
    if cloud.kinds[center_id] == NodeKind.FICTITIOUS:
        raise DiscretizationError("node %d is fictitious and has no star" % center_id)
    if len(cloud) - 1 < s:
        raise DiscretizationError("star of size %d needs %d candidates, cloud has %d"
                                  % (s, s, len(cloud) - 1))
    pc = cloud.points[center_id]
    dist, _ = cloud.tree.query(pc, k=s + 1)
    cutoff = float(dist[-1])
    cand = np.asarray(cloud.tree.query_ball_point(pc, cutoff * (1.0 + 1e-9)), dtype=int)
    cand = cand[cand != center_id]
    d = np.hypot(*(cloud.points[cand] - pc).T)
    order = np.lexsort((cand, np.round(d / cutoff, _TIE_DIGITS)))[:s]
    ids = cand[order]
    return Star(center_id, ids, cloud.points[ids] - pc)
