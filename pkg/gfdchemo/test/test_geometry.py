#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Point clouds, cloud files, fictitious nodes and star selection
"""

import io
import unittest

import numpy as np

from context import gfdchemo
from gfdchemo.errors import CloudParseError, DiscretizationError
from gfdchemo.geometry import (NodeKind, PointCloud, Rectangle, Star, UNIT_SQUARE,
                               add_fictitious_nodes, build_regular_grid, load_cloud,
                               perturb_grid, save_cloud, select_star)


class TestRegularGrid(unittest.TestCase):

    def test_canonical_grid(self):
        cloud = build_regular_grid(19)
        self.assertEqual(len(cloud), 361)
        self.assertEqual(cloud.boundary_ids.size, 72)
        self.assertEqual(cloud.inner_ids.size, 289)
        self.assertEqual(cloud.fictitious_ids.size, 0)

    def test_smallest_grid(self):
        cloud = build_regular_grid(3)
        self.assertEqual(len(cloud), 9)
        self.assertEqual(cloud.boundary_ids.size, 8)
        self.assertEqual(cloud.inner_ids.tolist(), [4])

    def test_spacing(self):
        tolx = 1e-14
        cloud = build_regular_grid(5, Rectangle(0, 2, 0, 2))
        self.assertEqual(cloud.boundary_ids.size, 16)
        self.assertEqual(cloud.inner_ids.size, 9)
        self.assertTrue(abs(cloud.min_separation / 0.5 - 1) < tolx)
        # x runs fastest
        self.assertTrue(np.allclose(cloud.points[1], (0.5, 0.0)))
        self.assertTrue(np.allclose(cloud.points[5], (0.0, 0.5)))

    def test_too_small(self):
        with self.assertRaises(DiscretizationError):
            build_regular_grid(2)

    def test_node_view(self):
        cloud = build_regular_grid(3)
        node = cloud.nodes[4]
        self.assertEqual(node.kind, NodeKind.INNER)
        self.assertIsNone(node.mirror_id)
        self.assertEqual(node.position, (0.5, 0.5))

    def test_degenerate_domain(self):
        with self.assertRaises(DiscretizationError):
            Rectangle(0, 0, 0, 1)


class TestPointCloud(unittest.TestCase):

    def test_arrays_read_only(self):
        cloud = build_regular_grid(4)
        with self.assertRaises(ValueError):
            cloud.points[0, 0] = 3.0

    def test_duplicate_position(self):
        with self.assertRaises(DiscretizationError) as cm:
            PointCloud([(0, 0), (1, 0), (0.5, 0.5), (0.5, 0.5)], [1, 1, 0, 0],
                       UNIT_SQUARE)
        self.assertIn("2 and 3", str(cm.exception))

    def test_fictitious_inside(self):
        with self.assertRaises(DiscretizationError):
            PointCloud([(0.5, 0.5), (0.2, 0.5)], [0, 2], UNIT_SQUARE, mirror=[-1, 0])

    def test_mirror_without_fictitious(self):
        with self.assertRaises(DiscretizationError):
            PointCloud([(0.5, 0.5), (0.2, 0.5)], [0, 0], UNIT_SQUARE, mirror=[-1, 0])


class TestCloudFiles(unittest.TestCase):

    def test_minimal_file(self):
        text = ("# corners and a center\n"
                "domain 0 1 0 1\n"
                "0 0 1\n1 0 1\n0 1 1\n1 1 1\n"
                "0.5 0.5 0  # center\n")
        cloud = load_cloud(io.StringIO(text))
        self.assertEqual(len(cloud), 5)
        self.assertEqual(cloud.inner_ids.tolist(), [4])
        self.assertEqual(cloud.domain, UNIT_SQUARE)

    def test_byte_stream(self):
        data = b"domain 0 1 0 1\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n0.5 0.5 0\n"
        self.assertEqual(len(load_cloud(io.BytesIO(data))), 5)

    def test_duplicate(self):
        text = "0 0 1\n1 1 1\n0.5 0.5 0\n0.5 0.5 0\n"
        with self.assertRaises(DiscretizationError):
            load_cloud(io.StringIO(text))

    def test_outside_domain(self):
        text = "domain 0 1 0 1\n0 0 1\n1.5 0.5 0\n"
        with self.assertRaises(DiscretizationError) as cm:
            load_cloud(io.StringIO(text))
        self.assertIn("line 3", str(cm.exception))

    def test_parse_error_line(self):
        text = "domain 0 1 0 1\n0 0 1\n0.5 zero 0\n"
        with self.assertRaises(CloudParseError) as cm:
            load_cloud(io.StringIO(text))
        self.assertEqual(cm.exception.line, 3)

    def test_bad_kind(self):
        with self.assertRaises(CloudParseError):
            load_cloud(io.StringIO("0 0 2\n"))

    def test_late_domain(self):
        with self.assertRaises(CloudParseError):
            load_cloud(io.StringIO("0 0 1\ndomain 0 1 0 1\n"))

    def test_round_trip(self):
        cloud = perturb_grid(7, seed=3)
        buf = io.StringIO()
        save_cloud(add_fictitious_nodes(cloud), buf)
        buf.seek(0)
        back = load_cloud(buf)
        self.assertTrue(np.array_equal(back.points, cloud.points))
        self.assertTrue(np.array_equal(back.kinds, cloud.kinds))
        self.assertEqual(back.domain, cloud.domain)

    def test_shipped_cloud(self):
        from gfdchemo.config import IRREGULAR_CLOUD
        cloud = load_cloud(IRREGULAR_CLOUD)
        self.assertEqual(len(cloud), 361)
        self.assertEqual(cloud.boundary_ids.size, 72)
        self.assertEqual(cloud.domain, UNIT_SQUARE)


class TestPerturbGrid(unittest.TestCase):

    def test_deterministic(self):
        a = perturb_grid(9, seed=11)
        b = perturb_grid(9, seed=11)
        self.assertTrue(np.array_equal(a.points, b.points))

    def test_sides_stay_on_perimeter(self):
        cloud = perturb_grid(9, amplitude=0.3, seed=1)
        dom = cloud.domain
        for b in cloud.boundary_ids:
            self.assertTrue(len(dom.outward_normals(cloud.points[b])) > 0)
        corners = cloud.points[[0, 8, 72, 80]]
        self.assertTrue(np.array_equal(corners, [[0, 0], [1, 0], [0, 1], [1, 1]]))

    def test_amplitude_range(self):
        with self.assertRaises(DiscretizationError):
            perturb_grid(9, amplitude=0.5)


class TestFictitiousNodes(unittest.TestCase):

    def test_canonical_ring(self):
        cloud = add_fictitious_nodes(build_regular_grid(19))
        ghosts = cloud.fictitious_ids
        self.assertEqual(ghosts.size, 76)
        self.assertFalse(np.any(cloud.domain.contains(cloud.points[ghosts])))
        self.assertTrue(np.all(cloud.kinds[cloud.mirror[ghosts]] == NodeKind.INNER))
        # regular grid: every ghost is the mirror image of its inner node
        h = 1.0 / 18
        d = np.hypot(*(cloud.points[ghosts] - cloud.points[cloud.mirror[ghosts]]).T)
        self.assertTrue(np.all(d > 1.9 * h))

    def test_single_reflection(self):
        h = 0.25
        pts = [(0.0, 0.5), (h, 0.5), (0.5, 0.5), (0.5, 0.25), (0.5, 0.75), (0.75, 0.5)]
        cloud = add_fictitious_nodes(PointCloud(pts, [1, 0, 0, 0, 0, 0], UNIT_SQUARE))
        ghost = cloud.fictitious_ids
        self.assertEqual(ghost.size, 1)
        self.assertTrue(np.allclose(cloud.points[ghost[0]], (-h, 0.5)))
        self.assertEqual(cloud.nodes[ghost[0]].mirror_id, 1)

    def test_corner_gets_two(self):
        cloud = add_fictitious_nodes(build_regular_grid(5))
        h = 0.25
        corner_ghosts = cloud.points[cloud.fictitious_ids][
            np.hypot(*cloud.points[cloud.fictitious_ids].T) < 1.2 * h]
        self.assertEqual(len(corner_ghosts), 2)
        mirrors = cloud.mirror[cloud.fictitious_ids][
            np.hypot(*cloud.points[cloud.fictitious_ids].T) < 1.2 * h]
        # both mirror the diagonal inner node (h, h)
        self.assertTrue(np.all(mirrors == 6))

    def test_idempotent(self):
        once = add_fictitious_nodes(build_regular_grid(7))
        twice = add_fictitious_nodes(once)
        self.assertEqual(len(once), len(twice))

    def test_no_inner_nearby(self):
        pts = [(0.0, 0.5), (0.9, 0.5), (0.92, 0.5), (0.9, 0.52), (0.92, 0.52),
               (0.94, 0.5), (0.94, 0.52)]
        cloud = PointCloud(pts, [1, 0, 0, 0, 0, 0, 0], UNIT_SQUARE)
        with self.assertRaises(DiscretizationError):
            add_fictitious_nodes(cloud)


class TestSelectStar(unittest.TestCase):

    def test_moore_neighbourhood(self):
        cloud = build_regular_grid(19)
        c = 9 * 19 + 9
        star = select_star(cloud, c, 8)
        expected = sorted(c + di + 19 * dj for di in (-1, 0, 1) for dj in (-1, 0, 1)
                          if (di, dj) != (0, 0))
        self.assertEqual(sorted(star.neighbor_ids.tolist()), expected)

    def test_tie_break_lowest_id(self):
        cloud = build_regular_grid(3)
        star = select_star(cloud, 4, 5)
        self.assertEqual(star.neighbor_ids.tolist(), [1, 3, 5, 7, 0])

    def test_too_few_candidates(self):
        with self.assertRaises(DiscretizationError):
            select_star(build_regular_grid(19), 180, 400)

    def test_minimum_size(self):
        with self.assertRaises(DiscretizationError):
            select_star(build_regular_grid(5), 12, 4)

    def test_fictitious_center(self):
        cloud = add_fictitious_nodes(build_regular_grid(5))
        with self.assertRaises(DiscretizationError):
            select_star(cloud, cloud.fictitious_ids[0], 8)

    def test_offsets(self):
        cloud = build_regular_grid(5)
        star = select_star(cloud, 12, 8)
        self.assertTrue(np.allclose(star.offsets,
                                    cloud.points[star.neighbor_ids] - cloud.points[12]))
        self.assertNotIn(12, star.neighbor_ids.tolist())

    def test_compact(self):
        cloud = add_fictitious_nodes(perturb_grid(11, seed=5))
        for c in cloud.physical_ids:
            star = select_star(cloud, c, 8)
            dist, _ = cloud.tree.query(cloud.points[c], k=9)
            self.assertTrue(np.hypot(star.h, star.k).max() <= dist[8] * (1 + 1e-12))

    def test_point_symmetric_on_grid(self):
        cloud = add_fictitious_nodes(build_regular_grid(11))
        for c in cloud.inner_ids:
            star = select_star(cloud, c, 8)
            off = {tuple(np.round(o * 10, 9)) for o in star.offsets}
            self.assertEqual(off, {tuple(-np.array(o) + 0.0) for o in off})

    def test_boundary_star_uses_ghosts(self):
        cloud = add_fictitious_nodes(build_regular_grid(7))
        star = select_star(cloud, 3, 8)
        kinds = cloud.kinds[star.neighbor_ids]
        self.assertEqual(int(np.sum(kinds == NodeKind.FICTITIOUS)), 3)

    def test_star_validation(self):
        with self.assertRaises(DiscretizationError):
            Star(0, [1, 2, 3, 4, 4], np.ones((5, 2)))


if __name__ == '__main__':
    unittest.main()
