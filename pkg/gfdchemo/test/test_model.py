#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Motility functions, hypotheses and initial data
"""

import unittest

import numpy as np

from context import gfdchemo
from gfdchemo import model
from gfdchemo.errors import GammaDomainError, HypothesisError
from gfdchemo.geometry import add_fictitious_nodes, build_regular_grid


class TestMotilityFunctions(unittest.TestCase):

    def test_gamma1_at_zero(self):
        result = model.gamma_derivatives(model.gamma1, 0.0)
        self.assertEqual(result, (1.0, -1.0, 1.0, -1.0))

    def test_gamma2_at_one(self):
        tolx = 1e-14
        result = model.gamma_derivatives(model.gamma2, 1.0)
        for r, expected in zip(result, (0.25, -0.25, 0.375, -0.75)):
            self.assertTrue(abs(r / expected - 1) < tolx)

    def test_scalar_in_scalar_out(self):
        self.assertIsInstance(model.gamma1(2.0), float)
        self.assertEqual(model.gamma2(np.array([0.0, 1.0])).shape, (2,))

    def test_derivatives_by_finite_differences(self):
        """Analytic derivatives against central differences"""
        tolx = 1e-6
        eps = 1e-5
        for g in model.GAMMAS.values():
            for s in (0.1, 0.5, 1.0, 2.5, 7.0):
                for f, df in ((g.func, g.d1), (g.d1, g.d2), (g.d2, g.d3)):
                    fd = (f(s + eps) - f(s - eps)) / (2 * eps)
                    self.assertTrue(abs(fd - df(s)) < tolx * (1 + abs(df(s))),
                                    msg="%s at %g" % (g.name, s))

    def test_negative_concentration(self):
        for g in model.GAMMAS.values():
            with self.assertRaises(GammaDomainError):
                model.gamma_derivatives(g, -0.1)
            with self.assertRaises(GammaDomainError):
                model.gamma_derivatives(g, np.array([0.5, np.nan]))

    def test_lookup(self):
        self.assertIs(model.get_gamma('gamma2'), model.gamma2)
        with self.assertRaises(ValueError):
            model.get_gamma('gamma3')


class TestHypotheses(unittest.TestCase):

    def test_gamma1_mu3_passes(self):
        report = model.validate_hypotheses(model.ModelParams(3.0, model.gamma1))
        self.assertTrue(report.passes)
        self.assertTrue(report.sign_chain_ok)
        self.assertEqual(report.mu0, 2.0)
        self.assertEqual(report.c_gamma, 1.0)

    def test_gamma1_mu2_fails(self):
        """mu0 < mu is strict"""
        report = model.validate_hypotheses(model.ModelParams(2.0, model.gamma1))
        self.assertTrue(report.sign_chain_ok)
        self.assertFalse(report.passes)

    def test_gamma2(self):
        self.assertTrue(model.validate_hypotheses(model.ModelParams(5.0, model.gamma2)).passes)
        self.assertFalse(model.validate_hypotheses(model.ModelParams(4.0, model.gamma2)).passes)

    def test_sampled_suprema(self):
        """Sampling recovers the analytic suprema, both attained at s = 0"""
        tolx = 1e-12
        for g in model.GAMMAS.values():
            report = model.validate_hypotheses(model.ModelParams(10.0, g), analytic=False)
            self.assertTrue(abs(report.mu0 / g.mu0 - 1) < tolx)
            self.assertTrue(abs(report.c_gamma / g.c_gamma - 1) < tolx)

    def test_increasing_gamma(self):
        g = model.MotilityFunction('linear', lambda s: 1.0 + s, lambda s: 1.0 + 0 * s,
                                   lambda s: 0 * s, lambda s: 0 * s)
        report = model.validate_hypotheses(model.ModelParams(10.0, g))
        self.assertFalse(report.sign_chain_ok)
        self.assertFalse(report.passes)

    def test_report_text(self):
        text = str(model.validate_hypotheses(model.ModelParams(3.0, model.gamma1)))
        self.assertIn("gamma1", text)
        self.assertIn("passes      : yes", text)

    def test_arguments(self):
        params = model.ModelParams(3.0, model.gamma1)
        with self.assertRaises(ValueError):
            model.validate_hypotheses(params, s_max=0.0)
        with self.assertRaises(ValueError):
            model.validate_hypotheses(params, n_samples=50)
        with self.assertRaises(ValueError):
            model.ModelParams(0.0, model.gamma1)


class TestInitialConditions(unittest.TestCase):

    def test_bump(self):
        tolx = 1e-14
        u0 = model.bump()
        self.assertTrue(abs(u0(0.5, 0.5) / (0.1 + 5 * np.exp(-4.0)) - 1) < tolx)
        self.assertEqual(u0(0.0, 0.0), 0.1)
        self.assertEqual(u0(1.0, 0.5), 0.1)
        self.assertEqual(u0.params, {'a': 0.1, 'b': 5.0})

    def test_bump_phi(self):
        self.assertEqual(model.bump_phi(0.5), 0.0)
        self.assertEqual(model.bump_phi(0.7), 0.0)
        self.assertTrue(abs(model.bump_phi(0.0) / np.exp(-4.0) - 1) < 1e-14)
        r = np.linspace(0, 0.49, 50)
        self.assertTrue(np.all(np.diff(model.bump_phi(r)) < 0))

    def test_cosine(self):
        u0 = model.cosine()
        self.assertTrue(abs(u0(0.0, 0.3) - 11.0) < 1e-14)
        self.assertTrue(abs(u0(1.0, 0.3) - 1.0) < 1e-14)
        self.assertTrue(abs(u0(0.5, 0.9) - 6.0) < 1e-14)

    def test_mixed(self):
        u0 = model.mixed()
        self.assertEqual(u0(0.0, 0.0), 1.0)
        self.assertEqual(u0(1.0, 1.0), 1.0)
        self.assertTrue(abs(u0(0.5, 0.0) - (1 + 50 * np.exp(-4.0))) < 1e-13)
        self.assertTrue(abs(u0(0.5, 1.0) - (1 - 50 * np.exp(-4.0))) < 1e-13)
        self.assertTrue(u0(0.5, 1.0) > 0)

    def test_factories(self):
        self.assertEqual(model.get_initial('bump', a=0.2, b=1.0).params, {'a': 0.2, 'b': 1.0})
        self.assertEqual(model.get_initial('constant', c=0.5)(0.3, 0.4), 0.5)
        with self.assertRaises(ValueError):
            model.get_initial('gaussian')
        with self.assertRaises(ValueError):
            model.bump(a=0.0)
        with self.assertRaises(ValueError):
            model.constant(np.inf)

    def test_eval_on_cloud(self):
        cloud = add_fictitious_nodes(build_regular_grid(11))
        u = model.eval_initial(model.cosine(), cloud)
        ghosts = cloud.fictitious_ids
        self.assertTrue(np.array_equal(u[ghosts], u[cloud.mirror[ghosts]]))
        x = cloud.points[cloud.physical_ids, 0]
        self.assertTrue(np.allclose(u[cloud.physical_ids], 6 + 5 * np.cos(np.pi * x)))

    def test_non_positive_density(self):
        cloud = build_regular_grid(5)
        with self.assertRaises(HypothesisError) as cm:
            model.eval_initial(model.constant(-1.0), cloud)
        self.assertIn("node 0", str(cm.exception))


class TestClosedForms(unittest.TestCase):

    def test_gamma_crossing(self):
        s = model.gamma_crossing()
        self.assertTrue(abs(s - 2.51286) < 1e-4)
        self.assertTrue(abs(model.gamma1(s) - model.gamma2(s)) < 1e-12)
        # gamma1 below gamma2 past the crossing
        self.assertTrue(model.gamma1(s + 1) < model.gamma2(s + 1))

    def test_no_crossing(self):
        with self.assertRaises(ValueError):
            model.gamma_crossing(lo=3.0, hi=5.0)

    def test_logistic(self):
        tolx = 1e-14
        result = model.logistic_solution(0.5, 3.0, 1.0)
        self.assertTrue(abs(result / (1 / (1 + np.exp(-3.0))) - 1) < tolx)
        self.assertEqual(model.logistic_solution(1.0, 3.0, 2.0), 1.0)
        self.assertEqual(model.logistic_solution(0.5, 3.0, 0.0), 0.5)


if __name__ == '__main__':
    unittest.main()
