# Copyright (c) 2025, superposition_networks contributors
# See license.txt

import itertools
import math

import numpy as np

from superposition_networks.bounds import (
    MIN_SIDE_INFO_SAMPLES,
    gap_constants,
    genie_decompose,
    genie_decompose_array,
    genie_side_info_entropy,
    genie_side_info_report,
    geometric_entropy,
    max_entropy_integer_power,
    quantized_gaussian_entropy,
)
from superposition_networks.capacity import plugin_entropy
from superposition_networks.exceptions import DomainError, InvariantError
from superposition_networks.models import derive_dsm, dsm_receive_array, gaussian_receive_array
from superposition_networks.network import load_topology, random_topology
from superposition_networks.qarith import GInt, input_values, quantize_array
from superposition_networks.tests.utils import SuperpositionTestCase


class TestGapConstants(SuperpositionTestCase):
    def test_examples(self):
        constants = gap_constants(2, 2, 1)
        self.assertAlmostEqual(constants.kappa_node, 13.4594, places=4)
        self.assertAlmostEqual(constants.kappa_relay, 26.9189, places=4)
        self.assertAlmostEqual(constants.kappa_ic, 12 + math.log2(289), delta=1e-9)
        self.assertAlmostEqual(constants.kappa_ic_lift, 13.4594, places=4)
        self.assertAlmostEqual(gap_constants(1, 1, 1).kappa_ic, 13.1799, places=4)

    def test_grid_against_hand_formulas(self):
        for M, K, L in itertools.product((1, 2, 3, 7), (1, 2, 3), (1, 2)):
            c = gap_constants(M, K, L)
            self.assertAlmostEqual(c.kappa_node, math.log(6 * M - 1, 2) + 10, delta=1e-9)
            self.assertAlmostEqual(c.kappa_relay, M * (math.log(6 * M - 1, 2) + 10), delta=1e-9)
            self.assertAlmostEqual(c.kappa_ic, 6 * K + math.log(144 * K + 1, 2), delta=1e-9)
            self.assertAlmostEqual(c.kappa_ic_lift, math.log(6 * K - 1, 2) + 10, delta=1e-9)
            self.assertAlmostEqual(c.kappa_mimo_relay, L * M * (math.log(6 * L * M - 1, 2) + 10), delta=1e-9)
            self.assertAlmostEqual(c.kappa_mimo_ic, 6 * L * K + L * math.log(144 * L * K + 1, 2), delta=1e-9)
            self.assertAlmostEqual(c.kappa_mimo_ic_lift, L * (math.log(6 * L * K - 1, 2) + 10), delta=1e-9)
            self.assertAlmostEqual(c.kappa_multicast, M * (math.log(6 * M - 1, 2) + 10), delta=1e-9)
            if L == 1:
                self.assertEqual(c.kappa_mimo_relay, c.kappa_relay)
                self.assertEqual(c.kappa_mimo_ic, c.kappa_ic)
                self.assertEqual(c.kappa_mimo_ic_lift, c.kappa_ic_lift)

    def test_monotone(self):
        for M in range(1, 8):
            a, b = gap_constants(M, 2, 2), gap_constants(M + 1, 2, 2)
            self.assertLess(a.kappa_relay, b.kappa_relay)
            self.assertLess(a.kappa_mimo_relay, b.kappa_mimo_relay)
        for K in range(1, 8):
            a, b = gap_constants(2, K, 2), gap_constants(2, K + 1, 2)
            self.assertLess(a.kappa_ic, b.kappa_ic)
            self.assertLess(a.kappa_mimo_ic_lift, b.kappa_mimo_ic_lift)
        for L in range(1, 5):
            a, b = gap_constants(2, 2, L), gap_constants(2, 2, L + 1)
            self.assertLess(a.kappa_mimo_ic, b.kappa_mimo_ic)

    def test_invalid(self):
        with self.assertRaises(DomainError):
            gap_constants(0)


class TestGenieDecompose(SuperpositionTestCase):
    def test_examples(self):
        split = genie_decompose(2 + 1j, GInt(2, 1), 0, 0)
        self.assertEqual((split.qv, split.qz, split.carry), (GInt(0, 0), GInt(0, 0), GInt(0, 0)))
        split = genie_decompose(2.3, GInt(1, 0), 0.7, 0.6)
        self.assertEqual((split.qv, split.qz, split.carry), (GInt(0, 0), GInt(0, 0), GInt(1, 0)))
        split = genie_decompose(0.5, GInt(1, 0), -0.6, 0.1)
        self.assertEqual(split.carry, GInt(-1, 0))

    def test_precondition(self):
        with self.assertRaises(InvariantError):
            genie_decompose(3.0, GInt(1, 0), 0.5, 0.1)

    def test_identity_on_million_draws(self):
        rng = self.rng()
        failures = 0
        carries = set()
        for network in range(10):
            topology = random_topology(3, seed=100 + network)
            model = derive_dsm(topology)
            values = input_values(model.n)
            for node in range(1, topology.M + 1):
                size = 25000
                tx = {i: values[rng.integers(0, len(values), size=size)] for i in range(topology.M)}
                tx = {i: tx[i] for i in tx if any(e.src == i for e in topology.in_edges(node))}
                clean = gaussian_receive_array(topology, node, tx)
                y_dsm = dsm_receive_array(model, node, tx)
                z = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)
                qv, qz, carry = genie_decompose_array(clean + z, y_dsm, clean - y_dsm, z)
                rebuilt = quantize_array(clean + z) - qv - qz - carry
                failures += int(np.count_nonzero(rebuilt != y_dsm))
                carries.update(carry.real.astype(int).tolist())
                carries.update(carry.imag.astype(int).tolist())
        self.assertEqual(failures, 0)
        self.assertTrue(carries <= {-2, -1, 0, 1, 2})


class TestSideInformation(SuperpositionTestCase):
    def test_layered_every_node(self):
        topology = load_topology(self.load_fixture("layered"))
        for node in range(1, 7):
            report = genie_side_info_report(topology, node, samples=20000, seed=node)
            self.assertAlmostEqual(report.bound, math.log2(35) + 10)
            self.assertLessEqual(report.total, report.bound)
            self.assertTrue(set(report.carry_values) <= {-2, -1, 0, 1, 2})

    def test_random_networks(self):
        for seed in range(3):
            topology = random_topology(3, seed=seed)
            for node in range(1, topology.M + 1):
                report = genie_side_info_report(topology, node, samples=10000, seed=seed)
                self.assertLessEqual(report.total, math.log2(6 * topology.M - 1) + 10)

    def test_zero_in_degree(self):
        topology = load_topology(self.load_fixture("layered"))
        self.assertEqual(genie_side_info_entropy(topology, 0, samples=10000, seed=1), 0.0)

    def test_too_few_samples(self):
        topology = load_topology(self.load_fixture("diamond"))
        with self.assertRaises(DomainError):
            genie_side_info_report(topology, 3, samples=MIN_SIDE_INFO_SAMPLES - 1, seed=1)
        report = genie_side_info_report(topology, 3, samples=MIN_SIDE_INFO_SAMPLES, seed=1)
        self.assertEqual(report.samples, MIN_SIDE_INFO_SAMPLES)

    def test_noiseless(self):
        topology = load_topology(self.load_fixture("diamond"))
        report = genie_side_info_report(topology, 3, samples=10000, seed=2, noiseless=True)
        self.assertEqual(report.h_qz, 0.0)

    def test_qv_per_component_bound(self):
        rng = self.rng(3)
        topology = random_topology(3, seed=21)
        model = derive_dsm(topology)
        values = input_values(model.n)
        for node in range(1, topology.M + 1):
            degree = len(topology.in_edges(node))
            tx = {e.src: values[rng.integers(0, len(values), size=20000)] for e in topology.in_edges(node)}
            v = gaussian_receive_array(topology, node, tx) - dsm_receive_array(model, node, tx)
            qv = quantize_array(v)
            self.assertLessEqual(plugin_entropy(qv.real.astype(np.int64)), math.log2(6 * degree - 1))
            self.assertLessEqual(plugin_entropy(qv.imag.astype(np.int64)), math.log2(6 * degree - 1))


class TestEntropyBounds(SuperpositionTestCase):
    def test_geometric(self):
        self.assertAlmostEqual(geometric_entropy(1.0), 2.0, delta=1e-9)
        self.assertEqual(geometric_entropy(0.0), 0.0)

    def test_unit_power(self):
        result = max_entropy_integer_power(1.0, 4096)
        self.assertAlmostEqual(result.h_z, 2.0, delta=1e-9)
        self.assertLessEqual(result.bound, 6.0 + 1e-12)
        self.assertAlmostEqual(result.theta, 0.5, delta=1e-9)

    def test_vanishing_power(self):
        self.assertLess(max_entropy_integer_power(1e-9, 64).h_z, 1e-6)

    def test_truncation(self):
        small = max_entropy_integer_power(1.0, 64).h_z
        large = max_entropy_integer_power(1.0, 4096).h_z
        self.assertAlmostEqual(small, large, delta=1e-6)

    def test_large_power_is_uniform(self):
        self.assertAlmostEqual(max_entropy_integer_power(100.0, 64).h_z, math.log2(65))

    def test_invalid(self):
        with self.assertRaises(DomainError):
            max_entropy_integer_power(0.0, 64)
        with self.assertRaises(DomainError):
            max_entropy_integer_power(1.0, 8)
        with self.assertRaises(DomainError):
            quantized_gaussian_entropy(0.0)

    def test_quantized_gaussian(self):
        unit = quantized_gaussian_entropy(0.5)
        self.assertLessEqual(unit, 6.0)
        self.assertLessEqual(quantized_gaussian_entropy(1 / 16), unit)
        self.assertLess(quantized_gaussian_entropy(1e-6), 1e-9)

    def test_quantized_gaussian_monotone(self):
        grid = np.geomspace(1e-3, 50, 40)
        values = [quantized_gaussian_entropy(v) for v in grid]
        self.assertTrue(all(b >= a - 1e-12 for a, b in zip(values, values[1:])))

    def test_against_sampling(self):
        rng = self.rng(4)
        z = (rng.standard_normal(200000) + 1j * rng.standard_normal(200000)) / math.sqrt(2)
        self.assertAlmostEqual(plugin_entropy(quantize_array(z)), quantized_gaussian_entropy(0.5), delta=0.02)
