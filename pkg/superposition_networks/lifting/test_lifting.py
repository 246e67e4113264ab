# Copyright (c) 2025, superposition_networks contributors
# See license.txt

import numpy as np

from superposition_networks.exceptions import DecodingError, DomainError, LimitExceededError, ModeError
from superposition_networks.lifting import (
    block_extend,
    interleave_schedule,
    lift,
    lift_decode_step,
    load_code,
    measure_side_information,
    measured_prune_exponent,
    prune,
    run_lifted,
    simulate_dsm,
    typical_outputs,
)
from superposition_networks.lifting.test_dsm_code import delay_code
from superposition_networks.models import derive_dsm, gaussian_receive_array
from superposition_networks.network import load_topology
from superposition_networks.tests.utils import SuperpositionTestCase, slow


def point_to_point():
    """Single link of gain 4 and a four-word code with distinct receptions."""
    topology = load_topology(
        {
            "mode": "relay",
            "nodes": [{"id": 0, "role": "source"}, {"id": 1, "role": "destination"}],
            "edges": [{"from": 0, "to": 1, "gain_re": 4.0, "gain_im": 0.0}],
        }
    )
    code = load_code(
        {
            "N": 1,
            "n": 2,
            "codebook": ["0", "3", "c", "f"],
            "decoder": {"0+0i": 0, "0+2i": 1, "2+0i": 2, "2+2i": 3},
        }
    )
    return topology, derive_dsm(topology), code


class TestBlockExtension(SuperpositionTestCase):
    def test_counting(self):
        _, model, code = point_to_point()
        extended = block_extend(code, model, 3)
        self.assertEqual(extended.size, 64)
        self.assertEqual(extended.length, 3)
        self.assertEqual(extended.rate, code.rate)
        self.assertEqual(list(extended.codeword((3, 0, 1))), [15, 0, 3])

    def test_refusals(self):
        _, model, code = point_to_point()
        with self.assertRaises(DomainError):
            block_extend(code, model, 0)
        with self.assertRaises(LimitExceededError):
            block_extend(code, model, 50)


class TestTypicalOutputs(SuperpositionTestCase):
    def test_single_extension_keeps_everything(self):
        topology = load_topology(self.load_fixture("diamond"))
        extended = block_extend(load_code(self.load_fixture("diamond_code")), derive_dsm(topology), 1)
        for node in (1, 2, 3):
            typical = typical_outputs(extended, node, 0.01)
            self.assertEqual(typical.size, 16)
            self.assertEqual(len(typical.members), 16)

    def test_single_codeword(self):
        _, model, _ = point_to_point()
        code = load_code({"N": 1, "n": 2, "codebook": ["f"], "decoder": {"2+2i": 0}})
        typical = typical_outputs(block_extend(code, model, 4), 1, 0.1)
        self.assertEqual(typical.size, 1)
        self.assertEqual(typical.members.tolist(), [[0, 0, 0, 0]])

    def test_permutations(self):
        _, model, code = point_to_point()
        typical = typical_outputs(block_extend(code, model, 4), 1, 0.2)
        self.assertEqual(typical.size, 24)
        for row in typical.members.tolist():
            self.assertEqual(sorted(row), [0, 1, 2, 3])

    def test_size_against_entropy(self):
        topology = load_topology(self.load_fixture("diamond"))
        extended = block_extend(load_code(self.load_fixture("diamond_code")), derive_dsm(topology), 8)
        typical = typical_outputs(extended, 3, 0.07)
        self.assertIsNone(typical.members)
        self.assertEqual(typical.size, 518918400)
        report = typical.report()
        self.assertAlmostEqual(report["log2_size_per_block"], np.log2(518918400) / 8)
        self.assertTrue(report["within_bounds"])
        self.assertLessEqual(report["log2_size_per_block"], typical.entropy)

    def test_epsilon_must_be_positive(self):
        _, model, code = point_to_point()
        with self.assertRaises(DomainError):
            typical_outputs(block_extend(code, model, 2), 1, 0.0)


class TestPrune(SuperpositionTestCase):
    def extended(self, m):
        _, model, code = point_to_point()
        return block_extend(code, model, m)

    def test_counting(self):
        extended = self.extended(5)
        typical = {1: typical_outputs(extended, 1, 1.0)}
        self.assertEqual(typical[1].size, 1024)
        lifted = prune(extended, typical, 4 / 5, seed=self.seed)
        self.assertEqual(lifted.selected[1].size, 64)
        self.assertEqual(len(lifted.codebook), 64)
        self.assertAlmostEqual(lifted.log2_size, 6.0)

    def test_zero_exponent_keeps_everything(self):
        extended = self.extended(3)
        lifted = prune(extended, {1: typical_outputs(extended, 1, 1.0)}, 0.0, seed=self.seed)
        self.assertEqual(len(lifted.codebook), 64)
        self.assertEqual(lifted.rate, 2.0)

    def test_codewords_land_in_selected_sets(self):
        extended = self.extended(4)
        typical = {1: typical_outputs(extended, 1, 0.2)}
        lifted = prune(extended, typical, 0.25, seed=self.seed)
        self.assertEqual(lifted.selected[1].size, 12)
        for rows in lifted.codebook.tolist():
            self.assertTrue(lifted.selected[1].contains(extended.receptions(1, rows)))
        inside = [rows for rows in np.ndindex(4, 4, 4, 4) if lifted.selected[1].contains(extended.receptions(1, rows))]
        self.assertEqual(len(inside), len(lifted.codebook))

    def test_larger_exponent_never_grows_codebook(self):
        extended = self.extended(4)
        typical = {1: typical_outputs(extended, 1, 1.0)}
        sizes, previous = [], None
        for exponent in (0.0, 0.1, 0.3, 0.6, 1.0):
            lifted = prune(extended, typical, exponent, seed=self.seed)
            sizes.append(len(lifted.codebook))
            if previous is not None:
                self.assertLessEqual(lifted.selected[1].members, previous)
            previous = lifted.selected[1].members
        self.assertEqual(sizes, sorted(sizes, reverse=True))

    def test_empty_result_is_reported(self):
        topology = load_topology(self.load_fixture("diamond"))
        model = derive_dsm(topology)
        lifted = lift(load_code(self.load_fixture("diamond_code")), model, 8, 0.07, 10.0, seed=self.seed)
        self.assertTrue(lifted.empty)
        self.assertEqual(lifted.rate, 0.0)
        self.assertIn("reason", lifted.summary()["diagnostics"])
        with self.assertRaises(DecodingError):
            run_lifted(topology, lifted, 5, seed=self.seed)

    def test_negative_exponent(self):
        extended = self.extended(2)
        with self.assertRaises(DomainError):
            prune(extended, {1: typical_outputs(extended, 1, 1.0)}, -0.1, seed=self.seed)


class TestDecoding(SuperpositionTestCase):
    def test_noiseless_reception_is_recovered(self):
        topology, model, code = point_to_point()
        lifted = lift(code, model, 3, 1.0, 0.0, seed=self.seed)
        alphabet = lifted.extended.tables.alphabet[1]
        for rows in lifted.codebook.tolist():
            y = gaussian_receive_array(topology, 1, {0: code.values(lifted.extended.codeword(rows))})
            expected = tuple(g for a in lifted.extended.receptions(1, rows) for g in alphabet[a])
            self.assertEqual(lift_decode_step(lifted, 1, y), expected)

    def test_single_candidate(self):
        _, model, code = point_to_point()
        lifted = lift(code, model, 2, 1.0, 2.0, seed=self.seed)
        self.assertEqual(lifted.selected[1].size, 1)
        (only,) = lifted.selected[1].members
        alphabet = lifted.extended.tables.alphabet[1]
        expected = tuple(g for a in only for g in alphabet[a])
        rng = self.rng()
        for _ in range(20):
            y = 10 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            self.assertEqual(lift_decode_step(lifted, 1, y), expected)


class TestRunLifted(SuperpositionTestCase):
    def setUp(self):
        super().setUp()
        self.topology = load_topology(self.load_fixture("diamond"))
        self.model = derive_dsm(self.topology)
        self.code = load_code(self.load_fixture("diamond_code"))

    def test_noiseless_runs_are_error_free(self):
        lifted = lift(self.code, self.model, 2, 1.0, 0.0, seed=self.seed)
        self.assertEqual(len(lifted.codebook), 256)
        report = run_lifted(self.topology, lifted, 30, seed=self.seed, noise_scale=0.0)
        self.assertEqual(report.block_errors, 0)
        self.assertEqual(report.empirical_rate, 2.0)

    def test_same_seed_same_report(self):
        lifted = lift(self.code, self.model, 2, 1.0, 0.0, seed=self.seed)
        first = run_lifted(self.topology, lifted, 20, seed=7)
        second = run_lifted(self.topology, lifted, 20, seed=7)
        self.assertEqual(first, second)

    def test_diamond_lifting(self):
        exponent = measured_prune_exponent(self.code, self.model, samples=2000, seed=self.seed)
        self.assertLess(exponent, 0.05)
        lifted = lift(self.code, self.model, 8, 0.07, exponent, seed=self.seed)
        self.assertFalse(lifted.empty)
        report = run_lifted(self.topology, lifted, 50, seed=self.seed)
        self.assertLessEqual(report.error_rate, 0.1)
        self.assertGreaterEqual(report.empirical_rate, self.code.rate - 3 * exponent - 0.5)
        self.assertEqual(report.ledger["receiving_nodes"], 3)

    @slow
    def test_diamond_lifting_over_twenty_seeds(self):
        exponent = measured_prune_exponent(self.code, self.model, samples=20000, seed=self.seed)
        floor = self.code.rate - 3 * exponent - 0.5
        error_rates = []
        for seed in range(1, 21):
            lifted = lift(self.code, self.model, 8, 0.07, exponent, seed=seed)
            if lifted.empty:
                continue
            report = run_lifted(self.topology, lifted, 200, seed=seed)
            self.assertGreaterEqual(report.empirical_rate, floor)
            error_rates.append(report.error_rate)
        self.assertGreaterEqual(len(error_rates), 18)
        self.assertLessEqual(float(np.median(error_rates)), 0.05)

    def test_per_time_code_is_refused(self):
        code = load_code(delay_code())
        lifted = lift(code, self.model, 1, 1.0, 0.0, seed=self.seed)
        with self.assertRaises(ModeError):
            run_lifted(self.topology, lifted, 5, seed=self.seed)

    def test_side_information_is_small(self):
        value = measure_side_information(self.code, self.model, 1, samples=2000, seed=self.seed)
        self.assertGreaterEqual(value, 0.0)
        self.assertLess(value, 0.1)


class TestInterleave(SuperpositionTestCase):
    def setUp(self):
        super().setUp()
        self.model = derive_dsm(load_topology(self.load_fixture("diamond")))
        self.code = load_code(delay_code())

    def test_rounds(self):
        schedule = interleave_schedule(self.code, self.model, 3)
        self.assertEqual(schedule.shape, (2, 3))
        self.assertEqual(schedule.rounds[0]["source"], [0, 12, 3])
        self.assertEqual(schedule.causality[1], [[], [0]])

    def test_first_round_ignores_receptions(self):
        for rows in ([0, 1, 2], [3, 3, 1]):
            schedule = interleave_schedule(self.code, self.model, 3, rows)
            self.assertEqual(schedule.rounds[0]["relays"], {1: [0, 0, 0], 2: [0, 0, 0]})

    def test_deinterleaving_matches_single_runs(self):
        rows = [2, 0, 3, 1]
        schedule = interleave_schedule(self.code, self.model, 4, rows)
        for b, row in enumerate(rows):
            single = simulate_dsm(self.code, self.model, row)
            for node in (1, 2, 3):
                self.assertEqual(schedule.deinterleaved[node][b], single.receptions[node])
        self.assertEqual(schedule.decoded, (tuple(rows),))

    def test_blockwise_code_is_refused(self):
        with self.assertRaises(ModeError):
            interleave_schedule(load_code(self.load_fixture("diamond_code")), self.model, 2)
