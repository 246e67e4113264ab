# Copyright (c) 2025, superposition_networks contributors
# See license.txt

import copy

from superposition_networks import error_log
from superposition_networks.exceptions import DecodingError, InvariantError, ModeError, SchemaError
from superposition_networks.lifting import load_code, purge_report, purge_zero_error, simulate_dsm
from superposition_networks.models import derive_dsm
from superposition_networks.network import load_topology
from superposition_networks.qarith import GInt
from superposition_networks.tests.utils import SuperpositionTestCase

SYMBOLS = ["0", "c", "3", "f"]
RELAY_RECEPTIONS = {1: ["0+0i", "3+3i", "-3+3i", "0+7i"], 2: ["0+0i", "3-3i", "3+3i", "7+0i"]}
DESTINATION_RECEPTIONS = ["0+0i", "6+0i", "0+6i", "7+7i"]


def delay_code():
    """Per-time diamond code: the source speaks at t=0, the relays forward at t=1."""
    return {
        "N": 2,
        "n": 2,
        "mode": "per-time",
        "codebook": [symbol + "0" for symbol in SYMBOLS],
        "relay_maps": {
            str(node): {"mode": "per-time", "maps": [{"": "0"}, dict(zip(keys, SYMBOLS))]}
            for node, keys in RELAY_RECEPTIONS.items()
        },
        "decoder": {f"0+0i,{key}": w for w, key in enumerate(DESTINATION_RECEPTIONS)},
    }


class DiamondCase(SuperpositionTestCase):
    def setUp(self):
        super().setUp()
        self.topology = load_topology(self.load_fixture("diamond"))
        self.model = derive_dsm(self.topology)
        self.document = self.load_fixture("diamond_code")


class TestLoadCode(DiamondCase):
    def test_fixture(self):
        code = load_code(self.document)
        self.assertEqual(code.size, 16)
        self.assertEqual(code.N, 2)
        self.assertEqual(code.rate, 2.0)
        self.assertEqual(code.relay_block(1, (GInt(3, 3), GInt(-3, 3))), (12, 3))
        self.assertEqual(code.decode((GInt(7, 7), GInt(7, 7))), 15)

    def test_unknown_reception_transmits_zeros(self):
        code = load_code(self.document)
        self.assertEqual(code.relay_block(1, (GInt(1, 1), GInt(1, 1))), (0, 0))
        self.assertIsNone(code.decode((GInt(1, 1), GInt(1, 1))))

    def test_codeword_length(self):
        self.document["codebook"][0] = "000"
        with self.assertRaises(SchemaError):
            load_code(self.document)

    def test_symbol_outside_alphabet(self):
        with self.assertRaises(SchemaError):
            load_code({"N": 1, "n": 1, "codebook": ["4"], "decoder": {}})
        with self.assertRaises(SchemaError):
            load_code({"N": 1, "n": 1, "codebook": ["z"], "decoder": {}})

    def test_missing_field(self):
        del self.document["decoder"]
        with self.assertRaises(SchemaError):
            load_code(self.document)

    def test_per_time_maps_need_every_step(self):
        document = delay_code()
        document["relay_maps"]["1"]["maps"] = document["relay_maps"]["1"]["maps"][:1]
        with self.assertRaises(SchemaError):
            load_code(document)


class TestSimulate(DiamondCase):
    def test_blockwise_code_is_zero_error(self):
        code = load_code(self.document)
        for row in range(code.size):
            outcome = simulate_dsm(code, self.model, row)
            self.assertTrue(outcome.correct(code.messages[row]))
        outcome = simulate_dsm(code, self.model, 7)
        self.assertEqual(outcome.transmissions[1], (12, 15))
        self.assertEqual(outcome.receptions[3], (GInt(6, 0), GInt(7, 7)))

    def test_per_time_code(self):
        code = load_code(delay_code())
        for row in range(code.size):
            outcome = simulate_dsm(code, self.model, row)
            self.assertEqual(outcome.decoded, {3: row})
            self.assertEqual(outcome.transmissions[1][0], 0)
            self.assertEqual(outcome.receptions[3][0], GInt(0, 0))

    def test_blockwise_needs_leveled_network(self):
        layered = derive_dsm(load_topology(self.load_fixture("layered")))
        code = load_code({"N": 1, "n": 1, "codebook": ["0"], "decoder": {}})
        with self.assertRaises(ModeError):
            simulate_dsm(code, layered, 0)


class TestPurge(DiamondCase):
    def test_zero_error_code_is_kept(self):
        code = load_code(self.document)
        purged = purge_zero_error(code, self.model)
        self.assertEqual(purged.size, 16)
        self.assertEqual(error_log(), [])

    def test_four_of_ten_fail(self):
        document = copy.deepcopy(self.document)
        document["codebook"] = document["codebook"][:10]
        document["claimed_error"] = 0.4
        document["decoder"] = {key: (w + 1 if w < 4 else w) for key, w in document["decoder"].items()}
        code = load_code(document)
        report = purge_report(code, self.model)
        self.assertEqual(report["failed"], [0, 1, 2, 3])
        self.assertAlmostEqual(report["empirical_error"], 0.4)
        self.assertFalse(report["mismatch"])
        purged = purge_zero_error(code, self.model)
        self.assertEqual(purged.size, 6)
        self.assertEqual(purged.messages, (4, 5, 6, 7, 8, 9))
        self.assertEqual(purged.claimed_error, 0.0)

    def test_claimed_error_mismatch(self):
        key = next(k for k, w in self.document["decoder"].items() if w == 5)
        self.document["decoder"][key] = 6
        purged = purge_zero_error(load_code(self.document), self.model)
        self.assertEqual(purged.size, 15)
        self.assertNotIn(5, purged.messages)
        self.assertEqual([entry["title"] for entry in error_log()], ["Claimed Error Mismatch"])

    def test_every_codeword_fails(self):
        self.document["decoder"] = {key: (w + 1) % 16 for key, w in self.document["decoder"].items()}
        with self.assertRaises(DecodingError):
            purge_zero_error(load_code(self.document), self.model)

    def test_bit_depth_mismatch(self):
        code = load_code({"N": 1, "n": 3, "codebook": ["00"], "decoder": {}})
        with self.assertRaises(InvariantError):
            purge_zero_error(code, self.model)
