# Copyright (c) 2025, superposition_networks contributors
# See license.txt

import json
import tempfile
from pathlib import Path

from superposition_networks import hooks
from superposition_networks.exceptions import SchemaError, ValidationError
from superposition_networks.experiment_config import ExperimentConfig, load_schema, resolve_fixture
from superposition_networks.tests.utils import SuperpositionTestCase


class TestExperimentConfig(SuperpositionTestCase):
    def test_defaults_come_from_schema(self):
        config = ExperimentConfig.from_sources("gap")
        self.assertEqual(config.h_exponents, [2, 3, 4, 5])
        self.assertEqual(config.snr_grid, [4.0, 16.0, 64.0])
        self.assertEqual(config.m, 8)
        self.assertAlmostEqual(config.epsilon, 0.07)
        self.assertIsNone(config.prune_exponent)
        self.assertIs(config.noiseless, False)
        self.assertIsNone(config.seed)

    def test_every_field_has_a_label(self):
        schema = load_schema()
        names = [field["fieldname"] for field in schema["fields"]]
        self.assertEqual(names, schema["field_order"])
        for field in schema["fields"]:
            self.assertTrue(field.get("label"))

    def test_seed_is_mandatory_for_stochastic_commands(self):
        for subcommand in hooks.stochastic_commands:
            with self.assertRaises(ValidationError):
                ExperimentConfig.from_sources(subcommand)
        config = ExperimentConfig.from_sources("lift", overrides={"seed": 3})
        self.assertEqual(config.seed, 3)

    def test_verify_uses_pinned_seed(self):
        self.assertEqual(ExperimentConfig.from_sources("verify").seed, hooks.verify_seed)

    def test_file_then_flags(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "config.json"
            path.write_text(json.dumps({"m": 4, "h_exponents": [2, 3], "seed": 9}))
            config = ExperimentConfig.from_sources("lift", path, {"m": "6", "epsilon": None})
        self.assertEqual(config.m, 6)
        self.assertEqual(config.h_exponents, [2, 3])
        self.assertEqual(config.seed, 9)
        self.assertAlmostEqual(config.epsilon, 0.07)

    def test_rejections(self):
        with self.assertRaises(SchemaError):
            ExperimentConfig.from_sources("gap", overrides={"colour": "red"})
        with self.assertRaises(SchemaError):
            ExperimentConfig.from_sources("gap", overrides={"m": "eight"})
        with self.assertRaises(ValidationError):
            ExperimentConfig.from_sources("gap", overrides={"h_exponents": ""})
        with self.assertRaises(ValidationError):
            ExperimentConfig.from_sources("gap", overrides={"h_exponents": " , "})
        with self.assertRaises(ValidationError):
            ExperimentConfig.from_sources("gap", overrides={"resolution": "fine"})
        with self.assertRaises(ValidationError):
            ExperimentConfig.from_sources("lift", overrides={"seed": 1, "epsilon": 0})
        with self.assertRaises(ValidationError):
            ExperimentConfig.from_sources("plot")

    def test_as_dict(self):
        data = ExperimentConfig.from_sources("genie", overrides={"seed": 5}).as_dict()
        self.assertEqual(data["subcommand"], "genie")
        self.assertEqual(data["seed"], 5)
        self.assertEqual(list(data)[1:], sorted(k for k in data if k != "subcommand"))

    def test_fixture_names(self):
        self.assertTrue(resolve_fixture("phase_pair").is_file())
        with self.assertRaises(ValidationError):
            resolve_fixture("no/such/network.json")

    def test_fixture_aliases(self):
        self.assertEqual(resolve_fixture("fig2.json"), resolve_fixture("phase_pair"))
        self.assertEqual(resolve_fixture("fig1"), resolve_fixture("layered"))
        self.assertEqual(resolve_fixture("diamond.json"), resolve_fixture("diamond"))
        with self.assertRaises(ValidationError):
            resolve_fixture("fig3.json")
