# Copyright (c) 2025, superposition_networks contributors
# See license.txt

import json
import os
import unittest
from pathlib import Path

import numpy as np

from superposition_networks import clear_error_log, hooks

PACKAGE_DIR = Path(__file__).resolve().parent.parent

slow = unittest.skipUnless(os.environ.get("SUPERPOSITION_SLOW_TESTS"), "full-scale run; set SUPERPOSITION_SLOW_TESTS=1")


def fixture_path(name):
    return PACKAGE_DIR / hooks.fixtures[name]


def load_fixture(name):
    with open(fixture_path(name)) as handle:
        return json.load(handle)


class SuperpositionTestCase(unittest.TestCase):
    """Base test case: clears the error log and hands out seeded generators."""

    seed = 1234

    def setUp(self):
        super().setUp()
        clear_error_log()

    def rng(self, offset=0):
        return np.random.default_rng(self.seed + offset)

    def load_fixture(self, name):
        return load_fixture(name)
