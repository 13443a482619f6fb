import json
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from dfrelay.errors import DimensionError
from dfrelay.model import Allocation, RelayOrder
from dfrelay_sim.channel import DEFAULT_RELAY_POSITIONS
from dfrelay_sim.config import (
    WORKERS_ENV,
    ConfigError,
    allocation_frame,
    allocation_to_dict,
    load_config,
    parse_config,
    read_gains,
    write_gains,
)

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
CLI_DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "dfrelay_cli", "data")


class TestParseConfig(unittest.TestCase):
    def test_defaults(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            run_config = parse_config({})
        self.assertEqual(run_config.scenario.relay_pos, DEFAULT_RELAY_POSITIONS)
        self.assertEqual(run_config.scenario.K, 256)
        self.assertEqual(run_config.solver.epsilon, 0.1)
        self.assertEqual(run_config.experiment.workers, 1)
        self.assertIsNone(run_config.system)

    def test_small_config_file(self):
        run_config = load_config(os.path.join(DATA_DIR, "small_config.json"))
        self.assertEqual(run_config.scenario.N, 2)
        self.assertEqual(run_config.scenario.relay_pos[1], (2.0, -7.0))
        self.assertEqual(run_config.solver.max_iterations, 300)
        self.assertEqual(run_config.experiment.solvers, ("heuristic", "dual"))

    def test_seed_override(self):
        run_config = load_config(os.path.join(DATA_DIR, "small_config.json"), seed=42)
        self.assertEqual(run_config.scenario.seed, 42)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            load_config(os.path.join(DATA_DIR, "unknown_key.json"))

    def test_unknown_section(self):
        with self.assertRaises(ConfigError):
            parse_config({"plots": {}})

    def test_bad_values(self):
        with self.assertRaises(ConfigError):
            parse_config({"solver": {"max_iterations": "many"}})
        with self.assertRaises(ConfigError):
            load_config(os.path.join(CLI_DATA_DIR, "malformed_config.json"))
        with self.assertRaises(ConfigError):
            parse_config({"experiment": []})
        with self.assertRaises(ConfigError):
            parse_config({"experiment": 0})

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write("{ not json")
            with self.assertRaises(ConfigError):
                load_config(path)

    def test_workers_from_environment(self):
        with mock.patch.dict(os.environ, {WORKERS_ENV: "3"}):
            self.assertEqual(parse_config({}).experiment.workers, 3)
            explicit = parse_config({"experiment": {"workers": 2}})
            self.assertEqual(explicit.experiment.workers, 2)
        with mock.patch.dict(os.environ, {WORKERS_ENV: "three"}):
            with self.assertRaises(ConfigError):
                parse_config({})

    def test_system_section(self):
        data = {
            "scenario": {"relay_pos": [[-2.0, -7.0]], "K": 8},
            "system": {"K": 8, "N": 1, "source_power": 10.0, "relay_powers": [5.0]},
        }
        system = parse_config(data).system
        self.assertEqual(system.relay_powers, (5.0,))
        data["system"]["K"] = 16
        with self.assertRaises(DimensionError):
            parse_config(data)


class TestGainsFiles(unittest.TestCase):
    def test_read_fixture(self):
        gains = read_gains(os.path.join(CLI_DATA_DIR, "gains.json"))
        self.assertEqual((gains.K, gains.N), (4, 2))
        self.assertEqual(gains.g_sr[1, 2], 12.0)

    def test_mismatched_shapes(self):
        with self.assertRaises(DimensionError):
            read_gains(os.path.join(CLI_DATA_DIR, "mismatched_gains.json"))

    def test_missing_key(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "gains.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"g_sd": [1.0], "g_sr": [[1.0]]}, f)
            with self.assertRaises(ConfigError):
                read_gains(path)

    def test_write_then_read(self):
        gains = read_gains(os.path.join(CLI_DATA_DIR, "gains.json"))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "nested", "gains.json")
            write_gains(gains, path)
            again = read_gains(path)
        np.testing.assert_array_equal(again.g_rd, gains.g_rd)


class TestAllocationDumps(unittest.TestCase):
    def setUp(self):
        self.gains = read_gains(os.path.join(CLI_DATA_DIR, "gains.json"))
        self.order = RelayOrder.from_gains(self.gains)
        self.alloc = Allocation(
            [0, 1, 1, 0],
            [1, 0, 1, 1],
            [0.25, 0.25, 0.25, 0.25],
            [[0.0, 0.5, 0.0, 0.0], [0.0, 0.5, 0.5, 0.0]],
        )

    def test_dict(self):
        record = allocation_to_dict(self.alloc, self.gains, self.order, "heuristic", True)
        self.assertEqual(
            list(record),
            [
                "solver",
                "K",
                "N",
                "mode",
                "cut",
                "p_s",
                "p_r",
                "rates",
                "sum_rate",
                "feasible",
                "slack",
                "converged",
            ],
        )
        self.assertTrue(record["feasible"])
        self.assertEqual(len(record["slack"]), 3)
        self.assertAlmostEqual(record["sum_rate"], sum(record["rates"]), places=12)
        json.dumps(record)

    def test_frame(self):
        frame = allocation_frame(self.alloc, self.gains, self.order)
        self.assertEqual(
            list(frame.columns),
            ["k", "mode", "cut", "assisting", "p_s", "p_r_0", "p_r_1", "rate_bpts"],
        )
        self.assertEqual(frame["assisting"].iloc[0], "")
        # subcarrier 1 relays through both, subcarrier 2 only through the stronger one
        self.assertEqual(sorted(frame["assisting"].iloc[1].split()), ["0", "1"])
        self.assertEqual(frame["assisting"].iloc[2], "1")
