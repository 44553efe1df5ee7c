import tempfile
import unittest
from pathlib import Path

from lcflow.config import GridConfig, RunConfig, VerifyConfig, load_config, parse_config
from lcflow.errors import ConfigError
from lcflow.flow import FlowMode, StopCriterion
from lcflow.initial import InitialKind
from lcflow.spectral import SphereGrid
from lcflow.suite import DEFAULT_CHECKS


class ParseConfigTestCase(unittest.TestCase):
    def test_empty(self):
        config = parse_config("")
        self.assertEqual(RunConfig(), config)
        self.assertEqual(32, config.grid.L)
        self.assertEqual(DEFAULT_CHECKS, config.verify.checks)

    def test_comments_and_blank_lines(self):
        config = parse_config("# comment\n\n   \ngrid.L = 12  \n")
        self.assertEqual(12, config.grid.L)

    def test_round(self):
        config = parse_config("grid.L = 32\ninitial.kind = round\ninitial.c = 1.0")
        self.assertEqual(32, config.grid.L)
        self.assertIs(InitialKind.ROUND, config.initial.kind)
        self.assertEqual(1.0, config.initial.c)

    def test_mobius(self):
        config = parse_config("initial.kind = mobius\ninitial.a = 0, 0, 0.3")
        self.assertIs(InitialKind.MOBIUS, config.initial.kind)
        self.assertEqual((0.0, 0.0, 0.3), config.initial.a)

    def test_perturbations(self):
        config = parse_config(
            "initial.kind = perturbed\ninitial.perturbations = 2,0,0.05; 3,1,0.03"
        )
        self.assertEqual(((2, 0, 0.05), (3, 1, 0.03)), config.initial.perturbations)

    def test_flow(self):
        config = parse_config(
            "\n".join(
                [
                    "flow.mode = normalized",
                    "flow.stop = t_final",
                    "flow.t_final = 0.5",
                    "flow.sigmas = 0, 0.25",
                    "flow.snapshot_every = 0.1",
                ]
            )
        )
        self.assertIs(FlowMode.NORMALIZED, config.flow.mode)
        self.assertIs(StopCriterion.T_FINAL, config.flow.stop)
        self.assertEqual(0.5, config.flow.t_final)
        self.assertEqual((0.0, 0.25), config.flow.sigmas)
        self.assertEqual(0.1, config.flow.snapshot_every)

    def test_none(self):
        config = parse_config("flow.t_final = none\nflow.snapshot_every = null")
        self.assertIsNone(config.flow.t_final)
        self.assertIsNone(config.flow.snapshot_every)

    def test_verify(self):
        config = parse_config(
            "\n".join(
                [
                    "verify.checks = codazzi, gauss",
                    "verify.tolerances.codazzi = 1e-6",
                    "verify.variations = 2,1; 4,-3",
                    "verify.trajectory = false",
                    "verify.suite = tests.examples:SimpleSequential",
                    "verify.max_workers = 2",
                ]
            )
        )
        self.assertEqual(("codazzi", "gauss"), config.verify.checks)
        self.assertEqual(1e-6, config.verify.tolerances.codazzi)
        self.assertEqual(1e-8, config.verify.tolerances.gauss)
        self.assertEqual(((2, 1), (4, -3)), config.verify.variations)
        self.assertFalse(config.verify.trajectory)
        self.assertEqual("tests.examples:SimpleSequential", config.verify.suite)
        self.assertEqual(2, config.verify.max_workers)

    def test_output_and_seed(self):
        config = parse_config("output.directory = runs/a\noutput.csv = no\nseed = 7")
        self.assertEqual(Path("runs/a"), config.output.directory)
        self.assertFalse(config.output.csv)
        self.assertEqual(7, config.seed)


class ConfigErrorsTestCase(unittest.TestCase):
    def assertConfigError(self, text: str, line, key=None, message=None) -> ConfigError:
        with self.assertRaises(ConfigError) as context:
            parse_config(text)
        error = context.exception
        self.assertEqual(line, error.line)
        if key is not None:
            self.assertEqual(key, error.key)
        if message is not None:
            self.assertEqual(message, str(error))
        return error

    def test_bandlimit_too_small(self):
        self.assertConfigError(
            "grid.L = 2", line=1, key="grid.L", message="line 1: grid.L must be ≥ 4"
        )

    def test_missing_equals(self):
        self.assertConfigError("grid.L = 8\ngrid.L 12", line=2)

    def test_invalid_key(self):
        self.assertConfigError("grid..L = 8", line=1)

    def test_unknown_key(self):
        error = self.assertConfigError("grid.L = 8\ngrid.M = 3", line=2, key="grid.M")
        self.assertIn("unknown key", str(error))

    def test_section_assigned(self):
        self.assertConfigError("grid = 8", line=1, key="grid")

    def test_repeated_key(self):
        error = self.assertConfigError("grid.L = 8\n\ngrid.L = 12", line=3, key="grid.L")
        self.assertIn("repeats line 1", str(error))

    def test_bad_value(self):
        self.assertConfigError("grid.L = eight", line=1, key="grid.L")
        self.assertConfigError("initial.kind = cube", line=1, key="initial.kind")

    def test_unknown_check(self):
        error = self.assertConfigError("verify.checks = codazzi, bogus", line=1, key="verify.checks")
        self.assertIn("bogus", str(error))

    def test_bad_suite_reference(self):
        self.assertConfigError("verify.suite = tests.examples", line=1, key="verify.suite")

    def test_file_without_path(self):
        error = self.assertConfigError("grid.L = 8\ninitial.kind = file", line=2, key="initial")
        self.assertIn("initial.path", str(error))

    def test_missing_file(self):
        self.assertConfigError(
            "initial.kind = file\ninitial.path = /nonexistent/omega_000000.f64",
            line=2,
            key="initial.path",
        )

    def test_t_final_required(self):
        error = self.assertConfigError("flow.stop = t_final", line=1, key="flow")
        self.assertIn("t_final", str(error))


class RunConfigTestCase(unittest.TestCase):
    def test_grid(self):
        self.assertEqual(SphereGrid(8, 1.5), GridConfig(L=8, oversample=1.5).build())

    def test_verify_defaults(self):
        config = VerifyConfig()
        self.assertEqual(((2, 0), (3, 1)), config.variations)
        self.assertIsNone(config.suite)
        self.assertTrue(config.trajectory)
        self.assertIsNone(config.max_workers)

    def test_flow_options(self):
        self.assertIsNone(RunConfig().flow_options().seed)
        self.assertEqual(7, RunConfig(seed=7).flow_options().seed)

    def test_with_overrides(self):
        config = RunConfig().with_overrides(out=Path("elsewhere"), seed=3, deterministic=True)
        self.assertEqual(Path("elsewhere"), config.output.directory)
        self.assertEqual(3, config.seed)
        self.assertTrue(config.output.deterministic)
        self.assertTrue(config.output.csv)

    def test_with_no_overrides(self):
        config = RunConfig(seed=5)
        self.assertEqual(config, config.with_overrides())


class LoadConfigTestCase(unittest.TestCase):
    def test(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "run.conf"
            path.write_text("grid.L = 12\nflow.mode = normalized\n", encoding="utf-8")
            config = load_config(path)
        self.assertEqual(12, config.grid.L)
        self.assertIs(FlowMode.NORMALIZED, config.flow.mode)

    def test_missing(self):
        with self.assertRaises(ConfigError):
            load_config("/nonexistent/run.conf")
