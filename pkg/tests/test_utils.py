import unittest

import lcflow
from lcflow.suite import StandardSuite
from lcflow.utils import load_suite, to_dict, to_kwargs
from .examples import SimpleSequential


class UtilsTestCase(unittest.TestCase):
    def test_version(self):
        self.assertNotEqual("0.0.0.dev", lcflow.__version__)

    def test_to_dict(self):
        result = to_dict(foo=1)
        self.assertIsNotNone(result)
        self.assertIsInstance(result, dict)
        self.assertEqual(1, result["foo"])

    def test_to_kwargs(self):
        base = to_dict(foo=1)
        result = to_kwargs(base, bar=2)
        self.assertIsNotNone(result)
        self.assertIsInstance(result, dict)
        self.assertEqual(1, result["foo"])
        self.assertEqual(2, result["bar"])
        self.assertNotIn("bar", base)

    def test_to_kwargs_precedence(self):
        result = to_kwargs(to_dict(foo=1), foo=2)
        self.assertEqual(2, result["foo"])

    def test_load_suite(self):
        result = load_suite(
            module_name=SimpleSequential.__module__,
            definition_class=SimpleSequential.__qualname__,
        )
        self.assertIs(SimpleSequential, result)

    def test_load_standard_suite(self):
        self.assertIs(StandardSuite, load_suite("lcflow.suite", "StandardSuite"))

    def test_load_suite_not_a_definition(self):
        self.assertRaises(TypeError, load_suite, "lcflow.suite", "SuiteResult")
        self.assertRaises(TypeError, load_suite, "lcflow.suite", "STANDARD_CHECKS")

    def test_load_suite_missing(self):
        self.assertRaises(AttributeError, load_suite, "lcflow.suite", "Missing")
        self.assertRaises(ImportError, load_suite, "lcflow.missing", "Missing")
