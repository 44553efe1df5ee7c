import unittest
from types import SimpleNamespace
from typing import List, Optional
from unittest import mock

import numpy as np

from lcflow.builder import SuiteBuilder
from lcflow.decorators import check
from lcflow.steps import CheckStep
from lcflow.suite import ConcurrentSuite, SequentialSuite
from lcflow.verification import check_codazzi, check_gauss, check_simons, check_variation
from . import examples


@check(description="Simons identity")
def simons(omega):
    return check_simons(omega)


class BuilderTestCase(unittest.TestCase):
    def setUp(self):
        self.phi = np.zeros((9, 17))
        self.kwargs = {"eps": 1e-3, "degree": 2, "label": "Y_20", "phi": self.phi}
        self.options = SimpleNamespace(extrinsic=True, refine=False, checks="gauss")
        self.builder = SuiteBuilder(
            suite=mock.MagicMock(),
            kwargs=self.kwargs,
            options=self.options,
            description="identities",
        )

    def appended(self):
        self.assertTrue(self.builder.suite.steps.append.called)
        return self.builder.suite.steps.append.call_args[0][0]

    def test_expected_arguments(self):
        self.builder.expected_arguments(eps=float, degree=int, label=str, phi=np.ndarray)
        self.builder.expected_arguments(eps=None, phi=None)
        self.builder.expected_arguments(eps=Optional[float])

    def test_expected_arguments_missing(self):
        with self.assertRaisesRegex(TypeError, "tol"):
            self.builder.expected_arguments(tol=float)

    def test_expected_arguments_wrong_type(self):
        with self.assertRaises(ValueError):
            self.builder.expected_arguments(label=int)
        with self.assertRaises(ValueError):
            self.builder.expected_arguments(label=List[int])

    def test_concurrent(self):
        with self.builder.concurrent() as block:
            self.assertIsInstance(block.suite, ConcurrentSuite)
            self.assertIs(self.options, block.options)
            self.assertEqual(self.kwargs, block.kwargs)
            self.assertEqual("identities", block.description)
            block.check(check_codazzi)
            block.check(check_simons)

        suite = self.appended()
        self.assertIsInstance(suite, ConcurrentSuite)
        self.assertEqual(["check_codazzi", "check_simons"], [step.name for step in suite.steps])

    def test_sequential(self):
        with self.builder.sequential("intrinsic") as block:
            self.assertIsInstance(block.suite, SequentialSuite)
            self.assertEqual("intrinsic", block.description)
            block.check(check_gauss)

        suite = self.appended()
        self.assertIsInstance(suite, SequentialSuite)
        self.assertEqual("intrinsic", suite.steps[0].description)

    def test_check(self):
        self.builder.check(check_gauss)
        step = self.appended()
        self.assertIsInstance(step, CheckStep)
        self.assertEqual("identities", step.description)
        self.assertEqual(self.kwargs, step.kwargs)

    def test_check_description(self):
        self.builder.check(simons)
        self.assertEqual("Simons identity", self.appended().description)

        self.builder.check(simons, description="Simons, refined")
        self.assertEqual("Simons, refined", self.appended().description)

    def test_check_kwargs(self):
        self.builder.check(check_variation, eps=5e-4, degree=3)
        step = self.appended()
        self.assertEqual(5e-4, step.kwargs["eps"])
        self.assertEqual(3, step.kwargs["degree"])
        self.assertIs(self.phi, step.kwargs["phi"])
        self.assertEqual(1e-3, self.kwargs["eps"])

    def test_sub_suite(self):
        self.builder.sub_suite(examples.SimpleConcurrent, description="embedded")
        suite = self.appended()
        self.assertIsInstance(suite, ConcurrentSuite)
        self.assertEqual(3, len(suite.steps))
        self.assertEqual("embedded", suite.steps[0].description)

    def test_each(self):
        received = []

        def degrees(**kwargs):
            received.append(kwargs["label"])
            for degree in (2, 3):
                yield {"degree": degree}
            yield {"degree": 4}, "Y_40"

        blocks = list(self.builder.each(degrees))
        self.assertEqual(["Y_20"], received)
        self.assertEqual([2, 3, 4], [block.kwargs["degree"] for block in blocks])
        self.assertEqual(
            ["identities", "identities", "Y_40"], [block.description for block in blocks]
        )
        self.assertTrue(all(block.suite is self.builder.suite for block in blocks))

    def test_transform(self):
        def halve(eps, **_):
            return {"eps": eps / 2}

        with self.builder.transform(halve) as block:
            self.assertEqual({"eps": 5e-4}, block.kwargs)
            self.assertEqual("identities", block.description)

        with self.builder.transform(lambda **_: ({}, "no arguments")) as block:
            self.assertEqual({}, block.kwargs)
            self.assertEqual("no arguments", block.description)

    def test_option(self):
        self.assertTrue(self.builder.option("extrinsic"))
        self.assertFalse(self.builder.option("refine"))
        self.assertEqual("gauss", self.builder.option("checks"))
        self.assertEqual(8, self.builder.option("L", 8))
        self.assertIsNone(self.builder.option("L"))

    # pylint: disable=protected-access
    def test_convert_options(self):
        self.assertIs(self.options, SuiteBuilder._convert_options(self.options))
        self.assertEqual(
            SimpleNamespace(refine=True), SuiteBuilder._convert_options({"refine": True})
        )
        self.assertEqual(SimpleNamespace(), SuiteBuilder._convert_options())
        self.assertEqual(SimpleNamespace(), SuiteBuilder._convert_options(1))  # type: ignore
