import json
import sys
import threading
import unittest
from abc import ABC
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Type
from unittest import mock

from lcflow.context import SuiteContext
from lcflow.errors import SteadyStateFitError
from lcflow.steps import CheckStep
from lcflow.suite import (
    DEFAULT_CHECKS,
    STANDARD_CHECKS,
    ConcurrentSuite,
    SequentialSuite,
    StandardSuite,
    Suite,
    SuiteResult,
    perform_check,
)
from lcflow.utils import load_suite
from . import examples


class SuiteTestCase(unittest.TestCase):
    def setUp(self):
        self.suite = SequentialSuite(
            identifier="foo",
            definition=examples.SimpleSequential,
        )

    def test_is_suite(self):
        self.assertTrue(self.suite.is_suite)

    def test_str(self):
        result = str(self.suite)
        self.assertIsNotNone(result)
        self.assertTrue("foo" in result)
        self.assertTrue("SimpleSequential" in result)

    def test_repr(self):
        result = repr(self.suite)
        self.assertIsNotNone(result)
        self.assertTrue("foo" in result)


class SuiteDefinitionTestCase(unittest.TestCase):
    def setUp(self):
        self.context = examples.round_context()

    @mock.patch.object(examples.SimpleSequential, "define_suite")
    def test_build(self, mock_define_suite):
        result = examples.SimpleSequential.build(identifier="foo")
        self.assertIsNotNone(result)
        self.assertEqual("foo", result.identifier)
        self.assertTrue(mock_define_suite.called)

    def test_build_random_identifier(self):
        first = examples.SimpleSequential.build()
        second = examples.SimpleSequential.build()
        self.assertNotEqual(first.identifier, second.identifier)

    def test_build_execution_mode(self):
        self.assertIsInstance(examples.SimpleSequential.build(), SequentialSuite)
        self.assertIsInstance(examples.SimpleConcurrent.build(), ConcurrentSuite)

    def test_build_arguments(self):
        examples.Arguments.build(
            foo="bar",
            bar=1,
            baz=object(),
            qux=None,
            quux=[1, 2],
        )
        self.assertRaises(TypeError, examples.Arguments.build, foo="bar")
        self.assertRaises(
            ValueError,
            examples.Arguments.build,
            foo="bar",
            bar="baz",
            baz=None,
            qux=None,
            quux=[],
        )

    def test_build_options(self):
        self.assertEqual(0, len(examples.Options.build().steps))
        self.assertEqual(3, len(examples.Options.build(options={"bar": True}).steps))

    def test_build_nested(self):
        suite = examples.Concurrent.build()
        self.assertEqual(3, len(suite.steps))
        self.assertIsInstance(suite.steps[1], ConcurrentSuite)
        self.assertEqual(2, len(suite.steps[1].steps))

    def test_on_started(self):
        examples.SimpleSequential().on_started(
            identifier="foo",
        )

    def test_around_check(self):
        called = False
        with examples.SimpleSequential().around_check(
            identifier="foo",
            step="bar",
            description="baz",
            context=self.context,
        ):
            called = True

        self.assertTrue(called)

    def test_on_completed(self):
        examples.SimpleSequential().on_completed(
            identifier="foo",
        )

    def test_on_failed(self):
        examples.SimpleSequential().on_failed(
            identifier="foo",
            step="bar",
            e=NotImplementedError(),
        )

    def test_on_cancelled(self):
        examples.SimpleSequential().on_cancelled(
            identifier="foo",
        )


class PerformCheckTestCase(unittest.TestCase):
    def setUp(self):
        self.context = examples.round_context()
        self.methods = examples.Methods()
        self.definition = mock.MagicMock()
        self.cancelled = threading.Event()

    def _perform(self, func, **kwargs):
        step = CheckStep(func=func, description=None, kwargs=kwargs)
        return perform_check(self.definition, "foo", step, self.context, self.cancelled)

    def test_without_context(self):
        result = self._perform(self.methods.with_value, value=2)
        self.assertEqual("value_2", result.name)
        self.assertTrue(self.definition.around_check.called)

    def test_with_context(self):
        result = self._perform(self.methods.foo_ctx)
        self.assertEqual("foo_ctx", result.name)
        self.assertAlmostEqual(0.0, result.max_residual)

    def test_domain_error(self):
        result = self._perform(self.methods.domain_error)
        self.assertFalse(result.passed)
        self.assertEqual("domain_error", result.name)
        self.assertEqual("SteadyStateFitError", result.details["error_type"])
        self.assertTrue(self.definition.on_failed.called)
        _, _, error = self.definition.on_failed.call_args[0]
        self.assertIsInstance(error, SteadyStateFitError)
        self.assertFalse(self.cancelled.is_set())

    def test_cancel(self):
        result = self._perform(self.methods.cancel)
        self.assertIsNone(result)
        self.assertTrue(self.cancelled.is_set())
        self.assertTrue(self.definition.on_cancelled.called)

    def test_unhandled(self):
        self.assertRaises(RuntimeError, self._perform, self.methods.unhandled)
        self.assertTrue(self.definition.on_failed.called)


class SuiteExecutionTestCaseBase(ABC, unittest.TestCase):
    suite_type: Type[Suite]

    @classmethod
    def setUpClass(cls):
        if cls is SuiteExecutionTestCaseBase:
            raise unittest.SkipTest("Abstract test case; skipping.")
        super().setUpClass()

    def setUp(self):
        # sanity check
        self.assertIsNotNone(self.suite_type)

        self.suite = self.suite_type(
            identifier="foo",
            definition=examples.SimpleSequential,
        )
        self.context = examples.round_context()
        self.methods = examples.Methods()

    def _step(self, func, **kwargs):
        return CheckStep(func=func, description=None, kwargs=kwargs)

    def test_execute_no_steps(self):
        self.assertEqual([], self.suite.execute(self.context, threading.Event()))

    def test_execute_keeps_order(self):
        nested = SequentialSuite(identifier="foo", definition=examples.SimpleSequential)
        nested.steps.append(self._step(self.methods.bar))
        self.suite.steps.extend(
            [
                self._step(self.methods.with_value, value=1),
                nested,
                self._step(self.methods.with_value, value=2),
                self._step(self.methods.foo_ctx),
            ]
        )
        reports = self.suite.execute(self.context, threading.Event())
        self.assertEqual(
            ["value_1", "bar", "value_2", "foo_ctx"], [report.name for report in reports]
        )

    def test_execute_cancelled(self):
        self.suite.steps.append(self._step(self.methods.foo))
        cancelled = threading.Event()
        cancelled.set()
        self.assertEqual([], self.suite.execute(self.context, cancelled))

    @mock.patch.object(examples.SimpleSequential, "on_failed")
    def test_execute_unhandled(self, mock_on_failed):
        self.suite.steps.extend(
            [self._step(self.methods.foo), self._step(self.methods.unhandled)]
        )
        self.assertRaises(RuntimeError, self.suite.execute, self.context, threading.Event())
        self.assertTrue(mock_on_failed.called)


class SequentialSuiteTestCase(SuiteExecutionTestCaseBase):
    suite_type = SequentialSuite


class ConcurrentSuiteTestCase(SuiteExecutionTestCaseBase):
    suite_type = ConcurrentSuite

    def test_max_workers(self):
        self.suite.steps.extend([self._step(self.methods.foo), self._step(self.methods.bar)])
        context = SuiteContext(omega=self.context.omega, max_workers=1)
        with mock.patch("lcflow.suite.ThreadPoolExecutor", wraps=ThreadPoolExecutor) as executor:
            reports = self.suite.execute(context, threading.Event())
        executor.assert_called_once_with(max_workers=1)
        self.assertEqual(["foo", "bar"], [report.name for report in reports])


class RunTestCase(unittest.TestCase):
    def setUp(self):
        self.context = examples.round_context()

    def test_simple(self):
        for definition in (examples.SimpleSequential, examples.SimpleConcurrent):
            result = definition.run(self.context, identifier="foo")
            self.assertIsInstance(result, SuiteResult)
            self.assertEqual("foo", result.identifier)
            self.assertEqual(definition.__name__, result.suite)
            self.assertEqual(["foo", "foo_ctx", "foo_check"], [r.name for r in result.reports])
            self.assertTrue(result.passed)
            self.assertFalse(result.cancelled)

    def test_nested(self):
        for definition in (examples.Sequential, examples.Concurrent):
            result = definition.run(self.context)
            self.assertEqual(["foo", "bar", "baz", "qux"], [r.name for r in result.reports])

    def test_each(self):
        result = examples.Each.run(self.context, count=3)
        self.assertEqual(["value_0", "value_1", "value_2"], [r.name for r in result.reports])

    def test_each_empty(self):
        result = examples.Each.run(self.context, count=0)
        self.assertEqual([], result.reports)
        self.assertTrue(result.passed)

    def test_each_with_description(self):
        suite = examples.EachWithDescription.build(count=2)
        self.assertEqual(["Item 0", "Item 1"], [step.description for step in suite.steps])

    def test_transform(self):
        result = examples.Transform.run(self.context, value=4)
        self.assertEqual(["value_8"], [r.name for r in result.reports])

    def test_sub_suite(self):
        result = examples.SubSuite.run(self.context)
        self.assertEqual(
            ["bar", "foo", "foo_ctx", "foo_check", "baz"], [r.name for r in result.reports]
        )

    @mock.patch.object(examples.DomainFailure, "on_completed")
    @mock.patch.object(examples.DomainFailure, "on_failed")
    def test_domain_failure(self, mock_on_failed, mock_on_completed):
        result = examples.DomainFailure.run(self.context)
        self.assertEqual(
            ["foo", "domain_error", "failing", "bar"], [r.name for r in result.reports]
        )
        self.assertEqual([True, False, False, True], [r.passed for r in result.reports])
        self.assertFalse(result.passed)
        self.assertFalse(result.cancelled)
        self.assertEqual(1, mock_on_failed.call_count)
        self.assertTrue(mock_on_completed.called)

    @mock.patch.object(examples.Cancelling, "on_completed")
    @mock.patch.object(examples.Cancelling, "on_cancelled")
    def test_cancelling(self, mock_on_cancelled, mock_on_completed):
        result = examples.Cancelling.run(self.context)
        self.assertEqual(["foo"], [r.name for r in result.reports])
        self.assertTrue(result.cancelled)
        self.assertFalse(result.passed)
        self.assertTrue(mock_on_cancelled.called)
        self.assertFalse(mock_on_completed.called)

    def test_cancelling_concurrent(self):
        result = examples.CancellingConcurrent.run(self.context)
        self.assertTrue(result.cancelled)
        self.assertFalse(result.passed)
        self.assertNotIn("cancel", [r.name for r in result.reports])

    def test_unhandled(self):
        for definition in (examples.Unhandled, examples.UnhandledConcurrent):
            self.assertRaises(RuntimeError, definition.run, self.context)

    def test_result_serialization(self):
        result = examples.DomainFailure.run(self.context, identifier="foo")
        data = json.loads(result.model_dump_json(by_alias=True))
        self.assertFalse(data["passed"])
        self.assertIn("pass", data["reports"][0])
        self.assertEqual(float("inf"), data["reports"][1]["max_residual"])


class StandardSuiteTestCase(unittest.TestCase):
    def test_checks(self):
        self.assertNotIn("steady_fit", DEFAULT_CHECKS)
        self.assertEqual(set(STANDARD_CHECKS), {*DEFAULT_CHECKS, "steady_fit"})

    def test_build_default(self):
        suite = StandardSuite.build()
        self.assertIsInstance(suite, ConcurrentSuite)
        names = [step.name for step in suite.steps]
        self.assertEqual(
            [
                "codazzi",
                "simons",
                "gradient_inequality",
                "variation",
                "variation",
                "extrinsic_oracle",
                "gauss",
            ],
            names,
        )
        self.assertEqual({"degree": 2, "order": 0}, suite.steps[3].kwargs)
        self.assertEqual("First variations along Y_3,1", suite.steps[4].description)

    def test_build_selection(self):
        suite = StandardSuite.build(
            options={"checks": ("gauss", "variation"), "variations": ((4, -2),)}
        )
        self.assertEqual(["variation", "gauss"], [step.name for step in suite.steps])
        self.assertEqual({"degree": 4, "order": -2}, suite.steps[0].kwargs)

    def test_run_round(self):
        result = StandardSuite.run(examples.round_context(2.0), options={"checks": STANDARD_CHECKS})
        self.assertEqual(
            [
                "codazzi",
                "simons",
                "gradient_inequality",
                "variation_2_0",
                "variation_3_1",
                "extrinsic_oracle",
                "gauss",
                "steady_fit",
            ],
            [report.name for report in result.reports],
        )
        for report in result.reports:
            self.assertTrue(report.passed, report)
        self.assertTrue(result.passed)

    def test_run_perturbed(self):
        context = SuiteContext(omega=examples.perturbed_factor())
        result = StandardSuite.run(context, options={"checks": STANDARD_CHECKS})
        outcomes = {report.name: report.passed for report in result.reports}
        self.assertFalse(outcomes.pop("steady_fit"))
        for name, passed in outcomes.items():
            self.assertTrue(passed, name)


class DocumentedSuiteTestCase(unittest.TestCase):
    def setUp(self):
        directory = str(Path(__file__).parents[1] / "docs" / "source" / "examples")
        with mock.patch.object(sys, "path", [directory, *sys.path]):
            self.definition = load_suite("variation_suite", "VariationSuite")

    def tearDown(self):
        sys.modules.pop("variation_suite", None)

    def test_build(self):
        steps = self.definition.build(eps=2e-3).steps
        self.assertEqual(
            ["Y_2,0", "halved step", "Y_3,1", "halved step"],
            [step.description for step in steps],
        )
        self.assertEqual([2e-3, 1e-3, 2e-3, 1e-3], [step.kwargs["eps"] for step in steps])
        self.assertEqual({"degree": 3, "order": 1, "eps": 1e-3}, steps[3].kwargs)

    def test_default_step(self):
        steps = self.definition.build().steps
        self.assertEqual([1e-3, 5e-4], [step.kwargs["eps"] for step in steps[:2]])

    def test_wrong_step_type(self):
        self.assertRaises(ValueError, self.definition.build, eps="small")

    def test_run(self):
        result = self.definition.run(examples.round_context(2.0))
        self.assertEqual(
            ["variation_2_0", "variation_2_0", "variation_3_1", "variation_3_1"],
            [report.name for report in result.reports],
        )
