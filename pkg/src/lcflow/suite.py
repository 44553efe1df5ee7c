"""
Suite module.

Verification suites group residual checks of a single conformal factor. A
:class:`SuiteDefinition` declares its checks with a :class:`SuiteBuilder`;
:meth:`SuiteDefinition.run` builds the suite and executes it against a
:class:`SuiteContext`.
"""

import enum
import inspect
import logging
import math
import threading
import uuid
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor, wait
from contextlib import contextmanager
from typing import Generator, List, Optional, Type, cast

from pydantic import BaseModel, ConfigDict, computed_field

from .builder import SuiteBuilder
from .context import SuiteContext
from .decorators import check
from .errors import CancelSuiteError, LightconeFlowError
from .steps import CheckStep, Steps
from .types import Description, Options
from .verification import (
    ResidualReport,
    check_codazzi,
    check_extrinsic_oracle,
    check_gauss,
    check_gradient_inequality,
    check_simons,
    check_steady_fit,
    check_variation,
)

logger = logging.getLogger(__name__)


class SuiteResult(BaseModel):
    """
    Reports of one suite execution, in declaration order.

    :ivar identifier: Identifier of the execution.
    :type identifier: str
    :ivar suite: Name of the suite definition.
    :type suite: str
    :ivar reports: One report per executed check.
    :type reports: List[ResidualReport]
    :ivar cancelled: Whether a check cancelled the suite.
    :type cancelled: bool
    """

    model_config = ConfigDict(ser_json_inf_nan="constants")

    identifier: str
    suite: str
    reports: List[ResidualReport]
    cancelled: bool = False

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        """Every check passed and the suite ran to completion."""
        return not self.cancelled and all(report.passed for report in self.reports)


def _failed_report(step: CheckStep, context: SuiteContext, error: Exception) -> ResidualReport:
    return ResidualReport(
        name=step.name,
        max_residual=math.inf,
        L=context.grid.L,
        tolerance=0.0,
        passed=False,
        details={"error": str(error), "error_type": type(error).__name__},
    )


def perform_check(
    definition: "SuiteDefinition",
    identifier: str,
    step: CheckStep,
    context: SuiteContext,
    cancelled: threading.Event,
) -> Optional[ResidualReport]:
    """
    Execute one check with the suite error policy.

    - Domain errors (:class:`LightconeFlowError`) produce a failed report and
      call ``on_failed``; the suite continues.
    - :class:`CancelSuiteError` sets ``cancelled`` and calls ``on_cancelled``;
      no report is produced.
    - Any other exception calls ``on_failed`` and is re-raised.

    The call is wrapped in the definition's ``around_check`` context manager.

    :param definition: The definition whose hooks are called.
    :type definition: SuiteDefinition
    :param identifier: Identifier of the suite execution.
    :type identifier: str
    :param step: The check to execute.
    :type step: CheckStep
    :param context: The suite context.
    :type context: SuiteContext
    :param cancelled: Cancellation flag shared by the whole execution.
    :type cancelled: threading.Event
    :return: The check report, or ``None`` when the suite was cancelled.
    :rtype: Optional[ResidualReport]
    """
    signature = inspect.signature(step.func)
    has_context = "context" in signature.parameters

    try:
        with definition.around_check(
            identifier=identifier,
            step=step.name,
            description=step.description,
            context=context,
        ):
            if has_context:
                return step.func(context=context, **step.kwargs)
            return step.func(**step.kwargs)

    except CancelSuiteError:
        logger.error(
            "Failed to execute check '%s', the suite was cancelled.",
            step.name,
            exc_info=True,
            stack_info=True,
        )
        cancelled.set()
        definition.on_cancelled(identifier)
        return None

    except LightconeFlowError as e:
        logger.error(
            "Check '%s' raised a domain error and is marked failed.",
            step.name,
            exc_info=True,
            stack_info=True,
        )
        definition.on_failed(identifier, step.name, e)
        return _failed_report(step, context, e)

    except Exception as e:
        logger.error(
            "Failed to execute check '%s' due to an unhandled error.",
            step.name,
            exc_info=True,
            stack_info=True,
        )
        definition.on_failed(identifier, step.name, e)
        raise


class Suite(ABC):
    """
    An executable collection of checks and nested suites.

    :param identifier: Identifier of the suite execution
    :type identifier: str
    :param definition: The definition class the suite was built from
    :type definition: Type[SuiteDefinition]

    :ivar steps: Checks and nested suites in declaration order
    :type steps: Steps
    """

    def __init__(self, identifier: str, definition: Type["SuiteDefinition"]):
        self.identifier = identifier
        self.definition: Type[SuiteDefinition] = definition
        self.steps = Steps()

    @property
    def is_suite(self) -> bool:
        """Always ``True``."""
        return True

    @abstractmethod
    def execute(
        self, context: SuiteContext, cancelled: threading.Event
    ) -> List[ResidualReport]:  # pragma: no cover
        """
        Run the steps of this suite.

        :param context: The suite context.
        :type context: SuiteContext
        :param cancelled: Cancellation flag; once set no further check starts.
        :type cancelled: threading.Event
        :return: Reports of the executed checks, in declaration order.
        :rtype: List[ResidualReport]
        """

    def _perform(
        self,
        hooks: "SuiteDefinition",
        step: "CheckStep | Suite",
        context: SuiteContext,
        cancelled: threading.Event,
    ) -> List[ResidualReport]:
        if cancelled.is_set():
            return []
        if step.is_suite:
            return cast(Suite, step).execute(context, cancelled)
        report = perform_check(hooks, self.identifier, cast(CheckStep, step), context, cancelled)
        return [] if report is None else [report]

    def __str__(self):
        return (
            f"{self.__class__.__name__}("
            f"id={self.identifier},"
            f"definition={self.definition.__name__},"
            f"steps={len(self.steps)},"
            ")"
        )

    def __repr__(self):
        return str(self)


class SequentialSuite(Suite):
    """A suite whose steps run one after another in declaration order."""

    def execute(self, context: SuiteContext, cancelled: threading.Event) -> List[ResidualReport]:
        hooks = self.definition()
        reports: List[ResidualReport] = []
        for step in self.steps:
            reports.extend(self._perform(hooks, step, context, cancelled))
        return reports


class ConcurrentSuite(Suite):
    """
    A suite whose steps run on a thread pool.

    Reports keep declaration order. When several steps raise, the error of the
    first one in declaration order is re-raised after all steps finished.
    The pool size is taken from :attr:`SuiteContext.max_workers`.
    """

    def execute(self, context: SuiteContext, cancelled: threading.Event) -> List[ResidualReport]:
        hooks = self.definition()
        with ThreadPoolExecutor(max_workers=context.max_workers) as executor:
            futures = [
                executor.submit(self._perform, hooks, step, context, cancelled)
                for step in self.steps
            ]
            wait(futures)

        reports: List[ResidualReport] = []
        for future in futures:
            if future.exception() is None:
                reports.extend(future.result())
        for future in futures:
            error = future.exception()
            if error is not None:
                raise error
        return reports


class ExecutionMode(enum.Enum):
    """
    How the top-level checks of a suite definition are executed.
    """

    SEQUENTIAL = SequentialSuite
    """One check at a time, in declaration order. The default."""

    CONCURRENT = ConcurrentSuite
    """Checks run on a thread pool; reports keep declaration order."""


class SuiteDefinition(ABC):
    """
    Base class of verification suite definitions.

    Subclasses implement :meth:`define_suite` and may override the lifecycle
    hooks, which log by default.

    :ivar description: Optional description of the suite.
    :type description: Optional[Description]
    :ivar execution_mode: Execution mode of the top-level checks.
    :type execution_mode: ExecutionMode

    Example::

        class GaussOnly(SuiteDefinition):
            def define_suite(self, builder: SuiteBuilder):
                builder.check(self.gauss)

            @check(description="Gauss equation")
            def gauss(self, context):
                return check_gauss(context.omega)

        result = GaussOnly.run(SuiteContext(omega))
    """

    description: Description = None
    """Optional description of the suite."""

    execution_mode: ExecutionMode = ExecutionMode.SEQUENTIAL
    """Execution mode of the top-level checks."""

    @abstractmethod
    def define_suite(self, builder: SuiteBuilder):  # pragma: no cover
        """
        Declare the checks of the suite.

        :param builder: The builder to declare checks with.
        :type builder: SuiteBuilder
        """

    @classmethod
    def build(
        cls,
        identifier: Optional[str] = None,
        options: Optional[Options] = None,
        **kwargs,
    ) -> Suite:
        """
        Build the suite declared by this definition.

        :param identifier: Execution identifier; a random hex string by default.
        :type identifier: Optional[str]
        :param options: Options consulted by :meth:`define_suite`.
        :type options: Optional[Options]
        :param kwargs: Keyword arguments passed to every check.
        :rtype: Suite
        """
        builder = SuiteBuilder(
            suite=cls.execution_mode.value(
                identifier=identifier or uuid.uuid4().hex,
                definition=cls,
            ),
            options=options,
            kwargs=kwargs,
        )
        cls().define_suite(builder)
        return builder.suite

    @classmethod
    def run(
        cls,
        context: SuiteContext,
        identifier: Optional[str] = None,
        options: Optional[Options] = None,
        **kwargs,
    ) -> SuiteResult:
        """
        Build the suite and execute it against ``context``.

        :param context: The suite context.
        :type context: SuiteContext
        :param identifier: Execution identifier.
        :type identifier: Optional[str]
        :param options: Options consulted by :meth:`define_suite`.
        :type options: Optional[Options]
        :rtype: SuiteResult
        """
        suite = cls.build(identifier=identifier, options=options, **kwargs)
        definition = cls()
        cancelled = threading.Event()

        definition.on_started(suite.identifier)
        reports = suite.execute(context, cancelled)
        if not cancelled.is_set():
            definition.on_completed(suite.identifier)

        return SuiteResult(
            identifier=suite.identifier,
            suite=cls.__name__,
            reports=reports,
            cancelled=cancelled.is_set(),
        )

    def on_started(self, identifier: str):
        """Called before the first check runs."""
        logger.info("%s started [%s].", self.__class__.__name__, identifier)

    @contextmanager
    def around_check(
        self,
        identifier: str,
        step: str,
        description: Description,
        context: SuiteContext,  # pylint: disable=unused-argument
    ) -> Generator[None, None, None]:
        """
        Context manager wrapped around every check of the suite.

        :param identifier: Identifier of the suite execution.
        :type identifier: str
        :param step: Name of the check.
        :type step: str
        :param description: Description of the check.
        :type description: Description
        :param context: The suite context.
        :type context: SuiteContext
        """
        logger.info(
            "Executing '%s' (%s) of %s suite [%s].",
            description,
            step,
            self.__class__.__name__,
            identifier,
        )

        yield

        logger.info(
            "Completed '%s' (%s) of %s suite [%s].",
            description,
            step,
            self.__class__.__name__,
            identifier,
        )

    def on_completed(self, identifier: str):
        """Called after the last check when the suite was not cancelled."""
        logger.info("%s completed [%s].", self.__class__.__name__, identifier)

    def on_failed(self, identifier: str, step: str, e: Exception):
        """Called when a check raises."""
        logger.error(
            "%s failed executing %s check [%s].\n%s",
            self.__class__.__name__,
            step,
            identifier,
            e,
        )

    def on_cancelled(self, identifier: str):
        """Called when a check cancels the suite."""
        logger.warning("%s cancelled [%s].", self.__class__.__name__, identifier)


STANDARD_CHECKS = (
    "codazzi",
    "simons",
    "gradient_inequality",
    "variation",
    "extrinsic_oracle",
    "gauss",
    "steady_fit",
)
"""Names of the checks bundled by :class:`StandardSuite`."""

DEFAULT_CHECKS = tuple(name for name in STANDARD_CHECKS if name != "steady_fit")
"""Checks run when no selection is given; the steady state fit only passes on
members of the constant curvature family."""


class StandardSuite(SuiteDefinition):
    """
    Every single cross-section check, run concurrently.

    Options:

    - ``checks``: names from :data:`STANDARD_CHECKS` to run; :data:`DEFAULT_CHECKS`
      when unset.
    - ``variations``: ``(l, m)`` harmonics used as variation directions.
    """

    description = "Identities of a single cross section"
    execution_mode = ExecutionMode.CONCURRENT

    def define_suite(self, builder: SuiteBuilder):
        selected = builder.option("checks", None) or DEFAULT_CHECKS

        if "codazzi" in selected:
            builder.check(self.codazzi)
        if "simons" in selected:
            builder.check(self.simons)
        if "gradient_inequality" in selected:
            builder.check(self.gradient_inequality)
        if "variation" in selected:
            directions = builder.option("variations", ((2, 0), (3, 1)))
            for b in builder.each(lambda **_: self.variation_directions(directions)):
                b.check(self.variation, description=b.description)
        if "extrinsic_oracle" in selected:
            builder.check(self.extrinsic_oracle)
        if "gauss" in selected:
            builder.check(self.gauss)
        if "steady_fit" in selected:
            builder.check(self.steady_fit)

    @staticmethod
    def variation_directions(directions):
        for degree, order in directions:
            yield {"degree": degree, "order": order}, f"First variations along Y_{degree},{order}"

    @check(description="Codazzi equations")
    def codazzi(self, context: SuiteContext) -> ResidualReport:
        return check_codazzi(context.omega, context.tolerances.codazzi)

    @check(description="Null Simons identity")
    def simons(self, context: SuiteContext) -> ResidualReport:
        return check_simons(context.omega, context.tolerances.simons)

    @check(description="Gradient inequality |∇A|² ≥ ¾|∇H²|²")
    def gradient_inequality(self, context: SuiteContext) -> ResidualReport:
        return check_gradient_inequality(context.omega, context.tolerances.gradient_inequality)

    @check(description="First variation identities")
    def variation(self, context: SuiteContext, degree: int, order: int) -> ResidualReport:
        phi = context.grid.ylm(degree, order)
        report = check_variation(context.omega, phi, tol=context.tolerances.variation)
        return report.model_copy(update={"name": f"variation_{degree}_{order}"})

    @check(description="Second fundamental form from the embedding")
    def extrinsic_oracle(self, context: SuiteContext) -> ResidualReport:
        return check_extrinsic_oracle(context.omega, tol=context.tolerances.extrinsic)

    @check(description="Gauss equation and Gauss-Bonnet")
    def gauss(self, context: SuiteContext) -> ResidualReport:
        return check_gauss(context.omega, context.tolerances.gauss)

    @check(description="Distance from the constant curvature family")
    def steady_fit(self, context: SuiteContext) -> ResidualReport:
        return check_steady_fit(context.omega, context.tolerances.steady_fit)
