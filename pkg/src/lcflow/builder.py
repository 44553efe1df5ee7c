"""
Builder module.
"""

from contextlib import contextmanager
from types import SimpleNamespace
from typing import Any, Dict, Optional, TYPE_CHECKING, Type, cast

from pydantic import ConfigDict, TypeAdapter, ValidationError

from .steps import CheckStep
from .types import (
    BuilderIterator,
    CheckMethod,
    Description,
    ForEachMethod,
    Options,
    SuiteDefinitionType,
    TransformMethod,
    Value,
)

if TYPE_CHECKING:
    from .suite import Suite


class SuiteBuilder:
    """
    Fluent interface for declaring the checks of a verification suite.

    Checks are appended in declaration order to the suite being built. Nested
    ``sequential`` and ``concurrent`` blocks create sub-suites, ``each`` repeats
    a block over generated arguments and ``transform`` rewrites the arguments of
    a block.

    :param suite: The suite being built
    :type suite: Suite
    :param kwargs: Keyword arguments passed to checks
    :type kwargs: Dict[str, Any]
    :param options: Options for conditional suite structure
    :type options: Optional[Options]
    :param description: Default description of checks in this block
    :type description: Description
    """

    def __init__(
        self,
        suite: "Suite",
        kwargs: Dict[str, Any],
        options: Optional[Options] = None,
        description: Description = None,
    ):
        self.suite = suite
        self.description = description
        self.options: SimpleNamespace = self._convert_options(options)
        self.kwargs = kwargs

    @staticmethod
    def _convert_options(options: Optional[Options] = None) -> SimpleNamespace:
        if options:
            if isinstance(options, SimpleNamespace):
                return options
            if isinstance(options, dict):
                return SimpleNamespace(**options)
        return SimpleNamespace()

    def expected_arguments(self, **kwargs: Optional[Type]):
        """
        Validate that the builder carries the named arguments.

        Types are validated with pydantic type adapters; ``None`` skips type
        validation for that argument.

        :raises TypeError: If a named argument is missing.
        :raises ValueError: If an argument does not validate against its type.

        Example::

            builder.expected_arguments(phi=np.ndarray, eps=float)
        """
        for name, expected_type in kwargs.items():
            if name not in self.kwargs:
                raise TypeError(f"Argument '{name}' not found.")

            if expected_type is not None:
                value = self.kwargs[name]
                type_adapter = TypeAdapter(
                    expected_type, config=ConfigDict(arbitrary_types_allowed=True)
                )
                try:
                    type_adapter.validate_python(value)
                except ValidationError as e:
                    raise ValueError(
                        f"Argument '{name}' is expected to be of type '{expected_type}'."
                    ) from e

    @contextmanager
    def concurrent(self, description: Description = None) -> BuilderIterator:
        """
        Open a block whose checks run on a thread pool.

        Reports of the block keep declaration order.

        Example::

            with builder.concurrent() as b:
                b.check(check_codazzi)
                b.check(check_simons)
        """
        from .suite import ConcurrentSuite  # pylint: disable=import-outside-toplevel

        yield from self._build_suite(ConcurrentSuite, description)

    @contextmanager
    def sequential(self, description: Description = None) -> BuilderIterator:
        """Open a block whose checks run one after another."""
        from .suite import SequentialSuite  # pylint: disable=import-outside-toplevel

        yield from self._build_suite(SequentialSuite, description)

    def _build_suite(
        self, suite_type: Type["Suite"], description: Description = None
    ) -> BuilderIterator:
        builder = SuiteBuilder(
            suite=suite_type(
                identifier=self.suite.identifier,
                definition=self.suite.definition,
            ),
            options=self.options,
            description=description or self.description,
            kwargs=self.kwargs,
        )
        yield builder
        self.suite.steps.append(builder.suite)

    def check(
        self,
        func: CheckMethod,
        description: Description = None,
        **kwargs: Any,
    ):
        """
        Add a check to the suite.

        The check receives the builder's keyword arguments updated with
        ``kwargs``, and the suite context when it declares a ``context``
        parameter.

        :param func: The check callable.
        :type func: CheckMethod
        :param description: Description overriding the ``@check`` one.
        :type description: Description

        Example::

            builder.check(self.variation, eps=1e-3)
        """
        step_kwargs = self.kwargs.copy()
        step_kwargs.update(kwargs)
        self.suite.steps.append(
            CheckStep(
                func=func,
                description=(
                    description or getattr(func, "description", None) or self.description
                ),
                kwargs=step_kwargs,
            )
        )

    def sub_suite(
        self,
        definition: SuiteDefinitionType,
        description: Description = None,
    ):
        """
        Embed the checks of another suite definition.

        The embedded suite keeps its own execution mode and inherits the
        current options and keyword arguments.
        """
        builder = SuiteBuilder(
            suite=definition.execution_mode.value(
                identifier=self.suite.identifier,
                definition=definition,
            ),
            options=self.options,
            description=description or self.description,
            kwargs=self.kwargs,
        )
        definition().define_suite(builder)
        self.suite.steps.append(builder.suite)

    def each(
        self,
        func: ForEachMethod,
        description: Description = None,
    ) -> BuilderIterator:
        """
        Yield a builder per item generated by ``func``.

        ``func`` receives the current keyword arguments and yields either a dict
        of keyword arguments or a ``(dict, description)`` tuple.

        Example::

            def perturbations(self, **_):
                for degree in (2, 3, 4):
                    yield {"phi": grid.ylm(degree, 0)}, f"variation Y_{degree}0"

            for b in builder.each(self.perturbations):
                b.check(self.variation)
        """
        for kwargs in func(**self.kwargs.copy()):
            kwargs, desc = kwargs if isinstance(kwargs, tuple) else (kwargs, None)
            yield SuiteBuilder(
                suite=self.suite,
                options=self.options,
                description=desc or description or self.description,
                kwargs=kwargs,
            )

    @contextmanager
    def transform(
        self,
        func: TransformMethod,
        description: Description = None,
    ) -> BuilderIterator:
        """
        Yield a builder whose keyword arguments are the result of ``func``.

        ``func`` receives the current keyword arguments and returns a dict or a
        ``(dict, description)`` tuple.
        """
        kwargs = func(**self.kwargs.copy())
        kwargs, desc = kwargs if isinstance(kwargs, tuple) else (kwargs, None)

        yield SuiteBuilder(
            suite=self.suite,
            options=self.options,
            description=desc or description or self.description,
            kwargs=kwargs,
        )

    def option(self, name: str, default: Optional[Value] = None) -> Value:
        """
        Option value, or ``default`` when unset.

        Example::

            if builder.option("extrinsic", True):
                builder.check(self.extrinsic_oracle)
        """
        return cast(Value, getattr(self.options, name, default))
