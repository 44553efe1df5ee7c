"""
Steps module.
"""

from typing import Any, Dict, TYPE_CHECKING, Union

from .types import CheckMethod, Description

if TYPE_CHECKING:
    from .suite import Suite  # noqa


class CheckStep:
    """
    A single residual check registered in a suite.

    A ``CheckStep`` pairs a check callable with the keyword arguments it is called
    with and a human-readable description. Suites execute their steps according
    to their execution mode.

    :ivar func: The check callable, returning a ``ResidualReport``
    :type func: CheckMethod
    :ivar description: Human-readable description of the check
    :type description: Description
    :ivar kwargs: Keyword arguments passed to the check
    :type kwargs: Dict[str, Any]
    """

    def __init__(
        self,
        func: CheckMethod,
        description: Description,
        kwargs: Dict[str, Any],
    ):
        self.func = func
        self.description = description
        self.kwargs = kwargs

    @property
    def is_suite(self) -> bool:
        """
        Whether this step is a nested suite.

        :return: Always ``False`` for a check step
        :rtype: bool
        """
        return False

    @property
    def name(self) -> str:
        """Name of the check callable."""
        return self.func.__name__

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(func={self.name},kwargs={sorted(self.kwargs)!r},)"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(func={self.name},kwargs={sorted(self.kwargs)!r},)"


class Steps(list[Union[CheckStep, "Suite"]]):  # pragma: no cover
    """
    Ordered container of check steps and nested suites.

    :inherits: list[Union[CheckStep, Suite]]
    """
