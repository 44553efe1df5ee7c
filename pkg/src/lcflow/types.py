"""
Type definitions and protocols.
"""

from types import SimpleNamespace
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    Optional,
    Protocol,
    TYPE_CHECKING,
    Tuple,
    Type,
    TypeAlias,
    TypeVar,
    Union,
)

import numpy as np
from numpy.typing import NDArray

if TYPE_CHECKING:
    from .builder import SuiteBuilder
    from .context import SuiteContext
    from .suite import SuiteDefinition
    from .verification import ResidualReport

Field: TypeAlias = NDArray[np.float64]
"""
Type alias for a real field sampled on the nodes of a sphere grid.

The last two axes are ``(N_θ, N_φ)``; leading axes, when present, index
components or a batch of fields.

:type: NDArray[np.float64]
"""

Coefficients: TypeAlias = NDArray[np.float64]
"""
Type alias for real spherical harmonic coefficients.

The last two axes are ``(L + 1, 2L + 1)`` and coefficient ``c[l, m]`` is stored
at index ``[l, m + L]``; entries with ``|m| > l`` are zero.

:type: NDArray[np.float64]
"""

Vector3: TypeAlias = Tuple[float, float, float]
"""
Type alias for a vector in three dimensional Euclidean space.

:type: Tuple[float, float, float]
"""

SigmaList: TypeAlias = Tuple[float, ...]
"""
Type alias for the exponents ``σ ∈ [0, 1]`` of the pinching quantities ``f_σ``.

:type: Tuple[float, ...]
"""

Perturbation: TypeAlias = Tuple[int, int, float]
"""
Type alias for a single harmonic perturbation ``(l, m, ε)`` of initial data.

:type: Tuple[int, int, float]
"""

Description: TypeAlias = Optional[str]
"""
Type alias for an optional check or item description.

:type: Optional[str]
"""

UndecoratedCheckMethod: TypeAlias = Callable[..., "ResidualReport"]
"""
Type alias for an undecorated check method.

Any callable returning a ``ResidualReport`` can be registered as a check.

:type: Callable[..., ResidualReport]
"""


class DecoratedCheckMethod(Protocol):  # pylint: disable=too-few-public-methods
    """
    Protocol for a check method decorated with the ``@check`` decorator.

    :ivar __name__: The name of the check method.
    :type __name__: str
    :ivar description: An optional human-readable description of the check.
    :type description: Optional[str]
    """

    __name__: str
    description: Optional[str]

    def __call__(
        self, *args, context: Optional["SuiteContext"] = None, **kwargs
    ) -> "ResidualReport":  # pragma: no cover
        """
        Check method signature.

        :param context: The suite context, passed when the method accepts it.
        :type context: Optional[SuiteContext]
        """


CheckMethod: TypeAlias = Union[UndecoratedCheckMethod, DecoratedCheckMethod]
"""
Type alias for any check method, decorated or not.

:type: Union[UndecoratedCheckMethod, DecoratedCheckMethod]
"""

CheckArgs: TypeAlias = Union[Dict[str, Any], Tuple[Dict[str, Any], Description]]
"""
Type alias for the keyword arguments of a check, optionally paired with a
per-item description.

:type: Union[Dict[str, Any], Tuple[Dict[str, Any], Description]]
"""

ForEachMethod: TypeAlias = Callable[..., Iterator[CheckArgs]]
"""
Type alias for the generator passed to ``SuiteBuilder.each``.

:type: Callable[..., Iterator[CheckArgs]]
"""

TransformMethod: TypeAlias = Callable[..., CheckArgs]
"""
Type alias for the callable passed to ``SuiteBuilder.transform``.

:type: Callable[..., CheckArgs]
"""

BuilderIterator: TypeAlias = Iterator["SuiteBuilder"]
"""
Type alias for an iterator of ``SuiteBuilder`` instances.

:type: Iterator[SuiteBuilder]
"""

SuiteDefinitionType: TypeAlias = Type["SuiteDefinition"]
"""
Type alias for a ``SuiteDefinition`` class.

:type: Type[SuiteDefinition]
"""

Options: TypeAlias = Union[SimpleNamespace, Dict[str, Any]]
"""
Type alias for suite options, as a ``SimpleNamespace`` or a dictionary.

:type: Union[SimpleNamespace, Dict[str, Any]]
"""

Value = TypeVar("Value")
"""
Generic type variable.

:type: TypeVar
"""
