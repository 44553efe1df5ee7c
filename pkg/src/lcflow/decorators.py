"""
Decorators module.
"""

from typing import Callable, Optional, Union, cast, overload

from .types import DecoratedCheckMethod, Description, UndecoratedCheckMethod


@overload
def check(func: UndecoratedCheckMethod, /) -> DecoratedCheckMethod: ...


@overload
def check(
    *, description: Description = None
) -> Callable[[UndecoratedCheckMethod], DecoratedCheckMethod]: ...


def check(
    func: Optional[UndecoratedCheckMethod] = None,
    /,
    *,
    description: Description = None,
) -> Union[Callable[[UndecoratedCheckMethod], DecoratedCheckMethod], DecoratedCheckMethod]:
    """
    Mark a method as a residual check of a suite definition.

    Works as a bare decorator or with a ``description`` keyword. The description
    is attached to the function and becomes the default description of the step
    created by :meth:`SuiteBuilder.check`.

    :param func: The check method, when used without parentheses.
    :type func: :class:`UndecoratedCheckMethod` or None
    :param description: Human-readable description of the check.
    :type description: :class:`Description` or None
    :return: The decorated method, or a decorator.
    :rtype: :class:`DecoratedCheckMethod` or :class:`Callable`

    Example::

        class MySuite(SuiteDefinition):
            def define_suite(self, builder):
                builder.check(self.gauss)

            @check(description="Gauss equation")
            def gauss(self, context):
                return check_gauss(context.omega)
    """

    def _wrapper(f: UndecoratedCheckMethod) -> DecoratedCheckMethod:
        setattr(f, "description", description)
        return cast(DecoratedCheckMethod, f)

    if func is not None:
        return _wrapper(func)
    return _wrapper
