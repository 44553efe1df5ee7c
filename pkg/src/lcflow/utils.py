"""
Utility and supporting methods.
"""

import importlib
from typing import Any, TYPE_CHECKING, Type, cast

if TYPE_CHECKING:
    from .suite import SuiteDefinition  # noqa


def to_dict(**kwargs: Any) -> dict[str, Any]:
    """
    Package keyword arguments into a dictionary.

    :rtype: dict[str, Any]
    """
    return kwargs


def to_kwargs(base: dict[str, Any], **kwargs: Any) -> dict[str, Any]:
    """
    Copy ``base`` and update the copy with ``kwargs``.

    Keyword arguments take precedence; ``base`` is not modified.

    :rtype: dict[str, Any]
    """
    d = base.copy()
    d.update(kwargs)
    return d


def load_suite(module_name: str, definition_class: str) -> Type["SuiteDefinition"]:
    """
    Import a suite definition class by module and class name.

    Used by ``lcflow verify --suite module:Class``.

    :param module_name: Fully qualified module name
    :type module_name: str
    :param definition_class: Name of the ``SuiteDefinition`` subclass
    :type definition_class: str
    :rtype: Type[SuiteDefinition]

    :raises ImportError: If the module cannot be imported
    :raises AttributeError: If the class does not exist in the module
    :raises TypeError: If the attribute is not a ``SuiteDefinition`` subclass
    """
    from .suite import SuiteDefinition  # pylint: disable=import-outside-toplevel

    # SECURITY: this imports and runs arbitrary modules, only load trusted suites.
    module = importlib.import_module(module_name)
    definition_type = getattr(module, definition_class)
    if not (isinstance(definition_type, type) and issubclass(definition_type, SuiteDefinition)):
        raise TypeError(f"'{module_name}.{definition_class}' is not a SuiteDefinition.")
    return cast(Type["SuiteDefinition"], definition_type)
