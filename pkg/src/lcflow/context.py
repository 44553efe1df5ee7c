"""
Context module.
"""

from dataclasses import dataclass
from typing import Optional

from .geometry import ConformalFactor
from .spectral import SphereGrid
from .verification import DEFAULT_TOLERANCES, Tolerances


@dataclass(frozen=True)
class SuiteContext:
    """
    State shared by the checks of a verification suite.

    Checks that declare a ``context`` parameter receive the suite context; the
    others are called with their step keyword arguments only.

    :ivar omega: The conformal factor under test.
    :vartype omega: ConformalFactor
    :ivar tolerances: Per-check tolerances.
    :vartype tolerances: Tolerances
    :ivar max_workers: Thread pool size of concurrent blocks; ``None`` leaves it to
        :class:`~concurrent.futures.ThreadPoolExecutor`.
    :vartype max_workers: Optional[int]
    """

    omega: ConformalFactor
    tolerances: Tolerances = DEFAULT_TOLERANCES
    max_workers: Optional[int] = None

    @property
    def grid(self) -> SphereGrid:
        """The grid of :attr:`omega`."""
        return self.omega.grid
