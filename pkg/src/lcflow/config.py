"""
Configuration module.

Runs are configured with a line-oriented text format of ``key = value`` lines
with dotted keys, for example::

    # a perturbed sphere, flowed to extinction
    grid.L = 24
    initial.kind = perturbed
    initial.perturbations = 2,0,0.05; 3,1,0.03
    flow.sigmas = 0, 0.5, 1
    verify.tolerances.codazzi = 1e-6
    seed = 7

Blank lines and lines starting with ``#`` are ignored. Tuple values are comma
separated and lists of tuples are separated by ``;``. ``none`` clears an
optional value. Unknown and repeated keys are errors.
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union, get_args, get_origin

from pydantic import (
    BaseModel,
    ConfigDict,
    Field as PydanticField,
    PositiveInt,
    ValidationError,
    field_validator,
)

from .errors import ConfigError
from .flow import FlowOptions
from .initial import InitialKind, InitialSpec
from .spectral import SphereGrid
from .suite import DEFAULT_CHECKS, STANDARD_CHECKS
from .verification import Tolerances

logger = logging.getLogger(__name__)

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_NONE = ("none", "null")


class GridConfig(BaseModel):
    """Quadrature grid section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    L: int = 32
    oversample: float = PydanticField(default=2.0, ge=1.0, allow_inf_nan=False)

    @field_validator("L")
    @classmethod
    def _resolvable(cls, value: int) -> int:
        if value < 4:
            raise ValueError("must be ≥ 4")
        return value

    def build(self) -> SphereGrid:
        """The grid described by this section."""
        return SphereGrid(self.L, self.oversample)


class VerifyConfig(BaseModel):
    """
    Verification section.

    :ivar checks: Single cross-section checks to run.
    :type checks: Tuple[str, ...]
    :ivar tolerances: Pass thresholds.
    :type tolerances: Tolerances
    :ivar variations: ``(l, m)`` directions of the first variation check.
    :type variations: Tuple[Tuple[int, int], ...]
    :ivar suite: ``module:Class`` of a user suite replacing the standard one.
    :type suite: Optional[str]
    :ivar trajectory: Whether ``run`` also checks the trajectory estimates.
    :type trajectory: bool
    :ivar max_workers: Thread pool size of concurrent suite blocks, or ``None``
        for the executor default.
    :type max_workers: Optional[int]
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    checks: Tuple[str, ...] = DEFAULT_CHECKS
    tolerances: Tolerances = Tolerances()
    variations: Tuple[Tuple[int, int], ...] = ((2, 0), (3, 1))
    suite: Optional[str] = None
    trajectory: bool = True
    max_workers: Optional[PositiveInt] = None

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = sorted(set(value) - set(STANDARD_CHECKS))
        if unknown:
            raise ValueError(f"unknown checks {', '.join(unknown)}")
        return value

    @field_validator("suite")
    @classmethod
    def _suite_reference(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value.count(":") != 1:
            raise ValueError("must have the form module:Class")
        return value

    @field_validator("variations")
    @classmethod
    def _harmonics(cls, value: Tuple[Tuple[int, int], ...]) -> Tuple[Tuple[int, int], ...]:
        for degree, order in value:
            if degree < 1 or abs(order) > degree:
                raise ValueError(f"invalid harmonic ({degree}, {order})")
        return value


class OutputConfig(BaseModel):
    """
    Output section.

    :ivar directory: Output directory.
    :type directory: Path
    :ivar csv: Whether to write ``diagnostics.csv``.
    :type csv: bool
    :ivar snapshots: Whether to write snapshot files; the stride is
        ``flow.snapshot_every``.
    :type snapshots: bool
    :ivar deterministic: Leave wall-clock data and random identifiers out of
        ``report.json``.
    :type deterministic: bool
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: Path = Path("out")
    csv: bool = True
    snapshots: bool = True
    deterministic: bool = False


class RunConfig(BaseModel):
    """
    Validated configuration of a run.

    :ivar grid: Grid section.
    :type grid: GridConfig
    :ivar initial: Initial data section.
    :type initial: InitialSpec
    :ivar flow: Flow options.
    :type flow: FlowOptions
    :ivar verify: Verification section.
    :type verify: VerifyConfig
    :ivar output: Output section.
    :type output: OutputConfig
    :ivar seed: Seed of random initial data.
    :type seed: Optional[int]
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid: GridConfig = GridConfig()
    initial: InitialSpec = InitialSpec()
    flow: FlowOptions = FlowOptions()
    verify: VerifyConfig = VerifyConfig()
    output: OutputConfig = OutputConfig()
    seed: Optional[int] = None

    def flow_options(self) -> FlowOptions:
        """Flow options with the run seed recorded."""
        if self.seed is None:
            return self.flow
        return self.flow.model_copy(update={"seed": self.seed})

    def with_overrides(
        self,
        out: Optional[Path] = None,
        seed: Optional[int] = None,
        deterministic: Optional[bool] = None,
    ) -> "RunConfig":
        """Apply command-line overrides; ``None`` keeps the configured value."""
        output: Dict[str, Any] = {}
        if out is not None:
            output["directory"] = Path(out)
        if deterministic is not None:
            output["deterministic"] = deterministic
        update: Dict[str, Any] = {"output": self.output.model_copy(update=output)}
        if seed is not None:
            update["seed"] = seed
        return self.model_copy(update=update)


def _unwrap_optional(annotation: Any) -> Tuple[Any, bool]:
    if get_origin(annotation) is Union:
        args = [arg for arg in get_args(annotation) if arg is not type(None)]
        if len(args) == 1:
            return args[0], True
    return annotation, False


def _annotation(path: Tuple[str, ...]) -> Tuple[Any, bool]:
    """Annotation of the field at ``path`` and whether the path names a field."""
    annotation: Any = RunConfig
    for part in path:
        annotation, _ = _unwrap_optional(annotation)
        if not (isinstance(annotation, type) and issubclass(annotation, BaseModel)):
            return None, False
        field = annotation.model_fields.get(part)
        if field is None:
            return None, False
        annotation = field.annotation
    return annotation, True


def _is_tuple(annotation: Any) -> bool:
    return get_origin(_unwrap_optional(annotation)[0]) is tuple


def _convert(text: str, annotation: Any) -> Any:
    inner, optional = _unwrap_optional(annotation)
    if optional and text.lower() in _NONE:
        return None
    if not _is_tuple(inner):
        return text
    args = get_args(inner)
    if len(args) == 2 and args[1] is Ellipsis and _is_tuple(args[0]):
        return [
            [part.strip() for part in item.split(",")]
            for item in text.split(";")
            if item.strip()
        ]
    return [part.strip() for part in text.split(",") if part.strip()]


def _nest(flat: Dict[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        node = nested
        *parents, leaf = key.split(".")
        for parent in parents:
            node = node.setdefault(parent, {})
        node[leaf] = value
    return nested


def _error_message(error: Dict[str, Any]) -> Tuple[str, str]:
    loc = tuple(str(part) for part in error["loc"])
    key = ".".join(loc)
    if error["type"] == "value_error" and "error" in error.get("ctx", {}):
        annotation, _ = _annotation(loc)
        section = isinstance(annotation, type) and issubclass(annotation, BaseModel)
        separator = ": " if section or not loc else " "
        return key, f"{key}{separator}{error['ctx']['error']}"
    return key, f"{key}: {error['msg']}"


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate configuration text.

    :param text: Configuration in the line-oriented ``key = value`` format.
    :type text: str
    :raises ConfigError: On a syntax error, an unknown or repeated key, or a
        value failing validation; the message names the line and dotted key.
    :rtype: RunConfig

    Example::

        config = parse_config("grid.L = 32\\ninitial.kind = round\\ninitial.c = 1.0")
        assert config.grid.L == 32
    """
    flat: Dict[str, Any] = {}
    lines: Dict[str, int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"invalid key '{key}'", line=number, key=key)
        if key in flat:
            raise ConfigError(
                f"{key} repeats line {lines[key]}", line=number, key=key
            )
        annotation, known = _annotation(tuple(key.split(".")))
        if not known or (
            isinstance(annotation, type) and issubclass(annotation, BaseModel)
        ):
            raise ConfigError(f"unknown key '{key}'", line=number, key=key)
        flat[key] = _convert(value, annotation)
        lines[key] = number

    try:
        config = RunConfig.model_validate(_nest(flat))
    except ValidationError as ex:
        key, message = _error_message(ex.errors()[0])
        line = lines.get(key) or next(
            (number for name, number in lines.items() if name.startswith(key + ".")), None
        )
        raise ConfigError(message, line=line, key=key) from ex

    if config.initial.kind is InitialKind.FILE and not config.initial.path.exists():  # type: ignore[union-attr]
        raise ConfigError(
            f"initial.path {config.initial.path} does not exist",
            line=lines.get("initial.path"),
            key="initial.path",
        )
    logger.debug("Parsed configuration with %d key(s).", len(flat))
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Read and parse a configuration file.

    :raises ConfigError: If the file cannot be read or parsed.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as ex:
        raise ConfigError(f"cannot read configuration {path}: {ex}") from ex
    return parse_config(text)
