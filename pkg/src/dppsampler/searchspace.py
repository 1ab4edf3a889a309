"""Hyperparameter search spaces: definition, uniform sampling, feature encoding.

A space is an ordered forest of dimensions.  Each dimension is continuous,
integer, categorical, ordinal, or boolean; non-continuous dimensions may carry
conditional children that only become active when the parent takes a specific
trigger value.  Every space owns a deterministic ``feature_layout`` mapping
each dimension to a contiguous slice of the feature vector phi, which is what
the similarity kernel consumes:

* numeric dimensions occupy one entry, rescaled to [0, 1] (log domain when
  ``scale == "log"``),
* categorical and boolean dimensions get a one-hot segment (booleans are a
  single 0/1 entry),
* ordinal dimensions get a unary segment ([1,0,0], [1,1,0], [1,1,1], ...),
* segments of inactive dimensions are all-zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import SpaceSemanticError, SpaceSyntaxError

KINDS = ("continuous", "integer", "categorical", "ordinal", "boolean")
_NUMERIC = ("continuous", "integer")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Dimension:
    """One hyperparameter dimension, possibly with conditional children.

    Parameters
    ----------
    name : str
        Identifier, unique within the whole space.
    kind : str
        One of ``continuous``, ``integer``, ``categorical``, ``ordinal``,
        ``boolean``.
    bounds : (low, high), optional
        Required for numeric kinds.  ``low < high`` for continuous,
        ``low <= high`` for integer.
    scale : str
        ``linear`` (default) or ``log``; numeric kinds only.  ``log``
        requires a positive lower bound.
    categories : tuple of str, optional
        Ordered labels; categorical/ordinal kinds only, at least two,
        unique.
    children : tuple of (trigger, Dimension)
        Sub-dimensions active only when this dimension takes the trigger
        value.  Continuous parents cannot trigger children (exact equality
        on a continuum is meaningless).
    """

    name: str
    kind: str
    bounds: tuple[float, float] | None = None
    scale: str = "linear"
    categories: tuple[str, ...] | None = None
    children: tuple[tuple[object, "Dimension"], ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name.isidentifier():
            raise SpaceSemanticError(f"dimension name must be an identifier, got {self.name!r}")
        if self.kind not in KINDS:
            raise SpaceSemanticError(f"{self.name}: unknown kind {self.kind!r}")
        if self.scale not in ("linear", "log"):
            raise SpaceSemanticError(f"{self.name}: unknown scale {self.scale!r}")

        if self.kind in _NUMERIC:
            if self.bounds is None:
                raise SpaceSemanticError(f"{self.name}: {self.kind} dimension requires bounds")
            lo, hi = self.bounds
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise SpaceSemanticError(f"{self.name}: bounds must be finite")
            if self.kind == "continuous" and not lo < hi:
                raise SpaceSemanticError(f"{self.name}: bounds inverted ({lo} >= {hi})")
            if self.kind == "integer":
                if lo != int(lo) or hi != int(hi):
                    raise SpaceSemanticError(f"{self.name}: integer bounds must be integers")
                if lo > hi:
                    raise SpaceSemanticError(f"{self.name}: bounds inverted ({lo} > {hi})")
            if self.scale == "log" and lo <= 0:
                raise SpaceSemanticError(f"{self.name}: log scale requires a positive lower bound")
            if self.categories is not None:
                raise SpaceSemanticError(f"{self.name}: numeric dimensions take no categories")
        elif self.kind in ("categorical", "ordinal"):
            if self.bounds is not None:
                raise SpaceSemanticError(f"{self.name}: {self.kind} dimensions take no bounds")
            if self.scale != "linear":
                raise SpaceSemanticError(f"{self.name}: scale applies to numeric dimensions only")
            if self.categories is None or len(self.categories) < 2:
                raise SpaceSemanticError(f"{self.name}: need at least 2 categories")
            if any(not isinstance(c, str) for c in self.categories):
                raise SpaceSemanticError(f"{self.name}: category labels must be strings")
            if len(set(self.categories)) != len(self.categories):
                raise SpaceSemanticError(f"{self.name}: duplicate category labels")
        else:  # boolean
            if self.bounds is not None or self.categories is not None:
                raise SpaceSemanticError(f"{self.name}: boolean dimensions take no bounds/categories")
            if self.scale != "linear":
                raise SpaceSemanticError(f"{self.name}: scale applies to numeric dimensions only")

        for trigger, child in self.children:
            if not isinstance(child, Dimension):
                raise SpaceSemanticError(f"{self.name}: child is not a Dimension")
            if not self.is_valid_value(trigger):
                raise SpaceSemanticError(
                    f"{self.name}: child trigger {trigger!r} is not a valid value of the parent"
                )
            if self.kind == "continuous":
                raise SpaceSemanticError(
                    f"{self.name}: continuous dimensions cannot trigger children"
                )

    @property
    def width(self) -> int:
        """Number of feature-vector entries this dimension occupies."""
        if self.kind in _NUMERIC or self.kind == "boolean":
            return 1
        return len(self.categories)

    def is_valid_value(self, value: object) -> bool:
        """Whether ``value`` lies within this dimension's bounds/categories."""
        if self.kind == "continuous":
            return (
                isinstance(value, (int, float))
                and not isinstance(value, bool)
                and self.bounds[0] <= value <= self.bounds[1]
            )
        if self.kind == "integer":
            return (
                isinstance(value, (int, float))
                and not isinstance(value, bool)
                and value == int(value)
                and self.bounds[0] <= value <= self.bounds[1]
            )
        if self.kind == "boolean":
            return isinstance(value, bool)
        return isinstance(value, str) and value in self.categories


def _walk(dims, visit):
    for dim in dims:
        visit(dim)
        _walk([child for _, child in dim.children], visit)


@dataclass(frozen=True)
class SearchSpace:
    """A validated forest of dimensions with a deterministic feature layout.

    The layout is assigned depth-first in declaration order, so it is a pure
    function of the space definition and stable across runs.
    """

    roots: tuple[Dimension, ...]
    feature_layout: Mapping[str, tuple[int, int]] = field(
        init=False, compare=False, repr=False
    )
    feature_width: int = field(init=False, compare=False, repr=False)
    _dims: Mapping[str, Dimension] = field(init=False, compare=False, repr=False)
    _parent: Mapping[str, tuple[str, object]] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.roots:
            raise SpaceSemanticError("a space needs at least one dimension")
        dims: dict[str, Dimension] = {}
        parent: dict[str, tuple[str, object]] = {}
        layout: dict[str, tuple[int, int]] = {}
        offset = 0

        def assign(dim: Dimension) -> None:
            nonlocal offset
            if dim.name in dims:
                raise SpaceSemanticError(f"duplicate dimension name {dim.name!r}")
            dims[dim.name] = dim
            layout[dim.name] = (offset, dim.width)
            offset += dim.width
            for trigger, child in dim.children:
                parent[child.name] = (dim.name, trigger)
                assign(child)

        for root in self.roots:
            assign(root)

        object.__setattr__(self, "feature_layout", MappingProxyType(layout))
        object.__setattr__(self, "feature_width", offset)
        object.__setattr__(self, "_dims", MappingProxyType(dims))
        object.__setattr__(self, "_parent", MappingProxyType(parent))

    def dimension(self, name: str) -> Dimension:
        return self._dims[name]

    def dimension_names(self) -> tuple[str, ...]:
        return tuple(self.feature_layout)

    def is_hypercube(self) -> bool:
        """True when grid/Sobol sequences are defined on this space:
        numeric dimensions only, no conditional structure."""
        return all(d.kind in _NUMERIC for d in self._dims.values()) and not self._parent

    def active_set(self, values: Mapping[str, object]) -> frozenset[str]:
        """Dimension names active under ``values``: all roots, plus children
        whose parent is active with the matching trigger value."""
        active = set()

        def visit(dim: Dimension) -> None:
            active.add(dim.name)
            val = values.get(dim.name)
            for trigger, child in dim.children:
                if val == trigger and type(val) is type(trigger):
                    visit(child)

        for root in self.roots:
            visit(root)
        return frozenset(active)

    def configuration(self, values: Mapping[str, object]) -> "Configuration":
        """Build a validated Configuration from a name->value mapping.

        The mapping must value every active dimension and nothing else.
        """
        active = self.active_set(values)
        extra = set(values) - active
        if extra:
            raise SpaceSemanticError(f"values given for inactive/unknown dimensions: {sorted(extra)}")
        missing = active - set(values)
        if missing:
            raise SpaceSemanticError(f"missing values for active dimensions: {sorted(missing)}")
        for name in active:
            if not self._dims[name].is_valid_value(values[name]):
                raise SpaceSemanticError(f"{name}: value {values[name]!r} out of range")
        return Configuration(
            values=MappingProxyType({n: values[n] for n in self.dimension_names() if n in active}),
            active=active,
        )


@dataclass(frozen=True, eq=False)
class Configuration:
    """One assignment of values to the active dimensions of a space."""

    values: Mapping[str, object]
    active: frozenset[str]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return dict(self.values) == dict(other.values) and self.active == other.active


def parse_space(text: str) -> SearchSpace:
    """Parse a versioned space-config JSON document into a SearchSpace.

    The document is an object with ``"version": 1`` and ``"dimensions"``, a
    list of dimension objects ``{name, kind, bounds|categories, scale?,
    children?: [{when: value, dimension: {...}}]}``.

    Raises
    ------
    SpaceSyntaxError
        If the text is not valid JSON (message carries line/column).
    SpaceSemanticError
        If the document violates a schema rule.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpaceSyntaxError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e

    if not isinstance(doc, dict):
        raise SpaceSemanticError("top level must be an object")
    if doc.get("version") != SCHEMA_VERSION:
        raise SpaceSemanticError(f'document must declare "version": {SCHEMA_VERSION}')
    unknown = set(doc) - {"version", "dimensions"}
    if unknown:
        raise SpaceSemanticError(f"unknown top-level keys: {sorted(unknown)}")
    dims = doc.get("dimensions")
    if not isinstance(dims, list) or not dims:
        raise SpaceSemanticError('"dimensions" must be a non-empty list')
    return SearchSpace(roots=tuple(_dimension_from_obj(o) for o in dims))


def _dimension_from_obj(obj: object) -> Dimension:
    if not isinstance(obj, dict):
        raise SpaceSemanticError("each dimension must be an object")
    unknown = set(obj) - {"name", "kind", "bounds", "scale", "categories", "children"}
    if unknown:
        raise SpaceSemanticError(f"unknown dimension keys: {sorted(unknown)}")
    name = obj.get("name")
    kind = obj.get("kind")
    if not isinstance(name, str):
        raise SpaceSemanticError("dimension missing a string name")
    if not isinstance(kind, str):
        raise SpaceSemanticError(f"{name}: dimension missing a string kind")

    bounds = obj.get("bounds")
    if bounds is not None:
        if not (isinstance(bounds, list) and len(bounds) == 2
                and all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in bounds)):
            raise SpaceSemanticError(f"{name}: bounds must be [low, high] numbers")
        bounds = (float(bounds[0]), float(bounds[1])) if kind == "continuous" else tuple(bounds)

    categories = obj.get("categories")
    if categories is not None:
        if not isinstance(categories, list):
            raise SpaceSemanticError(f"{name}: categories must be a list")
        categories = tuple(categories)

    children = []
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise SpaceSemanticError(f"{name}: children must be a list")
    for entry in raw_children:
        if not isinstance(entry, dict) or set(entry) != {"when", "dimension"}:
            raise SpaceSemanticError(f"{name}: each child must be {{when, dimension}}")
        trigger = entry["when"]
        if isinstance(trigger, float) and trigger == int(trigger) and kind == "integer":
            trigger = int(trigger)
        children.append((trigger, _dimension_from_obj(entry["dimension"])))

    return Dimension(
        name=name,
        kind=kind,
        bounds=bounds,
        scale=obj.get("scale", "linear"),
        categories=categories,
        children=tuple(children),
    )


def sample_uniform(space: SearchSpace, rng: np.random.Generator) -> Configuration:
    """Draw one configuration uniformly from the space.

    Traverses the tree root-to-leaf.  Continuous dimensions are uniform on
    ``[low, high]`` (uniform on ``[ln low, ln high]`` then exponentiated for
    log scale), integer dimensions uniform over the integer range,
    categorical/ordinal/boolean uniform over their categories.  Children are
    sampled only when their trigger holds, so the result satisfies the
    activity invariants by construction.
    """
    values: dict[str, object] = {}
    active: set[str] = set()

    def visit(dim: Dimension) -> None:
        active.add(dim.name)
        if dim.kind == "continuous":
            lo, hi = dim.bounds
            if dim.scale == "log":
                val = math.exp(rng.uniform(math.log(lo), math.log(hi)))
                val = min(max(val, lo), hi)
            else:
                val = rng.uniform(lo, hi)
            values[dim.name] = float(val)
        elif dim.kind == "integer":
            lo, hi = dim.bounds
            values[dim.name] = int(rng.integers(lo, hi + 1))
        elif dim.kind == "boolean":
            values[dim.name] = bool(rng.integers(0, 2))
        else:
            values[dim.name] = dim.categories[int(rng.integers(0, len(dim.categories)))]
        for trigger, child in dim.children:
            if values[dim.name] == trigger and type(values[dim.name]) is type(trigger):
                visit(child)

    for root in space.roots:
        visit(root)
    return Configuration(
        values=MappingProxyType({n: values[n] for n in space.dimension_names() if n in active}),
        active=frozenset(active),
    )


def _unit_value(dim: Dimension, h: object) -> float:
    """Eq-style [0,1] rescaling of a numeric value (log domain when asked)."""
    lo, hi = dim.bounds
    if lo == hi:  # integer dimension with a single admissible value
        return 0.0
    if dim.scale == "log":
        return (math.log(h) - math.log(lo)) / (math.log(hi) - math.log(lo))
    return (h - lo) / (hi - lo)


def encode(space: SearchSpace, config: Configuration) -> np.ndarray:
    """Encode a configuration as the feature vector phi (length D, entries in [0,1]).

    Raises ``SpaceSemanticError`` if the configuration does not belong to the
    space (unknown names, inconsistent activity, out-of-range values).
    """
    expected_active = space.active_set(config.values)
    if config.active != expected_active or set(config.values) != set(expected_active):
        raise SpaceSemanticError("configuration does not belong to this space (activity mismatch)")

    phi = np.zeros(space.feature_width)
    for name in config.active:
        dim = space.dimension(name)
        value = config.values[name]
        if not dim.is_valid_value(value):
            raise SpaceSemanticError(f"{name}: value {value!r} out of range")
        start, width = space.feature_layout[name]
        if dim.kind in _NUMERIC:
            phi[start] = _unit_value(dim, value)
        elif dim.kind == "boolean":
            phi[start] = 1.0 if value else 0.0
        elif dim.kind == "categorical":
            phi[start + dim.categories.index(value)] = 1.0
        else:  # ordinal: unary
            phi[start : start + dim.categories.index(value) + 1] = 1.0
    return phi


def quality(config: Configuration) -> float:
    """Quality score q of a configuration.

    Fixed to 1.0 in this release; retained as the extension point for
    closed-loop reweighting of the ensemble.
    """
    return 1.0
