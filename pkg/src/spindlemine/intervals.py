"""Interval pattern structures over numeric data.

Generalizes formal concept analysis from binary attributes to tuples of
intervals: each object is described by one ``[low, high]`` interval per
numeric attribute (a plain measurement is the degenerate interval
``[v, v]``).  The similarity of two descriptions is the component-wise
convex hull

    ``[a, b] meet [c, d] = [min(a, c), max(b, d)]``

which makes the description space a meet-semilattice.  ``c`` subsumes
``d`` (written ``c <= d``, "c is more general") exactly when
``c meet d == c``, i.e. every component of ``c`` contains the
corresponding component of ``d``.

The pattern Galois connection pairs object sets with descriptions:
``A -> meet of member descriptions`` and ``d -> all objects whose
description is inside d``.  Its fixpoints are the pattern concepts; they
are enumerated with the same Close-by-One machinery as the binary case
(:func:`spindlemine.fca.enumerate_closed_extents`), since only the
closure operator differs.

The lattice always includes a distinguished bottom concept with empty
extent whose intent is a formal "most specific" description (represented
as ``None``): it is the identity of the meet and keeps the concept set a
complete lattice without inventing numeric values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence
import csv

from .errors import InputError
from .fca import (
    DEFAULT_CONCEPT_CAP,
    ConceptLattice,
    _indices_from_mask,
    _iter_bits,
    _mask_from_indices,
    assemble_lattice,
    enumerate_closed_extents,
)


@dataclass(frozen=True)
class IntervalDescription:
    """One ``[low, high]`` interval per numeric attribute."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for lo, hi in self.intervals:
            if lo > hi:
                raise InputError(f"interval [{lo}, {hi}] has low > high")

    @classmethod
    def from_point(cls, values: Iterable[float]) -> "IntervalDescription":
        return cls(tuple((float(v), float(v)) for v in values))

    def __len__(self) -> int:
        return len(self.intervals)


def interval_meet(d1: IntervalDescription, d2: IntervalDescription) -> IntervalDescription:
    """Component-wise convex hull; the similarity operation on descriptions."""
    if len(d1) != len(d2):
        raise InputError(f"description widths differ: {len(d1)} vs {len(d2)}")
    return IntervalDescription(
        tuple(
            (min(a, c), max(b, d))
            for (a, b), (c, d) in zip(d1.intervals, d2.intervals)
        )
    )


def subsumes(c: IntervalDescription, d: IntervalDescription) -> bool:
    """True iff ``c`` is more general than ``d``: every component of ``c``
    contains the corresponding component of ``d`` (equivalently
    ``interval_meet(c, d) == c``)."""
    if len(c) != len(d):
        raise InputError(f"description widths differ: {len(c)} vs {len(d)}")
    return all(
        a <= lo and hi <= b
        for (a, b), (lo, hi) in zip(c.intervals, d.intervals)
    )


@dataclass(frozen=True)
class IntervalPatternStructure:
    """Objects plus one interval description per object."""

    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    descriptions: tuple[IntervalDescription, ...]

    def __post_init__(self) -> None:
        if len(set(self.objects)) != len(self.objects):
            raise InputError("object identifiers must be unique")
        if len(set(self.attributes)) != len(self.attributes):
            raise InputError("attribute identifiers must be unique")
        if len(self.descriptions) != len(self.objects):
            raise InputError("one description per object required")
        for name, desc in zip(self.objects, self.descriptions):
            if len(desc) != len(self.attributes):
                raise InputError(
                    f"object {name!r}: description width {len(desc)} does not match "
                    f"{len(self.attributes)} attributes"
                )

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    def delta(self, index: int) -> IntervalDescription:
        """The description of one object."""
        return self.descriptions[index]


def extent_to_description(
    ps: IntervalPatternStructure, objects: Iterable[int]
) -> IntervalDescription:
    """Meet (convex hull) of the members' descriptions.

    The empty set has no numeric description — its intent is the formal
    bottom, represented as ``None`` on :class:`PatternConcept` — so empty
    input is rejected here.
    """
    mask = _mask_from_indices(objects, ps.n_objects, "object")
    return _hull_of_mask(ps, mask)


def _hull_of_mask(ps: IntervalPatternStructure, mask: int) -> IntervalDescription:
    if mask == 0:
        raise InputError("cannot build a description for an empty object set")
    members = list(_iter_bits(mask))
    intervals = list(ps.descriptions[members[0]].intervals)
    for g in members[1:]:
        d = ps.descriptions[g].intervals
        intervals = [
            (min(a, c), max(b, h)) for (a, b), (c, h) in zip(intervals, d)
        ]
    return IntervalDescription(tuple(intervals))


def description_to_extent(
    ps: IntervalPatternStructure, d: IntervalDescription
) -> frozenset[int]:
    """All objects whose description lies inside ``d``."""
    if len(d) != len(ps.attributes):
        raise InputError(
            f"description width {len(d)} does not match {len(ps.attributes)} attributes"
        )
    return _indices_from_mask(_extent_mask(ps, d))


def _extent_mask(ps: IntervalPatternStructure, d: IntervalDescription) -> int:
    mask = 0
    for g, desc in enumerate(ps.descriptions):
        if all(
            a <= lo and hi <= b
            for (a, b), (lo, hi) in zip(d.intervals, desc.intervals)
        ):
            mask |= 1 << g
    return mask


@dataclass(frozen=True)
class PatternConcept:
    """A pattern concept; ``intent is None`` marks the formal bottom
    (empty extent, most-specific description)."""

    extent: frozenset[int]
    intent: IntervalDescription | None


def build_pattern_lattice(
    ps: IntervalPatternStructure, concept_cap: int = DEFAULT_CONCEPT_CAP
) -> ConceptLattice:
    """All pattern concepts of the structure, ordered by extent inclusion.

    Equals the deduplicated closures of every non-empty subset of objects,
    plus the bottom concept ``(empty, None)``.
    """
    if ps.n_objects == 0:
        raise InputError("pattern structure has no objects")

    def close(mask: int) -> int:
        if mask == 0:
            return 0  # the formal bottom: no real object matches it
        return _extent_mask(ps, _hull_of_mask(ps, mask))

    masks = enumerate_closed_extents(ps.n_objects, close, concept_cap)

    def make(mask: int) -> PatternConcept:
        intent = _hull_of_mask(ps, mask) if mask else None
        return PatternConcept(extent=_indices_from_mask(mask), intent=intent)

    return assemble_lattice(ps.objects, masks, make)


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------


def format_interval(lo: float, hi: float) -> str:
    """Serialize an interval cell; degenerate intervals stay plain reals."""
    if lo == hi:
        return repr(float(lo))
    return f"{float(lo)!r}..{float(hi)!r}"


def parse_interval_cell(cell: str) -> tuple[float, float]:
    """Parse a CSV cell: either a real (degenerate interval) or ``lo..hi``."""
    text = cell.strip()
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = float(lo_s), float(hi_s)
        else:
            lo = hi = float(text)
    except ValueError as exc:
        raise InputError(f"unparseable interval cell {cell!r}") from exc
    if lo > hi:
        raise InputError(f"interval cell {cell!r} has low > high")
    return lo, hi


def read_interval_csv(path: str) -> IntervalPatternStructure:
    """Read a numeric context: header ``id,<attributes...>``, one row per
    object, cells either reals or ``lo..hi`` intervals."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read context {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = rows[0]
    if not header or header[0] != "id":
        raise InputError(f"{path}: first header cell must be 'id'")
    attributes = tuple(header[1:])
    objects: list[str] = []
    descriptions: list[IntervalDescription] = []
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise InputError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        objects.append(row[0])
        descriptions.append(IntervalDescription(tuple(parse_interval_cell(c) for c in row[1:])))
    return IntervalPatternStructure(tuple(objects), attributes, tuple(descriptions))


def write_interval_csv(ps: IntervalPatternStructure, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + list(ps.attributes))
        for name, desc in zip(ps.objects, ps.descriptions):
            writer.writerow([name] + [format_interval(lo, hi) for lo, hi in desc.intervals])
