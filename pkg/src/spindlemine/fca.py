"""Binary formal contexts and concept-lattice construction.

A formal context is a triple ``(G, M, I)`` of objects, attributes and an
incidence relation.  The two derivation operators

* ``A' = {m in M | g I m for all g in A}`` (common attributes), and
* ``B' = {g in G | g I m for all m in B}`` (common objects)

form a Galois connection; their composition is a closure operator on
object sets.  A concept is a pair ``(extent, intent)`` where each derives
the other, and the set of all concepts ordered by extent inclusion is a
complete lattice.

Object and attribute sets are represented internally as Python integer
bitmasks (bit ``i`` set means index ``i`` is a member), which keeps the
closure operator — the hot loop of lattice construction — down to a few
``&`` operations.  Public operations accept and return ``frozenset`` of
indices.

Enumeration uses Close-by-One: a depth-first walk over closures with a
canonicity test that guarantees every closed extent is visited exactly
once, without keeping a global "seen" set.  The same enumerator is reused
by :mod:`spindlemine.intervals` for interval pattern structures — it only
needs a closure callable on extent masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Sequence
import csv

from .errors import CapacityError, InputError

#: Default ceiling on the number of concepts a single enumeration may
#: produce before aborting with :class:`CapacityError`.
DEFAULT_CONCEPT_CAP = 10_000_000


def _mask_from_indices(indices: Iterable[int], size: int, kind: str) -> int:
    mask = 0
    for i in indices:
        if not 0 <= i < size:
            raise InputError(f"{kind} index {i} out of range [0, {size})")
        mask |= 1 << i
    return mask


def _indices_from_mask(mask: int) -> frozenset[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class FormalContext:
    """A binary context ``(G, M, I)``.

    ``incidence`` holds (object-index, attribute-index) pairs; conceptually
    it is a ``|G| x |M|`` boolean matrix.
    """

    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    incidence: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if len(set(self.objects)) != len(self.objects):
            raise InputError("object identifiers must be unique")
        if len(set(self.attributes)) != len(self.attributes):
            raise InputError("attribute identifiers must be unique")
        for g, m in self.incidence:
            if not 0 <= g < len(self.objects):
                raise InputError(f"incidence object index {g} out of range")
            if not 0 <= m < len(self.attributes):
                raise InputError(f"incidence attribute index {m} out of range")

    @classmethod
    def from_rows(
        cls,
        objects: Sequence[str],
        attributes: Sequence[str],
        rows: Sequence[Sequence[int]],
    ) -> "FormalContext":
        """Build a context from a row-major boolean matrix."""
        if len(rows) != len(objects):
            raise InputError("row count does not match object count")
        incidence = set()
        for g, row in enumerate(rows):
            if len(row) != len(attributes):
                raise InputError(f"row {g} has {len(row)} cells, expected {len(attributes)}")
            for m, cell in enumerate(row):
                if cell:
                    incidence.add((g, m))
        return cls(tuple(objects), tuple(attributes), frozenset(incidence))

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @cached_property
    def row_masks(self) -> tuple[int, ...]:
        """Per object, the bitmask of its attributes."""
        rows = [0] * len(self.objects)
        for g, m in self.incidence:
            rows[g] |= 1 << m
        return tuple(rows)

    @cached_property
    def column_masks(self) -> tuple[int, ...]:
        """Per attribute, the bitmask of objects that have it."""
        cols = [0] * len(self.attributes)
        for g, m in self.incidence:
            cols[m] |= 1 << g
        return tuple(cols)

    # -- mask-level derivation (internal fast path) ---------------------

    def derive_attr_mask(self, extent_mask: int) -> int:
        result = (1 << self.n_attributes) - 1
        for g in _iter_bits(extent_mask):
            result &= self.row_masks[g]
        return result

    def derive_object_mask(self, intent_mask: int) -> int:
        result = (1 << self.n_objects) - 1
        for m in _iter_bits(intent_mask):
            result &= self.column_masks[m]
        return result

    def closure_mask(self, extent_mask: int) -> int:
        return self.derive_object_mask(self.derive_attr_mask(extent_mask))


def derive_attributes(context: FormalContext, objects: Iterable[int]) -> frozenset[int]:
    """Attributes shared by every object in ``objects``.

    The empty set derives all of ``M``.
    """
    mask = _mask_from_indices(objects, context.n_objects, "object")
    return _indices_from_mask(context.derive_attr_mask(mask))


def derive_objects(context: FormalContext, attributes: Iterable[int]) -> frozenset[int]:
    """Objects sharing every attribute in ``attributes`` (dual operator)."""
    mask = _mask_from_indices(attributes, context.n_attributes, "attribute")
    return _indices_from_mask(context.derive_object_mask(mask))


def closure(context: FormalContext, objects: Iterable[int]) -> frozenset[int]:
    """Double derivation ``A''``: the closure of an object set."""
    mask = _mask_from_indices(objects, context.n_objects, "object")
    return _indices_from_mask(context.closure_mask(mask))


@dataclass(frozen=True)
class Concept:
    """A formal concept: extent and intent derive each other."""

    extent: frozenset[int]
    intent: frozenset[int]


@dataclass(frozen=True)
class ConceptLattice:
    """All concepts of a context (or pattern structure), with cover edges.

    ``concepts`` is sorted by (extent size descending, extent indices
    lexicographically ascending), so index 0 is the top.  ``covers`` holds
    ``(parent_index, child_index)`` pairs and is the transitive reduction
    of the extent-inclusion order.  The payload type of ``concepts`` is
    :class:`Concept` for binary contexts and
    :class:`spindlemine.intervals.PatternConcept` for pattern structures;
    everything else in this class is payload-agnostic.
    """

    object_names: tuple[str, ...]
    concepts: tuple[Any, ...]
    extent_masks: tuple[int, ...]
    covers: tuple[tuple[int, int], ...]
    top_index: int
    bottom_index: int

    @property
    def n_objects(self) -> int:
        return len(self.object_names)

    def __len__(self) -> int:
        return len(self.concepts)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """Direct descendants per concept index (adjacency of ``covers``)."""
        kids: list[list[int]] = [[] for _ in self.concepts]
        for parent, child in self.covers:
            kids[parent].append(child)
        return tuple(tuple(sorted(k)) for k in kids)

    def direct_descendants(self, index: int) -> tuple[int, ...]:
        """Children of a concept under the cover relation."""
        if not 0 <= index < len(self.concepts):
            raise InputError(f"concept index {index} out of range")
        return self.children[index]

    def extent_names(self, index: int) -> tuple[str, ...]:
        """Object names of a concept's extent, in object order."""
        if not 0 <= index < len(self.concepts):
            raise InputError(f"concept index {index} out of range")
        return tuple(self.object_names[g] for g in _iter_bits(self.extent_masks[index]))


def enumerate_closed_extents(
    n_objects: int,
    close: Callable[[int], int],
    concept_cap: int = DEFAULT_CONCEPT_CAP,
) -> list[int]:
    """Enumerate every fixpoint of a closure operator on object bitmasks.

    Close-by-One over object indices: starting from ``close(0)``, each
    closed extent is extended by one object ``g`` at a time; the extension
    is kept only if the closure introduces no new object below ``g``
    (canonicity), which makes every closed set reachable along exactly one
    path.  Runs iteratively with an explicit stack, so deep lattices do
    not hit the interpreter recursion limit.
    """
    root = close(0)
    out = [root]
    stack: list[tuple[int, int]] = [(root, 0)]
    while stack:
        extent, start = stack.pop()
        for g in range(start, n_objects):
            if (extent >> g) & 1:
                continue
            child = close(extent | (1 << g))
            below = (1 << g) - 1
            if (child & below) == (extent & below):
                out.append(child)
                if len(out) > concept_cap:
                    raise CapacityError(
                        f"concept count exceeded the configured cap ({concept_cap})"
                    )
                stack.append((child, g + 1))
    return out


def assemble_lattice(
    object_names: Sequence[str],
    extent_masks: Iterable[int],
    make_concept: Callable[[int], Any],
) -> ConceptLattice:
    """Order closed extents, attach payloads, and compute cover edges.

    ``make_concept`` maps an extent mask to the concept payload.  Cover
    computation scans concepts in decreasing extent size: a candidate
    subset is a direct child unless it is already below a previously
    chosen child (transitive reduction).
    """
    masks = sorted(set(extent_masks), key=lambda m: (-m.bit_count(), sorted(_iter_bits(m))))
    concepts = tuple(make_concept(m) for m in masks)

    covers: list[tuple[int, int]] = []
    for i, big in enumerate(masks):
        chosen: list[int] = []
        for j in range(i + 1, len(masks)):
            small = masks[j]
            if small & ~big:
                continue
            if any(small & ~masks[k] == 0 for k in chosen):
                continue
            chosen.append(j)
            covers.append((i, j))

    return ConceptLattice(
        object_names=tuple(object_names),
        concepts=concepts,
        extent_masks=tuple(masks),
        covers=tuple(covers),
        top_index=0,
        bottom_index=len(masks) - 1,
    )


def build_lattice(
    context: FormalContext, concept_cap: int = DEFAULT_CONCEPT_CAP
) -> ConceptLattice:
    """Construct the full concept lattice of a binary context.

    The result matches brute-force enumeration of all ``2^|G|`` extent
    closures, deduplicated.  Raises :class:`CapacityError` when the number
    of concepts exceeds ``concept_cap``.
    """
    masks = enumerate_closed_extents(context.n_objects, context.closure_mask, concept_cap)

    def make(mask: int) -> Concept:
        return Concept(
            extent=_indices_from_mask(mask),
            intent=_indices_from_mask(context.derive_attr_mask(mask)),
        )

    return assemble_lattice(context.objects, masks, make)


def lattice_to_dot(lattice: ConceptLattice, label: Callable[[int], str] | None = None) -> str:
    """Render the cover relation as a Graphviz digraph (debugging aid)."""
    if label is None:
        def label(i: int) -> str:
            names = lattice.extent_names(i)
            return "{%s}" % ",".join(names) if names else "{}"
    lines = ["digraph lattice {", "  rankdir=BT;"]
    for i in range(len(lattice)):
        lines.append(f'  n{i} [label="{label(i)}"];')
    for parent, child in lattice.covers:
        lines.append(f"  n{child} -> n{parent};")
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

_TRUE_CELLS = {"1", "x", "X"}
_FALSE_CELLS = {"0", ""}


def read_context_csv(path: str) -> FormalContext:
    """Read a binary context: first row attribute names, first column object
    names, cells ``1``/``0`` (or ``x``/empty)."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read context {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty context file")
    header = rows[0]
    attributes = tuple(header[1:])
    width = len(header)
    objects: list[str] = []
    incidence = set()
    for g, row in enumerate(rows[1:]):
        if len(row) != width:
            raise InputError(f"{path}: row {g + 2} has {len(row)} cells, expected {width}")
        objects.append(row[0])
        for m, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell in _TRUE_CELLS:
                incidence.add((g, m))
            elif cell not in _FALSE_CELLS:
                raise InputError(f"{path}: unrecognised cell {cell!r} at row {g + 2}")
    return FormalContext(tuple(objects), attributes, frozenset(incidence))


def write_context_csv(context: FormalContext, path: str) -> None:
    rows = context.row_masks
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(context.attributes))
        for g, name in enumerate(context.objects):
            writer.writerow([name] + [str((rows[g] >> m) & 1) for m in range(context.n_attributes)])
