"""Coordinate model of the n-party hypercube grid and its block decompositions.

A Block is a Cartesian cell of the grid described by one role per party:
a pinned basis coordinate, or one of the two Fourier families which occupy
the lower (eta) or upper (xi) d-1 coordinates of that party.  Everything
here is pure coordinate combinatorics; no amplitudes are involved.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Union

__all__ = [
    "Dims",
    "Fixed",
    "EtaFamily",
    "XiFamily",
    "ETA",
    "XI",
    "PartyRole",
    "Block",
    "role_support",
    "role_index_range",
    "support",
    "outer_layer",
    "DecompositionVerdict",
    "verify_decomposition",
    "projection_support",
    "grid_report",
    "role_to_json",
    "role_from_json",
]


@dataclass(frozen=True)
class Dims:
    """Per-party local dimensions."""

    per_party: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_party", tuple(int(d) for d in self.per_party))
        if len(self.per_party) < 2:
            raise ValueError("need at least two parties")
        if any(d < 2 for d in self.per_party):
            raise ValueError(f"every local dimension must be >= 2, got {self.per_party}")

    @property
    def n(self) -> int:
        return len(self.per_party)

    def __iter__(self):
        return iter(self.per_party)

    def __getitem__(self, i: int) -> int:
        return self.per_party[i]


@dataclass(frozen=True)
class Fixed:
    """Party pinned to a single basis coordinate k."""

    k: int


@dataclass(frozen=True)
class EtaFamily:
    """Party runs over the lower d-1 coordinates {0, ..., d-2}."""


@dataclass(frozen=True)
class XiFamily:
    """Party runs over the upper d-1 coordinates {1, ..., d-1}."""


ETA = EtaFamily()
XI = XiFamily()

PartyRole = Union[Fixed, EtaFamily, XiFamily]


def role_support(role: PartyRole, d: int) -> range:
    """Coordinates the role occupies in a party of dimension d."""
    if isinstance(role, Fixed):
        if not 0 <= role.k < d:
            raise ValueError(f"fixed coordinate {role.k} out of range for dimension {d}")
        return range(role.k, role.k + 1)
    if isinstance(role, EtaFamily):
        return range(0, d - 1)
    if isinstance(role, XiFamily):
        return range(1, d)
    raise TypeError(f"not a party role: {role!r}")


def role_index_range(role: PartyRole, d: int) -> range:
    """Family indices the role contributes (empty for a pinned party)."""
    if isinstance(role, Fixed):
        return range(0)
    return range(d - 1)


@dataclass(frozen=True)
class Block:
    """Named Cartesian cell: one role per party over the given dims."""

    id: str
    roles: tuple[PartyRole, ...]
    dims: Dims

    def __post_init__(self) -> None:
        object.__setattr__(self, "roles", tuple(self.roles))
        if len(self.roles) != self.dims.n:
            raise ValueError(
                f"block {self.id}: {len(self.roles)} roles for {self.dims.n} parties"
            )
        for role, d in zip(self.roles, self.dims):
            if not isinstance(role, Fixed) and d < 2:
                raise ValueError(f"block {self.id}: family role needs dimension >= 2")
            role_support(role, d)  # validates Fixed range

    def state_count(self) -> int:
        count = 1
        for role, d in zip(self.roles, self.dims):
            count *= len(role_index_range(role, d)) or 1
        return count


def support(block: Block) -> frozenset[tuple[int, ...]]:
    """All grid coordinates the block covers (Cartesian product of role supports)."""
    axes = [role_support(role, d) for role, d in zip(block.roles, block.dims)]
    return frozenset(itertools.product(*axes))


def outer_layer(dims: Dims) -> frozenset[tuple[int, ...]]:
    """Grid coordinates with at least one extremal component (0 or d-1).

    Defined intrinsically rather than by subtracting an interior cube, so it
    stays meaningful when some d equals 3 and the interior is flat.
    """
    full = itertools.product(*(range(d) for d in dims))
    return frozenset(
        t for t in full if any(c == 0 or c == d - 1 for c, d in zip(t, dims))
    )


@dataclass(frozen=True)
class DecompositionVerdict:
    """Outcome of a partition check; the first failure in lexicographic order."""

    kind: str  # "ok" | "overlap" | "gap" | "excess"
    block_ids: tuple[str, ...] = ()
    coordinate: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.kind == "ok"

    def __str__(self) -> str:
        if self.kind == "ok":
            return "ok"
        if self.kind == "overlap":
            return f"overlap({self.block_ids[0]}, {self.block_ids[1]}, {self.coordinate})"
        if self.kind == "gap":
            return f"gap({self.coordinate})"
        return f"excess({self.block_ids[0]}, {self.coordinate})"


def verify_decomposition(blocks: Iterable[Block], dims: Dims) -> DecompositionVerdict:
    """Check that block supports partition the outer layer of the grid."""
    owners: dict[tuple[int, ...], list[str]] = {}
    for block in blocks:
        if block.dims != dims:
            raise ValueError(f"block {block.id} has dims {block.dims}, expected {dims}")
        for coord in support(block):
            owners.setdefault(coord, []).append(block.id)
    layer = outer_layer(dims)
    for coord in sorted(set(owners) | layer):
        ids = owners.get(coord, [])
        if len(ids) > 1:
            return DecompositionVerdict("overlap", (ids[0], ids[1]), coord)
        if coord in layer and not ids:
            return DecompositionVerdict("gap", (), coord)
        if ids and coord not in layer:
            return DecompositionVerdict("excess", (ids[0],), coord)
    return DecompositionVerdict("ok")


def projection_support(block: Block, party: int) -> frozenset[tuple[int, ...]]:
    """Support of the block with the given party's coordinate dropped."""
    if not 0 <= party < block.dims.n:
        raise ValueError(f"party index {party} out of range")
    axes = [
        role_support(role, d)
        for p, (role, d) in enumerate(zip(block.roles, block.dims))
        if p != party
    ]
    return frozenset(itertools.product(*axes))


def _party_name(p: int) -> str:
    return chr(ord("A") + p) if p < 26 else f"P{p}"


def grid_report(
    blocks: Iterable[Block],
    dims: Dims,
    row_party: int,
    col_parties: tuple[int, ...] | None = None,
) -> str:
    """Text grid: one row per row-party coordinate, one column per complement tuple.

    Cells carry the id of the block owning that coordinate, or "." for
    uncovered (interior) cells.  Column order follows col_parties, default
    the remaining parties in index order.
    """
    if col_parties is None:
        col_parties = tuple(p for p in range(dims.n) if p != row_party)
    if sorted((row_party, *col_parties)) != list(range(dims.n)):
        raise ValueError("row and column parties must partition all parties")

    owners: dict[tuple[int, ...], str] = {}
    for block in blocks:
        for coord in support(block):
            owners[coord] = block.id

    compact = all(d <= 10 for d in dims)
    columns = list(itertools.product(*(range(dims[p]) for p in col_parties)))

    def col_label(tup: tuple[int, ...]) -> str:
        return "".join(map(str, tup)) if compact else ",".join(map(str, tup))

    def cell(r: int, tup: tuple[int, ...]) -> str:
        coord = [0] * dims.n
        coord[row_party] = r
        for p, c in zip(col_parties, tup):
            coord[p] = c
        return owners.get(tuple(coord), ".")

    width = max(
        [len(col_label(t)) for t in columns]
        + [len(cell(r, t)) for r in range(dims[row_party]) for t in columns]
    )
    header_cells = " ".join(col_label(t).rjust(width) for t in columns)
    row_hdr = _party_name(row_party)
    hdr_pad = max(len(row_hdr), len(f"{row_hdr}={dims[row_party] - 1}"))
    lines = [
        f"{_party_name(row_party)}|{''.join(_party_name(p) for p in col_parties)}".ljust(hdr_pad)
        + " " + header_cells
    ]
    for r in range(dims[row_party]):
        row_cells = " ".join(cell(r, t).rjust(width) for t in columns)
        lines.append(f"{row_hdr}={r}".ljust(hdr_pad) + " " + row_cells)
    return "\n".join(lines)


# --- JSON wire format -------------------------------------------------------


def role_to_json(role: PartyRole) -> str:
    if isinstance(role, Fixed):
        return f"fixed:{role.k}"
    if isinstance(role, EtaFamily):
        return "eta"
    if isinstance(role, XiFamily):
        return "xi"
    raise TypeError(f"not a party role: {role!r}")


def role_from_json(text: str) -> PartyRole:
    if text == "eta":
        return ETA
    if text == "xi":
        return XI
    if text.startswith("fixed:"):
        return Fixed(int(text.split(":", 1)[1]))
    raise ValueError(f"unknown role encoding: {text!r}")
