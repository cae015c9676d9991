"""The shipped 3-, 4-, and 5-party orthogonal product set constructions.

Each construction decomposes the outer layer of the coordinate grid into
named blocks (C1..Ck on one side, D1..Dk on the mirrored side) and fills
every block with eta/xi-family product states.  Index ranges always come
from the party a family factor actually lives on; see the C3/D3 note in
the four-party table.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass

import numpy as np

from .hypercube import (
    ETA,
    XI,
    Block,
    Dims,
    EtaFamily,
    Fixed,
    PartyRole,
    XiFamily,
    projection_support,
    role_from_json,
    role_index_range,
    role_to_json,
)
from .states import Ket, ProductState, basis, eta, ket_from_json, ket_to_json, xi
from .states import product_state_from_json, product_state_to_json

__all__ = [
    "OPS",
    "Family",
    "tripartite",
    "fourpartite",
    "fivepartite",
    "family",
    "size_formula",
    "block_states",
    "max_pairwise_overlap",
    "embed",
    "computational_basis_ops",
    "ops_to_json",
    "ops_from_json",
    "dumps_canonical",
    "parse_label",
]


@dataclass(frozen=True)
class OPS:
    """An orthogonal product set with its generating block decomposition.

    Ad-hoc state sets (no block structure) are allowed and carry blocks=().
    """

    dims: Dims
    blocks: tuple[Block, ...]
    states: tuple[ProductState, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "states", tuple(self.states))
        for s in self.states:
            if s.dims() != self.dims.per_party:
                raise ValueError(f"state {s.label!r} has dims {s.dims()}, expected {self.dims.per_party}")

    @property
    def n_parties(self) -> int:
        return self.dims.n

    def block_by_id(self, block_id: str) -> Block:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise ValueError(f"unknown block id {block_id!r}")


@dataclass(frozen=True)
class Family:
    """All states of a block sharing one ket on a distinguished party.

    Members are the remaining factors of those states, in the original
    party order with fixed_party dropped (party_order records which global
    parties the member factors belong to).
    """

    block_id: str
    fixed_party: int
    fixed_ket: Ket
    family_index: int
    members: tuple[ProductState, ...]
    span_support: frozenset[tuple[int, ...]]
    party_order: tuple[int, ...]


_LABEL_RE = re.compile(r"^([A-Za-z]+\d*)\[([\d,]*)\]$")


def _make_label(block_id: str, idx: tuple[int, ...]) -> str:
    return f"{block_id}[{','.join(map(str, idx))}]"


def parse_label(label: str) -> tuple[str, tuple[int, ...]]:
    m = _LABEL_RE.match(label or "")
    if not m:
        raise ValueError(f"not a block-tagged label: {label!r}")
    idx = tuple(int(x) for x in m.group(2).split(",")) if m.group(2) else ()
    return m.group(1), idx


def _role_ket(role: PartyRole, d: int, s: int | None) -> Ket:
    if isinstance(role, Fixed):
        return basis(role.k, d)
    if isinstance(role, EtaFamily):
        return eta(s, d)
    if isinstance(role, XiFamily):
        return xi(s, d)
    raise TypeError(f"not a party role: {role!r}")


def block_states(block: Block) -> list[ProductState]:
    """Every product state of a block, family indices in lexicographic order."""
    family_parties = [
        p for p, (role, d) in enumerate(zip(block.roles, block.dims))
        if role_index_range(role, d)
    ]
    ranges = [role_index_range(block.roles[p], block.dims[p]) for p in family_parties]
    out = []
    for idx in itertools.product(*ranges):
        assignment = dict(zip(family_parties, idx))
        kets = tuple(
            _role_ket(role, d, assignment.get(p))
            for p, (role, d) in enumerate(zip(block.roles, block.dims))
        )
        out.append(ProductState(kets, _make_label(block.id, idx)))
    return out


def _build_ops(dims: Dims, blocks: list[Block]) -> OPS:
    states: list[ProductState] = []
    for block in blocks:
        states.extend(block_states(block))
    return OPS(dims, tuple(blocks), tuple(states))


def size_formula(dims: Dims) -> int:
    """Outer-layer cardinality: prod(d) - prod(d - 2)."""
    total = interior = 1
    for d in dims:
        total *= d
        interior *= d - 2
    return total - interior


def _require_dims(values: tuple[int, ...], n: int) -> Dims:
    if len(values) != n:
        raise ValueError(f"expected {n} local dimensions, got {len(values)}")
    if any(d < 3 for d in values):
        raise ValueError(f"every local dimension must be >= 3, got {values}")
    return Dims(values)


def tripartite(dA: int, dB: int, dC: int) -> OPS:
    """Three-party construction: 8 blocks tiling the outer layer."""
    dims = _require_dims((dA, dB, dC), 3)
    top = [d - 1 for d in dims]
    blocks = [
        Block("C1", (XI, Fixed(0), ETA), dims),
        Block("C2", (XI, ETA, Fixed(top[2])), dims),
        Block("C3", (Fixed(top[0]), XI, ETA), dims),
        Block("C4", (Fixed(top[0]), Fixed(top[1]), Fixed(top[2])), dims),
        Block("D1", (ETA, Fixed(top[1]), XI), dims),
        Block("D2", (ETA, XI, Fixed(0)), dims),
        Block("D3", (Fixed(0), ETA, XI), dims),
        Block("D4", (Fixed(0), Fixed(0), Fixed(0)), dims),
    ]
    return _build_ops(dims, blocks)


def fourpartite(dA: int, dB: int, dC: int, dD: int) -> OPS:
    """Four-party construction: 16 blocks tiling the outer layer.

    The source table prints the C3/D3 index ranges with the last factor
    ranged by party D's dimension although the factor sits on party C; the
    roles below follow the ket expressions, so C3/D3 range over d_C - 1.
    """
    dims = _require_dims((dA, dB, dC, dD), 4)
    top = [d - 1 for d in dims]
    blocks = [
        Block("C1", (XI, ETA, Fixed(0), XI), dims),
        Block("C2", (XI, Fixed(top[1]), ETA, ETA), dims),
        Block("C3", (XI, XI, XI, Fixed(top[3])), dims),
        Block("C4", (XI, Fixed(top[1]), Fixed(0), Fixed(top[3])), dims),
        Block("C5", (Fixed(top[0]), ETA, XI, ETA), dims),
        Block("C6", (Fixed(top[0]), ETA, Fixed(0), Fixed(0)), dims),
        Block("C7", (Fixed(top[0]), Fixed(0), XI, Fixed(top[3])), dims),
        Block("C8", (Fixed(top[0]), Fixed(top[1]), Fixed(top[2]), ETA), dims),
        Block("D1", (ETA, XI, Fixed(top[2]), ETA), dims),
        Block("D2", (ETA, Fixed(0), XI, XI), dims),
        Block("D3", (ETA, ETA, ETA, Fixed(0)), dims),
        Block("D4", (ETA, Fixed(0), Fixed(top[2]), Fixed(0)), dims),
        Block("D5", (Fixed(0), XI, ETA, XI), dims),
        Block("D6", (Fixed(0), XI, Fixed(top[2]), Fixed(top[3])), dims),
        Block("D7", (Fixed(0), Fixed(top[1]), ETA, Fixed(0)), dims),
        Block("D8", (Fixed(0), Fixed(0), Fixed(0), XI), dims),
    ]
    return _build_ops(dims, blocks)


def fivepartite(dA: int, dB: int, dC: int, dD: int, dE: int) -> OPS:
    """Five-party construction: 32 blocks tiling the outer layer."""
    dims = _require_dims((dA, dB, dC, dD, dE), 5)
    top = [d - 1 for d in dims]
    blocks = [
        Block("C1", (XI, Fixed(top[1]), ETA, XI, ETA), dims),
        Block("C2", (XI, ETA, Fixed(0), XI, ETA), dims),
        Block("C3", (XI, ETA, XI, Fixed(top[3]), ETA), dims),
        Block("C4", (XI, ETA, XI, ETA, Fixed(0)), dims),
        Block("C5", (XI, Fixed(top[1]), Fixed(top[2]), ETA, Fixed(0)), dims),
        Block("C6", (XI, Fixed(top[1]), ETA, Fixed(0), Fixed(0)), dims),
        Block("C7", (XI, Fixed(top[1]), Fixed(top[2]), Fixed(top[3]), ETA), dims),
        Block("C8", (XI, ETA, Fixed(0), Fixed(0), Fixed(0)), dims),
        Block("C9", (Fixed(top[0]), ETA, XI, ETA, XI), dims),
        Block("C10", (Fixed(top[0]), Fixed(top[1]), Fixed(top[2]), Fixed(top[3]), Fixed(top[4])), dims),
        Block("C11", (Fixed(top[0]), ETA, XI, Fixed(top[3]), Fixed(top[4])), dims),
        Block("C12", (Fixed(top[0]), ETA, Fixed(0), Fixed(0), XI), dims),
        Block("C13", (Fixed(top[0]), ETA, Fixed(0), XI, Fixed(top[4])), dims),
        Block("C14", (Fixed(top[0]), Fixed(top[1]), ETA, XI, Fixed(top[4])), dims),
        Block("C15", (Fixed(top[0]), Fixed(top[1]), ETA, Fixed(0), XI), dims),
        Block("C16", (Fixed(top[0]), Fixed(top[1]), Fixed(top[2]), ETA, XI), dims),
        Block("D1", (ETA, Fixed(0), XI, ETA, XI), dims),
        Block("D2", (ETA, XI, Fixed(top[2]), ETA, XI), dims),
        Block("D3", (ETA, XI, ETA, Fixed(0), XI), dims),
        Block("D4", (ETA, XI, ETA, XI, Fixed(top[4])), dims),
        Block("D5", (ETA, Fixed(0), Fixed(0), XI, Fixed(top[4])), dims),
        Block("D6", (ETA, Fixed(0), XI, Fixed(top[3]), Fixed(top[4])), dims),
        Block("D7", (ETA, Fixed(0), Fixed(0), Fixed(0), XI), dims),
        Block("D8", (ETA, XI, Fixed(top[2]), Fixed(top[3]), Fixed(top[4])), dims),
        Block("D9", (Fixed(0), XI, ETA, XI, ETA), dims),
        Block("D10", (Fixed(0), Fixed(0), Fixed(0), Fixed(0), Fixed(0)), dims),
        Block("D11", (Fixed(0), XI, ETA, Fixed(0), Fixed(0)), dims),
        Block("D12", (Fixed(0), XI, Fixed(top[2]), Fixed(top[3]), ETA), dims),
        Block("D13", (Fixed(0), XI, Fixed(top[2]), ETA, Fixed(0)), dims),
        Block("D14", (Fixed(0), Fixed(0), XI, ETA, Fixed(0)), dims),
        Block("D15", (Fixed(0), Fixed(0), XI, Fixed(top[3]), ETA), dims),
        Block("D16", (Fixed(0), Fixed(0), Fixed(0), XI, ETA), dims),
    ]
    return _build_ops(dims, blocks)


def family(ops: OPS, block_id: str, party: int, family_index: int = 0) -> Family:
    """Fix one party of a block at a family (or pinned) ket; collect the rest.

    For an eta/xi role the family_index selects the fixed ket; for a pinned
    party it is ignored and every state of the block contributes.
    """
    block = ops.block_by_id(block_id)
    if not 0 <= party < ops.n_parties:
        raise ValueError(f"party index {party} out of range")
    role = block.roles[party]
    d = block.dims[party]
    if isinstance(role, Fixed):
        fixed_ket = basis(role.k, d)
        effective_index = 0
        keep = lambda idx: True  # noqa: E731
    else:
        if family_index not in role_index_range(role, d):
            raise ValueError(f"family index {family_index} out of range Z_{d - 1}")
        fixed_ket = _role_ket(role, d, family_index)
        effective_index = family_index
        family_parties = [
            p for p, (r, dd) in enumerate(zip(block.roles, block.dims))
            if role_index_range(r, dd)
        ]
        pos = family_parties.index(party)
        keep = lambda idx: idx[pos] == family_index  # noqa: E731

    # members come from the OPS itself, not from a regenerated block, so
    # deleted or embedded states are reflected faithfully
    members = []
    for state in ops.states:
        try:
            bid, idx = parse_label(state.label)
        except ValueError:
            continue
        if bid != block_id or not keep(idx):
            continue
        rest = tuple(k for p, k in enumerate(state.parties) if p != party)
        members.append(ProductState(rest, state.label))
    members = tuple(members)
    return Family(
        block_id=block_id,
        fixed_party=party,
        fixed_ket=fixed_ket,
        family_index=effective_index,
        members=members,
        span_support=projection_support(block, party),
        party_order=tuple(p for p in range(ops.n_parties) if p != party),
    )


def max_pairwise_overlap(ops: OPS) -> float:
    """Largest |<a|b>| over distinct state pairs, via per-party Gram products."""
    m = len(ops.states)
    if m < 2:
        return 0.0
    total = np.ones((m, m), dtype=complex)
    for p in range(ops.n_parties):
        vecs = np.array([s.parties[p].vector() for s in ops.states])
        total *= vecs.conj() @ vecs.T
    np.fill_diagonal(total, 0)
    return float(np.abs(total).max())


def embed(ops: OPS, new_dims: tuple[int, ...]) -> OPS:
    """Pad every party with extra zero-amplitude basis directions.

    Blocks keep their original dims so their coordinate supports still
    describe the embedded states; only the OPS-level dims grow.
    """
    if len(new_dims) != ops.n_parties:
        raise ValueError("party count mismatch")
    if any(nd < d for nd, d in zip(new_dims, ops.dims)):
        raise ValueError("new dims must not shrink any party")
    states = tuple(
        ProductState(
            tuple(
                Ket(nd, k.amps + (0j,) * (nd - k.dim))
                for k, nd in zip(s.parties, new_dims)
            ),
            s.label,
        )
        for s in ops.states
    )
    return OPS(Dims(new_dims), ops.blocks, states)


def computational_basis_ops(dims: tuple[int, ...]) -> OPS:
    """Full computational product basis as an ad-hoc OPS (no blocks)."""
    dd = Dims(dims)
    states = tuple(
        ProductState(
            tuple(basis(c, d) for c, d in zip(coord, dd)),
            "B[" + ",".join(map(str, coord)) + "]",
        )
        for coord in itertools.product(*(range(d) for d in dd))
    )
    return OPS(dd, (), states)


# --- JSON wire format -------------------------------------------------------


def ops_to_json(ops: OPS) -> dict:
    return {
        "dims": list(ops.dims.per_party),
        "blocks": [
            {
                "id": b.id,
                "dims": list(b.dims.per_party),
                "roles": [role_to_json(r) for r in b.roles],
            }
            for b in ops.blocks
        ],
        "states": [product_state_to_json(s) for s in ops.states],
    }


def ops_from_json(obj: dict) -> OPS:
    dims = Dims(tuple(obj["dims"]))
    blocks = tuple(
        Block(
            e["id"],
            tuple(role_from_json(r) for r in e["roles"]),
            Dims(tuple(e.get("dims", obj["dims"]))),
        )
        for e in obj.get("blocks", [])
    )
    states = tuple(product_state_from_json(s) for s in obj["states"])
    return OPS(dims, blocks, states)


def dumps_canonical(obj: dict) -> str:
    """Stable serialization: fixed separators, two-space indent, newline end."""
    return json.dumps(obj, indent=2, separators=(",", ": ")) + "\n"
