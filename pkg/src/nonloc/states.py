"""Unnormalized complex kets, root-of-unity state families, and product states.

States are deliberately kept unnormalized: every zero/orthogonality decision
in this package is made on raw inner products against an absolute tolerance,
so normalization would only add noise.  All values are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "TolerancePolicy",
    "DEFAULT_POLICY",
    "Ket",
    "ProductState",
    "root_of_unity",
    "basis",
    "eta",
    "xi",
    "inner",
    "product_inner",
    "kron_vector",
    "is_zero",
    "ket_to_json",
    "ket_from_json",
    "product_state_to_json",
    "product_state_from_json",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Absolute zero threshold and relative rank/pivot threshold."""

    zero_tol: float = 1e-9
    rank_tol: float = 1e-8

    def __post_init__(self) -> None:
        if not 0.0 < self.zero_tol < 1.0:
            raise ValueError(f"zero_tol must be in (0, 1), got {self.zero_tol}")
        if not 0.0 < self.rank_tol < 1.0:
            raise ValueError(f"rank_tol must be in (0, 1), got {self.rank_tol}")


DEFAULT_POLICY = TolerancePolicy()

# exact values at quarter turns so that +/-1 and +/-i amplitudes carry no
# floating-point residue into serialized output
_QUADRANT = (1 + 0j, 1j, -1 + 0j, -1j)


def root_of_unity(n: int, k: int) -> complex:
    """k-th power of exp(2*pi*i/n), with the exponent reduced mod n."""
    if n <= 0:
        raise ValueError(f"order must be positive, got {n}")
    k %= n
    if (4 * k) % n == 0:
        return _QUADRANT[(4 * k) // n]
    angle = 2.0 * math.pi * k / n
    return complex(math.cos(angle), math.sin(angle))


@dataclass(frozen=True)
class Ket:
    """Amplitude vector over one party's computational basis, not normalized."""

    dim: int
    amps: tuple[complex, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if len(self.amps) != self.dim:
            raise ValueError(f"expected {self.dim} amplitudes, got {len(self.amps)}")
        if all(a == 0 for a in self.amps):
            raise ValueError("all amplitudes are zero")

    def vector(self) -> np.ndarray:
        return np.array(self.amps, dtype=complex)


@lru_cache(maxsize=None)
def basis(k: int, d: int) -> Ket:
    """Computational basis ket |k> in dimension d."""
    if not 0 <= k < d:
        raise ValueError(f"basis index {k} out of range for dimension {d}")
    return Ket(d, tuple(1 + 0j if t == k else 0j for t in range(d)))


@lru_cache(maxsize=None)
def eta(s: int, d: int) -> Ket:
    """Fourier-type ket over the lower d-1 basis kets: sum_t w^(st) |t>.

    The phase base is the primitive (d-1)-th root of unity; the top
    coordinate |d-1> is left empty.
    """
    if d < 3:
        raise ValueError(f"dimension must be >= 3, got {d}")
    if not 0 <= s <= d - 2:
        raise ValueError(f"family index {s} out of range Z_{d - 1}")
    amps = [root_of_unity(d - 1, s * t) for t in range(d - 1)] + [0j]
    return Ket(d, tuple(amps))


@lru_cache(maxsize=None)
def xi(s: int, d: int) -> Ket:
    """Fourier-type ket over the upper d-1 basis kets: sum_t w^(st) |t+1>.

    Same phases as :func:`eta`, shifted up by one coordinate; |0> is empty.
    """
    if d < 3:
        raise ValueError(f"dimension must be >= 3, got {d}")
    if not 0 <= s <= d - 2:
        raise ValueError(f"family index {s} out of range Z_{d - 1}")
    amps = [0j] + [root_of_unity(d - 1, s * t) for t in range(d - 1)]
    return Ket(d, tuple(amps))


def inner(a: Ket, b: Ket) -> complex:
    """Hermitian inner product <a|b>, conjugate-linear in the first slot."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return sum(x.conjugate() * y for x, y in zip(a.amps, b.amps))


def is_zero(z: complex, policy: TolerancePolicy = DEFAULT_POLICY) -> bool:
    return abs(z) < policy.zero_tol


@dataclass(frozen=True)
class ProductState:
    """One ket per party; the full tensor is never formed implicitly."""

    parties: tuple[Ket, ...]
    label: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "parties", tuple(self.parties))
        if len(self.parties) < 2:
            raise ValueError("a product state needs at least two parties")
        for k in self.parties:
            if k.dim < 2:
                raise ValueError("every party must have dimension >= 2")

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    def dims(self) -> tuple[int, ...]:
        return tuple(k.dim for k in self.parties)


def product_inner(a: ProductState, b: ProductState) -> complex:
    """<a|b> factorized as the product of per-party inner products."""
    if a.n_parties != b.n_parties:
        raise ValueError(f"party count mismatch: {a.n_parties} vs {b.n_parties}")
    out = 1 + 0j
    for ka, kb in zip(a.parties, b.parties):
        out *= inner(ka, kb)
        # keep going even when a factor is exactly zero: cheap, and callers
        # may want the exact 0j rather than a short-circuit sentinel
    return out


def kron_vector(state: ProductState) -> np.ndarray:
    """Fully expanded tensor vector, row-major with party 0 most significant."""
    vec = state.parties[0].vector()
    for ket in state.parties[1:]:
        vec = np.kron(vec, ket.vector())
    return vec


# --- JSON wire format -------------------------------------------------------


def ket_to_json(ket: Ket) -> dict:
    return {"dim": ket.dim, "amps": [[a.real, a.imag] for a in ket.amps]}


def ket_from_json(obj: dict) -> Ket:
    return Ket(int(obj["dim"]), tuple(complex(re, im) for re, im in obj["amps"]))


def product_state_to_json(state: ProductState) -> dict:
    return {
        "parties": [ket_to_json(k) for k in state.parties],
        "label": state.label,
    }


def product_state_from_json(obj: dict) -> ProductState:
    return ProductState(
        tuple(ket_from_json(k) for k in obj["parties"]),
        obj.get("label"),
    )
