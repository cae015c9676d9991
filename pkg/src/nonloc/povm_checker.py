"""Brute-force triviality certification for orthogonality-preserving POVMs.

For an (n-1)-party measuring group, every pair of set states whose excluded
factors are non-orthogonal forces one complex linear constraint on the group
POVM element.  The element is parametrized as a Hermitian matrix (joint_dim^2
real unknowns), the constraints form a sparse homogeneous real system, and
the measurement is trivial exactly when the solution space is the line
spanned by the identity (nullity 1).

Systems with joint dimension <= 32 are decided by a dense SVD; larger ones
stream their rows through a blocked row-echelon eliminator with a hard
memory ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .constructions import OPS
from .states import DEFAULT_POLICY, TolerancePolicy

__all__ = [
    "MeasuringGroup",
    "ConstraintSystem",
    "TrivialityVerdict",
    "ResourceLimitError",
    "measuring_groups",
    "assemble",
    "nullity",
    "check_group",
    "certify",
    "identity_params",
    "witness_matrix",
    "DENSE_DIM_LIMIT",
    "DEFAULT_MEM_LIMIT",
]

DENSE_DIM_LIMIT = 32
DEFAULT_MEM_LIMIT = 4_000_000_000  # bytes of eliminator working memory
_CHUNK = 1024


class ResourceLimitError(RuntimeError):
    """Eliminator working set would exceed the configured memory ceiling."""


@dataclass(frozen=True)
class MeasuringGroup:
    """An (n-1)-party coalition measuring jointly; one party is excluded."""

    parties: tuple[int, ...]
    excluded: int
    joint_dim: int


def measuring_groups(dims: Sequence[int]) -> list[MeasuringGroup]:
    """The n groups, each omitting one party, ordered by excluded index.

    Group k keeps the parties in cyclic order k+1, ..., k-1.
    """
    dims = tuple(dims)
    n = len(dims)
    if n < 3:
        raise ValueError(f"need at least 3 parties, got {n}")
    groups = []
    for k in range(n):
        parties = tuple((k + 1 + i) % n for i in range(n - 1))
        joint = 1
        for p in parties:
            joint *= dims[p]
        groups.append(MeasuringGroup(parties, k, joint))
    return groups


@dataclass
class ConstraintSystem:
    """Sparse homogeneous real system over a POVM-element parametrization.

    Each row is (column indices, coefficients).  sources[r] records the
    state-pair labels and the re/im component the row came from.
    """

    joint_dim: int
    hermitian: bool
    n_params: int
    rows: list[tuple[np.ndarray, np.ndarray]]
    sources: list[tuple[str, str, str]]


def _n_params(joint_dim: int, hermitian: bool) -> int:
    return joint_dim * joint_dim if hermitian else 2 * joint_dim * joint_dim


def identity_params(cs: ConstraintSystem) -> np.ndarray:
    """Parameter assignment representing the identity matrix."""
    v = np.zeros(cs.n_params)
    n = cs.joint_dim
    if cs.hermitian:
        v[:n] = 1.0
    else:
        for i in range(n):
            v[2 * (i * n + i)] = 1.0
    return v


def _offdiag_base(i: np.ndarray, j: np.ndarray, n: int) -> np.ndarray:
    # rank of pair (i, j), i < j, in lexicographic order over the upper triangle
    return n + 2 * (i * (2 * n - i - 1) // 2 + (j - i - 1))


def group_vector(state, group: MeasuringGroup) -> np.ndarray:
    """Kronecker product of the state's group factors, in group party order."""
    vec = state.parties[group.parties[0]].vector()
    for p in group.parties[1:]:
        vec = np.kron(vec, state.parties[p].vector())
    return vec


def _pair_row(
    u: np.ndarray, v: np.ndarray, n: int, hermitian: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Complex coefficients of <u|E|v> over the chosen parametrization."""
    su = np.flatnonzero(u)
    sv = np.flatnonzero(v)
    c = np.outer(u[su].conj(), v[sv]).ravel()
    I = np.repeat(su, len(sv))
    J = np.tile(sv, len(su))
    if hermitian:
        diag = I == J
        up = I < J
        lo = I > J
        params = np.concatenate(
            [
                I[diag],
                _offdiag_base(I[up], J[up], n),
                _offdiag_base(I[up], J[up], n) + 1,
                _offdiag_base(J[lo], I[lo], n),
                _offdiag_base(J[lo], I[lo], n) + 1,
            ]
        )
        coeffs = np.concatenate(
            [c[diag], c[up], 1j * c[up], c[lo], -1j * c[lo]]
        )
    else:
        base = 2 * (I * n + J)
        params = np.concatenate([base, base + 1])
        coeffs = np.concatenate([c, 1j * c])
    uniq, inv = np.unique(params, return_inverse=True)
    acc = np.zeros(len(uniq), dtype=complex)
    np.add.at(acc, inv, coeffs)
    return uniq.astype(np.int64), acc


def _emit_rows(
    cols: np.ndarray, coeffs: np.ndarray, zero_tol: float
) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for part in (coeffs.real, coeffs.imag):
        keep = part != 0.0
        if keep.any() and np.abs(part[keep]).max() >= zero_tol:
            out.append((cols[keep].copy(), part[keep].copy()))
        else:
            out.append(None)
    return out


def _active_pairs(
    ops: OPS, group: MeasuringGroup, policy: TolerancePolicy
) -> Iterator[tuple[int, int]]:
    vecs = np.array([s.parties[group.excluded].vector() for s in ops.states])
    gram = np.abs(vecs.conj() @ vecs.T)
    m = len(ops.states)
    for a in range(m):
        for b in range(a + 1, m):
            if gram[a, b] >= policy.zero_tol:
                yield a, b


def _row_stream(
    ops: OPS,
    group: MeasuringGroup,
    policy: TolerancePolicy,
    hermitian: bool,
) -> Iterator[tuple[np.ndarray, np.ndarray, tuple[str, str, str]]]:
    gvecs = [group_vector(s, group) for s in ops.states]
    labels = [s.label or f"#{i}" for i, s in enumerate(ops.states)]
    for a, b in _active_pairs(ops, group, policy):
        cols, coeffs = _pair_row(gvecs[a], gvecs[b], group.joint_dim, hermitian)
        re_row, im_row = _emit_rows(cols, coeffs, policy.zero_tol)
        if re_row is not None:
            yield re_row[0], re_row[1], (labels[a], labels[b], "re")
        if im_row is not None:
            yield im_row[0], im_row[1], (labels[a], labels[b], "im")


def assemble(
    ops: OPS,
    group: MeasuringGroup,
    policy: TolerancePolicy = DEFAULT_POLICY,
    hermitian: bool = True,
) -> ConstraintSystem:
    """Materialize the constraint system for one measuring group."""
    rows: list[tuple[np.ndarray, np.ndarray]] = []
    sources: list[tuple[str, str, str]] = []
    for cols, vals, src in _row_stream(ops, group, policy, hermitian):
        rows.append((cols, vals))
        sources.append(src)
    return ConstraintSystem(
        joint_dim=group.joint_dim,
        hermitian=hermitian,
        n_params=_n_params(group.joint_dim, hermitian),
        rows=rows,
        sources=sources,
    )


# --- rank / null space ------------------------------------------------------


@dataclass
class _EchelonState:
    pivrows: np.ndarray  # npiv x n_params, unit pivots, reduced against earlier
    pivcols: list[int]


def _dense_solve(
    rows: Sequence[tuple[np.ndarray, np.ndarray]],
    n_params: int,
    policy: TolerancePolicy,
    want_witness: bool,
    identity: np.ndarray,
) -> tuple[int, np.ndarray | None]:
    if not rows:
        rank = 0
        nullspace = np.eye(n_params)
    else:
        A = np.zeros((len(rows), n_params))
        for r, (cols, vals) in enumerate(rows):
            A[r, cols] = vals
        if want_witness:
            _, s, vt = np.linalg.svd(A, full_matrices=True)
            rank = int((s > policy.rank_tol * s[0]).sum()) if s.size else 0
            nullspace = vt[rank:]
        else:
            s = np.linalg.svd(A, compute_uv=False)
            rank = int((s > policy.rank_tol * s[0]).sum()) if s.size else 0
            nullspace = None
    if not want_witness or nullspace is None or n_params - rank <= 1:
        return rank, None
    id_dir = identity / np.linalg.norm(identity)
    for k in range(n_params):
        w = nullspace.T @ nullspace[:, k]
        w -= (id_dir @ w) * id_dir
        peak = np.abs(w).max()
        if peak > 1e-6:
            return rank, w / w[int(np.abs(w).argmax())]
    return rank, None


def _streaming_solve(
    row_iter: Iterable[tuple[np.ndarray, np.ndarray]],
    n_params: int,
    policy: TolerancePolicy,
    want_witness: bool,
    identity: np.ndarray,
    mem_limit: int,
) -> tuple[int, np.ndarray | None]:
    """Blocked streaming row echelon with a hard working-set ceiling.

    Pivot rows are kept dense and mutually reduced only against earlier
    pivots, so the pivot-column submatrix is unit upper triangular and a
    whole chunk reduces with one triangular solve plus one matmul.
    """
    pivrows = np.empty((0, n_params))
    pivcols: list[int] = []
    exhausted = False
    it = iter(row_iter)
    while not exhausted:
        chunk: list[tuple[np.ndarray, np.ndarray]] = []
        while len(chunk) < _CHUNK:
            nxt = next(it, None)
            if nxt is None:
                exhausted = True
                break
            chunk.append(nxt)
        if not chunk:
            break
        npiv = len(pivcols)
        need = 8 * (
            (npiv + len(chunk)) * n_params  # pivots + incoming block
            + npiv * npiv  # gathered triangular factor
            + len(chunk) * max(npiv, 1)  # solve workspace
        )
        if need > mem_limit:
            raise ResourceLimitError(
                f"eliminator working set would need ~{need / 1e9:.1f} GB "
                f"(ceiling {mem_limit / 1e9:.1f} GB); "
                "use the lemma-engine check instead"
            )
        X = np.zeros((len(chunk), n_params))
        norms0 = np.empty(len(chunk))
        for r, (cols, vals) in enumerate(chunk):
            X[r, cols] = vals
            norms0[r] = np.abs(vals).max()
        if npiv:
            M = pivrows[:, pivcols]
            W = solve_triangular(
                M.T, X[:, pivcols].T, lower=True, unit_diagonal=True
            ).T
            X -= W @ pivrows
        new_rows = []
        for r in range(len(chunk)):
            x = X[r]
            c = int(np.abs(x).argmax())
            if abs(x[c]) <= policy.rank_tol * norms0[r]:
                continue
            x = x / x[c]
            # clear the new pivot column from the rest of the chunk now so
            # later chunk rows stay reduced against every earlier pivot
            rest = X[r + 1 :]
            coef = rest[:, c].copy()
            if coef.any():
                rest -= np.outer(coef, x)
            new_rows.append(x)
            pivcols.append(c)
        if new_rows:
            pivrows = np.vstack([pivrows] + new_rows)
        if len(pivcols) >= n_params - 1:
            # the identity solves every row by construction, so rank cannot
            # reach n_params; stop reading once nullity has hit its floor
            break
    rank = len(pivcols)
    if not want_witness or n_params - rank <= 1:
        return rank, None
    id_dir = identity / np.linalg.norm(identity)
    free = sorted(set(range(n_params)) - set(pivcols))
    M = pivrows[:, pivcols] if rank else np.empty((0, 0))
    for f in free:
        w = np.zeros(n_params)
        w[f] = 1.0
        if rank:
            y = solve_triangular(M, -pivrows[:, f], lower=False, unit_diagonal=True)
            w[pivcols] = y
        w -= (id_dir @ w) * id_dir
        peak = np.abs(w).max()
        if peak > 1e-6:
            return rank, w / w[int(np.abs(w).argmax())]
    return rank, None


def nullity(
    cs: ConstraintSystem,
    policy: TolerancePolicy = DEFAULT_POLICY,
    method: str = "auto",
    mem_limit: int = DEFAULT_MEM_LIMIT,
) -> int:
    """Real dimension of the solution space of the constraint system."""
    rank, _ = _solve(cs.rows, cs, policy, method, False, mem_limit)
    return cs.n_params - rank


def _solve(rows, cs, policy, method, want_witness, mem_limit):
    if method == "auto":
        method = "dense" if cs.joint_dim <= DENSE_DIM_LIMIT else "stream"
    ident = identity_params(cs)
    if method == "dense":
        return _dense_solve(list(rows), cs.n_params, policy, want_witness, ident)
    if method == "stream":
        return _streaming_solve(rows, cs.n_params, policy, want_witness, ident, mem_limit)
    raise ValueError(f"unknown method {method!r}")


def witness_matrix(params: np.ndarray, joint_dim: int, hermitian: bool = True) -> np.ndarray:
    """Expand a parameter vector back into the POVM-element matrix."""
    n = joint_dim
    E = np.zeros((n, n), dtype=complex)
    if hermitian:
        E[np.diag_indices(n)] = params[:n]
        k = n
        for i in range(n):
            for j in range(i + 1, n):
                E[i, j] = params[k] + 1j * params[k + 1]
                E[j, i] = params[k] - 1j * params[k + 1]
                k += 2
    else:
        for i in range(n):
            for j in range(n):
                E[i, j] = params[2 * (i * n + j)] + 1j * params[2 * (i * n + j) + 1]
    return E


@dataclass
class TrivialityVerdict:
    """Nullity decision for one measuring group."""

    group: MeasuringGroup
    nullity: int
    trivial: bool
    witness: np.ndarray | None  # Hermitian matrix, independent of identity

    def __post_init__(self) -> None:
        if self.trivial and self.witness is not None:
            raise ValueError("trivial verdicts carry no witness")


def check_group(
    ops: OPS,
    group: MeasuringGroup,
    policy: TolerancePolicy = DEFAULT_POLICY,
    method: str = "auto",
    mem_limit: int = DEFAULT_MEM_LIMIT,
) -> TrivialityVerdict:
    """Assemble and decide one group; attach a witness when nontrivial."""
    if method == "auto" and group.joint_dim <= DENSE_DIM_LIMIT:
        cs = assemble(ops, group, policy)
        rows = cs.rows
    else:
        # avoid materializing the big systems: stream rows straight into
        # the eliminator
        cs = ConstraintSystem(
            joint_dim=group.joint_dim,
            hermitian=True,
            n_params=_n_params(group.joint_dim, True),
            rows=[],
            sources=[],
        )
        rows = (
            (cols, vals) for cols, vals, _ in _row_stream(ops, group, policy, True)
        )
    rank, w = _solve(rows, cs, policy, method, True, mem_limit)
    nul = cs.n_params - rank
    witness = witness_matrix(w, group.joint_dim) if w is not None else None
    return TrivialityVerdict(group, nul, nul == 1, witness)


def certify(
    ops: OPS,
    policy: TolerancePolicy = DEFAULT_POLICY,
    method: str = "auto",
    mem_limit: int = DEFAULT_MEM_LIMIT,
) -> tuple[list[TrivialityVerdict], bool]:
    """Check every measuring group; overall true iff all of them are trivial."""
    verdicts = [
        check_group(ops, g, policy, method, mem_limit)
        for g in measuring_groups(ops.dims.per_party)
    ]
    return verdicts, all(v.trivial for v in verdicts)
