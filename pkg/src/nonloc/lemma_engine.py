"""Validated-inference certification of POVM triviality via the block lemmas.

Two facts about the group POVM element E drive everything:

* block-zeros: if two orthogonal families span disjoint coordinate sets S, T
  and their fixed kets on the excluded party overlap, then the S x T and
  T x S submatrices of E vanish;
* block-trivial: if a family spans S, one coordinate u_t of S has a fully
  zeroed row against the rest of S, and u_t overlaps every family member,
  then E restricted to S is a multiple of the identity.

A KnowledgeBase records proven-zero cells of E plus diagonal-equality
classes, every rule application re-verifies its hypotheses numerically, and
a proof succeeds when the whole joint basis collapses into one
scalar-certified class.  Scripts are plain data, so the generated proofs can
be serialized, replayed, and re-checked from their logs alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constructions import OPS, Family, family
from .hypercube import EtaFamily, Fixed, XiFamily
from .povm_checker import MeasuringGroup, measuring_groups
from .states import DEFAULT_POLICY, TolerancePolicy, inner

__all__ = [
    "RuleError",
    "HypothesisError",
    "UnsupportedOpsError",
    "FamilyRef",
    "ProofStep",
    "LogEntry",
    "KnowledgeBase",
    "ProofCertificate",
    "apply_block_zeros",
    "apply_block_trivial",
    "merge_on_overlap",
    "script_for",
    "run",
    "certify_all",
    "steps_to_json",
    "steps_from_json",
    "certificate_to_json",
    "recheck_certificate",
]


class RuleError(ValueError):
    """A rule was applied to arguments it does not accept."""


class HypothesisError(RuleError):
    """A lemma hypothesis failed its numeric or knowledge-base check."""


class UnsupportedOpsError(RuleError):
    """No proof script could be derived for this state set."""


@dataclass(frozen=True)
class FamilyRef:
    """Serializable pointer to a block family at the group's excluded party."""

    block_id: str
    family_index: int = 0


@dataclass(frozen=True)
class ProofStep:
    rule: str  # block_zeros | block_trivial | merge_on_overlap | symmetry_restart
    fam_s: FamilyRef | None = None
    fam_t: FamilyRef | None = None
    u_t: tuple[int, ...] | None = None
    set_p: tuple[tuple[int, ...], ...] | None = None
    set_q: tuple[tuple[int, ...], ...] | None = None
    note: str | None = None


@dataclass(frozen=True)
class LogEntry:
    """One applied rule instance with its re-verified hypothesis values."""

    step: int
    rule: str
    data: dict


class KnowledgeBase:
    """Proven facts about E on one measuring group's joint basis.

    zero[i, j] records a proven <i|E|j> = 0 (kept symmetric); the union-find
    tracks proven equality of diagonal entries.  A coordinate set is
    scalar-certified when its members share one diagonal class and all its
    internal off-diagonal cells are proven zero.  Facts only grow.
    """

    def __init__(self, group_dims: Sequence[int]):
        self.group_dims = tuple(int(d) for d in group_dims)
        self.basis: list[tuple[int, ...]] = list(
            itertools.product(*(range(d) for d in self.group_dims))
        )
        self.index = {t: i for i, t in enumerate(self.basis)}
        m = len(self.basis)
        self.zero = np.zeros((m, m), dtype=bool)
        self._parent = list(range(m))
        self.log: list[LogEntry] = []

    @property
    def size(self) -> int:
        return len(self.basis)

    def find(self, i: int) -> int:
        while self._parent[i] != i:
            self._parent[i] = self._parent[self._parent[i]]
            i = self._parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self._parent[max(ri, rj)] = min(ri, rj)

    def indices(self, coords: Iterable[tuple[int, ...]]) -> list[int]:
        out = []
        for c in coords:
            c = tuple(c)
            if c not in self.index:
                raise RuleError(f"coordinate {c} is not a basis element of this group")
            out.append(self.index[c])
        return out

    def is_scalar_certified(self, coords: Iterable[tuple[int, ...]]) -> bool:
        idx = self.indices(coords)
        if not idx:
            return False
        root = self.find(idx[0])
        if any(self.find(i) != root for i in idx[1:]):
            return False
        sub = self.zero[np.ix_(idx, idx)]
        return bool(np.all(sub | np.eye(len(idx), dtype=bool)))

    def fully_certified(self) -> bool:
        return self.is_scalar_certified(self.basis)

    def mark_zero(self, rows: Sequence[int], cols: Sequence[int]) -> None:
        self.zero[np.ix_(rows, cols)] = True
        self.zero[np.ix_(cols, rows)] = True


# --- family resolution on the group basis ------------------------------------


@dataclass
class _FamilyData:
    ref: FamilyRef
    fixed_ket_vec: np.ndarray
    member_vecs: np.ndarray  # k x joint_dim, group party order
    member_labels: list[str]
    support_idx: list[int]  # sorted kb indices
    support_coords: list[tuple[int, ...]]  # group party order
    checks: dict | None = None


def _to_group_coords(
    coords: Iterable[tuple[int, ...]],
    party_order: tuple[int, ...],
    group: MeasuringGroup,
) -> list[tuple[int, ...]]:
    perm = [party_order.index(p) for p in group.parties]
    return [tuple(c[k] for k in perm) for c in coords]


def _resolve_family(
    kb: KnowledgeBase, ops: OPS, group: MeasuringGroup, fam: Family
) -> _FamilyData:
    if fam.fixed_party != group.excluded:
        raise RuleError(
            f"family fixes party {fam.fixed_party}, but the group excludes "
            f"party {group.excluded}"
        )
    vecs = []
    for member in fam.members:
        by_party = dict(zip(fam.party_order, member.parties))
        vec = by_party[group.parties[0]].vector()
        for p in group.parties[1:]:
            vec = np.kron(vec, by_party[p].vector())
        vecs.append(vec)
    coords = sorted(_to_group_coords(fam.span_support, fam.party_order, group))
    idx = kb.indices(coords)
    return _FamilyData(
        ref=FamilyRef(fam.block_id, fam.family_index),
        fixed_ket_vec=fam.fixed_ket.vector(),
        member_vecs=np.array(vecs) if vecs else np.zeros((0, kb.size)),
        member_labels=[m.label or "?" for m in fam.members],
        support_idx=idx,
        support_coords=coords,
    )


def _validate_family(fd: _FamilyData, policy: TolerancePolicy) -> dict:
    """Re-verify that the members are orthogonal and span their support."""
    name = f"{fd.ref.block_id}(index {fd.ref.family_index})"
    k = len(fd.member_labels)
    s = len(fd.support_idx)
    if k != s:
        raise HypothesisError(
            f"spanning hypothesis failed for {name}: {k} members for a "
            f"support of {s} coordinates"
        )
    sub = fd.member_vecs[:, fd.support_idx]
    mask = np.ones(fd.member_vecs.shape[1], dtype=bool)
    mask[fd.support_idx] = False
    leak = float(np.abs(fd.member_vecs[:, mask]).max()) if mask.any() and k else 0.0
    if leak >= policy.zero_tol:
        raise HypothesisError(
            f"support hypothesis failed for {name}: amplitude {leak:.3e} "
            "outside the claimed span"
        )
    gram = sub @ sub.conj().T
    off = gram - np.diag(np.diag(gram))
    max_overlap = float(np.abs(off).max()) if k else 0.0
    if max_overlap >= policy.zero_tol:
        raise HypothesisError(
            f"orthogonality hypothesis failed for {name}: member overlap "
            f"{max_overlap:.3e}"
        )
    svals = np.linalg.svd(sub, compute_uv=False) if k else np.zeros(0)
    rank = int((svals > policy.rank_tol * svals[0]).sum()) if svals.size else 0
    if rank != s:
        raise HypothesisError(
            f"rank hypothesis failed for {name}: rank {rank} over a support "
            f"of {s} coordinates"
        )
    checks = {
        "members": k,
        "support": s,
        "rank": rank,
        "max_internal_overlap": max_overlap,
        "max_leak": leak,
    }
    fd.checks = checks
    return checks


# --- inference rules ----------------------------------------------------------


def apply_block_zeros(
    kb: KnowledgeBase,
    ops: OPS,
    group: MeasuringGroup,
    fam_s: Family,
    fam_t: Family,
    policy: TolerancePolicy = DEFAULT_POLICY,
) -> KnowledgeBase:
    """Conclude that E vanishes on S x T and T x S for the two family spans."""
    fs = _resolve_family(kb, ops, group, fam_s)
    ft = _resolve_family(kb, ops, group, fam_t)
    checks_s = _validate_family(fs, policy)
    checks_t = _validate_family(ft, policy)
    if set(fs.support_idx) & set(ft.support_idx):
        raise RuleError(
            f"block-zeros needs disjoint supports, {fs.ref.block_id} and "
            f"{ft.ref.block_id} overlap"
        )
    witness = abs(
        complex(np.vdot(fs.fixed_ket_vec, ft.fixed_ket_vec))
    )
    if witness < policy.zero_tol:
        raise HypothesisError(
            f"non-orthogonality witness failed: fixed kets of "
            f"{fs.ref.block_id} and {ft.ref.block_id} have overlap "
            f"{witness:.3e} on the excluded party"
        )
    kb.mark_zero(fs.support_idx, ft.support_idx)
    kb.log.append(
        LogEntry(
            step=len(kb.log),
            rule="block_zeros",
            data={
                "fam_s": {"block_id": fs.ref.block_id, "family_index": fs.ref.family_index},
                "fam_t": {"block_id": ft.ref.block_id, "family_index": ft.ref.family_index},
                "set_s": [list(c) for c in fs.support_coords],
                "set_t": [list(c) for c in ft.support_coords],
                "witness_overlap": witness,
                "checks_s": checks_s,
                "checks_t": checks_t,
            },
        )
    )
    return kb


def apply_block_trivial(
    kb: KnowledgeBase,
    ops: OPS,
    group: MeasuringGroup,
    fam: Family,
    u_t: tuple[int, ...],
    policy: TolerancePolicy = DEFAULT_POLICY,
) -> KnowledgeBase:
    """Conclude that E restricted to the family's span is a scalar multiple of I."""
    fd = _resolve_family(kb, ops, group, fam)
    checks = _validate_family(fd, policy)
    u_t = tuple(u_t)
    if u_t not in fd.support_coords:
        raise RuleError(f"distinguished element {u_t} is not in the family's span")
    u_idx = kb.index[u_t]
    self_witness = abs(complex(np.vdot(fd.fixed_ket_vec, fd.fixed_ket_vec)))
    if self_witness < policy.zero_tol:
        raise HypothesisError("family fixed ket has vanishing norm")
    for v_idx, v in zip(fd.support_idx, fd.support_coords):
        if v_idx != u_idx and not kb.zero[u_idx, v_idx]:
            raise HypothesisError(
                f"zero-row hypothesis failed for {fd.ref.block_id}: cell "
                f"({u_t}, {v}) is not proven zero"
            )
    overlaps = np.abs(fd.member_vecs[:, u_idx])
    if overlaps.size and overlaps.min() < policy.zero_tol:
        j = int(overlaps.argmin())
        raise HypothesisError(
            f"anchor-overlap hypothesis failed for {fd.ref.block_id}: "
            f"member {fd.member_labels[j]} has overlap {overlaps.min():.3e} "
            f"with {u_t}"
        )
    kb.mark_zero(fd.support_idx, fd.support_idx)
    kb.zero[fd.support_idx, fd.support_idx] = False  # keep the diagonal factual
    for i in fd.support_idx[1:]:
        kb.union(fd.support_idx[0], i)
    kb.log.append(
        LogEntry(
            step=len(kb.log),
            rule="block_trivial",
            data={
                "fam": {"block_id": fd.ref.block_id, "family_index": fd.ref.family_index},
                "set_s": [list(c) for c in fd.support_coords],
                "u_t": list(u_t),
                "self_witness": self_witness,
                "min_anchor_overlap": float(overlaps.min()) if overlaps.size else 0.0,
                "checks": checks,
            },
        )
    )
    return kb


def merge_on_overlap(
    kb: KnowledgeBase,
    set_p: Iterable[tuple[int, ...]],
    set_q: Iterable[tuple[int, ...]],
) -> KnowledgeBase:
    """Assert that two overlapping scalar-certified sets share one scalar."""
    p_coords = sorted(tuple(c) for c in set_p)
    q_coords = sorted(tuple(c) for c in set_q)
    p_idx = kb.indices(p_coords)
    q_idx = kb.indices(q_coords)
    if not set(p_idx) & set(q_idx):
        raise RuleError("merge-on-overlap needs a nonempty intersection")
    for name, coords in (("first", p_coords), ("second", q_coords)):
        if not kb.is_scalar_certified(coords):
            raise HypothesisError(f"the {name} set is not scalar-certified")
    for i, ci in zip(p_idx, p_coords):
        for j, cj in zip(q_idx, q_coords):
            if i != j and not kb.zero[i, j]:
                raise HypothesisError(
                    f"cross cell ({ci}, {cj}) between the merged sets is not "
                    "proven zero"
                )
    for i in p_idx[1:]:
        kb.union(p_idx[0], i)
    for j in q_idx:
        kb.union(p_idx[0], j)
    kb.log.append(
        LogEntry(
            step=len(kb.log),
            rule="merge_on_overlap",
            data={
                "set_p": [list(c) for c in p_coords],
                "set_q": [list(c) for c in q_coords],
                "intersection_size": len(set(p_idx) & set(q_idx)),
            },
        )
    )
    return kb


def _apply_step(
    kb: KnowledgeBase,
    ops: OPS,
    group: MeasuringGroup,
    step: ProofStep,
    policy: TolerancePolicy,
) -> None:
    if step.rule == "block_zeros":
        fs = family(ops, step.fam_s.block_id, group.excluded, step.fam_s.family_index)
        ft = family(ops, step.fam_t.block_id, group.excluded, step.fam_t.family_index)
        apply_block_zeros(kb, ops, group, fs, ft, policy)
    elif step.rule == "block_trivial":
        fs = family(ops, step.fam_s.block_id, group.excluded, step.fam_s.family_index)
        apply_block_trivial(kb, ops, group, fs, step.u_t, policy)
    elif step.rule == "merge_on_overlap":
        merge_on_overlap(kb, step.set_p, step.set_q)
    elif step.rule == "symmetry_restart":
        kb.log.append(
            LogEntry(step=len(kb.log), rule="symmetry_restart", data={"note": step.note or ""})
        )
    else:
        raise RuleError(f"unknown rule {step.rule!r}")


# --- script generation --------------------------------------------------------


def _classify_blocks(ops: OPS, excluded: int) -> tuple[list[str], list[str]]:
    """Split blocks by their role on the excluded party: top side vs bottom side.

    Top-side blocks pin the excluded party at d-1 or run its xi family;
    bottom-side blocks pin it at 0 or run its eta family.  Within each side
    every pair of fixed kets (at family index 0) is non-orthogonal, which is
    exactly what the block-zeros stage needs.
    """
    uppers: list[str] = []
    lowers: list[str] = []
    for b in ops.blocks:
        role = b.roles[excluded]
        d = b.dims[excluded]
        if isinstance(role, XiFamily) or (isinstance(role, Fixed) and role.k == d - 1):
            uppers.append(b.id)
        elif isinstance(role, EtaFamily) or (isinstance(role, Fixed) and role.k == 0):
            lowers.append(b.id)
        else:
            raise UnsupportedOpsError(
                f"block {b.id} pins party {excluded} at an interior coordinate; "
                "no script template applies"
            )
    if not uppers or not lowers:
        raise UnsupportedOpsError("the blocks do not split into two mirrored sides")
    return uppers, lowers


def script_for(
    ops: OPS, group: MeasuringGroup, policy: TolerancePolicy = DEFAULT_POLICY
) -> list[ProofStep]:
    """Derive and pre-validate the full proof script for one group.

    Stage one zeroes every cross-block cell on the top side, the mirrored
    stage does the same on the bottom side, then block-trivial steps fire in
    dependency order (each anchored at a coordinate whose row is already
    zeroed) with explicit merges, until the whole basis is certified.
    """
    if not ops.blocks:
        raise UnsupportedOpsError("the state set carries no block structure")
    kb = KnowledgeBase([ops.dims[p] for p in group.parties])
    uppers, lowers = _classify_blocks(ops, group.excluded)
    steps: list[ProofStep] = []
    fams: dict[str, Family] = {
        bid: family(ops, bid, group.excluded, 0) for bid in uppers + lowers
    }

    for side in (uppers, lowers):
        if side is lowers:
            steps.append(
                ProofStep(
                    rule="symmetry_restart",
                    note="mirrored bottom-side stage over the eta/bottom families",
                )
            )
            _apply_step(kb, ops, group, steps[-1], policy)
        for ida, idb in itertools.combinations(side, 2):
            step = ProofStep(
                rule="block_zeros", fam_s=FamilyRef(ida), fam_t=FamilyRef(idb)
            )
            apply_block_zeros(kb, ops, group, fams[ida], fams[idb], policy)
            steps.append(step)

    certified: list[tuple[str, list[tuple[int, ...]]]] = []
    remaining = uppers + lowers
    while remaining and not kb.fully_certified():
        fired = []
        for bid in remaining:
            fam_b = fams[bid]
            fd = _resolve_family(kb, ops, group, fam_b)
            if kb.is_scalar_certified(fd.support_coords):
                fired.append(bid)  # absorbed by an earlier certification
                continue
            anchor = None
            for u_t, u_idx in zip(fd.support_coords, fd.support_idx):
                if all(
                    kb.zero[u_idx, v_idx]
                    for v_idx in fd.support_idx
                    if v_idx != u_idx
                ):
                    anchor = u_t
                    break
            if anchor is None:
                continue
            step = ProofStep(rule="block_trivial", fam_s=FamilyRef(bid), u_t=anchor)
            apply_block_trivial(kb, ops, group, fam_b, anchor, policy)
            steps.append(step)
            for other_id, other_coords in certified:
                if set(other_coords) & set(fd.support_coords):
                    merge = ProofStep(
                        rule="merge_on_overlap",
                        set_p=tuple(fd.support_coords),
                        set_q=tuple(other_coords),
                    )
                    try:
                        merge_on_overlap(kb, merge.set_p, merge.set_q)
                    except HypothesisError:
                        continue
                    steps.append(merge)
            certified.append((bid, fd.support_coords))
            fired.append(bid)
        if not fired:
            raise UnsupportedOpsError(
                "stalled before certifying the whole basis; remaining blocks: "
                + ", ".join(remaining)
            )
        remaining = [b for b in remaining if b not in fired]
    if not kb.fully_certified():
        raise UnsupportedOpsError(
            "all block families certified but the joint basis is not covered"
        )
    return steps


# --- proof execution ----------------------------------------------------------


@dataclass(frozen=True)
class ProofCertificate:
    """Machine-checked record of one group's triviality proof."""

    dims: tuple[int, ...]
    size: int
    excluded: int
    group_parties: tuple[int, ...]
    group_dims: tuple[int, ...]
    policy: TolerancePolicy
    steps: tuple[ProofStep, ...]
    log: tuple[LogEntry, ...]
    valid: bool
    conclusion: str
    failed_step: int | None = None
    failure: str | None = None


def run(
    ops: OPS,
    group: MeasuringGroup,
    steps: Sequence[ProofStep],
    policy: TolerancePolicy = DEFAULT_POLICY,
) -> ProofCertificate:
    """Apply a script, re-validating every hypothesis, and report the outcome."""
    group_dims = tuple(ops.dims[p] for p in group.parties)
    kb = KnowledgeBase(group_dims)
    failed_step: int | None = None
    failure: str | None = None
    for i, step in enumerate(steps):
        try:
            _apply_step(kb, ops, group, step, policy)
        except RuleError as exc:
            failed_step = i
            failure = str(exc)
            break
    valid = failed_step is None and kb.fully_certified()
    if valid:
        conclusion = "E proportional to the identity on the full joint basis"
    elif failed_step is not None:
        conclusion = f"failed at step {failed_step} ({steps[failed_step].rule}): {failure}"
    else:
        conclusion = "script completed without certifying the full joint basis"
    return ProofCertificate(
        dims=ops.dims.per_party,
        size=len(ops.states),
        excluded=group.excluded,
        group_parties=group.parties,
        group_dims=group_dims,
        policy=policy,
        steps=tuple(steps),
        log=tuple(kb.log),
        valid=valid,
        conclusion=conclusion,
        failed_step=failed_step,
        failure=failure,
    )


def certify_all(
    ops: OPS,
    policy: TolerancePolicy = DEFAULT_POLICY,
    scripts: dict[int, Sequence[ProofStep]] | None = None,
) -> tuple[list[ProofCertificate], bool]:
    """Run (or derive) the proof script for every measuring group."""
    certs = []
    for group in measuring_groups(ops.dims.per_party):
        if scripts and group.excluded in scripts:
            steps = list(scripts[group.excluded])
        else:
            try:
                steps = script_for(ops, group, policy)
            except RuleError as exc:
                certs.append(
                    ProofCertificate(
                        dims=ops.dims.per_party,
                        size=len(ops.states),
                        excluded=group.excluded,
                        group_parties=group.parties,
                        group_dims=tuple(ops.dims[p] for p in group.parties),
                        policy=policy,
                        steps=(),
                        log=(),
                        valid=False,
                        conclusion=f"script derivation failed: {exc}",
                        failed_step=None,
                        failure=str(exc),
                    )
                )
                continue
        certs.append(run(ops, group, steps, policy))
    return certs, all(c.valid for c in certs)


# --- serialization and standalone re-checking ---------------------------------


def _step_to_json(step: ProofStep) -> dict:
    out: dict = {"rule": step.rule}
    if step.fam_s is not None:
        out["fam_s"] = {"block_id": step.fam_s.block_id, "family_index": step.fam_s.family_index}
    if step.fam_t is not None:
        out["fam_t"] = {"block_id": step.fam_t.block_id, "family_index": step.fam_t.family_index}
    if step.u_t is not None:
        out["u_t"] = list(step.u_t)
    if step.set_p is not None:
        out["set_p"] = [list(c) for c in step.set_p]
    if step.set_q is not None:
        out["set_q"] = [list(c) for c in step.set_q]
    if step.note is not None:
        out["note"] = step.note
    return out


def _step_from_json(obj: dict) -> ProofStep:
    def fam(key):
        if key not in obj:
            return None
        return FamilyRef(obj[key]["block_id"], int(obj[key].get("family_index", 0)))

    return ProofStep(
        rule=obj["rule"],
        fam_s=fam("fam_s"),
        fam_t=fam("fam_t"),
        u_t=tuple(obj["u_t"]) if "u_t" in obj else None,
        set_p=tuple(tuple(c) for c in obj["set_p"]) if "set_p" in obj else None,
        set_q=tuple(tuple(c) for c in obj["set_q"]) if "set_q" in obj else None,
        note=obj.get("note"),
    )


def steps_to_json(steps: Sequence[ProofStep]) -> list[dict]:
    return [_step_to_json(s) for s in steps]


def steps_from_json(objs: Sequence[dict]) -> list[ProofStep]:
    return [_step_from_json(o) for o in objs]


def certificate_to_json(cert: ProofCertificate) -> dict:
    return {
        "dims": list(cert.dims),
        "size": cert.size,
        "group": {
            "excluded": cert.excluded,
            "parties": list(cert.group_parties),
            "dims": list(cert.group_dims),
        },
        "policy": {"zero_tol": cert.policy.zero_tol, "rank_tol": cert.policy.rank_tol},
        "steps": steps_to_json(cert.steps),
        "log": [{"step": e.step, "rule": e.rule, "data": e.data} for e in cert.log],
        "valid": cert.valid,
        "conclusion": cert.conclusion,
        "failed_step": cert.failed_step,
        "failure": cert.failure,
    }


def recheck_certificate(cert: dict) -> dict:
    """Replay a serialized certificate's log without touching any state set.

    Rebuilds the zero matrix and diagonal classes from the logged
    conclusions while checking that every logged hypothesis value passes the
    recorded tolerance policy and that every consumed fact was established by
    an earlier entry.  Returns {"ok", "replayed_valid", "issues"}.
    """
    policy = TolerancePolicy(**cert["policy"])
    kb = KnowledgeBase(cert["group"]["dims"])
    issues: list[str] = []

    def coords_idx(coords):
        return [kb.index[tuple(c)] for c in coords]

    for entry in cert["log"]:
        rule, data, step = entry["rule"], entry["data"], entry["step"]
        if rule == "block_zeros":
            s_idx = coords_idx(data["set_s"])
            t_idx = coords_idx(data["set_t"])
            if set(s_idx) & set(t_idx):
                issues.append(f"log {step}: block-zeros sets overlap")
            if data["witness_overlap"] < policy.zero_tol:
                issues.append(f"log {step}: recorded witness below tolerance")
            for tag in ("checks_s", "checks_t"):
                c = data[tag]
                if c["members"] != c["support"] or c["rank"] != c["support"]:
                    issues.append(f"log {step}: recorded {tag} fail the span/rank hypothesis")
                if c["max_internal_overlap"] >= policy.zero_tol or c["max_leak"] >= policy.zero_tol:
                    issues.append(f"log {step}: recorded {tag} fail a zero hypothesis")
            kb.mark_zero(s_idx, t_idx)
        elif rule == "block_trivial":
            s_idx = coords_idx(data["set_s"])
            u_idx = kb.index[tuple(data["u_t"])]
            if u_idx not in s_idx:
                issues.append(f"log {step}: anchor outside the certified set")
            for v in s_idx:
                if v != u_idx and not kb.zero[u_idx, v]:
                    issues.append(f"log {step}: zero-row fact not established earlier")
                    break
            c = data["checks"]
            if c["members"] != c["support"] or c["rank"] != c["support"]:
                issues.append(f"log {step}: recorded checks fail the span/rank hypothesis")
            if data["min_anchor_overlap"] < policy.zero_tol:
                issues.append(f"log {step}: recorded anchor overlap below tolerance")
            if data["self_witness"] < policy.zero_tol:
                issues.append(f"log {step}: recorded self witness below tolerance")
            kb.mark_zero(s_idx, s_idx)
            np.fill_diagonal(kb.zero, False)
            for i in s_idx[1:]:
                kb.union(s_idx[0], i)
        elif rule == "merge_on_overlap":
            p_idx = coords_idx(data["set_p"])
            q_idx = coords_idx(data["set_q"])
            if not set(p_idx) & set(q_idx):
                issues.append(f"log {step}: merged sets do not intersect")
            for i in p_idx:
                for j in q_idx:
                    if i != j and not kb.zero[i, j]:
                        issues.append(f"log {step}: cross zero not established earlier")
                        break
            for i in p_idx[1:]:
                kb.union(p_idx[0], i)
            for j in q_idx:
                kb.union(p_idx[0], j)
        elif rule == "symmetry_restart":
            pass
        else:
            issues.append(f"log {step}: unknown rule {rule!r}")

    replayed_valid = kb.fully_certified() and not issues
    if cert["valid"] != replayed_valid:
        issues.append(
            f"certificate claims valid={cert['valid']} but replay gives {replayed_valid}"
        )
    return {"ok": not issues, "replayed_valid": replayed_valid, "issues": issues}
