"""k-ary commitment tree over block leaf slots, with proof-size analytics.

The tree groups leaf digests into subsets of size k and commits each subset,
iterating until a single root commitment remains. The default commitment is a
digest stand-in (hash of the ordered children): real vector commitments with
constant-size openings can be slotted in behind the same interface, so the
closed-form proof-size figures below are computed from the k-ary depth rather
than measured from the stand-in's sibling-set proofs.

Proof-size formulas come in two rounding modes because the published
comparison tables were computed without the ceiling that the printed
formulas carry:
  ceil    bytes = ceil(log_b(n)) * 32  (path counted in whole levels)
  smooth  bytes = log_b(n) * 32        (reproduces the published table cells)
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

HASH_BITS = 256
_BYTES_PER_LEVEL = HASH_BITS // 8


class CommitmentScheme:
    """Deterministic commitment to an ordered sequence of child digests."""

    def commit(self, children: Sequence[bytes]) -> bytes:
        raise NotImplementedError


class DigestCommitment(CommitmentScheme):
    """Stand-in scheme: sha256 over the length-prefixed child concatenation."""

    def commit(self, children: Sequence[bytes]) -> bytes:
        h = hashlib.sha256()
        h.update(len(children).to_bytes(2, "big"))
        for child in children:
            h.update(child)
        return h.digest()


DEFAULT_SCHEME = DigestCommitment()


def leaf_digest(data: bytes) -> bytes:
    return hashlib.sha256(b"leaf:" + data).digest()


def slot_digest(tx_id: int, slot: int) -> bytes:
    """Digest for one occupied leaf slot of a transaction."""
    return hashlib.sha256(tx_id.to_bytes(8, "big") + slot.to_bytes(4, "big")).digest()


@dataclass(frozen=True)
class MembershipProof:
    """Path from one leaf to the root: per level, the child position and the
    full ordered child group of the node on the path."""

    leaf_index: int
    path: Tuple[Tuple[int, int, Tuple[bytes, ...]], ...]  # (level, position, children)


@dataclass(frozen=True)
class VerkleTree:
    branching_factor: int
    levels: Tuple[Tuple[bytes, ...], ...]  # levels[0] = leaves, levels[-1] = (root,)

    @property
    def leaves(self) -> Tuple[bytes, ...]:
        return self.levels[0]

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


def build_tree(leaves: Sequence[bytes], k: int,
               scheme: CommitmentScheme = DEFAULT_SCHEME) -> VerkleTree:
    """Commit `leaves` bottom-up in groups of `k`.

    Depth is ceil(log_k(n)) for n >= 2 and exactly 1 for a single leaf
    (the root then commits to that one leaf).
    """
    if k < 2:
        raise ValueError("branching factor must be >= 2")
    leaves = tuple(leaves)
    if not leaves:
        raise ValueError("cannot build a tree over zero leaves")
    levels = [leaves]
    current = leaves
    while len(current) > 1 or len(levels) == 1:
        nxt = tuple(
            scheme.commit(current[i: i + k]) for i in range(0, len(current), k)
        )
        levels.append(nxt)
        current = nxt
    return VerkleTree(branching_factor=k, levels=tuple(levels))


def prove(tree: VerkleTree, leaf_index: int) -> MembershipProof:
    """Membership proof for tree.leaves[leaf_index]; one entry per level."""
    if not 0 <= leaf_index < len(tree.leaves):
        raise IndexError(f"leaf index {leaf_index} out of range")
    k = tree.branching_factor
    path = []
    idx = leaf_index
    for level in range(tree.depth):
        nodes = tree.levels[level]
        group_start = (idx // k) * k
        group = nodes[group_start: group_start + k]
        path.append((level, idx - group_start, tuple(group)))
        idx //= k
    return MembershipProof(leaf_index=leaf_index, path=tuple(path))


def verify(root: bytes, proof: MembershipProof, leaf: bytes,
           scheme: CommitmentScheme = DEFAULT_SCHEME) -> bool:
    """Recompute commitments along the path; True iff they reach `root`.

    Malformed proofs return False rather than raising.
    """
    try:
        current = leaf
        for _level, position, children in proof.path:
            if not 0 <= position < len(children):
                return False
            if children[position] != current:
                return False
            current = scheme.commit(children)
        return current == root
    except (IndexError, TypeError, ValueError):
        return False


def _proof_size(n_t: int, base: float, mode: str) -> float:
    if n_t < 2:
        raise ValueError("proof size is defined for n_t >= 2")
    levels = math.log(n_t) / math.log(base)
    if mode == "ceil":
        levels = math.ceil(levels - 1e-12)
    elif mode != "smooth":
        raise ValueError(f"mode must be 'ceil' or 'smooth', got {mode!r}")
    return levels * _BYTES_PER_LEVEL


def merkle_proof_size_bytes(n_t: int, mode: str = "smooth") -> float:
    """Binary-tree membership proof size in bytes for n_t transactions."""
    return _proof_size(n_t, 2.0, mode)


def verkle_proof_size_bytes(n_t: int, k: int, mode: str = "smooth") -> float:
    """k-ary commitment-tree membership proof size in bytes."""
    if k < 2:
        raise ValueError("branching factor must be >= 2")
    return _proof_size(n_t, float(k), mode)


# Published proof-size table cells (scalability solution, transaction count,
# structure, branching factor, printed bytes). Two cells are known to
# disagree with the formulas and are expected to be flagged, not matched:
# the binary-tree Bitcoin row (365.57) and the k=5 XThin cell (218.33,
# which duplicates XThin's printed TPS figure).
PUBLISHED_SCENARIOS = (
    ("Bitcoin", 2100),
    ("XThin", 130999),
    ("Compact", 174747),
    ("Graphene", 413507),
)

PUBLISHED_PROOF_CELLS = (
    ("Bitcoin", 2100, "merkle", 2, 365.57),
    ("XThin", 130999, "merkle", 2, 543.97),
    ("Compact", 174747, "merkle", 2, 557.28),
    ("Graphene", 413507, "merkle", 2, 597.04),
    ("Bitcoin", 2100, "verkle", 3, 222.82),
    ("Bitcoin", 2100, "verkle", 5, 152.10),
    ("Bitcoin", 2100, "verkle", 10, 106.31),
    ("XThin", 130999, "verkle", 3, 343.21),
    ("XThin", 130999, "verkle", 5, 218.33),
    ("XThin", 130999, "verkle", 10, 163.75),
    ("Compact", 174747, "verkle", 3, 351.60),
    ("Compact", 174747, "verkle", 5, 240.01),
    ("Compact", 174747, "verkle", 10, 167.76),
    ("Graphene", 413507, "verkle", 3, 376.69),
    ("Graphene", 413507, "verkle", 5, 257.13),
    ("Graphene", 413507, "verkle", 10, 179.73),
)


def check_published_cells(tolerance: float = 0.02) -> List[dict]:
    """Compare every published table cell against the smooth-mode formula.

    Returns one record per cell with the computed value and a `matches`
    flag; the two known-inconsistent cells come back flagged False.
    """
    report = []
    for name, n_t, structure, k, published in PUBLISHED_PROOF_CELLS:
        if structure == "merkle":
            computed = merkle_proof_size_bytes(n_t, "smooth")
        else:
            computed = verkle_proof_size_bytes(n_t, k, "smooth")
        report.append({
            "scenario": name,
            "n_t": n_t,
            "structure": structure,
            "k": k,
            "published_bytes": published,
            "computed_bytes": computed,
            "matches": abs(computed - published) <= tolerance,
        })
    return report


@dataclass(frozen=True)
class IntegrationScenario:
    """Proof sizes for a large-block integration scenario."""

    n_t: int
    merkle_levels: int
    merkle_proof_bytes: float
    verkle_branching: int
    verkle_proof_bytes: float


def graphene_integration_summary(n_t: int = 540000, k: int = 1024) -> IntegrationScenario:
    """The published 540,000-transaction scenario.

    The published derivation counts floor(log2(n_t)) hash levels (18
    non-leaf levels plus the root for n_t = 540,000, i.e. 19 levels and
    608 bytes); a strict ceiling would count 20. The k-ary figure uses the
    smooth formula.
    """
    levels = math.floor(math.log2(n_t))
    return IntegrationScenario(
        n_t=n_t,
        merkle_levels=levels,
        merkle_proof_bytes=levels * _BYTES_PER_LEVEL,
        verkle_branching=k,
        verkle_proof_bytes=verkle_proof_size_bytes(n_t, k, "smooth"),
    )


def bandwidth_report(scenarios: Sequence[Tuple[str, int]],
                     ks: Sequence[int],
                     modes: Sequence[str] = ("smooth", "ceil")) -> List[dict]:
    """Tabulate binary- and k-ary proof sizes for each scenario.

    Rows carry (scenario, n_t, structure, k, mode, bytes); the binary rows
    are reported once per mode with k = 2. The 540,000-transaction
    integration scenario additionally gets a "published" row carrying the
    printed 19-level figure, which no strict rounding mode reproduces.
    """
    rows = []
    for name, n_t in scenarios:
        for mode in modes:
            rows.append({
                "scenario": name, "n_t": n_t, "structure": "merkle",
                "k": 2, "mode": mode,
                "bytes": merkle_proof_size_bytes(n_t, mode),
            })
        if n_t == 540000:
            summary = graphene_integration_summary(n_t)
            rows.append({
                "scenario": name, "n_t": n_t, "structure": "merkle",
                "k": 2, "mode": "published",
                "bytes": summary.merkle_proof_bytes,
            })
        for k in ks:
            for mode in modes:
                rows.append({
                    "scenario": name, "n_t": n_t, "structure": "verkle",
                    "k": k, "mode": mode,
                    "bytes": verkle_proof_size_bytes(n_t, k, mode),
                })
    return rows


def write_bandwidth_csv(rows: Sequence[dict], path) -> int:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario", "n_t", "structure", "k", "mode", "bytes"])
        for row in rows:
            writer.writerow([row["scenario"], row["n_t"], row["structure"],
                             row["k"], row["mode"], repr(row["bytes"])])
    return len(rows)
