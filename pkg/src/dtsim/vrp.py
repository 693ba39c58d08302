"""Routing-problem view of transaction packing.

Transactions act as customers (demand = occupied leaf slots, value = fee),
blocks as capacity-limited vehicles, and the objective is the variance of
per-block fee totals. The exhaustive solver enumerates every feasible
assignment of a small instance and is the independent check that the greedy
simulator never beats the true optimum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .core import BlockRecord

MAX_ORACLE_TXS = 12
MAX_ORACLE_BLOCKS = 3


@dataclass(frozen=True)
class VrpInstance:
    """A packing instance: per-transaction fees and slot demands, block capacity."""

    fees: Tuple[float, ...]
    demands: Tuple[int, ...]
    capacity: int
    category_id: Optional[int] = None
    target_incentive: Optional[float] = None  # depot level, reporting only

    def __post_init__(self):
        if len(self.fees) != len(self.demands):
            raise ValueError("fees and demands must have equal length")
        if self.capacity < 1:
            raise ValueError("capacity must be positive")

    def infeasible_transactions(self) -> List[int]:
        return [i for i, d in enumerate(self.demands) if d > self.capacity]


@dataclass(frozen=True)
class AssignmentMatrix:
    """Binary matrix x[i][k]: transaction i rides in block k."""

    rows: Tuple[Tuple[int, ...], ...]
    tx_ids: Tuple[int, ...]

    @property
    def n_blocks(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def block_of(self, row: int) -> Optional[int]:
        for k, cell in enumerate(self.rows[row]):
            if cell:
                return k
        return None


def encode(blocks: Sequence[BlockRecord], universe: Optional[Sequence[int]] = None) -> AssignmentMatrix:
    """Assignment matrix of a simulated chain.

    Rows follow `universe` (default: every transaction appearing in the
    blocks, ordered by id); columns follow block order. A transaction id
    found in two blocks is an upstream invariant breach and raises.
    """
    placement: dict[int, int] = {}
    for col, block in enumerate(blocks):
        for tx_id in block.tx_ids:
            if tx_id in placement:
                raise ValueError(f"transaction {tx_id} appears in more than one block")
            placement[tx_id] = col
    if universe is None:
        universe = sorted(placement)
    universe = tuple(universe)
    n_blocks = len(blocks)
    rows = tuple(
        tuple(1 if placement.get(tx_id) == k else 0 for k in range(n_blocks))
        for tx_id in universe
    )
    return AssignmentMatrix(rows=rows, tx_ids=universe)


def check_constraints(m: AssignmentMatrix, instance: VrpInstance) -> List[str]:
    """All violated packing constraints; empty when the assignment is valid.

    Checks that every transaction is packed exactly once and that no
    block's total slot demand exceeds the capacity.
    """
    problems = []
    if len(m.rows) != len(instance.fees):
        problems.append(
            f"matrix has {len(m.rows)} rows for {len(instance.fees)} transactions")
        return problems
    demand_per_block = [0] * m.n_blocks
    for i, row in enumerate(m.rows):
        s = sum(row)
        if s != 1:
            problems.append(f"transaction {m.tx_ids[i]} packed {s} times (expected once)")
        for k, cell in enumerate(row):
            if cell:
                demand_per_block[k] += instance.demands[i]
    for k, demand in enumerate(demand_per_block):
        if demand > instance.capacity:
            problems.append(
                f"block {k} demand {demand} exceeds capacity {instance.capacity}")
    return problems


def variance_objective(m: AssignmentMatrix, fees: Sequence[float]) -> float:
    """Population variance of the per-block fee totals."""
    if m.n_blocks < 1:
        raise ValueError("variance needs at least one block")
    if len(m.rows) != len(fees):
        raise ValueError("fee vector length must match matrix rows")
    sums = [0.0] * m.n_blocks
    for i, row in enumerate(m.rows):
        for k, cell in enumerate(row):
            if cell:
                sums[k] += fees[i]
    return _population_variance(sums)


def _population_variance(values: Sequence[float]) -> float:
    n = len(values)
    mean = math.fsum(values) / n
    return math.fsum((v - mean) ** 2 for v in values) / n


def brute_force_min_variance(instance: VrpInstance, block_count: int) -> Tuple[AssignmentMatrix, float]:
    """Global minimum-variance assignment by exhaustive enumeration.

    Every mapping of transactions to `block_count` blocks is tried (empty
    blocks count as zero-incentive blocks); capacity-infeasible mappings are
    skipped. Ties resolve to the lexicographically smallest assignment so
    the witness is deterministic. Limited to 12 transactions and 3 blocks.
    """
    n = len(instance.fees)
    if n == 0:
        raise ValueError("instance has no transactions")
    if n > MAX_ORACLE_TXS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_TXS} transactions, got {n}")
    if not 1 <= block_count <= MAX_ORACLE_BLOCKS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_BLOCKS} blocks, got {block_count}")
    bad = instance.infeasible_transactions()
    if bad:
        raise ValueError(
            f"transactions {bad} have demands above capacity {instance.capacity}; "
            f"no feasible assignment exists")

    best_assignment = None
    best_var = math.inf
    demands = instance.demands
    fees = instance.fees
    capacity = instance.capacity
    for assignment in itertools.product(range(block_count), repeat=n):
        loads = [0] * block_count
        sums = [0.0] * block_count
        feasible = True
        for i, k in enumerate(assignment):
            loads[k] += demands[i]
            if loads[k] > capacity:
                feasible = False
                break
            sums[k] += fees[i]
        if not feasible:
            continue
        var = _population_variance(sums)
        if var < best_var - 1e-15:
            best_var = var
            best_assignment = assignment
    if best_assignment is None:
        raise ValueError("no capacity-feasible assignment exists")
    rows = tuple(
        tuple(1 if k == best_assignment[i] else 0 for k in range(block_count))
        for i in range(n)
    )
    matrix = AssignmentMatrix(rows=rows, tx_ids=tuple(range(n)))
    return matrix, best_var
