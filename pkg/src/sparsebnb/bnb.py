"""Branch-and-bound driver with certified optimality gaps.

Nodes carry disjoint index sets (S0 forced to zero, S1 declared nonzero);
the relaxation solver supplies lower bounds, a threshold-and-polish
heuristic supplies incumbents, and nodes are retired once their bound
cannot improve the incumbent by more than the pruning slack.  The
certified gap is computed from the minimum bound over every retired or
still-open node, so it remains honest under node and time limits.
"""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from .exceptions import BranchError, ConfigError, DimensionError
from .relaxation import Problem, RelaxResult, SolveOpts, solve_relaxation

INF = math.inf

OPTIMAL = "Optimal"
GAP_REACHED = "GapReached"
NODE_LIMIT = "NodeLimit"
TIME_LIMIT = "TimeLimit"

EXPLORATIONS = ("bestfirst", "depthfirst")

# absolute floor on the pruning slack; avoids floating-point cycling
PRUNE_FLOOR = 1e-9


@dataclass
class Node:
    """Tree node: S0 forced zero, S1 declared nonzero, rest free."""

    S0: frozenset
    S1: frozenset
    depth: int
    lb: float
    warm: NDArray

    def __post_init__(self):
        if self.S0 & self.S1:
            raise ConfigError(f"S0 and S1 overlap: {sorted(self.S0 & self.S1)}")
        self.warm = np.array(self.warm, dtype=float)
        if self.S0:
            self.warm[sorted(self.S0)] = 0.0

    def free_indices(self, n: int) -> list:
        fixed = self.S0 | self.S1
        return [i for i in range(n) if i not in fixed]


@dataclass
class Incumbent:
    x_best: NDArray
    ub: float


@dataclass
class Solution:
    x_opt: NDArray
    objective: float
    gap: float
    nodes_explored: int
    wall_time: float
    status: str


@dataclass(frozen=True)
class BnbOpts:
    """Tree-search options; relax holds the inner-solver options."""

    gap_tol: float = 1e-8
    time_limit: float | None = None
    node_limit: int | None = None
    exploration: str = "bestfirst"
    threads: int = 1
    relax: SolveOpts = field(default_factory=SolveOpts)

    def __post_init__(self):
        if self.gap_tol < 0:
            raise ConfigError("gap_tol must be >= 0")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit < 0:
            raise ConfigError("node_limit must be >= 0")
        if self.exploration not in EXPLORATIONS:
            raise ConfigError(f"exploration must be one of {EXPLORATIONS}")
        if not (isinstance(self.threads, int) and self.threads >= 1):
            raise ConfigError("threads must be a positive integer")


class _OpenSet:
    """Priority structure over open nodes; deterministic tie-breaks."""

    def __init__(self, exploration: str):
        self._best_first = exploration == "bestfirst"
        self._heap = []
        self._seq = 0

    def push(self, node: Node) -> None:
        key = (node.lb, self._seq) if self._best_first else (-self._seq,)
        heapq.heappush(self._heap, (key, self._seq, node))
        self._seq += 1

    def pop(self) -> Node:
        return heapq.heappop(self._heap)[2]

    def __len__(self) -> int:
        return len(self._heap)

    def min_lb(self) -> float:
        return min((entry[2].lb for entry in self._heap), default=INF)


def branch(node: Node, x_hat: NDArray) -> tuple:
    """Split on the free coordinate with the largest relaxed magnitude."""
    n = len(x_hat)
    free = node.free_indices(n)
    if not free:
        raise BranchError("node has no free coordinate")
    mags = np.abs(np.asarray(x_hat, dtype=float)[free])
    i_star = free[int(np.argmax(mags))]  # argmax takes the lowest index on ties
    warm0 = np.array(x_hat, dtype=float)
    warm0[i_star] = 0.0
    child0 = Node(S0=node.S0 | {i_star}, S1=node.S1, depth=node.depth + 1, lb=node.lb, warm=warm0)
    child1 = Node(S0=node.S0, S1=node.S1 | {i_star}, depth=node.depth + 1, lb=node.lb,
                  warm=np.array(x_hat, dtype=float))
    return child0, child1


def _support_node(p: Problem, support) -> Node:
    s1 = frozenset(support)
    s0 = frozenset(range(p.n)) - s1
    return Node(S0=s0, S1=s1, depth=0, lb=-INF, warm=np.zeros(p.n))


def restricted_polish(p: Problem, support, warm: NDArray | None, opts: SolveOpts) -> NDArray:
    """Solve the convex restriction min f(Ax) + sum_{i in S} h(x_i), x zero off S."""
    if not support:
        return np.zeros(p.n)
    node = _support_node(p, support)
    x0 = None
    if warm is not None:
        x0 = np.array(warm, dtype=float)
        x0[sorted(node.S0)] = 0.0
    return solve_relaxation(p, node, x0, opts).x_hat


def upper_bound_heuristic(p: Problem, node: Node, x_hat: NDArray, opts: SolveOpts | None = None) -> Incumbent:
    """Threshold the relaxed point to a support, polish, and price exactly."""
    opts = opts or SolveOpts()
    x_hat = np.asarray(x_hat, dtype=float)
    tol = 1e-8 * float(np.max(np.abs(x_hat))) if x_hat.size else 0.0
    support = set(node.S1)
    for i in node.free_indices(p.n):
        if abs(x_hat[i]) > tol:
            support.add(i)
    x = restricted_polish(p, support, x_hat, opts)
    return Incumbent(x_best=x, ub=p.objective(x))


def _prune_slack(gap_tol: float) -> float:
    # absolute, not scaled by |ub|: the incumbent only improves, so a node
    # retired now must stay within the slack of whatever the run ends at
    return max(PRUNE_FLOOR, gap_tol)


def solve(p: Problem, opts: BnbOpts | None = None, warm_start: NDArray | None = None) -> Solution:
    """Find a certified global minimizer of f(Ax) + sum_i g(x_i).

    Explores the node tree per opts.exploration, pruning nodes whose lower
    bound cannot beat the incumbent by more than the pruning slack.  On a
    drained tree the result is optimal within opts.gap_tol; node/time limits
    surface in the status and in an honest gap.
    """
    opts = opts or BnbOpts()
    t0 = time.perf_counter()
    n = p.n

    x0 = np.zeros(n)
    incumbent = Incumbent(x_best=x0, ub=p.objective(x0))
    root_warm = x0
    if warm_start is not None:
        xw = np.asarray(warm_start, dtype=float)
        if xw.shape != (n,):
            raise DimensionError(f"warm start must have length {n}")
        ub_w = p.objective(xw)
        if ub_w < incumbent.ub:
            incumbent = Incumbent(x_best=xw.copy(), ub=ub_w)
        root_warm = xw.copy()

    open_set = _OpenSet(opts.exploration)
    open_set.push(Node(S0=frozenset(), S1=frozenset(), depth=0, lb=-INF, warm=root_warm))
    retired_floor = INF
    nodes_explored = 0
    status = None
    pool = ThreadPoolExecutor(opts.threads) if opts.threads > 1 else None

    try:
        while len(open_set):
            if opts.node_limit is not None and nodes_explored >= opts.node_limit:
                status = NODE_LIMIT
                break
            if opts.time_limit is not None and time.perf_counter() - t0 >= opts.time_limit:
                status = TIME_LIMIT
                break

            batch = []
            while len(open_set) and len(batch) < opts.threads:
                node = open_set.pop()
                if node.lb >= incumbent.ub - _prune_slack(opts.gap_tol):
                    retired_floor = min(retired_floor, node.lb)
                    continue
                batch.append(node)
            if not batch:
                continue

            if pool is None:
                results = [solve_relaxation(p, nd, nd.warm, opts.relax) for nd in batch]
            else:
                results = list(pool.map(lambda nd: solve_relaxation(p, nd, nd.warm, opts.relax), batch))
            nodes_explored += len(batch)

            for node, res in zip(batch, results):
                node.lb = max(node.lb, res.dual_lb)
                cand = upper_bound_heuristic(p, node, res.x_hat, opts.relax)
                if cand.ub < incumbent.ub:
                    incumbent = cand
                if node.lb >= incumbent.ub - _prune_slack(opts.gap_tol):
                    retired_floor = min(retired_floor, node.lb)
                elif node.free_indices(n):
                    # push order makes depth-first dive the nonzero child
                    child0, child1 = branch(node, res.x_hat)
                    open_set.push(child0)
                    open_set.push(child1)
                else:
                    # an unpruned leaf sets the drained-tree floor, so its
                    # bound must be tighter than the certificate it feeds
                    slack = _prune_slack(opts.gap_tol)
                    tight = replace(
                        opts.relax,
                        cd_tol=min(opts.relax.cd_tol, 1e-2 * slack),
                        gap_tol=0.25 * slack,
                    )
                    res2 = solve_relaxation(p, node, res.x_hat, tight)
                    node.lb = max(node.lb, res2.dual_lb)
                    retired_floor = min(retired_floor, node.lb)
    finally:
        if pool is not None:
            pool.shutdown(wait=False)

    global_lb = min(retired_floor, open_set.min_lb())
    ub = incumbent.ub
    gap = max(0.0, (ub - global_lb) / max(1.0, abs(ub)))
    if status is None:
        status = OPTIMAL if gap <= opts.gap_tol else GAP_REACHED
    x_opt = incumbent.x_best
    return Solution(
        x_opt=x_opt,
        objective=p.objective(x_opt),
        gap=gap,
        nodes_explored=nodes_explored,
        wall_time=time.perf_counter() - t0,
        status=status,
    )


def node_order(open_set: _OpenSet) -> Node:
    """Pop the next node to process (best-first or LIFO per construction)."""
    return open_set.pop()
