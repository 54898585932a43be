"""Exact maximization of accepted-option utility under the placement rules.

The solver is a depth-first branch-and-bound over option selections: one
decision per provider, branching over its options (best utility first) and
over declining the provider. Needs no external solver and is deterministic
for a fixed scenario and limits.

Placement is handled as a feasibility question per search node, not as
extra branching. Each node keeps one concrete packing of the committed
containers onto nodes. Committing another option first tries to extend
that packing (a small search over the new containers only); if extension
fails, the full container multiset is repacked from scratch by an exact
packing search. Only when no packing of the whole selection exists is the
branch pruned, which is sound because adding options never makes packing
easier. Packing searches break node symmetry by skipping nodes whose
residual capacities are identical.

Pruning bound: the sum of the best remaining utilities, tightened (unless
disabled) by knapsack tables. For several fixed weightings of the resource
types, the undecided providers' options form a multiple-choice knapsack
against the weighted aggregate residual capacity; a table built once by
dynamic programming over a discretized capacity axis, with demands rounded
down a grid cell, upper-bounds that knapsack for every suffix of providers
and every residual level. The minimum over weightings upper-bounds every
completion because a real completion must respect each weighting's
aggregate constraint. Correctness does not depend on the bound; it only
prunes more.

``brute_force`` is an entirely separate exhaustive enumerator used as an
oracle for small instances; it shares no search code with the
branch-and-bound path.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from dataclasses import dataclass
from math import fsum, inf

import numpy as np

from .model import (
    Allocation,
    EdgemoreError,
    EPS,
    Scenario,
    SolveReport,
    build_report,
    option_demand,
    total_utility,
)
from .heuristics import solve_greedy

# Default cap on brute-force enumeration leaves.
BRUTE_FORCE_LEAF_GUARD = 10_000_000

# How often (in search steps) the wall clock is polled for the time limit.
_CLOCK_POLL_MASK = 0x3FF

# Cells on the discretized capacity axis of each bound table.
_BOUND_GRID = 16384

# Per-query step allowance for the exact packing search, and its growth
# across passes. A pass that leaves some packing undecided is re-run with
# the allowance multiplied, keeping the incumbent found so far; past the
# cap the allowance becomes unlimited, so the final pass always decides.
_PACK_BUDGET_START = 20_000
_PACK_BUDGET_GROWTH = 8
_PACK_BUDGET_MAX = 200_000_000


class InstanceTooLargeError(EdgemoreError):
    """The instance exceeds the exhaustive enumerator's leaf guard."""


@dataclass(frozen=True)
class SolveLimits:
    """Optional caps on one exact-solver run; None means unlimited."""

    time_limit_ms: int | None = None
    node_budget: int | None = None

    def __post_init__(self) -> None:
        if self.time_limit_ms is not None and self.time_limit_ms <= 0:
            raise ValueError(f"time_limit_ms must be positive, got {self.time_limit_ms}")
        if self.node_budget is not None and self.node_budget < 0:
            raise ValueError(f"node_budget must be non-negative, got {self.node_budget}")


class _Stop(Exception):
    """Internal: a solve limit was hit; unwind and return the incumbent."""


class _PackLimit(Exception):
    """Internal: a packing query exhausted its step allowance undecided."""


# Sentinel result for a budget-limited packing query that neither found a
# packing nor proved none exists.
_UNKNOWN = object()


class _Entry:
    """One option of one provider, preprocessed for the search."""

    __slots__ = ("option_id", "utility", "containers", "agg", "weighted")

    def __init__(self, option_id, utility, containers, agg, weighted):
        self.option_id = option_id
        self.utility = utility
        self.containers = containers  # ((container_id, demand tuple), ...) largest first
        self.agg = agg  # aggregate demand tuple
        self.weighted = weighted  # scalar demand per bound weighting


class _Search:
    def __init__(self, scenario: Scenario, limits: SolveLimits, use_tight_bound: bool):
        self.scenario = scenario
        self.limits = limits
        self.use_tight_bound = use_tight_bound
        self.L = scenario.num_resources
        self.M = len(scenario.nodes)
        self.caps = [tuple(node.capacities) for node in scenario.nodes]
        self.node_ids = [node.node_id for node in scenario.nodes]
        totals = scenario.total_capacity()
        self.totals = tuple(totals)
        # Per-resource scale for normalized size comparisons.
        self.scale = tuple(max(c[l] for c in self.caps) for l in range(self.L))

        # Bound weightings over normalized resources: each resource alone
        # plus an even blend (the blend catches selections that trade one
        # resource off against the other). Weights sum to 1, so the fleet's
        # weighted capacity is 1 in every weighting.
        L = self.L
        self.weights: list[tuple[float, ...]] = [
            tuple(1.0 if i == l else 0.0 for i in range(L)) for l in range(L)
        ]
        if L > 1:
            self.weights.append(tuple(1.0 / L for _ in range(L)))
            for l in range(L):
                self.weights.append(
                    tuple((2.0 if i == l else 1.0) / (L + 1) for i in range(L))
                )

        # Providers with at least one selectable option, best option first.
        # Options whose aggregate demand exceeds the fleet total in some
        # resource can never be chosen and are dropped outright.
        prepared: list[tuple[int, list[_Entry]]] = []
        for p in scenario.providers:
            entries = []
            for o in sorted(p.options, key=lambda o: (-o.utility, o.option_id)):
                agg = tuple(option_demand(o))
                if any(agg[l] > self.totals[l] + EPS for l in range(L)):
                    continue
                containers = sorted(
                    ((c.container_id, tuple(c.demands)) for c in o.containers),
                    key=lambda item: (
                        -max(d / s for d, s in zip(item[1], self.scale)),
                        item[0],
                    ),
                )
                normalized = tuple(agg[l] / self.totals[l] for l in range(L))
                weighted = tuple(
                    fsum(w * a for w, a in zip(ws, normalized)) for ws in self.weights
                )
                entries.append(_Entry(o.option_id, o.utility, tuple(containers), agg, weighted))
            if entries:
                prepared.append((p.provider_id, entries))
        prepared.sort(key=lambda pe: (-pe[1][0].utility, pe[0]))
        self.pids = [pid for pid, _ in prepared]
        self.options = [entries for _, entries in prepared]
        self.K = len(prepared)

        # Baseline bound: suffix sums of per-provider best utilities.
        self.suffix_max = [0.0] * (self.K + 1)
        for k in range(self.K - 1, -1, -1):
            self.suffix_max[k] = self.suffix_max[k + 1] + self.options[k][0].utility

        if use_tight_bound:
            self.tables = self._build_tables()

        self.agg_residual = [fsum(c[l] for c in self.caps) for l in range(self.L)]
        self.nodes_visited = 0
        self.deadline: float | None = None
        self.pack_budget: int | None = _PACK_BUDGET_START
        self.unknown_seen = False
        # Committed-selection multiset -> repack outcome. Passes revisit
        # the same selections, and a packing decision never changes once
        # made; only budget-limited unknowns are retried, at bigger
        # budgets.
        self.repack_cache: dict[tuple, tuple] = {}
        # Minimal selections proven unpackable; every superset is too.
        self.unpackable: list[frozenset] = []

        self.best_obj = -inf
        self.best_alloc = Allocation.empty()

    # ---- bounds -------------------------------------------------------

    def _build_tables(self) -> list[np.ndarray]:
        """tables[d][k][j]: bound on providers k.. with j capacity cells left.

        Axis j discretizes the weighted aggregate capacity [0, 1] of
        weighting d into _BOUND_GRID cells. Each option's weighted demand is
        rounded down to whole cells, so the table value can only overstate
        what a real completion achieves: an admissible bound. Built once per
        solve by a multiple-choice knapsack recurrence from the last
        provider backwards.
        """
        G = _BOUND_GRID
        tables = []
        for d in range(len(self.weights)):
            f = np.zeros((self.K + 1, G + 1))
            for k in range(self.K - 1, -1, -1):
                base = f[k + 1]
                row = base.copy()
                for e in self.options[k]:
                    q = int(e.weighted[d] * G)
                    if q > G:
                        continue
                    if q == 0:
                        np.maximum(row, base + e.utility, out=row)
                    else:
                        np.maximum(row[q:], base[: G + 1 - q] + e.utility, out=row[q:])
                f[k] = row
            tables.append(f)
        return tables

    def _bound_rest(self, k: int, agg_residual) -> float:
        best = self.suffix_max[k]
        if not self.use_tight_bound or k == self.K:
            return best
        G = _BOUND_GRID
        normalized = [agg_residual[l] / self.totals[l] for l in range(self.L)]
        for d, ws in enumerate(self.weights):
            remaining = sum(w * r for w, r in zip(ws, normalized))
            if remaining <= 0.0:
                j = 0
            else:
                # The small slack only ever rounds the cell index up, which
                # keeps the bound admissible under float noise.
                j = int(remaining * G + 1e-7)
                if j > G:
                    j = G
            v = float(self.tables[d][k, j])
            if v < best:
                best = v
        return best

    # ---- limits -------------------------------------------------------

    def _tick(self) -> None:
        self.nodes_visited += 1
        if self.limits.node_budget is not None and self.nodes_visited > self.limits.node_budget:
            raise _Stop()
        if (
            self.deadline is not None
            and (self.nodes_visited & _CLOCK_POLL_MASK) == 0
            and time.perf_counter() > self.deadline
        ):
            raise _Stop()

    # ---- packing ------------------------------------------------------

    def _pack(self, demands, residual, budget=None):
        """Pack ``demands`` into ``residual``: assignments, None, or _UNKNOWN.

        ``demands`` is a sequence of demand tuples; ``residual`` is a list
        of per-node residual lists, left unmodified. On success returns a
        list of node indices aligned with ``demands``; None means no
        packing exists; _UNKNOWN means the exact search exhausted
        ``budget`` steps without deciding.

        A best-fit-decreasing pass answers most feasible queries outright,
        then an overload-descent walk. Otherwise an exact search runs: at
        every step it branches on the unplaced demand with the fewest
        feasible nodes (failing fast when one has none), tries nodes
        tightest fit first, skips nodes whose residuals duplicate an
        already-tried node, and abandons branches whose remaining demand
        exceeds what the nodes it still fits on can absorb.
        """
        n = len(demands)
        if n == 0:
            return []
        L = self.L
        M = self.M
        scale = self.scale
        rng_l = range(L)

        def fits(res, dem):
            for l in rng_l:
                if res[l] + EPS < dem[l]:
                    return False
            return True

        # Fast path: constructive heuristics with single-relocation repair,
        # over several item orders and placement rules; near-full fleets
        # often yield to one combination but not another.
        def best_node(res, dem, rule, skip=-1):
            best = -1
            best_key = None
            for m in range(M):
                if m == skip:
                    continue
                r = res[m]
                if fits(r, dem):
                    key = (rule(r, dem), m)
                    if best < 0 or key < best_key:
                        best, best_key = m, key
            return best

        def construct(order, rule) -> list[int] | None:
            res = [row[:] for row in residual]
            assign = [-1] * n
            placed_on: list[list[int]] = [[] for _ in range(M)]
            for i in order:
                dem = demands[i]
                best = best_node(res, dem, rule)
                if best < 0:
                    # Repair: evict one placed item to another node so that
                    # this one fits where the evictee sat.
                    done = False
                    for m in range(M):
                        r = res[m]
                        for j in placed_on[m]:
                            dj = demands[j]
                            if any(r[l] + dj[l] + EPS < dem[l] for l in rng_l):
                                continue
                            target = best_node(
                                [
                                    [res[mm][l] + (dj[l] if mm == m else 0.0) - (dem[l] if mm == m else 0.0) for l in rng_l]
                                    for mm in range(M)
                                ],
                                dj,
                                rule,
                                skip=m,
                            )
                            if target < 0:
                                continue
                            for l in rng_l:
                                res[m][l] += dj[l] - dem[l]
                                res[target][l] -= dj[l]
                            placed_on[m].remove(j)
                            placed_on[m].append(i)
                            placed_on[target].append(j)
                            assign[j] = target
                            assign[i] = m
                            done = True
                            break
                        if done:
                            break
                    if not done:
                        return None
                    continue
                for l in rng_l:
                    res[best][l] -= dem[l]
                assign[i] = best
                placed_on[best].append(i)
            return assign

        def rule_best_fit(r, dem):
            return fsum((r[l] - dem[l]) / scale[l] for l in rng_l)

        def rule_align(r, dem):
            # Prefer the node whose residual shape matches the demand shape
            # (larger normalized dot product), keeping residuals balanced.
            return -fsum((r[l] / scale[l]) * (dem[l] / scale[l]) for l in rng_l)

        def size_max(i):
            return max(demands[i][l] / scale[l] for l in rng_l)

        orders = [sorted(range(n), key=lambda i: (-size_max(i), i))]
        for l in rng_l:
            orders.append(sorted(range(n), key=lambda i: (-demands[i][l], i)))
        orders.append(
            sorted(range(n), key=lambda i: (-fsum(demands[i][l] / scale[l] for l in rng_l), i))
        )
        for order in orders:
            for rule in (rule_best_fit, rule_align):
                assign = construct(order, rule)
                if assign is not None:
                    return assign

        # Last heuristic: place everything with overload allowed, then walk
        # downhill on total overload by relocating one item or swapping two
        # between nodes. Near-full fleets that defeat one-pass rules mostly
        # yield to this, though each start only reaches one basin; shape-
        # aware orders and a fixed bank of seeded shuffles diversify the
        # starts while keeping every run identical.
        descent_orders = list(orders)
        if L > 1:
            spread = sorted(
                range(n),
                key=lambda i: (
                    demands[i][0] / scale[0] - demands[i][1] / scale[1],
                    i,
                ),
            )
            descent_orders.append(spread)
            descent_orders.append(spread[::-1])
        shuffled = list(range(n))
        shuffle_rng = random.Random(0x5EED)
        for _ in range(16):
            shuffle_rng.shuffle(shuffled)
            descent_orders.append(list(shuffled))
        for order in descent_orders:
            assign = self._descend(demands, residual, order)
            if assign is not None:
                return assign

        # Exact decision. Near-full fleets go node by node: every node's
        # load must land within the fleet-wide waste allowance of its
        # residual, a narrow subset-sum window that cuts the search down
        # and kills node-permutation symmetry. Loose fleets go item by
        # item, where feasible placements abound.
        todo = [fsum(dem[l] for dem in demands) for l in rng_l]
        slack = [
            fsum(residual[m][l] for m in range(M)) - todo[l] for l in rng_l
        ]
        if min(s / scale[l] for l, s in enumerate(slack)) <= 0.75:
            return self._complete(demands, residual, slack, budget)

        res = [row[:] for row in residual]
        remaining = list(range(n))
        assign = [-1] * n
        steps = 0

        def go() -> bool:
            nonlocal steps
            steps += 1
            if budget is not None and steps > budget:
                raise _PackLimit()
            self._tick()
            if not remaining:
                return True
            # One feasibility scan drives everything: items with no node
            # fail immediately, nodes no item fits are dead capacity and
            # are left out of the aggregate check, and the branching item
            # is the one with the fewest feasible nodes (largest first on
            # ties).
            pick = -1
            pick_feas: list[int] = []
            pick_size = 0.0
            absorb = [[0.0] * L for _ in range(M)]
            for i in remaining:
                dem = demands[i]
                feas = [m for m in range(M) if fits(res[m], dem)]
                if not feas:
                    return False
                for m in feas:
                    row = absorb[m]
                    for l in rng_l:
                        row[l] += dem[l]
                size = max(dem[l] / scale[l] for l in rng_l)
                if (
                    pick < 0
                    or len(feas) < len(pick_feas)
                    or (len(feas) == len(pick_feas) and size > pick_size)
                ):
                    pick, pick_feas, pick_size = i, feas, size
            # No node can take more than its residual, nor more than the
            # items that individually fit it; the remaining total must fit
            # under the sum of those per-node ceilings.
            for l in rng_l:
                live = fsum(min(res[m][l], absorb[m][l]) for m in range(M))
                if todo[l] > live + EPS:
                    return False
            dem = demands[pick]
            remaining.remove(pick)
            for l in rng_l:
                todo[l] -= dem[l]
            # Tightest fit first; duplicate residuals lead to symmetric
            # subtrees, so only the first such node is tried.
            ranked = sorted(
                pick_feas,
                key=lambda m: (fsum((res[m][l] - dem[l]) / scale[l] for l in rng_l), m),
            )
            seen = set()
            found = False
            for m in ranked:
                sig = tuple(res[m])
                if sig in seen:
                    continue
                seen.add(sig)
                for l in rng_l:
                    res[m][l] -= dem[l]
                assign[pick] = m
                if go():
                    found = True
                    break
                for l in rng_l:
                    res[m][l] += dem[l]
            if not found:
                assign[pick] = -1
                remaining.append(pick)
                for l in rng_l:
                    todo[l] += dem[l]
            return found

        try:
            if go():
                return assign
            return None
        except _PackLimit:
            return _UNKNOWN

    def _complete(self, demands, residual, slack, budget=None):
        """Node-by-node packing decision for near-full fleets.

        Completes nodes in index order: a node's subset may waste at most
        the fleet-wide slack still unspent, so each subset's sum must land
        in a narrow window under the node's residual. Among consecutive
        nodes with identical residuals, subsets are forced into strictly
        increasing order of their largest item (empties last), which
        removes permutation symmetry. Returns assignments, None, or
        _UNKNOWN on budget exhaustion.
        """
        n = len(demands)
        L = self.L
        M = self.M
        rng_l = range(L)
        scale = self.scale

        for l in rng_l:
            if slack[l] < -EPS:
                return None

        def fits_some(dem):
            for m in range(M):
                r = residual[m]
                if all(r[l] + EPS >= dem[l] for l in rng_l):
                    return True
            return False

        if not all(fits_some(dem) for dem in demands):
            return None

        # Order items by their demand in the tightest dimension, largest
        # first; window pruning bites hardest along that axis.
        tight = min(rng_l, key=lambda l: slack[l] / scale[l])
        items = sorted(range(n), key=lambda i: (-demands[i][tight], i))
        dems = [demands[items[p]] for p in range(n)]

        # When every node from m on has the same residual, the subproblem
        # is determined by the remaining item set alone, so failed sets
        # memoize: completion paths reconverge on the same leftovers.
        same_from = [True] * (M + 1)
        for m in range(M - 2, -1, -1):
            same_from[m] = same_from[m + 1] and tuple(residual[m]) == tuple(
                residual[m + 1]
            )
        failed: set[int] = set()

        assign = [-1] * n
        steps = 0

        def fill(m, avail, slack_left, anchor):
            nonlocal steps
            if not avail:
                return True
            if anchor >= 0 and avail[0] < anchor:
                # An item ranked above this run's anchor can never be
                # placed again under the ordering rule; dead branch.
                return False
            if m == M:
                return False
            fkey = None
            if same_from[m] and m < M - 1:
                bits = 0
                for p in avail:
                    bits |= 1 << p
                fkey = (bits << 6) | (M - m)
                if fkey in failed:
                    return False
            res_m = residual[m]
            if m == M - 1:
                for l in rng_l:
                    if fsum(dems[p][l] for p in avail) > res_m[l] + EPS:
                        return False
                for p in avail:
                    assign[items[p]] = m
                return True
            nxt_anchor = -1
            if tuple(residual[m + 1]) == tuple(res_m):
                nxt_anchor = n  # overwritten with this node's first pick
            # Suffix demand sums over avail, for the reach prune.
            k_av = len(avail)
            suffix = [[0.0] * L for _ in range(k_av + 1)]
            for k in range(k_av - 1, -1, -1):
                dem = dems[avail[k]]
                for l in rng_l:
                    suffix[k][l] = suffix[k + 1][l] + dem[l]

            def subset(k, used, first, excluded):
                nonlocal steps
                steps += 1
                if budget is not None and steps > budget:
                    raise _PackLimit()
                self._tick()
                for l in rng_l:
                    # Even taking every remaining candidate, the node would
                    # waste more than the slack allowance: dead end.
                    if res_m[l] - used[l] - suffix[k][l] > slack_left[l] + EPS:
                        return False
                if k == k_av:
                    # Dominated completion: an excluded item still fits the
                    # leftover, and the variant that includes it is searched
                    # on another path.
                    for p in excluded:
                        dem = dems[p]
                        if all(used[l] + dem[l] <= res_m[l] for l in rng_l):
                            return False
                    new_slack = [
                        slack_left[l] - (res_m[l] - used[l]) for l in rng_l
                    ]
                    run_anchor = -1
                    if nxt_anchor == n:
                        run_anchor = first if first >= 0 else n
                    return fill(m + 1, excluded, new_slack, run_anchor)
                p = avail[k]
                dem = dems[p]
                if all(used[l] + dem[l] <= res_m[l] + EPS for l in rng_l):
                    assign[items[p]] = m
                    if subset(
                        k + 1,
                        [used[l] + dem[l] for l in rng_l],
                        first if first >= 0 else p,
                        excluded,
                    ):
                        return True
                    assign[items[p]] = -1
                excluded.append(p)
                hit = subset(k + 1, used, first, excluded)
                if not hit:
                    excluded.pop()
                return hit

            ok = subset(0, [0.0] * L, -1, [])
            if not ok and fkey is not None and len(failed) < 4_000_000:
                failed.add(fkey)
            return ok

        start = -1
        try:
            if fill(0, list(range(n)), list(slack), start):
                return assign
            return None
        except _PackLimit:
            return _UNKNOWN

    def _descend(self, demands, residual, order, init=None):
        """Overload-descent packing of ``demands`` into ``residual``.

        Every item is assigned to a node even when that overruns capacity;
        a steepest-descent walk over single relocations and pairwise swaps
        then drives the total normalized overrun toward zero. Returns node
        indices aligned with ``demands`` on success, None at the first
        local minimum or once the move budget runs out. Deterministic.

        ``init`` optionally pre-assigns some items (node index, or -1 for
        unassigned); the rest are placed by the initial rule and the walk
        may relocate pre-assigned items like any other.
        """
        n = len(demands)
        L = self.L
        M = self.M
        scale = self.scale
        rng_l = range(L)
        rng_m = range(M)
        zero = (0.0,) * L

        load = [[0.0] * L for _ in rng_m]
        preset = init is not None
        if preset:
            for i, m in enumerate(init):
                if m >= 0:
                    dem = demands[i]
                    row = load[m]
                    for l in rng_l:
                        row[l] += dem[l]

        def over_shift(m, add, sub):
            cap = residual[m]
            row = load[m]
            total = 0.0
            for l in rng_l:
                d = row[l] + add[l] - sub[l] - cap[l]
                if d > 0.0:
                    total += d / scale[l]
            return total

        assign = list(init) if preset else [-1] * n
        for i in order:
            if assign[i] >= 0:
                continue
            dem = demands[i]
            best = -1
            best_key = None
            for m in rng_m:
                worse = over_shift(m, dem, zero) - over_shift(m, zero, zero)
                slack = fsum(
                    (residual[m][l] - load[m][l] - dem[l]) / scale[l] for l in rng_l
                )
                key = (worse, slack, m)
                if best < 0 or key < best_key:
                    best, best_key = m, key
            assign[i] = best
            row = load[best]
            for l in rng_l:
                row[l] += dem[l]

        total = fsum(over_shift(m, zero, zero) for m in rng_m)
        steps = 0
        while total > 1e-15:
            steps += 1
            if steps > 600:
                return None
            self._tick()
            ov = [over_shift(m, zero, zero) for m in rng_m]
            best_delta = -1e-12
            best_move = None
            for i in range(n):
                a = assign[i]
                dem = demands[i]
                off = over_shift(a, zero, dem) - ov[a]
                for b in rng_m:
                    if b == a:
                        continue
                    delta = off + over_shift(b, dem, zero) - ov[b]
                    if delta < best_delta:
                        best_delta = delta
                        best_move = (i, -1, b)
            for i in range(n):
                a = assign[i]
                di = demands[i]
                for j in range(i + 1, n):
                    b = assign[j]
                    if b == a:
                        continue
                    dj = demands[j]
                    delta = (
                        over_shift(a, dj, di)
                        + over_shift(b, di, dj)
                        - ov[a]
                        - ov[b]
                    )
                    if delta < best_delta:
                        best_delta = delta
                        best_move = (i, j, b)
            if best_move is None:
                return None
            i, j, b = best_move
            di = demands[i]
            a = assign[i]
            for l in rng_l:
                load[a][l] -= di[l]
                load[b][l] += di[l]
            assign[i] = b
            if j >= 0:
                dj = demands[j]
                for l in rng_l:
                    load[b][l] -= dj[l]
                    load[a][l] += dj[l]
                assign[j] = a
            total = fsum(over_shift(m, zero, zero) for m in rng_m)
        return assign

    def _blocked(self, key) -> bool:
        """True when a proven-unpackable selection is contained in ``key``."""
        if not self.unpackable:
            return False
        kset = frozenset(key)
        return any(bad <= kset for bad in self.unpackable)

    def _extend(self, entry: _Entry, residual):
        """Pack one option's containers into the current residuals."""
        return self._pack(
            [dem for _cid, dem in entry.containers], residual, self.pack_budget
        )

    def _repack(self, picked: list[tuple[int, _Entry]], warm=None):
        """Exact packing of every committed option from fresh capacities.

        Returns (per-option assignments, residual matrix), None when the
        selection cannot be packed at all, or _UNKNOWN when the packing
        budget ran out undecided. ``warm`` optionally carries the current
        per-option assignments for all but the last committed option; the
        overload-descent walk then starts from that arrangement before the
        full search is tried.
        """
        key = tuple((pid, entry.option_id) for pid, entry in picked)
        hit = self.repack_cache.get(key)
        if hit is not None:
            tag = hit[0]
            if tag == "ok":
                return [list(row) for row in hit[1]], [row[:] for row in hit[2]]
            if tag == "none":
                return None
            # Unknown: still unknown unless the budget has grown since.
            if self.pack_budget is not None and self.pack_budget <= hit[1]:
                return _UNKNOWN
        if self._blocked(key):
            return None

        items: list[tuple[tuple[float, ...], int, int]] = []
        for which, (_pid, entry) in enumerate(picked):
            for pos, (_cid, dem) in enumerate(entry.containers):
                items.append((dem, which, pos))
        # Global largest-first order for packing effectiveness; ties fall
        # back to committed order so the search stays deterministic.
        items.sort(
            key=lambda it: (
                -max(d / t for d, t in zip(it[0], self.totals)),
                it[1],
                it[2],
            )
        )
        residual = [list(c) for c in self.caps]
        dems = [it[0] for it in items]
        assign = None
        if warm is not None:
            init = [
                warm[which][pos] if which < len(warm) else -1
                for _dem, which, pos in items
            ]
            assign = self._descend(dems, residual, range(len(items)), init)
        if assign is None:
            assign = self._pack(dems, residual, self.pack_budget)
            if assign is None:
                self.repack_cache[key] = ("none",)
                kset = frozenset(key)
                if not any(bad <= kset for bad in self.unpackable):
                    self.unpackable = [
                        bad for bad in self.unpackable if not kset <= bad
                    ]
                    self.unpackable.append(kset)
                return None
            if assign is _UNKNOWN:
                self.repack_cache[key] = ("unk", self.pack_budget)
                return _UNKNOWN
        per_option: list[list[int]] = [
            [0] * len(entry.containers) for _pid, entry in picked
        ]
        for (dem, which, pos), m in zip(items, assign):
            per_option[which][pos] = m
            for l in range(self.L):
                residual[m][l] -= dem[l]
        self.repack_cache[key] = (
            "ok",
            [list(row) for row in per_option],
            [row[:] for row in residual],
        )
        return per_option, residual

    # ---- main search --------------------------------------------------

    def _record_leaf(self, picked: list[tuple[int, _Entry]], assigns: list[list[int]]) -> None:
        utilities = {pid: entry.utility for pid, entry in picked}
        # Canonical objective: exact sum in scenario declaration order.
        obj = fsum(
            utilities[p.provider_id]
            for p in self.scenario.providers
            if p.provider_id in utilities
        )
        if obj > self.best_obj:
            choices = {pid: entry.option_id for pid, entry in picked}
            placements = {}
            for (pid, entry), nodes in zip(picked, assigns):
                for (cid, _dem), m in zip(entry.containers, nodes):
                    placements[(pid, entry.option_id, cid)] = self.node_ids[m]
            self.best_obj = obj
            self.best_alloc = Allocation(choices, placements)

    def _visit(self, k: int, acc: float, picked, assigns, residual) -> None:
        self._tick()
        if k == self.K:
            self._record_leaf(picked, assigns)
            return
        if acc + self._bound_rest(k, self.agg_residual) <= self.best_obj:
            return
        pid = self.pids[k]
        for entry in self.options[k]:
            agg = entry.agg
            if any(agg[l] > self.agg_residual[l] + EPS for l in range(self.L)):
                continue
            after = tuple(self.agg_residual[l] - agg[l] for l in range(self.L))
            if acc + entry.utility + self._bound_rest(k + 1, after) <= self.best_obj:
                continue
            if self.unpackable and self._blocked(
                tuple((p, e.option_id) for p, e in picked) + ((pid, entry.option_id),)
            ):
                continue
            ext = self._extend(entry, residual)
            if ext is not None and ext is not _UNKNOWN:
                new_residual = [row[:] for row in residual]
                for (_cid, dem), m in zip(entry.containers, ext):
                    for l in range(self.L):
                        new_residual[m][l] -= dem[l]
                new_assigns = assigns + [ext]
                new_picked = picked + [(pid, entry)]
            else:
                repacked = self._repack(picked + [(pid, entry)], warm=assigns)
                if repacked is None:
                    continue
                if repacked is _UNKNOWN:
                    # Undecided within the packing budget: skip the option
                    # for this pass and let the next pass dig deeper.
                    self.unknown_seen = True
                    continue
                per_option, new_residual = repacked
                new_picked = picked + [(pid, entry)]
                new_assigns = per_option
            for l in range(self.L):
                self.agg_residual[l] -= agg[l]
            self._visit(k + 1, acc + entry.utility, new_picked, new_assigns, new_residual)
            for l in range(self.L):
                self.agg_residual[l] += agg[l]
        if acc + self._bound_rest(k + 1, self.agg_residual) > self.best_obj:
            self._visit(k + 1, acc, picked, assigns, residual)

    def run(self) -> tuple[Allocation, float, bool]:
        # Warm start from the deterministic greedy solution; the search then
        # only has to beat it, so it dominates greedy by construction.
        warm_alloc, _ = solve_greedy(self.scenario)
        self.best_alloc = warm_alloc
        self.best_obj = total_utility(self.scenario, warm_alloc)

        if self.limits.time_limit_ms is not None:
            self.deadline = time.perf_counter() + self.limits.time_limit_ms / 1000.0

        # Selection recursion nests one frame per provider; packing nests one
        # frame per committed container.
        total_containers = sum(
            max(len(e.containers) for e in entries) for entries in self.options
        )
        depth = self.K + total_containers + 128
        if sys.getrecursionlimit() < depth + 100:
            sys.setrecursionlimit(depth + 1000)

        # Iterative deepening over the packing allowance: every pass walks
        # the whole selection tree; undecided packings skip their branch
        # and flag the pass, and the next pass digs 8x deeper. Incumbents
        # carry across passes, so later passes prune near-optimal branches
        # before their packing queries even run.
        proven = True
        try:
            while True:
                self.unknown_seen = False
                residual = [list(c) for c in self.caps]
                self._visit(0, 0.0, [], [], residual)
                if not self.unknown_seen:
                    break
                nxt = (self.pack_budget or 0) * _PACK_BUDGET_GROWTH
                self.pack_budget = None if nxt > _PACK_BUDGET_MAX else nxt
        except _Stop:
            proven = False
        return self.best_alloc, self.best_obj, proven


def solve_exact(
    scenario: Scenario,
    limits: SolveLimits | None = None,
    *,
    use_tight_bound: bool = True,
) -> tuple[Allocation, SolveReport]:
    """Branch-and-bound solve; optimal unless a limit stops the search early.

    Returns the best allocation found and a report. ``proven_optimal`` is
    True iff the search ran to completion; on a limit hit the incumbent is
    returned with ``proven_optimal=False``, never an error. The empty
    allocation is always feasible, so there is no infeasible case.
    ``use_tight_bound`` toggles the knapsack-table pruning bound and never
    changes the returned objective.
    """
    t0 = time.perf_counter()
    search = _Search(scenario, limits or SolveLimits(), use_tight_bound)
    alloc, _obj, proven = search.run()
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return alloc, build_report(scenario, alloc, "exact", runtime_ms, proven)


def enumeration_size(scenario: Scenario) -> int:
    """Exact number of (option selection, placement) leaves brute force would visit."""
    M = len(scenario.nodes)
    total = 1
    for provider in scenario.providers:
        total *= 1 + sum(M ** len(o.containers) for o in provider.options)
    return total


def brute_force(
    scenario: Scenario, leaf_guard: int = BRUTE_FORCE_LEAF_GUARD
) -> tuple[Allocation, SolveReport]:
    """Exhaustive oracle: enumerate every option selection and every placement.

    Refuses instances whose enumeration exceeds ``leaf_guard`` leaves.
    Independent of the branch-and-bound implementation by design.
    """
    t0 = time.perf_counter()
    size = enumeration_size(scenario)
    if size > leaf_guard:
        raise InstanceTooLargeError(
            f"enumeration would visit {size} leaves (guard: {leaf_guard})"
        )

    L = scenario.num_resources
    M = len(scenario.nodes)
    node_ids = [node.node_id for node in scenario.nodes]
    caps = [list(node.capacities) for node in scenario.nodes]

    best_obj = 0.0
    best_choices: dict[int, int] = {}
    best_placement: dict[tuple[int, int, int], int] = {}

    per_provider: list[list[None | object]] = [
        [None] + list(p.options) for p in scenario.providers
    ]

    def find_placement(containers: list[tuple[int, int, int, tuple[float, ...]]]):
        """First feasible assignment of every container to a node, or None."""
        residual = [row[:] for row in caps]
        assign: list[int] = []

        def go(idx: int) -> bool:
            if idx == len(containers):
                return True
            _pid, _oid, _cid, demand = containers[idx]
            for m in range(M):
                if all(residual[m][l] + EPS >= demand[l] for l in range(L)):
                    for l in range(L):
                        residual[m][l] -= demand[l]
                    assign.append(m)
                    if go(idx + 1):
                        return True
                    assign.pop()
                    for l in range(L):
                        residual[m][l] += demand[l]
            return False

        return assign if go(0) else None

    for combo in itertools.product(*per_provider):
        obj = fsum(o.utility for o in combo if o is not None)
        if obj <= best_obj:
            continue
        containers = [
            (p.provider_id, o.option_id, c.container_id, tuple(c.demands))
            for p, o in zip(scenario.providers, combo)
            if o is not None
            for c in o.containers
        ]
        assign = find_placement(containers)
        if assign is None:
            continue
        best_obj = obj
        best_choices = {
            p.provider_id: o.option_id
            for p, o in zip(scenario.providers, combo)
            if o is not None
        }
        best_placement = {
            (pid, oid, cid): node_ids[m]
            for (pid, oid, cid, _), m in zip(containers, assign)
        }

    alloc = Allocation(best_choices, best_placement)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return alloc, build_report(scenario, alloc, "brute-force", runtime_ms, proven_optimal=True)
