"""Throughput maximisation: pick one candidate route per demand so that the
uniform demand multiplier (lambda) allowed by the conflict sets is largest.

With the route choice fixed, per-transmission traffic and lambda follow in
closed form, so the problem is a pure combinatorial search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conflict import ConflictSet
from .topology import Demand, PathRoute
from .validation import TooLarge

GBIT = 1e9
UNBOUNDED = "unbounded"

# Relative slack for pruning and for incremental-load comparisons; final
# comparisons always use the exactly-rounded evaluation.
_REL_EPS = 1e-9


@dataclass(frozen=True)
class Instance:
    demands: tuple[Demand, ...]
    candidates: tuple[tuple[PathRoute, ...], ...]
    conflict_sets: tuple[ConflictSet, ...]
    capacities: dict = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))
        object.__setattr__(self, "candidates", tuple(tuple(c) for c in self.candidates))
        object.__setattr__(self, "conflict_sets", tuple(self.conflict_sets))
        if len(self.demands) != len(self.candidates):
            raise ValueError("one candidate list per demand is required")
        for d, cands in zip(self.demands, self.candidates):
            if not cands:
                raise ValueError(f"demand {d.id} has no candidate route")
            for route in cands:
                for key in route.keys:
                    if key not in self.capacities:
                        raise ValueError(f"no capacity for transmission {key}")
        for cs in self.conflict_sets:
            for key in cs.members:
                if key not in self.capacities:
                    raise ValueError(f"conflict set references unknown transmission {key}")

    @classmethod
    def build(cls, demands, candidates, conflict_sets, capacities=None) -> Instance:
        """Collect capacities from the candidate routes unless given."""
        if capacities is None:
            capacities = {}
            for cands in candidates:
                for route in cands:
                    for t in route.transmissions:
                        capacities[t.key] = t.capacity
        return cls(tuple(demands), tuple(tuple(c) for c in candidates), tuple(conflict_sets), dict(capacities))

    def search_space(self) -> int:
        return math.prod(len(c) for c in self.candidates)


@dataclass(frozen=True)
class Solution:
    assignment: tuple[int, ...]
    y: dict
    lam: float
    binding_set: ConflictSet | None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.lam)


def _check_assignment(instance: Instance, assignment) -> tuple[int, ...]:
    assignment = tuple(int(a) for a in assignment)
    if len(assignment) != len(instance.demands):
        raise ValueError("assignment must pick one route per demand")
    for a, cands in zip(assignment, instance.candidates):
        if not 0 <= a < len(cands):
            raise ValueError(f"route index {a} out of range")
    return assignment


def aggregate_traffic(instance: Instance, assignment) -> dict:
    """Traffic (Gbit) carried by each transmission used by the chosen routes."""
    assignment = _check_assignment(instance, assignment)
    parts: dict[tuple, list[float]] = {}
    for demand, cands, a in zip(instance.demands, instance.candidates, assignment):
        for key in dict.fromkeys(cands[a].keys):
            parts.setdefault(key, []).append(demand.k)
    return {key: math.fsum(v) for key, v in sorted(parts.items())}


def set_loads(instance: Instance, y: dict) -> list[float]:
    """Busy-time fraction of each conflict set for traffic ``y``."""
    caps = instance.capacities
    return [math.fsum(y[k] * GBIT / caps[k] for k in cs.members if k in y) for cs in instance.conflict_sets]


def evaluate_lambda(instance: Instance, assignment) -> Solution:
    assignment = _check_assignment(instance, assignment)
    y = aggregate_traffic(instance, assignment)
    loads = set_loads(instance, y)
    worst = max(loads, default=0.0)
    if worst <= 0.0:
        return Solution(assignment, y, math.inf, None)
    binding = instance.conflict_sets[loads.index(worst)]
    return Solution(assignment, y, 1.0 / worst, binding)


class _LoadModel:
    """Dense per-(demand, route) load contributions for fast incremental search."""

    def __init__(self, instance: Instance):
        index = {cs_i: cs for cs_i, cs in enumerate(instance.conflict_sets)}
        member_of: dict[tuple, list[int]] = {}
        for i, cs in index.items():
            for key in cs.members:
                member_of.setdefault(key, []).append(i)
        n_sets = len(index)
        self.contrib = []
        for demand, cands in zip(instance.demands, instance.candidates):
            rows = np.zeros((len(cands), n_sets))
            for p, route in enumerate(cands):
                for key in dict.fromkeys(route.keys):
                    for i in member_of.get(key, ()):
                        rows[p, i] += demand.k * GBIT / instance.capacities[key]
            self.contrib.append(rows)
        self.n_sets = n_sets

    def loads(self, assignment) -> np.ndarray:
        total = np.zeros(self.n_sets)
        for rows, a in zip(self.contrib, assignment):
            total += rows[a]
        return total


def _symmetry_classes(instance: Instance) -> list[int | None]:
    """For each demand, the previous demand it is interchangeable with."""
    last: dict = {}
    prev: list[int | None] = []
    for i, (d, cands) in enumerate(zip(instance.demands, instance.candidates)):
        sig = (d.k, tuple(r.keys for r in cands))
        prev.append(last.get(sig))
        last[sig] = i
    return prev


def _decode(start: int, stop: int, sizes: list[int]) -> np.ndarray:
    """Assignments number ``start``..``stop-1`` in lexicographic order."""
    rem = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((stop - start, len(sizes)), dtype=np.int64)
    for i in range(len(sizes) - 1, -1, -1):
        digits[:, i] = rem % sizes[i]
        rem //= sizes[i]
    return digits


def solve_exhaustive(instance: Instance, chunk: int = 1 << 15) -> Solution:
    """Evaluate every assignment; ties go to the lexicographically smallest.

    Loads are screened in vectorised chunks. Every assignment whose peak
    load is within a relative 1e-9 of the best seen is kept, and the
    shortlist is then ranked with the exact evaluation.
    """
    n = len(instance.demands)
    if n == 0:
        return evaluate_lambda(instance, ())
    model = _LoadModel(instance)
    sizes = [len(c) for c in instance.candidates]
    total = math.prod(sizes)
    # interchangeable demands tie exactly, and the sorted order wins the tie
    sym = [(p, i) for i, p in enumerate(_symmetry_classes(instance)) if p is not None]
    best_peak = math.inf
    shortlist: list[tuple[float, tuple[int, ...]]] = []
    for start in range(0, total, chunk):
        digits = _decode(start, min(start + chunk, total), sizes)
        loads = np.zeros((len(digits), model.n_sets))
        for i in range(n):
            loads += model.contrib[i][digits[:, i]]
        peak = loads.max(axis=1) if model.n_sets else np.zeros(len(digits))
        low = float(peak.min())
        if low == 0.0:
            # nothing loaded: unbounded, and the first such row is the tie winner
            return evaluate_lambda(instance, digits[int(np.argmax(peak == 0.0))])
        if low < best_peak:
            best_peak = low
            shortlist = [s for s in shortlist if s[0] <= best_peak * (1 + _REL_EPS)]
        ok = peak <= best_peak * (1 + _REL_EPS)
        for p, i in sym:
            ok &= digits[:, p] <= digits[:, i]
        keep = np.flatnonzero(ok)
        shortlist.extend((float(peak[j]), tuple(digits[j].tolist())) for j in keep)
    best = None
    for _, assignment in shortlist:
        sol = evaluate_lambda(instance, assignment)
        if best is None or sol.lam > best.lam:
            best = sol
    return best


def solve_branch_and_bound(instance: Instance, node_limit: int = 5_000_000) -> Solution:
    """Depth-first search in lexicographic order, pruning on the partial max load.

    Loads only grow as demands are fixed, so a partial assignment whose
    worst set is already more loaded than the incumbent cannot win.
    Interchangeable demands are kept in non-decreasing route order.
    """
    n = len(instance.demands)
    if n == 0:
        return evaluate_lambda(instance, ())
    model = _LoadModel(instance)
    prev = _symmetry_classes(instance)
    choice = [0] * n
    best: list = [None, math.inf]  # solution, its max load
    nodes = 0

    def dfs(i, loads):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise TooLarge(f"branch-and-bound exceeded {node_limit} nodes; use heuristic mode")
        if i == n:
            sol = evaluate_lambda(instance, choice)
            if best[0] is None or sol.lam > best[0].lam:
                best[0] = sol
                best[1] = 0.0 if sol.unbounded else 1.0 / sol.lam
            return
        start = choice[prev[i]] if prev[i] is not None else 0
        for p in range(start, len(instance.candidates[i])):
            new = loads + model.contrib[i][p]
            peak = float(new.max()) if new.size else 0.0
            if best[0] is not None and peak > best[1] * (1 + _REL_EPS):
                continue
            choice[i] = p
            dfs(i + 1, new)
        choice[i] = 0

    dfs(0, np.zeros(model.n_sets))
    return best[0]


def solve_exact(
    instance: Instance,
    exhaustive_limit: int = 10**6,
    branch_and_bound: bool = True,
    node_limit: int = 5_000_000,
) -> Solution:
    """Globally optimal assignment (exhaustive when small, else branch-and-bound)."""
    if instance.search_space() <= exhaustive_limit:
        return solve_exhaustive(instance)
    if not branch_and_bound:
        raise TooLarge(
            f"{instance.search_space()} assignments exceed the exhaustive limit {exhaustive_limit}; "
            "enable branch-and-bound or use heuristic mode"
        )
    return solve_branch_and_bound(instance, node_limit)


def _score(loads: np.ndarray) -> tuple[float, float]:
    if loads.size == 0:
        return 0.0, 0.0
    return float(loads.max()), float(loads @ loads)


def _better(a: tuple[float, float], b: tuple[float, float]) -> bool:
    if a[0] < b[0] * (1 - _REL_EPS):
        return True
    return a[0] <= b[0] * (1 + _REL_EPS) and a[1] < b[1] * (1 - _REL_EPS)


def solve_heuristic(instance: Instance, seed: int = 0, start=None) -> Solution:
    """Greedy construction followed by single-demand local search.

    Demands are placed in id order, each on the route that minimises the
    current worst load. The better of that and ``start`` (by default the
    all-first-route assignment) seeds a first-improvement search over
    single-demand route changes, visited in a seeded order.
    """
    n = len(instance.demands)
    model = _LoadModel(instance)
    loads = np.zeros(model.n_sets)
    greedy = []
    for i in range(n):
        options = [_score(loads + row) for row in model.contrib[i]]
        p = min(range(len(options)), key=lambda q: (options[q], q))
        greedy.append(p)
        loads = loads + model.contrib[i][p]
    baseline = tuple(start) if start is not None else (0,) * n
    seeds = [evaluate_lambda(instance, greedy), evaluate_lambda(instance, baseline)]
    initial = max(seeds, key=lambda s: s.lam)  # ties keep the greedy start

    current = list(initial.assignment)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    improved = True
    while improved:
        improved = False
        loads = model.loads(current)
        score = _score(loads)
        for i in order:
            base = loads - model.contrib[i][current[i]]
            for p in range(len(instance.candidates[i])):
                if p == current[i]:
                    continue
                trial = base + model.contrib[i][p]
                s = _score(trial)
                if _better(s, score):
                    current[i] = p
                    loads, score = trial, s
                    improved = True
                    break
    final = evaluate_lambda(instance, current)
    return final if final.lam >= initial.lam else initial


def throughput_gain(lambda_li: float, lambda_sp: float) -> float:
    for name, v in (("lambda_li", lambda_li), ("lambda_sp", lambda_sp)):
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"gain undefined for {name}={v}")
    return lambda_li / lambda_sp


def format_lambda(lam: float) -> str | float:
    return UNBOUNDED if math.isinf(lam) else lam


def solution_to_dict(instance: Instance, sol: Solution, scenario=None) -> dict:
    def label(ids):
        if scenario is None:
            return None
        return " -> ".join(scenario.label(n) for n in ids)

    chosen = []
    for demand, cands, a in zip(instance.demands, instance.candidates, sol.assignment):
        route = cands[a]
        entry = {"demand": demand.id, "bs": demand.bs, "ue": demand.ue, "route_index": a,
                 "nodes": list(route.nodes), "relays": list(route.relays)}
        if scenario is not None:
            entry["labels"] = label(route.nodes)
        chosen.append(entry)
    traffic = [
        {"transmission": [k[0], *k[1], k[2]], "y_gbit": v, "capacity_bps": instance.capacities[k]}
        for k, v in sol.y.items()
    ]
    binding = None
    if sol.binding_set is not None:
        binding = [[k[0], *k[1], k[2]] for k in sol.binding_set.members]
    return {"lambda": format_lambda(sol.lam), "assignment": chosen, "traffic": traffic, "binding_set": binding}
