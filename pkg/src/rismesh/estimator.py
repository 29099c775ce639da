"""Scikit-learn style front end tying the pipeline together.

``build_network`` does the demand-independent work once (candidate routes,
relay insertion, conflict sets). :class:`PathSelector` then fits a demand
set against that network and exposes the usual estimator surface
(``get_params``/``set_params``/``clone`` come from ``BaseEstimator``).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .conflict import ConflictSet, build_conflict_sets, route_exclusions
from .optimizer import Instance, Solution, evaluate_lambda, solve_exact, solve_heuristic, throughput_gain
from .relay import find_relay_nodes
from .topology import Demand, PathRoute, Scenario, build_demands, candidate_paths
from .validation import Infeasible, check_count

log = logging.getLogger(__name__)

MODES = ("auto", "exact", "heuristic")


@dataclass(frozen=True)
class MeshNetwork:
    """Candidate routes per (BS, UE) pair and the network-wide conflict sets."""

    scenario: Scenario
    routes: dict  # (bs, ue) -> tuple[PathRoute, ...], shortest first
    conflict_sets: tuple[ConflictSet, ...]
    pool_size: int

    def candidates_for(self, bs: int, ue: int, k: int) -> tuple[PathRoute, ...]:
        return self.routes.get((bs, ue), ())[:k]

    @property
    def capacities(self) -> dict:
        return {t.key: t.capacity for rs in self.routes.values() for r in rs for t in r.transmissions}


def candidate_routes(scenario: Scenario, bs: int, ue: int, K: int) -> list[PathRoute]:
    """The K shortest RIS-only paths, repaired with relays where needed.

    Paths that cannot be repaired are dropped, so fewer than K may remain.
    """
    out = []
    for path in candidate_paths(scenario, bs, ue, K):
        insertion = find_relay_nodes(scenario, path)
        if insertion.ok:
            out.append(insertion.route)
    return out


def build_network(
    scenario: Scenario,
    pool_size: int = 5,
    strict_pairs: bool = False,
    n_jobs: int = 1,
    pairs=None,
) -> MeshNetwork:
    check_count(pool_size, "pool_size", 1)
    if pairs is None:
        pairs = list(zip(scenario.ids("BS"), scenario.ids("UE")))
    routes = {}
    for bs, ue in pairs:
        found = candidate_routes(scenario, bs, ue, pool_size)
        if not found:
            log.warning("no usable route between node %d and node %d", bs, ue)
        routes[(bs, ue)] = tuple(found)
    all_routes = [r for rs in routes.values() for r in rs]
    txs = [t for r in all_routes for t in r.transmissions]
    sets = build_conflict_sets(txs, scenario, route_exclusions(all_routes), strict_pairs, n_jobs)
    return MeshNetwork(scenario, routes, tuple(sets), pool_size)


def check_demands(network: MeshNetwork, demands) -> list[Demand]:
    """Keep demands that have at least one route; raise if none do."""
    demands = list(demands)
    for d in demands:
        if not isinstance(d, Demand):
            raise TypeError(f"expected Demand, got {type(d).__name__}")
    kept = [d for d in demands if network.routes.get((d.bs, d.ue))]
    if demands and not kept:
        raise Infeasible("no demand can be routed")
    if len(kept) < len(demands):
        log.warning("dropping %d unroutable demands", len(demands) - len(kept))
    return kept


class PathSelector(BaseEstimator):
    """Choose one route per demand to maximise the demand multiplier.

    Parameters
    ----------
    n_paths : int
        Candidate routes considered per demand (5 for least-interference
        selection, 1 for shortest-path routing).
    pool_size : int
        Candidate routes per pair used to build conflict sets when fitting
        on a bare :class:`Scenario`.
    mode : {"auto", "exact", "heuristic"}
        "auto" solves exactly while the search space is within
        ``exhaustive_limit`` and falls back to the heuristic otherwise.
    """

    def __init__(
        self,
        n_paths: int = 5,
        pool_size: int = 5,
        mode: str = "auto",
        strict_pairs: bool = False,
        exhaustive_limit: int = 10**6,
        node_limit: int = 5_000_000,
        random_state: int = 0,
        n_jobs: int = 1,
    ):
        self.n_paths = n_paths
        self.pool_size = pool_size
        self.mode = mode
        self.strict_pairs = strict_pairs
        self.exhaustive_limit = exhaustive_limit
        self.node_limit = node_limit
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _validate_params(self):
        check_count(self.n_paths, "n_paths", 1)
        check_count(self.pool_size, "pool_size", 1)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def fit(self, X, y):
        """Fit on a Scenario or prebuilt MeshNetwork ``X`` and demands ``y``."""
        self._validate_params()
        if isinstance(X, Scenario):
            X = build_network(X, max(self.pool_size, self.n_paths), self.strict_pairs, self.n_jobs)
        if not isinstance(X, MeshNetwork):
            raise TypeError("X must be a Scenario or a MeshNetwork")
        demands = check_demands(X, y)
        candidates = [X.candidates_for(d.bs, d.ue, self.n_paths) for d in demands]
        self.network_ = X
        self.demands_ = tuple(demands)
        self.instance_ = Instance.build(demands, candidates, X.conflict_sets, X.capacities)
        mode = self.mode
        if mode == "auto":
            mode = "exact" if self.instance_.search_space() <= self.exhaustive_limit else "heuristic"
        if mode == "exact":
            self.solution_ = solve_exact(self.instance_, self.exhaustive_limit, True, self.node_limit)
        else:
            self.solution_ = solve_heuristic(self.instance_, self.random_state)
        self.solved_mode_ = mode
        self.lambda_ = self.solution_.lam
        return self

    def predict(self, X=None) -> list[PathRoute]:
        """Chosen route for each fitted demand."""
        check_is_fitted(self, "solution_")
        return [c[a] for c, a in zip(self.instance_.candidates, self.solution_.assignment)]

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "solution_")
        return self.lambda_


@dataclass(frozen=True)
class SweepRow:
    demand_count: int
    method: str
    lam: float
    gain: float | None
    wall_time: float
    mode: str
    instance: Instance | None = field(default=None, repr=False, compare=False)
    solution: Solution | None = field(default=None, repr=False, compare=False)


METHODS = (("DDP-LI", 5), ("DDP-SP", 1))


def throughput_sweep(
    network: MeshNetwork,
    counts,
    k: float = 0.05,
    mode: str = "auto",
    methods=METHODS,
    random_state: int = 0,
    exhaustive_limit: int = 10**6,
) -> list[SweepRow]:
    """Lambda per demand count and routing method.

    Demand sets grow by appending, so a solution for a larger count
    restricted to its first demands is feasible for a smaller one; a
    backward pass uses that to keep heuristic results monotone.
    """
    counts = sorted(set(int(c) for c in counts))
    scen = network.scenario
    results: dict[tuple[str, int], tuple[Solution, float, str]] = {}
    instances: dict[tuple[str, int], Instance] = {}
    for name, n_paths in methods:
        for c in counts:
            t0 = time.perf_counter()
            sel = PathSelector(n_paths=n_paths, mode=mode, random_state=random_state,
                               exhaustive_limit=exhaustive_limit)
            sel.fit(network, build_demands(scen, c, k))
            instances[(name, c)] = sel.instance_
            results[(name, c)] = (sel.solution_, time.perf_counter() - t0, sel.solved_mode_)
        for hi, lo in zip(reversed(counts[1:]), reversed(counts[:-1])):
            small = instances[(name, lo)]
            restricted = results[(name, hi)][0].assignment[: len(small.demands)]
            cand = evaluate_lambda(small, restricted)
            sol, dt, m = results[(name, lo)]
            if cand.lam > sol.lam:
                results[(name, lo)] = (cand, dt, m)

    rows = []
    for c in counts:
        lams = {name: results[(name, c)][0].lam for name, _ in methods}
        li, sp = lams.get("DDP-LI"), lams.get("DDP-SP")
        gain = None
        if li is not None and sp is not None and math.isfinite(li) and math.isfinite(sp) and sp > 0:
            gain = throughput_gain(li, sp)
        for name, _ in methods:
            sol, dt, m = results[(name, c)]
            rows.append(SweepRow(c, name, sol.lam, gain, dt, m, instances[(name, c)], sol))
    return rows
