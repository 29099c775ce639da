"""Scenarios, transmissions and RIS-only candidate path enumeration."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import channel
from .channel import PhyParams
from .geometry import RisPanel, illuminated, illuminated_by_radius
from .validation import check_count, check_positive, check_vec3

SCHEMA_VERSION = 1
KINDS = ("BS", "RIS", "RN", "UE")

#: Default RIS panel area (m^2) from the simulation table.
DEFAULT_RIS_AREA = 0.0022
DEFAULT_PATH_REACH = 20.0
DEFAULT_BOX = (32.0, 32.0, 32.0)
DEFAULT_COUNTS = {"BS": 7, "RIS": 28, "RN": 28, "UE": 7}


@dataclass(frozen=True, eq=False)
class Node:
    id: int
    kind: str
    pos: np.ndarray
    ris: RisPanel | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        object.__setattr__(self, "pos", check_vec3(self.pos, "pos"))
        if (self.kind == "RIS") != (self.ris is not None):
            raise ValueError("a RisPanel is required for RIS nodes and only for them")


def default_panel(phy: PhyParams, area: float = DEFAULT_RIS_AREA) -> RisPanel:
    """Half-wavelength elements tiling a panel of ``area`` m^2."""
    half = phy.wavelength / 2.0
    return RisPanel.from_area(area, half, half)


@dataclass(frozen=True, eq=False)
class Scenario:
    nodes: tuple[Node, ...]
    phy: PhyParams
    box: tuple[float, float, float]
    max_hop_len: float
    max_path_reach: float = DEFAULT_PATH_REACH
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "box", tuple(float(b) for b in self.box))
        for b in self.box:
            check_positive(b, "box extent")
        check_positive(self.max_hop_len, "max_hop_len")
        check_positive(self.max_path_reach, "max_path_reach")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")

    @cached_property
    def by_id(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: int) -> Node:
        return self.by_id[node_id]

    def ids(self, kind: str) -> list[int]:
        return sorted(n.id for n in self.nodes if n.kind == kind)

    def label(self, node_id: int) -> str:
        node = self.by_id[node_id]
        return f"{node.kind} {self.ids(node.kind).index(node_id)}"

    def distance(self, a: int, b: int) -> float:
        return float(np.linalg.norm(self.by_id[a].pos - self.by_id[b].pos))

    def counts(self) -> dict[str, int]:
        return {k: len(self.ids(k)) for k in KINDS}


@dataclass(frozen=True)
class Demand:
    id: int
    bs: int
    ue: int
    k: float = 0.05  # Gbit

    def __post_init__(self):
        check_positive(self.k, "k")


@dataclass(frozen=True)
class Transmission:
    """One scheduled unit: transmitter, ordered RIS chain, receiver."""

    be: int
    ris_chain: tuple[int, ...]
    eu: int
    distances: tuple[float, ...]
    element_counts: tuple[int, ...]
    alpha: float
    r_ira: float | None
    p_eu: float
    snr: float
    capacity: float

    @property
    def key(self) -> tuple:
        return (self.be, self.ris_chain, self.eu)

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.be, *self.ris_chain, self.eu)

    @property
    def hop_count(self) -> int:
        return len(self.distances)

    @property
    def length(self) -> float:
        return math.fsum(self.distances)


@dataclass(frozen=True)
class PathRoute:
    """End-to-end route split into transmissions at relay nodes."""

    bs: int
    ue: int
    transmissions: tuple[Transmission, ...]

    def __post_init__(self):
        txs = self.transmissions
        if not txs or txs[0].be != self.bs or txs[-1].eu != self.ue:
            raise ValueError("route endpoints do not match its transmissions")
        for a, b in zip(txs, txs[1:]):
            if a.eu != b.be:
                raise ValueError("route segments do not chain")

    @property
    def hop_count(self) -> int:
        return sum(t.hop_count for t in self.transmissions)

    @property
    def total_length(self) -> float:
        return math.fsum(d for t in self.transmissions for d in t.distances)

    @property
    def relays(self) -> tuple[int, ...]:
        return tuple(t.eu for t in self.transmissions[:-1])

    @property
    def nodes(self) -> tuple[int, ...]:
        out = [self.bs]
        for t in self.transmissions:
            out.extend(t.nodes[1:])
        return tuple(out)

    @property
    def keys(self) -> tuple[tuple, ...]:
        return tuple(t.key for t in self.transmissions)


@dataclass(frozen=True)
class PathEvaluation:
    path: tuple[int, ...]
    transmission: Transmission
    feasible: bool


def generate_scenario(
    seed: int,
    counts: dict[str, int] | None = None,
    box=DEFAULT_BOX,
    phy: PhyParams | None = None,
    panel: RisPanel | None = None,
    max_hop_len: float | None = None,
    max_path_reach: float = DEFAULT_PATH_REACH,
) -> Scenario:
    """Uniformly place nodes in ``box`` from a seeded generator.

    Nodes are numbered BS first, then RIS, RN and UE. ``max_hop_len``
    defaults to the direct-link threshold distance.
    """
    phy = phy or PhyParams()
    counts = {**DEFAULT_COUNTS, **(counts or {})}
    for kind in KINDS:
        check_count(counts[kind], f"{kind} count")
    box = tuple(float(b) for b in box)
    for b in box:
        check_positive(b, "box extent")
    panel = panel or default_panel(phy)
    if max_hop_len is None:
        max_hop_len = channel.threshold_distance(phy)

    rng = np.random.default_rng(seed)
    total = sum(counts[k] for k in KINDS)
    positions = rng.uniform(0.0, 1.0, size=(total, 3)) * np.asarray(box)
    nodes = []
    for kind in KINDS:
        for _ in range(counts[kind]):
            i = len(nodes)
            nodes.append(Node(i, kind, positions[i], panel if kind == "RIS" else None))
    return Scenario(tuple(nodes), phy, box, float(max_hop_len), float(max_path_reach), seed)


def build_demands(scenario: Scenario, count: int, k: float = 0.05) -> list[Demand]:
    """``count`` uniform requests cycling over the (BS i, UE i) pairs."""
    check_count(count, "count")
    pairs = list(zip(scenario.ids("BS"), scenario.ids("UE")))
    if not pairs:
        return []
    return [Demand(j, *pairs[j % len(pairs)], k) for j in range(count)]


def make_transmission(scenario: Scenario, be: int, ris_chain, eu: int, alpha: float | None = None) -> Transmission:
    """Annotate a (transmitter, RIS chain, receiver) triple with its link budget."""
    phy = scenario.phy
    alpha = phy.alpha if alpha is None else alpha
    chain = tuple(ris_chain)
    seq = (be, *chain, eu)
    distances = tuple(scenario.distance(a, b) for a, b in zip(seq, seq[1:]))
    if any(d <= 0 for d in distances):
        raise ValueError("coincident nodes on a transmission")
    counts: list[int] = []
    r_ira = None
    if chain:
        first = illuminated(scenario.node(chain[0]).ris, alpha, distances[0])
        r_ira = first.radius
        counts.append(first.element_count)
        for r in chain[1:]:
            counts.append(illuminated_by_radius(scenario.node(r).ris, r_ira).element_count)
    budget = channel.link_budget(distances, counts, phy, alpha)
    return Transmission(be, chain, eu, distances, tuple(counts), alpha, r_ira, budget.p_eu, budget.snr, budget.capacity)


def is_detectable(scenario: Scenario, tx: Transmission) -> bool:
    """SNR above threshold and within the relay-free path reach."""
    return tx.snr > scenario.phy.snr_threshold and tx.length <= scenario.max_path_reach


def evaluate_path(scenario: Scenario, path) -> PathEvaluation:
    path = tuple(path)
    if len(path) < 2:
        raise ValueError("a path needs at least a source and a destination")
    tx = make_transmission(scenario, path[0], path[1:-1], path[-1])
    return PathEvaluation(path, tx, is_detectable(scenario, tx))


def _path_key(scenario: Scenario, path: tuple[int, ...]):
    length = math.fsum(scenario.distance(a, b) for a, b in zip(path, path[1:]))
    return (len(path) - 1, length, path)


def _shortest(scenario, adj, source, target, banned_nodes, banned_edges):
    # Dijkstra on (hops, length); the path tuple breaks remaining ties.
    heap = [(0, 0.0, (source,))]
    done = set()
    while heap:
        hops, length, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == target:
            return path
        for nxt, w in adj[node]:
            if nxt in done or nxt in banned_nodes or (node, nxt) in banned_edges:
                continue
            heapq.heappush(heap, (hops + 1, length + w, path + (nxt,)))
    return None


def visibility_graph(scenario: Scenario, bs: int, ue: int) -> dict[int, list[tuple[int, float]]]:
    """Directed edges bs->RIS/ue and RIS->RIS/ue no longer than ``max_hop_len``."""
    ris = scenario.ids("RIS")
    adj: dict[int, list[tuple[int, float]]] = {n: [] for n in [bs, *ris, ue]}
    for a in [bs, *ris]:
        for b in [*ris, ue]:
            if a == b:
                continue
            d = scenario.distance(a, b)
            if d <= scenario.max_hop_len:
                adj[a].append((b, d))
    return adj


def candidate_paths(scenario: Scenario, bs: int, ue: int, K: int) -> list[tuple[int, ...]]:
    """Up to ``K`` simple RIS-only paths ordered by (hops, length, ids) (Yen)."""
    check_count(K, "K", 1)
    if scenario.node(bs).kind != "BS" or scenario.node(ue).kind != "UE":
        raise ValueError("candidate paths run from a BS to a UE")
    adj = visibility_graph(scenario, bs, ue)
    first = _shortest(scenario, adj, bs, ue, set(), set())
    if first is None:
        return []
    found = [first]
    pool: list = []
    seen = {first}
    while len(found) < K:
        last = found[-1]
        for i in range(len(last) - 1):
            root = last[: i + 1]
            banned_edges = {(p[i], p[i + 1]) for p in found if p[: i + 1] == root}
            spur = _shortest(scenario, adj, root[-1], ue, set(root[:-1]), banned_edges)
            if spur is None:
                continue
            cand = root[:-1] + spur
            if cand not in seen:
                seen.add(cand)
                heapq.heappush(pool, _path_key(scenario, cand))
        if not pool:
            break
        found.append(heapq.heappop(pool)[2])
    return found


# -- serialization ---------------------------------------------------------


def _panel_dict(p: RisPanel) -> dict:
    return {"element_count": p.element_count, "dx": p.dx, "dy": p.dy, "area": p.area}


def phy_to_dict(phy: PhyParams) -> dict:
    return {
        "f": phy.f,
        "W": phy.W,
        "k_abs": phy.k_abs,
        "T_kelvin": phy.T_kelvin,
        "P_tx": phy.P_tx,
        "alpha": phy.alpha,
        "boltzmann": phy.boltzmann,
        "snr_threshold_db": phy.snr_threshold_db,
    }


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": s.seed,
        "box": list(s.box),
        "max_hop_len": s.max_hop_len,
        "max_path_reach": s.max_path_reach,
        "phy": phy_to_dict(s.phy),
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind,
                "pos": [float(c) for c in n.pos],
                "ris": _panel_dict(n.ris) if n.ris is not None else None,
            }
            for n in s.nodes
        ],
    }


def scenario_from_dict(data: dict) -> Scenario:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema_version {version!r}")
    phy = PhyParams(**data["phy"])
    nodes = tuple(
        Node(n["id"], n["kind"], n["pos"], RisPanel(**n["ris"]) if n.get("ris") else None)
        for n in data["nodes"]
    )
    return Scenario(nodes, phy, tuple(data["box"]), data["max_hop_len"], data["max_path_reach"], data.get("seed"))


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(s))


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
