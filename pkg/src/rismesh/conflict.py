"""Interference detection between transmissions, the SNIR scheduling-prefix
heuristic, and the conflict sets used as time-sharing constraints."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx
import numpy as np

from . import channel
from .channel import PhyParams
from .geometry import (
    ConeBeam,
    CylinderBeam,
    IlluminatedArea,
    beam_hit_on_panel,
    footprint_area,
    interfered_element_count,
    last_hop_length,
    point_in_beam,
)
from .topology import Scenario, Transmission


@dataclass(frozen=True)
class InterferenceHit:
    victim: tuple
    site: int
    site_kind: str
    interferer: tuple
    power: float
    overlap: int | None = None  # shared RIS elements, RIS sites only


@dataclass(frozen=True)
class ConflictSet:
    members: tuple[tuple, ...]

    def __contains__(self, key) -> bool:
        return key in self.members

    def __len__(self) -> int:
        return len(self.members)


@lru_cache(maxsize=256)
def _reach(phy: PhyParams, alpha: float) -> float:
    return channel.threshold_distance(phy, alpha=alpha)


def transmission_beams(tx: Transmission, scenario: Scenario) -> list:
    """Beam segments of ``tx``: a cone from the transmitter, then cylinders.

    A direct link's cone and the last reflected hop both extend to the
    interference reach rather than stopping at the receiver.
    """
    d_th = _reach(scenario.phy, tx.alpha)
    nodes = tx.nodes
    pos = [scenario.node(n).pos for n in nodes]
    beams = []
    for i, (a, b) in enumerate(zip(pos, pos[1:])):
        d = tx.distances[i]
        last = i == len(nodes) - 2
        if i == 0:
            length = max(d, d_th) if last else d
            beams.append(ConeBeam(a, b - a, tx.alpha / 2.0, length))
        else:
            length = max(d, last_hop_length(d_th, tx.distances[:-1])) if last else d
            beams.append(CylinderBeam(a, b - a, tx.r_ira, length))
    return beams


def detect_hits(victim: Transmission, others, scenario: Scenario, beams_of=None) -> list[InterferenceHit]:
    """Interference landing on the RISs and receiver of ``victim``.

    At a RIS only the elements lit by both beams carry interference, which
    then follows the victim's remaining chain to its receiver. At the
    receiver the whole interfering beam is captured.
    """
    phy = scenario.phy
    beams_of = beams_of or (lambda t: transmission_beams(t, scenario))
    g_eu = channel.antenna_gain(victim.alpha)
    vnodes = victim.nodes
    sites = [(j, r) for j, r in enumerate(victim.ris_chain)] + [(None, victim.eu)]
    hits = []
    for other in others:
        if other.key == victim.key:
            continue
        g_be = channel.antenna_gain(other.alpha)
        for seg, beam in enumerate(beams_of(other)):
            pre_d = list(other.distances[:seg])
            pre_n = list(other.element_counts[:seg])
            for j, site in sites:
                site_pos = scenario.node(site).pos
                to_site = float(np.linalg.norm(site_pos - beam.origin))
                if j is None:
                    if not point_in_beam(site_pos, beam):
                        continue
                    delta = channel.received_power(phy.P_tx, pre_d + [to_site], pre_n, phy)
                    hits.append(InterferenceHit(victim.key, site, "node", other.key, channel.interference_power(delta, g_be, g_eu)))
                    continue
                incoming = site_pos - scenario.node(vnodes[j]).pos
                hit = beam_hit_on_panel(beam, site_pos, incoming)
                if hit is None:
                    continue
                panel = scenario.node(site).ris
                own = IlluminatedArea(victim.r_ira, min(footprint_area(victim.r_ira), panel.area), victim.element_counts[j])
                n_i = interfered_element_count(panel, own, hit[0], hit[1])
                dists = pre_d + [to_site] + list(victim.distances[j + 1 :])
                counts = pre_n + [n_i] + list(victim.element_counts[j + 1 :])
                delta = channel.received_power(phy.P_tx, dists, counts, phy)
                hits.append(InterferenceHit(victim.key, site, "ris", other.key, channel.interference_power(delta, g_be, g_eu), n_i))
    return hits


def interference_by_source(hits) -> dict[tuple, float]:
    grouped: dict[tuple, list[float]] = {}
    for h in hits:
        grouped.setdefault(h.interferer, []).append(h.power)
    return {k: math.fsum(v) for k, v in grouped.items()}


def schedule_prefix(victim: Transmission, hits, phy: PhyParams) -> tuple[list, list]:
    """Split interferers into those schedulable with ``victim`` and the rest.

    Interferers are added in ascending order of their interference; the
    compatible set is the longest prefix that keeps the victim's SNIR at or
    above the threshold.
    """
    ranked = sorted(interference_by_source(hits).items(), key=lambda kv: (kv[1], kv[0]))
    g = channel.antenna_gain(victim.alpha)
    target = phy.snr_threshold
    compatible, total = [], []
    for i, (key, power) in enumerate(ranked):
        total.append(power)
        if channel.snir(victim.p_eu, g, g, phy, math.fsum(total)) < target:
            return compatible, [k for k, _ in ranked[i:]]
        compatible.append(key)
    return compatible, []


def conflict_graph(
    transmissions,
    scenario: Scenario,
    exclude=(),
    strict_pairs: bool = False,
    n_jobs: int = 1,
) -> nx.Graph:
    """Symmetrised pairwise conflicts between distinct transmissions.

    ``exclude`` lists key pairs that never conflict (segments of the same
    route). Transmissions sharing a relay node always conflict.
    """
    unique = {t.key: t for t in transmissions}
    keys = sorted(unique)
    txs = [unique[k] for k in keys]
    banned = {frozenset(p) for p in exclude}
    beam_cache = {k: transmission_beams(unique[k], scenario) for k in keys}
    phy = scenario.phy

    def victim_edges(victim):
        others = [o for o in txs if frozenset((victim.key, o.key)) not in banned]
        hits = detect_hits(victim, others, scenario, beams_of=lambda t: beam_cache[t.key])
        compatible, conflicting = schedule_prefix(victim, hits, phy)
        edges = list(conflicting)
        if strict_pairs and compatible:
            power = interference_by_source(hits)
            g = channel.antenna_gain(victim.alpha)
            worst = channel.snir(victim.p_eu, g, g, phy, math.fsum(power[k] for k in compatible))
            if worst < phy.snr_threshold:
                edges.extend(compatible)
        return edges

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(victim_edges, txs))
    else:
        results = [victim_edges(t) for t in txs]

    graph = nx.Graph()
    graph.add_nodes_from(keys)
    for victim, edges in zip(txs, results):
        for other in edges:
            graph.add_edge(victim.key, other)
    rn = set(scenario.ids("RN"))
    for i, a in enumerate(txs):
        for b in txs[i + 1 :]:
            if frozenset((a.key, b.key)) in banned:
                continue
            if rn & {a.be, a.eu} & {b.be, b.eu}:
                graph.add_edge(a.key, b.key)
    return graph


def build_conflict_sets(
    transmissions,
    scenario: Scenario,
    exclude=(),
    strict_pairs: bool = False,
    n_jobs: int = 1,
) -> list[ConflictSet]:
    """Maximal cliques of the conflict graph; isolated transmissions become singletons."""
    graph = conflict_graph(transmissions, scenario, exclude, strict_pairs, n_jobs)
    cliques = sorted(tuple(sorted(c)) for c in nx.find_cliques(graph))
    return [ConflictSet(c) for c in cliques]


def route_exclusions(routes) -> set[frozenset]:
    """Pairs of transmissions that appear together on some route."""
    out = set()
    for route in routes:
        keys = route.keys
        for i, a in enumerate(keys):
            for b in keys[i + 1 :]:
                if a != b:
                    out.add(frozenset((a, b)))
    return out


def conflict_sets_to_dict(sets, scenario: Scenario | None = None) -> list[dict]:
    def describe(key):
        be, chain, eu = key
        ids = [be, *chain, eu]
        out = {"nodes": ids}
        if scenario is not None:
            out["labels"] = " -> ".join(scenario.label(n) for n in ids)
        return out

    return [{"id": i, "members": [describe(k) for k in s.members]} for i, s in enumerate(sets)]
