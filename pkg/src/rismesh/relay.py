"""Greedy relay insertion for candidate paths that miss the SNR threshold."""

from __future__ import annotations

from dataclasses import dataclass

from .topology import PathRoute, Scenario, Transmission, is_detectable, make_transmission


@dataclass(frozen=True)
class RelayInsertion:
    original: tuple[int, ...]
    # (relay id, index of the original hop it was spliced into)
    relays: tuple[tuple[int, int], ...]
    route: PathRoute | None

    @property
    def ok(self) -> bool:
        return self.route is not None


def closest_relay_node(scenario: Scenario, ue: int, hop_end: int, used=()) -> int | None:
    """Unused RN closest to ``ue`` among those within a hop of ``hop_end``."""
    best = None
    for rn in scenario.ids("RN"):
        if rn in used or scenario.distance(rn, hop_end) > scenario.max_hop_len:
            continue
        key = (scenario.distance(rn, ue), rn)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def _segment(scenario: Scenario, be: int, chain, eu: int) -> Transmission | None:
    try:
        return make_transmission(scenario, be, chain, eu)
    except ValueError:  # relay co-located with a path node
        return None


def find_relay_nodes(scenario: Scenario, path) -> RelayInsertion:
    """Split ``path`` at relay nodes until every segment is detectable.

    Hops between the current transmitter and the UE are scanned from the
    last one backwards; the first hop whose relay (the unused RN nearest
    the UE) is detectable from the transmitter gets that relay spliced in,
    and the scan restarts from the new relay. A full scan without a viable
    relay discards the path: ``route`` is None and no relays are reported.
    """
    original = tuple(path)
    if len(original) < 2:
        raise ValueError("path needs a source and a destination")
    bs, ue = original[0], original[-1]
    whole = _segment(scenario, bs, original[1:-1], ue)
    if whole is not None and is_detectable(scenario, whole):
        return RelayInsertion(original, (), PathRoute(bs, ue, (whole,)))

    segments: list[Transmission] = []
    relays: list[tuple[int, int]] = []
    used: set[int] = set()
    rest = list(original)  # current transmitter .. UE
    while True:
        viable = False
        for j in range(len(rest) - 2, -1, -1):
            hop_end = rest[j + 1]
            rn = closest_relay_node(scenario, ue, hop_end, used)
            if rn is None:
                continue
            head = _segment(scenario, rest[0], rest[1 : j + 1], rn)
            if head is None or not is_detectable(scenario, head):
                continue
            viable = True
            segments.append(head)
            used.add(rn)
            relays.append((rn, original.index(hop_end) - 1))
            rest = [rn, *rest[j + 1 :]]
            tail = _segment(scenario, rn, rest[1:-1], ue)
            if tail is not None and is_detectable(scenario, tail):
                segments.append(tail)
                return RelayInsertion(original, tuple(relays), PathRoute(bs, ue, tuple(segments)))
            break
        if not viable:
            return RelayInsertion(original, (), None)
