"""Command-line experiment pipeline.

Subcommands write into ``--out`` (default: current directory):

* ``gen-scenario``           scenario.json
* ``beam-analysis``          beam_analysis.csv
* ``interference-analysis``  interference_analysis.csv
* ``solve``                  throughput.csv, solutions.json, conflict_sets.json

Exit codes: 0 success, 2 configuration error, 3 infeasible or too large,
4 I/O error. Set ``RISMESH_LOG`` (e.g. ``INFO``) for progress logging.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import channel, geometry
from .channel import PhyParams
from .conflict import conflict_sets_to_dict, detect_hits
from .estimator import build_network, throughput_sweep
from .optimizer import UNBOUNDED, format_lambda, solution_to_dict
from .topology import (
    DEFAULT_BOX,
    DEFAULT_COUNTS,
    DEFAULT_PATH_REACH,
    Node,
    Scenario,
    dumps_scenario,
    generate_scenario,
    load_scenario,
    make_transmission,
)
from .validation import Infeasible, TooLarge

log = logging.getLogger("rismesh")

FORMAT_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4
DEFAULT_SWEEP = (25, 65, 95, 135, 265, 400, 665)
MODES = ("auto", "exact", "heuristic")

# Beam-shape study panel and sweeps
FIG_PANEL = geometry.RisPanel.from_elements(10453, 0.0024)
DIST_SWEEP = [0.5 * i for i in range(1, 21)]
ANGLE_SWEEP = [0.5 * i for i in range(1, 21)]
BEAM_ALPHA_DEG = 5.0
BEAM_DISTANCE = 4.0

# Interference study: 1 m hops, interfered transmissions at 5 degrees
INTERFERENCE_PHY = PhyParams(f=1e12, W=3e9, P_tx=10.0)
VICTIM_ALPHA_DEG = 5.0
INTERFERER_ANGLES = list(range(1, 46))


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 1
    scenario: str | None = None  # path to a saved scenario; generated when unset
    counts: dict = field(default_factory=lambda: dict(DEFAULT_COUNTS))
    box: list = field(default_factory=lambda: list(DEFAULT_BOX))
    max_path_reach: float = DEFAULT_PATH_REACH
    phy: dict = field(default_factory=dict)
    k_paths: int = 5
    demand_counts: list = field(default_factory=lambda: list(DEFAULT_SWEEP))
    demand_gbit: float = 0.05
    mode: str = "auto"
    strict_pairs: bool = False
    jobs: int = 1
    exhaustive_limit: int = 10**6
    node_limit: int = 5_000_000
    out: str = "."

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not isinstance(self.k_paths, int) or self.k_paths < 1:
            raise ConfigError("k_paths must be an integer >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        counts = self.demand_counts
        if not counts or any(not isinstance(c, int) or c < 0 for c in counts):
            raise ConfigError("demand_counts must be non-negative integers")
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise ConfigError("demand_counts must be strictly increasing")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            raise ConfigError("jobs must be an integer >= 1")
        if not (math.isfinite(self.demand_gbit) and self.demand_gbit > 0):
            raise ConfigError("demand_gbit must be positive")
        unknown = set(self.phy) - {f.name for f in fields(PhyParams)}
        if unknown:
            raise ConfigError(f"unknown phy keys: {', '.join(sorted(unknown))}")

    def phy_params(self) -> PhyParams:
        return PhyParams(**self.phy)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return UNBOUNDED if x > 0 else "-inf"
    return f"{x:.9g}"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def scenario_for(cfg: RunConfig) -> Scenario:
    if cfg.scenario:
        return load_scenario(cfg.scenario)
    return generate_scenario(
        cfg.seed,
        counts=cfg.counts,
        box=cfg.box,
        phy=cfg.phy_params(),
        max_path_reach=cfg.max_path_reach,
    )


def cmd_gen_scenario(cfg: RunConfig) -> list[Path]:
    scen = scenario_for(cfg)
    return [write_text(Path(cfg.out), "scenario.json", dumps_scenario(scen))]


def beam_rows():
    """Beam-shape quantities for the distance and angle sweeps."""
    rows = []
    for sweep, values in (("distance", DIST_SWEEP), ("angle", ANGLE_SWEEP)):
        for v in values:
            if sweep == "distance":
                alpha, d = math.radians(BEAM_ALPHA_DEG), v
            else:
                alpha, d = math.radians(v), BEAM_DISTANCE
            r_fp = geometry.footprint_radius(alpha, d)
            ira = geometry.illuminated(FIG_PANEL, alpha, d)
            rows.append((
                sweep,
                v,
                geometry.footprint_area(r_fp),
                ira.area,
                ira.element_count,
                geometry.cone_volume(r_fp, d),
                geometry.cylinder_volume(ira.radius, d),
            ))
    return rows


BEAM_HEADER = ["sweep", "sweep_var", "footprint_area", "illuminated_area", "illuminated_elements",
               "cone_volume", "cylinder_volume"]


def cmd_beam_analysis(cfg: RunConfig) -> list[Path]:
    return [write_text(Path(cfg.out), "beam_analysis.csv", render_csv(BEAM_HEADER, beam_rows()))]


def ris_case(phy: PhyParams) -> Scenario:
    """BS 8 -> RIS 3 -> UE 8 with BS 2 -> RIS 3 -> RIS 1 aimed at the same panel."""
    s30, c30 = 0.5, math.sqrt(3) / 2
    nodes = (
        Node(0, "BS", (-1.0, 0.0, 0.0)),      # victim transmitter
        Node(1, "BS", (-c30, -s30, 0.0)),     # interferer
        Node(2, "RIS", (0.0, 0.0, 0.0), FIG_PANEL),
        Node(3, "RIS", (0.0, -1.0, 0.0), FIG_PANEL),
        Node(4, "UE", (0.0, 1.0, 0.0)),       # victim receiver
        Node(5, "UE", (1.0, -1.0, 0.0)),
    )
    return Scenario(nodes, phy, (4.0, 4.0, 4.0), 10.0)


def node_case(phy: PhyParams) -> Scenario:
    """BS 5 -> RIS 5 -> RN 5 with BS 7 -> UE 7 passing through RN 5 at 2 m."""
    nodes = (
        Node(0, "BS", (-1.0, 0.0, 0.0)),      # victim transmitter
        Node(1, "BS", (2.0, 1.0, 0.0)),       # interferer
        Node(2, "RIS", (0.0, 0.0, 0.0), FIG_PANEL),
        Node(3, "RN", (0.0, 1.0, 0.0)),       # victim receiver
        Node(4, "UE", (-2.0, 1.0, 0.0)),
    )
    return Scenario(nodes, phy, (4.0, 4.0, 4.0), 10.0)


def interference_rows(phy: PhyParams = INTERFERENCE_PHY):
    ris_scen, node_scen = ris_case(phy), node_case(phy)
    victim_alpha = math.radians(VICTIM_ALPHA_DEG)
    v_ris = make_transmission(ris_scen, 0, (2,), 4, victim_alpha)
    v_node = make_transmission(node_scen, 0, (2,), 3, victim_alpha)
    g = channel.antenna_gain(victim_alpha)
    rows = []
    for deg in INTERFERER_ANGLES:
        a = math.radians(deg)
        out = []
        for scen, victim, other in (
            (ris_scen, v_ris, make_transmission(ris_scen, 1, (2, 3), 5, a)),
            (node_scen, v_node, make_transmission(node_scen, 1, (), 4, a)),
        ):
            hits = detect_hits(victim, [other], scen)
            total = math.fsum(h.power for h in hits)
            out.append(channel.snir(victim.p_eu, g, g, phy, total))
        rows.append((deg, channel.to_db(out[0]), channel.to_db(out[1]),
                     channel.capacity(phy, out[0]), channel.capacity(phy, out[1])))
    return rows


INTERFERENCE_HEADER = ["interferer_angle", "snir_ris_db", "snir_node_db", "capacity_ris", "capacity_node"]


def cmd_interference_analysis(cfg: RunConfig) -> list[Path]:
    text = render_csv(INTERFERENCE_HEADER, interference_rows())
    return [write_text(Path(cfg.out), "interference_analysis.csv", text)]


def cmd_solve(cfg: RunConfig, timings: bool = False) -> list[Path]:
    scen = scenario_for(cfg)
    network = build_network(scen, cfg.k_paths, cfg.strict_pairs, cfg.jobs)
    methods = (("DDP-LI", cfg.k_paths), ("DDP-SP", 1))
    rows = throughput_sweep(network, cfg.demand_counts, cfg.demand_gbit, cfg.mode, methods,
                            exhaustive_limit=cfg.exhaustive_limit)
    header = ["demand_count", "method", "lambda", "gain"] + (["wall_time"] if timings else [])
    table = []
    for r in rows:
        line = [r.demand_count, r.method, format_lambda(r.lam), "undefined" if r.gain is None else r.gain]
        if timings:
            line.append(r.wall_time)
        table.append(line)

    solutions = [
        {"demand_count": r.demand_count, "method": r.method, **solution_to_dict(r.instance, r.solution, scen)}
        for r in rows
    ]
    out = Path(cfg.out)
    return [
        write_text(out, "throughput.csv", render_csv(header, table)),
        write_text(out, "solutions.json", dump_json(solutions)),
        write_text(out, "conflict_sets.json", dump_json(conflict_sets_to_dict(network.conflict_sets, scen))),
    ]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rismesh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("gen-scenario", "beam-analysis", "interference-analysis", "solve"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        if name in ("gen-scenario", "solve"):
            p.add_argument("--scenario", help="load this scenario instead of generating one")
        if name == "solve":
            p.add_argument("--mode", choices=MODES)
            p.add_argument("--k", type=int, dest="k_paths", help="candidate paths per demand for DDP-LI")
            p.add_argument("--strict-pairs", action="store_true", default=None)
            p.add_argument("--jobs", type=int, help="threads for conflict detection")
            p.add_argument("--timings", action="store_true", help="add a wall_time column")
    return parser


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for key in ("seed", "out", "scenario", "mode", "k_paths", "strict_pairs", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RISMESH_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "gen-scenario":
            paths = cmd_gen_scenario(cfg)
        elif args.command == "beam-analysis":
            paths = cmd_beam_analysis(cfg)
        elif args.command == "interference-analysis":
            paths = cmd_interference_analysis(cfg)
        else:
            paths = cmd_solve(cfg, args.timings)
    except (Infeasible, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
