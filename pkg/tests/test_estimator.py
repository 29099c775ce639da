import math

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rismesh import PathSelector, build_network, generate_scenario, throughput_sweep
from rismesh.topology import Demand, build_demands
from rismesh.validation import Infeasible


@pytest.fixture(scope="module")
def network():
    return build_network(generate_scenario(1), pool_size=5)


def test_params_round_trip():
    sel = PathSelector(n_paths=3, mode="heuristic", random_state=7)
    assert sel.get_params()["n_paths"] == 3
    twin = clone(sel)
    assert twin.get_params() == sel.get_params()
    sel.set_params(mode="exact")
    assert sel.mode == "exact"


def test_not_fitted():
    with pytest.raises(NotFittedError):
        PathSelector().predict()


def test_bad_params():
    s = generate_scenario(1)
    with pytest.raises(ValueError):
        PathSelector(mode="fast").fit(s, build_demands(s, 3))
    with pytest.raises(ValueError):
        PathSelector(n_paths=0).fit(s, build_demands(s, 3))
    with pytest.raises(TypeError):
        PathSelector().fit("scenario", [])


def test_fit_predict_score(network):
    demands = build_demands(network.scenario, 12)
    sel = PathSelector(n_paths=5).fit(network, demands)
    routes = sel.predict()
    assert len(routes) == len(sel.demands_)
    for d, r in zip(sel.demands_, routes):
        assert (r.bs, r.ue) == (d.bs, d.ue)
        assert r in network.candidates_for(d.bs, d.ue, 5)
    assert sel.score() == sel.lambda_ > 0
    assert sel.solved_mode_ in ("exact", "heuristic")


def test_fit_on_bare_scenario_matches_prebuilt(network):
    demands = build_demands(network.scenario, 8)
    a = PathSelector(n_paths=5).fit(network.scenario, demands)
    b = PathSelector(n_paths=5).fit(network, demands)
    assert a.lambda_ == b.lambda_


def test_unroutable_demands(network):
    dead = [(bs, ue) for (bs, ue), rs in network.routes.items() if not rs]
    assert dead, "seed 1 has pairs without routes"
    with pytest.raises(Infeasible):
        PathSelector().fit(network, [Demand(0, *dead[0])])


def test_more_candidates_never_hurt(network):
    demands = build_demands(network.scenario, 20)
    sp = PathSelector(n_paths=1, mode="exact").fit(network, demands).lambda_
    li = PathSelector(n_paths=5, mode="exact").fit(network, demands).lambda_
    assert li >= sp


def test_sweep_properties(network):
    rows = throughput_sweep(network, [0, 25, 65, 95])
    by = {(r.demand_count, r.method): r for r in rows}
    assert math.isinf(by[(0, "DDP-LI")].lam) and by[(0, "DDP-LI")].gain is None
    for c in (25, 65, 95):
        assert by[(c, "DDP-LI")].lam >= by[(c, "DDP-SP")].lam
        assert by[(c, "DDP-LI")].gain >= 1
    for m in ("DDP-LI", "DDP-SP"):
        lams = [by[(c, m)].lam for c in (25, 65, 95)]
        assert lams == sorted(lams, reverse=True)
