import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpsgame.equilibrium import SolverConfig
from dpsgame.errors import ConvergenceError, HypothesisError, InstabilityError
from dpsgame.heavy import hte_priorities, v_ht
from dpsgame.metrics import poa_report
from dpsgame.network import (NetworkSpec, best_response_direct, inverse_bid, network_from_dict,
                             network_poa_bound, solve_network_hte, v_ht_resource)
from dpsgame.params import SystemParams

FIXTURE = dict(service_rates=[4.0, 5.0], arrival_rates=[1.0, 1.0, 1.0], cost_rates=[3.0, 2.0, 1.0],
               routes=[[0], [0, 1], [1]])


@pytest.fixture(scope="module")
def overlap():
    spec = network_from_dict(FIXTURE)
    return spec, solve_network_hte(spec, raise_on_failure=True)


@st.composite
def one_resource(draw):
    k = draw(st.integers(1, 6))
    lam = draw(st.lists(st.floats(0.1, 5.0), min_size=k, max_size=k))
    c = draw(st.lists(st.floats(0.1, 20.0), min_size=k, max_size=k, unique=True))
    rho = draw(st.floats(0.1, 0.97))
    return NetworkSpec([sum(lam) / rho], lam, c, [[0]] * k)


def test_spec_validation():
    with pytest.raises(InstabilityError):
        NetworkSpec([1.0], [0.6, 0.6], [2.0, 1.0], [[0], [0]])
    with pytest.raises(ValueError):
        NetworkSpec([1.0, 1.0], [0.5], [1.0], [[]])
    with pytest.raises(ValueError):
        NetworkSpec([1.0], [0.5], [1.0], [[1]])
    with pytest.raises(ValueError):
        NetworkSpec([1.0, 1.0], [0.5], [1.0], [[0]])   # idle resource


def test_resource_loads():
    spec = network_from_dict(FIXTURE)
    np.testing.assert_allclose(spec.resource_loads, [0.5, 0.4])
    assert spec.incidence.tolist() == [[True, False], [True, True], [False, True]]


@given(one_resource(), st.floats(0.01, 100.0))
def test_single_resource_is_the_one_server_formula(spec, beta):
    bids = np.linspace(0.5, 3.0, spec.num_classes)[:, None]
    p = spec.single_resource_params()
    # params merges nothing here since costs are distinct; map bids to canonical order
    canon = np.empty(p.num_classes)
    canon[list(p.class_index)] = bids[:, 0]
    assert v_ht_resource(spec, bids, 0, beta) == pytest.approx(v_ht(p, canon, beta), rel=1e-12)


def test_symmetric_bids_cancel():
    spec = network_from_dict(FIXTURE)
    bids = np.full((3, 2), 2.5)
    for j, mu in enumerate(spec.service_rates):
        rho = spec.resource_loads[j]
        assert v_ht_resource(spec, bids, j, 2.5) == pytest.approx(1 / ((1 - rho) * mu), rel=1e-14)


def test_two_resources_delegate_per_resource():
    spec = network_from_dict(FIXTURE)
    bids = np.array([[2.0, np.nan], [1.0, 3.0], [np.nan, 0.5]])
    p0 = SystemParams([1.0, 1.0], [3.0, 2.0], 4.0)
    p1 = SystemParams([1.0, 1.0], [2.0, 1.0], 5.0)
    assert v_ht_resource(spec, bids, 0, 1.7) == pytest.approx(v_ht(p0, [2.0, 1.0], 1.7), rel=1e-14)
    assert v_ht_resource(spec, bids, 1, 1.7) == pytest.approx(v_ht(p1, [3.0, 0.5], 1.7), rel=1e-14)
    with pytest.raises(ValueError):
        v_ht_resource(spec, bids, 0, 0.0)


def test_inverse_bid_round_trip_and_slope():
    spec = network_from_dict(FIXTURE)
    bids = np.array([[2.0, np.nan], [1.0, 3.0], [np.nan, 0.5]])
    grid = np.geomspace(0.01, 100.0, 25)
    for j in range(2):
        b = np.array([inverse_bid(spec, bids, j, v)[0] for v in grid])
        for v, bj in zip(grid, b):
            assert v_ht_resource(spec, bids, j, bj) == pytest.approx(v, rel=1e-12)
            _, slope = inverse_bid(spec, bids, j, v)
            h = 1e-6 * v
            fd = (inverse_bid(spec, bids, j, v + h)[0] - inverse_bid(spec, bids, j, v - h)[0]) / (2 * h)
            assert slope == pytest.approx(fd, rel=1e-6)
        assert np.all(np.diff(b) < 0)
        lin = np.linspace(0.1, 10.0, 50)
        bl = np.array([inverse_bid(spec, bids, j, v)[0] for v in lin])
        assert np.all(bl[:-2] - 2 * bl[1:-1] + bl[2:] > 0)
    with pytest.raises(ValueError):
        inverse_bid(spec, bids, 0, -1.0)


@given(one_resource())
def test_one_resource_matches_job_level_hte(spec):
    rep = solve_network_hte(spec, raise_on_failure=True)
    p = spec.single_resource_params()
    beta = hte_priorities(p)
    expect = beta[list(p.class_index)]
    np.testing.assert_allclose(rep.bids[:, 0], expect, rtol=1e-8)


def test_overlap_fixture_identities(overlap):
    spec, rep = overlap
    assert rep.converged
    assert np.max(np.abs(rep.equalization_residual(spec))) < 1e-8
    assert np.max(np.abs(rep.slope_identity_residual(spec))) < 1e-8
    assert rep.poa_bound is not None and rep.poa_bound >= 1.0
    assert rep.poa_bound == network_poa_bound(rep, spec)


def test_overlap_best_response_by_direct_minimization(overlap):
    spec, rep = overlap
    for i in range(spec.num_classes):
        direct = best_response_direct(spec, rep.bids, i)
        route = list(spec.routes[i])
        np.testing.assert_allclose(direct[route], rep.bids[i, route], rtol=1e-5)


def test_disjoint_routes_decouple():
    spec = NetworkSpec([2.0, 5.0, 3.0], [1.0, 2.0, 1.5], [3.0, 1.0, 2.0], [[0], [1], [2]])
    rep = solve_network_hte(spec, raise_on_failure=True)
    for i, (lam, c, mu) in enumerate(zip(spec.arrival_rates, spec.cost_rates, spec.service_rates)):
        alone = hte_priorities(SystemParams([lam], [c], mu))[0]
        assert rep.bids[i, i] == pytest.approx(alone, rel=1e-8)


def test_bound_single_class_and_symmetric():
    one = NetworkSpec([2.0, 3.0], [1.0], [4.0], [[0, 1]])
    rep = solve_network_hte(one, SolverConfig(bracket=(1e-3, 1e3)))
    # a lone class with unequal resources keeps shifting its bids: no fixed point
    assert not rep.converged
    with pytest.raises(ConvergenceError):
        solve_network_hte(one, SolverConfig(bracket=(1e-3, 1e3)), raise_on_failure=True)
    even = NetworkSpec([2.0, 2.0], [1.0], [4.0], [[0, 1]])
    rep = solve_network_hte(even, raise_on_failure=True)
    assert rep.poa_bound == 1.0
    sym = NetworkSpec([6.0, 6.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [[0, 1]] * 3)
    rep = solve_network_hte(sym, raise_on_failure=True)
    assert rep.poa_bound == pytest.approx(3.0, rel=1e-12)


def test_bound_needs_equal_arrivals():
    spec = NetworkSpec([4.0], [1.0, 2.0], [2.0, 1.0], [[0], [0]])
    rep = solve_network_hte(spec, raise_on_failure=True)
    assert rep.poa_bound is None
    with pytest.raises(HypothesisError):
        network_poa_bound(rep, spec)


@pytest.mark.parametrize("c", [[3.0, 2.0, 1.0], [10.0, 1.0], [50.0, 5.0, 2.0, 1.0]])
def test_bound_exceeds_poa_on_one_resource(c):
    k = len(c)
    spec = NetworkSpec([k / 0.95], [1.0] * k, c, [[0]] * k)
    rep = solve_network_hte(spec, raise_on_failure=True)
    measured = poa_report(spec.single_resource_params()).poa
    assert rep.poa_bound >= measured
