import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mrfrestore.energy import Labeling, build_model, energy_units, initial_labeling
from mrfrestore.image_core import ImageGrid
from mrfrestore.maxflow import min_cut
from mrfrestore.moves import (
    ConvergenceTrace, SolverConfig, expansion_graph, expansion_move, run_expansion, run_icm,
    run_swap, swap_move,
)


def _model(obs, mask=None, **kw):
    return build_model(ImageGrid(np.asarray(obs, np.uint8)), mask, **kw)


def _random_instance(rng, shape=(2, 3), n_labels=3, k=1):
    labels = np.sort(rng.choice(np.arange(0, 40), n_labels, replace=False))
    obs = rng.integers(0, 40, shape)
    mask = rng.random(shape) < 0.3
    model = _model(obs, mask, lam=int(rng.integers(1, 6)), k=k,
                   v_max=int(rng.integers(1, 30)), labels=labels)
    init = Labeling(rng.choice(labels, shape))
    return model, init


# -- ICM -----------------------------------------------------------------------

def test_icm_masked_chain_example():
    m = _model(np.zeros((1, 3)), np.ones((1, 3), bool))
    lab, trace = run_icm(m, Labeling(np.array([[5, 9, 5]])), SolverConfig(max_cycles=1))
    # raster order: pixel 0 first copies its neighbour (9); pixel 1 then
    # faces a 25-25 tie between 5 and 9 and takes the smaller label
    assert lab.assignment[0, 1] == 5
    assert lab.assignment.tolist() == [[9, 5, 5]]
    assert trace.energies == [50, 25]


def test_icm_fixed_point_unchanged():
    obs = np.array([[10, 12], [11, 10]])
    m = _model(obs)
    init = Labeling(obs)
    once, _ = run_icm(m, init, SolverConfig(max_cycles=1))
    lab, trace = run_icm(m, once)
    again, t2 = run_icm(m, lab)
    assert again == lab
    assert t2.cycles == 1 and t2.energies[0] == t2.energies[1]


def test_icm_ties_to_smallest_label():
    m = _model([[0, 0]], np.array([[True, False]]), lam=1, k=1, v_max=100, labels=[0, 2, 4])
    lab, _ = run_icm(m, Labeling(np.array([[4, 4]])))
    assert lab.assignment.tolist() == [[0, 0]]


# -- expansion -----------------------------------------------------------------

def test_expansion_of_alpha_into_itself():
    m = _model(np.full((2, 2), 7))
    lab = Labeling(np.full((2, 2), 3))
    g = expansion_graph(m, lab, 3)
    assert g.n_aux == 0
    new, e = expansion_move(m, lab, 3)
    assert new == lab


def test_expansion_census_metric_case():
    m = _model(np.zeros((2, 2)), k=1)
    lab = Labeling(np.array([[1, 2], [1, 2]]))
    g = expansion_graph(m, lab, 3)
    assert g.n_aux == 2
    assert g.node_census == 8


def test_expansion_census_non_metric_pairs_have_no_aux():
    # k = 2: V(1,3) = 4 > V(1,2) + V(2,3) = 2, so both separated pairs are
    # encoded without auxiliary nodes
    m = _model(np.zeros((2, 2)))
    g = expansion_graph(m, Labeling(np.array([[1, 2], [1, 2]])), 3)
    assert g.n_aux == 0 and g.node_census == 6


def test_expansion_move_exhaustive_k1():
    rng = np.random.default_rng(10)
    for _ in range(40):
        m, init = _random_instance(rng)
        for alpha in m.labels:
            new, e = expansion_move(m, init, int(alpha))
            assert e == oracles.best_expansion(m, init.assignment, int(alpha))
            assert e == oracles.model_energy(m, new.assignment)
            keep = (new.assignment == init.assignment) | (new.assignment == alpha)
            assert keep.all()


def test_cut_cost_identity_k1():
    rng = np.random.default_rng(11)
    for _ in range(40):
        m, init = _random_instance(rng)
        alpha = int(rng.choice(m.labels))
        g = expansion_graph(m, init, alpha)
        res = min_cut(g.network)
        moved = np.where(res.side[:init.assignment.size].reshape(m.shape), alpha, init.assignment)
        assert res.flow_value + g.constant == oracles.model_energy(m, moved)
        assert res.flow_value + g.constant == oracles.best_expansion(m, init.assignment, alpha)


def test_expansion_move_never_increases_energy_k2():
    rng = np.random.default_rng(12)
    for _ in range(40):
        m, init = _random_instance(rng, k=2)
        e0 = oracles.model_energy(m, init.assignment)
        for alpha in m.labels:
            new, e = expansion_move(m, init, int(alpha))
            assert e <= e0
            assert e == oracles.model_energy(m, new.assignment)


def test_run_expansion_from_global_optimum():
    rng = np.random.default_rng(13)
    m, _ = _random_instance(rng, shape=(2, 2))
    best = min(oracles.all_labelings(m), key=lambda l: oracles.model_energy(m, l))
    lab, trace = run_expansion(m, Labeling(best))
    assert np.array_equal(lab.assignment, best)
    assert trace.cycles == 1


def test_run_expansion_trace_and_containment_any_order():
    rng = np.random.default_rng(14)
    for order in ("ascending", "random"):
        for _ in range(10):
            m, init = _random_instance(rng, shape=(3, 3), n_labels=4, k=2)
            lab, trace = run_expansion(m, init, SolverConfig(label_order=order, seed=3))
            assert trace.is_non_increasing()
            assert trace.final_energy == oracles.model_energy(m, lab.assignment)
            assert trace.energies[0] == oracles.model_energy(m, init.assignment)


def test_improvement_epsilon_stops_early():
    rng = np.random.default_rng(15)
    obs = rng.integers(0, 256, (8, 8))
    m = _model(obs, rng.random((8, 8)) < 0.5)
    init = initial_labeling(m)
    _, full = run_expansion(m, init, SolverConfig(max_cycles=10))
    _, short = run_expansion(m, init, SolverConfig(max_cycles=10, improvement_epsilon=1e12))
    assert short.cycles == 1 <= full.cycles


# -- swap ----------------------------------------------------------------------

def test_swap_without_alpha_beta_pixels():
    m = _model(np.zeros((2, 2)), labels=[0, 1, 2, 3])
    lab = Labeling(np.full((2, 2), 2))
    new, _ = swap_move(m, lab, 0, 1)
    assert new == lab


def test_swap_masked_pair_merges():
    m = _model(np.zeros((1, 2)), np.ones((1, 2), bool), labels=[0, 4])
    new, e = swap_move(m, Labeling(np.array([[0, 4]])), 0, 4)
    assert e == 0
    assert new.assignment[0, 0] == new.assignment[0, 1]


def test_swap_rejects_equal_labels():
    m = _model(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        swap_move(m, Labeling(np.zeros((1, 2))), 3, 3)


def test_swap_move_exhaustive():
    rng = np.random.default_rng(16)
    for k in (1, 2):
        for _ in range(30):
            m, init = _random_instance(rng, k=k)
            for i, a in enumerate(m.labels):
                for b in m.labels[i + 1:]:
                    new, e = swap_move(m, init, int(a), int(b))
                    assert e == oracles.best_swap(m, init.assignment, int(a), int(b))
                    other = ~np.isin(init.assignment, [a, b])
                    assert np.array_equal(new.assignment[other], init.assignment[other])


def test_run_swap_single_label():
    m = _model(np.full((2, 3), 9), labels=[4])
    init = Labeling(np.full((2, 3), 4))
    lab, trace = run_swap(m, init)
    assert lab == init


def test_run_swap_monotone():
    rng = np.random.default_rng(17)
    for _ in range(10):
        m, init = _random_instance(rng, shape=(3, 4), n_labels=4, k=2)
        lab, trace = run_swap(m, init)
        assert trace.is_non_increasing()
        assert trace.final_energy == oracles.model_energy(m, lab.assignment)


def test_run_icm_monotone():
    rng = np.random.default_rng(18)
    for _ in range(10):
        m, init = _random_instance(rng, shape=(4, 4), n_labels=5, k=2)
        _, trace = run_icm(m, init)
        assert trace.is_non_increasing()


# -- config & trace --------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_cycles=0)
    with pytest.raises(ValueError):
        SolverConfig(improvement_epsilon=-1)
    with pytest.raises(ValueError):
        SolverConfig(label_order="zigzag")


def test_trace_csv():
    t = ConvergenceTrace()
    t.add(0, 10, 0.0)
    t.add(1, 7, 0.25)
    assert t.to_csv().splitlines() == ["cycle,energy,seconds", "0,10,0.000000", "1,7,0.250000"]
    assert t.is_non_increasing() and t.final_energy == 7


@given(st.integers(0, 2 ** 16), st.integers(1, 2))
def test_solvers_monotone_property(seed, k):
    rng = np.random.default_rng(seed)
    m, init = _random_instance(rng, shape=(3, 3), n_labels=3, k=k)
    e0 = energy_units(m, init.assignment)
    for solver in (run_icm, run_swap, run_expansion):
        lab, trace = solver(m, init)
        assert trace.is_non_increasing()
        assert energy_units(m, lab.assignment) <= e0
