import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mrfrestore.energy import (
    Labeling, build_model, data_cost, energy_terms, initial_labeling, labels_with_stride,
    neighbor_pairs, smoothness_cost, snap_to_labels, total_energy,
)
from mrfrestore.image_core import ImageGrid


def _model(obs, mask=None, **kw):
    return build_model(ImageGrid(np.asarray(obs, np.uint8)), mask, **kw)


def test_defaults():
    m = _model([[1, 2]])
    assert (m.lam, m.k, m.v_max) == (5, 2, 5)
    assert m.labels.tolist() == list(range(256))
    assert m.cost_scale == 1
    assert m.mask.count() == 0


def test_validation():
    with pytest.raises(ValueError):
        build_model(ImageGrid(np.zeros((2, 2), np.uint8)), np.zeros((2, 3), bool))
    with pytest.raises(ValueError):
        _model([[1]], labels=[])
    with pytest.raises(ValueError):
        _model([[1]], labels=[3, 2])
    with pytest.raises(ValueError):
        _model([[1]], lam=-1)
    with pytest.raises(ValueError):
        _model([[1]], k=3)


def test_data_cost_examples():
    m = _model([[100, 100]], np.array([[False, True]]))
    assert data_cost(m, (0, 0), 100) == 0
    assert data_cost(m, (0, 0), 110) == 100
    assert all(data_cost(m, (0, 1), l) == 0 for l in (0, 77, 255))
    with pytest.raises(IndexError):
        data_cost(m, (1, 0), 3)
    m4 = _model([[100]], labels=labels_with_stride(4))
    with pytest.raises(ValueError):
        data_cost(m4, (0, 0), 3)


def test_smoothness_examples():
    m = _model([[0]])
    assert smoothness_cost(m, 7, 7) == 0
    assert smoothness_cost(m, 10, 12) == 4
    assert smoothness_cost(m, 10, 13) == 5


def test_potential_symmetric_and_zero_on_diagonal():
    for k in (1, 2):
        m = _model([[0]], k=k)
        pw = m.pairwise_table
        for a in range(256):
            assert smoothness_cost(m, a, a) == 0
        a, b = np.meshgrid(np.arange(256), np.arange(256))
        assert np.array_equal(pw[np.abs(a - b)], pw[np.abs(b - a)])


def test_triangle_inequality_k1_holds():
    m = _model([[0]], k=1, v_max=7)
    labels = range(0, 256, 5)
    for a, b, c in itertools.product(labels, repeat=3):
        assert smoothness_cost(m, a, c) <= smoothness_cost(m, a, b) + smoothness_cost(m, b, c)


def test_triangle_inequality_k2_fails():
    m = _model([[0]])
    assert smoothness_cost(m, 0, 2) == 4
    assert smoothness_cost(m, 0, 1) + smoothness_cost(m, 1, 2) == 2


def test_total_energy_hand_example():
    m = _model([[3, 5]])
    assert total_energy(m, Labeling(np.array([[3, 5]]))) == 20


def test_fully_masked_constant_labeling_is_free():
    m = _model(np.zeros((3, 4)), np.ones((3, 4), bool))
    assert total_energy(m, Labeling(np.full((3, 4), 9))) == 0


def test_fully_masked_energy_is_pure_smoothness():
    rng = np.random.default_rng(3)
    m = _model(rng.integers(0, 256, (4, 4)), np.ones((4, 4), bool))
    lab = Labeling(rng.integers(0, 256, (4, 4)))
    data, pair = energy_terms(m, lab)
    assert data == 0 and total_energy(m, lab) == pair


@pytest.mark.parametrize("seed", range(10))
def test_energy_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    obs = rng.integers(0, 256, (4, 4))
    mask = rng.random((4, 4)) < 0.3
    lam, k, vmax = int(rng.integers(0, 10)), int(rng.integers(1, 3)), int(rng.integers(0, 50))
    m = _model(obs, mask, lam=lam, k=k, v_max=vmax)
    lab = rng.integers(0, 256, (4, 4))
    assert total_energy(m, Labeling(lab)) == oracles.energy(obs, mask, lab, lam, k, vmax)


def test_energy_terms_additive():
    rng = np.random.default_rng(4)
    obs = rng.integers(0, 256, (5, 6))
    mask = rng.random((5, 6)) < 0.5
    lab = rng.integers(0, 256, (5, 6))
    m = _model(obs, mask)
    data, pair = energy_terms(m, Labeling(lab))
    assert data == int(np.where(mask, 0, (lab - obs) ** 2).sum())
    assert pair == oracles.energy(obs, np.ones_like(mask), lab)


def test_transpose_invariance():
    rng = np.random.default_rng(5)
    obs = rng.integers(0, 256, (3, 7))
    mask = rng.random((3, 7)) < 0.4
    lab = rng.integers(0, 256, (3, 7))
    e = total_energy(_model(obs, mask), Labeling(lab))
    assert e == total_energy(_model(obs.T, mask.T), Labeling(lab.T))


def test_fractional_parameters_are_exact():
    m = _model([[10, 20]], lam=0.5, v_max=3)
    assert m.cost_scale == 10
    lab = Labeling(np.array([[10, 20]]))
    assert total_energy(m, lab) == pytest.approx(1.5)


@pytest.mark.parametrize("shape,count", [((2, 2), 4), ((1, 1), 0), ((3, 5), 22)])
def test_neighbor_pairs(shape, count):
    pairs = neighbor_pairs(shape)
    assert len(pairs) == count == shape[0] * (shape[1] - 1) + shape[1] * (shape[0] - 1)
    h, w = shape
    for p, q in pairs:
        (rp, cp), (rq, cq) = divmod(int(p), w), divmod(int(q), w)
        assert abs(rp - rq) + abs(cp - cq) == 1


def test_labeling_must_use_model_labels():
    m = _model(np.zeros((2, 2)), labels=labels_with_stride(4))
    with pytest.raises(ValueError):
        total_energy(m, Labeling(np.full((2, 2), 3)))
    with pytest.raises(ValueError):
        total_energy(m, Labeling(np.zeros((3, 2))))


def test_snap_ties_to_smaller_label():
    m = _model([[0]], labels=[0, 4, 8])
    assert snap_to_labels(m, [2, 3, 6, 255]).tolist() == [0, 4, 4, 8]


def test_initial_labelings():
    obs = np.array([[10, 0, 30], [40, 255, 60]])
    m = _model(obs, (obs == 0) | (obs == 255))
    assert np.array_equal(initial_labeling(m).assignment, obs)
    assert np.all(initial_labeling(m, "midgray").assignment == 128)
    med = initial_labeling(m, "median").assignment
    assert med[0, 0] == 10 and med[1, 2] == 60
    assert med[0, 1] == 35  # median of known window values 10, 30, 40, 60
    with pytest.raises(ValueError):
        initial_labeling(m, "zeros")


@given(st.integers(0, 255), st.integers(0, 255), st.integers(1, 2), st.integers(0, 300))
def test_smoothness_property(a, b, k, vmax):
    m = _model([[0]], k=k, v_max=vmax)
    v = smoothness_cost(m, a, b)
    assert v == smoothness_cost(m, b, a) == min(abs(a - b) ** k, vmax)
    assert m.pairwise_table[abs(a - b)] == 5 * v
