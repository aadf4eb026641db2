import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agsplab.schmidt import (
    Cut,
    CutDecomposition,
    OperatorDescriptor,
    best_rank_r_overlap,
    reconstruct,
    schmidt_decompose,
    sr_facts_check,
    truncate,
)


def random_state(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def bell_pair():
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def test_product_state_trivial_decomposition():
    state = np.zeros(16, dtype=complex)
    state[0] = 1.0
    for pos in (1, 2, 3):
        decomp = schmidt_decompose(state, Cut(pos, 4, 2))
        assert decomp.rank == 1
        assert decomp.entropy == pytest.approx(0.0, abs=1e-12)
        assert decomp.values[0] == pytest.approx(1.0, abs=1e-12)


def test_bell_pair_decomposition():
    decomp = schmidt_decompose(bell_pair(), Cut(1, 2, 2))
    assert np.allclose(decomp.values, [1 / np.sqrt(2)] * 2, atol=1e-12)
    assert decomp.entropy == pytest.approx(1.0, abs=1e-12)


def test_non_unit_rejected_unless_normalizing():
    state = np.ones(4, dtype=complex)
    with pytest.raises(ValueError, match="not normalized"):
        schmidt_decompose(state, Cut(1, 2, 2))
    decomp = schmidt_decompose(state, Cut(1, 2, 2), normalize=True)
    assert np.sum(decomp.values**2) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_reconstruction_property(seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 16)
    cut = Cut(2, 4, 2)
    decomp = schmidt_decompose(state, cut)
    assert np.linalg.norm(reconstruct(decomp) - state) <= 1e-9
    assert np.sum(decomp.values**2) == pytest.approx(1.0, abs=1e-10)
    # orthonormal families
    for fam in (decomp.left_vectors, decomp.right_vectors):
        gram = fam.conj().T @ fam
        assert np.linalg.norm(gram - np.eye(gram.shape[0])) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_entropy_cut_symmetry_and_range(seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 32)
    for pos in (1, 2, 3, 4):
        cut = Cut(pos, 5, 2)
        decomp = schmidt_decompose(state, cut)
        matrix = state.reshape(cut.left_dim, cut.right_dim)
        rho_left = matrix @ matrix.conj().T
        rho_right = matrix.conj().T @ matrix
        for rho in (rho_left, rho_right):
            vals = np.linalg.eigvalsh(rho)
            vals = vals[vals > 0]
            entropy = float(-(vals * np.log2(vals)).sum())
            assert entropy == pytest.approx(decomp.entropy, abs=1e-9)
        assert 0.0 <= decomp.entropy <= np.log2(min(cut.left_dim, cut.right_dim)) + 1e-12


def test_best_rank_overlap_trivial_cases():
    state = np.zeros(4, dtype=complex)
    state[0] = 1.0
    decomp = schmidt_decompose(state, Cut(1, 2, 2))
    assert best_rank_r_overlap(decomp, 1) == pytest.approx(1.0, abs=1e-12)
    bell = schmidt_decompose(bell_pair(), Cut(1, 2, 2))
    assert best_rank_r_overlap(bell, 1) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert best_rank_r_overlap(bell, 5) == pytest.approx(1.0, abs=1e-12)


def test_truncate_bell_pair():
    vec, norm = truncate(bell_pair(), Cut(1, 2, 2), 1)
    assert norm**2 == pytest.approx(0.5, abs=1e-12)
    expected = np.zeros(4, dtype=complex)
    expected[0] = 1 / np.sqrt(2)
    # phase of the kept pair is free; compare magnitudes of overlap
    assert abs(np.vdot(expected, vec)) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_truncate_properties(seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 64)
    cut = Cut(3, 6, 2)
    decomp = schmidt_decompose(state, cut)
    full, _ = truncate(state, cut, decomp.values.size)
    assert np.linalg.norm(full - state) <= 1e-10
    vec, norm = truncate(state, cut, 3)
    assert norm**2 == pytest.approx(float(np.sum(decomp.values[:3] ** 2)), abs=1e-10)
    residual = float(np.sum(decomp.values[3:] ** 2))
    assert np.linalg.norm(state - vec) ** 2 == pytest.approx(residual, abs=1e-10)
    # normalized truncation achieves the best rank-r overlap
    overlap = abs(np.vdot(state, vec / norm))
    assert overlap == pytest.approx(best_rank_r_overlap(decomp, 3), abs=1e-10)


def test_truncation_beats_random_competitors():
    rng = np.random.default_rng(11)
    state = random_state(rng, 16)
    cut = Cut(2, 4, 2)
    decomp = schmidt_decompose(state, cut)
    r = 2
    best = best_rank_r_overlap(decomp, r)
    competitors = 0
    for _ in range(10_000):
        left = rng.standard_normal((4, r)) + 1j * rng.standard_normal((4, r))
        right = rng.standard_normal((4, r)) + 1j * rng.standard_normal((4, r))
        comp = (left @ right.T).reshape(-1)
        comp /= np.linalg.norm(comp)
        competitors = max(competitors, abs(np.vdot(state, comp)))
    assert best >= competitors - 1e-12


def test_sr_facts_additivity_product_case():
    state = np.zeros(16, dtype=complex)
    state[0] = 1.0
    descriptor = OperatorDescriptor(np.eye(2, dtype=complex), first_site=1,
                                    width=1, label="identity")
    report = sr_facts_check(state, descriptor, Cut(2, 4, 2))
    assert report.additivity_lhs <= 2
    assert report.passed


def test_sr_facts_straddling_unitary():
    rng = np.random.default_rng(4)
    state = np.zeros(16, dtype=complex)
    state[0] = 1.0
    random = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    unitary, _ = np.linalg.qr(random)
    descriptor = OperatorDescriptor(unitary, first_site=2, width=2,
                                    label="straddling unitary")
    report = sr_facts_check(state, descriptor, Cut(2, 4, 2))
    assert report.straddles_cut
    assert report.rank_after <= 4 * report.rank_before
    assert report.passed


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_sr_facts_property_suite(seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 32)
    random = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    unitary, _ = np.linalg.qr(random)
    descriptor = OperatorDescriptor(unitary, first_site=2, width=2, label="u")
    report = sr_facts_check(state, descriptor, Cut(2, 5, 2))
    assert report.additivity_ok
    assert report.growth_ok
    assert report.ratio_bound_ok


def test_cut_validation():
    with pytest.raises(ValueError):
        Cut(0, 4, 2)
    with pytest.raises(ValueError):
        Cut(4, 4, 2)
    cut = Cut(1, 4, 2)
    assert cut.left_dim == 2 and cut.right_dim == 8
