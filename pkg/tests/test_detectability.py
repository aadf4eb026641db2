import numpy as np
import pytest

from agsplab import hamiltonian as ham
from agsplab.detectability import (
    coarse_grain,
    delta0,
    dl_operator,
    layer_projectors,
    pulling_residual,
    shrink_factor,
    verify_pyramid_identity,
)
from agsplab.linalg import operator_norm


def test_layer_structure_small_product(product_chains):
    chain, _ = product_chains[3]
    layers = layer_projectors(chain)
    assert layers.odd_bonds == (1,)
    assert layers.even_bonds == (2,)
    # both diagonal for the product model
    for pi in (layers.pi_odd, layers.pi_even):
        assert operator_norm(pi - np.diag(np.diag(pi))) <= 1e-12


def test_layer_bond_assignment_n12():
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=12))
    layers = layer_projectors(chain)
    assert layers.odd_bonds == (1, 3, 5, 7, 9, 11)
    assert layers.even_bonds == (2, 4, 6, 8, 10)


def test_layers_idempotent_hermitian(aklt_chains):
    chain, spectral = aklt_chains[5]
    layers = layer_projectors(chain)
    for pi in (layers.pi_odd, layers.pi_even):
        assert operator_norm(pi @ pi - pi) <= 1e-10
        assert operator_norm(pi - pi.conj().T) <= 1e-10
        omega = spectral.ground_state
        assert np.linalg.norm(pi @ omega - omega) <= 1e-9


def test_disjoint_projectors_commute_exactly(product_chains):
    chain, _ = product_chains[4]
    p1 = np.eye(16, dtype=complex) - chain.embedded_term(1)
    p3 = np.eye(16, dtype=complex) - chain.embedded_term(3)
    assert operator_norm(p1 @ p3 - p3 @ p1) == 0.0


def test_dl_operator_product_is_exact_projector(product_chains):
    chain, spectral = product_chains[6]
    a = dl_operator(chain)
    assert operator_norm(a @ a - a) <= 1e-10
    report = shrink_factor(a, spectral)
    assert report.measured_delta <= 1e-10
    omega = spectral.ground_state
    assert np.linalg.norm(a @ omega - omega) <= 1e-9


def test_orderings_agree(aklt_chains):
    chain, spectral = aklt_chains[5]
    r1 = shrink_factor(dl_operator(chain, "odd_even"), spectral, "odd_even")
    r2 = shrink_factor(dl_operator(chain, "even_odd"), spectral, "even_odd")
    assert abs(r1.measured_delta - r2.measured_delta) <= 1e-9


def test_dl_bound_on_models(aklt_chains, random_chains):
    chain, spectral = aklt_chains[6]
    report = shrink_factor(dl_operator(chain), spectral)
    assert report.within_bound
    assert 0.0 < report.measured_delta < 1.0
    _, chain, spectral = random_chains[0]
    report = shrink_factor(dl_operator(chain), spectral)
    assert report.within_bound


def test_shrink_factor_identity_and_projector(product_chains):
    chain, spectral = product_chains[4]
    dim = chain.dim
    identity = np.eye(dim, dtype=complex)
    assert shrink_factor(identity, spectral).measured_delta == pytest.approx(1.0, abs=1e-10)
    omega = spectral.ground_state
    ground_proj = np.outer(omega, omega.conj())
    assert shrink_factor(ground_proj, spectral).measured_delta <= 1e-12


def test_shrink_factor_rejects_non_invariant(product_chains):
    chain, spectral = product_chains[4]
    bad = np.zeros((chain.dim, chain.dim), dtype=complex)
    with pytest.raises(ValueError, match="fix the ground state"):
        shrink_factor(bad, spectral)


def test_delta0_values():
    assert delta0(1.0) == pytest.approx(1.5 ** (-2 / 3), abs=1e-15)
    assert delta0(0.0) == pytest.approx(1.0, abs=1e-15)


def test_coarse_grain_identity_k1(product_chains):
    chain, _ = product_chains[4]
    assert coarse_grain(chain, 1) is chain


def test_coarse_grain_product_n4():
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=4))
    coarse = coarse_grain(chain, 2)
    assert coarse.n == 2 and coarse.d == 4
    p_expected = np.zeros((16, 16), dtype=complex)
    p_expected[0, 0] = 1.0
    assert np.allclose(np.eye(16) - coarse.term(1), p_expected, atol=1e-10)
    report = ham.validate_frustration_free(coarse)
    assert report.frustration_free and report.degeneracy == 1


def test_coarse_grain_preserves_ground_state(random_chains):
    _, chain, spectral = random_chains[8]  # n=6
    coarse = coarse_grain(chain, 2)
    coarse_spectral = ham.spectral_gap(coarse)
    fidelity = abs(np.vdot(spectral.ground_state, coarse_spectral.ground_state))
    assert fidelity >= 1 - 1e-9


def test_coarse_grain_requires_divisor(product_chains):
    chain, _ = product_chains[3]
    with pytest.raises(ValueError, match="divide"):
        coarse_grain(chain, 2)


def test_pulling_property(random_chains):
    _, chain, _ = random_chains[8]  # n=6
    coarse = coarse_grain(chain, 2)
    assert pulling_residual(chain, coarse, 2) <= 1e-10


def test_pyramid_identity_commuting_model(product_chains):
    chain, spectral = product_chains[4]
    report = verify_pyramid_identity(chain, 2, spectral=spectral)
    assert report.identity_residual <= 1e-10
    assert report.coarse_measured_delta <= report.coarse_bound + 1e-9
    assert report.pulling_max_residual <= 1e-10


def test_pyramid_identity_odd_k_rejected(product_chains):
    chain, _ = product_chains[4]
    with pytest.raises(ValueError, match="even"):
        verify_pyramid_identity(chain, 1)
