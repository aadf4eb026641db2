import numpy as np
import pytest

from agsplab import hamiltonian as ham
from agsplab.linalg import operator_norm


def test_product_parent_structure():
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=3))
    zero = np.zeros(8)
    zero[0] = 1.0
    # each term is 1 - |00><00| on its bond
    q = chain.term(1)
    expected = np.eye(4, dtype=complex)
    expected[0, 0] = 0.0
    assert np.allclose(q, expected)
    spectral = ham.spectral_gap(chain)
    assert np.allclose(np.abs(spectral.ground_state), zero, atol=1e-12)


def test_product_parent_validation_and_gap():
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=3))
    report = ham.validate_frustration_free(chain)
    assert report.ground_energy == pytest.approx(0.0, abs=1e-12)
    assert report.degeneracy == 1
    assert report.gap == pytest.approx(1.0, abs=1e-12)
    assert report.passed


def test_halved_term_flags_idempotency():
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=3))
    terms = list(chain.terms)
    terms[0] = 0.5 * terms[0]
    broken = ham.ProjectorChain(n=3, d=2, terms=tuple(terms), label="broken")
    report = ham.validate_frustration_free(broken)
    assert max(report.idempotency_residuals) == pytest.approx(0.25, abs=1e-12)
    assert not report.terms_ok


def test_product_parent_diagonal_spectrum():
    # H is diagonal in the computational basis: eigenvalue of a basis state
    # counts bonds not in |00>
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=3))
    h = chain.hamiltonian()
    assert operator_norm(h - np.diag(np.diag(h))) <= 1e-12
    energies = np.diag(h).real
    expected = []
    for x in range(8):
        bits = [(x >> (2 - i)) & 1 for i in range(3)]
        expected.append(sum(1 for i in range(2) if bits[i] or bits[i + 1]))
    assert np.allclose(sorted(energies), sorted(expected))


def test_two_site_chain_trivial_gap():
    chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=2))
    spectral = ham.spectral_gap(chain)
    assert spectral.gap == pytest.approx(1.0, abs=1e-12)
    omega = np.zeros(4)
    omega[0] = 1
    assert abs(np.vdot(omega, spectral.ground_state)) == pytest.approx(1.0, abs=1e-12)


def test_aklt_unpinned_degeneracy_flagged():
    with pytest.warns(UserWarning, match="degenerate"):
        chain = ham.build_model(ham.ModelSpec(kind="aklt", n=4))
    report = ham.validate_frustration_free(chain)
    assert report.degeneracy == 4
    assert not report.unique_ground_state
    with pytest.raises(ham.DegenerateGroundSpaceError, match="4-fold"):
        ham.spectral_gap(chain)


def test_aklt_pinned_unique(aklt_chains):
    for n, (chain, spectral) in aklt_chains.items():
        assert spectral.degeneracy == 1
        assert spectral.gap > 0.1
        report = ham.validate_frustration_free(chain)
        assert report.terms_ok and report.frustration_free


def test_random_mps_parent_annihilates_seed():
    spec = ham.ModelSpec(kind="random_mps_parent", n=6, d=2, bond_dim=2, seed=7)
    chain = ham.build_model(spec)
    psi = ham.seeding_state(spec)
    assert np.linalg.norm(chain.hamiltonian() @ psi) <= 1e-9
    report = ham.validate_frustration_free(chain)
    assert report.frustration_free
    # with bond dimension equal to the local dimension the interior two-site
    # supports fill the whole bond space, so the ground space is degenerate
    assert report.degeneracy > 1


def test_random_mps_parent_unique_ground_state(random_chains):
    spec, chain, spectral = random_chains[8]  # first n=6 entry
    psi = ham.seeding_state(spec)
    overlap = abs(np.vdot(spectral.ground_state, psi))
    assert overlap == pytest.approx(1.0, abs=1e-9)


def test_dimension_cap():
    with pytest.raises(ham.DimensionCapError):
        ham.build_model(ham.ModelSpec(kind="product_parent", n=12), cap=1000)


def test_bond_dim_required():
    with pytest.raises(ValueError, match="bond_dim"):
        ham.build_model(ham.ModelSpec(kind="random_mps_parent", n=4))


def test_normalize_to_projectors_scaling():
    q = np.eye(4, dtype=complex)
    q[0, 0] = 0.0
    chain = ham.normalize_to_projectors([2.5 * q, 2.5 * q])
    assert np.allclose(chain.term(1), q, atol=1e-12)


def test_normalize_to_projectors_fixed_point():
    q = np.eye(4, dtype=complex)
    q[0, 0] = 0.0
    chain = ham.normalize_to_projectors([q.copy()])
    assert np.allclose(chain.term(1), q, atol=1e-12)


def test_normalize_to_projectors_random_psd_kernel():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    psd = a @ a.conj().T  # rank 2, kernel dimension 2
    chain = ham.normalize_to_projectors([psd])
    q = chain.term(1)
    vals, vecs = np.linalg.eigh(psd)
    kernel = vecs[:, vals < 1e-10 * vals[-1]]
    assert np.linalg.norm(q @ kernel) <= 1e-10
    assert operator_norm(q @ q - q) <= 1e-10
    assert np.linalg.matrix_rank(q, tol=1e-10) == 2


def test_normalize_to_projectors_trivial_kernel_rejected():
    with pytest.raises(ValueError, match="trivial kernel"):
        ham.normalize_to_projectors([np.eye(4, dtype=complex)])


def test_term_invariants_on_all_models(product_chains, aklt_chains, random_chains):
    chains = [c for c, _ in product_chains.values()]
    chains += [c for c, _ in aklt_chains.values()]
    chains += [c for _, c, _ in random_chains[:4]]
    for chain in chains:
        for q in chain.terms:
            vals = np.linalg.eigvalsh(q)
            assert np.all((np.abs(vals) < 1e-10) | (np.abs(vals - 1) < 1e-10))
        report = ham.validate_frustration_free(chain)
        assert abs(report.ground_energy) <= 1e-9


def test_perp_basis_respects_gap(product_chains):
    chain, spectral = product_chains[4]
    h = chain.hamiltonian()
    v = spectral.perp_basis
    restricted = v.conj().T @ h @ v
    lowest = np.linalg.eigvalsh(restricted)[0]
    assert lowest >= spectral.gap - 1e-9
