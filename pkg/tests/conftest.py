"""Shared model fixtures.

Expensive objects (exact spectra, certified operators) are built once per
session.  Random chains are pinned to explicit seeds so every run sees the
same instances; the seeds were screened once for a unique ground state and
a gap above 1e-3, which the fixtures re-assert.
"""

import numpy as np
import pytest

from agsplab import agsp, detectability
from agsplab import hamiltonian as ham
from agsplab.io import derive_rng
from agsplab.schmidt import Cut, schmidt_decompose

# 20 seeded random parent chains: d=3, bond dimension 2 (the largest bond
# dimension a 3-level chain supports with nontrivial two-site terms)
RANDOM_CHAIN_SPECS = (
    [(5, s) for s in range(1, 9)]
    + [(6, s) for s in range(1, 9)]
    + [(7, s) for s in range(1, 5)]
)


def middle_cut(chain) -> Cut:
    return Cut((chain.n + 1) // 2, chain.n, chain.d)


def random_product_states(count, n, d, stream=0, tag="probes"):
    rng = derive_rng(0, tag, stream=stream)
    states = []
    for _ in range(count):
        state = np.ones(1, dtype=np.complex128)
        for _ in range(n):
            site = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            site /= np.linalg.norm(site)
            state = np.kron(state, site)
        states.append(state)
    return states


@pytest.fixture(scope="session")
def product_chains():
    """product_parent chains with spectra, keyed by n."""
    out = {}
    for n in (3, 4, 6, 8, 10):
        chain = ham.build_model(ham.ModelSpec(kind="product_parent", n=n))
        out[n] = (chain, ham.spectral_gap(chain))
    return out


@pytest.fixture(scope="session")
def aklt_chains():
    """Boundary-pinned open chains with unique ground states, keyed by n."""
    out = {}
    for n in (4, 5, 6, 7):
        chain = ham.build_model(ham.ModelSpec(kind="aklt", n=n, pin_boundary=True))
        spectral = ham.spectral_gap(chain)
        out[n] = (chain, spectral)
    return out


@pytest.fixture(scope="session")
def random_chains():
    """The 20 screened random parent chains with spectra."""
    out = []
    for n, seed in RANDOM_CHAIN_SPECS:
        spec = ham.ModelSpec(kind="random_mps_parent", n=n, d=3, bond_dim=2,
                             seed=seed)
        chain = ham.build_model(spec)
        spectral = ham.spectral_gap(chain, seed=seed)
        assert spectral.degeneracy == 1 and spectral.gap > 1e-3
        out.append((spec, chain, spectral))
    return out


def certify(chain, spectral, q, l=None, window_m=2, probe_count=8, stream=0):
    """Window, K = hat_A^l, and its certificate at the middle cut."""
    cut = middle_cut(chain)
    window = agsp.make_window(chain, cut, window_m)
    probes = random_product_states(probe_count, chain.n, chain.d, stream=stream)
    decomp = schmidt_decompose(spectral.ground_state, cut)
    probes.append(np.kron(decomp.left_vectors[:, 0], decomp.right_vectors[:, 0]))
    k, cert = agsp.build_k(chain, window, q=q, l=l, spectral=spectral,
                           probes=probes)
    return {
        "chain": chain,
        "spectral": spectral,
        "cut": cut,
        "window": window,
        "k": k,
        "certificate": cert,
        "ground_decomposition": decomp,
    }


@pytest.fixture(scope="session")
def certified_product(product_chains):
    chain, spectral = product_chains[6]
    return certify(chain, spectral, q=3, l=3, stream=1)


@pytest.fixture(scope="session")
def certified_random(random_chains):
    for spec, chain, spectral in random_chains:
        if spec.n == 6 and spec.seed == 1:
            return certify(chain, spectral, q=2, l=7, stream=2)
    raise RuntimeError("expected n=6 seed=1 in the random chain set")


@pytest.fixture(scope="session")
def certified_random_7(random_chains):
    for spec, chain, spectral in random_chains:
        if spec.n == 7 and spec.seed == 1:
            return certify(chain, spectral, q=2, l=7, stream=3)
    raise RuntimeError("expected n=7 seed=1 in the random chain set")


@pytest.fixture(scope="session")
def certified_instances(certified_product, certified_random, certified_random_7):
    return [certified_product, certified_random, certified_random_7]


def criterion_line(number, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {number:2d}] {status} - {detail}")
