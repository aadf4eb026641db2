"""Layer projectors, the detectability-lemma operator, measured shrink
factors, and coarse-graining.

The two layers of a chain are the odd-indexed and even-indexed bonds.
Within a layer the terms act on disjoint particle pairs, so each layer
projector is assembled as a single tensor product (no matrix products);
only the cross-layer operator A needs a matmul.

``shrink_factor`` measures the restriction of an operator to the
orthogonal complement of the ground state.  For a gapped frustration-free
chain the detectability lemma caps that number for A at
``delta0(eps) = (eps/2 + 1)^(-2/3)``, independent of the chain length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import ProjectorChain, SpectralData
from .linalg import as_working_dtype, dagger, operator_norm
from .schmidt import Cut

GROUND_INVARIANCE_TOL = 1e-8

ORDERINGS = ("odd_even", "even_odd")


def delta0(epsilon: float) -> float:
    """Detectability-lemma shrink bound for spectral gap epsilon."""
    return 1.0 / (epsilon / 2.0 + 1.0) ** (2.0 / 3.0)


@dataclass(frozen=True)
class LayerOperators:
    """Products of the ground-space projectors P_i = 1 - Q_i per layer."""

    pi_odd: np.ndarray
    pi_even: np.ndarray
    odd_bonds: tuple
    even_bonds: tuple
    n: int
    d: int

    def layer(self, name: str):
        return self.pi_odd if name == "odd" else self.pi_even

    def bonds(self, name: str) -> tuple:
        return self.odd_bonds if name == "odd" else self.even_bonds

    def cut_layer(self, cut: Cut) -> str:
        """Layer containing the bond term straddling the given cut."""
        return "odd" if cut.position % 2 == 1 else "even"


def layer_product(chain: ProjectorChain, bonds) -> np.ndarray:
    """Product of P_bond over non-adjacent bonds, assembled as one kron.

    Bonds must be pairwise non-adjacent (they then act on disjoint pairs,
    so the commuting product is itself a tensor product).
    """
    bonds = sorted(bonds)
    for a, b in zip(bonds, bonds[1:]):
        if b - a < 2:
            raise ValueError("bonds within a layer must be non-adjacent")
    eye2 = np.eye(chain.d**2, dtype=np.complex128)
    eye1 = np.eye(chain.d, dtype=np.complex128)
    factors = []
    site = 1
    for bond in bonds:
        while site < bond:
            factors.append(eye1)
            site += 1
        factors.append(eye2 - chain.term(bond))
        site += 2
    while site <= chain.n:
        factors.append(eye1)
        site += 1
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def layer_projectors(chain: ProjectorChain) -> LayerOperators:
    odd = tuple(b for b in chain.bonds if b % 2 == 1)
    even = tuple(b for b in chain.bonds if b % 2 == 0)
    pi_odd = layer_product(chain, odd)
    if even:
        pi_even = layer_product(chain, even)
    else:
        pi_even = np.eye(chain.dim, dtype=np.complex128)
    return LayerOperators(
        pi_odd=pi_odd, pi_even=pi_even, odd_bonds=odd, even_bonds=even,
        n=chain.n, d=chain.d,
    )


def dl_operator(chain: ProjectorChain, ordering: str = "odd_even",
                layers: LayerOperators | None = None) -> np.ndarray:
    """The two-layer operator, Pi_odd @ Pi_even or the reverse order."""
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}")
    if layers is None:
        layers = layer_projectors(chain)
    a, b, _ = as_working_dtype(layers.pi_odd, layers.pi_even)
    return a @ b if ordering == "odd_even" else b @ a


@dataclass
class ShrinkReport:
    """Measured shrink of an operator on the ground state's complement."""

    measured_delta: float
    dl_bound: float
    ordering: str
    epsilon: float
    label: str = ""
    ground_residual: float = 0.0

    @property
    def within_bound(self) -> bool:
        return self.measured_delta <= self.dl_bound + 1e-9

    def to_record(self) -> dict:
        return {
            "measured_delta": self.measured_delta,
            "dl_bound": self.dl_bound,
            "ordering": self.ordering,
            "epsilon": self.epsilon,
            "label": self.label,
            "ground_residual": self.ground_residual,
            "within_bound": self.within_bound,
        }


def restricted_norm(k: np.ndarray, spectral: SpectralData) -> tuple:
    """(sigma_max(K V), ground residual, leak) for V the perp isometry."""
    omega = spectral.ground_state
    kk, vv, _ = as_working_dtype(k, spectral.perp_basis)
    ground_residual = float(np.linalg.norm(k @ omega - omega))
    kv = kk @ vv
    leak = float(np.linalg.norm(dagger(omega) @ kv))
    sigma = operator_norm(kv)
    return sigma, ground_residual, leak


def shrink_factor(k: np.ndarray, spectral: SpectralData,
                  ordering: str = "odd_even", label: str = "") -> ShrinkReport:
    """Measured ||K restricted to the ground state's complement||^2.

    Requires K to fix the ground state and map the complement into itself
    (both within GROUND_INVARIANCE_TOL); violations raise.
    """
    sigma, ground_residual, leak = restricted_norm(k, spectral)
    if ground_residual > GROUND_INVARIANCE_TOL:
        raise ValueError(f"operator does not fix the ground state "
                         f"(residual {ground_residual:.3e})")
    if leak > GROUND_INVARIANCE_TOL:
        raise ValueError(f"operator leaks from the complement onto the "
                         f"ground state (norm {leak:.3e})")
    return ShrinkReport(
        measured_delta=sigma**2,
        dl_bound=delta0(spectral.gap),
        ordering=ordering,
        epsilon=spectral.gap,
        label=label or spectral.label,
        ground_residual=ground_residual,
    )


# ---------------------------------------------------------------------------
# coarse-graining


def coarse_grain(chain: ProjectorChain, k: int, cap: int = 20000) -> ProjectorChain:
    """Fuse k adjacent particles into one of dimension d^k.

    The new bond term between fused blocks i and i+1 projects onto the
    complement of the common kernel of every original term fully supported
    inside those 2k particles.  The total Hilbert space (and the ground
    space) is unchanged; only the term structure coarsens.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return chain
    if chain.n % k != 0:
        raise ValueError(f"k = {k} does not divide n = {chain.n}")
    big_d = chain.d**k
    if big_d**2 > cap:
        raise ValueError(f"coarse terms would have dimension {big_d**2} > cap {cap}")
    from .linalg import embed_window_term, kernel_projector

    n_coarse = chain.n // k
    window_dim = chain.d ** (2 * k)
    terms = []
    for i in range(1, n_coarse):
        first_site = (i - 1) * k + 1  # original index of the window start
        h_window = np.zeros((window_dim, window_dim), dtype=np.complex128)
        for bond in range(first_site, first_site + 2 * k - 1):
            local = embed_window_term(chain.term(bond), bond - first_site + 1,
                                      2, 2 * k, chain.d)
            h_window += local
        p_common, rank = kernel_projector(h_window)
        if rank == 0:
            raise ValueError(f"coarse window {i} has no common ground space")
        terms.append(np.eye(window_dim, dtype=np.complex128) - p_common)
    return ProjectorChain(
        n=n_coarse, d=big_d, terms=tuple(terms),
        label=f"{chain.label}|coarse(k={k})",
    )


def pulling_residual(chain: ProjectorChain, coarse: ProjectorChain, k: int) -> float:
    """max over coarse terms and enclosed original terms of
    ||P'_i P_j - P'_i||: the coarse ground projector absorbs every original
    one inside its window."""
    from .linalg import embed_window_term

    window_dim = chain.d ** (2 * k)
    eye = np.eye(window_dim, dtype=np.complex128)
    worst = 0.0
    for i in range(1, coarse.n):
        p_coarse = eye - coarse.term(i)
        first_site = (i - 1) * k + 1
        for bond in range(first_site, first_site + 2 * k - 1):
            p_orig = eye - embed_window_term(chain.term(bond),
                                             bond - first_site + 1, 2, 2 * k, chain.d)
            worst = max(worst, operator_norm(p_coarse @ p_orig - p_coarse))
    return worst


@dataclass
class PyramidReport:
    """Numerical comparison of the coarse two-layer operator against the
    pyramid rearrangement of original layers, plus the coarse shrink."""

    k: int
    identity_residual: float
    coarse_measured_delta: float
    coarse_bound: float  # delta0(eps)^k
    pulling_max_residual: float
    epsilon: float
    label: str = ""

    @property
    def shrink_within_bound(self) -> bool:
        return self.coarse_measured_delta <= self.coarse_bound + 1e-9

    def to_record(self) -> dict:
        return {
            "k": self.k,
            "identity_residual": self.identity_residual,
            "coarse_measured_delta": self.coarse_measured_delta,
            "coarse_bound": self.coarse_bound,
            "pulling_max_residual": self.pulling_max_residual,
            "epsilon": self.epsilon,
            "label": self.label,
            "shrink_within_bound": self.shrink_within_bound,
        }


def verify_pyramid_identity(chain: ProjectorChain, k: int,
                            spectral: SpectralData | None = None,
                            cap: int = 20000) -> PyramidReport:
    """Report how closely Pi'_odd Pi'_even matches
    Pi'_odd (Pi_even Pi_odd Pi_odd Pi_even)^(k/2) Pi'_even, and measure the
    coarse operator's shrink against delta0(eps)^k.

    This is a reporting check: the identity's layer-count convention is
    ambiguous, so the residual is recorded rather than asserted.
    """
    if k % 2 != 0:
        raise ValueError("k must be even")
    coarse = coarse_grain(chain, k, cap=cap)
    fine_layers = layer_projectors(chain)
    coarse_layers = layer_projectors(coarse)

    po, pe, pco, pce, _ = as_working_dtype(
        fine_layers.pi_odd, fine_layers.pi_even,
        coarse_layers.pi_odd, coarse_layers.pi_even,
    )
    lhs = pco @ pce
    sandwich = pe @ po
    middle = np.linalg.matrix_power(sandwich @ sandwich.conj().T, k // 2)
    rhs = pco @ middle @ pce
    residual = operator_norm(lhs - rhs)

    if spectral is None:
        from .hamiltonian import spectral_gap

        spectral = spectral_gap(chain)
    coarse_report = shrink_factor(lhs, spectral, ordering="odd_even",
                                  label=coarse.label)
    return PyramidReport(
        k=k,
        identity_residual=residual,
        coarse_measured_delta=coarse_report.measured_delta,
        coarse_bound=delta0(spectral.gap) ** k,
        pulling_max_residual=pulling_residual(chain, coarse, k),
        epsilon=spectral.gap,
        label=chain.label,
    )
