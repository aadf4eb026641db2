"""Frustration-free projector chains: construction, validation, exact spectra.

A chain holds ``n`` particles of local dimension ``d`` and ``n - 1``
two-site projector terms ``Q_i`` acting on particles ``(i, i+1)``.  The
Hamiltonian ``H = sum_i Q_i`` of every model built here annihilates its
ground state term by term, and all spectra are obtained by dense exact
diagonalization (the dimension cap keeps that honest).

Interaction strength is normalized to 1 throughout: a general bounded
two-site term can be traded for the projector onto the complement of its
kernel (see :func:`normalize_to_projectors`), at the price of rescaling the
gap by the original strength.  That rescaling is documentation, not code.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    dagger,
    embed_pair_term,
    fix_phase,
    kernel_projector,
    operator_norm,
    range_projector,
)

DEFAULT_DIMENSION_CAP = 20000

HERMITICITY_TOL = 1e-12
IDEMPOTENCY_TOL = 1e-10
ZERO_ENERGY_TOL = 1e-9
# Eigenvalues count as ground-space members only below both thresholds.
DEGENERACY_ABS_TOL = 1e-7
DEGENERACY_GAP_FRACTION = 0.01

MODEL_KINDS = ("product_parent", "aklt", "random_mps_parent")


class DimensionCapError(ValueError):
    """Requested model exceeds the configured Hilbert-space cap."""


class DegenerateGroundSpaceError(ValueError):
    """Operation requires a unique ground state but found a degenerate one."""

    def __init__(self, degeneracy: int, label: str = ""):
        self.degeneracy = degeneracy
        super().__init__(
            f"ground space of {label or 'chain'} is {degeneracy}-fold degenerate; "
            "a unique ground state is required"
        )


@dataclass(frozen=True)
class ProjectorChain:
    """A chain of two-site projector terms.

    terms[i] is the d^2 x d^2 matrix Q_{i+1} acting on particles
    (i+1, i+2) in 1-based labelling.
    """

    n: int
    d: int
    terms: tuple
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two particles")
        if self.d < 2:
            raise ValueError("local dimension must be >= 2")
        if len(self.terms) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} terms, got {len(self.terms)}")
        terms = []
        for q in self.terms:
            q = np.asarray(q, dtype=np.complex128)
            if q.shape != (self.d**2, self.d**2):
                raise ValueError("each term must be d^2 x d^2")
            q = q.copy()
            q.flags.writeable = False
            terms.append(q)
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def dim(self) -> int:
        return self.d**self.n

    @property
    def bonds(self) -> range:
        return range(1, self.n)

    def term(self, bond: int):
        """Q_bond (1-based)."""
        return self.terms[bond - 1]

    def embedded_term(self, bond: int):
        return embed_pair_term(self.term(bond), bond, self.n, self.d)

    def hamiltonian(self):
        h = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for bond in self.bonds:
            h += self.embedded_term(bond)
        return h


@dataclass(frozen=True)
class SpectralData:
    """Exact spectral data for a chain with a unique ground state."""

    ground_state: np.ndarray
    degeneracy: int
    gap: float
    perp_basis: np.ndarray  # columns span the orthogonal complement
    ground_energy: float
    n: int
    d: int
    label: str = ""
    seed: int | None = None

    def to_record(self) -> dict:
        return {
            "gap": self.gap,
            "degeneracy": self.degeneracy,
            "ground_energy": self.ground_energy,
            "n": self.n,
            "d": self.d,
            "label": self.label,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a buildable chain."""

    kind: str
    n: int
    d: int | None = None
    bond_dim: int | None = None
    pin_boundary: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.kind == "aklt":
            if self.d not in (None, 3):
                raise ValueError("aklt is a spin-1 model; d must be 3")
            object.__setattr__(self, "d", 3)
        elif self.d is None:
            object.__setattr__(self, "d", 2)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        allowed = {"kind", "n", "d", "bond_dim", "pin_boundary", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown ModelSpec fields: {sorted(unknown)}")
        return cls(**data)


@dataclass
class ValidationReport:
    label: str
    hermiticity_residuals: list
    idempotency_residuals: list
    ground_energy: float
    degeneracy: int
    gap: float
    frustration_free: bool
    unique_ground_state: bool

    @property
    def terms_ok(self) -> bool:
        return (
            max(self.hermiticity_residuals) <= HERMITICITY_TOL
            and max(self.idempotency_residuals) <= IDEMPOTENCY_TOL
        )

    @property
    def passed(self) -> bool:
        return self.terms_ok and self.frustration_free and self.unique_ground_state

    def to_record(self) -> dict:
        return {
            "label": self.label,
            "hermiticity_residuals": self.hermiticity_residuals,
            "idempotency_residuals": self.idempotency_residuals,
            "ground_energy": self.ground_energy,
            "degeneracy": self.degeneracy,
            "gap": self.gap,
            "frustration_free": self.frustration_free,
            "unique_ground_state": self.unique_ground_state,
            "terms_ok": self.terms_ok,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# model builders


def _check_cap(n: int, d: int, cap: int):
    if d**n > cap:
        raise DimensionCapError(f"d^n = {d**n} exceeds dimension cap {cap}")


def _product_parent_terms(n: int, d: int):
    q = np.eye(d * d, dtype=np.complex128)
    q[0, 0] = 0.0
    return [q.copy() for _ in range(n - 1)]


def _spin1_matrices():
    sz = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
    sp = np.zeros((3, 3), dtype=np.complex128)
    sp[0, 1] = sp[1, 2] = np.sqrt(2.0)
    sx = (sp + dagger(sp)) / 2
    sy = (sp - dagger(sp)) / (2j)
    return sx, sy, sz


def _aklt_bulk_term():
    """Projector onto the joint spin-2 subspace of two spin-1 particles."""
    sx, sy, sz = _spin1_matrices()
    s_dot_s = sum(np.kron(s, s) for s in (sx, sy, sz))
    s_tot_sq = 4.0 * np.eye(9) + 2.0 * s_dot_s
    # spin-2 block has S_tot^2 = 6, the others 2 and 0
    p2 = s_tot_sq @ (s_tot_sq - 2.0 * np.eye(9)) / 24.0
    return p2


def _merge_single_site(term, site_projector, side: str):
    """Absorb a single-site projector into an adjacent two-site term.

    The merged term is the projector onto the complement of the joint
    kernel, so the chain keeps its n-1 projector-term shape and the global
    ground space is unchanged.
    """
    d = site_projector.shape[0]
    if side == "left":
        extra = np.kron(site_projector, np.eye(d))
    else:
        extra = np.kron(np.eye(d), site_projector)
    ker, _ = kernel_projector(term + extra)
    return np.eye(term.shape[0], dtype=np.complex128) - ker


def _aklt_terms(n: int, pin_boundary: bool):
    bulk = _aklt_bulk_term().astype(np.complex128)
    terms = [bulk.copy() for _ in range(n - 1)]
    if pin_boundary:
        # Rank-1 boundary projectors kill the Sz=+1 amplitude on the first
        # site and the Sz=-1 amplitude on the last one, which selects a
        # single state out of the fourfold-degenerate open-chain manifold.
        up = np.zeros((3, 3), dtype=np.complex128)
        up[0, 0] = 1.0
        down = np.zeros((3, 3), dtype=np.complex128)
        down[2, 2] = 1.0
        terms[0] = _merge_single_site(terms[0], up, "left")
        terms[-1] = _merge_single_site(terms[-1], down, "right")
    return terms


def random_mps_state(n: int, d: int, bond_dim: int, seed: int, real: bool = False):
    """Seeded random open-boundary MPS, returned as site tensors and the
    contracted (normalized) state vector."""
    rng = np.random.default_rng(seed)
    dims = [1]
    for i in range(1, n):
        dims.append(min(d**i, d ** (n - i), bond_dim))
    dims.append(1)
    tensors = []
    for i in range(n):
        shape = (dims[i], d, dims[i + 1])
        a = rng.standard_normal(shape)
        if not real:
            a = a + 1j * rng.standard_normal(shape)
        tensors.append(a.astype(np.complex128))
    vec = tensors[0].reshape(d, dims[1])
    for i in range(1, n):
        vec = np.tensordot(vec, tensors[i], axes=([vec.ndim - 1], [0]))
    vec = vec.reshape(-1)
    vec = vec / np.linalg.norm(vec)
    return tensors, fix_phase(vec)


def _random_mps_parent_terms(n: int, d: int, bond_dim: int, seed: int, real: bool):
    tensors, vec = random_mps_state(n, d, bond_dim, seed, real=real)
    terms = []
    for i in range(n - 1):
        a, b = tensors[i], tensors[i + 1]
        # two-site blocks indexed by (left bond, right bond); their span is
        # the local support of the seeding state on particles (i, i+1)
        block = np.einsum("asb,btc->stac", a, b)
        support = block.reshape(d * d, -1)
        proj = range_projector(support)
        terms.append(np.eye(d * d, dtype=np.complex128) - proj)
    return terms, vec


def build_model(spec: ModelSpec, cap: int = DEFAULT_DIMENSION_CAP) -> ProjectorChain:
    """Instantiate a frustration-free projector chain from a ModelSpec."""
    _check_cap(spec.n, spec.d, cap)
    if spec.kind == "product_parent":
        terms = _product_parent_terms(spec.n, spec.d)
        label = f"product_parent(n={spec.n},d={spec.d})"
    elif spec.kind == "aklt":
        if not spec.pin_boundary:
            warnings.warn(
                "open aklt chain has a fourfold-degenerate ground space; "
                "set pin_boundary=True for a unique ground state",
                stacklevel=2,
            )
        terms = _aklt_terms(spec.n, spec.pin_boundary)
        label = f"aklt(n={spec.n},pinned={spec.pin_boundary})"
    else:
        if spec.bond_dim is None or spec.bond_dim < 1:
            raise ValueError("random_mps_parent requires bond_dim >= 1")
        real = spec.d**spec.n > 4096  # keep big instances in the float64 fast path
        terms, _ = _random_mps_parent_terms(spec.n, spec.d, spec.bond_dim, spec.seed, real)
        label = f"random_mps_parent(n={spec.n},d={spec.d},chi={spec.bond_dim},seed={spec.seed})"
    return ProjectorChain(n=spec.n, d=spec.d, terms=tuple(terms), label=label)


def seeding_state(spec: ModelSpec):
    """The MPS vector a random_mps_parent chain was built to annihilate."""
    if spec.kind != "random_mps_parent":
        raise ValueError("seeding_state is only defined for random_mps_parent")
    real = spec.d**spec.n > 4096
    _, vec = random_mps_state(spec.n, spec.d, spec.bond_dim, spec.seed, real=real)
    return vec


# ---------------------------------------------------------------------------
# validation and spectra


def _ground_sector(evals):
    """Indices of eigenvalues that count as ground space.

    An eigenvalue belongs to the ground sector when it is below the absolute
    threshold and below gap/100, where the gap is the first eigenvalue that
    clears the absolute threshold.
    """
    above = evals[evals >= DEGENERACY_ABS_TOL]
    first_excited = float(above[0]) if above.size else float("inf")
    cut = min(DEGENERACY_ABS_TOL, DEGENERACY_GAP_FRACTION * first_excited)
    g = int(np.sum(evals < cut))
    return g, first_excited


def full_spectrum(chain: ProjectorChain):
    """Dense eigendecomposition of H, in float64 when the chain is real."""
    h = chain.hamiltonian()
    if not h.imag.any():
        vals, vecs = np.linalg.eigh(h.real)
        vecs = vecs.astype(np.complex128)
    else:
        vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def validate_frustration_free(chain: ProjectorChain) -> ValidationReport:
    herm, idem = [], []
    for q in chain.terms:
        herm.append(operator_norm(q - dagger(q)))
        idem.append(operator_norm(q @ q - q))
    evals, _ = full_spectrum(chain)
    g, first_excited = _ground_sector(evals)
    ground_energy = float(evals[0])
    gap = float(evals[g]) if g < evals.size else float("nan")
    return ValidationReport(
        label=chain.label,
        hermiticity_residuals=herm,
        idempotency_residuals=idem,
        ground_energy=ground_energy,
        degeneracy=g,
        gap=gap,
        frustration_free=abs(ground_energy) <= ZERO_ENERGY_TOL,
        unique_ground_state=(g == 1),
    )


def spectral_gap(chain: ProjectorChain, seed: int | None = None) -> SpectralData:
    """Full dense diagonalization; requires a unique zero-energy ground state."""
    evals, evecs = full_spectrum(chain)
    g, _ = _ground_sector(evals)
    if abs(float(evals[0])) > ZERO_ENERGY_TOL:
        raise ValueError(
            f"{chain.label or 'chain'} is not frustration free: ground energy {evals[0]:.3e}"
        )
    if g != 1:
        raise DegenerateGroundSpaceError(g, chain.label)
    ground = fix_phase(evecs[:, 0])
    perp = evecs[:, 1:]
    return SpectralData(
        ground_state=ground,
        degeneracy=1,
        gap=float(evals[1]),
        perp_basis=perp,
        ground_energy=float(evals[0]),
        n=chain.n,
        d=chain.d,
        label=chain.label,
        seed=seed,
    )


def normalize_to_projectors(terms, n: int | None = None, d: int | None = None,
                            label: str = "") -> ProjectorChain:
    """Replace PSD two-site terms by projectors onto their kernel complements.

    Preserves every term's kernel, hence the common ground space.  Raises if
    a term has a trivial kernel (the result could not be frustration free).
    """
    terms = [np.asarray(t, dtype=np.complex128) for t in terms]
    if d is None:
        d = int(round(np.sqrt(terms[0].shape[0])))
    if n is None:
        n = len(terms) + 1
    out = []
    for i, t in enumerate(terms):
        herm = operator_norm(t - dagger(t))
        if herm > 1e-10:
            raise ValueError(f"term {i + 1} is not Hermitian (residual {herm:.3e})")
        ker, rank = kernel_projector(t)
        if rank == 0:
            raise ValueError(f"term {i + 1} has a trivial kernel")
        out.append(np.eye(t.shape[0], dtype=np.complex128) - ker)
    return ProjectorChain(n=n, d=d, terms=tuple(out), label=label or "normalized")
