"""Approximate ground-space projections built from diluted layer windows.

The pipeline, for a chain with a designated cut:

1. pick the window: the m same-layer bond projectors nearest the cut;
2. build the violation-counting operator N (sum of the window's Q terms),
   whose integer eigenvalue counts excited window terms per sector;
3. dilute: replace the window product by [C_m(N)]^q, the q-th power of the
   window polynomial evaluated spectrally in N — identity on the
   zero-violation sector, magnitude at most (1/3)^q elsewhere;
4. assemble hat_A = diluted window * rest of its layer * other layer, and
   raise it to the l-th power to get the working operator K;
5. certify: measured ground invariance, measured shrink on the ground
   state's complement, measured Schmidt-rank growth on probe states, and
   the declared theory bounds.

Amplification and the explicit entropy/tail bounds close the loop from a
certified K to entanglement statements about the ground state itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chebyshev import window_polynomial
from .detectability import (
    LayerOperators,
    delta0,
    layer_product,
    layer_projectors,
    restricted_norm,
    shrink_factor,
)
from .hamiltonian import ProjectorChain, SpectralData
from .linalg import as_working_dtype, dagger, embed_window_term, operator_norm
from .schmidt import Cut, schmidt_decompose

GROUND_RESIDUAL_TOL = 1e-8
REPIN_THRESHOLD = 1e-10
MAX_POWER = 64


class CertificateViolationError(RuntimeError):
    """Observed behaviour contradicts the certificate's (D, Delta) promise."""


@dataclass(frozen=True)
class Window:
    """m same-layer bond projectors around a designated cut, relabelled
    P_1..P_m in spatial order."""

    chain: ProjectorChain
    members: tuple  # ascending original bond indices
    cut: Cut
    clamped: bool = False

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def center_bond(self) -> int:
        return self.cut.position

    @property
    def center_index(self) -> int:
        """1-based position of the straddling bond among the members."""
        return self.members.index(self.cut.position) + 1

    @property
    def parity(self) -> str:
        return "odd" if self.cut.position % 2 == 1 else "even"


def make_window(chain: ProjectorChain, cut: Cut, m: int) -> Window:
    """The m bonds of the cut's own layer nearest to the cut.

    m is clamped to the layer size (recorded in the result); the math only
    weakens with a smaller window, it does not break.
    """
    if m < 2:
        raise ValueError("window size must be >= 2")
    b = cut.position
    layer = [bond for bond in chain.bonds if bond % 2 == b % 2]
    if len(layer) < 2:
        raise ValueError("the cut's layer has fewer than 2 bonds; "
                         "use a longer chain or Window.from_members")
    layer.sort(key=lambda bond: (abs(bond - b), bond))
    clamped = m > len(layer)
    members = tuple(sorted(layer[: min(m, len(layer))]))
    return Window(chain=chain, members=members, cut=cut, clamped=clamped)


def window_from_members(chain: ProjectorChain, members, cut: Cut,
                        commutator_tol: float = 1e-10) -> Window:
    """Window over an explicit member set.

    Members from a single layer always commute; mixed sets are accepted only
    when every adjacent pair commutes numerically (e.g. fully commuting
    models), since the sector calculus needs simultaneous eigenspaces.
    """
    members = tuple(sorted(members))
    if cut.position not in members:
        raise ValueError("the straddling bond must be a member")
    for a, b in zip(members, members[1:]):
        if b - a == 1:
            pa = np.eye(chain.d**3, dtype=np.complex128) - embed_window_term(
                chain.term(a), 1, 2, 3, chain.d)
            pb = np.eye(chain.d**3, dtype=np.complex128) - embed_window_term(
                chain.term(b), 2, 2, 3, chain.d)
            comm = operator_norm(pa @ pb - pb @ pa)
            if comm > commutator_tol:
                raise ValueError(
                    f"adjacent members {a},{b} do not commute (norm {comm:.3e})"
                )
    return Window(chain=chain, members=members, cut=cut)


def violation_operator(window: Window) -> np.ndarray:
    """N = sum over the window of (1 - P_i): counts excited window terms."""
    chain = window.chain
    out = np.zeros((chain.dim, chain.dim), dtype=np.complex128)
    for bond in window.members:
        out += chain.embedded_term(bond)
    return out


@dataclass(frozen=True)
class SectorDecomposition:
    """Simultaneous eigenspaces of the window projectors, grouped by the
    number of violations."""

    sectors: tuple  # ascending distinct violation counts
    bases: dict     # count -> orthonormal columns spanning that sector
    eigenvalues: np.ndarray  # raw eigenvalues of N, ascending

    def basis(self, count: int):
        return self.bases[count]

    @property
    def dim(self) -> int:
        return sum(b.shape[1] for b in self.bases.values())


def sector_decomposition(window: Window) -> SectorDecomposition:
    n_op = violation_operator(window)
    n_work, _ = as_working_dtype(n_op)
    vals, vecs = np.linalg.eigh(n_work)
    rounded = np.rint(vals).astype(int)
    bases = {}
    for count in sorted(set(rounded.tolist())):
        cols = vecs[:, rounded == count]
        bases[count] = cols.astype(np.complex128)
    return SectorDecomposition(
        sectors=tuple(sorted(bases)), bases=bases, eigenvalues=vals,
    )


def dilute_pi_m(window: Window, q: int) -> np.ndarray:
    """[C_m(N)]^q, evaluated through the spectral decomposition of N.

    Acts as the identity on the zero-violation sector and with magnitude at
    most (1/3)^q on every violating sector.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    n_op = violation_operator(window)
    work, _ = as_working_dtype(n_op)
    vals, vecs = np.linalg.eigh(work)
    poly = window_polynomial(window.m)
    scaled = poly(vals) ** q
    return (vecs * scaled) @ dagger(vecs)


def hat_a(chain: ProjectorChain, window: Window, q: int,
          layers: LayerOperators | None = None) -> np.ndarray:
    """Diluted two-layer operator: [C_m(N)]^q * Pi_rest * Pi_other-layer."""
    if layers is None:
        layers = layer_projectors(chain)
    member_set = set(window.members)
    rest_bonds = [b for b in layers.bonds(window.parity) if b not in member_set]
    if rest_bonds:
        pi_rest = layer_product(chain, rest_bonds)
    else:
        pi_rest = np.eye(chain.dim, dtype=np.complex128)
    other = "even" if window.parity == "odd" else "odd"
    pi_other = layers.layer(other)
    pi_hat = dilute_pi_m(window, q)
    a1, a2, a3, _ = as_working_dtype(pi_hat, pi_rest, pi_other)
    return a1 @ (a2 @ a3)


@dataclass
class AgspCertificate:
    """Measured and declared (D, Delta) data for one operator K = hat_A^l."""

    label: str
    q: int
    m: int
    l: int
    cut_position: int
    d0: int  # d^2, the per-crossing rank factor of one layer application
    ground_residual: float
    measured_delta: float | None = None
    measured_sr_growth: float | None = None
    theory_delta: float | None = None      # (delta0(eps) + (1/9)^q)^l
    theory_d_log2: float | None = None     # log2(D_I * hatD^l), window formulas
    plan_attached: bool = False
    d_source: str = "measured"
    delta_source: str = "measured"

    @property
    def certified_d(self) -> float:
        if self.d_source == "theory":
            return 2.0**self.theory_d_log2
        if self.measured_sr_growth is None:
            raise ValueError("no measured Schmidt-rank growth available")
        return self.measured_sr_growth

    @property
    def certified_delta(self) -> float:
        if self.delta_source == "theory":
            return self.theory_delta
        if self.measured_delta is None:
            raise ValueError("no measured shrink available")
        return self.measured_delta

    @property
    def product_ok(self) -> bool:
        return self.certified_d * self.certified_delta < 0.5

    def to_record(self) -> dict:
        try:
            cd = self.certified_d
            cdelta = self.certified_delta
            ok = self.product_ok
        except (ValueError, TypeError):
            cd = cdelta = ok = None
        return {
            "label": self.label,
            "q": self.q,
            "m": self.m,
            "l": self.l,
            "cut_position": self.cut_position,
            "d0": self.d0,
            "ground_residual": self.ground_residual,
            "measured_delta": self.measured_delta,
            "measured_sr_growth": self.measured_sr_growth,
            "theory_delta": self.theory_delta,
            "theory_d_log2": self.theory_d_log2,
            "plan_attached": self.plan_attached,
            "d_source": self.d_source,
            "delta_source": self.delta_source,
            "product_ok": ok,
            "certified_d": cd,
            "certified_delta": cdelta,
        }


def _repin(k: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Restore the exact block structure K = |O><O| + (1-P) K (1-P).

    The true operator fixes the ground state on both sides; accumulated
    floating error is projected away rather than left to drift.
    """
    k = k.astype(np.complex128, copy=False)
    ko = k @ omega
    k = k - np.outer(ko - omega, omega.conj())
    ok = dagger(k) @ omega
    k = k - np.outer(omega, (ok - omega).conj())
    return k


def build_k(chain: ProjectorChain, window: Window, q: int, l: int | None = None,
            spectral: SpectralData | None = None, probes=None,
            plan=None):
    """K = hat_A^l with its certificate.

    l defaults to ceil(log2 D_I) for D_I = (d^2)^m (capped at MAX_POWER).
    The power is taken by repeated multiplication; when spectral data is
    available the ground-state block is re-pinned whenever the residual
    drifts past REPIN_THRESHOLD.
    """
    d0 = chain.d**2
    if l is None:
        l = math.ceil(window.m * math.log2(d0))
    if l < 1:
        raise ValueError("l must be >= 1")
    if l > MAX_POWER:
        raise ValueError(f"l = {l} exceeds the power cap {MAX_POWER}")

    a_hat = hat_a(chain, window, q)
    omega = spectral.ground_state if spectral is not None else None
    k = a_hat
    for _ in range(l - 1):
        k = k @ a_hat
        if omega is not None:
            residual = float(np.linalg.norm(k @ omega - omega))
            if residual > REPIN_THRESHOLD:
                k = _repin(k, omega)

    measured_delta = None
    ground_residual = float("nan")
    if spectral is not None:
        report = shrink_factor(k, spectral, label=chain.label)
        measured_delta = report.measured_delta
        ground_residual = report.ground_residual

    measured_growth = None
    if probes is not None:
        measured_growth = measure_sr_growth(k, probes, window.cut).max_growth

    theory_delta = None
    if spectral is not None:
        theory_delta = (delta0(spectral.gap) + 9.0 ** (-q)) ** l

    # window formulas at coarse-graining level 1
    log2_d0 = math.log2(d0)
    j = q * math.ceil(math.sqrt(window.m))
    log2_d_i = window.m * log2_d0
    log2_d_hat = (math.log2(20.0) + 1.5 * math.log2(j)
                  + 0.5 * math.log2(j) ** 2 + (j / window.m) * log2_d0)
    theory_d_log2 = log2_d_i + l * log2_d_hat

    cert = AgspCertificate(
        label=chain.label,
        q=q,
        m=window.m,
        l=l,
        cut_position=window.cut.position,
        d0=d0,
        ground_residual=ground_residual,
        measured_delta=measured_delta,
        measured_sr_growth=measured_growth,
        theory_delta=theory_delta,
        theory_d_log2=theory_d_log2,
        plan_attached=plan is not None,
        d_source="theory" if plan is not None else "measured",
        delta_source="measured",
    )
    return k, cert


@dataclass
class SrGrowthReport:
    max_growth: float
    per_probe: list  # (rank_before, rank_after, growth)

    def __float__(self):
        return self.max_growth


def measure_sr_growth(k: np.ndarray, probes, cut: Cut) -> SrGrowthReport:
    """max over probes of SR(K phi) / SR(phi) at the cut.

    Probes the entangling factor from below: the worst case over all states
    can only be larger, and the certificate records it as such.
    """
    if len(probes) == 0:
        raise ValueError("need at least one probe state")
    rows = []
    for phi in probes:
        phi = np.asarray(phi, dtype=np.complex128)
        rank_before = schmidt_decompose(phi, cut, normalize=True).rank
        moved = k @ phi
        norm = float(np.linalg.norm(moved))
        if norm < 1e-14:
            raise ValueError("operator annihilates a probe state")
        rank_after = schmidt_decompose(moved / norm, cut).rank
        rows.append((rank_before, rank_after, rank_after / rank_before))
    return SrGrowthReport(
        max_growth=float(max(r[2] for r in rows)),
        per_probe=rows,
    )


@dataclass
class AmplificationStep:
    iteration: int
    mu: float
    rank_before: int
    rank_after: int
    state: np.ndarray | None = None


@dataclass
class AmplificationTrace:
    steps: list
    termination: str
    target: float

    @property
    def overlaps(self) -> list:
        return [s.mu for s in self.steps]

    @property
    def monotone(self) -> bool:
        mus = self.overlaps
        return all(b > a for a, b in zip(mus, mus[1:]))

    def to_rows(self) -> list:
        return [
            {"iteration": s.iteration, "mu": s.mu,
             "rank_before": s.rank_before, "rank_after": s.rank_after}
            for s in self.steps
        ]


def amplify(spectral: SpectralData, k: np.ndarray, certificate: AgspCertificate,
            initial, max_iters: int = 50, keep_states: bool = False,
            oracle: bool = True) -> AmplificationTrace:
    """Iteratively improve a product state's ground overlap.

    Each round applies K, normalizes, Schmidt-decomposes at the certified
    cut, and replaces the state by the Schmidt product pair of maximal
    ground overlap (with ``oracle=False``: the pair with the largest
    Schmidt value, which carries no guarantee).  Runs until the overlap
    reaches 1/sqrt(2 D) or ``max_iters``.

    While D * Delta <= 1/2 and the overlap is below target, a non-improving
    round contradicts the certificate and raises.
    """
    omega = spectral.ground_state
    cut = Cut(certificate.cut_position, spectral.n, spectral.d)
    d_factor = certificate.certified_d
    delta = certificate.certified_delta
    guarantee_active = d_factor * delta <= 0.5

    phi = np.asarray(initial, dtype=np.complex128)
    phi = phi / np.linalg.norm(phi)
    mu = abs(complex(np.vdot(omega, phi)))
    if mu < 1e-14:
        raise ValueError("initial state has zero overlap with the ground state")
    target = 1.0 / math.sqrt(2.0 * d_factor)

    steps = [AmplificationStep(0, mu, 1, 1, phi.copy() if keep_states else None)]
    termination = "max_iters"
    if mu >= target:
        termination = "reached_target"
        max_iters = 0

    omega_mat = omega.reshape(cut.left_dim, cut.right_dim)
    for it in range(1, max_iters + 1):
        rank_before = schmidt_decompose(phi, cut).rank
        moved = k @ phi
        norm = float(np.linalg.norm(moved))
        if norm < 1e-14:
            raise CertificateViolationError("K annihilated the iterate")
        v = moved / norm
        decomp = schmidt_decompose(v, cut)
        # overlap of each Schmidt product pair with the ground state
        cross = decomp.left_vectors.T @ omega_mat.conj() @ decomp.right_vectors
        pair_overlaps = np.abs(np.diagonal(cross))
        if oracle:
            best = int(np.argmax(pair_overlaps))
        else:
            best = 0  # largest Schmidt value
        mu_new = float(pair_overlaps[best])
        phi_new = np.kron(decomp.left_vectors[:, best], decomp.right_vectors[:, best])

        if guarantee_active and mu < target and mu_new <= mu:
            raise CertificateViolationError(
                f"overlap failed to increase at iteration {it} "
                f"(mu {mu:.6f} -> {mu_new:.6f}) although D*Delta = "
                f"{d_factor * delta:.4f} <= 1/2"
            )
        phi, mu = phi_new, mu_new
        steps.append(AmplificationStep(
            it, mu, rank_before, decomp.rank,
            phi.copy() if keep_states else None,
        ))
        if mu >= target:
            termination = "reached_target"
            break
    return AmplificationTrace(steps=steps, termination=termination, target=target)


# ---------------------------------------------------------------------------
# explicit entropy and tail bounds


@dataclass
class EntropyBoundReport:
    mu: float
    d_factor: float
    delta: float
    rescale_power: int
    l0_raw: int
    head_raw: float
    tail_raw: float
    raw_bound: float
    l0: int
    head: float
    tail: float
    bound: float  # the rescaled bound, in bits

    def to_record(self) -> dict:
        return {
            "mu": self.mu, "d_factor": self.d_factor, "delta": self.delta,
            "rescale_power": self.rescale_power,
            "raw_bound": self.raw_bound, "bound": self.bound,
            "l0": self.l0, "head": self.head, "tail": self.tail,
        }


def _bound_parts(mu: float, d_factor: float, delta: float):
    """Head and tail of the explicit step-distribution entropy bound."""
    log_d = math.log2(d_factor)
    a = -2.0 * math.log2(mu)  # log2(1/mu^2)
    if delta == 0.0:
        l0 = 0 if a == 0.0 else 1
        tail = 0.0
    else:
        y = -math.log2(delta)
        l0 = math.ceil(a / y)
        tail = delta / (1.0 - delta) ** 2 * math.log2(d_factor**4 / delta)
    head = 2.0 * (l0 + 1) * log_d
    return l0, head, tail


def entropy_bound_report(mu: float, d_factor: float, delta: float) -> EntropyBoundReport:
    """Explicit entropy bound from an overlap-mu product state and a
    (D, Delta) operator.

    The tail beyond rank D^l carries squared mass at most Delta^l / mu^2;
    spreading each slab uniformly bounds its entropy contribution, and the
    geometric series closes to head + tail terms.  Before evaluating, the
    operator is powered up so its shrink lands in [1/4, 1/2] (for shrink
    below 1/4 a single application is already in the summable regime); both
    the raw and the rescaled evaluations are reported.
    """
    if not 0.0 < mu <= 1.0 + 1e-12:
        raise ValueError("mu must lie in (0, 1]")
    mu = min(mu, 1.0)
    if d_factor < 2.0:
        raise ValueError("the Schmidt-rank factor must be >= 2")
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")

    l0_raw, head_raw, tail_raw = _bound_parts(mu, d_factor, delta)
    if delta == 0.0:
        k = 1
    else:
        k = max(1, math.ceil(1.0 / (-math.log2(delta))))
    l0, head, tail = _bound_parts(mu, d_factor**k, delta**k)
    return EntropyBoundReport(
        mu=mu, d_factor=d_factor, delta=delta, rescale_power=k,
        l0_raw=l0_raw, head_raw=head_raw, tail_raw=tail_raw,
        raw_bound=head_raw + tail_raw,
        l0=l0, head=head, tail=tail, bound=head + tail,
    )


def entropy_bound(mu: float, d_factor: float, delta: float) -> float:
    """The rescaled explicit entropy bound, in bits."""
    return entropy_bound_report(mu, d_factor, delta).bound


@dataclass
class TailBoundRow:
    l: int
    rank_cutoff: int
    tail_mass: float
    bound_inverse_mu: float  # Delta^l / mu^2
    bound_2d: float          # 2 D Delta^l
    passed: bool

    def to_row(self) -> dict:
        return {
            "l": self.l, "rank_cutoff": self.rank_cutoff,
            "tail_mass": self.tail_mass,
            "bound_delta_over_mu2": self.bound_inverse_mu,
            "bound_2d_delta": self.bound_2d, "pass": self.passed,
        }


@dataclass
class TailBoundReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def tail_bound_check(spectral: SpectralData, cut: Cut,
                     certificate: AgspCertificate, mu: float,
                     l_range) -> TailBoundReport:
    """Compare the ground state's measured Schmidt tails against
    Delta^l / mu^2 and 2 D Delta^l for each l in range."""
    decomp = schmidt_decompose(spectral.ground_state, cut)
    d_factor = certificate.certified_d
    delta = certificate.certified_delta
    rows = []
    for l in l_range:
        cutoff = math.ceil(d_factor**l)
        tail = float(np.sum(decomp.values[cutoff:] ** 2))
        b1 = delta**l / mu**2
        b2 = 2.0 * d_factor * delta**l
        rows.append(TailBoundRow(
            l=l, rank_cutoff=cutoff, tail_mass=tail,
            bound_inverse_mu=b1, bound_2d=b2,
            passed=(tail <= b1 + 1e-9) and (tail <= b2 + 1e-9),
        ))
    return TailBoundReport(rows=rows)
