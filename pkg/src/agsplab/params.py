"""Parameter plans: solve the coupled inequalities that make the diluted
operator's rank growth lose to its shrink factor.

Everything is driven by the dimensionless combination X = log2(d) / eps.
A plan fixes (q, k, m, j) so that, after k-fold coarse-graining and q
window-polynomial powers,

    hatD * hatDelta <= 1/2   and   D * Delta < 1/2

with D = D_I * hatD^l0, Delta = hatDelta^l0, l0 = ceil(log2 D_I).
All logarithms are base 2 and every inequality side is evaluated at 120-bit
precision; the planned magnitudes are astronomically beyond simulation
scale, so only their base-2 logarithms are materialized.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath

PRECISION_BITS = 120
EPSILON_MAX = 10.0
SLACK = 1e-9
_LOG2_80 = math.log2(80.0)


class PlanInvariantError(ArithmeticError):
    """A produced plan violates one of its defining inequalities."""


def _log2(x):
    return mpmath.log(x, 2)


def _clamp_epsilon(epsilon: float) -> float:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if epsilon > EPSILON_MAX:
        warnings.warn(
            f"epsilon = {epsilon} clamped to {EPSILON_MAX}; the k-vs-q demand "
            "is only derived below that, and a smaller epsilon only weakens "
            "the shrink factor",
            stacklevel=3,
        )
        return EPSILON_MAX
    return epsilon


def solve_q(x: float, q_max: int = 200000) -> int:
    """Smallest positive integer q with
    1.5*log2(j) + 0.5*log2(j)^2 - q <= -log2(80) for j = 20*X*q^2."""
    if x <= 0:
        raise ValueError("X must be positive")
    with mpmath.workprec(PRECISION_BITS):
        xm = mpmath.mpf(x)
        for q in range(1, q_max + 1):
            lj = _log2(20 * xm * q * q)
            if 1.5 * lj + 0.5 * lj * lj - q <= -_LOG2_80:
                return q
    raise ArithmeticError(f"no q <= {q_max} satisfies the dilution inequality")


def solve_q_2d(x: float, boundary: int, q_max: int = 200000) -> int:
    """2D analogue: j = q * ((1/2)log2(I) + 20*X*q) * I."""
    if boundary < 1:
        raise ValueError("boundary length must be >= 1")
    with mpmath.workprec(PRECISION_BITS):
        xm = mpmath.mpf(x)
        li = _log2(boundary)
        for q in range(1, q_max + 1):
            j = q * (li / 2 + 20 * xm * q) * boundary
            lj = _log2(j)
            if 1.5 * lj + 0.5 * lj * lj - q <= -_LOG2_80:
                return q
    raise ArithmeticError(f"no q <= {q_max} satisfies the 2D dilution inequality")


@dataclass
class ParameterPlan:
    """Solved parameter tuple plus the base-2 logs of the derived bounds."""

    x: float
    epsilon: float
    d: int
    q: int
    k: int
    m: int
    sqrt_m: int
    j: int
    log2_d_i: float
    log2_d_hat: float
    log2_delta_hat: float
    log2_delta0: float
    l0: int
    log2_d_total: float
    boundary_i: int | None = None
    checks: dict = field(default_factory=dict)

    @property
    def log2_d_delta_product(self) -> float:
        """log2 of (D_I * hatD^l0) * (hatDelta^l0)."""
        return self.log2_d_i + self.l0 * (self.log2_d_hat + self.log2_delta_hat)

    @property
    def passed(self) -> bool:
        return all(entry["pass"] for entry in self.checks.values())

    def to_record(self) -> dict:
        return {
            "x": self.x,
            "epsilon": self.epsilon,
            "d": self.d,
            "q": self.q,
            "k": self.k,
            "m": self.m,
            "sqrt_m": self.sqrt_m,
            "j": self.j,
            "log2_d_i": self.log2_d_i,
            "log2_d_hat": self.log2_d_hat,
            "log2_delta_hat": self.log2_delta_hat,
            "log2_delta0": self.log2_delta0,
            "l0": self.l0,
            "log2_d_total": self.log2_d_total,
            "log2_d_delta_product": self.log2_d_delta_product,
            "boundary_i": self.boundary_i,
            "checks": self.checks,
            "pass": self.passed,
        }


def _check(checks: dict, name: str, lhs, rhs, strict: bool = False):
    ok = (lhs < rhs) if strict else (lhs <= rhs)
    checks[name] = {"lhs": float(lhs), "rhs": float(rhs), "pass": bool(ok)}
    return ok


def _evaluate_plan(x, epsilon, d, q, k, sqrt_m, m, j, boundary=None) -> ParameterPlan:
    """Populate every derived quantity and inequality at 120-bit precision."""
    with mpmath.workprec(PRECISION_BITS):
        xm = mpmath.mpf(x)
        log2_d0 = 2 * _log2(d)
        delta0 = mpmath.power(epsilon / mpmath.mpf(2) + 1, mpmath.mpf(-2) / 3)
        log2_delta0 = _log2(delta0)
        lj = _log2(j)

        if boundary is None:
            log2_d_i = k * m * log2_d0
            rank_exponent = mpmath.mpf(k) * j / m * log2_d0
            middle_term = 40 * xm * q * mpmath.mpf(j) / m
        else:
            log2_d_i = k * m * boundary * log2_d0
            rank_exponent = mpmath.mpf(j) / m * (_log2(boundary) + k * log2_d0)
            middle_term = (_log2(boundary) + 40 * xm * q) * mpmath.mpf(j) / m

        log2_d_hat = _log2(20) + 1.5 * lj + 0.5 * lj * lj + rank_exponent
        log2_delta_hat = _log2(mpmath.power(delta0, k) + mpmath.power(9, -q))
        l0 = int(mpmath.ceil(log2_d_i))
        log2_d_total = log2_d_i + l0 * log2_d_hat

        checks: dict = {}
        _check(checks, "delta0_pow_k_le_eighth_pow_q",
               k * log2_delta0, -3 * q)
        _check(checks, "window_demand_le_2q", middle_term, 2 * q + SLACK)
        _check(checks, "log_inequality",
               1.5 * lj + 0.5 * lj * lj + middle_term - 3 * q, -_LOG2_80)
        _check(checks, "dhat_deltahat_le_half",
               log2_d_hat + log2_delta_hat, -1)
        _check(checks, "d_delta_lt_half",
               log2_d_i + l0 * (log2_d_hat + log2_delta_hat), -1, strict=True)

        return ParameterPlan(
            x=float(xm),
            epsilon=float(epsilon),
            d=d,
            q=q,
            k=k,
            m=m,
            sqrt_m=sqrt_m,
            j=j,
            log2_d_i=float(log2_d_i),
            log2_d_hat=float(log2_d_hat),
            log2_delta_hat=float(log2_delta_hat),
            log2_delta0=float(log2_delta0),
            l0=l0,
            log2_d_total=float(log2_d_total),
            boundary_i=boundary,
            checks=checks,
        )


def plan_1d(epsilon: float, d: int) -> ParameterPlan:
    """Solve the 1D parameter arithmetic for gap epsilon and local dim d.

    m is the square of ceil(20*q*X), so sqrt(m) is exact and j = q*sqrt(m)
    is an integer; rounding m up only loosens the inequalities it enters.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    epsilon = _clamp_epsilon(epsilon)
    with mpmath.workprec(PRECISION_BITS):
        x = mpmath.log(d, 2) / epsilon
        q = solve_q(float(x))
        k = int(mpmath.ceil(20 * mpmath.mpf(q) / epsilon))
        sqrt_m = int(mpmath.ceil(20 * q * x))
        m = sqrt_m * sqrt_m
        j = q * sqrt_m
        plan = _evaluate_plan(x, epsilon, d, q, k, sqrt_m, m, j)
    if not plan.passed:
        failed = [name for name, c in plan.checks.items() if not c["pass"]]
        raise PlanInvariantError(f"1D plan violates {failed}")
    return plan


def plan_2d(epsilon: float, d: int, boundary: int) -> ParameterPlan:
    """2D variant: the window spans boundary-length columns, so the degree
    grows with sqrt(m * I) and the rank penalty per crossing picks up a
    factor of the boundary length."""
    if boundary < 1:
        raise ValueError("boundary length must be >= 1")
    if d < 2:
        raise ValueError("d must be >= 2")
    epsilon = _clamp_epsilon(epsilon)
    with mpmath.workprec(PRECISION_BITS):
        x = mpmath.log(d, 2) / epsilon
        q = solve_q_2d(float(x), boundary)
        k = int(mpmath.ceil(20 * mpmath.mpf(q) / epsilon))
        c = _log2(boundary) / 2 + 20 * x * q
        c_int = int(mpmath.ceil(c))
        m = c_int * c_int * boundary
        j = q * c_int * boundary  # q * sqrt(m * I)
        plan = _evaluate_plan(x, epsilon, d, q, k, c_int, m, j, boundary=boundary)
    if not plan.passed:
        failed = [name for name, c in plan.checks.items() if not c["pass"]]
        raise PlanInvariantError(f"2D plan violates {failed}")
    return plan


def verify_plan(plan: ParameterPlan) -> dict:
    """Re-derive every inequality from the plan's integer fields.

    Returns a dict name -> {lhs, rhs, pass}; tampered or truncated plans
    fail here even if their stored check table claims otherwise.
    """
    redone = _evaluate_plan(
        plan.x, plan.epsilon, plan.d, plan.q, plan.k, plan.sqrt_m, plan.m,
        plan.j, boundary=plan.boundary_i,
    )
    checks = dict(redone.checks)
    # consistency of the stored derived quantities with the re-derivation
    for name, stored, fresh in [
        ("stored_log2_d_hat", plan.log2_d_hat, redone.log2_d_hat),
        ("stored_log2_delta_hat", plan.log2_delta_hat, redone.log2_delta_hat),
        ("stored_log2_d_total", plan.log2_d_total, redone.log2_d_total),
    ]:
        scale = max(1.0, abs(fresh))
        checks[name] = {
            "lhs": stored,
            "rhs": fresh,
            "pass": abs(stored - fresh) <= 1e-9 * scale,
        }
    checks["stored_l0"] = {
        "lhs": plan.l0,
        "rhs": redone.l0,
        "pass": plan.l0 == redone.l0,
    }
    return checks


def headline_ratio(plan: ParameterPlan) -> float:
    """log2(D_total) normalized by X^3 * log2(X)^8, with the log factor
    floored at 1 so the X = 1 grid point stays finite."""
    x = plan.x
    if plan.boundary_i is None:
        denom = x**3 * max(1.0, math.log2(x)) ** 8
    else:
        ix = plan.boundary_i * x
        denom = plan.boundary_i**2 * x**3 * max(1.0, math.log2(ix)) ** 8
    return plan.log2_d_total / denom
