"""Exact counting arithmetic for the min-entangling decomposition.

Powers of the diluted window operator expand into sums of operators whose
entangling action concentrates on one cut.  The number of terms produced by
the recursive halving argument is, per layer,

    4 * (j + 1) * (j/2 + 1) * (j/4 + 1) * ... * (1 + 1)

for a degree-j polynomial, and the proof bounds the variant with an extra
(j + 1) factor by the closed form 20 * j^(3/2) * 2^(log2(j)^2 / 2).

For j not a power of two the displayed product assumes exact halving.  We
generalize downward (floor factors, stopping at 1) for the closed-form
comparison, which keeps the inequality true for every j; the conservative
upper bound on the term count uses ceiling factors instead and is reported
separately, because with ceilings the closed form is violated already at
j = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product

import mpmath

CLOSED_FORM_PRECISION_BITS = 120
_FLOAT_MARGIN = 1e-6


def halving_factors(j: int, rounding: str = "floor") -> list:
    """Factors (j/2^t + 1) from repeatedly halving j down to 1.

    floor: t runs to floor(log2 j), the last factor is (1 + 1) = 2.
    ceil:  every intermediate value is rounded up (a larger product,
           one extra round when j is not a power of two).
    For j = 1 the list is empty: the leading (j + 1) factor of the count
    already is the terminal (1 + 1).
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    if rounding not in ("floor", "ceil"):
        raise ValueError("rounding must be 'floor' or 'ceil'")
    factors = []
    v = j
    while v > 1:
        v = (v + 1) // 2 if rounding == "ceil" else v // 2
        factors.append(v + 1)
    return factors


def closed_form_per_layer(j: int):
    """20 * j^(3/2) * 2^(log2(j)^2 / 2) at 120-bit precision."""
    with mpmath.workprec(CLOSED_FORM_PRECISION_BITS):
        lj = mpmath.log(j, 2)
        return 20 * mpmath.power(j, mpmath.mpf(3) / 2) * mpmath.power(2, lj * lj / 2)


@dataclass
class CountBound:
    """Exact term-count bounds for the degree-j, l-layer expansion."""

    j: int
    l: int
    per_layer_count: int          # 4 (j+1) * ceil-halving product (conservative)
    per_layer_floor: int          # 4 (j+1) * floor-halving product
    per_layer_proof_form: int     # 4 (j+1)^2 * floor-halving product
    terms_bound: int              # per_layer_count ** l
    closed_form_per_layer: float
    exact_halving: bool           # j is a power of two: floor == ceil == exact
    count_within_closed_form: bool
    proof_form_within_closed_form: bool

    def to_row(self) -> dict:
        return {
            "j": self.j,
            "product": self.per_layer_proof_form,
            "closed_form": self.closed_form_per_layer,
            "ratio": self.per_layer_proof_form / self.closed_form_per_layer,
            "pass": self.proof_form_within_closed_form,
        }


def _leq_closed_form(value: int, j: int) -> bool:
    """value <= closed_form(j), float fast path with an exact-precision
    recheck when the margin is thin."""
    log_closed = math.log2(20.0) + 1.5 * math.log2(j) + 0.5 * math.log2(j) ** 2
    log_value = math.log2(value)
    if log_value <= log_closed - _FLOAT_MARGIN:
        return True
    if log_value >= log_closed + _FLOAT_MARGIN:
        return False
    with mpmath.workprec(CLOSED_FORM_PRECISION_BITS):
        return mpmath.mpf(value) <= closed_form_per_layer(j)


def min_entangling_count(j: int, l: int) -> CountBound:
    if j < 1 or l < 1:
        raise ValueError("j and l must be >= 1")
    ceil_prod = math.prod(halving_factors(j, "ceil"))
    floor_prod = math.prod(halving_factors(j, "floor"))
    per_layer_count = 4 * (j + 1) * ceil_prod
    per_layer_floor = 4 * (j + 1) * floor_prod
    per_layer_proof = 4 * (j + 1) ** 2 * floor_prod
    return CountBound(
        j=j,
        l=l,
        per_layer_count=per_layer_count,
        per_layer_floor=per_layer_floor,
        per_layer_proof_form=per_layer_proof,
        terms_bound=per_layer_count**l,
        closed_form_per_layer=float(closed_form_per_layer(j)),
        exact_halving=(j & (j - 1)) == 0,
        count_within_closed_form=_leq_closed_form(per_layer_count, j),
        proof_form_within_closed_form=_leq_closed_form(per_layer_proof, j),
    )


def sweep_halving_bound(j_max: int, j_min: int = 2):
    """Check both per-layer products against the closed form for every j in
    [j_min, j_max].  Returns (all_pass, failures) with failures a list of
    (j, per_layer_count, per_layer_proof_form)."""
    failures = []
    for j in range(j_min, j_max + 1):
        ceil_prod = math.prod(halving_factors(j, "ceil"))
        floor_prod = math.prod(halving_factors(j, "floor"))
        count = 4 * (j + 1) * ceil_prod
        proof = 4 * (j + 1) ** 2 * floor_prod
        if not (_leq_closed_form(count, j) and _leq_closed_form(proof, j)):
            failures.append((j, count, proof))
    return not failures, failures


def constrained_product_max(l: int, budget: int):
    """Exhaustive maximum of prod(n_i + 1) over nonnegative integer tuples
    of length l with sum <= budget.  Returns (max value, one maximizer)."""
    if l < 1 or l > 6:
        raise ValueError("l must be in 1..6 (brute-force range)")
    if budget < 0 or budget > 24:
        raise ValueError("budget must be in 0..24 (brute-force range)")
    best_value = 0
    best_tuple = None
    stack = [((), budget)]
    while stack:
        prefix, remaining = stack.pop()
        if len(prefix) == l:
            value = math.prod(x + 1 for x in prefix)
            # deterministic tie-break: first maximizer in lexicographic order
            if value > best_value or (value == best_value and
                                      (best_tuple is None or prefix < best_tuple)):
                best_value = value
                best_tuple = prefix
            continue
        for x in range(remaining, -1, -1):
            stack.append((prefix + (x,), remaining - x))
    return best_value, best_tuple


@dataclass
class SplitCheckReport:
    j: int
    l: int
    n_terms: int
    expected_terms: int
    max_min_degree: int
    degree_budget: float  # j * l / 2
    coefficient_sum: int
    expected_coefficient_sum: int

    @property
    def passed(self) -> bool:
        return (
            self.n_terms == self.expected_terms
            and self.max_min_degree <= self.degree_budget
            and self.coefficient_sum == self.expected_coefficient_sum
        )


def symbolic_split_check(j: int, l: int) -> SplitCheckReport:
    """Expand the l-layer product of (L + R)^j over formal noncommuting
    layer symbols and verify the term count (j+1)^l and the degree property:
    every term has min(total L-degree, total R-degree) <= j*l/2."""
    if j < 0 or j > 6:
        raise ValueError("j must be in 0..6 (symbolic range)")
    if l < 1 or l > 3:
        raise ValueError("l must be in 1..3 (symbolic range)")
    n_terms = 0
    coeff_sum = 0
    max_min_degree = 0
    for powers in iter_product(range(j + 1), repeat=l):
        n_terms += 1
        coeff_sum += math.prod(math.comb(j, i) for i in powers)
        r_degree = sum(powers)
        l_degree = j * l - r_degree
        max_min_degree = max(max_min_degree, min(l_degree, r_degree))
    return SplitCheckReport(
        j=j,
        l=l,
        n_terms=n_terms,
        expected_terms=(j + 1) ** l,
        max_min_degree=max_min_degree,
        degree_budget=j * l / 2.0,
        coefficient_sum=coeff_sum,
        expected_coefficient_sum=2 ** (j * l),
    )
