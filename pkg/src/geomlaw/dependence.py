"""Pairwise correlations (general and exchangeable closed forms, plus the
extremal-coupling double sums) and multivariate right-tail-increasing
verdicts, with a brute-force oracle over the defining conditional
monotonicity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import tolerances
from .bitsets import validate_dim
from .errors import ValidationError
from .exchangeable import (
    ExchangeableSeq,
    SeqRole,
    a_from_p,
    b_from_a,
    beta_from_ptilde,
    is_exchangeable,
    survival_exch_narrow,
    survival_exch_wide,
)
from .sequences import check_M
from .shock import NarrowParams, WideParams, survival_narrow, survival_wide

_SERIES_REL_TOL = 1e-15  # summand cutoff relative to the running value
_SERIES_CAP = 5_000_000


def corr_narrow(params: NarrowParams, n: int, m: int) -> float:
    """Correlation of components n and m of a narrow (shock) model:
    sqrt(prod over one-sided shocks) * (1 - prod over joint shocks) divided
    by (1 - prod over all shocks touching either); always nonnegative."""
    if n == m:
        raise ValidationError("index-equal", "correlation of a component with itself is 1 by definition")
    d = params.d
    one_sided = joint = either = 1.0
    for mask in range(1, 1 << d):
        has_n, has_m = mask >> n & 1, mask >> m & 1
        p = float(params.p[mask])
        if has_n and has_m:
            joint *= p
            either *= p
        elif has_n or has_m:
            one_sided *= p
            either *= p
    return math.sqrt(one_sided) * (1.0 - joint) / (1.0 - either)


def corr_wide(params: WideParams, n: int, m: int) -> float:
    """Correlation of components n and m of a wide (trials) model, in terms
    of the one-step survivals A = P(tau_n > 1), B = P(tau_m > 1) and
    C = P(tau_n > 1, tau_m > 1): (C - AB) / ((1 - C) sqrt(AB))."""
    if n == m:
        raise ValidationError("index-equal", "correlation of a component with itself is 1 by definition")
    a = b = c = 0.0
    for mask in range(1 << params.d):
        pt = float(params.ptilde[mask])
        miss_n, miss_m = not (mask >> n & 1), not (mask >> m & 1)
        if miss_n:
            a += pt
        if miss_m:
            b += pt
        if miss_n and miss_m:
            c += pt
    if a == 0.0 or b == 0.0:
        raise ValidationError("degenerate-component", "a component equal to 1 almost surely has no correlation")
    return (c - a * b) / ((1.0 - c) * math.sqrt(a * b))


def corr_exchangeable(seq: ExchangeableSeq) -> float:
    """(v_2 - v_1^2) / (v_1 (1 - v_2)) for a leading-1 b or beta sequence;
    the same expression serves both families."""
    if seq.role not in (SeqRole.B_SEQ, SeqRole.BETA_SEQ):
        raise ValidationError("role-mismatch", "exchangeable correlation expects a b or beta sequence")
    if seq.d < 2:
        raise ValidationError("too-short", "pairwise correlation needs dimension >= 2")
    v1, v2 = seq.values[1], seq.values[2]
    if v1 == 0.0:
        raise ValidationError("degenerate-component", "components equal to 1 almost surely have no correlation")
    return (v2 - v1 * v1) / (v1 * (1.0 - v2))


def _check_unit_interval(**named: float) -> None:
    for name, v in named.items():
        if not (0.0 < v < 1.0):
            raise ValidationError("out-of-range", f"{name} must lie in (0,1), got {v}")


def corr_frechet_lower(p1: float, p2: float) -> float:
    """Correlation of two geometric lifetimes (survival parameters p1, p2)
    coupled by the countermonotone (lower extremal) copula.

    When p1 + p2 <= 1 the double sum collapses and the value is
    -sqrt(p1 p2); otherwise rows of the double sum are evaluated in closed
    form and the row series is truncated adaptively (total truncation error
    below 1e-12)."""
    _check_unit_interval(p1=p1, p2=p2)
    if p1 + p2 <= 1.0:
        return -math.sqrt(p1 * p2)
    # E[t1 t2] = sum_{i,j >= 0} max(0, p1^i + p2^j - 1)
    total = 1.0 / (1.0 - p2)  # the i = 0 row
    i = 1
    while i < _SERIES_CAP:
        pi = p1**i
        top = math.ceil(math.log1p(-pi) / math.log(p2)) - 1  # largest j with p2^j > 1 - p1^i
        row = (top + 1) * (pi - 1.0) + (1.0 - p2 ** (top + 1)) / (1.0 - p2)
        total += row
        if row < _SERIES_REL_TOL * total:
            break
        i += 1
    cov_term = total - 1.0 / ((1.0 - p1) * (1.0 - p2))
    return (1.0 - p1) * (1.0 - p2) / math.sqrt(p1 * p2) * cov_term


def corr_frechet_upper(pn: float, pm: float) -> float:
    """Correlation of two geometric lifetimes under the comonotone (upper
    extremal) copula; 1 exactly when the parameters agree."""
    _check_unit_interval(pn=pn, pm=pm)
    # E[t1 t2] = sum_{i,j >= 0} min(pn^i, pm^j), rows in closed form
    ratio = math.log(pn) / math.log(pm)
    total = 0.0
    i = 0
    while i < _SERIES_CAP:
        pi = pn**i
        top = math.floor(i * ratio + 1e-12)  # largest j with pm^j >= pn^i
        row = (top + 1) * pi + pm ** (top + 1) / (1.0 - pm)
        total += row
        if i > 0 and row < _SERIES_REL_TOL * total:
            break
        i += 1
    cov_term = total - 1.0 / ((1.0 - pn) * (1.0 - pm))
    return (1.0 - pn) * (1.0 - pm) / math.sqrt(pn * pm) * cov_term


@dataclass(frozen=True)
class MrtiVerdict:
    ok: bool
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "witness": self.witness}


def mrti_exchangeable(seq: ExchangeableSeq, tol: float | None = None) -> MrtiVerdict:
    """Right-tail-increasing verdict for an exchangeable model via the
    log-concavity run v_k^2 <= v_{k-1} v_{k+1}, k = 1..d-1 (b or beta
    sequence). Narrow rows pass automatically; the input must be a valid
    survival parameterization."""
    tol = tolerances.VALIDATION if tol is None else tol
    if seq.role not in (SeqRole.B_SEQ, SeqRole.BETA_SEQ):
        raise ValidationError("role-mismatch", "expected a b or beta sequence")
    if not check_M(seq.values, tol).ok:
        raise ValidationError("not-a-survival", "sequence does not define a survival function")
    v = seq.values
    for k in range(1, seq.d):
        lhs, rhs = v[k] * v[k], v[k - 1] * v[k + 1]
        if lhs > rhs + tol:
            return MrtiVerdict(False, {"k": k, "lhs": lhs, "rhs": rhs})
    return MrtiVerdict(True)


def mrti_bruteforce(
    survival: Callable,
    d: int,
    grid_max: int,
    tol: float | None = None,
) -> MrtiVerdict:
    """Exhaustive check of the defining property: for every permutation pi
    and every i, P(tau_pi(i) > n_i | tau_pi(1) > n_1, ..., tau_pi(i-1) >
    n_{i-1}) must be nondecreasing in each conditioning threshold.
    Zero-probability conditioning events are vacuous and skipped."""
    tol = tolerances.ORACLE if tol is None else tol
    validate_dim(d)
    if d > 4 or grid_max > 4:
        raise ValidationError("too-large", "brute force is limited to d <= 4 and grid_max <= 4")

    cache: dict[tuple[int, ...], float] = {}

    def sv(vec: np.ndarray) -> float:
        key = tuple(int(x) for x in vec)
        if key not in cache:
            cache[key] = float(survival(np.asarray(key, dtype=np.int64)))
        return cache[key]

    def conditional(perm: Sequence[int], levels: Sequence[int]) -> float | None:
        i = len(levels)
        vec = np.zeros(d, dtype=np.int64)
        for j in range(i):
            vec[perm[j]] = levels[j]
        num = sv(vec)
        vec[perm[i - 1]] = 0
        den = sv(vec)
        if den == 0.0:
            return None
        return num / den

    grid = range(grid_max + 1)
    for perm in itertools.permutations(range(d)):
        for i in range(2, d + 1):
            for levels in itertools.product(grid, repeat=i):
                base = conditional(perm, levels)
                if base is None:
                    continue
                for j in range(i - 1):
                    if levels[j] == grid_max:
                        continue
                    bumped = list(levels)
                    bumped[j] += 1
                    higher = conditional(perm, bumped)
                    if higher is not None and higher < base - tol:
                        return MrtiVerdict(
                            False,
                            {
                                "permutation": list(perm),
                                "i": i,
                                "levels": list(levels),
                                "bumped_index": j,
                                "conditional": base,
                                "conditional_after_bump": higher,
                            },
                        )
    return MrtiVerdict(True)


@dataclass(frozen=True)
class DependenceReport:
    corr: list[list[float]]
    mrti: bool | None
    mrti_witness: dict | None
    family_notes: list[str]

    def to_dict(self) -> dict:
        return {
            "corr": self.corr,
            "mrti": self.mrti,
            "mrti_witness": self.mrti_witness,
            "family_notes": self.family_notes,
        }


def dependence_report(params: NarrowParams | WideParams, grid_max: int = 3) -> DependenceReport:
    """Pairwise correlation matrix plus an MRTI verdict: through the
    exchangeable criterion when the parameters collapse, through the
    brute-force definition when feasible (d <= 4), otherwise left open."""
    d = params.d
    narrow = isinstance(params, NarrowParams)
    pair = corr_narrow if narrow else corr_wide
    corr = [[1.0] * d for _ in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            corr[i][j] = corr[j][i] = pair(params, i, j)

    notes = [f"family={'narrow' if narrow else 'wide'}"]
    exch, row = is_exchangeable(params)
    mrti: bool | None = None
    witness = None
    if exch:
        notes.append("exchangeable")
        seq = b_from_a(a_from_p(row)) if narrow else beta_from_ptilde(row)
        verdict = mrti_exchangeable(seq)
        mrti, witness = verdict.ok, verdict.witness
        notes.append("mrti-criterion=log-concavity")
    elif d <= 4 and grid_max <= 4:
        surv = (lambda v: survival_narrow(params, v)) if narrow else (lambda v: survival_wide(params, v))
        verdict = mrti_bruteforce(surv, d, grid_max)
        mrti, witness = verdict.ok, verdict.witness
        notes.append(f"mrti-criterion=bruteforce(grid_max={grid_max})")
    else:
        notes.append("mrti-criterion=not-computed")
    return DependenceReport(corr=corr, mrti=mrti, mrti_witness=witness, family_notes=notes)


def survival_of_exchangeable(seq: ExchangeableSeq) -> Callable:
    """Batch-capable survival evaluator for a leading-1 parameter row."""
    if seq.role is SeqRole.B_SEQ:
        return lambda n: survival_exch_narrow(seq, n)
    if seq.role is SeqRole.BETA_SEQ:
        return lambda n: survival_exch_wide(seq, n)
    raise ValidationError("role-mismatch", "expected a b or beta sequence")
