"""General (non-exchangeable) narrow- and wide-sense multivariate geometric
distributions: parameter validation, exact survival evaluation, probability
masses by inclusion-exclusion, the memoryless identity check, and the
parameter bridges between the two families.

Model summary. Both families describe vectors (tau_1, ..., tau_d) of
positive integer lifetimes parameterized by subsets I of {0, ..., d-1}
(encoded as bit masks):

* narrow sense: independent shocks E_I ~ Geo(1 - p_I) hit all components
  in I at once and tau_k is the earliest shock covering k; the joint
  survival is prod_I p_I^(max_{i in I} n_i).
* wide sense: i.i.d. categorical trials produce one outcome set I per
  round with probability pt_I, and tau_k is the first round whose outcome
  contains k; the joint survival is an order-statistics product of partial
  sums of pt.

Every narrow model is also a wide model (see ``wide_from_narrow``); the
converse holds in d = 2 exactly for nonnegatively correlated models
(``narrow_from_wide_2d``) and fails in general for d >= 3, where no
inversion is provided.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import tolerances
from .bitsets import full_mask, mask_to_indices, popcount, validate_dim
from .errors import GeomlawError, NotRepresentableError, ValidationError

SubsetParamMap = Mapping[int, float]


def _as_points(n, d: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(n, dtype=np.int64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != d:
        raise ValidationError("shape-mismatch", f"expected points of dimension {d}, got shape {pts.shape}")
    if (pts < 0).any():
        raise ValidationError("out-of-range", "survival arguments must be nonnegative integers")
    return pts, single


@dataclass(frozen=True)
class NarrowParams:
    """Validated narrow-sense parameters; ``p[mask]`` is the shock parameter
    of the nonempty subset ``mask`` (index 0 is unused and fixed to 1)."""

    d: int
    p: np.ndarray

    def value(self, mask: int) -> float:
        return float(self.p[mask])

    def as_map(self) -> dict[int, float]:
        return {mask: float(self.p[mask]) for mask in range(1, 1 << self.d)}

    def to_json_dict(self) -> dict:
        return {"family": "narrow", "d": self.d, "params": {str(m): v for m, v in self.as_map().items()}}


@dataclass(frozen=True)
class WideParams:
    """Validated wide-sense parameters; ``ptilde[mask]`` is the per-trial
    probability of outcome ``mask`` (all 2**d masks, the empty set included).
    The vector sums to one exactly (renormalized after validation)."""

    d: int
    ptilde: np.ndarray

    def value(self, mask: int) -> float:
        return float(self.ptilde[mask])

    def as_map(self) -> dict[int, float]:
        return {mask: float(self.ptilde[mask]) for mask in range(1 << self.d)}

    def to_json_dict(self) -> dict:
        return {"family": "wide", "d": self.d, "params": {str(m): v for m, v in self.as_map().items()}}

    def subset_sums(self) -> np.ndarray:
        """z[m] = sum of ptilde over all subsets of m (zeta transform)."""
        z = self.ptilde.copy()
        for k in range(self.d):
            bit = 1 << k
            for m in range(1 << self.d):
                if m & bit:
                    z[m] += z[m ^ bit]
            # clip drift: partial sums of probabilities live in [0, 1]
        return np.clip(z, 0.0, 1.0)


def _collect(raw: SubsetParamMap, d: int, include_empty: bool, fill: float | None) -> np.ndarray:
    size = 1 << d
    lo = 0 if include_empty else 1
    for mask in raw:
        if not isinstance(mask, (int, np.integer)) or mask < lo or mask >= size:
            raise ValidationError("invalid-mask", f"mask {mask!r} is not a valid {'sub' if include_empty else 'nonempty sub'}set of dimension {d}")
    out = np.empty(size)
    out[0] = 1.0 if not include_empty else 0.0
    for mask in range(lo, size):
        if mask in raw:
            v = float(raw[mask])
        elif fill is not None:
            v = fill
        else:
            raise ValidationError("missing-key", f"no parameter for subset mask {mask}", mask=mask)
        if not (0.0 <= v <= 1.0):
            raise ValidationError("range-violation", f"parameter for mask {mask} is {v}, must lie in [0, 1]", mask=mask)
        out[mask] = v
    return out


def validate_narrow(raw: SubsetParamMap, d: int, fill_ones: bool = False) -> NarrowParams:
    """Check a narrow-sense parameter map: every nonempty subset keyed (or
    filled with the neutral value 1), values in [0,1], and every component's
    total survival factor prod_{I containing k} p_I strictly below 1."""
    validate_dim(d)
    p = _collect(raw, d, include_empty=False, fill=1.0 if fill_ones else None)
    for k in range(d):
        prod = 1.0
        for mask in range(1, 1 << d):
            if mask >> k & 1:
                prod *= p[mask]
        if not prod < 1.0:
            raise ValidationError(
                "degenerate-component",
                f"component {k} has infinite lifetime: product of its shock parameters is {prod}",
                component=k,
            )
    p.flags.writeable = False
    return NarrowParams(d=d, p=p)


def validate_wide(raw: SubsetParamMap, d: int, fill_zeros: bool = False) -> WideParams:
    """Check a wide-sense parameter map: all 2**d subsets keyed (or filled
    with 0), values in [0,1] summing to 1 within tolerance (then renormalized
    exactly), and sum_{I not containing k} pt_I < 1 for every component."""
    validate_dim(d)
    pt = _collect(raw, d, include_empty=True, fill=0.0 if fill_zeros else None)
    total = float(pt.sum())
    if abs(total - 1.0) > tolerances.VALIDATION:
        raise ValidationError("sum-not-one", f"outcome probabilities sum to {total}, must be 1")
    pt /= total
    for k in range(d):
        miss = float(pt[np.arange(1 << d) >> k & 1 == 0].sum())
        if not miss < 1.0:
            raise ValidationError(
                "degenerate-component",
                f"component {k} never appears in any positive-probability outcome",
                component=k,
            )
    pt.flags.writeable = False
    return WideParams(d=d, ptilde=pt)


def survival_narrow(params: NarrowParams, n) -> float | np.ndarray:
    """P(tau_1 > n_1, ..., tau_d > n_d) = prod_I p_I^(max_{i in I} n_i).

    Evaluated in the log domain (0**0 = 1; a zero parameter only forces a
    zero when its exponent is positive). ``n`` may be a single point or an
    (N, d) batch.
    """
    pts, single = _as_points(n, params.d)
    total = np.zeros(len(pts))
    dead = np.zeros(len(pts), dtype=bool)
    for mask in range(1, 1 << params.d):
        p = float(params.p[mask])
        m = pts[:, mask_to_indices(mask)].max(axis=1)
        if p == 0.0:
            dead |= m > 0
        elif p < 1.0:
            total += m * np.log(p)
    out = np.exp(total)
    out[dead] = 0.0
    return float(out[0]) if single else out


def _wide_factors(params: WideParams, pts: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Survival from a per-row sorting permutation (rows of ``perms`` must
    sort the rows of ``pts`` non-decreasingly)."""
    z = params.subset_sums()
    srt = np.take_along_axis(pts, perms, axis=1)
    expo = np.diff(srt, axis=1, prepend=0)
    bits = (1 << perms).astype(np.int64)
    acc = np.bitwise_or.accumulate(bits, axis=1)
    prefix = np.concatenate([np.zeros((len(pts), 1), dtype=np.int64), acc[:, :-1]], axis=1)
    factors = z[prefix]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expo > 0, expo * np.log(factors), 0.0)
    dead = ((factors == 0.0) & (expo > 0)).any(axis=1)
    out = np.exp(terms.sum(axis=1))
    out[dead] = 0.0
    return out


def survival_wide(params: WideParams, n) -> float | np.ndarray:
    """P(tau > n) as the order-statistics product: the k-th smallest entry
    contributes (sum of pt over outcomes missing all components whose entry
    is >= the k-th order statistic) ** (n_(k) - n_(k-1)).

    The value does not depend on how ties are broken (the tied factors are
    raised to zero exponents); the stable permutation is used.
    """
    pts, single = _as_points(n, params.d)
    perms = np.argsort(pts, axis=1, kind="stable")
    out = _wide_factors(params, pts, perms)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class PmfValue:
    """Inclusion-exclusion mass with rounding bookkeeping: ``raw`` is the
    alternating sum; tiny negative residue (>= -1e-10) is clamped to zero,
    anything more negative is a genuine rectangle-inequality violation and
    is passed through unclamped with ``violation`` set."""

    value: float
    raw: float
    clamped: bool
    violation: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "raw": self.raw, "clamped": self.clamped, "violation": self.violation}


def eval_survival(survival: Callable, pts: np.ndarray) -> np.ndarray:
    """Evaluate a survival function on an (N, d) batch, whether or not the
    callable is batch-aware."""
    try:
        out = np.asarray(survival(pts), dtype=float)
        if out.shape == (len(pts),):
            return out
    except Exception:
        pass
    return np.array([float(survival(row)) for row in pts])


def pmf(survival: Callable, n: Sequence[int], clamp_tol: float | None = None) -> PmfValue:
    """P(tau = n) = sum over corner sets S of (-1)^|S| * survival(n - 1 + 1_S)
    for n with all entries >= 1."""
    clamp_tol = tolerances.PMF_CLAMP if clamp_tol is None else clamp_tol
    nv = np.asarray(n, dtype=np.int64)
    d = nv.shape[-1]
    if nv.ndim != 1:
        raise ValidationError("shape-mismatch", "pmf takes a single point")
    if (nv < 1).any():
        raise ValidationError("out-of-range", "pmf arguments must be >= 1 (the support is positive integers)")
    corners = np.empty((1 << d, d), dtype=np.int64)
    signs = np.empty(1 << d)
    for mask in range(1 << d):
        ind = np.array([(mask >> k) & 1 for k in range(d)], dtype=np.int64)
        corners[mask] = nv - 1 + ind
        signs[mask] = -1.0 if popcount(mask) % 2 else 1.0
    raw = float(signs @ eval_survival(survival, corners))
    if raw >= 0.0:
        return PmfValue(raw, raw, clamped=False, violation=False)
    if raw >= -clamp_tol:
        return PmfValue(0.0, raw, clamped=True, violation=False)
    return PmfValue(raw, raw, clamped=False, violation=True)


@dataclass(frozen=True)
class LmCheckReport:
    passed: bool
    max_rel_violation: float
    trials: int
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_rel_violation": self.max_rel_violation,
            "trials": self.trials,
            "witness": self.witness,
        }


def check_lm_property(
    survival: Callable,
    d: int,
    trials: int,
    horizon: int,
    rng: np.random.Generator,
    tol: float | None = None,
) -> LmCheckReport:
    """Randomized test of the memoryless identity

        survival(n + m * 1_A) = survival(m * 1_A) * survival(n)

    over random index sets A, shifts m <= horizon, and points n supported on
    A. Both geometric families satisfy it exactly; the maximum relative
    violation over all trials is reported, with the worst tuple as witness.
    """
    tol = tolerances.VALIDATION if tol is None else tol
    validate_dim(d)
    ranks = np.argsort(rng.random((trials, d)), axis=1)
    sizes = rng.integers(1, d + 1, size=trials)
    in_a = ranks < sizes[:, None]
    m = rng.integers(0, horizon + 1, size=trials)
    base = rng.integers(0, horizon + 1, size=(trials, d)) * in_a
    shift = m[:, None] * in_a
    lhs = eval_survival(survival, base + shift)
    rhs = eval_survival(survival, shift) * eval_survival(survival, base)
    denom = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    rel = np.abs(lhs - rhs) / denom
    rel[(lhs == 0.0) & (rhs == 0.0)] = 0.0
    worst = int(np.argmax(rel))
    max_rel = float(rel[worst])
    witness = None
    if max_rel > tol:
        witness = {
            "indices": [int(i) for i in np.nonzero(in_a[worst])[0]],
            "m": int(m[worst]),
            "n": [int(v) for v in base[worst]],
            "lhs": float(lhs[worst]),
            "rhs": float(rhs[worst]),
        }
    return LmCheckReport(max_rel <= tol, max_rel, trials, witness)


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def wide_from_narrow(params: NarrowParams) -> WideParams:
    """Identify the trial-outcome probabilities of a narrow model:
    pt_I = P(tau_i > 1 for i outside I, tau_i = 1 for i in I), computed by
    inclusion-exclusion over the narrow survival at 0/1 arguments."""
    d = params.d
    size = 1 << d
    corners = np.array([[(m >> k) & 1 for k in range(d)] for m in range(size)], dtype=np.int64)
    surv = survival_narrow(params, corners)
    fm = full_mask(d)
    pt: dict[int, float] = {}
    for mask in range(size):
        comp = fm ^ mask
        acc = 0.0
        for sub in _submasks(mask):
            acc += (-1.0 if popcount(sub) % 2 else 1.0) * surv[comp | sub]
        # rounding can leave a tiny negative residue on an exact zero
        if -tolerances.VALIDATION <= acc < 0.0:
            acc = 0.0
        pt[mask] = acc
    return validate_wide(pt, d)


def narrow_from_wide_2d(params: WideParams) -> NarrowParams:
    """Invert the family bridge in dimension 2. Exists precisely when the
    components are nonnegatively correlated and pt_empty > 0; otherwise a
    not-representable error reports the correlation sign."""
    if params.d != 2:
        raise ValidationError("dimension-mismatch", f"inversion is only available in dimension 2, got d={params.d}")
    pt0, pt1, pt2 = params.value(0), params.value(0b01), params.value(0b10)
    if pt0 <= 0.0:
        raise NotRepresentableError("pt of the empty outcome is 0; no narrow representation exists")
    cov_sign = pt0 - (pt0 + pt1) * (pt0 + pt2)
    if cov_sign < -tolerances.VALIDATION:
        raise NotRepresentableError(
            "components are negatively correlated; narrow models only reach nonnegative correlation",
            correlation_sign=-1,
        )
    raw = {
        0b01: pt0 / (pt0 + pt1),
        0b10: pt0 / (pt0 + pt2),
        0b11: min(1.0, (pt0 + pt1) * (pt0 + pt2) / pt0),
    }
    return validate_narrow(raw, 2)


def _compress(mask: int, keep_bits: Sequence[int]) -> int:
    out = 0
    for new, old in enumerate(keep_bits):
        if mask >> old & 1:
            out |= 1 << new
    return out


def marginal_params(params: NarrowParams | WideParams, keep: int):
    """Parameters of the sub-vector of components in ``keep`` (a mask on the
    original dimension), reindexed to 0..|keep|-1: shocks multiply and trial
    outcomes merge across the dropped components."""
    if keep == 0:
        raise ValidationError("empty-keep", "must keep at least one component")
    d = params.d
    if keep >> d:
        raise ValidationError("invalid-mask", f"keep mask {keep} is not a subset of dimension {d}")
    keep_bits = mask_to_indices(keep)
    md = len(keep_bits)
    if isinstance(params, NarrowParams):
        out = {j: 1.0 for j in range(1, 1 << md)}
        for mask in range(1, 1 << d):
            j = _compress(mask & keep, keep_bits)
            if j:
                out[j] *= float(params.p[mask])
        return validate_narrow(out, md)
    out = {j: 0.0 for j in range(1 << md)}
    for mask in range(1 << d):
        out[_compress(mask & keep, keep_bits)] += float(params.ptilde[mask])
    return validate_wide(out, md)


def params_from_json_dict(doc: Mapping, fill: bool = False) -> NarrowParams | WideParams:
    """Parse {"family": "narrow"|"wide", "d": int, "params": {mask: value}}.

    ``fill`` enables the explicit fill-in of missing keys with the family's
    neutral value (1 for narrow shocks, 0 for wide outcomes).
    """
    try:
        family = doc["family"]
        d = int(doc["d"])
        raw = {int(k): float(v) for k, v in doc["params"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("invalid-document", f"malformed parameter document: {exc}") from exc
    if family == "narrow":
        return validate_narrow(raw, d, fill_ones=fill)
    if family == "wide":
        return validate_wide(raw, d, fill_zeros=fill)
    raise ValidationError("invalid-document", f"unknown family {family!r}")
