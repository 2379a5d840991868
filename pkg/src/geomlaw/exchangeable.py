"""The four parameter sequences of exchangeable geometric models and the
conversions between them.

A d-dimensional exchangeable model is pinned down by d numbers. Narrow
family: the p-row (p_1, ..., p_d) with p_k the shock parameter shared by
all subsets of cardinality k; equivalently the a-sequence (a_k is the
conditional one-step survival of component k given components 1..k-1
survived one step) or the b-sequence (b_k = joint one-step survival of k
components, stored with its leading b_0 = 1). Wide family: the pt-row
(pt_1 = probability of the empty outcome, pt_k = probability of a fixed
outcome of cardinality k-1) or the beta-sequence (beta_k = joint one-step
survival of k components, leading beta_0 = 1).

The b- and beta-sequences are stored WITH the leading 1 so the length-(d+1)
membership tests in :mod:`geomlaw.sequences` run on the stored vector as
is; off-by-one slips in these conversions are the main hazard here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import tolerances
from .bitsets import difference, full_mask, popcount, validate_dim
from .errors import ValidationError
from .shock import NarrowParams, WideParams, validate_narrow, validate_wide


class SeqRole(enum.Enum):
    P_NARROW = "p"
    A_SEQ = "a"
    B_SEQ = "b"
    PTILDE_WIDE = "ptilde"
    BETA_SEQ = "beta"


_LEADING_ONE = {SeqRole.B_SEQ, SeqRole.BETA_SEQ}


@dataclass(frozen=True)
class ExchangeableSeq:
    """A finite parameter sequence with its role tag.

    Length is d for p/a/ptilde and d+1 (leading 1) for b/beta. Structural
    invariants only: membership in the admissible parameter classes is the
    business of :mod:`geomlaw.sequences`, and the survival evaluators below
    deliberately accept non-members (needed to exhibit rectangle-inequality
    violations).
    """

    role: SeqRole
    d: int
    values: tuple[float, ...]

    def __post_init__(self):
        validate_dim(self.d)
        want = self.d + 1 if self.role in _LEADING_ONE else self.d
        if len(self.values) != want:
            raise ValidationError(
                "shape-mismatch",
                f"role {self.role.value} at dimension {self.d} needs {want} values, got {len(self.values)}",
            )
        if self.role in _LEADING_ONE:
            if abs(self.values[0] - 1.0) > tolerances.VALIDATION:
                raise ValidationError("invalid-sequence", f"{self.role.value} sequences start with 1, got {self.values[0]}")
            object.__setattr__(self, "values", (1.0,) + tuple(float(v) for v in self.values[1:]))
        if self.role in (SeqRole.A_SEQ, SeqRole.B_SEQ):
            if any(not v > 0.0 for v in self.values):
                raise ValidationError("nonpositive-entry", f"{self.role.value} sequences must be strictly positive")
        if self.role in (SeqRole.BETA_SEQ, SeqRole.PTILDE_WIDE):
            if any(v < 0.0 for v in self.values):
                raise ValidationError("nonpositive-entry", f"{self.role.value} sequences must be nonnegative")

    @classmethod
    def make(cls, role: SeqRole | str, values: Sequence[float]) -> "ExchangeableSeq":
        role = SeqRole(role) if not isinstance(role, SeqRole) else role
        d = len(values) - 1 if role in _LEADING_ONE else len(values)
        return cls(role=role, d=d, values=tuple(float(v) for v in values))

    def to_json_dict(self) -> dict:
        return {"role": self.role.value, "d": self.d, "values": list(self.values)}


def seq_from_json_dict(doc: Mapping) -> ExchangeableSeq:
    try:
        role = SeqRole(doc["role"])
        values = [float(v) for v in doc["values"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("invalid-document", f"malformed sequence document: {exc}") from exc
    seq = ExchangeableSeq.make(role, values)
    if "d" in doc and int(doc["d"]) != seq.d:
        raise ValidationError("dimension-mismatch", f"document says d={doc['d']} but values imply d={seq.d}")
    return seq


def _require_role(seq: ExchangeableSeq, role: SeqRole) -> None:
    if seq.role is not role:
        raise ValidationError("role-mismatch", f"expected a {role.value} sequence, got {seq.role.value}")


def a_from_p(p: ExchangeableSeq) -> ExchangeableSeq:
    """a_k = prod_{i=1}^{d-k+1} p_i ** C(d-k, i-1), in the log domain."""
    _require_role(p, SeqRole.P_NARROW)
    vals = p.values
    if any(not (0.0 < v <= 1.0) for v in vals) or not math.prod(vals) < 1.0:
        raise ValidationError("invalid-p", "p entries must lie in (0,1] with product strictly below 1")
    d = p.d
    logs = [math.log(v) for v in vals]
    a = [
        math.exp(sum(math.comb(d - k, i - 1) * logs[i - 1] for i in range(1, d - k + 2)))
        for k in range(1, d + 1)
    ]
    return ExchangeableSeq(SeqRole.A_SEQ, d, tuple(a))


@dataclass(frozen=True)
class PRowResult:
    """p-row recovered from an a-sequence. When the a-sequence is not
    d-strong-monotone the recovered values fall outside (0,1]; they are
    returned as computed with ``narrow`` cleared (the out-of-range entry is
    the diagnostic)."""

    values: tuple[float, ...]
    narrow: bool
    offending: tuple[int, float] | None = None

    def seq(self) -> ExchangeableSeq:
        if not self.narrow:
            raise ValidationError("invalid-p", "recovered row is not a narrow parameter row")
        return ExchangeableSeq(SeqRole.P_NARROW, len(self.values), self.values)

    def to_dict(self) -> dict:
        return {
            "values": list(self.values),
            "narrow": self.narrow,
            "offending": None if self.offending is None else {"k": self.offending[0], "value": self.offending[1]},
        }


def p_from_a(a: ExchangeableSeq, tol: float | None = None) -> PRowResult:
    """p_k = prod_{i=1}^{k} a_{d-i+1} ** ((-1)^(k-i) C(k-1, i-1))."""
    tol = tolerances.VALIDATION if tol is None else tol
    _require_role(a, SeqRole.A_SEQ)
    d = a.d
    logs = [math.log(v) for v in a.values]
    p = []
    for k in range(1, d + 1):
        lp = sum((-1) ** (k - i) * math.comb(k - 1, i - 1) * logs[d - i] for i in range(1, k + 1))
        p.append(math.exp(lp))
    offending = next(((k, v) for k, v in enumerate(p, start=1) if v > 1.0 + tol), None)
    prod_ok = math.prod(p) < 1.0 + tol
    return PRowResult(tuple(p), narrow=offending is None and prod_ok, offending=offending)


def b_from_a(a: ExchangeableSeq) -> ExchangeableSeq:
    """Cumulative products with the leading 1 prepended."""
    _require_role(a, SeqRole.A_SEQ)
    return ExchangeableSeq(SeqRole.B_SEQ, a.d, (1.0, *np.cumprod(a.values)))


def a_from_b(b: ExchangeableSeq) -> ExchangeableSeq:
    """Consecutive ratios b_k / b_{k-1}."""
    _require_role(b, SeqRole.B_SEQ)
    vals = b.values
    return ExchangeableSeq(SeqRole.A_SEQ, b.d, tuple(vals[k] / vals[k - 1] for k in range(1, b.d + 1)))


def _check_ptilde_row(vals: Sequence[float], d: int) -> None:
    if any(not (0.0 <= v <= 1.0) for v in vals):
        raise ValidationError("invalid-ptilde", "pt entries must lie in [0, 1]")
    total = sum(math.comb(d, i - 1) * vals[i - 1] for i in range(1, d + 1))
    if total > 1.0 + tolerances.VALIDATION:
        raise ValidationError("invalid-ptilde", f"class-weighted pt sum is {total}, exceeds 1")
    margin = sum(math.comb(d - 1, i - 1) * vals[i - 1] for i in range(1, d + 1))
    if not margin < 1.0:
        raise ValidationError("invalid-ptilde", "every component would be 1 almost surely (degenerate)")


def beta_from_ptilde(pt: ExchangeableSeq) -> ExchangeableSeq:
    """beta_k = sum_{i=1}^{d-k+1} C(d-k, i-1) pt_i, with beta_0 = 1 prepended."""
    _require_role(pt, SeqRole.PTILDE_WIDE)
    d = pt.d
    _check_ptilde_row(pt.values, d)
    beta = [
        sum(math.comb(d - k, i - 1) * pt.values[i - 1] for i in range(1, d - k + 2))
        for k in range(1, d + 1)
    ]
    return ExchangeableSeq(SeqRole.BETA_SEQ, d, (1.0, *beta))


@dataclass(frozen=True)
class PtildeResult:
    """pt-row recovered from a beta-sequence via the finite differences
    pt_k = diff(beta, k-1, d-k+1). Nonnegative for every k exactly when
    (1, beta_1, ..., beta_d) is (d+1)-monotone; otherwise ``wide`` is
    cleared and the most negative implied mass is reported."""

    values: tuple[float, ...]
    full_set_mass: float
    wide: bool
    negative_entry: tuple[int, float] | None = None

    def seq(self) -> ExchangeableSeq:
        if not self.wide:
            raise ValidationError("invalid-ptilde", "recovered row is not a wide parameter row")
        return ExchangeableSeq(SeqRole.PTILDE_WIDE, len(self.values), self.values)

    def to_dict(self) -> dict:
        return {
            "values": list(self.values),
            "full_set_mass": self.full_set_mass,
            "wide": self.wide,
            "negative_entry": None
            if self.negative_entry is None
            else {"k": self.negative_entry[0], "value": self.negative_entry[1]},
        }


def ptilde_from_beta(beta: ExchangeableSeq, tol: float | None = None) -> PtildeResult:
    _require_role(beta, SeqRole.BETA_SEQ)
    tol = tolerances.VALIDATION if tol is None else tol
    d = beta.d
    x = beta.values  # x[0] = 1, x[k] = beta_k
    pt = [difference(x, k - 1, d - k + 1) for k in range(1, d + 1)]
    # mass of the full outcome, implied by the sum-to-one constraint
    full = difference(x, d, 0)
    worst = min(enumerate(pt + [full], start=1), key=lambda kv: kv[1])
    wide = worst[1] >= -tol and x[1] < 1.0
    negative = None if worst[1] >= -tol else (worst[0], worst[1])
    return PtildeResult(tuple(pt), full_set_mass=full, wide=wide, negative_entry=negative)


def _ordered_survival(vals: Sequence[float], n, d: int) -> float | np.ndarray:
    pts = np.asarray(n, dtype=np.int64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != d:
        raise ValidationError("shape-mismatch", f"expected points of dimension {d}, got shape {pts.shape}")
    if (pts < 0).any():
        raise ValidationError("out-of-range", "survival arguments must be nonnegative integers")
    srt = np.sort(pts, axis=1)
    expo = np.diff(srt, axis=1, prepend=0)
    factors = np.asarray(vals[1:], dtype=float)[::-1]  # position j pairs with entry d-j+1
    out = np.prod(np.power(factors[None, :], expo), axis=1)
    return float(out[0]) if single else out


def survival_exch_narrow(b: ExchangeableSeq, n) -> float | np.ndarray:
    """prod_k b_k ** (n_(d-k+1) - n_(d-k)) over the ordered entries of n."""
    _require_role(b, SeqRole.B_SEQ)
    return _ordered_survival(b.values, n, b.d)


def survival_exch_wide(beta: ExchangeableSeq, n) -> float | np.ndarray:
    """prod_k beta_k ** (n_(d-k+1) - n_(d-k)); evaluates any leading-1
    sequence, member of the admissible class or not."""
    _require_role(beta, SeqRole.BETA_SEQ)
    return _ordered_survival(beta.values, n, beta.d)


def is_exchangeable(
    params: NarrowParams | WideParams, tol: float | None = None
) -> tuple[bool, ExchangeableSeq | None]:
    """True when the subset parameters are constant on each cardinality
    class; the collapsed row (p_k or pt_k) is returned alongside."""
    tol = tolerances.VALIDATION if tol is None else tol
    d = params.d
    table = params.p if isinstance(params, NarrowParams) else params.ptilde
    start = 1 if isinstance(params, NarrowParams) else 0
    by_card: dict[int, list[float]] = {}
    for mask in range(start, 1 << d):
        by_card.setdefault(popcount(mask), []).append(float(table[mask]))
    for vals in by_card.values():
        if max(vals) - min(vals) > tol:
            return False, None
    if isinstance(params, NarrowParams):
        row = tuple(float(table[(1 << c) - 1]) for c in range(1, d + 1))
        return True, ExchangeableSeq(SeqRole.P_NARROW, d, row)
    row = tuple(float(table[(1 << (k - 1)) - 1]) for k in range(1, d + 1))
    return True, ExchangeableSeq(SeqRole.PTILDE_WIDE, d, row)


def to_general(seq: ExchangeableSeq) -> NarrowParams | WideParams:
    """Expand a p-row or pt-row to the full subset-indexed parameter map."""
    d = seq.d
    if seq.role is SeqRole.P_NARROW:
        raw = {mask: seq.values[popcount(mask) - 1] for mask in range(1, 1 << d)}
        return validate_narrow(raw, d)
    if seq.role is SeqRole.PTILDE_WIDE:
        _check_ptilde_row(seq.values, d)
        raw = {}
        for mask in range(1 << d):
            c = popcount(mask)
            if c < d:
                raw[mask] = seq.values[c]
        raw[full_mask(d)] = max(0.0, 1.0 - sum(math.comb(d, c) * seq.values[c] for c in range(d)))
        return validate_wide(raw, d)
    raise ValidationError("role-mismatch", f"cannot expand a {seq.role.value} sequence to subset parameters")
