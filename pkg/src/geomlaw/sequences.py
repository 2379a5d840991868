"""Membership tests for monotone / log-monotone / strong-monotone sequences
and for extendibility to infinite (completely monotone) sequences.

Conventions. A length-d real sequence x = (x_0, ..., x_{d-1}) is
*d-monotone* when all alternating binomial differences of admissible order
are nonnegative; by the standard recursion this reduces to the top-order
checks diff(x, d-1-k, k) >= 0 for every offset k, which is what we test.
The three classes:

* M_d:  x_0 = 1, x_1 < 1, x d-monotone. These are exactly the survival
  parameters of the exchangeable order-statistics product form.
* LM_d: x positive, x_0 = 1, x_1 < 1, and diff(ln x, d-1-k, k) >= 0 for
  k = 0..d-2 (the order-0 condition at the last entry is deliberately
  absent: ln x_{d-1} may be negative).
* SM_d: x positive, x_0 < 1, and (-ln x_k) d-monotone.

Infinite extendibility of a leading-1 sequence (i.e. being a truncated
moment sequence of a probability measure on [0,1]) is decided by positive
semidefiniteness of the two standard Hausdorff Hankel matrices; see
``hankel_extendible``. Extendibility to a completely log-monotone sequence
has no exact finite test for length > 3; ``lm_extendible`` runs a
falsification battery over powers b**r, which is exact only at length 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tolerances
from .bitsets import difference
from .errors import GeomlawError, ValidationError

# Power grid for the log-monotone extendibility battery: 2^-6 .. 2^6.
POWER_GRID = tuple(2.0**e for e in range(-6, 7))


@dataclass(frozen=True)
class Witness:
    """Locates a failed condition: which difference (k = offset, j = order)
    or head entry broke, and its raw value so callers can re-threshold."""

    reason: str
    value: float
    k: int | None = None
    j: int | None = None

    def to_dict(self) -> dict:
        return {"reason": self.reason, "k": self.k, "j": self.j, "value": self.value}


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Witness | None = None

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "witness": self.witness.to_dict() if self.witness else None}


def _require_length(x: Sequence[float], n: int) -> None:
    if len(x) < n:
        raise ValidationError("too-short", f"sequence needs at least {n} entries, got {len(x)}")


def _require_positive(x: Sequence[float]) -> None:
    for i, v in enumerate(x):
        if not v > 0.0:
            raise ValidationError("nonpositive-entry", f"entry {i} is {v}, all entries must be > 0")


def _reduced_monotone(x: Sequence[float], tol: float) -> Witness | None:
    """Top-order difference check; returns the worst violation, if any."""
    d = len(x)
    worst: Witness | None = None
    for k in range(d):
        j = d - 1 - k
        v = difference(x, j, k)
        if v < -tol and (worst is None or v < worst.value):
            worst = Witness("difference", v, k=k, j=j)
    return worst


def _head_witness(x: Sequence[float], tol: float) -> Witness | None:
    if abs(x[0] - 1.0) > tol:
        return Witness("head-not-one", float(x[0]), k=0, j=0)
    if not x[1] < 1.0:
        return Witness("second-entry-not-below-one", float(x[1]), k=1, j=0)
    return None


def check_M(x: Sequence[float], tol: float | None = None) -> Verdict:
    """Membership in M_d for d = len(x)."""
    tol = tolerances.VALIDATION if tol is None else tol
    _require_length(x, 2)
    w = _head_witness(x, tol)
    if w is None:
        w = _reduced_monotone(x, tol)
    return Verdict(w is None, w)


def check_LM(x: Sequence[float], tol: float | None = None) -> Verdict:
    """Membership in LM_d for d = len(x); raises on nonpositive entries."""
    tol = tolerances.VALIDATION if tol is None else tol
    _require_length(x, 2)
    _require_positive(x)
    w = _head_witness(x, tol)
    if w is None:
        logs = [math.log(v) for v in x]
        d = len(x)
        for k in range(d - 1):
            j = d - 1 - k
            v = difference(logs, j, k)
            if v < -tol and (w is None or v < w.value):
                w = Witness("log-difference", v, k=k, j=j)
    return Verdict(w is None, w)


def check_SM(x: Sequence[float], tol: float | None = None) -> Verdict:
    """Membership in SM_d for d = len(x); raises on nonpositive entries."""
    tol = tolerances.VALIDATION if tol is None else tol
    _require_length(x, 1)
    _require_positive(x)
    if not x[0] < 1.0:
        return Verdict(False, Witness("first-entry-not-below-one", float(x[0]), k=0, j=0))
    neg_logs = [-math.log(v) for v in x]
    w = _reduced_monotone(neg_logs, tol)
    return Verdict(w is None, w)


def _hankel(values: np.ndarray, n: int) -> np.ndarray:
    idx = np.arange(n + 1)
    return values[idx[:, None] + idx[None, :]]


def hausdorff_hankel_matrices(x: Sequence[float]) -> list[np.ndarray]:
    """The two Hankel matrices whose joint PSD-ness characterizes truncated
    moment sequences of probability measures on [0,1].

    Even top index m = 2n: H(x_{i+j})_{0..n} and H(x_{i+j+1}-x_{i+j+2})_{0..n-1}.
    Odd  top index m = 2n+1: H(x_{i+j+1})_{0..n} and H(x_{i+j}-x_{i+j+1})_{0..n}.
    """
    _require_length(x, 2)
    arr = np.asarray(x, dtype=float)
    m = len(arr) - 1
    if m % 2 == 0:
        n = m // 2
        mats = [_hankel(arr, n)]
        if n >= 1:
            mats.append(_hankel(arr[1:-1] - arr[2:], n - 1))
    else:
        n = (m - 1) // 2
        mats = [_hankel(arr[1:], n), _hankel(arr[:-1] - arr[1:], n)]
    return mats


def hankel_extendible(x: Sequence[float], tol: float | None = None) -> Verdict:
    """True iff (x_0, ..., x_m) with x_0 = 1 are the first moments of some
    probability measure on [0,1] (minimum Hankel eigenvalue >= -tol)."""
    tol = tolerances.HANKEL_EIG if tol is None else tol
    _require_length(x, 2)
    if abs(x[0] - 1.0) > tolerances.VALIDATION:
        raise ValidationError("invalid-sequence", f"leading entry must be 1, got {x[0]}")
    min_eig = math.inf
    for mat in hausdorff_hankel_matrices(x):
        min_eig = min(min_eig, float(np.linalg.eigvalsh(mat)[0]))
    if min_eig >= -tol:
        return Verdict(True)
    return Verdict(False, Witness("hankel-eigenvalue", min_eig))


@dataclass(frozen=True)
class ExtendibilityVerdict:
    ok: bool
    exact: bool                 # power battery is a characterization only at length 3
    failing_power: float | None = None
    witness: Witness | None = None

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "exact": self.exact,
            "failing_power": self.failing_power,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def lm_extendible(b: Sequence[float], tol: float | None = None) -> ExtendibilityVerdict:
    """Necessary battery for extendibility to a completely log-monotone
    sequence: b**r must be Hausdorff-extendible for every r in POWER_GRID.

    Exact for length-3 input (there the condition reduces to
    b_1^2 <= b_2 <= b_1 < 1, independent of r); a falsification heuristic
    for longer sequences, flagged via ``exact``.
    """
    tol = tolerances.HANKEL_EIG if tol is None else tol
    _require_length(b, 2)
    _require_positive(b)
    if abs(b[0] - 1.0) > tolerances.VALIDATION:
        raise ValidationError("invalid-sequence", f"leading entry must be 1, got {b[0]}")
    arr = np.asarray(b, dtype=float)
    exact = len(arr) == 3
    for r in POWER_GRID:
        verdict = hankel_extendible(arr**r, tol)
        if not verdict.ok:
            return ExtendibilityVerdict(False, exact, failing_power=r, witness=verdict.witness)
    return ExtendibilityVerdict(True, exact)


@dataclass(frozen=True)
class SequenceClassReport:
    """Combined class-membership verdicts for one real sequence."""

    checked: tuple[float, ...]
    in_M: bool
    in_LM: bool
    in_SM: bool
    hankel_extendible_M: bool
    lm_extendible_heuristic: bool
    lm_extendible_exact: bool
    witnesses: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "checked": list(self.checked),
            "in_M": self.in_M,
            "in_LM": self.in_LM,
            "in_SM": self.in_SM,
            "hankel_extendible_M": self.hankel_extendible_M,
            "lm_extendible_heuristic": self.lm_extendible_heuristic,
            "lm_extendible_exact": self.lm_extendible_exact,
            "witnesses": {k: w.to_dict() for k, w in self.witnesses.items()},
        }


def classify_sequence(x: Sequence[float], tol: float | None = None) -> SequenceClassReport:
    """Run every membership test on x and collect witnesses for failures.

    Tests needing positivity (LM, SM) or a leading 1 (Hankel) report False
    with an explanatory witness instead of raising, so the report is total.
    """
    tol = tolerances.VALIDATION if tol is None else tol
    _require_length(x, 2)
    xs = tuple(float(v) for v in x)
    witnesses: dict[str, Witness] = {}

    m = check_M(xs, tol)
    if m.witness:
        witnesses["in_M"] = m.witness

    positive = all(v > 0 for v in xs)
    if positive:
        lm = check_LM(xs, tol)
        sm = check_SM(xs, tol)
    else:
        bad = next((v, i) for i, v in enumerate(xs) if not v > 0)
        lm = sm = Verdict(False, Witness("nonpositive-entry", bad[0], k=bad[1]))
    if lm.witness:
        witnesses["in_LM"] = lm.witness
    if sm.witness:
        witnesses["in_SM"] = sm.witness

    leading_one = abs(xs[0] - 1.0) <= tol
    if leading_one:
        hk = hankel_extendible(xs)
    else:
        hk = Verdict(False, Witness("head-not-one", xs[0], k=0, j=0))
    if hk.witness:
        witnesses["hankel_extendible_M"] = hk.witness

    if positive and leading_one and xs[1] < 1.0:
        le = lm_extendible(xs)
    else:
        le = ExtendibilityVerdict(False, exact=len(xs) == 3,
                                  witness=Witness("preconditions-not-met", xs[0]))
    if le.witness:
        witnesses["lm_extendible"] = le.witness

    # LM_d is contained in M_d for leading-1 sequences with x_1 < 1.
    assert m.ok or not lm.ok, "log-monotone sequence failed the monotone check"

    return SequenceClassReport(
        checked=xs,
        in_M=m.ok,
        in_LM=lm.ok,
        in_SM=sm.ok,
        hankel_extendible_M=hk.ok,
        lm_extendible_heuristic=le.ok,
        lm_extendible_exact=le.exact,
        witnesses=witnesses,
    )
