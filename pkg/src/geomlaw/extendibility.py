"""One-dimension extension of exchangeable parameter rows, the library of
infinitely divisible laws driving the random-walk construction, and the
Venn-style family classifier.

Extension scheme. The parameter rows of all marginal dimensions form a
triangle whose adjacent rows are related multiplicatively (narrow,
p_{k,j} = p_{k,j+1} * p_{k+1,j+1}) or additively (wide, with + instead
of *). Appending a row below the dimension-d row has one degree of
freedom q (the first entry of the new row, i.e. the appended a_{d+1},
resp. beta_{d+1}); back-substitution expresses every other new entry as a
monotone function of q, so the feasible q's form an interval.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import tolerances
from .errors import ValidationError
from .exchangeable import ExchangeableSeq, SeqRole, _check_ptilde_row, _require_role
from .sequences import SequenceClassReport, classify_sequence

_INF_STRINGS = {"inf", "infinity", "Infinity"}


@dataclass(frozen=True)
class ExtensionInterval:
    """Feasible values of the free parameter q of a one-row extension.
    Infeasible extensions are signaled by an empty interval."""

    lower: float
    upper: float
    open_lower: bool = False
    open_upper: bool = False

    @property
    def feasible(self) -> bool:
        if self.lower > self.upper:
            return False
        if self.lower == self.upper and (self.open_lower or self.open_upper):
            return False
        return True

    def contains(self, q: float, tol: float | None = None) -> bool:
        tol = tolerances.VALIDATION if tol is None else tol
        return self.feasible and self.lower - tol <= q <= self.upper + tol

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "lower": self.lower,
            "upper": self.upper,
            "open_lower": self.open_lower,
            "open_upper": self.open_upper,
        }


def _empty_interval() -> ExtensionInterval:
    return ExtensionInterval(lower=1.0, upper=0.0)


def extend_one_narrow(p_row: ExchangeableSeq) -> ExtensionInterval:
    """Interval of q such that the extended narrow row stays in (0,1]^{d+1}.

    Back-substitution in the log domain: the (j+1)-th new entry equals
    q^((-1)^j) * prod_{i<=j} p_i^((-1)^(j-i)), so odd j bound q from below
    and even j from above.
    """
    _require_role(p_row, SeqRole.P_NARROW)
    vals = p_row.values
    if any(not (0.0 < v <= 1.0) for v in vals) or not math.prod(vals) < 1.0:
        raise ValidationError("invalid-row", "p entries must lie in (0,1] with product strictly below 1")
    logs = [math.log(v) for v in vals]
    log_lo = -math.inf
    log_hi = 0.0  # q <= 1
    c = 0.0
    for j in range(1, p_row.d + 1):
        # c_j = sum_{i=1..j} (-1)^(j-i) ln p_i satisfies c_j = ln p_j - c_{j-1}
        c = logs[j - 1] - c
        if j % 2 == 1:
            log_lo = max(log_lo, c)
        else:
            log_hi = min(log_hi, -c)
    return ExtensionInterval(lower=math.exp(log_lo), upper=math.exp(log_hi))


def extended_row_narrow(p_row: ExchangeableSeq, q: float) -> tuple[float, ...]:
    """The full (d+1)-entry row generated by a choice of q."""
    _require_role(p_row, SeqRole.P_NARROW)
    row = [q]
    for pk in p_row.values:
        row.append(pk / row[-1])
    return tuple(row)


def extend_one_wide(pt_row: ExchangeableSeq) -> ExtensionInterval:
    """Interval of q for the additive triangle. Besides the new-row entries
    lying in [0,1], the mass of the full (d+1)-component outcome implied by
    the sum-to-one constraint must be nonnegative; dropping it would admit
    rows that are not probability vectors."""
    _require_role(pt_row, SeqRole.PTILDE_WIDE)
    d = pt_row.d
    _check_ptilde_row(pt_row.values, d)
    # constraints alpha*q + gamma in [0,1]; entry j+1 has alpha=(-1)^j, gamma=S_j
    constraints: list[tuple[float, float]] = [(1.0, 0.0)]
    s = 0.0
    for j in range(1, d + 1):
        s = pt_row.values[j - 1] - s
        constraints.append((-1.0 if j % 2 else 1.0, s))
    full_at_0 = 1.0 - sum(math.comb(d + 1, i) * a_g[1] for i, a_g in enumerate(constraints))
    full_slope = -sum(math.comb(d + 1, i) * a_g[0] for i, a_g in enumerate(constraints))
    constraints.append((full_slope, full_at_0))
    lo, hi = 0.0, 1.0
    for alpha, gamma in constraints:
        if alpha > 0:
            lo = max(lo, -gamma / alpha)
            hi = min(hi, (1.0 - gamma) / alpha)
        else:
            lo = max(lo, (1.0 - gamma) / alpha)
            hi = min(hi, -gamma / alpha)
    if lo > hi:
        return _empty_interval()
    return ExtensionInterval(lower=lo, upper=hi)


def extended_row_wide(pt_row: ExchangeableSeq, q: float) -> tuple[float, ...]:
    _require_role(pt_row, SeqRole.PTILDE_WIDE)
    row = [q]
    for ptk in pt_row.values:
        row.append(ptk - row[-1])
    return tuple(row)


class LawKind(enum.Enum):
    DEGENERATE = "degenerate"
    GAMMA = "gamma"
    COMPOUND_POISSON_EXP = "compound_poisson_exp"
    GEOMETRIC_KILLED = "geometric_killed"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class InfDivLaw:
    """A nonnegative (possibly infinite) random increment from a closed
    enumeration of laws, so that infinite divisibility is a stored fact:

    * DEGENERATE(x0): point mass at x0 in [0, inf]; always divisible.
    * GAMMA(shape, rate): always divisible.
    * COMPOUND_POISSON_EXP(intensity, jump_rate): Poisson(intensity) many
      i.i.d. Exp(jump_rate) jumps; always divisible.
    * GEOMETRIC_KILLED(p, finite_mass): geometric on {1, 2, ...} with
      survival p**n given finite, mass 1 - finite_mass at infinity;
      divisible for every admissible parameter choice.
    * BERNOULLI(q, level): mass q at level, 1-q at zero. NOT divisible for
      finite positive level with q in (0,1); the level = inf case (the
      two-point {0, inf} law) and the degenerate q in {0,1} cases are.
    """

    kind: LawKind
    params: tuple[float, ...]

    @classmethod
    def degenerate(cls, x0: float) -> "InfDivLaw":
        if not (x0 >= 0.0):
            raise ValidationError("out-of-range", "degenerate point must be >= 0 (inf allowed)")
        return cls(LawKind.DEGENERATE, (float(x0),))

    @classmethod
    def gamma(cls, shape: float, rate: float) -> "InfDivLaw":
        if shape <= 0 or rate <= 0:
            raise ValidationError("out-of-range", "gamma shape and rate must be positive")
        return cls(LawKind.GAMMA, (float(shape), float(rate)))

    @classmethod
    def compound_poisson_exp(cls, intensity: float, jump_rate: float) -> "InfDivLaw":
        if intensity <= 0 or jump_rate <= 0:
            raise ValidationError("out-of-range", "intensity and jump rate must be positive")
        return cls(LawKind.COMPOUND_POISSON_EXP, (float(intensity), float(jump_rate)))

    @classmethod
    def geometric_killed(cls, p: float, finite_mass: float = 1.0) -> "InfDivLaw":
        if not (0.0 <= p < 1.0) or not (0.0 < finite_mass <= 1.0):
            raise ValidationError("out-of-range", "need p in [0,1) and finite mass in (0,1]")
        return cls(LawKind.GEOMETRIC_KILLED, (float(p), float(finite_mass)))

    @classmethod
    def bernoulli(cls, q: float, level: float) -> "InfDivLaw":
        if not (0.0 <= q <= 1.0) or not (level > 0.0):
            raise ValidationError("out-of-range", "need q in [0,1] and level > 0 (inf allowed)")
        return cls(LawKind.BERNOULLI, (float(q), float(level)))

    @classmethod
    def zero_or_infinity(cls, mass_at_zero: float) -> "InfDivLaw":
        """The two-point {0, inf} law with P(X = 0) = mass_at_zero."""
        return cls.bernoulli(1.0 - mass_at_zero, math.inf)

    @property
    def infinitely_divisible(self) -> bool:
        if self.kind is LawKind.BERNOULLI:
            q, level = self.params
            return math.isinf(level) or q in (0.0, 1.0)
        return True

    @property
    def mass_at_zero(self) -> float:
        if self.kind is LawKind.DEGENERATE:
            return 1.0 if self.params[0] == 0.0 else 0.0
        if self.kind is LawKind.GAMMA:
            return 0.0
        if self.kind is LawKind.COMPOUND_POISSON_EXP:
            return math.exp(-self.params[0])
        if self.kind is LawKind.GEOMETRIC_KILLED:
            return 0.0
        return 1.0 - self.params[0]

    def laplace(self, k: int) -> float:
        """E[exp(-k X)] with the convention that the value at k = 0 is 1."""
        if k == 0:
            return 1.0
        if self.kind is LawKind.DEGENERATE:
            return math.exp(-k * self.params[0]) if not math.isinf(self.params[0]) else 0.0
        if self.kind is LawKind.GAMMA:
            shape, rate = self.params
            return (rate / (rate + k)) ** shape
        if self.kind is LawKind.COMPOUND_POISSON_EXP:
            intensity, jump_rate = self.params
            return math.exp(-intensity * k / (jump_rate + k))
        if self.kind is LawKind.GEOMETRIC_KILLED:
            p, a = self.params
            e = math.exp(-float(k))
            return a * (1.0 - p) * e / (1.0 - p * e)
        q, level = self.params
        tail = 0.0 if math.isinf(level) else math.exp(-k * level)
        return (1.0 - q) + q * tail

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """One batch of i.i.d. increments; infinite values are genuine inf."""
        if self.kind is LawKind.DEGENERATE:
            return np.full(size, self.params[0])
        if self.kind is LawKind.GAMMA:
            shape, rate = self.params
            return rng.gamma(shape, 1.0 / rate, size=size)
        if self.kind is LawKind.COMPOUND_POISSON_EXP:
            intensity, jump_rate = self.params
            counts = rng.poisson(intensity, size=size)
            return rng.standard_gamma(counts, size=size) / jump_rate
        if self.kind is LawKind.GEOMETRIC_KILLED:
            p, a = self.params
            u = rng.random(size)
            geo = np.maximum(1, np.ceil(np.log1p(-rng.random(size)) / math.log(p))) if p > 0 else np.ones(size)
            return np.where(u < a, geo, math.inf)
        q, level = self.params
        return np.where(rng.random(size) < q, level, 0.0)

    def describe(self) -> str:
        names = {
            LawKind.DEGENERATE: ("x0",),
            LawKind.GAMMA: ("shape", "rate"),
            LawKind.COMPOUND_POISSON_EXP: ("intensity", "jump_rate"),
            LawKind.GEOMETRIC_KILLED: ("p", "finite_mass"),
            LawKind.BERNOULLI: ("q", "level"),
        }[self.kind]
        inner = ", ".join(f"{n}={v}" for n, v in zip(names, self.params))
        return f"{self.kind.value}({inner})"

    def to_json_dict(self) -> dict:
        doc: dict = {"kind": self.kind.value}
        names = {
            LawKind.DEGENERATE: ("x0",),
            LawKind.GAMMA: ("shape", "rate"),
            LawKind.COMPOUND_POISSON_EXP: ("intensity", "jump_rate"),
            LawKind.GEOMETRIC_KILLED: ("p", "finite_mass"),
            LawKind.BERNOULLI: ("q", "level"),
        }[self.kind]
        for n, v in zip(names, self.params):
            doc[n] = "inf" if math.isinf(v) else v
        return doc


def law_from_json_dict(doc: Mapping) -> InfDivLaw:
    def num(key: str) -> float:
        v = doc[key]
        if isinstance(v, str) and v in _INF_STRINGS:
            return math.inf
        return float(v)

    try:
        kind = LawKind(doc["kind"])
        if kind is LawKind.DEGENERATE:
            return InfDivLaw.degenerate(num("x0"))
        if kind is LawKind.GAMMA:
            return InfDivLaw.gamma(num("shape"), num("rate"))
        if kind is LawKind.COMPOUND_POISSON_EXP:
            return InfDivLaw.compound_poisson_exp(num("intensity"), num("jump_rate"))
        if kind is LawKind.GEOMETRIC_KILLED:
            return InfDivLaw.geometric_killed(num("p"), num("finite_mass") if "finite_mass" in doc else 1.0)
        return InfDivLaw.bernoulli(num("q"), num("level"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("invalid-document", f"malformed law document: {exc}") from exc


def laplace_moments(law: InfDivLaw, d: int) -> ExchangeableSeq:
    """The sequence (1, E[e^-X], ..., E[e^-dX]) of non-positive exponential
    moments; tagged as a b-sequence when the law is infinitely divisible
    (narrow family) and as a beta-sequence otherwise (wide family only)."""
    if d < 1:
        raise ValidationError("out-of-range", "dimension must be >= 1")
    values = (1.0, *(law.laplace(k) for k in range(1, d + 1)))
    role = SeqRole.B_SEQ if law.infinitely_divisible and min(values) > 0.0 else SeqRole.BETA_SEQ
    return ExchangeableSeq(role, d, values)


FAMILY_TAGS = ("G^{N,E}", "G^{W,E}", "G^{N,X}", "G^{W,X}", "DEGENERATE", "NOT_A_SURVIVAL")


@dataclass(frozen=True)
class FamilyReport:
    """Most specific family tag for a leading-1 parameter sequence plus the
    underlying membership report. The narrow-extendible verdict rests on the
    power battery, so it carries the heuristic/exact flag of the report."""

    family: str
    degenerate: bool
    report: SequenceClassReport

    def to_dict(self) -> dict:
        return {"family": self.family, "degenerate": self.degenerate, "report": self.report.to_dict()}


def classify_family(seq: ExchangeableSeq) -> FamilyReport:
    if seq.role not in (SeqRole.B_SEQ, SeqRole.BETA_SEQ):
        raise ValidationError("role-mismatch", "family classification expects a b or beta sequence")
    x = seq.values
    degenerate = all(v == 0.0 for v in x[1:])
    report = classify_sequence(x)
    if degenerate:
        family = "DEGENERATE"
    elif not report.in_M:
        family = "NOT_A_SURVIVAL"
    elif report.hankel_extendible_M and report.in_LM and report.lm_extendible_heuristic:
        family = "G^{N,E}"
    elif report.hankel_extendible_M:
        family = "G^{W,E}"
    elif report.in_LM:
        family = "G^{N,X}"
    else:
        family = "G^{W,X}"
    return FamilyReport(family=family, degenerate=degenerate, report=report)
