"""Independent oracles: exact truncated enumeration of the shock model,
empirical survival grids with binomial error bands, grid comparison, random
model generators for the harnesses, and the machine-checkable suite behind
``geomlaw verify``.

Error-band convention: an analytic grid carries a zero bound, an empirical
grid of N draws carries the per-cell bound 3*sqrt(F(1-F)/N) + 1/N, and the
truncated enumeration is exact (bound 0) on its subgrid because the lumped
geometric tail never moves a componentwise minimum below the horizon.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import tolerances
from .bitsets import mask_to_indices, validate_dim
from .errors import ValidationError
from .exchangeable import (
    ExchangeableSeq,
    SeqRole,
    a_from_p,
    b_from_a,
    beta_from_ptilde,
    survival_exch_wide,
)
from .sampling import SampleBatch
from .sequences import check_M
from .shock import NarrowParams, WideParams, validate_narrow, validate_wide


@dataclass(frozen=True)
class SurvivalGrid:
    """Tabulated joint survival on {0..grid_max}^d with per-cell error."""

    d: int
    grid_max: int
    values: np.ndarray
    error_bound: np.ndarray

    def __post_init__(self):
        shape = (self.grid_max + 1,) * self.d
        if self.values.shape != shape or self.error_bound.shape != shape:
            raise ValidationError("shape-mismatch", f"grid arrays must have shape {shape}")


def grid_points(d: int, grid_max: int) -> np.ndarray:
    """(grid_max+1)^d x d array of lattice points in row-major cell order."""
    axes = np.indices((grid_max + 1,) * d)
    return axes.reshape(d, -1).T.astype(np.int64)


def analytic_grid(survival: Callable, d: int, grid_max: int) -> SurvivalGrid:
    pts = grid_points(d, grid_max)
    vals = np.asarray(survival(pts), dtype=float).reshape((grid_max + 1,) * d)
    return SurvivalGrid(d, grid_max, vals, np.zeros_like(vals))


def _suffix_sums(mass: np.ndarray) -> np.ndarray:
    out = mass
    for axis in range(mass.ndim):
        out = np.flip(np.cumsum(np.flip(out, axis), axis=axis), axis)
    return out


def enumerate_narrow(params: NarrowParams, horizon: int) -> SurvivalGrid:
    """Exact survival of the shock model on {0..horizon-1}^d, straight from
    the model definition (no closed form): fold in one shock at a time,
    tracking the joint law of the componentwise minima capped at
    "beyond the horizon", whose geometric tail mass is kept as one exact
    atom. Cells below the horizon are exact, so the error bound is 0."""
    d = params.d
    if d > 3 or horizon > 8:
        raise ValidationError("too-large", "exhaustive enumeration is limited to d <= 3 and horizon <= 8")
    if horizon < 1:
        raise ValidationError("out-of-range", "horizon must be >= 1")
    tail = horizon + 1  # sentinel value meaning "arrival beyond the horizon"
    states: dict[tuple[int, ...], float] = {(tail,) * d: 1.0}
    for mask in range(1, 1 << d):
        p = float(params.p[mask])
        support: list[tuple[int, float]] = []
        if p == 0.0:
            support.append((1, 1.0))
        else:
            for e in range(1, horizon + 1):
                support.append((e, (1.0 - p) * p ** (e - 1)))
            support.append((tail, p**horizon))
        comps = mask_to_indices(mask)
        nxt: dict[tuple[int, ...], float] = {}
        for state, prob in states.items():
            for e, w in support:
                if w == 0.0:
                    continue
                new = list(state)
                for k in comps:
                    if e < new[k]:
                        new[k] = e
                key = tuple(new)
                nxt[key] = nxt.get(key, 0.0) + prob * w
        states = nxt
    mass = np.zeros((tail,) * d)
    for state, prob in states.items():
        mass[tuple(v - 1 for v in state)] += prob
    surv = _suffix_sums(mass)
    idx = tuple(slice(0, horizon) for _ in range(d))
    vals = surv[idx].copy()
    return SurvivalGrid(d, horizon - 1, vals, np.zeros_like(vals))


def empirical_grid(batch: SampleBatch, grid_max: int) -> SurvivalGrid:
    """Fraction of draws beyond each lattice point, with the 3-sigma
    binomial band plus 1/N per cell."""
    if batch.n_samples == 0:
        raise ValidationError("empty-batch", "cannot build a grid from an empty batch")
    n = batch.n_samples
    idx = np.minimum(batch.data - 1, grid_max + 1)
    mass = np.zeros((grid_max + 2,) * batch.d)
    np.add.at(mass, tuple(idx.T), 1.0)
    surv = _suffix_sums(mass)
    vals = surv[tuple(slice(0, grid_max + 1) for _ in range(batch.d))] / n
    band = tolerances.MC_SIGMAS * np.sqrt(vals * (1.0 - vals) / n) + 1.0 / n
    return SurvivalGrid(batch.d, grid_max, vals.copy(), band)


@dataclass(frozen=True)
class GridComparison:
    passed: bool
    max_abs_dev: float
    worst_cell: tuple[int, ...]
    allowed_at_worst: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_abs_dev": self.max_abs_dev,
            "worst_cell": list(self.worst_cell),
            "allowed_at_worst": self.allowed_at_worst,
        }


def compare_grids(a: SurvivalGrid, b: SurvivalGrid) -> GridComparison:
    """Pass iff every cell differs by at most the sum of the two bounds.
    ``worst_cell`` is the cell closest to (or beyond) its allowance."""
    if a.d != b.d or a.grid_max != b.grid_max:
        raise ValidationError("shape-mismatch", "grids must share dimension and extent")
    dev = np.abs(a.values - b.values)
    allowed = a.error_bound + b.error_bound
    slack = dev - allowed
    worst = np.unravel_index(int(np.argmax(slack)), dev.shape)
    return GridComparison(
        passed=bool((slack <= 1e-15).all()),
        max_abs_dev=float(dev.max()),
        worst_cell=tuple(int(i) for i in worst),
        allowed_at_worst=float(allowed[worst]),
    )


def exchangeable_survival_grid(seq: ExchangeableSeq, grid_max: int) -> np.ndarray:
    """Survival of an exchangeable wide row on the full lattice, evaluated
    even for non-members (used to exhibit rectangle violations)."""
    pts = grid_points(seq.d, grid_max)
    return np.asarray(survival_exch_wide(seq, pts)).reshape((grid_max + 1,) * seq.d)


def pmf_grid_from_survival(surv: np.ndarray) -> np.ndarray:
    """Rectangle masses P(tau = n) for n in {1..g}^d from the survival grid
    on {0..g}^d, by differencing once along every axis."""
    out = surv
    for axis in range(surv.ndim):
        lead = [slice(None)] * surv.ndim
        lag = [slice(None)] * surv.ndim
        lead[axis] = slice(0, -1)
        lag[axis] = slice(1, None)
        out = out[tuple(lead)] - out[tuple(lag)]
    return out


# ---------------------------------------------------------------------------
# Random model generators for harnesses and acceptance tests.
# ---------------------------------------------------------------------------


def random_narrow_params(d: int, rng: np.random.Generator, low: float = 0.3, high: float = 0.98) -> NarrowParams:
    raw = {mask: float(rng.uniform(low, high)) for mask in range(1, 1 << d)}
    return validate_narrow(raw, d)


def random_wide_params(d: int, rng: np.random.Generator) -> WideParams:
    w = rng.dirichlet(np.ones(1 << d))
    return validate_wide({mask: float(w[mask]) for mask in range(1 << d)}, d)


def random_wide_row(d: int, rng: np.random.Generator) -> ExchangeableSeq:
    """Random exchangeable wide parameter row: a Dirichlet weight per
    cardinality class, scaled by the class size, spans the whole admissible
    region (so the induced leading-1 sequences cover all of the
    (d+1)-monotone class, not only moment sequences)."""
    w = rng.dirichlet(np.ones(d + 1))
    row = tuple(float(w[i - 1] / math.comb(d, i - 1)) for i in range(1, d + 1))
    return ExchangeableSeq(SeqRole.PTILDE_WIDE, d, row)


def random_monotone_beta(d: int, rng: np.random.Generator) -> ExchangeableSeq:
    return beta_from_ptilde(random_wide_row(d, rng))


def random_moment_beta(d: int, rng: np.random.Generator, max_atoms: int = 5) -> ExchangeableSeq:
    """Moments of a random discrete measure on [0,1]: extendible by
    construction, hence deep inside the monotone class."""
    k = int(rng.integers(1, max_atoms + 1))
    atoms = rng.random(k)
    weights = rng.random(k)
    weights /= weights.sum()
    values = [float((weights * atoms**j).sum()) for j in range(d + 1)]
    values[0] = 1.0
    return ExchangeableSeq(SeqRole.BETA_SEQ, d, tuple(values))


def random_lm_b(d: int, rng: np.random.Generator, low: float = 0.3, high: float = 0.98) -> ExchangeableSeq:
    """Random narrow b-sequence via a random p-row (d-log-monotone by
    construction)."""
    row = ExchangeableSeq(SeqRole.P_NARROW, d, tuple(float(v) for v in rng.uniform(low, high, size=d)))
    return b_from_a(a_from_p(row))


def perturb_to_nonmonotone(
    beta: ExchangeableSeq, rng: np.random.Generator, min_violation: float = 1e-3
) -> ExchangeableSeq:
    """Bump one interior coordinate upward until the monotone check fails by
    at least ``min_violation`` (the bumped entry stays within [0,1])."""
    d = beta.d
    if d < 2:
        raise ValidationError("too-short", "need dimension >= 2 to perturb an interior coordinate")
    k = int(rng.integers(2, d + 1))  # keep x_1 < 1 intact
    eps = 0.01
    values = list(beta.values)
    for _ in range(200):
        candidate = values.copy()
        candidate[k] = min(1.0, candidate[k] + eps)
        verdict = check_M(candidate)
        if not verdict.ok and verdict.witness.reason == "difference" and verdict.witness.value < -min_violation:
            return ExchangeableSeq(SeqRole.BETA_SEQ, d, tuple(candidate))
        eps *= 1.7
    raise ValidationError("out-of-range", "could not push the sequence out of the monotone class")


def corr_with_band(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Sample correlation and its distribution-free (influence function)
    standard error; valid for heavily skewed margins."""
    xs = (x - x.mean()) / x.std()
    ys = (y - y.mean()) / y.std()
    rho = float((xs * ys).mean())
    psi = xs * ys - 0.5 * rho * (xs**2 + ys**2)
    se = float(np.sqrt((psi**2).mean() / len(x)))
    return rho, se


# ---------------------------------------------------------------------------
# Named harnesses behind `geomlaw verify`.
# ---------------------------------------------------------------------------


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def run_suite(suite: str = "quick") -> dict:
    """Run the cross-verification harnesses; "all" scales the sample sizes
    and model counts up. Deterministic (fixed internal seeds)."""
    from .sampling import sample_narrow, sample_wide
    from .shock import (
        check_lm_property,
        survival_narrow,
        survival_wide,
        wide_from_narrow,
    )

    if suite not in ("quick", "all"):
        raise ValidationError("out-of-range", f"unknown suite {suite!r}")
    big = suite == "all"
    rng = np.random.default_rng(20260809)
    checks: list[dict] = []

    # Exact bridge between the two families.
    worst = 0.0
    for _ in range(30 if big else 8):
        d = int(rng.integers(2, 4))
        npar = random_narrow_params(d, rng)
        wpar = wide_from_narrow(npar)
        ga = analytic_grid(lambda v: survival_narrow(npar, v), d, 4)
        gb = analytic_grid(lambda v: survival_wide(wpar, v), d, 4)
        worst = max(worst, float(np.abs(ga.values - gb.values).max()))
    checks.append(_check("narrow-wide-bridge", worst <= tolerances.VALIDATION, max_abs_dev=worst))

    # Exhaustive enumeration against the closed form.
    worst = 0.0
    for _ in range(10 if big else 4):
        d = int(rng.integers(2, 4))
        npar = random_narrow_params(d, rng)
        horizon = 6
        ga = enumerate_narrow(npar, horizon)
        gb = analytic_grid(lambda v: survival_narrow(npar, v), d, horizon - 1)
        worst = max(worst, float(np.abs(ga.values - gb.values).max()))
    checks.append(_check("enumeration-oracle", worst <= tolerances.VALIDATION, max_abs_dev=worst))

    # Memorylessness at machine precision for both families.
    worst = 0.0
    for _ in range(20 if big else 6):
        d = int(rng.integers(2, 5))
        npar = random_narrow_params(d, rng)
        wpar = random_wide_params(d, rng)
        rep_n = check_lm_property(lambda v: survival_narrow(npar, v), d, 2000, 8, rng)
        rep_w = check_lm_property(lambda v: survival_wide(wpar, v), d, 2000, 8, rng)
        worst = max(worst, rep_n.max_rel_violation, rep_w.max_rel_violation)
    checks.append(_check("memoryless-identity", worst <= tolerances.VALIDATION, max_rel_violation=worst))

    # Samplers against their closed forms.
    n_draws = 400_000 if big else 100_000
    d = 3
    npar = random_narrow_params(d, rng)
    ga = analytic_grid(lambda v: survival_narrow(npar, v), d, 4)
    gb = empirical_grid(sample_narrow(npar, n_draws, seed=11), 4)
    cmp_n = compare_grids(ga, gb)
    wpar = wide_from_narrow(npar)
    gc = empirical_grid(sample_wide(wpar, n_draws, seed=12), 4)
    cmp_w = compare_grids(ga, gc)
    checks.append(_check("sampler-narrow", cmp_n.passed, max_abs_dev=cmp_n.max_abs_dev))
    checks.append(_check("sampler-wide-cross-model", cmp_w.passed, max_abs_dev=cmp_w.max_abs_dev))

    # Rectangle masses: nonnegative inside the monotone class, genuinely
    # negative outside it.
    count = 200 if big else 50
    min_raw = math.inf
    for _ in range(count):
        beta = random_moment_beta(3, rng)
        surv = exchangeable_survival_grid(beta, 6)
        min_raw = min(min_raw, float(pmf_grid_from_survival(surv).min()))
    ok_inside = min_raw >= -tolerances.ORACLE
    checks.append(_check("rectangle-masses-members", ok_inside, min_mass=min_raw))

    count = 50 if big else 15
    all_negative = True
    for _ in range(count):
        beta = perturb_to_nonmonotone(random_monotone_beta(3, rng), rng)
        surv = exchangeable_survival_grid(beta, 6)
        if float(pmf_grid_from_survival(surv).min()) >= -1e-8:
            all_negative = False
    checks.append(_check("rectangle-masses-non-members", all_negative))

    passed = all(c["passed"] for c in checks)
    return {"suite": suite, "passed": passed, "checks": checks}
