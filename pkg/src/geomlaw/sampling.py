"""Exact stochastic constructions for all four model routes, plus partition
statistics of a draw.

Randomness contract: a fixed, named counter-based generator (numpy Philox,
keyed by (seed, worker)). A batch of n draws may be split across W worker
substreams; chunks are concatenated in worker order, so output is a pure
function of (parameters, seed, W). The provenance of every batch records
all of it.

Infinite values (a walk increment of inf, a sieve coin with Y = 0) are kept
as IEEE inf and only ever compared against finite thresholds, which is the
"walk terminates" rule: once the walk hits inf every pending component
stops in that round.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .bitsets import full_mask, mask_to_indices, validate_dim
from .errors import GeomlawError, ValidationError
from .exchangeable import ExchangeableSeq
from .extendibility import InfDivLaw, law_from_json_dict
from .shock import NarrowParams, WideParams

RNG_ALGORITHM = "philox4x64"
_TRIAL_CAP = 10**9


@dataclass(frozen=True)
class RngStream:
    """Deterministic substream: identical (seed, worker) gives an identical
    stream regardless of how many other substreams exist."""

    seed: int
    worker: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % (1 << 64), self.worker], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SampleBatch:
    """n_samples x d matrix of positive integer draws plus provenance."""

    d: int
    n_samples: int
    data: np.ndarray
    provenance: dict

    def __post_init__(self):
        if self.data.shape != (self.n_samples, self.d):
            raise ValidationError("shape-mismatch", f"data shape {self.data.shape} != ({self.n_samples}, {self.d})")
        if self.n_samples and self.data.min() < 1:
            raise ValidationError("out-of-range", "draws must be positive integers")


@dataclass(frozen=True)
class PartitionStats:
    """Distinct-value count of one draw and the block sizes in order of
    increasing value; the blocks always sum to d."""

    k_distinct: int
    blocks: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"k_distinct": self.k_distinct, "blocks": list(self.blocks)}


def partition_stats(draw) -> PartitionStats:
    arr = np.asarray(draw)
    _, counts = np.unique(arr, return_counts=True)
    return PartitionStats(k_distinct=len(counts), blocks=tuple(int(c) for c in counts))


def sample_geometric(success_prob: float, gen: np.random.Generator, size: int | None = None):
    """Geometric on {1, 2, ...} by inverse transform, one uniform per draw."""
    if not (0.0 < success_prob <= 1.0):
        raise ValidationError("out-of-range", f"success probability must be in (0,1], got {success_prob}")
    n = 1 if size is None else size
    if success_prob == 1.0:
        out = np.ones(n, dtype=np.int64)
    else:
        u = gen.random(n)
        # P(tau > n) = (1-q)^n; ceil of log ratio inverts the tail
        out = np.maximum(1, np.ceil(np.log1p(-u) / math.log1p(-success_prob))).astype(np.int64)
    return int(out[0]) if size is None else out


def _worker_counts(n: int, workers: int) -> list[int]:
    if workers < 1:
        raise ValidationError("out-of-range", "workers must be >= 1")
    base, extra = divmod(n, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _digest(desc: Mapping) -> str:
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()[:16]


def _provenance(model: str, desc: Mapping, d: int, n: int, seed: int, workers: int) -> dict:
    return {
        "model": model,
        "d": d,
        "n_samples": n,
        "seed": seed,
        "workers": workers,
        "algorithm": RNG_ALGORITHM,
        "params_digest": _digest(desc),
    }


def _run_chunks(chunk_fn, d: int, n_samples: int, seed: int, workers: int) -> np.ndarray:
    parts = []
    for worker, count in enumerate(_worker_counts(n_samples, workers)):
        if count:
            parts.append(chunk_fn(RngStream(seed, worker).generator(), count))
    if not parts:
        return np.zeros((0, d), dtype=np.int64)
    return np.concatenate(parts, axis=0)


def sample_narrow(params: NarrowParams, n_samples: int, seed: int, workers: int = 1) -> SampleBatch:
    """Shock model: one geometric arrival per subset, componentwise minima.
    Subsets with parameter 1 never fire (their arrival is infinite) and are
    skipped; validation guarantees every component has a finite shock."""
    d = params.d
    masks = [m for m in range(1, 1 << d) if params.p[m] < 1.0]
    cols = {m: list(mask_to_indices(m)) for m in masks}

    def chunk(gen: np.random.Generator, count: int) -> np.ndarray:
        taus = np.full((count, d), np.iinfo(np.int64).max, dtype=np.int64)
        for m in masks:
            arrivals = sample_geometric(1.0 - float(params.p[m]), gen, count)
            for k in cols[m]:
                np.minimum(taus[:, k], arrivals, out=taus[:, k])
        return taus

    data = _run_chunks(chunk, d, n_samples, seed, workers)
    return SampleBatch(d, n_samples, data, _provenance("narrow", params.to_json_dict(), d, n_samples, seed, workers))


def sample_wide(params: WideParams, n_samples: int, seed: int, workers: int = 1) -> SampleBatch:
    """Multinomial-trials model: i.i.d. categorical outcomes over subsets
    until every component has appeared; tau_k is the round of the first
    outcome containing k."""
    d = params.d
    probs = params.ptilde
    full = full_mask(d)

    def chunk(gen: np.random.Generator, count: int) -> np.ndarray:
        taus = np.zeros((count, d), dtype=np.int64)
        covered = np.zeros(count, dtype=np.int64)
        remaining = np.arange(count)
        trials = 0
        t = 0
        while remaining.size:
            t += 1
            trials += remaining.size
            if trials > _TRIAL_CAP:
                raise GeomlawError("iteration-cap", "trial loop exceeded its cap; parameters look corrupted")
            outcome = gen.choice(1 << d, size=remaining.size, p=probs)
            new = outcome & ~covered[remaining]
            for k in range(d):
                hit = (new >> k & 1).astype(bool)
                taus[remaining[hit], k] = t
            covered[remaining] |= outcome
            remaining = remaining[covered[remaining] != full]
        return taus

    data = _run_chunks(chunk, d, n_samples, seed, workers)
    return SampleBatch(d, n_samples, data, _provenance("wide", params.to_json_dict(), d, n_samples, seed, workers))


def sample_definetti(law: InfDivLaw, d: int, n_samples: int, seed: int, workers: int = 1) -> SampleBatch:
    """Random-walk model: a shared nondecreasing walk with i.i.d. increments
    from ``law`` and d independent unit-exponential thresholds per draw;
    tau_k is the first step at which the walk reaches threshold k. The walk
    is extended lazily until it passes the largest threshold."""
    validate_dim(d)
    if law.mass_at_zero >= 1.0:
        raise ValidationError("degenerate-at-zero", "the increment law is concentrated at 0; the walk never moves")

    def chunk(gen: np.random.Generator, count: int) -> np.ndarray:
        thresholds = gen.standard_exponential((count, d))
        taus = np.zeros((count, d), dtype=np.int64)
        walk = np.zeros(count)
        remaining = np.arange(count)
        t = 0
        while remaining.size:
            t += 1
            if t > 10**7:
                raise GeomlawError("iteration-cap", "walk extension exceeded its cap")
            walk[remaining] += law.sample(gen, remaining.size)
            reached = thresholds[remaining] <= walk[remaining, None]
            rows, colns = np.nonzero(reached & (taus[remaining] == 0))
            taus[remaining[rows], colns] = t
            remaining = remaining[~reached.all(axis=1)]
        return taus

    desc = {"law": law.to_json_dict(), "d": d}
    data = _run_chunks(chunk, d, n_samples, seed, workers)
    return SampleBatch(d, n_samples, data, _provenance("definetti", desc, d, n_samples, seed, workers))


@dataclass(frozen=True)
class Mixing:
    """Random coin bias for the sieve: point mass, uniform on [0,1], a
    tabulated quantile function (linear interpolation on a uniform
    probability grid), or the multiplicative image exp(-X) of an increment
    law (which ties the sieve to the random-walk model exactly)."""

    kind: str
    value: float = 0.0
    quantiles: tuple[float, ...] = ()
    law: InfDivLaw | None = None

    @classmethod
    def point_mass(cls, y: float) -> "Mixing":
        if not (0.0 <= y <= 1.0):
            raise ValidationError("out-of-range", "point mass must lie in [0,1]")
        if y == 1.0:
            raise ValidationError("mixing-degenerate-at-one", "coin bias 1 never drops anyone")
        return cls("point_mass", value=y)

    @classmethod
    def uniform(cls) -> "Mixing":
        return cls("uniform")

    @classmethod
    def table(cls, quantiles) -> "Mixing":
        q = tuple(float(v) for v in quantiles)
        if len(q) < 2 or any(not (0.0 <= v <= 1.0) for v in q) or any(b < a for a, b in zip(q, q[1:])):
            raise ValidationError("out-of-range", "quantile table must be nondecreasing within [0,1]")
        if q[0] >= 1.0:
            raise ValidationError("mixing-degenerate-at-one", "quantile table is identically 1")
        return cls("table", quantiles=q)

    @classmethod
    def exp_neg(cls, law: InfDivLaw) -> "Mixing":
        if law.mass_at_zero >= 1.0:
            raise ValidationError("mixing-degenerate-at-one", "exp(-X) of a zero increment is identically 1")
        return cls("exp_neg", law=law)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "point_mass":
            return np.full(size, self.value)
        if self.kind == "uniform":
            return gen.random(size)
        if self.kind == "table":
            grid = np.linspace(0.0, 1.0, len(self.quantiles))
            return np.interp(gen.random(size), grid, np.asarray(self.quantiles))
        x = self.law.sample(gen, size)
        with np.errstate(over="ignore"):
            return np.exp(-x)

    def to_json_dict(self) -> dict:
        if self.kind == "point_mass":
            return {"mixing": "point_mass", "value": self.value}
        if self.kind == "uniform":
            return {"mixing": "uniform"}
        if self.kind == "table":
            return {"mixing": "table", "quantiles": list(self.quantiles)}
        return {"mixing": "exp_neg", "law": self.law.to_json_dict()}


def mixing_from_json_dict(doc: Mapping) -> Mixing:
    try:
        kind = doc["mixing"]
        if kind == "point_mass":
            return Mixing.point_mass(float(doc["value"]))
        if kind == "uniform":
            return Mixing.uniform()
        if kind == "table":
            return Mixing.table(doc["quantiles"])
        if kind == "exp_neg":
            return Mixing.exp_neg(law_from_json_dict(doc["law"]))
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("invalid-document", f"malformed mixing document: {exc}") from exc
    raise ValidationError("invalid-document", f"unknown mixing kind {doc.get('mixing')!r}")


def sample_bernoulli_sieve(mixing: Mixing, d: int, n_samples: int, seed: int, workers: int = 1) -> SampleBatch:
    """Coin-drop game: in round t a coin bias Y_t is drawn per game, every
    player still in drops independently with probability 1 - Y_t; tau_k is
    the drop-out round of player k. Uniforms are drawn for all d seats each
    round (drops for already-out players are discarded), keeping the stream
    layout independent of the game's progress."""
    validate_dim(d)

    def chunk(gen: np.random.Generator, count: int) -> np.ndarray:
        taus = np.zeros((count, d), dtype=np.int64)
        remaining = np.arange(count)
        t = 0
        while remaining.size:
            t += 1
            if t > 10**7:
                raise GeomlawError("iteration-cap", "sieve round loop exceeded its cap")
            bias = mixing.sample(gen, remaining.size)
            drops = gen.random((remaining.size, d)) >= bias[:, None]
            rows, colns = np.nonzero(drops & (taus[remaining] == 0))
            taus[remaining[rows], colns] = t
            remaining = remaining[(taus[remaining] == 0).any(axis=1)]
        return taus

    desc = {"mixing": mixing.to_json_dict(), "d": d}
    data = _run_chunks(chunk, d, n_samples, seed, workers)
    return SampleBatch(d, n_samples, data, _provenance("sieve", desc, d, n_samples, seed, workers))


def sample_exchangeable_narrow(seq: ExchangeableSeq, n_samples: int, seed: int, workers: int = 1) -> SampleBatch:
    """Convenience: expand a p-row and run the shock sampler."""
    from .exchangeable import to_general

    return sample_narrow(to_general(seq), n_samples, seed, workers)


def write_csv(batch: SampleBatch, path: str) -> str:
    """Write draws as CSV (header tau1..taud) plus a .meta.json sidecar with
    the provenance; returns the sidecar path."""
    header = ",".join(f"tau{k + 1}" for k in range(batch.d))
    np.savetxt(path, batch.data, fmt="%d", delimiter=",", header=header, comments="")
    meta_path = path + ".meta.json"
    with open(meta_path, "w") as fh:
        json.dump(batch.provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta_path
