"""Pairwise-independent code ensembles: i.i.d., constant-composition, cost-constrained.

Codeword sampling is a pure function of (spec, seed, codeword index): each
codeword draws from its own counter-based Philox stream, so codebooks are
reproducible and safe to sample in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import as_prob_vector
from .errors import DomainError, SamplingError

ENSEMBLE_KINDS = ("iid", "constant_composition", "cost_constrained")
DEFAULT_REJECTION_BUDGET = 10**6


@dataclass(frozen=True)
class EnsembleSpec:
    """Tagged description of a pairwise-independent ensemble.

    ``costs`` is a list of per-symbol cost vectors a_l(x); a codeword x lies in
    the cost shell when |sum_i a_l(x_i) - n*phi_l| <= delta for every l, with
    phi_l the Q-average of a_l.
    """

    kind: str
    q: np.ndarray
    costs: list | None = None
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise DomainError(f"unknown ensemble kind {self.kind!r}")
        object.__setattr__(self, "q", as_prob_vector(self.q))
        if self.kind == "cost_constrained":
            if not self.costs:
                raise DomainError("cost_constrained ensemble needs at least one cost function")
            costs = [np.asarray(a, dtype=float) for a in self.costs]
            for a in costs:
                if a.shape != self.q.shape or not np.all(np.isfinite(a)):
                    raise DomainError("each cost function must be finite with one value per symbol")
            object.__setattr__(self, "costs", costs)
            if not self.delta > 0:
                raise DomainError("cost shell width delta must be positive")
        elif self.costs:
            raise DomainError(f"costs are only meaningful for cost_constrained, not {self.kind}")

    @property
    def alphabet_size(self):
        return self.q.shape[0]

    def phi(self):
        """Q-averages phi_l of the cost functions."""
        return np.array([float(self.q @ a) for a in self.costs])


@dataclass(frozen=True)
class Codebook:
    n: int
    m: int
    words: np.ndarray = field(repr=False)

    def __post_init__(self):
        words = np.asarray(self.words, dtype=np.int64)
        if words.shape != (self.m, self.n):
            raise DomainError(f"codebook words must have shape ({self.m}, {self.n})")
        if np.any(words < 0):
            raise DomainError("codeword symbols must be nonnegative indices")
        words.flags.writeable = False
        object.__setattr__(self, "words", words)


def nearest_type(q, n: int) -> np.ndarray:
    """Empirical distribution with denominator n within 1/n of q in sup norm.

    Largest-remainder rounding of n*q, ties broken toward the lowest symbol
    index, so the result is deterministic.
    """
    q = as_prob_vector(q)
    if n < q.shape[0]:
        raise DomainError(f"blocklength {n} below alphabet size {q.shape[0]}")
    scaled = q * n
    counts = np.floor(scaled).astype(np.int64)
    remainders = scaled - counts
    short = int(n - counts.sum())
    if short:
        # stable sort keeps lowest index first among equal remainders
        order = np.argsort(-remainders, kind="stable")
        counts[order[:short]] += 1
    t = counts / n
    if np.max(np.abs(t - q)) > 1.0 / n + 1e-15:
        raise DomainError(f"no type with denominator {n} within 1/{n} of q")
    return t


def _codeword_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(index)]))


def sample_codeword(spec: EnsembleSpec, n: int, rng, budget: int = DEFAULT_REJECTION_BUDGET):
    """Draw one codeword of length n from the ensemble using ``rng``."""
    q = spec.q
    if spec.kind == "iid":
        return rng.choice(q.shape[0], size=n, p=q).astype(np.int64)
    if spec.kind == "constant_composition":
        counts = np.rint(nearest_type(q, n) * n).astype(np.int64)
        word = np.repeat(np.arange(q.shape[0]), counts)
        return rng.permutation(word).astype(np.int64)
    phi = spec.phi()
    for _ in range(budget):
        word = rng.choice(q.shape[0], size=n, p=q)
        sums = np.array([a[word].sum() for a in spec.costs])
        if np.all(np.abs(sums - n * phi) <= spec.delta):
            return word.astype(np.int64)
    worst = int(np.argmax(np.abs(sums - n * phi)))
    raise SamplingError(
        f"cost shell rejection budget {budget} exhausted; "
        f"constraint {worst} off by {abs(sums[worst] - n * phi[worst]):.3g} > {spec.delta}"
    )


def sample_codebook(spec: EnsembleSpec, n: int, m: int, seed: int) -> Codebook:
    """m independent codewords; codeword i uses the Philox stream keyed (seed, i)."""
    if m < 2:
        raise DomainError(f"codebook needs at least 2 codewords, got {m}")
    words = np.stack([sample_codeword(spec, n, _codeword_rng(seed, i)) for i in range(m)])
    return Codebook(n=n, m=m, words=words)


def dumps_codebook(cb: Codebook) -> str:
    """Dump format: header line `n m`, then one codeword per line."""
    lines = [f"{cb.n} {cb.m}"]
    for word in cb.words:
        lines.append(" ".join(str(int(v)) for v in word))
    return "\n".join(lines) + "\n"


def loads_codebook(text: str) -> Codebook:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise DomainError("empty codebook dump")
    n, m = (int(tok) for tok in lines[0].split())
    words = [[int(tok) for tok in ln.split()] for ln in lines[1 : 1 + m]]
    return Codebook(n=n, m=m, words=np.asarray(words, dtype=np.int64))
