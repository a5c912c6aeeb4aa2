"""Reproducible sample paths of labeled chains."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from ..chain import LabeledMarkovChain, stationary_vector

CHUNK = 1 << 16


@dataclass(frozen=True)
class SampleSpec:
    length: int
    seed: int
    burn_in: int = 0

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def uniform_chunk(seed: int, index: int) -> np.ndarray:
    """Uniforms ``u[index*CHUNK : (index+1)*CHUNK]`` of the stream for ``seed``.

    Each chunk has its own Philox key derived from ``(seed, index)``, so any
    chunk can be produced independently of the others.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss)).random(CHUNK)


def _uniforms(seed: int, count: int):
    for index in range(-(-count // CHUNK)):
        yield from uniform_chunk(seed, index).tolist()


def sample_states(chain: LabeledMarkovChain, spec: SampleSpec) -> list[int]:
    """Hidden-state indices of a stationary path; ``u_0`` picks the start, ``u_t`` step t."""
    pi = [float(p) for p in stationary_vector(chain)]
    cum_pi = list(accumulate(pi))
    targets = [[j for j, _ in r] for r in chain.rows]
    cums = [list(accumulate(float(p) for _, p in r)) for r in chain.rows]
    total = spec.burn_in + spec.length
    out = []
    u = _uniforms(spec.seed, total)
    x = min(bisect_right(cum_pi, next(u) * cum_pi[-1]), len(pi) - 1)
    if spec.burn_in == 0:
        out.append(x)
    for t in range(1, total):
        row = cums[x]
        x = targets[x][min(bisect_right(row, next(u) * row[-1]), len(row) - 1)]
        if t >= spec.burn_in:
            out.append(x)
    return out


def sample_path(chain: LabeledMarkovChain, spec: SampleSpec) -> list:
    """Label sequence of length ``spec.length`` after ``spec.burn_in`` discarded steps."""
    labels = chain.labels
    return [labels[i] for i in sample_states(chain, spec)]
