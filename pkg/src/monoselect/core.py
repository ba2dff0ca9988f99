"""Shared types for online learning: distributions, seeded streams, transcripts."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Protocol, Sequence

import numpy as np

PROB_ATOL = 1e-12
ASSERT_ATOL = 1e-9


class NumericalError(RuntimeError):
    """Raised when an iterative numerical routine fails to converge."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


def check_distribution(probs, atol: float = PROB_ATOL) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a non-empty 1-d vector")
    if np.any(p < -atol) or np.any(p > 1 + atol):
        raise ValueError(f"distribution entries out of [0, 1]: {p}")
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"distribution sums to {p.sum():.17g}, not 1")
    return p


def normalize(raw) -> np.ndarray:
    """Scale a non-negative vector so it sums to one.

    >>> normalize([2.0, 0.0])
    array([1., 0.])
    """
    x = np.asarray(raw, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-d vector")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("entries must be finite and non-negative")
    total = x.sum()
    if total <= 0:
        raise ValueError("at least one entry must be positive")
    p = x / total
    # one correction pass keeps the sum within PROB_ATOL for long vectors
    p /= p.sum()
    return p


def check_losses(losses, k: int, lo: float, hi: float) -> np.ndarray:
    """Validate a loss vector of length ``k`` against its declared range."""
    l = np.asarray(losses, dtype=float)
    if l.shape != (k,):
        raise ValueError(f"loss vector has shape {l.shape}, expected ({k},)")
    if np.any(l < lo - 1e-12) or np.any(l > hi + 1e-12):
        raise ValueError(f"loss entries outside [{lo}, {hi}]: {l}")
    return l


def _stream_key(stream_id: str) -> int:
    return zlib.crc32(stream_id.encode("utf-8"))


class SeededRng:
    """A named, reproducible random stream.

    Streams sharing a seed but differing in ``stream_id`` are derived through
    distinct ``SeedSequence`` spawn keys, so they are independent. Every draw
    increments ``draws``; ``(stream_id, index)`` pairs identify draws in
    transcripts.
    """

    def __init__(self, seed: int, stream_id: str = "main"):
        self.seed = int(seed)
        self.stream_id = stream_id
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=(_stream_key(stream_id),))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self.draws = 0

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream_id={self.stream_id!r}, draws={self.draws})"

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        """Draw ``n`` uniforms at once; counts as ``n`` draws."""
        self.draws += n
        return self._gen.random(n)

    @property
    def generator(self) -> np.random.Generator:
        """The underlying generator, for bulk draws that need no accounting."""
        return self._gen

    def derive(self, stream_id: str) -> "SeededRng":
        return SeededRng(self.seed, f"{self.stream_id}/{stream_id}")

    def next_id(self) -> tuple[str, int]:
        return (self.stream_id, self.draws)


def categorical(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF lookup of a single uniform ``u`` in ``probs``."""
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u, side="right"))
    if idx >= len(probs):
        # u landed beyond a cdf that rounded below 1
        idx = int(np.flatnonzero(probs > 0)[-1])
    return idx


def sample(d, rng: SeededRng) -> int:
    """Draw an arm index from ``d`` using exactly one draw of ``rng``."""
    p = check_distribution(d)
    return categorical(p, rng.uniform())


class TranscriptRow(NamedTuple):
    arm: int
    loss: float
    explore: Optional[bool]
    draws: tuple


@dataclass
class OnlineTranscript:
    """Learner-side record of play: the chosen arm and only its loss."""

    horizon: int
    rows: list[TranscriptRow] = field(default_factory=list)

    def append(self, arm: int, loss: float, explore: Optional[bool] = None, draws: Sequence = ()) -> None:
        if len(self.rows) >= self.horizon:
            raise ValueError(f"transcript already holds horizon={self.horizon} rounds")
        self.rows.append(TranscriptRow(int(arm), float(loss), explore, tuple(draws)))

    def __len__(self) -> int:
        return len(self.rows)

    def prefix(self, t: int) -> "OnlineTranscript":
        return OnlineTranscript(self.horizon, list(self.rows[:t]))

    @property
    def arms(self) -> np.ndarray:
        return np.array([r.arm for r in self.rows], dtype=int)

    @property
    def observed(self) -> np.ndarray:
        return np.array([r.loss for r in self.rows], dtype=float)


class AdaptiveAdversary(Protocol):
    """Maps the transcript of rounds ``1..t-1`` to the round-``t`` loss vector."""

    def __call__(self, transcript: OnlineTranscript) -> np.ndarray: ...
