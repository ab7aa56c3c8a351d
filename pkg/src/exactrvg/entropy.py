"""Fair-bit sources with exact consumption counting.

Every generator draws its randomness one bit at a time through ``next_bit``.
``bits_consumed`` is the entropy cost. Sources:

* ``PrngSource``: SFC64 words, served most-significant bit first. The state is
  seeded through numpy's SeedSequence so a seed means the same thing here,
  in numpy, and in the compiled kernels (which step the same recurrence).
* ``ReplaySource``: a fixed bit vector; running past its end raises
  ``SourceExhausted``.
* ``OsSource``: os.urandom, for the CLI only.
"""
from __future__ import annotations

import os
from typing import Iterable, Protocol, runtime_checkable

import numpy as np

__all__ = [
    "BitSource", "SourceExhausted", "PrngSource", "ReplaySource", "OsSource",
    "SpySource", "prng_source", "replay_source", "read_replay_file",
]

_M64 = (1 << 64) - 1


class SourceExhausted(RuntimeError):
    """A replay source ran out of bits."""


@runtime_checkable
class BitSource(Protocol):
    bits_consumed: int

    def next_bit(self) -> int: ...


def sfc64_seed_state(seed: int) -> list[int]:
    """Initial (a, b, c, counter) for ``seed``, identical to numpy's SFC64."""
    st = np.random.SFC64(seed & _M64).state["state"]["state"]
    return [int(v) for v in st]


def sfc64_step(st: list[int]) -> int:
    a, b, c, w = st
    tmp = (a + b + w) & _M64
    st[3] = (w + 1) & _M64
    st[0] = b ^ (b >> 11)
    st[1] = (c + (c << 3)) & _M64
    st[2] = ((((c << 24) | (c >> 40)) & _M64) + tmp) & _M64
    return tmp


class PrngSource:
    """Seeded SFC64 bit stream."""

    def __init__(self, seed: int):
        self.seed = seed
        self.state = sfc64_seed_state(seed)
        self.word = 0
        self.pos = 64  # bits of ``word`` already served
        self.bits_consumed = 0

    def next_bit(self) -> int:
        if self.pos == 64:
            self.word = sfc64_step(self.state)
            self.pos = 0
        self.pos += 1
        self.bits_consumed += 1
        return (self.word >> (64 - self.pos)) & 1

    def next_word(self) -> int:
        """64 bits at once (consumes 64 bits)."""
        v = 0
        for _ in range(64):
            v = (v << 1) | self.next_bit()
        return v

    # the compiled kernels continue the same stream through this packed view
    def export(self) -> np.ndarray:
        return np.array(self.state + [self.word, self.pos], dtype=np.uint64)

    def absorb(self, packed: np.ndarray, consumed: int) -> None:
        vals = [int(v) for v in packed]
        self.state = vals[:4]
        self.word, self.pos = vals[4], vals[5]
        self.bits_consumed += consumed


class ReplaySource:
    """Serves exactly the given bits, then raises ``SourceExhausted``."""

    def __init__(self, bits: Iterable[int]):
        self.bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("replay stream must contain only 0/1")
        self.bits_consumed = 0

    def next_bit(self) -> int:
        if self.bits_consumed >= len(self.bits):
            raise SourceExhausted(f"replay stream of {len(self.bits)} bits exhausted")
        b = self.bits[self.bits_consumed]
        self.bits_consumed += 1
        return b


class OsSource:
    """Operating-system entropy; never used by the tests."""

    def __init__(self, chunk: int = 64):
        self.chunk = chunk
        self.buf = b""
        self.pos = 0
        self.bits_consumed = 0

    def next_bit(self) -> int:
        if self.pos == 8 * len(self.buf):
            self.buf = os.urandom(self.chunk)
            self.pos = 0
        byte = self.buf[self.pos >> 3]
        b = (byte >> (7 - (self.pos & 7))) & 1
        self.pos += 1
        self.bits_consumed += 1
        return b


class SpySource:
    """Wraps a source and counts calls independently of the inner counter."""

    def __init__(self, inner: BitSource):
        self.inner = inner
        self.calls = 0
        self.log: list[int] = []

    @property
    def bits_consumed(self) -> int:
        return self.inner.bits_consumed

    def next_bit(self) -> int:
        self.calls += 1
        b = self.inner.next_bit()
        self.log.append(b)
        return b


def prng_source(seed: int) -> PrngSource:
    return PrngSource(seed)


def replay_source(stream) -> ReplaySource:
    bits = list(stream)
    if not bits:
        raise ValueError("replay stream must be non-empty")
    return ReplaySource(bits)


def read_replay_file(path: str) -> ReplaySource:
    """ASCII 0/1 characters; whitespace ignored."""
    with open(path) as fh:
        text = "".join(fh.read().split())
    if set(text) - {"0", "1"}:
        raise ValueError(f"{path}: replay files may contain only 0, 1 and whitespace")
    return replay_source(int(ch) for ch in text)
