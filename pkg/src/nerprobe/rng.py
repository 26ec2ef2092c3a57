"""SplitMix64: a tiny, fully specified 64-bit generator.

Used instead of :mod:`random` so that published perturbed test sets and
splits can be regenerated bit-for-bit by any implementation.

    state <- state + 0x9E3779B97F4A7C15            (mod 2**64)
    z <- (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB
    out <- z ^ (z >> 31)

``derive_seed(seed, i)`` is the (i+1)-th output of a generator seeded with
``seed``, so per-split streams are independent and reproducible.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be an unsigned integer")
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, walking from the end."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, i: int) -> int:
    if i < 0:
        raise ValueError("index must be non-negative")
    return mix64((seed + (i + 1) * GAMMA) & MASK64)
