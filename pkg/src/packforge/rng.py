"""Deterministic random number generation.

Every randomised operation in this package draws from :class:`Rng`, a
64-bit linear congruential generator seeded through splitmix64.  The exact
constants are part of the package contract so that identical seeds yield
identical outputs across runs (and across reimplementations):

* splitmix64: state advances by ``0x9E3779B97F4A7C15``; each output is
  mixed with the Stafford mix13 multipliers ``0xBF58476D1CE4E5B9`` and
  ``0x94D049BB133111EB``.
* stream: ``state = state * 6364136223846793005 + 1442695040888963407
  (mod 2**64)`` (Knuth's MMIX multiplier), output = upper 32 bits.

Sub-seeds are derived by hashing a label (operation name, indices) into the
splitmix64 stream: ``derive(seed, label)`` = splitmix64 of ``seed XOR
fnv1a64(label)``.  This keeps parallel stages reproducible: a stage keyed
by ``(seed, "split", i, j)`` sees the same stream no matter what ran
before it.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_LCG_MULT = 6364136223846793005
_LCG_ADD = 1442695040888963407

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    z = z ^ (z >> 31)
    return state, z


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def derive_seed(seed: int, *labels) -> int:
    """Deterministic sub-seed for a labelled sub-computation."""
    key = "/".join(str(x) for x in labels).encode()
    _, out = splitmix64((seed ^ fnv1a64(key)) & MASK64)
    return out


class Rng:
    """Seeded 64-bit LCG with splitmix64 seeding (documented constants)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        # run the seed through splitmix64 twice so that small consecutive
        # seeds do not give correlated LCG streams
        s, _ = splitmix64(seed & MASK64)
        _, out = splitmix64(s)
        self._state = out

    def u64(self) -> int:
        self._state = (self._state * _LCG_MULT + _LCG_ADD) & MASK64
        return self._state

    def u32(self) -> int:
        return self.u64() >> 32

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * (2.0**-53)

    def coin(self, p: float) -> bool:
        return self.random() < p

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange of non-positive n")
        # rejection sampling on the top 32 bits keeps the draw unbiased
        lim = (1 << 32) - ((1 << 32) % n)
        while True:
            x = self.u32()
            if x < lim:
                return x % n

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b] inclusive."""
        return a + self.randrange(b - a + 1)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randrange(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def sample(self, seq, k: int) -> list:
        pool = list(seq)
        if k > len(pool):
            raise ValueError("sample larger than population")
        # partial Fisher-Yates: k swaps suffice
        for i in range(k):
            j = i + self.randrange(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def derive(self, *labels) -> "Rng":
        return Rng(derive_seed(self._state, *labels))


def rng_for(seed: int, *labels) -> Rng:
    """Rng keyed by an operation label, independent of call order."""
    return Rng(derive_seed(seed, *labels))
