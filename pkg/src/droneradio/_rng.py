"""Deterministic counter-based random streams.

All randomness in the simulator derives from a single master seed. A stream
key is built by folding the SHA-256 tag of a stage name into the seed and
applying one SplitMix64 derivation per index, so any (stage, index, ...)
substream can be evaluated in isolation and in any order -- parallel and
sequential runs produce identical numbers.

The compiled kernel module re-implements the same arithmetic bit for bit;
keep the two in lockstep when editing either.
"""

import hashlib
from math import cos, log, pi, sqrt

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 2.0 * pi


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stage_tag(name: str) -> int:
    """First 8 bytes of SHA-256 of the stage name, as a big-endian integer."""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")


def derive(key: int, index: int) -> int:
    """Derive a child key; index must be a non-negative integer."""
    return _mix((key + (index + 1) * _GAMMA) & _MASK64)


def stream_key(seed: int, stage: str, *indices: int) -> int:
    """Key for the (stage, indices...) substream of a master seed."""
    key = _mix((seed ^ stage_tag(stage)) & _MASK64)
    for ix in indices:
        key = derive(key, ix)
    return key


class Stream:
    """SplitMix64 sequence starting from a derived key."""

    __slots__ = ("_state",)

    def __init__(self, key: int):
        self._state = key & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix(self._state)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def normal(self) -> float:
        """Standard normal via Box-Muller; consumes two words per draw."""
        u1 = ((self.next_u64() >> 11) + 0.5) * _INV_2_53  # (0, 1], keeps log finite
        u2 = (self.next_u64() >> 11) * _INV_2_53
        return sqrt(-2.0 * log(u1)) * cos(_TWO_PI * u2)


def shuffled(items, stream: Stream) -> list:
    """Fisher-Yates shuffle driven by the stream; returns a new list."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = int(stream.uniform() * (i + 1))
        if j > i:  # guards the measure-zero uniform()==1.0-ulp edge
            j = i
        out[i], out[j] = out[j], out[i]
    return out
