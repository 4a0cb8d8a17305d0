"""Deterministic seed derivation for parallel replicate streams.

Child seeds are produced by the splitmix64 finalizer applied to
``seed + GOLDEN * (index + 1)`` (64-bit wrap-around arithmetic), one round per
index.  The map is a bijection of the 64-bit state for each fixed index, so
distinct replicate indices never collide for a fixed base seed, and the result
depends only on (seed, indices) -- never on scheduling or worker count.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Derive a 64-bit child seed from a base seed and stream indices."""
    s = seed & _MASK64
    for idx in indices:
        s = _mix64((s + _GOLDEN * ((idx & _MASK64) + 1)) & _MASK64)
    return s
