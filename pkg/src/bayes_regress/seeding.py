"""Deterministic seed derivation.

Every random stream is derived from one 64-bit master seed::

    tag64    = first 8 bytes (little endian) of blake2b(tag.encode("utf-8"))
    seed_rep = splitmix64(splitmix64(master XOR tag64) + index)   (mod 2**64)

and wrapped in a PCG64 generator.  Streams depend only on
``(master, tag, index)``, never on scheduling or worker count.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 finalizer on a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def tag_hash(tag: str) -> int:
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def check_seed(master) -> int:
    if isinstance(master, bool) or not isinstance(master, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {master!r}")
    master = int(master)
    if not 0 <= master <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {master}")
    return master


def mix(master: int, tag: str, index: int) -> int:
    """Seed for stream ``index`` of experiment ``tag``."""
    master = check_seed(master)
    z = splitmix64(master ^ tag_hash(tag))
    return splitmix64((z + int(index)) & MASK64)


def replication_rng(master: int, tag: str, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix(master, tag, index)))


def open_uniform(rng: np.random.Generator, size=None):
    """Uniform draws strictly inside (0, 1), on the 2**-53 lattice midpoints."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / float(1 << 53)
