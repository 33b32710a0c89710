"""
Deterministic, splittable random streams.

Every process iteration draws from its own stream, keyed by
(root seed, world, entity, process, iteration). The algorithm is fixed so
that other implementations can reproduce runs:

    key    = first 8 bytes (big endian) of BLAKE2b-64 over the UTF-8 text
             "<seed>\\x1f<world>\\x1f<entity>\\x1f<process>\\x1f<iteration>"
             where <seed> is the root seed reduced to 64 bits, in decimal
    draw_n = splitmix64_mix(key + n * 0x9E3779B97F4A7C15 mod 2**64), n = 1, 2, ...

Integers in [a, b] are taken from draws by rejection sampling (draws at or
above the largest multiple of b - a + 1 below 2**64 are skipped), so they
are exactly uniform. A stream is fully described by its key and the number
of draws taken so far, which is what suspended processes store.

Never use Python's built-in hash() here; it is randomized per process.
"""
import hashlib

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def stream_key(root_seed, world, entity, process, iteration):
    material = "\x1f".join(
        [str(int(root_seed) & MASK64), world, entity, process, str(int(iteration))]
    )
    digest = hashlib.blake2b(material.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class RandomStream:
    """Counter-based stream; `position` is the number of draws taken."""

    def __init__(self, key, position=0):
        self.key = key
        self.position = position

    def next_u64(self):
        self.position += 1
        return mix64((self.key + self.position * GOLDEN_GAMMA) & MASK64)

    def randint(self, a, b):
        """Return a random integer in [a, b], inclusive."""
        if b < a:
            raise ValueError("Empty range %d..%d" % (a, b))
        span = b - a + 1
        limit = ((1 << 64) // span) * span
        while True:
            draw = self.next_u64()
            if draw < limit:
                return a + draw % span

    def random(self):
        """Return a random float in [0.0, 1.0)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def __repr__(self):
        return "RandomStream(key=%#018x, position=%d)" % (self.key, self.position)


def rng_stream(root_seed, world, entity, process, iteration, position=0):
    return RandomStream(
        stream_key(root_seed, world, entity, process, iteration), position
    )
