"""Independent reference for the seed mixer and the opponent intent stream.

Prints the golden values frozen into tests/unit/test_seeds.cpp. Written from
the published SplitMix64 and MT19937-64 definitions, not from the C++ code.
"""

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z):
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


def derive_seed(master, cell, iteration):
    h0 = mix64((master + GAMMA) & MASK)
    h1 = mix64((h0 + cell + GAMMA) & MASK)
    return mix64((h1 + iteration + GAMMA) & MASK)


class MT19937_64:
    N, M = 312, 156
    MATRIX_A = 0xB5026F5AA96619E9
    UPPER, LOWER = 0xFFFFFFFF80000000, 0x7FFFFFFF

    def __init__(self, seed):
        self.mt = [0] * self.N
        self.mt[0] = seed & MASK
        for i in range(1, self.N):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.idx = self.N

    def _twist(self):
        for i in range(self.N):
            x = (self.mt[i] & self.UPPER) | (self.mt[(i + 1) % self.N] & self.LOWER)
            xa = x >> 1
            if x & 1:
                xa ^= self.MATRIX_A
            self.mt[i] = self.mt[(i + self.M) % self.N] ^ xa
        self.idx = 0

    def next(self):
        if self.idx >= self.N:
            self._twist()
        x = self.mt[self.idx]
        self.idx += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & MASK


if __name__ == "__main__":
    # std::mt19937_64 default-seeded (5489): the 10000th output is fixed by the standard.
    g = MT19937_64(5489)
    for _ in range(9999):
        g.next()
    print("mt19937_64 10000th:", g.next())

    for args in [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (42, 7, 3)]:
        print("derive_seed%s = 0x%016X" % (args, derive_seed(*args)))

    OPPONENT_TAG = 0x42
    game_seed = 1
    stream = MT19937_64(derive_seed(game_seed, OPPONENT_TAG, 0))
    intents = "".join("D" if stream.next() >> 63 else "C" for _ in range(10))
    print("intents(game_seed=1):", intents)

    stream = MT19937_64(derive_seed(game_seed, OPPONENT_TAG, 0))
    draws = ["D" if ((stream.next() >> 11) * 2.0 ** -53) < 0.3 else "C" for _ in range(10)]
    print("random(0.3)(game_seed=1):", "".join(draws))
