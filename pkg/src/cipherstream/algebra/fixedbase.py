"""Fixed-base comb precomputation for repeated exponentiation.

One table per (base, window width): entry [j][d] holds base^(d << (w*j)).
An exponentiation then costs about 256/w group operations instead of a
full double-and-add ladder.  Generic over the group: pass the binary
operation and identity, so the same class serves curve points and GT.
"""


class FixedBase:
    __slots__ = ("mul", "identity", "width", "windows", "table")

    def __init__(self, mul, identity, base, width=8, bits=256):
        self.mul = mul
        self.identity = identity
        self.width = width
        self.windows = (bits + width - 1) // width
        self.table = []
        step = base
        for _ in range(self.windows):
            row = [None] * (1 << width)
            acc = step
            row[1] = acc
            for d in range(2, 1 << width):
                acc = mul(acc, step)
                row[d] = acc
            self.table.append(row)
            # advance step to base^(2^width) relative to this window
            step = mul(acc, step)

    def exp(self, k):
        k = int(k)
        if k < 0:
            raise ValueError("fixed-base exponent must be non-negative")
        acc = None
        mask = (1 << self.width) - 1
        j = 0
        while k:
            d = k & mask
            if d:
                ent = self.table[j][d]
                acc = ent if acc is None else self.mul(acc, ent)
            k >>= self.width
            j += 1
            if j >= self.windows and k:
                raise ValueError("exponent exceeds comb precomputation range")
        return acc if acc is not None else self.identity
