"""Independent GF(2) linear-algebra oracle used by the LT decoder tests.

Works on bitmask rows (bit i = source i), fully separate from the library's
decoder internals.
"""


def solvable_sources(symbols, k):
    """Set of source ids uniquely determined by the symbol equations.

    Gauss-Jordan over GF(2): a source is determined iff after full
    reduction some row is exactly its unit vector.
    """
    rows = []
    for sym in symbols:
        mask = 0
        for sid in sym.id_set:
            mask |= 1 << sid
        rows.append(mask)

    pivots = {}
    for mask in rows:
        while mask:
            low = mask & -mask
            if low not in pivots:
                pivots[low] = mask
                break
            mask ^= pivots[low]

    for low in sorted(pivots):
        for other in list(pivots):
            if other != low and pivots[other] & low:
                pivots[other] ^= pivots[low]

    return {low.bit_length() - 1 for low, mask in pivots.items() if mask == low}


def solve_payloads(symbols, k, length):
    """Determined sources with payloads, by brute elimination on (mask, bytes)."""
    rows = []
    for sym in symbols:
        mask = 0
        for sid in sym.id_set:
            mask |= 1 << sid
        rows.append([mask, int.from_bytes(sym.payload, "big")])

    pivots = {}
    for mask, value in rows:
        while mask:
            low = mask & -mask
            if low not in pivots:
                pivots[low] = [mask, value]
                break
            mask ^= pivots[low][0]
            value ^= pivots[low][1]

    for low in sorted(pivots):
        for other in list(pivots):
            if other != low and pivots[other][0] & low:
                pivots[other][0] ^= pivots[low][0]
                pivots[other][1] ^= pivots[low][1]

    return {low.bit_length() - 1: value.to_bytes(length, "big")
            for low, (mask, value) in pivots.items() if mask == low}
