"""LT (Luby Transform) coding primitives for the DSA-I baseline.

An encoded symbol is the XOR of a random subset of equal-length source
payloads, tagged with the ids of the sources it covers.  Symbol degrees are
drawn from a soliton distribution; decoding is the standard peeling process
that repeatedly resolves degree-1 symbols and substitutes them into the rest.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass

__all__ = [
    "DegreeDistribution",
    "EncodedSymbol",
    "CorruptSymbolError",
    "ideal_soliton",
    "robust_soliton",
    "lt_encode",
    "lt_decode",
    "xor_bytes",
]

_SUM_TOL = 1e-12


class CorruptSymbolError(ValueError):
    """Symbols are mutually inconsistent (no XOR assignment satisfies them)."""


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability distribution over symbol degrees 1..k."""

    k: int
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.probabilities) != self.k:
            raise ValueError("need one probability per degree 1..k")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("degree probabilities must be non-negative")
        total = math.fsum(self.probabilities)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"degree probabilities sum to {total}, not 1")
        object.__setattr__(self, "_cdf", tuple(
            itertools.accumulate(self.probabilities)))

    def expected_degree(self) -> float:
        return math.fsum((i + 1) * p for i, p in enumerate(self.probabilities))

    def sample(self, rng: random.Random) -> int:
        """Draw a degree in 1..k by inverse CDF."""
        return bisect.bisect_left(self._cdf, rng.random()) + 1


def ideal_soliton(k: int) -> DegreeDistribution:
    """rho(1) = 1/k and rho(i) = 1/(i(i-1)) for 2 <= i <= k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    probs = [1.0 / k] + [1.0 / (i * (i - 1)) for i in range(2, k + 1)]
    return DegreeDistribution(k=k, probabilities=tuple(probs))


def robust_soliton(k: int, c: float = 0.1, delta: float = 0.5) -> DegreeDistribution:
    """Ideal soliton plus the ripple boost tau, renormalized.

    With R = c * ln(k/delta) * sqrt(k) and the spike position s = floor(k/R):
    tau(i) = R/(i*k) for i < s, tau(s) = R * ln(R/delta) / k, else 0.  The
    spike term is clamped at zero for tiny k where R < delta.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")

    rho = [1.0 / k] + [1.0 / (i * (i - 1)) for i in range(2, k + 1)]
    tau = [0.0] * k
    ratio = c * math.log(k / delta) * math.sqrt(k)
    spike = min(int(k / ratio), k)
    if spike >= 1:
        for i in range(1, spike):
            tau[i - 1] = ratio / (i * k)
        tau[spike - 1] = max(ratio * math.log(ratio / delta) / k, 0.0)
    total = math.fsum(rho) + math.fsum(tau)
    probs = tuple((r + t) / total for r, t in zip(rho, tau))
    return DegreeDistribution(k=k, probabilities=probs)


@dataclass(frozen=True)
class EncodedSymbol:
    """XOR of the payloads named by ``id_set``."""

    id_set: frozenset[int]
    payload: bytes

    def __post_init__(self):
        if not self.id_set:
            raise ValueError("encoded symbol must cover at least one source")

    def describe(self) -> str:
        ids = ",".join(str(i) for i in sorted(self.id_set))
        return f"ids={{{ids}}} len={len(self.payload)}"


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError(f"payload lengths differ: {len(a)} vs {len(b)}")
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def lt_encode(payloads: list[bytes], count: int, dist: DegreeDistribution,
              rng: random.Random) -> list[EncodedSymbol]:
    """Generate ``count`` i.i.d. encoded symbols over ``payloads``.

    Each symbol draws a degree from ``dist`` (capped at the number of
    sources) and XORs that many distinct uniformly chosen payloads.
    """
    k = len(payloads)
    if k == 0:
        raise ValueError("need at least one source payload")
    symbols = []
    for _ in range(count):
        degree = min(dist.sample(rng), k)
        chosen = rng.sample(range(k), degree)
        payload = payloads[chosen[0]]
        for idx in chosen[1:]:
            payload = xor_bytes(payload, payloads[idx])
        symbols.append(EncodedSymbol(id_set=frozenset(chosen), payload=payload))
    return symbols


def lt_decode(symbols: list[EncodedSymbol], k: int,
              method: str = "inactivation") -> dict[int, bytes]:
    """Decode by peeling, then (by default) solve the stuck residual.

    Peeling resolves degree-1 symbols, XORs them out of the rest, and
    repeats to a fixpoint.  With ``method="inactivation"`` the residual
    system left at that fixpoint is additionally solved by GF(2)
    elimination, recovering every source the symbol set determines; this is
    how practical fountain decoders work.  ``method="peel"`` stops at the
    peeling fixpoint.

    Returns every source id it could recover (possibly none or all);
    partial recovery is normal.  Raises :class:`CorruptSymbolError` when the
    symbol set is self-contradictory — e.g. two symbols over the same id set
    with different payloads, or symbols that reduce to an empty id set with
    a nonzero payload.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if method not in ("inactivation", "peel"):
        raise ValueError(f"unknown decode method {method!r}")

    seen: dict[frozenset[int], bytes] = {}
    for sym in symbols:
        prior = seen.setdefault(sym.id_set, sym.payload)
        if prior != sym.payload:
            raise CorruptSymbolError(
                f"conflicting payloads for id set {sorted(sym.id_set)}")

    remaining = [[set(sym.id_set), sym.payload] for sym in symbols]
    covering: dict[int, list[int]] = {}
    for idx, (ids, _) in enumerate(remaining):
        for sid in ids:
            covering.setdefault(sid, []).append(idx)

    recovered: dict[int, bytes] = {}
    ripple = [idx for idx, (ids, _) in enumerate(remaining) if len(ids) == 1]
    while ripple:
        idx = ripple.pop()
        ids, payload = remaining[idx]
        if len(ids) != 1:
            continue
        (sid,) = ids
        if sid in recovered:
            if recovered[sid] != payload:
                raise CorruptSymbolError(f"conflicting payloads for source {sid}")
            continue
        recovered[sid] = payload
        for other in covering.get(sid, ()):
            o_ids, o_payload = remaining[other]
            if sid in o_ids:
                o_ids.discard(sid)
                o_payload = xor_bytes(o_payload, payload)
                remaining[other] = [o_ids, o_payload]
                if len(o_ids) == 1:
                    ripple.append(other)
                elif not o_ids and any(o_payload):
                    raise CorruptSymbolError(
                        "symbol reduced to empty id set with nonzero payload")

    if method == "inactivation":
        residual = [(ids, payload) for ids, payload in remaining if ids]
        recovered.update(_solve_residual(residual, k))
    return recovered


def _solve_residual(residual: list[tuple[set[int], bytes]], k: int) -> dict[int, bytes]:
    """Gauss-Jordan over GF(2); returns the uniquely determined sources."""
    pivots: dict[int, list] = {}
    for ids, payload in residual:
        mask = 0
        for sid in ids:
            mask |= 1 << sid
        while mask:
            low = mask & -mask
            if low not in pivots:
                pivots[low] = [mask, payload]
                break
            mask ^= pivots[low][0]
            payload = xor_bytes(payload, pivots[low][1])
        else:
            if any(payload):
                raise CorruptSymbolError(
                    "inconsistent symbols: residual reduced to 0 = nonzero")

    # Back-substitute so each pivot bit appears in exactly one row; rows
    # reduced to a single bit are then uniquely determined sources.
    for low in sorted(pivots):
        row_mask, row_payload = pivots[low]
        for other, entry in pivots.items():
            if other != low and entry[0] & low:
                entry[0] ^= row_mask
                entry[1] = xor_bytes(entry[1], row_payload)

    solved = {}
    for low, (mask, payload) in pivots.items():
        if mask == low:
            solved[low.bit_length() - 1] = payload
    return solved
