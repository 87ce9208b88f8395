"""Seeded Monte Carlo runs of the scheme, checked against the exact values.

Randomness comes from a counter-based splitmix64 stream: the ``i``-th
64-bit word for seed ``s`` is ``mix(s + (i + 1) * GOLDEN_GAMMA mod 2**64)``.
Trial ``t`` owns words ``t * SLOTS .. t * SLOTS + SLOTS - 1`` whatever the
chunking, so splitting a run into trial ranges (in any order, on any number
of workers) reproduces the sequential counts exactly.

Draws from rational weights use integer inversion: with all weights over a
common denominator ``D`` a word ``u`` maps to ``floor(u * D / 2**64)`` and
that integer is looked up in the cumulative numerators.  No rejection, no
floats; the bias per outcome is below ``D / 2**64``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .adversary import Fallback, Strategy, run_strategy
from .scheme import SPACES, SchemeInstance, receiver_posterior, receiver_success
from . import adversary

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
DEFAULT_SEED = 20240917
DEFAULT_CONFIDENCE = Fraction(999, 1000)
CHUNK = 1 << 16

# Stream words consumed per trial, by role.
SLOT_SPACE, SLOT_KEY, SLOT_BIT, SLOT_PRIV, SLOT_EVE_PRIV, SLOT_EVE_COIN, SLOT_EVE_MIX = range(7)
SLOTS = 8

_U = np.uint64


def splitmix64(seed: int, index: int) -> int:
    """Scalar reference for one word of the stream."""
    z = (seed + (index + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream(seed: int, start: int, count: int) -> np.ndarray:
    """Words ``start .. start + count - 1`` of the stream as uint64."""
    idx = np.arange(start + 1, start + count + 1, dtype=_U)
    with np.errstate(over="ignore"):
        z = _U(seed & MASK64) + idx * _U(GOLDEN_GAMMA)
        z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


def scaled(u: np.ndarray, d) -> np.ndarray:
    """``floor(u * d / 2**64)`` for 64-bit words and (array of) ``d < 2**32``."""
    d = np.asarray(d, dtype=_U)
    hi, lo = u >> _U(32), u & _U(0xFFFFFFFF)
    return (hi * d + ((lo * d) >> _U(32))) >> _U(32)


class Sampler:
    """Integer-inversion sampler for a finite rational distribution."""

    def __init__(self, weights: list[Fraction]):
        self.denominator = lcm(*(w.denominator for w in weights)) if weights else 1
        if self.denominator >= 1 << 32:
            raise ValueError("common denominator too large for the sampler")
        nums = [int(w * self.denominator) for w in weights]
        self.cumulative = np.cumsum(nums, dtype=np.int64)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        r = scaled(u, self.denominator).astype(np.int64)
        return np.searchsorted(self.cumulative, r, side="right")


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int = DEFAULT_SEED
    strategy: Strategy = Strategy.ASSUME_S2
    confidence: Fraction = DEFAULT_CONFIDENCE
    fallback: Fallback = Fallback.ABSTAIN
    lam: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "fallback", Fallback(self.fallback))
        object.__setattr__(self, "seed", int(self.seed) & MASK64)


@dataclass(frozen=True)
class SimResult:
    trials: int
    hits_b: int
    hits_e: int
    empirical_pb: Fraction
    empirical_pe: Fraction
    hoeffding_radius: float
    exact_pb: Fraction
    exact_pe: Fraction

    @property
    def agrees_pb(self) -> bool:
        return mc_agreement_check(self.exact_pb, self.empirical_pb, self.hoeffding_radius)

    @property
    def agrees_pe(self) -> bool:
        return mc_agreement_check(self.exact_pe, self.empirical_pe, self.hoeffding_radius)

    @property
    def agrees_with_exact(self) -> bool:
        return self.agrees_pb and self.agrees_pe


def hoeffding_radius(trials: int, confidence: Fraction = DEFAULT_CONFIDENCE) -> float:
    delta = 1 - Fraction(confidence)
    return math.sqrt(math.log(2 / delta) / (2 * trials))


def mc_agreement_check(exact: Fraction, empirical, radius: float) -> bool:
    return abs(Fraction(empirical) - Fraction(exact)) <= Fraction(radius)


class _Compiled:
    """Integer tables for one scheme and one strategy."""

    def __init__(self, s: SchemeInstance, cfg: SimConfig):
        self.cts = s.reachable_ciphertexts()
        ct_ix = {c: i for i, c in enumerate(self.cts)}
        post = receiver_posterior(s)
        self.privs = [lbl[0] for lbl, _ in post]
        self.priv_sampler = Sampler([w for _, w in post])
        self.space_sampler = Sampler([s.space_weight(sp) for sp in SPACES])

        self.key_samplers, self.enc = [], []
        for sp in SPACES:
            keys = s.keys(sp)
            self.key_samplers.append(Sampler([s.space(sp)[k] for k in keys]))
            table = np.array(
                [[ct_ix.get(s.enc(k, b), -1) for b in (0, 1)] for k in keys] or [[-1, -1]],
                dtype=np.int64,
            )
            self.enc.append(table)
        # dec[priv, ct] for every posterior key and reachable ciphertext.
        self.dec = np.array(
            [[s.dec(p, c) for c in self.cts] for p in self.privs], dtype=np.int64
        )

        st = cfg.strategy
        self.strategy = st
        self.fallback = cfg.fallback
        self.engaged = {}
        for sp in SPACES:
            img = s.image(sp)
            self.engaged[sp] = np.array([c in img for c in self.cts], dtype=bool)
        lam = Fraction(cfg.lam)
        self.mix_sampler = Sampler([lam, 1 - lam])  # 0 -> assume S2
        if st is Strategy.BAYES_OPTIMAL:
            report = adversary.attack_bayes_optimal(s)
            decision = []
            for c in self.cts:
                d = report.per_transcript[c].diagnostics
                decision.append(2 if d["tie"] else int(d["posterior_1"] > Fraction(1, 2)))
            self.decision = np.array(decision, dtype=np.int64)
        if st is Strategy.TRIPLE_SAMPLING:
            pools = [adversary.consistent_triples(s, c) for c in self.cts]
            self.pool_size = np.array([len(p) for p in pools], dtype=np.int64)
            self.pool_zeros = np.array(
                [sum(1 for t in p if t[0] == 0) for p in pools], dtype=np.int64
            )

    def counts(self, seed: int, start: int, stop: int) -> tuple[int, int]:
        hits_b = hits_e = 0
        for lo in range(start, stop, CHUNK):
            m = min(CHUNK, stop - lo)
            w = stream(seed, lo * SLOTS, m * SLOTS).reshape(m, SLOTS)
            b, e = self._chunk(w)
            hits_b += b
            hits_e += e
        return hits_b, hits_e

    def _chunk(self, w: np.ndarray) -> tuple[int, int]:
        m = w.shape[0]
        space = self.space_sampler(w[:, SLOT_SPACE])
        bit = (w[:, SLOT_BIT] >> _U(63)).astype(np.int64)
        ct = np.empty(m, dtype=np.int64)
        for i in (0, 1):
            sel = space == i
            if sel.any():
                key = self.key_samplers[i](w[sel, SLOT_KEY])
                ct[sel] = self.enc[i][key, bit[sel]]
        priv = self.priv_sampler(w[:, SLOT_PRIV])
        hits_b = int(np.count_nonzero(self.dec[priv, ct] == bit))

        eve_priv = self.priv_sampler(w[:, SLOT_EVE_PRIV])
        emulated = self.dec[eve_priv, ct]
        coin = (w[:, SLOT_EVE_COIN] >> _U(63)).astype(np.int64)
        st = self.strategy
        if st in (Strategy.ASSUME_S1, Strategy.ASSUME_S2, Strategy.MIXED):
            if st is Strategy.MIXED:
                bet_s2 = self.mix_sampler(w[:, SLOT_EVE_MIX]) == 0
                engaged = np.where(
                    bet_s2, self.engaged["S2"][ct], self.engaged["S1"][ct]
                )
                miss = np.full(m, -1, dtype=np.int64)
            else:
                engaged = self.engaged["S2" if st is Strategy.ASSUME_S2 else "S1"][ct]
                miss = coin if self.fallback is Fallback.UNIFORM else np.full(m, -1, dtype=np.int64)
            guess = np.where(engaged, emulated, miss)
        elif st is Strategy.RECEIVER_EMULATION:
            guess = emulated
        elif st is Strategy.BAYES_OPTIMAL:
            dec = self.decision[ct]
            guess = np.where(dec == 2, coin, dec)
        else:
            size = self.pool_size[ct]
            idx = scaled(w[:, SLOT_EVE_COIN], np.maximum(size, 1)).astype(np.int64)
            picked = (idx >= self.pool_zeros[ct]).astype(np.int64)
            guess = np.where(size == 0, coin, picked)
        hits_e = int(np.count_nonzero(guess == bit))
        return hits_b, hits_e


def split_ranges(trials: int, parts: int) -> list[tuple[int, int]]:
    """Contiguous trial ranges covering ``0 .. trials``."""
    step, extra = divmod(trials, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + step + (i < extra)
        out.append((lo, hi))
        lo = hi
    return out


def simulate_counts(
    s: SchemeInstance, cfg: SimConfig, start: int = 0, stop: int | None = None
) -> tuple[int, int]:
    """Receiver and eavesdropper hit counts for trials ``start .. stop``."""
    stop = cfg.trials if stop is None else stop
    return _Compiled(s, cfg).counts(cfg.seed, start, stop)


def simulate_scheme(s: SchemeInstance, cfg: SimConfig) -> SimResult:
    hits_b, hits_e = simulate_counts(s, cfg)
    exact_pb, _ = receiver_success(s)
    exact_pe = run_strategy(s, cfg.strategy, cfg.fallback, cfg.lam).p_e
    return SimResult(
        cfg.trials,
        hits_b,
        hits_e,
        Fraction(hits_b, cfg.trials),
        Fraction(hits_e, cfg.trials),
        hoeffding_radius(cfg.trials, cfg.confidence),
        exact_pb,
        exact_pe,
    )


def simulate_monty_hall(doors: int, strategy: str, trials: int, seed: int = DEFAULT_SEED) -> Fraction:
    """Empirical win rate; the host and the switcher choose uniformly among legal doors."""
    if doors < 3:
        raise ValueError("Monty Hall needs at least 3 doors")
    w = stream(seed, 0, trials * 4).reshape(trials, 4)
    prize = scaled(w[:, 0], doors).astype(np.int64)
    pick = scaled(w[:, 1], doors).astype(np.int64)
    # Host: the r-th door (ascending) that is neither the prize nor the pick.
    n_legal = np.where(prize == pick, doors - 1, doors - 2)
    r = scaled(w[:, 2], n_legal).astype(np.int64)
    opened = _nth_excluding(r, prize, pick)
    if strategy == "stay":
        return Fraction(int(np.count_nonzero(pick == prize)), trials)
    if strategy != "switch":
        raise ValueError(f"unknown strategy {strategy!r}")
    r2 = scaled(w[:, 3], doors - 2).astype(np.int64)
    final = _nth_excluding(r2, pick, opened)
    return Fraction(int(np.count_nonzero(final == prize)), trials)


def _nth_excluding(r: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The ``r``-th smallest door not in ``{a, b}`` (``a`` may equal ``b``)."""
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    out = r.copy()
    out = out + (out >= lo)
    out = out + ((out >= hi) & (hi != lo))
    return out
