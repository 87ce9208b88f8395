"""Brute-force reference computations and random scheme generators for the tests.

The oracle works on the raw JSON document with plain loops over every
(space, key, bit, private key) atom.  It imports nothing from ``twospace``
so it can check the library without sharing its code paths.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Callable

HALF = Fraction(1, 2)


def F(x) -> Fraction:
    return Fraction(x) if not isinstance(x, str) else Fraction(x.replace(" ", ""))


class Oracle:
    def __init__(self, doc: dict):
        self.rho = F(doc["space_prior"])
        self.spaces = {sp: {k: F(w) for k, w in doc["spaces"][sp].items()} for sp in ("S1", "S2")}
        self.enc = {k: (v["0"], v["1"]) for k, v in doc["encryption"].items()}
        rx = doc["receiver"]
        pub = rx["observed_public_key"]
        prior = {d: F(w) for d, w in rx["private_keys"].items()}
        mass = sum(w for d, w in prior.items() if rx["keygen"][d] == pub)
        self.post = {d: w / mass for d, w in prior.items() if rx["keygen"][d] == pub and w > 0}
        self.dec = rx["decryption"]

    def space_w(self, sp, forced=None):
        if forced is not None:
            return Fraction(sp == forced)
        return self.rho if sp == "S1" else 1 - self.rho

    def atoms(self, forced=None):
        """Yield (space, key, bit, ct, priv, weight) with positive weight."""
        for sp in ("S1", "S2"):
            for k, kw in self.spaces[sp].items():
                for b in (0, 1):
                    for d, dw in self.post.items():
                        w = self.space_w(sp, forced) * kw * HALF * dw
                        if w > 0:
                            yield sp, k, b, self.enc[k][b], d, w

    # -- derived quantities -----------------------------------------------
    def image(self, sp):
        return {self.enc[k][b] for k, w in self.spaces[sp].items() if w > 0 for b in (0, 1)}

    def overlap(self, mine, other):
        img = self.image(other)
        return {
            k
            for k, w in self.spaces[mine].items()
            if w > 0 and self.enc[k][0] in img and self.enc[k][1] in img
        }

    def partial(self):
        out = set()
        for mine, other in (("S1", "S2"), ("S2", "S1")):
            img = self.image(other)
            for k, w in self.spaces[mine].items():
                if w > 0 and (self.enc[k][0] in img) != (self.enc[k][1] in img):
                    out.add(k)
        return out

    def q(self, sp):
        return sum(w for _, _, b, ct, d, w in self.atoms(sp) if self.dec[d][ct] == b)

    def tau(self, sp):
        other = "S2" if sp == "S1" else "S1"
        ov = self.overlap(sp, other)
        good = [(k, w) for _, k, b, ct, d, w in self.atoms(sp) if self.dec[d][ct] == b]
        tot = sum(w for _, w in good)
        if tot == 0:
            return None
        return sum(w for k, w in good if k in ov) / tot

    def p_b(self):
        return sum(w for _, _, b, ct, d, w in self.atoms() if self.dec[d][ct] == b)

    def ct_mass(self):
        out = {}
        for *_, ct, _, w in self.atoms():
            out[ct] = out.get(ct, 0) + w
        return out

    def p_t(self):
        m = self.ct_mass()
        out = {}
        for _, _, b, ct, d, w in self.atoms():
            if self.dec[d][ct] == b:
                out[ct] = out.get(ct, 0) + w
        return {ct: out.get(ct, Fraction(0)) / m[ct] for ct in m}

    def posterior_1(self):
        m = self.ct_mass()
        out = {ct: Fraction(0) for ct in m}
        for _, _, b, ct, _, w in self.atoms():
            if b == 1:
                out[ct] += w
        return {ct: out[ct] / m[ct] for ct in m}

    # -- Eve ----------------------------------------------------------------
    def _score(self, pr_guess: Callable[[str, int], Fraction]) -> Fraction:
        """P_E for a transcript-only rule with Pr(output = b | ct) = pr_guess(ct, b)."""
        return sum(w * pr_guess(ct, b) for _, _, b, ct, _, w in self.atoms())

    def emulate(self, ct, b):
        return sum(dw for d, dw in self.post.items() if self.dec[d][ct] == b)

    def assume(self, sp, fallback="abstain"):
        img = self.image(sp)

        def g(ct, b):
            if ct in img:
                return self.emulate(ct, b)
            return HALF if fallback == "uniform" else Fraction(0)

        return self._score(g)

    def mixed(self, lam):
        i2, i1 = self.image("S2"), self.image("S1")

        def g(ct, b):
            e = self.emulate(ct, b)
            return lam * (e if ct in i2 else 0) + (1 - lam) * (e if ct in i1 else 0)

        return self._score(g)

    def bayes(self):
        post = self.posterior_1()

        def g(ct, b):
            p1 = post[ct]
            if p1 == HALF:
                return HALF
            return Fraction((p1 > HALF) == (b == 1))

        return self._score(g)

    def rule(self, table: dict):
        return self._score(lambda ct, b: Fraction(table[ct] == b))

    def receiver_emulation(self):
        return self._score(self.emulate)

    def sigma_t(self):
        m = self.ct_mass()
        acc = {ct: Fraction(0) for ct in m}
        for *_, ct, d, w in self.atoms():
            acc[ct] += w * self.emulate(ct, self.dec[d][ct])
        return {ct: acc[ct] / m[ct] for ct in m}

    def triple(self):
        pools = {}
        for _, k, b, ct, d, _ in self.atoms():
            if self.dec[d][ct] == b:
                pools.setdefault(ct, set()).add((b, k, d))

        def g(ct, b):
            pool = pools.get(ct)
            if not pool:
                return HALF
            return Fraction(sum(1 for t in pool if t[0] == b), len(pool))

        return self._score(g)


# ---------------------------------------------------------------------------
# generators

RHOS = ["1/2", "1/3", "2/3", "1/5", "4/5", "3/8", "5/8", "1/4", "3/4", "0", "1"]


def _fmt(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def _weights(draw_int, labels, allow_zero=False):
    raw = [draw_int(0 if allow_zero else 1, 4) for _ in labels]
    if sum(raw) == 0:
        raw[0] = 1
    tot = sum(raw)
    return {lbl: _fmt(Fraction(r, tot)) for lbl, r in zip(labels, raw)}


def make_scheme(draw_int: Callable[[int, int], int], rho: str | None = None, name="gen") -> dict:
    """Random valid scheme: <=4 keys per space, <=8 ciphertexts, <=3 private keys."""
    n_ct = draw_int(2, 8)
    cts = [f"c{i}" for i in range(n_ct)]
    n1, n2 = draw_int(1, 4), draw_int(1, 4)
    keys1 = [f"a{i}" for i in range(n1)]
    keys2 = [f"b{i}" for i in range(n2)]
    enc = {}
    for k in keys1 + keys2:
        c0 = draw_int(0, n_ct - 1)
        c1 = (c0 + draw_int(1, n_ct - 1)) % n_ct
        enc[k] = {"0": cts[c0], "1": cts[c1]}
    n_priv = draw_int(1, 3)
    privs = [f"d{i}" for i in range(n_priv)]
    keygen = {d: ("P" if i == 0 or draw_int(0, 3) else "Q") for i, d in enumerate(privs)}
    dec = {d: {c: draw_int(0, 1) for c in cts} for d in privs}
    if rho is None:
        rho = RHOS[draw_int(0, len(RHOS) - 1)]
    return {
        "name": name,
        "space_prior": rho,
        "spaces": {"S1": _weights(draw_int, keys1), "S2": _weights(draw_int, keys2)},
        "encryption": enc,
        "receiver": {
            "private_keys": _weights(draw_int, privs),
            "keygen": keygen,
            "decryption": dec,
            "observed_public_key": "P",
        },
    }


def is_clean(doc: dict) -> bool:
    return not Oracle(doc).partial()


def make_clean_scheme(draw_int, rho=None, name="gen-clean", tries=200) -> dict:
    """Random scheme with no partial-overlap keys (rejection sampling)."""
    for _ in range(tries):
        doc = make_scheme(draw_int, rho, name)
        if is_clean(doc):
            return doc
    # Fallback: make every key's pair of ciphertexts exclusive to its space.
    doc = make_scheme(draw_int, rho, name)
    for i, k in enumerate(sorted(doc["encryption"])):
        doc["encryption"][k] = {"0": f"x{i}a", "1": f"x{i}b"}
    for table in doc["receiver"]["decryption"].values():
        for i in range(len(doc["encryption"])):
            table[f"x{i}a"] = draw_int(0, 1)
            table[f"x{i}b"] = draw_int(0, 1)
    return doc


def rng_draw(rng: random.Random):
    return rng.randint


def all_rules(cts):
    for bits in itertools.product((0, 1), repeat=len(cts)):
        yield dict(zip(cts, bits))
