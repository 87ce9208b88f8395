"""The two-space bit-transmission scheme as explicit finite data.

Alice picks space ``S1`` with probability ``space_prior`` (else ``S2``),
draws a key from that space, draws a uniform secret bit and encrypts it
deterministically.  Bob's private key is drawn from his key prior
conditioned on the public key he published.  Everything here is exact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import jsonschema

from .prob import FiniteDist, ProbabilityError, condition, format_rational, parse_rational

SPACES = ("S1", "S2")
BITS = (0, 1)
HALF = Fraction(1, 2)

# Coordinates of a joint label.
SPACE, KEY, BIT, CT, PRIV = range(5)


class SchemeError(ValueError):
    """A scheme file could not be read or does not match the file format."""


@dataclass(frozen=True)
class ReceiverModel:
    private_keys: dict[str, Fraction]
    keygen: dict[str, str]
    decryption: dict[str, dict[str, int]]
    observed_public_key: str


@dataclass(frozen=True)
class SchemeInstance:
    name: str
    space_prior: Fraction
    space1: dict[str, Fraction]
    space2: dict[str, Fraction]
    encryption: dict[str, tuple[str, str]]
    receiver: ReceiverModel

    def space(self, which: str) -> dict[str, Fraction]:
        return self.space1 if which == "S1" else self.space2

    def space_weight(self, which: str) -> Fraction:
        return self.space_prior if which == "S1" else 1 - self.space_prior

    def enc(self, key: str, bit: int) -> str:
        return self.encryption[key][bit]

    def dec(self, priv: str, ct: str) -> int:
        return self.receiver.decryption[priv][ct]

    def keys(self, which: str) -> list[str]:
        """Keys of a space with positive within-space weight."""
        return sorted(k for k, w in self.space(which).items() if w > 0)

    def image(self, which: str) -> frozenset[str]:
        """Ciphertexts producible by some key of ``which`` (either bit)."""
        return frozenset(self.enc(k, b) for k in self.keys(which) for b in BITS)

    def reachable_ciphertexts(self) -> list[str]:
        """Ciphertexts with positive probability in a protocol run."""
        out = set()
        for sp in SPACES:
            if self.space_weight(sp) > 0:
                out |= self.image(sp)
        return sorted(out)

    def with_space_prior(self, rho: Fraction, name: Optional[str] = None) -> SchemeInstance:
        return SchemeInstance(
            name or self.name, Fraction(rho), self.space1, self.space2, self.encryption, self.receiver
        )


# ---------------------------------------------------------------------------
# validation


def _mass_violation(label: str, weights: dict[str, Fraction]) -> list[str]:
    out = [f"{label} weight of {k} is negative" for k, w in sorted(weights.items()) if w < 0]
    total = sum(weights.values(), Fraction(0))
    if total != 1:
        out.append(f"{label} mass {format_rational(total)} ≠ 1")
    return out


def validate_scheme(s: SchemeInstance) -> list[str]:
    v: list[str] = []
    if not 0 <= s.space_prior <= 1:
        v.append(f"space_prior {format_rational(s.space_prior)} outside [0, 1]")
    both = sorted(set(s.space1) & set(s.space2))
    if both:
        v.append("spaces not disjoint: " + ", ".join(both))
    v += _mass_violation("space1", s.space1)
    v += _mass_violation("space2", s.space2)

    all_keys = set(s.space1) | set(s.space2)
    for k in sorted(all_keys):
        pair = s.encryption.get(k)
        if pair is None or len(pair) != 2 or not all(isinstance(c, str) for c in pair):
            v.append(f"encryption not total: key {k}")
    for k in sorted(set(s.encryption) - all_keys):
        v.append(f"encryption lists unknown key {k}")

    r = s.receiver
    v += _mass_violation("private_keys", r.private_keys)
    for priv in sorted(r.private_keys):
        if priv not in r.keygen:
            v.append(f"keygen missing private key {priv}")
    pub_mass = sum(
        (w for priv, w in r.private_keys.items() if r.keygen.get(priv) == r.observed_public_key),
        Fraction(0),
    )
    if pub_mass <= 0:
        v.append(f"observed public key {r.observed_public_key} has zero mass")
    if v:
        # Reachability and totality checks below assume the structure is sound.
        return v

    cts = set()
    for sp in SPACES:
        cts |= s.image(sp)
    for priv in sorted(r.private_keys):
        if r.private_keys[priv] <= 0 or r.keygen[priv] != r.observed_public_key:
            continue
        table = r.decryption.get(priv, {})
        for ct in sorted(cts):
            if ct not in table:
                v.append(f"decryption {priv} undefined on {ct}")
            elif table[ct] not in BITS:
                v.append(f"decryption {priv} on {ct} is not a bit")
    return v


# ---------------------------------------------------------------------------
# joint model


def receiver_posterior(s: SchemeInstance) -> FiniteDist:
    """Bob's private key given the observed public key, labels ``(priv,)``."""
    r = s.receiver
    prior = FiniteDist.from_mapping(r.private_keys)
    try:
        return condition(prior, lambda lbl: r.keygen[lbl[0]] == r.observed_public_key)
    except ProbabilityError:
        raise ProbabilityError(
            f"observed public key {r.observed_public_key} has zero mass"
        ) from None


@dataclass(frozen=True)
class JointModel:
    """Exact joint over ``(space, key, bit, ct, priv)``."""

    scheme: SchemeInstance
    dist: FiniteDist
    posterior: FiniteDist

    def correct(self, lbl) -> bool:
        return self.scheme.dec(lbl[PRIV], lbl[CT]) == lbl[BIT]

    def transcripts(self) -> list[str]:
        return sorted({lbl[CT] for lbl, _ in self.dist})

    def ct_mass(self, ct: str) -> Fraction:
        return self.dist.prob(lambda lbl: lbl[CT] == ct)

    def given_ct(self, ct: str) -> FiniteDist:
        return condition(self.dist, lambda lbl: lbl[CT] == ct)


def build_joint(s: SchemeInstance, space: Optional[str] = None) -> JointModel:
    """Joint distribution of one protocol run.

    With ``space`` given, Alice's space choice is forced, which yields the
    within-space conditional even when ``space_prior`` puts no mass on it.
    """
    post = receiver_posterior(s)
    if space is None:
        space_w = {sp: s.space_weight(sp) for sp in SPACES}
    else:
        space_w = {sp: Fraction(sp == space) for sp in SPACES}
    atoms = []
    for sp in SPACES:
        for key, kw in s.space(sp).items():
            for bit in BITS:
                ct = s.enc(key, bit)
                for (priv,), pw in post:
                    w = space_w[sp] * kw * HALF * pw
                    if w:
                        atoms.append(((sp, key, bit, ct, priv), w))
    return JointModel(s, FiniteDist(atoms), post)


# ---------------------------------------------------------------------------
# derived quantities


@dataclass(frozen=True)
class OverlapAnalysis:
    S12: frozenset[str]
    S21: frozenset[str]
    q1: Fraction
    q2: Fraction
    tau1: Optional[Fraction]  # None: conditioning event has zero mass
    tau2: Optional[Fraction]
    partial_overlap_keys: frozenset[str]
    # Ciphertext-granular variants: Pr(ct is producible by the other space |
    # space, correct).  They coincide with tau1/tau2 under clean overlap.
    tau1_ct: Optional[Fraction] = None
    tau2_ct: Optional[Fraction] = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def clean(self) -> bool:
        return not self.partial_overlap_keys


def _overlap_sets(s: SchemeInstance, mine: str, other: str) -> tuple[frozenset, frozenset]:
    img = s.image(other)
    full, partial = set(), set()
    for k in s.keys(mine):
        covered = sum(s.enc(k, b) in img for b in BITS)
        if covered == 2:
            full.add(k)
        elif covered == 1:
            partial.add(k)
    return frozenset(full), frozenset(partial)


def _space_stats(s: SchemeInstance, sp: str, overlap: frozenset, other_img: frozenset):
    joint = build_joint(s, space=sp)
    q = joint.dist.prob(joint.correct)
    if q == 0:
        return q, None, None
    ok = condition(joint.dist, joint.correct)
    tau = ok.prob(lambda lbl: lbl[KEY] in overlap)
    tau_ct = ok.prob(lambda lbl: lbl[CT] in other_img)
    return q, tau, tau_ct


def overlap_analysis(s: SchemeInstance) -> OverlapAnalysis:
    s12, p12 = _overlap_sets(s, "S1", "S2")
    s21, p21 = _overlap_sets(s, "S2", "S1")
    q1, tau1, tau1_ct = _space_stats(s, "S1", s12, s.image("S2"))
    q2, tau2, tau2_ct = _space_stats(s, "S2", s21, s.image("S1"))
    notes = []
    if p12 or p21:
        notes.append("partial-overlap keys present: " + ", ".join(sorted(p12 | p21)))
    if tau1 is None:
        notes.append("tau1 undefined: Bob never decrypts correctly under S1")
    if tau2 is None:
        notes.append("tau2 undefined: Bob never decrypts correctly under S2")
    return OverlapAnalysis(
        s12, s21, q1, q2, tau1, tau2, frozenset(p12 | p21), tau1_ct, tau2_ct, tuple(notes)
    )


def receiver_success(s: SchemeInstance) -> tuple[Fraction, dict[str, Fraction]]:
    """Bob's overall success ``P_B`` and his success ``p(T)`` per ciphertext."""
    joint = build_joint(s)
    p_b = joint.dist.prob(joint.correct)
    per = {}
    for ct in joint.transcripts():
        per[ct] = joint.given_ct(ct).prob(joint.correct)
    return p_b, per


def transcript_posteriors(s: SchemeInstance) -> dict[str, FiniteDist]:
    joint = build_joint(s)
    return {ct: joint.given_ct(ct).marginal(BIT) for ct in joint.transcripts()}


# ---------------------------------------------------------------------------
# file format

_RATIONAL = {"type": "string", "pattern": r"^\s*-?\d+\s*(/\s*-?\d+\s*)?$"}
_WEIGHTS = {"type": "object", "additionalProperties": _RATIONAL}

SCHEME_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "space_prior", "spaces", "encryption", "receiver"],
    "properties": {
        "name": {"type": "string"},
        "space_prior": _RATIONAL,
        "spaces": {
            "type": "object",
            "additionalProperties": False,
            "required": ["S1", "S2"],
            "properties": {"S1": _WEIGHTS, "S2": _WEIGHTS},
        },
        "encryption": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": False,
                "required": ["0", "1"],
                "properties": {"0": {"type": "string"}, "1": {"type": "string"}},
            },
        },
        "receiver": {
            "type": "object",
            "additionalProperties": False,
            "required": ["private_keys", "keygen", "decryption", "observed_public_key"],
            "properties": {
                "private_keys": _WEIGHTS,
                "keygen": {"type": "object", "additionalProperties": {"type": "string"}},
                "decryption": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "object",
                        "additionalProperties": {"enum": [0, 1]},
                    },
                },
                "observed_public_key": {"type": "string"},
            },
        },
    },
}


def scheme_from_dict(doc: dict) -> SchemeInstance:
    try:
        jsonschema.validate(doc, SCHEME_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemeError(f"{where}: {exc.message}") from None

    def weights(m):
        return {k: parse_rational(v) for k, v in m.items()}

    try:
        rho = parse_rational(doc["space_prior"])
        rx = doc["receiver"]
        receiver = ReceiverModel(
            private_keys=weights(rx["private_keys"]),
            keygen=dict(rx["keygen"]),
            decryption={p: dict(t) for p, t in rx["decryption"].items()},
            observed_public_key=rx["observed_public_key"],
        )
        return SchemeInstance(
            name=doc["name"],
            space_prior=rho,
            space1=weights(doc["spaces"]["S1"]),
            space2=weights(doc["spaces"]["S2"]),
            encryption={k: (v["0"], v["1"]) for k, v in doc["encryption"].items()},
            receiver=receiver,
        )
    except ProbabilityError as exc:
        raise SchemeError(str(exc)) from None


def scheme_to_dict(s: SchemeInstance) -> dict:
    def weights(m):
        return {k: format_rational(v) for k, v in sorted(m.items())}

    r = s.receiver
    return {
        "name": s.name,
        "space_prior": format_rational(s.space_prior),
        "spaces": {"S1": weights(s.space1), "S2": weights(s.space2)},
        "encryption": {k: {"0": c0, "1": c1} for k, (c0, c1) in sorted(s.encryption.items())},
        "receiver": {
            "private_keys": weights(r.private_keys),
            "keygen": dict(sorted(r.keygen.items())),
            "decryption": {p: dict(sorted(t.items())) for p, t in sorted(r.decryption.items())},
            "observed_public_key": r.observed_public_key,
        },
    }


DATA_DIR = Path(__file__).with_name("data")


def resolve_data_path(path: str | Path) -> Path:
    """Return ``path`` if it exists, else the shipped file of that name."""
    p = Path(path)
    if p.exists():
        return p
    shipped = DATA_DIR / p.name
    if shipped.exists():
        return shipped
    return p


def load_scheme_bytes(path: str | Path) -> tuple[SchemeInstance, bytes]:
    p = resolve_data_path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise SchemeError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemeError(f"{path}: invalid JSON ({exc})") from None
    return scheme_from_dict(doc), raw


def load_scheme(path: str | Path) -> SchemeInstance:
    return load_scheme_bytes(path)[0]


def input_digest(raw: bytes) -> str:
    return "sha256:" + hashlib.sha256(raw).hexdigest()
