"""Eavesdropper strategies against the two-space scheme, evaluated exactly.

Every strategy here sees only the transcript (Bob's public key, which is
fixed, and the ciphertext) plus Eve's own coins.  A strategy is therefore a
kernel ``ct -> distribution over guesses``; binding it onto the exact joint
of a protocol run gives Eve's success probability with no sampling error.
Guess labels are the strings ``"0"``, ``"1"`` and ``"abstain"``.
"""

from __future__ import annotations

import enum
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .prob import FiniteDist, argmax_label, bind, condition, pushforward
from .scheme import (
    BIT,
    BITS,
    CT,
    PRIV,
    JointModel,
    SchemeInstance,
    build_joint,
    OverlapAnalysis,
    overlap_analysis,
    receiver_success,
)

ABSTAIN = "abstain"
HALF = Fraction(1, 2)
COIN = FiniteDist.uniform(["0", "1"])


class Strategy(str, enum.Enum):
    ASSUME_S1 = "assume-s1"
    ASSUME_S2 = "assume-s2"
    MIXED = "mixed"
    BAYES_OPTIMAL = "bayes-optimal"
    RECEIVER_EMULATION = "receiver-emulation"
    TRIPLE_SAMPLING = "triple-sampling"


class Fallback(str, enum.Enum):
    ABSTAIN = "abstain"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class TranscriptStat:
    mass: Fraction  # Pr(ct)
    eve_correct: Fraction  # Pr(Eve's guess = bit | ct)
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AttackReport:
    strategy: str
    p_e: Fraction
    per_transcript: dict[str, TranscriptStat]
    formula_prediction: Optional[Fraction] = None
    formula_gap: Optional[Fraction] = None  # p_e - formula_prediction
    notes: tuple[str, ...] = ()
    context: dict = field(default_factory=dict)

    def weighted_average(self) -> Fraction:
        return sum((t.mass * t.eve_correct for t in self.per_transcript.values()), Fraction(0))


@dataclass(frozen=True)
class ConditionCheck:
    q2_gt_q1: bool
    sum_gt_1: bool
    tau1_lt_1: bool
    engagement_gt_1: bool
    verdict_PE_lt_PB: bool
    p_e: Fraction
    p_b: Fraction


Kernel = Callable[[str], FiniteDist]


def _guess_is_bit(lbl) -> bool:
    # lbl = (space, key, bit, ct, priv, ..., guess)
    return lbl[-1] == str(lbl[BIT])


def _evaluate(
    joint: JointModel,
    kernel: Kernel,
    strategy: str,
    diagnostics: Callable[[str], dict] = lambda ct: {},
    **kw,
) -> AttackReport:
    """Bind ``kernel`` onto ``joint`` and score Eve per transcript and overall."""
    cache = {ct: kernel(ct) for ct in joint.transcripts()}
    full = bind(joint.dist, lambda lbl: cache[lbl[CT]])
    p_e = full.prob(_guess_is_bit)
    per = {}
    for ct in joint.transcripts():
        cond = condition(full, lambda lbl: lbl[CT] == ct)
        per[ct] = TranscriptStat(joint.ct_mass(ct), cond.prob(_guess_is_bit), diagnostics(ct))
    return AttackReport(strategy, p_e, per, **kw)


def _emulated_decryption(joint: JointModel, ct: str) -> FiniteDist:
    """Decrypt ``ct`` under a private key drawn from Bob's posterior."""
    s = joint.scheme
    return pushforward(joint.posterior, lambda lbl: str(s.dec(lbl[0], ct)))


def _assume_kernel(joint: JointModel, assumed: str, fallback: Fallback) -> Kernel:
    img = joint.scheme.image(assumed)
    miss = FiniteDist.point(ABSTAIN) if fallback is Fallback.ABSTAIN else COIN

    def kernel(ct):
        return _emulated_decryption(joint, ct) if ct in img else miss

    return kernel


def _assume_formula(s: SchemeInstance, assumed: str, ov: OverlapAnalysis) -> Fraction:
    rho = s.space_prior
    # An undefined tau means q is 0 for that space, so the term vanishes.
    if assumed == "S2":
        engaged = ov.tau1 * ov.q1 if ov.tau1 is not None else 0
        return rho * engaged + (1 - rho) * ov.q2
    engaged = ov.tau2 * ov.q2 if ov.tau2 is not None else 0
    return rho * ov.q1 + (1 - rho) * engaged


def attack_space_assumption(
    s: SchemeInstance, assumed: str = "S2", fallback: Fallback | str = Fallback.ABSTAIN
) -> AttackReport:
    """Eve bets that Alice used ``assumed`` and emulates Bob on matching ciphertexts.

    Ciphertexts no key of ``assumed`` can produce get no answer (abstain,
    scored as a miss) or a fair coin.  The prediction attached to the report
    is ``rho*tau1*q1 + (1-rho)*q2`` for ``S2`` and its mirror for ``S1``;
    it is exact under clean overlap and with the abstain fallback.
    """
    fallback = Fallback(fallback)
    joint = build_joint(s)
    kernel = _assume_kernel(joint, assumed, fallback)
    ov = overlap_analysis(s)
    formula = _assume_formula(s, assumed, ov)
    notes = list(ov.notes)
    if fallback is Fallback.UNIFORM:
        notes.append("uniform fallback: formula assumes abstain")
    strategy = Strategy.ASSUME_S2 if assumed == "S2" else Strategy.ASSUME_S1
    img = s.image(assumed)
    rep = _evaluate(
        joint,
        kernel,
        strategy.value,
        diagnostics=lambda ct: {"engaged": ct in img},
        formula_prediction=formula,
        notes=tuple(notes),
        context={"assumed": assumed, "fallback": fallback.value},
    )
    return _with_gap(rep)


def _with_gap(rep: AttackReport) -> AttackReport:
    if rep.formula_prediction is None:
        return rep
    return AttackReport(
        rep.strategy,
        rep.p_e,
        rep.per_transcript,
        rep.formula_prediction,
        rep.p_e - rep.formula_prediction,
        rep.notes,
        rep.context,
    )


def mix_strategies(s: SchemeInstance, lam: Fraction) -> AttackReport:
    """Eve assumes ``S2`` with probability ``lam`` and ``S1`` otherwise (abstain fallback)."""
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"mixing weight {lam} outside [0, 1]")
    joint = build_joint(s)
    k2 = _assume_kernel(joint, "S2", Fallback.ABSTAIN)
    k1 = _assume_kernel(joint, "S1", Fallback.ABSTAIN)
    choice = FiniteDist.from_weights([(("S2",), lam), (("S1",), 1 - lam)])

    def kernel(ct):
        picked = bind(choice, lambda c: k2(ct) if c[0] == "S2" else k1(ct))
        return picked.marginal(1)

    ov = overlap_analysis(s)
    formula = lam * _assume_formula(s, "S2", ov) + (1 - lam) * _assume_formula(s, "S1", ov)
    rep = _evaluate(
        joint,
        kernel,
        Strategy.MIXED.value,
        formula_prediction=formula,
        notes=ov.notes,
        context={"lambda": lam, "fallback": Fallback.ABSTAIN.value},
    )
    return _with_gap(rep)


def _posterior_kernel(joint: JointModel) -> Kernel:
    def kernel(ct):
        post = joint.given_ct(ct).marginal(BIT)
        (best,), tie = argmax_label(post)
        return COIN if tie else FiniteDist.point(str(best))

    return kernel


def attack_bayes_optimal(s: SchemeInstance) -> AttackReport:
    """Guess the bit with the larger posterior given the ciphertext; coin on ties."""
    joint = build_joint(s)

    def diagnostics(ct):
        post = joint.given_ct(ct).marginal(BIT)
        return {"posterior_1": post[1], "tie": post[0] == post[1]}

    return _evaluate(
        joint, _posterior_kernel(joint), Strategy.BAYES_OPTIMAL.value, diagnostics
    )


def attack_ciphertext_rule(s: SchemeInstance, rule: Mapping[str, int]) -> Fraction:
    """Success probability of the deterministic decision rule ``ct -> bit``."""
    joint = build_joint(s)
    return joint.dist.prob(lambda lbl: rule[lbl[CT]] == lbl[BIT])


def attack_receiver_emulation(s: SchemeInstance) -> AttackReport:
    """Eve draws her own private key from Bob's posterior and decrypts with it.

    Per transcript the report carries ``sigma = Pr(K_C = K_B | T)``,
    ``p = Pr(K_B = K_A | T)``, the product formula
    ``sigma*p + (1-sigma)*(1-p)`` and whether the two agreement events are
    exactly independent given ``T`` (the condition for that formula).
    """
    joint = build_joint(s)
    # (space, key, bit, ct, priv, priv') with priv' an independent copy.
    twin = bind(joint.dist, lambda lbl: joint.posterior)

    def k_b(lbl):
        return s.dec(lbl[PRIV], lbl[CT])

    def k_c(lbl):
        return s.dec(lbl[PRIV + 1], lbl[CT])

    def agree_cb(lbl):
        return k_c(lbl) == k_b(lbl)

    def agree_ba(lbl):
        return k_b(lbl) == lbl[BIT]

    p_e = twin.prob(lambda lbl: k_c(lbl) == lbl[BIT])
    per: dict[str, TranscriptStat] = {}
    notes = []
    predicted = Fraction(0)
    for ct in joint.transcripts():
        given = condition(twin, lambda lbl: lbl[CT] == ct)
        exact = given.prob(lambda lbl: k_c(lbl) == lbl[BIT])
        sigma = given.prob(agree_cb)
        p = given.prob(agree_ba)
        both = given.prob(lambda lbl: agree_cb(lbl) and agree_ba(lbl))
        independent = both == sigma * p
        formula = sigma * p + (1 - sigma) * (1 - p)
        mass = joint.ct_mass(ct)
        predicted += mass * formula
        per[ct] = TranscriptStat(
            mass,
            exact,
            {
                "sigma": sigma,
                "p": p,
                "formula": formula,
                "gap": abs(exact - formula),
                "independent": independent,
            },
        )
        if not independent:
            notes.append(f"independence violated at ct={ct}")

    sigma_g = twin.prob(agree_cb)
    p_g = twin.prob(agree_ba)
    rep = AttackReport(
        Strategy.RECEIVER_EMULATION.value,
        p_e,
        per,
        formula_prediction=predicted,
        notes=tuple(notes),
        context={
            "sigma_global": sigma_g,
            "p_global": p_g,
            "global_formula_misuse": sigma_g * p_g + (1 - sigma_g) * (1 - p_g),
        },
    )
    return _with_gap(rep)


def consistent_triples(
    s: SchemeInstance, ct: str, joint: Optional[JointModel] = None
) -> list[tuple[int, str, str]]:
    """Distinct ``(bit, key, priv)`` with positive mass producing ``ct`` that Bob decrypts correctly."""
    joint = joint or build_joint(s)
    out = {
        (lbl[BIT], lbl[1], lbl[PRIV])
        for lbl, _ in joint.dist
        if lbl[CT] == ct and joint.correct(lbl)
    }
    return sorted(out)


def attack_triple_sampling(s: SchemeInstance) -> AttackReport:
    """Pick a consistent (plaintext, key, private key) triple uniformly and output its bit.

    The pool is weighted uniformly on purpose, ignoring the model's
    probabilities; an empty pool falls back to a fair coin and is flagged.
    """
    joint = build_joint(s)
    notes = []
    pools = {}
    for ct in joint.transcripts():
        pool = consistent_triples(s, ct, joint)
        pools[ct] = pool
        if not pool:
            notes.append(f"empty triple pool at ct={ct}")

    def kernel(ct):
        pool = pools.get(ct)
        if not pool:
            return COIN
        return FiniteDist.from_weights(
            ((str(b),), sum(1 for t in pool if t[0] == b)) for b in BITS
        )

    p_b = joint.dist.prob(joint.correct)
    return _evaluate(
        joint,
        kernel,
        Strategy.TRIPLE_SAMPLING.value,
        lambda ct: {
            "pool_size": len(pools[ct]),
            "pool_bit1": sum(1 for tr in pools[ct] if tr[0] == 1),
        },
        notes=tuple(notes),
        context={"P_B": p_b},
    )


def check_conditions(s: SchemeInstance) -> ConditionCheck:
    """Check ``q2 > q1``, ``q1 + q2 > 1``, ``tau1 < 1`` and whether the S2 bet loses to Bob."""
    ov = overlap_analysis(s)
    if ov.tau1 is None:
        raise ValueError("tau1 undefined: Bob never decrypts correctly under S1")
    p_b, _ = receiver_success(s)
    p_e = attack_space_assumption(s, "S2", Fallback.ABSTAIN).p_e
    return ConditionCheck(
        q2_gt_q1=ov.q2 > ov.q1,
        sum_gt_1=ov.q1 + ov.q2 > 1,
        tau1_lt_1=ov.tau1 < 1,
        engagement_gt_1=ov.q2 + ov.tau1 * ov.q1 > 1,
        verdict_PE_lt_PB=p_e < p_b,
        p_e=p_e,
        p_b=p_b,
    )


def run_strategy(
    s: SchemeInstance,
    strategy: Strategy | str,
    fallback: Fallback | str = Fallback.ABSTAIN,
    lam: Fraction = HALF,
) -> AttackReport:
    strategy = Strategy(strategy)
    if strategy is Strategy.ASSUME_S1:
        return attack_space_assumption(s, "S1", fallback)
    if strategy is Strategy.ASSUME_S2:
        return attack_space_assumption(s, "S2", fallback)
    if strategy is Strategy.MIXED:
        return mix_strategies(s, lam)
    if strategy is Strategy.BAYES_OPTIMAL:
        return attack_bayes_optimal(s)
    if strategy is Strategy.RECEIVER_EMULATION:
        return attack_receiver_emulation(s)
    return attack_triple_sampling(s)
