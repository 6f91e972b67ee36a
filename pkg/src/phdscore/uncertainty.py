"""Per-instance uncertainty measures and per-phoneme aggregation.

For one reference phoneme instance the M aligned predictions form an
empirical distribution p_hat over the phoneme vocabulary plus the
deletion symbol. Its Shannon entropy in bits,

    H = -sum_j p_hat(j) * log2 p_hat(j),

measures how much the stochastic passes disagree; zero-probability
terms contribute zero. Agreement is the fraction of passes matching
the reference symbol. Per phoneme type these are aggregated into

    E_p  fraction of instances whose majority vote misses the reference
    H_p  mean instance entropy
    A_p  mean instance agreement

Deletions count as ordinary outcomes (the deletion symbol is part of
the entropy vocabulary): a phoneme the ensemble keeps dropping is
uncertain, not invisible. Insertions never reach this module.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .align import InstanceEnsemble, majority_vote
from .errors import EmptyStats


@dataclass(frozen=True)
class InstanceStats:
    entropy_bits: float
    agreement: float
    majority_correct: bool


@dataclass(frozen=True)
class PhonemeStats:
    """Raw uncertainty components for one phoneme type."""

    phoneme: str
    count_total: int
    count_errors_maj: int
    e_p: float
    h_p: float
    a_p: float


def instance_entropy(inst: InstanceEnsemble) -> float:
    """Entropy in bits of the prediction distribution over M passes."""
    m = len(inst.predictions)
    if m == 0:
        raise EmptyStats("instance has no predictions")
    h = 0.0
    for count in Counter(inst.predictions).values():
        p = count / m
        h -= p * math.log2(p)
    # clamp the tiny negative float noise of the degenerate case
    return 0.0 if h <= 0.0 else h


def instance_agreement(inst: InstanceEnsemble) -> float:
    """Fraction of the M predictions equal to the reference phoneme."""
    m = len(inst.predictions)
    if m == 0:
        raise EmptyStats("instance has no predictions")
    return sum(1 for sym in inst.predictions if sym == inst.ref_phoneme) / m


def instance_stats(inst: InstanceEnsemble) -> InstanceStats:
    return InstanceStats(
        entropy_bits=instance_entropy(inst),
        agreement=instance_agreement(inst),
        majority_correct=majority_vote(inst) == inst.ref_phoneme,
    )


def phoneme_stats(instances: Iterable[InstanceEnsemble]) -> list[PhonemeStats]:
    """Aggregate instance measures per phoneme type, sorted by symbol.

    Phoneme types with zero occurrences simply do not appear; an empty
    instance collection is a caller bug and raises EmptyStats.
    """
    grouped: dict[str, list[InstanceEnsemble]] = {}
    for inst in instances:
        grouped.setdefault(inst.ref_phoneme, []).append(inst)
    if not grouped:
        raise EmptyStats("no instances to aggregate")
    out: list[PhonemeStats] = []
    for phoneme in sorted(grouped):
        group = grouped[phoneme]
        entropies: list[float] = []
        agreements: list[float] = []
        errors = 0
        for inst in group:
            stats = instance_stats(inst)
            entropies.append(stats.entropy_bits)
            agreements.append(stats.agreement)
            if not stats.majority_correct:
                errors += 1
        n = len(group)
        out.append(
            PhonemeStats(
                phoneme=phoneme,
                count_total=n,
                count_errors_maj=errors,
                e_p=errors / n,
                h_p=math.fsum(entropies) / n,
                a_p=math.fsum(agreements) / n,
            )
        )
    return out


def aggregate_corpus(collections: Sequence[Iterable[InstanceEnsemble]]) -> list[PhonemeStats]:
    """phoneme_stats over the concatenation of several instance sets."""
    flat: list[InstanceEnsemble] = []
    for coll in collections:
        flat.extend(coll)
    return phoneme_stats(flat)
