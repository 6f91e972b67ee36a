"""Minimum-edit-distance alignment of hypotheses to reference phonemes.

Each of the M stochastic transcriptions is aligned to the reference
sequence with unit-cost Levenshtein dynamic programming, then the M
aligned symbols are regrouped per reference phoneme instance. The
backtrace is fully deterministic: where several edit scripts share the
minimum cost the walk prefers Match, then Substitute, then Delete,
then Insert, so identical inputs always produce identical alignments
on every platform and under any parallel schedule.

Insertions have no reference slot to attach to; they are excluded from
instance statistics and only surfaced as a diagnostic count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyReference, IllegalSymbol, UnknownUtterance
from .manifest import EPSILON, EnsembleRecord, UtteranceRecord

MATCH = "Match"
SUBSTITUTE = "Substitute"
DELETE = "Delete"
INSERT = "Insert"


@dataclass(frozen=True)
class AlignmentOp:
    """One step of an edit script.

    ref_index is the reference position consumed by the op (absent for
    Insert); hyp_symbol is the aligned hypothesis symbol, with EPSILON
    standing in for a deleted reference phoneme.
    """

    kind: str
    ref_index: int | None
    hyp_symbol: str


@dataclass(frozen=True)
class Alignment:
    ops: tuple[AlignmentOp, ...]
    distance: int


@dataclass(frozen=True)
class InstanceEnsemble:
    """The M aligned predictions for one reference phoneme occurrence."""

    utterance_id: str
    ref_index: int
    ref_phoneme: str
    predictions: tuple[str, ...]


@dataclass(frozen=True)
class InstanceCollection:
    """All instances of one utterance plus the insertion side count."""

    instances: tuple[InstanceEnsemble, ...]
    insertions: int


def _check_symbols(seq: Sequence[str], what: str) -> None:
    if EPSILON in seq:
        raise IllegalSymbol(f"{EPSILON!r} is illegal in {what}")


def align(ref: Sequence[str], hyp: Sequence[str]) -> Alignment:
    """Align hyp to ref with unit costs and a deterministic backtrace."""
    if not ref:
        raise EmptyReference("align requires a non-empty reference")
    _check_symbols(ref, "reference")
    _check_symbols(hyp, "hypothesis")

    n, m = len(ref), len(hyp)
    # dist[i][j]: edit distance between ref[:i] and hyp[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, prev = dist[i], dist[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ri != hyp[j - 1])
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)

    ops: list[AlignmentOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and here == dist[i - 1][j - 1]:
            ops.append(AlignmentOp(MATCH, i - 1, hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != hyp[j - 1] and here == dist[i - 1][j - 1] + 1:
            ops.append(AlignmentOp(SUBSTITUTE, i - 1, hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and here == dist[i - 1][j] + 1:
            ops.append(AlignmentOp(DELETE, i - 1, EPSILON))
            i -= 1
        else:
            ops.append(AlignmentOp(INSERT, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return Alignment(ops=tuple(ops), distance=dist[n][m])


def collect_instances(utt: UtteranceRecord, ens: EnsembleRecord) -> InstanceCollection:
    """Regroup the M aligned hypothesis symbols per reference instance."""
    if ens.utterance_id != utt.id:
        raise UnknownUtterance(
            f"ensemble is for {ens.utterance_id!r}, record is {utt.id!r}"
        )
    ref = utt.ref_phonemes
    if not ref:
        # nothing to attach predictions to; every hypothesis symbol is an insertion
        return InstanceCollection(
            instances=(),
            insertions=sum(len(h) for h in ens.hypotheses),
        )
    per_slot: list[list[str]] = [[] for _ in ref]
    insertions = 0
    for hyp in ens.hypotheses:
        alignment = align(ref, hyp)
        for op in alignment.ops:
            if op.kind == INSERT:
                insertions += 1
            else:
                per_slot[op.ref_index].append(op.hyp_symbol)
    instances = tuple(
        InstanceEnsemble(
            utterance_id=utt.id,
            ref_index=i,
            ref_phoneme=ref[i],
            predictions=tuple(per_slot[i]),
        )
        for i in range(len(ref))
    )
    return InstanceCollection(instances=instances, insertions=insertions)


def majority_vote(inst: InstanceEnsemble) -> str:
    """Modal prediction; ties go to the reference phoneme when it is
    among the tied modes, otherwise to the lexicographically smallest."""
    counts: dict[str, int] = {}
    for sym in inst.predictions:
        counts[sym] = counts.get(sym, 0) + 1
    best = max(counts.values())
    tied = [sym for sym, c in counts.items() if c == best]
    if inst.ref_phoneme in tied:
        return inst.ref_phoneme
    return min(tied)
