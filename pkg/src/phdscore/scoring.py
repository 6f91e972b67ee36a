"""Composite difficulty scoring and sampling-weight mapping.

Raw per-phoneme components are min-max normalized across the phoneme
types of one scoring run, then combined into

    phdscore_p = w_e * E_norm + w_h * H_norm + w_a * (1 - A_norm)

with non-negative weights summing to one (defaults 0.4, 0.2, 0.4; the
agreement term is inverted so that low agreement means difficult).
Utterance-level scores are the mean over the utterance's reference
phonemes, and are mapped linearly onto sampling weights in [1.0, 5.0].

Normalization scope is one run (one speaker's corpus): scores from
different runs are not comparable and are never pooled here. A
component that is constant across phonemes carries no information and
normalizes to 0 rather than 0.5.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    EmptyScores,
    EmptyStats,
    InvalidWeight,
    ParseError,
    UnscoredPhoneme,
)
from .manifest import BackendMeta, UtteranceRecord
from .uncertainty import PhonemeStats

DEFAULT_WEIGHTS = (0.4, 0.2, 0.4)

_WEIGHT_FLOOR = 1.0
_WEIGHT_CEIL = 5.0


@dataclass(frozen=True)
class ScoreWeights:
    """Component weights (error, entropy, agreement); must sum to 1."""

    w_e: float = DEFAULT_WEIGHTS[0]
    w_h: float = DEFAULT_WEIGHTS[1]
    w_a: float = DEFAULT_WEIGHTS[2]

    def __post_init__(self) -> None:
        for name, value in (("w_e", self.w_e), ("w_h", self.w_h), ("w_a", self.w_a)):
            if value < 0:
                raise InvalidWeight(f"{name} must be non-negative, got {value}")
        total = self.w_e + self.w_h + self.w_a
        if abs(total - 1.0) > 1e-9:
            raise InvalidWeight(f"component weights must sum to 1, got {total}")


@dataclass(frozen=True)
class NormalizedStats:
    """One phoneme's normalized components with raw provenance."""

    stats: PhonemeStats
    e_norm: float
    h_norm: float
    a_norm: float


@dataclass(frozen=True)
class ScoreRow:
    stats: PhonemeStats
    e_norm: float
    h_norm: float
    a_norm: float
    phdscore: float

    @property
    def phoneme(self) -> str:
        return self.stats.phoneme


@dataclass(frozen=True)
class PhDScoreTable:
    rows: tuple[ScoreRow, ...]
    weights: ScoreWeights
    backend: BackendMeta | None = None

    def scores(self) -> dict[str, float]:
        return {row.phoneme: row.phdscore for row in self.rows}

    def score_of(self, symbol: str) -> float:
        for row in self.rows:
            if row.phoneme == symbol:
                return row.phdscore
        raise UnscoredPhoneme(symbol)


@dataclass(frozen=True)
class UtteranceWeight:
    utterance_id: str
    mean_score: float
    weight: float


def _minmax(values: Sequence[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def normalize_components(stats: Sequence[PhonemeStats]) -> list[NormalizedStats]:
    """Min-max scale each component across the run's phoneme types."""
    if not stats:
        raise EmptyStats("no phoneme stats to normalize")
    e_norm = _minmax([s.e_p for s in stats])
    h_norm = _minmax([s.h_p for s in stats])
    a_norm = _minmax([s.a_p for s in stats])
    return [
        NormalizedStats(stats=s, e_norm=e, h_norm=h, a_norm=a)
        for s, e, h, a in zip(stats, e_norm, h_norm, a_norm)
    ]


def compose(
    norm: Sequence[NormalizedStats],
    weights: ScoreWeights = ScoreWeights(),
    backend: BackendMeta | None = None,
) -> PhDScoreTable:
    """Combine normalized components into the composite score table."""
    rows = tuple(
        ScoreRow(
            stats=n.stats,
            e_norm=n.e_norm,
            h_norm=n.h_norm,
            a_norm=n.a_norm,
            phdscore=(
                weights.w_e * n.e_norm
                + weights.w_h * n.h_norm
                + weights.w_a * (1.0 - n.a_norm)
            ),
        )
        for n in sorted(norm, key=lambda n: n.stats.phoneme)
    )
    return PhDScoreTable(rows=rows, weights=weights, backend=backend)


def utterance_score(utt: UtteranceRecord, table: PhDScoreTable) -> float:
    """Mean phoneme score over the utterance's reference sequence.

    Repeated phonemes count once per occurrence. An empty reference
    scores 0.0 and emits a warning rather than failing the run.
    """
    if not utt.ref_phonemes:
        warnings.warn(f"utterance {utt.id!r} has no reference phonemes; scored 0.0")
        return 0.0
    scores = table.scores()
    total = 0.0
    for sym in utt.ref_phonemes:
        if sym not in scores:
            raise UnscoredPhoneme(sym)
        total += scores[sym]
    return total / len(utt.ref_phonemes)


def map_weights(scores: Sequence[tuple[str, float]]) -> list[UtteranceWeight]:
    """Map mean scores linearly onto sampling weights in [1.0, 5.0].

    The minimum-score utterance gets exactly 1.0 and the maximum
    exactly 5.0; when all scores are equal (including a single
    utterance) everything gets the base weight 1.0.
    """
    if not scores:
        raise EmptyScores("no utterance scores to map")
    values = [s for _, s in scores]
    lo, hi = min(values), max(values)
    out: list[UtteranceWeight] = []
    for utt_id, score in scores:
        if hi == lo:
            weight = _WEIGHT_FLOOR
        else:
            weight = _WEIGHT_FLOOR + (_WEIGHT_CEIL - _WEIGHT_FLOOR) * (score - lo) / (hi - lo)
        out.append(UtteranceWeight(utterance_id=utt_id, mean_score=score, weight=weight))
    return out


# ---------------------------------------------------------------------------
# on-disk formats

SCORE_COLUMNS = "symbol,count,E_p,H_p,A_p,E_norm,H_norm,A_norm,phdscore"


def serialize_score_table(table: PhDScoreTable) -> str:
    """Render a score table as CSV with metadata header lines."""
    weights = table.weights
    lines = [f"# weights={weights.w_e!r},{weights.w_h!r},{weights.w_a!r}"]
    if table.backend is None:
        lines.append("# backend=none")
    else:
        b = table.backend
        meta = {
            "model_id": b.model_id,
            "M": b.m,
            "p_drop": b.p_drop,
            "adaptation_state": b.adaptation_state,
        }
        lines.append(f"# backend={json.dumps(meta, sort_keys=True)}")
    lines.append(SCORE_COLUMNS)
    for row in table.rows:
        s = row.stats
        lines.append(
            ",".join(
                [
                    s.phoneme,
                    str(s.count_total),
                    repr(s.e_p),
                    repr(s.h_p),
                    repr(s.a_p),
                    repr(row.e_norm),
                    repr(row.h_norm),
                    repr(row.a_norm),
                    repr(row.phdscore),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def load_score_table(path: str) -> PhDScoreTable:
    """Parse a score table written by serialize_score_table."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    weights: ScoreWeights | None = None
    backend: BackendMeta | None = None
    rows: list[ScoreRow] = []
    header_seen = False
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("# weights="):
            parts = stripped[len("# weights="):].split(",")
            if len(parts) != 3:
                raise ParseError(line_no, "weights header needs three comma-separated values")
            try:
                weights = ScoreWeights(*(float(p) for p in parts))
            except ValueError as exc:
                raise ParseError(line_no, f"bad weights header: {stripped!r}") from exc
            continue
        if stripped.startswith("# backend="):
            raw = stripped[len("# backend="):]
            if raw != "none":
                try:
                    meta = json.loads(raw)
                    backend = BackendMeta(
                        model_id=meta["model_id"],
                        m=int(meta["M"]),
                        p_drop=float(meta["p_drop"]),
                        adaptation_state=meta["adaptation_state"],
                    )
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise ParseError(line_no, f"bad backend header: {raw!r}") from exc
            continue
        if stripped.startswith("#"):
            continue
        if stripped == SCORE_COLUMNS:
            header_seen = True
            continue
        if not header_seen:
            raise ParseError(line_no, "data row before column header")
        parts = stripped.split(",")
        if len(parts) != 9:
            raise ParseError(line_no, f"expected 9 columns, got {len(parts)}")
        try:
            count = int(parts[1])
            e_p, h_p, a_p, e_n, h_n, a_n, score = (float(p) for p in parts[2:])
        except ValueError as exc:
            raise ParseError(line_no, f"bad numeric field in {stripped!r}") from exc
        stats = PhonemeStats(
            phoneme=parts[0],
            count_total=count,
            count_errors_maj=round(e_p * count),
            e_p=e_p,
            h_p=h_p,
            a_p=a_p,
        )
        rows.append(
            ScoreRow(stats=stats, e_norm=e_n, h_norm=h_n, a_norm=a_n, phdscore=score)
        )
    if weights is None:
        raise ParseError(0, "missing '# weights=' header")
    if not rows:
        raise EmptyScores(f"score table {path!r} has no rows")
    return PhDScoreTable(rows=tuple(rows), weights=weights, backend=backend)


WEIGHT_COLUMNS = "id,mean_score,weight"


def serialize_weight_manifest(weights: Iterable[UtteranceWeight]) -> str:
    lines = [WEIGHT_COLUMNS]
    for w in sorted(weights, key=lambda w: w.utterance_id):
        lines.append(f"{w.utterance_id},{w.mean_score!r},{w.weight!r}")
    return "\n".join(lines) + "\n"


def load_weight_manifest(path: str) -> list[UtteranceWeight]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    out: list[UtteranceWeight] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped == WEIGHT_COLUMNS:
            continue
        parts = stripped.split(",")
        if len(parts) != 3:
            raise ParseError(line_no, "expected id,mean_score,weight")
        try:
            mean_score, weight = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(line_no, f"bad numeric field in {stripped!r}") from exc
        if parts[0] in seen:
            raise ParseError(line_no, f"duplicate utterance id {parts[0]!r}")
        seen.add(parts[0])
        if not _WEIGHT_FLOOR <= weight <= _WEIGHT_CEIL:
            raise InvalidWeight(
                f"line {line_no}: weight {weight} outside [{_WEIGHT_FLOOR}, {_WEIGHT_CEIL}]"
            )
        if math.isnan(mean_score):
            raise InvalidWeight(f"line {line_no}: mean_score is NaN")
        out.append(UtteranceWeight(parts[0], mean_score, weight))
    if not out:
        raise EmptyScores(f"weight manifest {path!r} has no rows")
    return out
