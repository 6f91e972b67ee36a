"""CER/WER computation and signed percentage-point delta reports.

Error rates are plain Levenshtein distances normalized by reference
length. Text is normalized first: lowercased, the punctuation set
.,;:!? removed, whitespace collapsed to single spaces. CER is computed
over the resulting character string (spaces count as characters), WER
over its whitespace-split words. Corpus rates aggregate by summing
distances and reference lengths, never by averaging per-utterance
rates. Rates above 1.0 are legal when insertions dominate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import EmptyReference, ParseError, SplitMismatch

_PUNCTUATION = ".,;:!?"
_STRIP_TABLE = str.maketrans("", "", _PUNCTUATION)


@dataclass(frozen=True)
class ErrorRates:
    """Corpus- or utterance-level rates with reference token counts."""

    cer: float
    wer: float
    token_counts: tuple[int, int]  # (reference chars, reference words)


@dataclass(frozen=True)
class DeltaRow:
    split: str
    delta_cer_pp: float
    delta_wer_pp: float


def normalize_text(text: str) -> str:
    return " ".join(text.lower().translate(_STRIP_TABLE).split())


def edit_distance(ref: Sequence, hyp: Sequence) -> int:
    """Unit-cost Levenshtein distance over arbitrary token sequences."""
    if len(ref) < len(hyp):
        # keep the rolling row on the shorter side; distance is symmetric
        ref, hyp = hyp, ref
    previous = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        current = [i]
        for j, h in enumerate(hyp, start=1):
            current.append(
                min(
                    previous[j - 1] + (r != h),
                    previous[j] + 1,
                    current[j - 1] + 1,
                )
            )
        previous = current
    return previous[-1]


def cer(ref: str, hyp: str) -> float:
    """Character error rate after text normalization."""
    ref_norm = normalize_text(ref)
    if not ref_norm:
        raise EmptyReference(f"reference {ref!r} is empty after normalization")
    return edit_distance(ref_norm, normalize_text(hyp)) / len(ref_norm)


def wer(ref: str, hyp: str) -> float:
    """Word error rate after text normalization."""
    ref_words = normalize_text(ref).split()
    if not ref_words:
        raise EmptyReference(f"reference {ref!r} is empty after normalization")
    return edit_distance(ref_words, normalize_text(hyp).split()) / len(ref_words)


def corpus_rates(pairs: Iterable[tuple[str, str]]) -> ErrorRates:
    """Aggregate rates over (ref, hyp) pairs: sum distances / sum lengths."""
    char_dist = word_dist = char_len = word_len = 0
    seen = False
    for ref, hyp in pairs:
        seen = True
        ref_norm = normalize_text(ref)
        hyp_norm = normalize_text(hyp)
        if not ref_norm:
            raise EmptyReference(f"reference {ref!r} is empty after normalization")
        char_dist += edit_distance(ref_norm, hyp_norm)
        char_len += len(ref_norm)
        word_dist += edit_distance(ref_norm.split(), hyp_norm.split())
        word_len += len(ref_norm.split())
    if not seen:
        raise EmptyReference("no transcript pairs given")
    return ErrorRates(
        cer=char_dist / char_len,
        wer=word_dist / word_len,
        token_counts=(char_len, word_len),
    )


def delta_report(
    baseline: Mapping[str, ErrorRates],
    treated: Mapping[str, ErrorRates],
) -> list[DeltaRow]:
    """Signed percentage-point changes per split (negative = improvement)."""
    if set(baseline) != set(treated):
        raise SplitMismatch(
            f"splits differ: baseline {sorted(baseline)} vs treated {sorted(treated)}"
        )
    rows: list[DeltaRow] = []
    for split in sorted(baseline):
        rows.append(
            DeltaRow(
                split=split,
                delta_cer_pp=100.0 * (treated[split].cer - baseline[split].cer),
                delta_wer_pp=100.0 * (treated[split].wer - baseline[split].wer),
            )
        )
    return rows


def format_pp(value: float) -> str:
    """Render a percentage-point delta with an explicit sign: -6.73, +2.00."""
    return f"{value:+.2f}"


def serialize_delta_rows(rows: Sequence[DeltaRow]) -> str:
    """Per-split delta table: split, signed delta CER, signed delta WER."""
    lines = ["split,delta_cer_pp,delta_wer_pp"]
    for row in rows:
        lines.append(f"{row.split},{format_pp(row.delta_cer_pp)},{format_pp(row.delta_wer_pp)}")
    return "\n".join(lines) + "\n"


def serialize_source_rates(
    rows: Sequence[tuple[str, str, ErrorRates]],
) -> str:
    """Rates by dataset and uncertainty source, percentages to 2 decimals."""
    lines = ["dataset,uncertainty_source,cer,wer"]
    for dataset, source, rates in rows:
        lines.append(f"{dataset},{source},{100.0 * rates.cer:.2f},{100.0 * rates.wer:.2f}")
    return "\n".join(lines) + "\n"


RATES_COLUMNS = "split,cer,wer,ref_chars,ref_words"


def serialize_rates(rates_by_split: Mapping[str, ErrorRates]) -> str:
    """Full-precision per-split rates, the input format for delta reports."""
    lines = [RATES_COLUMNS]
    for split in sorted(rates_by_split):
        r = rates_by_split[split]
        lines.append(
            f"{split},{r.cer!r},{r.wer!r},{r.token_counts[0]},{r.token_counts[1]}"
        )
    return "\n".join(lines) + "\n"


def load_rates(path: str) -> dict[str, ErrorRates]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    out: dict[str, ErrorRates] = {}
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped == RATES_COLUMNS:
            continue
        parts = stripped.split(",")
        if len(parts) != 5:
            raise ParseError(line_no, f"expected {RATES_COLUMNS}")
        if parts[0] in out:
            raise ParseError(line_no, f"duplicate split {parts[0]!r}")
        try:
            out[parts[0]] = ErrorRates(
                cer=float(parts[1]),
                wer=float(parts[2]),
                token_counts=(int(parts[3]), int(parts[4])),
            )
        except ValueError as exc:
            raise ParseError(line_no, f"bad numeric field in {stripped!r}") from exc
    if not out:
        raise ParseError(0, f"rates file {path!r} has no rows")
    return out
