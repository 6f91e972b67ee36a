"""Domain records and on-disk formats for the transcription pipeline.

The package moves data between tools as small line-oriented text files:

* inventory: one phoneme symbol per line, ``#`` comments allowed
* manifest: one JSON object per line with fields ``id``, ``text``,
  ``ref_phonemes`` (space-separated symbols), optional ``audio_path``,
  and ``split``
* ensemble file: one JSON object per line with fields ``utterance_id``,
  ``hypotheses`` (list of space-separated symbol strings) and
  ``backend`` (``model_id``, ``M``, ``p_drop``, ``adaptation_state``)
* clinical report: ``symbol<TAB>difficult{0|1}[<TAB>severity]`` lines
  plus ``#report_id=`` and ``#date=`` headers
* lexicon: ``word<TAB>symbol symbol ...`` lines

All loaders validate against an explicit phoneme inventory and raise
the typed errors from :mod:`phdscore.errors`; none of them mutate
process state, so loaded records are safe to share across threads.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DegenerateLabels,
    DuplicateId,
    EnsembleArityError,
    IllegalSymbol,
    OovWord,
    ParseError,
    UnknownSymbol,
    UnknownUtterance,
)

# Reserved symbol for a deletion slot in alignments. It is never a legal
# inventory member and never appears in reference sequences or hypothesis
# files; it only enters the picture when alignments are computed.
EPSILON = "∅"

SPLITS = ("train", "test_nonnormative", "test_normative")
ADAPTATION_STATES = ("pretrained", "finetuned", "simulated")


@dataclass(frozen=True)
class Inventory:
    """An ordered phoneme inventory (IPA or ARPAbet-style symbols)."""

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for sym in self.symbols:
            if not sym or any(ch.isspace() for ch in sym):
                raise IllegalSymbol(f"inventory symbol {sym!r} is empty or has whitespace")
            if sym == EPSILON:
                raise IllegalSymbol(f"{EPSILON!r} is reserved and cannot be an inventory member")
            if sym in seen:
                raise DuplicateId(f"inventory symbol {sym!r} declared twice")
            seen.add(sym)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.symbols

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class UtteranceRecord:
    """One recorded utterance with its reference phoneme sequence."""

    id: str
    text: str
    ref_phonemes: tuple[str, ...]
    split: str
    audio_path: str | None = None


@dataclass(frozen=True)
class BackendMeta:
    """Provenance of an ensemble: which model produced it and how."""

    model_id: str
    m: int = 20
    p_drop: float = 0.01
    adaptation_state: str = "pretrained"

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ParseError(0, f"backend M must be >= 1, got {self.m}")
        if not 0.0 <= self.p_drop <= 1.0:
            raise ParseError(0, f"backend p_drop must be in [0,1], got {self.p_drop}")
        if self.adaptation_state not in ADAPTATION_STATES:
            raise ParseError(
                0,
                f"backend adaptation_state must be one of {ADAPTATION_STATES},"
                f" got {self.adaptation_state!r}",
            )


@dataclass(frozen=True)
class EnsembleRecord:
    """M stochastic transcriptions of one utterance."""

    utterance_id: str
    hypotheses: tuple[tuple[str, ...], ...]
    backend: BackendMeta


@dataclass(frozen=True)
class ClinicalLabel:
    difficult: bool
    severity: int | None = None


@dataclass(frozen=True)
class ClinicalReport:
    """Per-phoneme difficulty labels from a logopedic report."""

    report_id: str
    date: datetime.date
    labels: Mapping[str, ClinicalLabel] = field(default_factory=dict)

    def binary_labels(self, severity_threshold: int | None = None) -> dict[str, bool]:
        """Collapse labels to booleans.

        By default the explicit difficult bit is used. When a severity
        threshold is given, phonemes carrying a severity grade are
        instead labeled difficult iff severity >= threshold; phonemes
        without a grade keep their difficult bit.
        """
        out: dict[str, bool] = {}
        for sym, label in self.labels.items():
            if severity_threshold is not None and label.severity is not None:
                out[sym] = label.severity >= severity_threshold
            else:
                out[sym] = label.difficult
        return out


@dataclass(frozen=True)
class Lexicon:
    """Word-to-pronunciation map used to build reference sequences."""

    entries: Mapping[str, tuple[str, ...]]

    def lookup(self, word: str) -> tuple[str, ...]:
        pron = self.entries.get(word.lower())
        if pron is None:
            raise OovWord(f"word {word!r} not in lexicon")
        return pron


def lexicon_lookup(lexicon: Lexicon, word: str) -> tuple[str, ...]:
    """Case-folding pronunciation lookup; raises OovWord when absent."""
    return lexicon.lookup(word)


# ---------------------------------------------------------------------------
# loading helpers


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _iter_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, object) for each non-blank line of a JSONL file."""
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ParseError(line_no, "expected a JSON object")
        yield line_no, obj


def _parse_symbols(raw: object, line_no: int, inventory: Inventory, what: str) -> tuple[str, ...]:
    if not isinstance(raw, str):
        raise ParseError(line_no, f"{what} must be a space-separated symbol string")
    symbols = tuple(raw.split())
    for sym in symbols:
        if sym == EPSILON:
            raise IllegalSymbol(f"line {line_no}: {EPSILON!r} is reserved and illegal in {what}")
        if sym not in inventory:
            raise UnknownSymbol(line_no, sym)
    return symbols


def load_inventory(path: str) -> Inventory:
    """Load a phoneme inventory, one symbol per line, '#' comments allowed."""
    symbols: list[str] = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if len(stripped.split()) != 1:
            raise ParseError(line_no, f"expected one symbol per line, got {stripped!r}")
        symbols.append(stripped)
    if not symbols:
        raise ParseError(0, f"inventory {path!r} declares no symbols")
    return Inventory(tuple(symbols))


_MANIFEST_KEYS = {"id", "text", "ref_phonemes", "audio_path", "split"}


def load_manifest(path: str, inventory: Inventory) -> list[UtteranceRecord]:
    """Load utterance records, validating ids, splits and symbols."""
    records: list[UtteranceRecord] = []
    seen_ids: set[str] = set()
    for line_no, obj in _iter_jsonl(path):
        unknown = set(obj) - _MANIFEST_KEYS
        if unknown:
            raise ParseError(line_no, f"unknown manifest fields {sorted(unknown)}")
        try:
            rec_id = obj["id"]
            text = obj["text"]
            ref_raw = obj["ref_phonemes"]
            split = obj["split"]
        except KeyError as exc:
            raise ParseError(line_no, f"missing required field {exc.args[0]!r}") from exc
        if not isinstance(rec_id, str) or not rec_id:
            raise ParseError(line_no, "id must be a non-empty string")
        if not isinstance(text, str):
            raise ParseError(line_no, "text must be a string")
        if split not in SPLITS:
            raise ParseError(line_no, f"split must be one of {SPLITS}, got {split!r}")
        audio_path = obj.get("audio_path")
        if audio_path is not None and not isinstance(audio_path, str):
            raise ParseError(line_no, "audio_path must be a string when present")
        if rec_id in seen_ids:
            raise DuplicateId(f"line {line_no}: duplicate utterance id {rec_id!r}")
        seen_ids.add(rec_id)
        ref_phonemes = _parse_symbols(ref_raw, line_no, inventory, "ref_phonemes")
        records.append(
            UtteranceRecord(
                id=rec_id,
                text=text,
                ref_phonemes=ref_phonemes,
                split=split,
                audio_path=audio_path,
            )
        )
    return records


def serialize_manifest(records: Iterable[UtteranceRecord]) -> str:
    """Render records back to manifest lines, canonically ordered by id."""
    lines = []
    for rec in sorted(records, key=lambda r: r.id):
        obj: dict[str, object] = {
            "id": rec.id,
            "text": rec.text,
            "ref_phonemes": " ".join(rec.ref_phonemes),
            "split": rec.split,
        }
        if rec.audio_path is not None:
            obj["audio_path"] = rec.audio_path
        lines.append(json.dumps(obj, ensure_ascii=False, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


_ENSEMBLE_KEYS = {"utterance_id", "hypotheses", "backend"}
_BACKEND_KEYS = {"model_id", "M", "p_drop", "adaptation_state"}


def load_ensemble(
    path: str,
    manifest: Sequence[UtteranceRecord],
    inventory: Inventory,
) -> list[EnsembleRecord]:
    """Load an ensemble file and resolve it against a loaded manifest."""
    known_ids = {rec.id for rec in manifest}
    records: list[EnsembleRecord] = []
    seen: set[str] = set()
    for line_no, obj in _iter_jsonl(path):
        unknown = set(obj) - _ENSEMBLE_KEYS
        if unknown:
            raise ParseError(line_no, f"unknown ensemble fields {sorted(unknown)}")
        try:
            utt_id = obj["utterance_id"]
            hyps_raw = obj["hypotheses"]
            backend_raw = obj["backend"]
        except KeyError as exc:
            raise ParseError(line_no, f"missing required field {exc.args[0]!r}") from exc
        if not isinstance(utt_id, str) or not utt_id:
            raise ParseError(line_no, "utterance_id must be a non-empty string")
        if utt_id not in known_ids:
            raise UnknownUtterance(f"line {line_no}: utterance_id {utt_id!r} not in manifest")
        if utt_id in seen:
            raise DuplicateId(f"line {line_no}: duplicate ensemble for utterance {utt_id!r}")
        seen.add(utt_id)
        if not isinstance(backend_raw, dict):
            raise ParseError(line_no, "backend must be an object")
        unknown_b = set(backend_raw) - _BACKEND_KEYS
        if unknown_b:
            raise ParseError(line_no, f"unknown backend fields {sorted(unknown_b)}")
        try:
            backend = BackendMeta(
                model_id=str(backend_raw["model_id"]),
                m=int(backend_raw["M"]),
                p_drop=float(backend_raw["p_drop"]),
                adaptation_state=str(backend_raw["adaptation_state"]),
            )
        except KeyError as exc:
            raise ParseError(line_no, f"backend missing field {exc.args[0]!r}") from exc
        except ParseError as exc:
            raise ParseError(line_no, str(exc)) from exc
        if not isinstance(hyps_raw, list):
            raise ParseError(line_no, "hypotheses must be a list of symbol strings")
        hypotheses = tuple(
            _parse_symbols(h, line_no, inventory, "hypotheses") for h in hyps_raw
        )
        if len(hypotheses) != backend.m:
            raise EnsembleArityError(
                f"line {line_no}: utterance {utt_id!r} has {len(hypotheses)}"
                f" hypotheses but backend.M={backend.m}"
            )
        records.append(
            EnsembleRecord(utterance_id=utt_id, hypotheses=hypotheses, backend=backend)
        )
    return records


def serialize_ensembles(records: Iterable[EnsembleRecord]) -> str:
    """Render ensemble records, canonically ordered by utterance id."""
    lines = []
    for rec in sorted(records, key=lambda r: r.utterance_id):
        obj = {
            "utterance_id": rec.utterance_id,
            "hypotheses": [" ".join(hyp) for hyp in rec.hypotheses],
            "backend": {
                "model_id": rec.backend.model_id,
                "M": rec.backend.m,
                "p_drop": rec.backend.p_drop,
                "adaptation_state": rec.backend.adaptation_state,
            },
        }
        lines.append(json.dumps(obj, ensure_ascii=False, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def load_clinical_report(path: str, inventory: Inventory) -> ClinicalReport:
    """Load a tab-separated clinical report with its header lines."""
    report_id: str | None = None
    date: datetime.date | None = None
    labels: dict[str, ClinicalLabel] = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped.startswith("#report_id="):
                report_id = stripped[len("#report_id="):].strip()
            elif stripped.startswith("#date="):
                raw = stripped[len("#date="):].strip()
                try:
                    date = datetime.date.fromisoformat(raw)
                except ValueError as exc:
                    raise ParseError(line_no, f"bad ISO date {raw!r}") from exc
            # other comment lines are ignored
            continue
        parts = stripped.split("\t")
        if len(parts) not in (2, 3):
            raise ParseError(line_no, "expected symbol<TAB>difficult[<TAB>severity]")
        sym = parts[0]
        if sym not in inventory:
            raise UnknownSymbol(line_no, sym)
        if sym in labels:
            raise DuplicateId(f"line {line_no}: duplicate label for phoneme {sym!r}")
        if parts[1] not in ("0", "1"):
            raise ParseError(line_no, f"difficult must be 0 or 1, got {parts[1]!r}")
        severity: int | None = None
        if len(parts) == 3:
            try:
                severity = int(parts[2])
            except ValueError as exc:
                raise ParseError(line_no, f"severity must be an integer, got {parts[2]!r}") from exc
            if not 0 <= severity <= 3:
                raise ParseError(line_no, f"severity must be in 0..3, got {severity}")
        labels[sym] = ClinicalLabel(difficult=parts[1] == "1", severity=severity)
    if report_id is None:
        raise ParseError(0, "missing #report_id= header")
    if date is None:
        raise ParseError(0, "missing #date= header")
    flags = {label.difficult for label in labels.values()}
    if flags != {True, False}:
        raise DegenerateLabels(
            f"report {report_id!r} needs at least one difficult and one"
            " not-difficult phoneme for ranking evaluation"
        )
    return ClinicalReport(report_id=report_id, date=date, labels=labels)


def serialize_clinical_report(report: ClinicalReport) -> str:
    lines = [f"#report_id={report.report_id}", f"#date={report.date.isoformat()}"]
    for sym in sorted(report.labels):
        label = report.labels[sym]
        cols = [sym, "1" if label.difficult else "0"]
        if label.severity is not None:
            cols.append(str(label.severity))
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"


def load_lexicon(path: str, inventory: Inventory) -> Lexicon:
    """Load a word<TAB>pronunciation lexicon; words are case-folded."""
    entries: dict[str, tuple[str, ...]] = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ParseError(line_no, "expected word<TAB>symbol symbol ...")
        word = parts[0].lower()
        if not word:
            raise ParseError(line_no, "empty word")
        if word in entries:
            raise ParseError(line_no, f"duplicate lexicon entry for {word!r}")
        pron = _parse_symbols(parts[1], line_no, inventory, "pronunciation")
        if not pron:
            raise ParseError(line_no, f"empty pronunciation for {word!r}")
        entries[word] = pron
    return Lexicon(entries=entries)
