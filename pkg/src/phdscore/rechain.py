"""Semantic re-chaining: word recordings concatenated into sentences.

Personalization corpora recorded as isolated words mismatch ASR models
trained on sentence-level input. This module builds sentence-level
utterances programmatically: sentence templates (one per line, words
separated by spaces) are resolved against a manifest of word
recordings, and the word WAVs are concatenated with a fixed
zero-amplitude gap (default 100 ms) between them.

Kept deliberately simple and bit-exact: 16-bit PCM only, identical
sample rate and channel count across sources, no cross-fading or
level normalization. Gap length in frames is gap_ms * rate // 1000.
Output files are written atomically (write to a temp name, then
rename) so concurrent renders of distinct plans never interleave.
"""

from __future__ import annotations

import os
import wave
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import FormatMismatch, ParseError, UnsupportedEncoding
from .manifest import UtteranceRecord

DEFAULT_GAP_MS = 100


@dataclass(frozen=True)
class SentencePlan:
    sentence_id: str
    word_sequence: tuple[str, ...]
    source_utterances: Mapping[str, UtteranceRecord]  # lowercased word -> record
    gap_ms: int = DEFAULT_GAP_MS


@dataclass(frozen=True)
class SkippedTemplate:
    template: tuple[str, ...]
    missing_words: tuple[str, ...]


@dataclass(frozen=True)
class PlanResult:
    plans: tuple[SentencePlan, ...]
    skipped: tuple[SkippedTemplate, ...]


def load_templates(path: str) -> list[tuple[str, ...]]:
    """One sentence template per line, space-separated words."""
    templates: list[tuple[str, ...]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh.read().splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            words = tuple(stripped.split())
            if not words:
                raise ParseError(line_no, "empty template")
            templates.append(words)
    return templates


def plan_sentences(
    templates: Sequence[Sequence[str]],
    manifest: Sequence[UtteranceRecord],
    gap_ms: int = DEFAULT_GAP_MS,
) -> PlanResult:
    """Resolve each template's words against the word recordings.

    A word resolves to the manifest record whose text equals it
    case-insensitively and which has an audio path; with several
    recordings of the same word the lexicographically smallest
    utterance id wins. Templates with unresolvable words are skipped
    and reported, never fatal.
    """
    by_word: dict[str, UtteranceRecord] = {}
    for rec in manifest:
        if rec.audio_path is None:
            continue
        word = rec.text.strip().lower()
        if not word or " " in word:
            continue  # only single-word recordings can source a chain
        current = by_word.get(word)
        if current is None or rec.id < current.id:
            by_word[word] = rec
    plans: list[SentencePlan] = []
    skipped: list[SkippedTemplate] = []
    for index, template in enumerate(templates, start=1):
        words = tuple(template)
        missing = tuple(sorted({w for w in words if w.lower() not in by_word}))
        if missing:
            skipped.append(SkippedTemplate(template=words, missing_words=missing))
            continue
        plans.append(
            SentencePlan(
                sentence_id=f"chain{index:04d}",
                word_sequence=words,
                source_utterances={w.lower(): by_word[w.lower()] for w in words},
                gap_ms=gap_ms,
            )
        )
    return PlanResult(plans=tuple(plans), skipped=tuple(skipped))


def _read_pcm(path: str) -> tuple[int, int, int, bytes]:
    """Read a 16-bit PCM WAV: (rate, channels, frames, data)."""
    with wave.open(path, "rb") as wav:
        if wav.getcomptype() != "NONE":
            raise UnsupportedEncoding(f"{path!r} is compressed ({wav.getcomptype()})")
        if wav.getsampwidth() != 2:
            raise UnsupportedEncoding(
                f"{path!r} has {8 * wav.getsampwidth()}-bit samples, need 16-bit PCM"
            )
        frames = wav.getnframes()
        return wav.getframerate(), wav.getnchannels(), frames, wav.readframes(frames)


def concat_audio(
    plan: SentencePlan,
    out_path: str,
    audio_root: str = "",
    split: str = "train",
) -> UtteranceRecord:
    """Render one plan to a WAV file and return its new manifest record.

    Source paths are resolved relative to audio_root when set. The new
    record's text joins the template words; its reference phonemes are
    the sources' reference phonemes concatenated in word order.
    """
    rate: int | None = None
    channels: int | None = None
    cache: dict[str, tuple[int, int, int, bytes]] = {}
    chunks: list[bytes] = []
    total_frames = 0
    ref_phonemes: list[str] = []
    for position, word in enumerate(plan.word_sequence):
        rec = plan.source_utterances[word.lower()]
        assert rec.audio_path is not None
        path = os.path.join(audio_root, rec.audio_path) if audio_root else rec.audio_path
        if path not in cache:
            cache[path] = _read_pcm(path)
        src_rate, src_channels, frames, data = cache[path]
        if rate is None:
            rate, channels = src_rate, src_channels
        elif (src_rate, src_channels) != (rate, channels):
            raise FormatMismatch(
                f"{path!r} is {src_rate} Hz/{src_channels}ch,"
                f" expected {rate} Hz/{channels}ch"
            )
        if position > 0:
            gap_frames = plan.gap_ms * rate // 1000
            chunks.append(b"\x00" * (gap_frames * channels * 2))
            total_frames += gap_frames
        chunks.append(data)
        total_frames += frames
        ref_phonemes.extend(rec.ref_phonemes)
    assert rate is not None and channels is not None

    tmp_path = out_path + ".part"
    with wave.open(tmp_path, "wb") as out:
        out.setnchannels(channels)
        out.setsampwidth(2)
        out.setframerate(rate)
        out.writeframes(b"".join(chunks))
    os.replace(tmp_path, out_path)

    return UtteranceRecord(
        id=plan.sentence_id,
        text=" ".join(plan.word_sequence),
        ref_phonemes=tuple(ref_phonemes),
        split=split,
        audio_path=out_path,
    )


def output_frames(plan: SentencePlan, source_frames: Sequence[int], rate: int) -> int:
    """Closed-form output length: sum of sources + gaps between words."""
    gap_frames = plan.gap_ms * rate // 1000
    return sum(source_frames) + gap_frames * (len(plan.word_sequence) - 1)
