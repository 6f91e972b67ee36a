from __future__ import annotations

import os
import wave

import pytest

from phdscore.errors import FormatMismatch, UnsupportedEncoding
from phdscore.rechain import (
    concat_audio,
    load_templates,
    output_frames,
    plan_sentences,
)

from conftest import make_utterance, write_wav


def word_record(utt_id: str, word: str, ref: tuple[str, ...], path: str):
    return make_utterance(utt_id, ref, text=word, audio_path=path)


@pytest.fixture()
def word_corpus(tmp_path):
    """Three word recordings: the(1.0s), cat(1.0s), sat(0.5s) at 16 kHz."""
    records = []
    for utt_id, word, ref, frames in [
        ("w01", "the", ("t", "a"), 16000),
        ("w02", "cat", ("k", "a", "t"), 16000),
        ("w03", "sat", ("s", "a", "t"), 8000),
    ]:
        path = write_wav(str(tmp_path / f"{utt_id}.wav"), frames)
        records.append(word_record(utt_id, word, ref, path))
    return records


def test_load_templates(tmp_path) -> None:
    path = tmp_path / "templates.txt"
    path.write_text("# sentences\nthe cat\n\nthe cat sat\n", encoding="utf-8")
    assert load_templates(str(path)) == [("the", "cat"), ("the", "cat", "sat")]


def test_plan_resolves_words(word_corpus) -> None:
    result = plan_sentences([("the", "cat")], word_corpus)
    assert not result.skipped
    (plan,) = result.plans
    assert plan.sentence_id == "chain0001"
    assert plan.word_sequence == ("the", "cat")
    assert plan.source_utterances["cat"].id == "w02"
    assert plan.gap_ms == 100


def test_plan_skips_unresolvable_templates(word_corpus) -> None:
    result = plan_sentences([("the", "unicorn"), ("cat",)], word_corpus)
    assert len(result.plans) == 1
    (skip,) = result.skipped
    assert skip.template == ("the", "unicorn")
    assert skip.missing_words == ("unicorn",)
    # numbering follows template position, including skipped ones
    assert result.plans[0].sentence_id == "chain0002"


def test_plan_resolution_is_case_insensitive(word_corpus) -> None:
    result = plan_sentences([("The", "CAT")], word_corpus)
    assert not result.skipped
    assert result.plans[0].source_utterances["cat"].id == "w02"


def test_plan_picks_lexicographically_first_recording(tmp_path) -> None:
    first = word_record("u07", "cat", ("k", "a", "t"), str(tmp_path / "u07.wav"))
    later = word_record("u13", "cat", ("k", "a", "t"), str(tmp_path / "u13.wav"))
    result = plan_sentences([("cat",)], [later, first])
    assert result.plans[0].source_utterances["cat"].id == "u07"


def test_plan_ignores_records_without_audio(word_corpus) -> None:
    extra = make_utterance("w99", ("t", "a"), text="the", audio_path=None)
    result = plan_sentences([("the",)], [extra] + word_corpus)
    assert result.plans[0].source_utterances["the"].id == "w01"


def test_concat_two_seconds_with_gap_is_sample_exact(tmp_path, word_corpus) -> None:
    result = plan_sentences([("the", "cat")], word_corpus)
    out = str(tmp_path / "chain.wav")
    record = concat_audio(result.plans[0], out)
    with wave.open(out, "rb") as wav:
        assert wav.getframerate() == 16000
        assert wav.getnchannels() == 1
        # 16000 + 1600 gap + 16000
        assert wav.getnframes() == 33600
    assert record.id == "chain0001"
    assert record.text == "the cat"
    assert record.ref_phonemes == ("t", "a", "k", "a", "t")
    assert record.audio_path == out
    assert output_frames(result.plans[0], [16000, 16000], 16000) == 33600


def test_concat_single_word_is_identity(tmp_path, word_corpus) -> None:
    result = plan_sentences([("cat",)], word_corpus)
    out = str(tmp_path / "single.wav")
    concat_audio(result.plans[0], out)
    with wave.open(out, "rb") as got, wave.open(word_corpus[1].audio_path, "rb") as src:
        assert got.getnframes() == src.getnframes()
        assert got.readframes(got.getnframes()) == src.readframes(src.getnframes())


def test_concat_gap_arithmetic_at_44100(tmp_path) -> None:
    records = [
        word_record("a1", "one", ("t",), write_wav(str(tmp_path / "a1.wav"), 1000, rate=44100)),
        word_record("a2", "two", ("s",), write_wav(str(tmp_path / "a2.wav"), 2000, rate=44100)),
    ]
    result = plan_sentences([("one", "two")], records)
    out = str(tmp_path / "joined.wav")
    concat_audio(result.plans[0], out)
    with wave.open(out, "rb") as wav:
        assert wav.getnframes() == 1000 + 4410 + 2000


def test_concat_is_associative_in_the_data_section(tmp_path, word_corpus) -> None:
    # chain(the cat sat) must equal chain(chain(the cat) sat) sample-wise
    result = plan_sentences([("the", "cat", "sat")], word_corpus)
    direct = str(tmp_path / "direct.wav")
    concat_audio(result.plans[0], direct)

    two = plan_sentences([("the", "cat")], word_corpus)
    partial_path = str(tmp_path / "partial.wav")
    partial_record = concat_audio(two.plans[0], partial_path)
    nested_manifest = [
        make_utterance("n1", partial_record.ref_phonemes, text="thecat", audio_path=partial_path),
        word_corpus[2],
    ]
    nested = plan_sentences([("thecat", "sat")], nested_manifest)
    nested_path = str(tmp_path / "nested.wav")
    concat_audio(nested.plans[0], nested_path)

    with wave.open(direct, "rb") as a, wave.open(nested_path, "rb") as b:
        assert a.getnframes() == b.getnframes()
        assert a.readframes(a.getnframes()) == b.readframes(b.getnframes())


def test_concat_rejects_rate_mismatch(tmp_path) -> None:
    records = [
        word_record("b1", "one", ("t",), write_wav(str(tmp_path / "b1.wav"), 1600, rate=16000)),
        word_record("b2", "two", ("s",), write_wav(str(tmp_path / "b2.wav"), 4410, rate=44100)),
    ]
    result = plan_sentences([("one", "two")], records)
    with pytest.raises(FormatMismatch):
        concat_audio(result.plans[0], str(tmp_path / "out.wav"))


def test_concat_rejects_channel_mismatch(tmp_path) -> None:
    records = [
        word_record("c1", "one", ("t",), write_wav(str(tmp_path / "c1.wav"), 1600)),
        word_record("c2", "two", ("s",), write_wav(str(tmp_path / "c2.wav"), 1600, channels=2)),
    ]
    result = plan_sentences([("one", "two")], records)
    with pytest.raises(FormatMismatch):
        concat_audio(result.plans[0], str(tmp_path / "out.wav"))


def test_concat_rejects_non_16bit(tmp_path) -> None:
    path = str(tmp_path / "d1.wav")
    with wave.open(path, "wb") as out:
        out.setnchannels(1)
        out.setsampwidth(1)  # 8-bit
        out.setframerate(16000)
        out.writeframes(b"\x80" * 1600)
    records = [word_record("d1", "one", ("t",), path)]
    result = plan_sentences([("one",)], records)
    with pytest.raises(UnsupportedEncoding):
        concat_audio(result.plans[0], str(tmp_path / "out.wav"))


def test_concat_leaves_no_temp_file(tmp_path, word_corpus) -> None:
    result = plan_sentences([("the", "cat")], word_corpus)
    out = str(tmp_path / "atomic.wav")
    concat_audio(result.plans[0], out)
    assert os.path.exists(out)
    assert not os.path.exists(out + ".part")


def test_concat_repeated_word_reuses_recording(tmp_path, word_corpus) -> None:
    result = plan_sentences([("cat", "cat")], word_corpus)
    out = str(tmp_path / "twice.wav")
    record = concat_audio(result.plans[0], out)
    with wave.open(out, "rb") as wav:
        assert wav.getnframes() == 16000 + 1600 + 16000
    assert record.ref_phonemes == ("k", "a", "t", "k", "a", "t")


def test_ref_phoneme_lengths_add_up(tmp_path, word_corpus) -> None:
    result = plan_sentences([("the", "cat", "sat")], word_corpus)
    record = concat_audio(result.plans[0], str(tmp_path / "out.wav"))
    expected = sum(len(r.ref_phonemes) for r in result.plans[0].source_utterances.values())
    assert len(record.ref_phonemes) == expected
