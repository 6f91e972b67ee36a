from __future__ import annotations

import wave

import pytest

from phdscore.manifest import (
    BackendMeta,
    EnsembleRecord,
    Inventory,
    UtteranceRecord,
)


@pytest.fixture()
def inventory() -> Inventory:
    return Inventory(("a", "g", "k", "r", "s", "t"))


@pytest.fixture()
def neighbors() -> dict[str, str]:
    # fixed confusable pairs for the test inventory
    return {"a": "r", "g": "k", "k": "g", "r": "a", "s": "t", "t": "s"}


def make_utterance(
    utt_id: str = "u1",
    ref: tuple[str, ...] = ("k", "a", "t"),
    *,
    text: str = "cat",
    split: str = "train",
    audio_path: str | None = None,
) -> UtteranceRecord:
    return UtteranceRecord(
        id=utt_id, text=text, ref_phonemes=ref, split=split, audio_path=audio_path
    )


def make_ensemble(
    utt_id: str,
    hypotheses: list[tuple[str, ...]],
    *,
    model_id: str = "test-backend",
    p_drop: float = 0.01,
    adaptation_state: str = "pretrained",
) -> EnsembleRecord:
    return EnsembleRecord(
        utterance_id=utt_id,
        hypotheses=tuple(hypotheses),
        backend=BackendMeta(
            model_id=model_id,
            m=len(hypotheses),
            p_drop=p_drop,
            adaptation_state=adaptation_state,
        ),
    )


def write_wav(
    path: str,
    n_frames: int,
    *,
    rate: int = 16000,
    channels: int = 1,
    amplitude: int = 1000,
) -> str:
    """Write a small 16-bit PCM WAV with a recognizable constant pattern."""
    frame = amplitude.to_bytes(2, "little", signed=True) * channels
    with wave.open(path, "wb") as out:
        out.setnchannels(channels)
        out.setsampwidth(2)
        out.setframerate(rate)
        out.writeframes(frame * n_frames)
    return path
