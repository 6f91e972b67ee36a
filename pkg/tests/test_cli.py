import json
import shutil
import subprocess
import wave

import pytest

from phdscore.cli import main
from phdscore.data import toy_path
from phdscore.scoring import load_weight_manifest

TOY = {
    "inventory": toy_path("inventory.txt"),
    "manifest": toy_path("manifest.jsonl"),
    "profile": toy_path("profile.txt"),
    "neighbors": toy_path("neighbors.tsv"),
    "report": toy_path("report.txt"),
}


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_toy_pipeline(tmp_path, capsys, *, seed=None, workers="1") -> dict:
    paths = {
        "ensembles": str(tmp_path / "ens.jsonl"),
        "table": str(tmp_path / "table.csv"),
        "weights": str(tmp_path / "weights.csv"),
        "plan": str(tmp_path / "plan.txt"),
    }
    simulate = [
        "simulate",
        "--inventory", TOY["inventory"],
        "--manifest", TOY["manifest"],
        "--profile", TOY["profile"],
        "--neighbors", TOY["neighbors"],
        "--workers", workers,
        "--out", paths["ensembles"],
    ]
    if seed is not None:
        simulate += ["--seed", str(seed)]
    assert run(capsys, *simulate)[0] == 0
    assert run(
        capsys,
        "score",
        "--inventory", TOY["inventory"],
        "--manifest", TOY["manifest"],
        "--ensembles", paths["ensembles"],
        "--out", paths["table"],
    )[0] == 0
    assert run(
        capsys,
        "weights",
        "--inventory", TOY["inventory"],
        "--manifest", TOY["manifest"],
        "--table", paths["table"],
        "--out", paths["weights"],
    )[0] == 0
    assert run(
        capsys,
        "sample",
        "--weight-manifest", paths["weights"],
        "--epoch-size", "64",
        "--seed", "11",
        "--out", paths["plan"],
    )[0] == 0
    return paths


def test_help_exits_zero_everywhere(capsys) -> None:
    assert run(capsys, "--help")[0] == 0
    for sub in (
        "simulate", "score", "weights", "sample",
        "eval-clinical", "metrics", "rechain", "report",
    ):
        code, out, _ = run(capsys, sub, "--help")
        assert code == 0
        assert "--out" in out


def test_usage_errors_exit_one(capsys) -> None:
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "usage" in err
    code, _, err = run(capsys, "score", "--bogus-flag")
    assert code == 1 and "usage" in err
    code, _, err = run(capsys)
    assert code == 1 and "subcommand" in err


def test_missing_input_exits_two(capsys) -> None:
    code, _, err = run(
        capsys,
        "score",
        "--inventory", TOY["inventory"],
        "--manifest", TOY["manifest"],
        "--ensembles", "/nonexistent/ens.jsonl",
    )
    assert code == 2
    assert "io error" in err


def test_malformed_weights_flag_exits_one(capsys) -> None:
    code, _, _ = run(
        capsys,
        "score",
        "--inventory", TOY["inventory"],
        "--manifest", TOY["manifest"],
        "--ensembles", "x.jsonl",
        "--weights", "0.4,0.6",
    )
    assert code == 1


def test_toy_pipeline_weight_ratio_is_five(tmp_path, capsys) -> None:
    paths = run_toy_pipeline(tmp_path, capsys)
    weights = load_weight_manifest(paths["weights"])
    values = [w.weight for w in weights]
    assert max(values) / min(values) == 5.0
    assert min(values) == 1.0 and max(values) == 5.0


def test_pipeline_reruns_are_byte_identical(tmp_path, capsys) -> None:
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first = run_toy_pipeline(tmp_path / "a", capsys, workers="1")
    second = run_toy_pipeline(tmp_path / "b", capsys, workers="6")
    for key in ("ensembles", "table", "weights", "plan"):
        with open(first[key], "rb") as fa, open(second[key], "rb") as fb:
            assert fa.read() == fb.read(), key


def test_eval_clinical_prints_summary(tmp_path, capsys) -> None:
    paths = run_toy_pipeline(tmp_path, capsys)
    code, out, _ = run(
        capsys,
        "eval-clinical",
        "--inventory", TOY["inventory"],
        "--table", paths["table"],
        "--report", TOY["report"],
        "--out", str(tmp_path / "curve.csv"),
        "--svg", str(tmp_path / "curve.svg"),
    )
    assert code == 0
    assert out.startswith("AP=")
    assert "positives=2" in out
    assert (tmp_path / "curve.csv").read_text().startswith("threshold,recall,precision")
    assert "<svg" in (tmp_path / "curve.svg").read_text()


def test_weights_warns_on_finetuned_backend(tmp_path, capsys) -> None:
    paths = run_toy_pipeline(tmp_path, capsys)
    table = (tmp_path / "finetuned.csv")
    with open(paths["table"], "r", encoding="utf-8") as fh:
        table.write_text(fh.read().replace('"simulated"', '"finetuned"'))
    code, _, err = run(
        capsys,
        "weights",
        "--inventory", TOY["inventory"],
        "--manifest", TOY["manifest"],
        "--table", str(table),
        "--backend-state", "pretrained",
        "--out", str(tmp_path / "w.csv"),
    )
    assert code == 0  # warnings are non-fatal
    assert "fine-tuned" in err
    assert "expected backend state 'pretrained'" in err


def test_weights_empty_split_exits_one(tmp_path, capsys) -> None:
    paths = run_toy_pipeline(tmp_path, capsys)
    manifest = tmp_path / "train_only.jsonl"
    with open(TOY["manifest"], "r", encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if '"train"' in line]
    manifest.write_text("".join(json.dumps(r) + "\n" for r in rows))
    code, _, err = run(
        capsys,
        "weights",
        "--inventory", TOY["inventory"],
        "--manifest", str(manifest),
        "--table", paths["table"],
        "--split", "test_normative",
    )
    assert code == 1
    assert "no utterances" in err


def test_sample_mode_flag_validation(tmp_path, capsys) -> None:
    paths = run_toy_pipeline(tmp_path, capsys)
    code, _, err = run(capsys, "sample", "--weight-manifest", paths["weights"])
    assert code == 1 and "--epoch-size" in err
    code, _, err = run(
        capsys,
        "sample",
        "--weight-manifest", paths["weights"],
        "--mode", "expansion",
        "--epoch-size", "5",
    )
    assert code == 1 and "replacement" in err
    code, _, err = run(
        capsys,
        "sample",
        "--weight-manifest", paths["weights"],
        "--epoch-size", "5",
        "--factor", "2.0",
    )
    assert code == 1 and "expansion" in err
    code, _, _ = run(
        capsys,
        "sample",
        "--weight-manifest", paths["weights"],
        "--mode", "expansion",
        "--factor", "0.0",
    )
    assert code == 1  # factor below 1 is invalid, not silently defaulted


def test_metrics_rates_and_delta(tmp_path, capsys) -> None:
    ref = tmp_path / "ref.tsv"
    hyp = tmp_path / "hyp.tsv"
    ref.write_text("u1\tthe cat sat\nu2\trats ran\n")
    hyp.write_text("u1\tthe bat sat\nu2\trats ran\n")
    rates = tmp_path / "rates.csv"
    code, _, err = run(
        capsys,
        "metrics",
        "--ref", str(ref), "--hyp", str(hyp),
        "--split", "test_nonnormative",
        "--out", str(rates),
    )
    assert code == 0
    assert "cer=5.26%" in err
    lines = rates.read_text().splitlines()
    assert lines[0] == "split,cer,wer,ref_chars,ref_words"
    assert lines[1].startswith("test_nonnormative,")

    code, out, _ = run(
        capsys,
        "metrics",
        "--ref", str(ref), "--hyp", str(hyp),
        "--split", "test_nonnormative",
        "--baseline", str(rates),
    )
    assert code == 0
    assert "test_nonnormative,+0.00,+0.00" in out


def test_metrics_id_mismatch_exits_one(tmp_path, capsys) -> None:
    ref = tmp_path / "ref.tsv"
    hyp = tmp_path / "hyp.tsv"
    ref.write_text("u1\ta\nu2\tb\n")
    hyp.write_text("u1\ta\nu3\tb\n")
    code, _, err = run(capsys, "metrics", "--ref", str(ref), "--hyp", str(hyp))
    assert code == 1
    assert "u2" in err and "u3" in err


def test_report_modes(tmp_path, capsys) -> None:
    rates = tmp_path / "rates.csv"
    rates.write_text(
        "split,cer,wer,ref_chars,ref_words\ntrain,0.0954,0.118,100,20\n"
    )
    treated = tmp_path / "treated.csv"
    treated.write_text(
        "split,cer,wer,ref_chars,ref_words\ntrain,0.0281,0.0598,100,20\n"
    )
    code, out, _ = run(
        capsys, "report", "--baseline", str(rates), "--treated", str(treated)
    )
    assert code == 0
    assert "train,-6.73,-5.82" in out

    code, out, _ = run(
        capsys,
        "report",
        "--dataset", "toy",
        "--source", f"standard={rates}",
        "--source", f"adapted={treated}",
    )
    assert code == 0
    assert "toy,standard,9.54,11.80" in out
    assert "toy,adapted,2.81,5.98" in out

    assert run(capsys, "report")[0] == 1
    assert run(
        capsys, "report", "--baseline", str(rates),
        "--source", f"a={rates}",
    )[0] == 1
    assert run(capsys, "report", "--baseline", str(rates))[0] == 1


def test_rechain_cli(tmp_path, capsys) -> None:
    audio = tmp_path / "audio"
    audio.mkdir()
    for name, frames in (("w_the", 16000), ("w_cat", 16000)):
        with wave.open(str(audio / f"{name}.wav"), "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(2)
            fh.setframerate(16000)
            fh.writeframes(b"\x01\x02" * frames)
    manifest = tmp_path / "words.jsonl"
    rows = [
        {"id": "w_the", "text": "the", "ref_phonemes": "t e", "split": "train",
         "audio_path": "w_the.wav"},
        {"id": "w_cat", "text": "cat", "ref_phonemes": "k a t", "split": "train",
         "audio_path": "w_cat.wav"},
    ]
    manifest.write_text("".join(json.dumps(r) + "\n" for r in rows))
    templates = tmp_path / "templates.txt"
    templates.write_text("the cat\nthe unicorn\n")
    out = tmp_path / "chained.jsonl"
    code, _, err = run(
        capsys,
        "rechain",
        "--inventory", TOY["inventory"],
        "--manifest", str(manifest),
        "--templates", str(templates),
        "--audio-root", str(audio),
        "--out-dir", str(tmp_path / "wavs"),
        "--out", str(out),
    )
    assert code == 0
    assert "unicorn" in err
    record = json.loads(out.read_text())
    assert record["id"] == "chain0001"
    assert record["ref_phonemes"] == "t e k a t"
    with wave.open(str(tmp_path / "wavs" / "chain0001.wav"), "rb") as fh:
        assert fh.getnframes() == 16000 + 1600 + 16000


@pytest.mark.skipif(shutil.which("phdscore") is None, reason="entry point not installed")
def test_console_script_entry_point() -> None:
    proc = subprocess.run(
        ["phdscore", "--help"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert "SUBCOMMAND" in proc.stdout
