from __future__ import annotations

import datetime

import pytest

from phdscore.errors import (
    DegenerateLabels,
    DuplicateId,
    EnsembleArityError,
    IllegalSymbol,
    OovWord,
    ParseError,
    UnknownSymbol,
    UnknownUtterance,
)
from phdscore.manifest import (
    EPSILON,
    BackendMeta,
    Inventory,
    lexicon_lookup,
    load_clinical_report,
    load_ensemble,
    load_inventory,
    load_lexicon,
    load_manifest,
    serialize_clinical_report,
    serialize_ensembles,
    serialize_manifest,
)

MANIFEST_TWO = """\
{"id": "u1", "text": "cat", "ref_phonemes": "k a t", "split": "train"}
{"id": "u2", "text": "rat", "ref_phonemes": "r a t", "split": "test_normative", "audio_path": "words/u2.wav"}
"""


def write(tmp_path, name: str, content: str) -> str:
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return str(path)


def test_load_inventory(tmp_path) -> None:
    path = write(tmp_path, "inv.txt", "# comment\nk\na\nt\n\nr\n")
    inv = load_inventory(path)
    assert inv.symbols == ("k", "a", "t", "r")
    assert "k" in inv and "z" not in inv


def test_inventory_rejects_epsilon_and_duplicates() -> None:
    with pytest.raises(IllegalSymbol):
        Inventory(("k", EPSILON))
    with pytest.raises(DuplicateId):
        Inventory(("k", "k"))


def test_load_manifest_two_records(tmp_path, inventory) -> None:
    path = write(tmp_path, "manifest.jsonl", MANIFEST_TWO)
    records = load_manifest(path, inventory)
    assert [r.id for r in records] == ["u1", "u2"]
    assert records[0].ref_phonemes == ("k", "a", "t")
    assert records[0].audio_path is None
    assert records[1].audio_path == "words/u2.wav"


def test_load_manifest_duplicate_id(tmp_path, inventory) -> None:
    lines = MANIFEST_TWO.replace('"u2"', '"u1"')
    with pytest.raises(DuplicateId):
        load_manifest(write(tmp_path, "m.jsonl", lines), inventory)


def test_load_manifest_unknown_symbol(tmp_path, inventory) -> None:
    bad = '{"id": "u1", "text": "x", "ref_phonemes": "k zz", "split": "train"}\n'
    with pytest.raises(UnknownSymbol) as err:
        load_manifest(write(tmp_path, "m.jsonl", bad), inventory)
    assert err.value.symbol == "zz"
    assert err.value.line_no == 1


def test_load_manifest_rejects_epsilon_and_bad_split(tmp_path, inventory) -> None:
    bad = '{"id": "u1", "text": "x", "ref_phonemes": "k ∅", "split": "train"}\n'
    with pytest.raises(IllegalSymbol):
        load_manifest(write(tmp_path, "m1.jsonl", bad), inventory)
    bad = '{"id": "u1", "text": "x", "ref_phonemes": "k", "split": "dev"}\n'
    with pytest.raises(ParseError):
        load_manifest(write(tmp_path, "m2.jsonl", bad), inventory)


def test_load_manifest_malformed_line_reports_line_number(tmp_path, inventory) -> None:
    content = MANIFEST_TWO + "{not json\n"
    with pytest.raises(ParseError) as err:
        load_manifest(write(tmp_path, "m.jsonl", content), inventory)
    assert err.value.line_no == 3


def test_manifest_round_trip(tmp_path, inventory) -> None:
    path = write(tmp_path, "m.jsonl", MANIFEST_TWO)
    records = load_manifest(path, inventory)
    again = load_manifest(
        write(tmp_path, "m2.jsonl", serialize_manifest(records)), inventory
    )
    assert sorted(records, key=lambda r: r.id) == again


def test_manifest_loading_order_independent(tmp_path, inventory) -> None:
    lines = MANIFEST_TWO.splitlines()
    reordered = "\n".join(reversed(lines)) + "\n"
    a = load_manifest(write(tmp_path, "a.jsonl", MANIFEST_TWO), inventory)
    b = load_manifest(write(tmp_path, "b.jsonl", reordered), inventory)
    assert {r.id: r for r in a} == {r.id: r for r in b}


def ensemble_line(utt_id: str = "u1", n_hyp: int = 20, m: int = 20) -> str:
    import json

    return (
        json.dumps(
            {
                "utterance_id": utt_id,
                "hypotheses": ["k a t"] * n_hyp,
                "backend": {
                    "model_id": "whisper-tiny",
                    "M": m,
                    "p_drop": 0.01,
                    "adaptation_state": "pretrained",
                },
            }
        )
        + "\n"
    )


def test_load_ensemble_accepts_matching_arity(tmp_path, inventory) -> None:
    manifest = load_manifest(write(tmp_path, "m.jsonl", MANIFEST_TWO), inventory)
    records = load_ensemble(
        write(tmp_path, "e.jsonl", ensemble_line()), manifest, inventory
    )
    assert len(records) == 1
    assert len(records[0].hypotheses) == 20
    assert records[0].backend.m == 20


def test_load_ensemble_arity_mismatch(tmp_path, inventory) -> None:
    manifest = load_manifest(write(tmp_path, "m.jsonl", MANIFEST_TWO), inventory)
    with pytest.raises(EnsembleArityError):
        load_ensemble(
            write(tmp_path, "e.jsonl", ensemble_line(n_hyp=19)), manifest, inventory
        )


def test_load_ensemble_unknown_utterance(tmp_path, inventory) -> None:
    manifest = load_manifest(write(tmp_path, "m.jsonl", MANIFEST_TWO), inventory)
    with pytest.raises(UnknownUtterance):
        load_ensemble(
            write(tmp_path, "e.jsonl", ensemble_line(utt_id="ghost")),
            manifest,
            inventory,
        )


def test_load_ensemble_rejects_epsilon_hypothesis(tmp_path, inventory) -> None:
    manifest = load_manifest(write(tmp_path, "m.jsonl", MANIFEST_TWO), inventory)
    line = ensemble_line().replace("k a t", f"k {EPSILON} t", 1)
    with pytest.raises(IllegalSymbol):
        load_ensemble(write(tmp_path, "e.jsonl", line), manifest, inventory)


def test_ensemble_round_trip(tmp_path, inventory) -> None:
    manifest = load_manifest(write(tmp_path, "m.jsonl", MANIFEST_TWO), inventory)
    content = ensemble_line("u1") + ensemble_line("u2")
    records = load_ensemble(write(tmp_path, "e.jsonl", content), manifest, inventory)
    again = load_ensemble(
        write(tmp_path, "e2.jsonl", serialize_ensembles(records)), manifest, inventory
    )
    assert sorted(records, key=lambda r: r.utterance_id) == again


def test_backend_meta_validation() -> None:
    with pytest.raises(ParseError):
        BackendMeta(model_id="x", m=0)
    with pytest.raises(ParseError):
        BackendMeta(model_id="x", p_drop=1.5)
    with pytest.raises(ParseError):
        BackendMeta(model_id="x", adaptation_state="zero-shot")


REPORT = """\
#report_id=R1
#date=2024-05-01
r\t1\t2
s\t0
t\t1
a\t0\t0
"""


def test_load_clinical_report(tmp_path, inventory) -> None:
    report = load_clinical_report(write(tmp_path, "r.tsv", REPORT), inventory)
    assert report.report_id == "R1"
    assert report.date == datetime.date(2024, 5, 1)
    assert report.labels["r"].difficult and report.labels["r"].severity == 2
    assert not report.labels["s"].difficult and report.labels["s"].severity is None
    assert report.binary_labels() == {"r": True, "s": False, "t": True, "a": False}
    # severity >= 2 flips t (no grade, keeps bit) but demotes a graded 0
    assert report.binary_labels(severity_threshold=2) == {
        "r": True,
        "s": False,
        "t": True,
        "a": False,
    }


def test_clinical_report_round_trip(tmp_path, inventory) -> None:
    report = load_clinical_report(write(tmp_path, "r.tsv", REPORT), inventory)
    again = load_clinical_report(
        write(tmp_path, "r2.tsv", serialize_clinical_report(report)), inventory
    )
    assert again == report


def test_clinical_report_degenerate_labels(tmp_path, inventory) -> None:
    only_hard = "#report_id=R2\n#date=2024-05-01\nr\t1\ns\t1\n"
    with pytest.raises(DegenerateLabels):
        load_clinical_report(write(tmp_path, "r.tsv", only_hard), inventory)


def test_clinical_report_validation(tmp_path, inventory) -> None:
    with pytest.raises(ParseError):
        load_clinical_report(
            write(tmp_path, "r.tsv", "#date=2024-05-01\nr\t1\ns\t0\n"), inventory
        )
    with pytest.raises(UnknownSymbol):
        load_clinical_report(
            write(tmp_path, "r2.tsv", "#report_id=R\n#date=2024-05-01\nzz\t1\ns\t0\n"),
            inventory,
        )
    with pytest.raises(ParseError):
        load_clinical_report(
            write(tmp_path, "r3.tsv", "#report_id=R\n#date=2024-05-01\nr\t2\ns\t0\n"),
            inventory,
        )


LEXICON = "cat\tk a t\nrat\tr a t\nSTAR\ts t a r\n"


def test_lexicon_lookup(tmp_path, inventory) -> None:
    lex = load_lexicon(write(tmp_path, "lex.tsv", LEXICON), inventory)
    assert lexicon_lookup(lex, "cat") == ("k", "a", "t")
    assert lexicon_lookup(lex, "CAT") == ("k", "a", "t")
    assert lexicon_lookup(lex, "star") == ("s", "t", "a", "r")
    with pytest.raises(OovWord):
        lexicon_lookup(lex, "xylo")


def test_lexicon_validation(tmp_path, inventory) -> None:
    with pytest.raises(ParseError):
        load_lexicon(write(tmp_path, "l1.tsv", "cat\tk a t\ncat\tk a t\n"), inventory)
    with pytest.raises(UnknownSymbol):
        load_lexicon(write(tmp_path, "l2.tsv", "cat\tk zz t\n"), inventory)
    with pytest.raises(ParseError):
        load_lexicon(write(tmp_path, "l3.tsv", "cat\t\n"), inventory)
