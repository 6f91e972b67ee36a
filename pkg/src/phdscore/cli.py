"""Command-line entry point exposing the pipeline as subcommands.

Subcommands: simulate, score, weights, sample, eval-clinical, metrics,
rechain, report. Exit codes: 0 success, 1 validation error (including
bad flags and unknown subcommands), 2 I/O error. Diagnostics go to
standard error; data goes to the --out destination or standard output.
Every subcommand is deterministic: identical inputs and seeds produce
byte-identical data outputs, regardless of worker count.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .align import collect_instances
from .clinical import pr_curve, pr_curve_svg, serialize_pr_curve, summary_line
from .errors import DuplicateId, PhdscoreError
from .manifest import (
    ADAPTATION_STATES,
    SPLITS,
    EnsembleRecord,
    Inventory,
    UtteranceRecord,
    load_clinical_report,
    load_ensemble,
    load_inventory,
    load_manifest,
    serialize_ensembles,
    serialize_manifest,
)
from .metrics import (
    ErrorRates,
    corpus_rates,
    delta_report,
    load_rates,
    serialize_delta_rows,
    serialize_rates,
    serialize_source_rates,
)
from .rechain import concat_audio, load_templates, plan_sentences
from .sampler import expand_deterministic, sample_epoch, serialize_epoch_plan
from .scoring import (
    ScoreWeights,
    compose,
    load_score_table,
    load_weight_manifest,
    map_weights,
    normalize_components,
    serialize_score_table,
    serialize_weight_manifest,
    utterance_score,
)
from .simspeaker import adapted_profile, load_neighbors, load_profile, simulate_corpus
from .uncertainty import phoneme_stats


class _UsageError(Exception):
    """Raised instead of argparse's default SystemExit(2)."""

    def __init__(self, parser: argparse.ArgumentParser, message: str) -> None:
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    # flag and subcommand mistakes are validation errors: exit 1, not 2
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(self, message)


def _parse_weights(raw: str) -> ScoreWeights:
    parts = raw.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected w_e,w_h,w_a (three comma-separated reals), got {raw!r}"
        )
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"non-numeric weight in {raw!r}") from exc
    return ScoreWeights(*values)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_corpus(args: argparse.Namespace) -> tuple[Inventory, list[UtteranceRecord]]:
    inventory = load_inventory(args.inventory)
    manifest = load_manifest(args.manifest, inventory)
    return inventory, manifest


def _cmd_simulate(args: argparse.Namespace) -> int:
    inventory, manifest = _load_corpus(args)
    neighbors = load_neighbors(args.neighbors, inventory)
    model = load_profile(args.profile, inventory, neighbors)
    if args.residual < 1.0:
        model = adapted_profile(model, residual=args.residual)
    ensembles = simulate_corpus(
        manifest, model, m=args.m, seed=args.seed, workers=args.workers
    )
    _emit(serialize_ensembles(ensembles), args.out)
    _log(f"simulated {len(ensembles)} ensembles with profile {model.profile_name!r}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    inventory, manifest = _load_corpus(args)
    by_id = {rec.id: rec for rec in manifest}
    ensembles: list[EnsembleRecord] = []
    seen: set[str] = set()
    for path in args.ensembles:
        for ens in load_ensemble(path, manifest, inventory):
            if ens.utterance_id in seen:
                raise DuplicateId(
                    f"utterance {ens.utterance_id!r} appears in more than one ensemble file"
                )
            seen.add(ens.utterance_id)
            ensembles.append(ens)
    ensembles.sort(key=lambda e: e.utterance_id)

    collections = [collect_instances(by_id[e.utterance_id], e) for e in ensembles]
    instances = [inst for coll in collections for inst in coll.instances]
    insertions = sum(coll.insertions for coll in collections)
    if insertions:
        _log(f"insertions excluded from per-phoneme stats: {insertions}")

    backends = {e.backend for e in ensembles}
    backend = backends.pop() if len(backends) == 1 else None
    if backend is None:
        _log("ensembles carry differing backend metadata; table records none")

    table = compose(normalize_components(phoneme_stats(instances)), args.weights, backend)
    _emit(serialize_score_table(table), args.out)
    _log(f"scored {len(table.rows)} phoneme types over {len(ensembles)} utterances")
    return 0


def _cmd_weights(args: argparse.Namespace) -> int:
    inventory, manifest = _load_corpus(args)
    table = load_score_table(args.table)
    if table.backend is not None and table.backend.adaptation_state == "finetuned":
        _log(
            "warning: score table comes from a fine-tuned backend; residual"
            " uncertainty is a weak difficulty signal and the resulting"
            " weights may be uninformative"
        )
    if args.backend_state is not None:
        actual = "none" if table.backend is None else table.backend.adaptation_state
        if actual != args.backend_state:
            _log(
                f"warning: expected backend state {args.backend_state!r},"
                f" score table records {actual!r}"
            )
    records = [r for r in manifest if args.split == "all" or r.split == args.split]
    if not records:
        _log(f"error: no utterances in split {args.split!r}")
        return 1
    scored = [(rec.id, utterance_score(rec, table)) for rec in records]
    _emit(serialize_weight_manifest(map_weights(scored)), args.out)
    _log(f"weighted {len(scored)} utterances from split {args.split!r}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    weights = load_weight_manifest(args.weight_manifest)
    if args.mode == "replacement":
        if args.epoch_size is None:
            _log("error: --epoch-size is required in replacement mode")
            return 1
        if args.factor is not None:
            _log("error: --factor applies to expansion mode only")
            return 1
        plan = sample_epoch(weights, args.epoch_size, args.seed, workers=args.workers)
    else:
        if args.epoch_size is not None:
            _log("error: --epoch-size applies to replacement mode only")
            return 1
        factor = 1.0 if args.factor is None else args.factor
        plan = expand_deterministic(weights, factor=factor)
    _emit(serialize_epoch_plan(plan), args.out)
    _log(f"planned {len(plan.draws)} draws in {args.mode} mode")
    return 0


def _cmd_eval_clinical(args: argparse.Namespace) -> int:
    inventory = load_inventory(args.inventory)
    table = load_score_table(args.table)
    report = load_clinical_report(args.report, inventory)
    curve = pr_curve(table.scores(), report, args.severity_threshold)
    if args.out is not None:
        _emit(serialize_pr_curve(curve), args.out)
    if args.svg is not None:
        _emit(pr_curve_svg(curve), args.svg)
    print(summary_line(curve))
    return 0


def _read_transcripts(path: str) -> dict[str, str]:
    from .errors import ParseError

    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh.read().splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            utt_id, sep, text = stripped.partition("\t")
            if not sep:
                raise ParseError(line_no, f"expected id<TAB>text, got {stripped!r}")
            if utt_id in out:
                raise ParseError(line_no, f"duplicate transcript id {utt_id!r}")
            out[utt_id] = text
    return out


def _cmd_metrics(args: argparse.Namespace) -> int:
    refs = _read_transcripts(args.ref)
    hyps = _read_transcripts(args.hyp)
    if set(refs) != set(hyps):
        only_ref = sorted(set(refs) - set(hyps))
        only_hyp = sorted(set(hyps) - set(refs))
        _log(
            "error: transcript ids differ between --ref and --hyp"
            f" (ref-only: {only_ref}, hyp-only: {only_hyp})"
        )
        return 1
    pairs = [(refs[utt_id], hyps[utt_id]) for utt_id in sorted(refs)]
    rates = {args.split: corpus_rates(pairs)}
    if args.baseline is not None:
        rows = delta_report(load_rates(args.baseline), rates)
        _emit(serialize_delta_rows(rows), args.out)
    else:
        _emit(serialize_rates(rates), args.out)
    r = rates[args.split]
    _log(
        f"split {args.split!r}: cer={100.0 * r.cer:.2f}% wer={100.0 * r.wer:.2f}%"
        f" over {r.token_counts[0]} chars / {r.token_counts[1]} words"
    )
    return 0


def _cmd_rechain(args: argparse.Namespace) -> int:
    inventory, manifest = _load_corpus(args)
    templates = load_templates(args.templates)
    result = plan_sentences(templates, manifest, gap_ms=args.gap_ms)
    for skip in result.skipped:
        _log(
            f"skipped template {' '.join(skip.template)!r}:"
            f" no recording for {' '.join(skip.missing_words)}"
        )
    os.makedirs(args.out_dir, exist_ok=True)
    records = []
    for plan in result.plans:
        wav_path = os.path.join(args.out_dir, f"{plan.sentence_id}.wav")
        records.append(
            concat_audio(plan, wav_path, audio_root=args.audio_root, split=args.split)
        )
    _emit(serialize_manifest(records), args.out)
    _log(f"rendered {len(records)} sentences, skipped {len(result.skipped)} templates")
    return 0


def _parse_source(raw: str) -> tuple[str, str]:
    label, sep, path = raw.partition("=")
    if not sep or not label or not path:
        raise argparse.ArgumentTypeError(f"expected LABEL=RATES_CSV, got {raw!r}")
    return label, path


def _cmd_report(args: argparse.Namespace) -> int:
    delta_mode = args.baseline is not None or args.treated is not None
    source_mode = bool(args.source)
    if delta_mode == source_mode:
        _log(
            "error: pass either --baseline and --treated (delta table)"
            " or one or more --source LABEL=RATES_CSV (source table)"
        )
        return 1
    if delta_mode:
        if args.baseline is None or args.treated is None:
            _log("error: delta reports need both --baseline and --treated")
            return 1
        rows = delta_report(load_rates(args.baseline), load_rates(args.treated))
        _emit(serialize_delta_rows(rows), args.out)
        return 0
    table_rows: list[tuple[str, str, ErrorRates]] = []
    for label, path in args.source:
        rates = load_rates(path)
        for split in sorted(rates):
            dataset = args.dataset if len(rates) == 1 else f"{args.dataset}/{split}"
            table_rows.append((dataset, label, rates[split]))
    _emit(serialize_source_rates(table_rows), args.out)
    return 0


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="output file (default: standard output)")


def _add_corpus(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--inventory", required=True, help="phoneme inventory file")
    parser.add_argument("--manifest", required=True, help="utterance manifest (JSONL)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phdscore", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser("simulate", help="generate ensembles from a confusion profile")
    _add_corpus(p)
    p.add_argument("--profile", required=True, help="confusion profile (key=value)")
    p.add_argument("--neighbors", required=True, help="confusable-neighbor map (TSV)")
    p.add_argument("--m", type=int, default=20, help="hypotheses per utterance")
    p.add_argument("--seed", type=int, default=None, help="override the profile seed")
    p.add_argument(
        "--residual",
        type=float,
        default=1.0,
        help="error-mass multiplier simulating an adapted backend (default 1.0)",
    )
    p.add_argument("--workers", type=int, default=1, help="worker threads")
    _add_out(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("score", help="turn ensembles into a per-phoneme score table")
    _add_corpus(p)
    p.add_argument(
        "--ensembles", required=True, nargs="+", help="ensemble file(s) (JSONL)"
    )
    p.add_argument(
        "--weights",
        type=_parse_weights,
        default=ScoreWeights(),
        help="component weights w_e,w_h,w_a (default 0.4,0.2,0.4)",
    )
    _add_out(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("weights", help="map utterance scores onto sampling weights")
    _add_corpus(p)
    p.add_argument("--table", required=True, help="score table from the score subcommand")
    p.add_argument(
        "--split",
        default="train",
        choices=SPLITS + ("all",),
        help="manifest split to weight (default train)",
    )
    p.add_argument(
        "--backend-state",
        choices=ADAPTATION_STATES + ("none",),
        default=None,
        help="assert the score table's backend state; mismatches warn",
    )
    _add_out(p)
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("sample", help="draw an epoch plan from a weight manifest")
    p.add_argument(
        "--weight-manifest", required=True, help="weight manifest from the weights subcommand"
    )
    p.add_argument(
        "--mode",
        choices=("replacement", "expansion"),
        default="replacement",
        help="sampling mode (default replacement)",
    )
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--epoch-size", type=int, default=None, help="draws per epoch")
    p.add_argument(
        "--factor", type=float, default=None, help="expansion factor (default 1.0)"
    )
    p.add_argument("--workers", type=int, default=1, help="worker threads")
    _add_out(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("eval-clinical", help="validate a score table against a report")
    p.add_argument("--inventory", required=True, help="phoneme inventory file")
    p.add_argument("--table", required=True, help="score table to evaluate")
    p.add_argument("--report", required=True, help="clinical report file")
    p.add_argument(
        "--severity-threshold",
        type=int,
        default=None,
        help="binarize graded labels at this severity (default: use binary flags)",
    )
    p.add_argument("--svg", help="write an SVG rendering of the curve")
    _add_out(p)
    p.set_defaults(func=_cmd_eval_clinical)

    p = sub.add_parser("metrics", help="compute CER/WER over transcript pairs")
    p.add_argument("--ref", required=True, help="reference transcripts (id<TAB>text)")
    p.add_argument("--hyp", required=True, help="hypothesis transcripts (id<TAB>text)")
    p.add_argument("--split", default="all", help="split label for the rates row")
    p.add_argument(
        "--baseline",
        default=None,
        help="baseline rates CSV; output becomes a signed delta table",
    )
    _add_out(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("rechain", help="concatenate word recordings into sentences")
    _add_corpus(p)
    p.add_argument("--templates", required=True, help="sentence templates (one per line)")
    p.add_argument("--audio-root", default="", help="base directory for audio paths")
    p.add_argument("--gap-ms", type=int, default=100, help="inter-word silence (ms)")
    p.add_argument(
        "--split",
        default="train",
        choices=SPLITS,
        help="split recorded on the new manifest rows (default train)",
    )
    p.add_argument("--out-dir", required=True, help="directory for rendered WAV files")
    _add_out(p)
    p.set_defaults(func=_cmd_rechain)

    p = sub.add_parser("report", help="assemble delta or per-source rate tables")
    p.add_argument("--baseline", default=None, help="baseline rates CSV (delta mode)")
    p.add_argument("--treated", default=None, help="treated rates CSV (delta mode)")
    p.add_argument(
        "--source",
        type=_parse_source,
        action="append",
        default=[],
        metavar="LABEL=RATES_CSV",
        help="labeled rates CSV (source mode; repeatable)",
    )
    p.add_argument("--dataset", default="corpus", help="dataset label (source mode)")
    _add_out(p)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        _log(f"error: {exc}")
        return 1
    except SystemExit as exc:  # --help path
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        _log("error: a subcommand is required")
        return 1
    try:
        return args.func(args)
    except PhdscoreError as exc:
        _log(f"error: {exc}")
        return 1
    except ValueError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"io error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
