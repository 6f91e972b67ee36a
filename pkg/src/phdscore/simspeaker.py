"""Simulated speaker + recognizer: a seeded phoneme confusion channel.

The simulator corrupts reference phoneme sequences with a memoryless
per-phoneme channel (substitution distribution including the symbol
itself, a deletion probability, and a global per-slot insertion rate)
and emits ordinary ensemble records. Because the per-phoneme error
masses are planted by construction, the whole scoring pipeline can be
verified end to end: difficult phonemes are whatever the profile says
they are, and the score table has to recover them.

Corruption is slot-by-slot: for each reference symbol one draw decides
deletion vs which symbol is emitted, then one Bernoulli draw decides
whether a uniformly chosen phoneme is inserted after the slot. Every
utterance gets its own child seed derived from (run seed, utterance
id), so corpora can be generated concurrently with schedule-independent
output and single-utterance regeneration is possible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Mapping, Sequence

from .errors import InvalidProfile, ParseError, UnknownSymbol
from .manifest import (
    BackendMeta,
    EnsembleRecord,
    Inventory,
    UtteranceRecord,
)
from .rng import Stream, derive_seed

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class PhonemeChannel:
    """Outcome distribution for one reference phoneme slot."""

    substitutions: Mapping[str, float]  # over the inventory, including self
    deletion: float

    def __post_init__(self) -> None:
        # 1.0 is legal: an always-deleted phoneme is a valid degenerate channel
        if not 0.0 <= self.deletion <= 1.0:
            raise InvalidProfile(f"deletion probability {self.deletion} outside [0,1]")
        total = sum(self.substitutions.values()) + self.deletion
        if abs(total - 1.0) > _PROB_TOL:
            raise InvalidProfile(f"channel masses sum to {total}, expected 1")
        for sym, prob in self.substitutions.items():
            if prob < 0:
                raise InvalidProfile(f"negative probability {prob} for {sym!r}")


@dataclass(frozen=True)
class ConfusionModel:
    profile_name: str
    channels: Mapping[str, PhonemeChannel]
    insertion_rate: float
    inventory: Inventory
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.insertion_rate < 1.0:
            raise InvalidProfile(
                f"insertion rate {self.insertion_rate} outside [0,1)"
            )


def make_profile(
    inventory: Inventory,
    neighbors: Mapping[str, str],
    hard: Iterable[str],
    easy_err: float,
    hard_err: float,
    *,
    insertion_rate: float = 0.01,
    seed: int = 0,
    profile_name: str = "simspeaker",
) -> ConfusionModel:
    """Two-level difficulty profile over a full inventory.

    Hard phonemes carry total error mass hard_err, easy ones easy_err;
    each mass splits 70% substitution toward the phoneme's fixed
    confusable neighbor and 30% deletion.
    """
    hard_set = set(hard)
    if not hard_set:
        raise InvalidProfile("hard set is empty")
    unknown = hard_set - set(inventory.symbols)
    if unknown:
        raise InvalidProfile(f"hard set not in inventory: {sorted(unknown)}")
    if not 0.0 <= easy_err < hard_err < 1.0:
        raise InvalidProfile(
            f"need 0 <= easy_err < hard_err < 1, got {easy_err} / {hard_err}"
        )
    masses = {sym: (hard_err if sym in hard_set else easy_err) for sym in inventory}
    return profile_from_masses(
        inventory,
        neighbors,
        masses,
        insertion_rate=insertion_rate,
        seed=seed,
        profile_name=profile_name,
    )


def profile_from_masses(
    inventory: Inventory,
    neighbors: Mapping[str, str],
    masses: Mapping[str, float],
    *,
    insertion_rate: float = 0.01,
    seed: int = 0,
    profile_name: str = "simspeaker",
) -> ConfusionModel:
    """General constructor: one planted error mass per phoneme."""
    channels: dict[str, PhonemeChannel] = {}
    for sym in inventory:
        err = masses.get(sym)
        if err is None:
            raise InvalidProfile(f"no error mass for inventory phoneme {sym!r}")
        if not 0.0 <= err < 1.0:
            raise InvalidProfile(f"error mass {err} for {sym!r} outside [0,1)")
        neighbor = neighbors.get(sym)
        if neighbor is None or neighbor == sym or neighbor not in inventory:
            raise InvalidProfile(f"phoneme {sym!r} needs a confusable neighbor != itself")
        subs = {sym: 1.0 - err}
        if err > 0.0:
            subs[neighbor] = 0.7 * err
        channels[sym] = PhonemeChannel(substitutions=subs, deletion=0.3 * err)
    return ConfusionModel(
        profile_name=profile_name,
        channels=channels,
        insertion_rate=insertion_rate,
        inventory=inventory,
        seed=seed,
    )


def adapted_profile(model: ConfusionModel, residual: float = 0.1) -> ConfusionModel:
    """Scale all error masses by residual, renormalizing onto self.

    Models a personalized backend whose planted difficulties have been
    mostly trained away; residual 0 is a noiseless channel, residual 1
    the unchanged model.
    """
    if not 0.0 <= residual <= 1.0:
        raise InvalidProfile(f"residual must be in [0,1], got {residual}")
    channels: dict[str, PhonemeChannel] = {}
    for sym, chan in model.channels.items():
        subs: dict[str, float] = {}
        scaled_err = 0.0
        for target, prob in chan.substitutions.items():
            if target == sym:
                continue
            subs[target] = prob * residual
            scaled_err += prob * residual
        deletion = chan.deletion * residual
        scaled_err += deletion
        subs[sym] = 1.0 - scaled_err
        channels[sym] = PhonemeChannel(substitutions=subs, deletion=deletion)
    return replace(
        model,
        profile_name=f"{model.profile_name}-r{residual!r}",
        channels=channels,
        insertion_rate=model.insertion_rate * residual,
    )


def _corrupt_once(
    ref: Sequence[str],
    model: ConfusionModel,
    stream: Stream,
) -> tuple[str, ...]:
    out: list[str] = []
    symbols = model.inventory.symbols
    for sym in ref:
        chan = model.channels.get(sym)
        if chan is None:
            raise UnknownSymbol(0, sym)
        u = stream.next_unit()
        if u < chan.deletion:
            pass  # slot deleted
        else:
            # walk the substitution distribution in sorted-symbol order
            x = u - chan.deletion
            emitted = None
            for target in sorted(chan.substitutions):
                x -= chan.substitutions[target]
                if x < 0:
                    emitted = target
                    break
            if emitted is None:
                # float round-off at the very top of the cumulative walk
                emitted = sym
            out.append(emitted)
        if stream.next_unit() < model.insertion_rate:
            out.append(symbols[stream.next_int(len(symbols))])
    return tuple(out)


def generate_ensemble(
    utterance_id: str,
    ref: Sequence[str],
    model: ConfusionModel,
    m: int = 20,
    seed: int | None = None,
) -> EnsembleRecord:
    """M independent corrupted copies of one reference sequence."""
    if m < 1:
        raise InvalidProfile(f"M must be >= 1, got {m}")
    stream = Stream(model.seed if seed is None else seed)
    hypotheses = tuple(_corrupt_once(ref, model, stream) for _ in range(m))
    backend = BackendMeta(
        model_id=model.profile_name,
        m=m,
        p_drop=0.0,
        adaptation_state="simulated",
    )
    return EnsembleRecord(utterance_id=utterance_id, hypotheses=hypotheses, backend=backend)


def simulate_corpus(
    manifest: Sequence[UtteranceRecord],
    model: ConfusionModel,
    m: int = 20,
    seed: int | None = None,
    workers: int = 1,
) -> list[EnsembleRecord]:
    """Generate one ensemble per manifest record, sorted by utterance id.

    Each utterance uses the child seed derive_seed(run_seed, id), so
    results do not depend on manifest order or on the worker count.
    """
    run_seed = model.seed if seed is None else seed
    ordered = sorted(manifest, key=lambda r: r.id)

    def one(rec: UtteranceRecord) -> EnsembleRecord:
        return generate_ensemble(
            rec.id, rec.ref_phonemes, model, m=m, seed=derive_seed(run_seed, rec.id)
        )

    if workers <= 1:
        return [one(rec) for rec in ordered]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, ordered))


# ---------------------------------------------------------------------------
# profile and neighbor-map files

_PROFILE_KEYS = {"profile", "hard", "easy_err", "hard_err", "insertion_rate", "seed"}


def load_neighbors(path: str, inventory: Inventory) -> dict[str, str]:
    """Load the fixed confusable-neighbor map (symbol<TAB>neighbor)."""
    neighbors: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ParseError(line_no, "expected symbol<TAB>neighbor")
        sym, neighbor = parts
        if sym not in inventory:
            raise UnknownSymbol(line_no, sym)
        if neighbor not in inventory:
            raise UnknownSymbol(line_no, neighbor)
        if sym == neighbor:
            raise ParseError(line_no, f"{sym!r} cannot neighbor itself")
        if sym in neighbors:
            raise ParseError(line_no, f"duplicate neighbor entry for {sym!r}")
        neighbors[sym] = neighbor
    return neighbors


def load_profile(
    path: str,
    inventory: Inventory,
    neighbors: Mapping[str, str],
) -> ConfusionModel:
    """Load a key-value profile file and build its confusion model."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ParseError(line_no, f"expected key=value, got {stripped!r}")
        key = key.strip()
        if key not in _PROFILE_KEYS:
            raise ParseError(line_no, f"unknown profile key {key!r}")
        if key in values:
            raise ParseError(line_no, f"duplicate profile key {key!r}")
        values[key] = value.strip()
    for required in ("profile", "hard", "easy_err", "hard_err"):
        if required not in values:
            raise InvalidProfile(f"profile file is missing {required}=")
    try:
        easy_err = float(values["easy_err"])
        hard_err = float(values["hard_err"])
        insertion_rate = float(values.get("insertion_rate", "0.01"))
        seed = int(values.get("seed", "0"))
    except ValueError as exc:
        raise InvalidProfile(f"non-numeric profile value: {exc}") from exc
    return make_profile(
        inventory,
        neighbors,
        values["hard"].split(),
        easy_err,
        hard_err,
        insertion_rate=insertion_rate,
        seed=seed,
        profile_name=values["profile"],
    )
