"""Deterministic epoch plans from utterance sampling weights.

Two semantics are exposed because the source idea ("sampled more
frequently") can be realized either way:

* replacement: n i.i.d. draws with P(id) proportional to weight,
  driven by the counter-based generator in :mod:`phdscore.rng` so the
  plan is a pure function of (weights, n, seed) and can be produced in
  parallel chunks without changing a single byte;
* expansion: no randomness at all, each utterance is duplicated
  round(weight * factor) times by largest-remainder allocation.

Plans serialize to a small header plus one utterance id per line.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyScores, InvalidWeight, ParseError
from .rng import unit_at
from .scoring import UtteranceWeight

MODE_REPLACEMENT = "replacement"
MODE_EXPANSION = "expansion"


@dataclass(frozen=True)
class EpochPlan:
    draws: tuple[str, ...]
    seed: int
    mode: str
    size: int | None = None
    factor: float | None = None


def _canonical(weights: Sequence[UtteranceWeight]) -> list[UtteranceWeight]:
    """Sort by id so plans do not depend on input file ordering."""
    if not weights:
        raise EmptyScores("no utterance weights given")
    for w in weights:
        if not w.weight > 0:
            raise InvalidWeight(
                f"utterance {w.utterance_id!r} has non-positive weight {w.weight}"
            )
    return sorted(weights, key=lambda w: w.utterance_id)


def sample_epoch(
    weights: Sequence[UtteranceWeight],
    n: int,
    seed: int,
    workers: int = 1,
) -> EpochPlan:
    """Draw n utterance ids i.i.d. with replacement, P proportional to weight.

    Draw t uses the t-th counter value of the seed's stream, so the
    result is identical for any workers >= 1; the worker pool only
    affects wall time.
    """
    if n < 1:
        raise ValueError(f"epoch size must be >= 1, got {n}")
    ordered = _canonical(weights)
    ids = [w.utterance_id for w in ordered]
    cumulative: list[float] = []
    total = 0.0
    for w in ordered:
        total += w.weight
        cumulative.append(total)

    def draw_range(bounds: tuple[int, int]) -> list[str]:
        start, stop = bounds
        out: list[str] = []
        last = len(ids) - 1
        for t in range(start, stop):
            x = unit_at(seed, t) * total
            idx = bisect_right(cumulative, x)
            out.append(ids[idx if idx <= last else last])
        return out

    if workers <= 1:
        draws = draw_range((0, n))
    else:
        step = math.ceil(n / workers)
        chunks = [(lo, min(lo + step, n)) for lo in range(0, n, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            draws = [d for part in pool.map(draw_range, chunks) for d in part]
    return EpochPlan(draws=tuple(draws), seed=seed, mode=MODE_REPLACEMENT, size=n)


def expand_deterministic(
    weights: Sequence[UtteranceWeight],
    factor: float = 1.0,
) -> EpochPlan:
    """Duplicate each utterance round(weight * factor) times, largest remainder.

    The total is round(factor * sum of weights); leftover slots after
    flooring go to the largest fractional remainders, ties broken by
    ascending utterance id. Every count lands within 1 of its
    real-valued quota.
    """
    if factor < 1.0:
        raise ValueError(f"expansion factor must be >= 1, got {factor}")
    ordered = _canonical(weights)
    quotas = [w.weight * factor for w in ordered]
    total = math.floor(math.fsum(quotas) + 0.5)
    base = [math.floor(q) for q in quotas]
    leftover = total - sum(base)
    remainders = sorted(
        range(len(ordered)),
        key=lambda i: (-(quotas[i] - base[i]), ordered[i].utterance_id),
    )
    counts = list(base)
    for i in remainders[:leftover]:
        counts[i] += 1
    draws: list[str] = []
    for w, count in zip(ordered, counts):
        draws.extend([w.utterance_id] * count)
    return EpochPlan(draws=tuple(draws), seed=0, mode=MODE_EXPANSION, factor=factor)


def serialize_epoch_plan(plan: EpochPlan) -> str:
    lines = [f"#seed={plan.seed}", f"#mode={plan.mode}"]
    if plan.mode == MODE_REPLACEMENT:
        lines.append(f"#n={plan.size}")
    else:
        lines.append(f"#factor={plan.factor!r}")
    lines.extend(plan.draws)
    return "\n".join(lines) + "\n"


def load_epoch_plan(path: str) -> EpochPlan:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    seed: int | None = None
    mode: str | None = None
    size: int | None = None
    factor: float | None = None
    draws: list[str] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, _, value = stripped[1:].partition("=")
            try:
                if key == "seed":
                    seed = int(value)
                elif key == "mode":
                    if value not in (MODE_REPLACEMENT, MODE_EXPANSION):
                        raise ValueError(value)
                    mode = value
                elif key == "n":
                    size = int(value)
                elif key == "factor":
                    factor = float(value)
                else:
                    raise ValueError(key)
            except ValueError as exc:
                raise ParseError(line_no, f"bad plan header {stripped!r}") from exc
            continue
        draws.append(stripped)
    if seed is None or mode is None:
        raise ParseError(0, "plan is missing #seed= or #mode= header")
    if mode == MODE_REPLACEMENT and (size is None or size != len(draws)):
        raise ParseError(0, f"plan announces n={size} but carries {len(draws)} draws")
    return EpochPlan(draws=tuple(draws), seed=seed, mode=mode, size=size, factor=factor)
