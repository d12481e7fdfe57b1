"""Shared recompression machinery: pair statistics, level partitions,
and the builder that accumulates run-length grammar rules.

Both recompression engines (the grammar-level one and the string-level
reference) go through this module, so fresh symbols get identical ids
for identical level strings and traces can be compared symbol for
symbol.  Fresh rules are therefore assigned per round in sorted key
order rather than in traversal order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .grammar import Grammar, RunRule, SeqRule

STRATEGIES = ("det", "rand", "mixed")


class PartitionError(ValueError):
    """Raised when an injected partition sequence runs dry."""


def symbol_rank(sym: int) -> int:
    """Total order over level symbols: terminals first by byte value,
    then grammar symbols by rule index."""
    return -sym if sym < 0 else 256 + sym


class PairMaps:
    """Weighted adjacent-pair counts, keyed by normalized symbol pairs.

    A pair is normalized so the higher-ranked symbol comes first; m0
    holds pairs seen in normalized order, m1 the swapped ones, so the
    original orientation is always recoverable.
    """

    def __init__(self) -> None:
        self.m0: dict[tuple[int, int], int] = {}
        self.m1: dict[tuple[int, int], int] = {}

    def add(self, first: int, second: int, weight: int) -> None:
        if symbol_rank(first) >= symbol_rank(second):
            key = (first, second)
            self.m0[key] = self.m0.get(key, 0) + weight
        else:
            key = (second, first)
            self.m1[key] = self.m1.get(key, 0) + weight

    def oriented_items(self):
        """Yield ((a, b), weight) in original text orientation."""
        yield from self.m0.items()
        for (f, s), w in self.m1.items():
            yield (s, f), w

    def total_weight(self) -> int:
        return sum(self.m0.values()) + sum(self.m1.values())


@dataclass
class Partition:
    """Two-sided split of the level alphabet; True means the left side."""

    sides: dict[int, bool]

    def is_left(self, sym: int) -> bool:
        return self.sides.get(sym) is True

    def is_right(self, sym: int) -> bool:
        return self.sides.get(sym) is False

    def flipped(self) -> "Partition":
        return Partition({s: not v for s, v in self.sides.items()})


def replaced_weight(pairs: PairMaps, part: Partition) -> int:
    """Total weight of the pairs a replacement pass will consume."""
    return sum(w for (a, b), w in pairs.oriented_items()
               if part.is_left(a) and part.is_right(b))


def deterministic_partition(pairs: PairMaps, alphabet) -> Partition:
    """Greedy split maximizing crossing weight, then oriented the better
    way round.  Replaced weight is at least a quarter of the total."""
    adjacency: dict[int, list[tuple[int, int]]] = {}
    for (a, b), w in pairs.oriented_items():
        if a == b:
            continue
        adjacency.setdefault(a, []).append((b, w))
        adjacency.setdefault(b, []).append((a, w))
    sides: dict[int, bool] = {}
    for sym in sorted(alphabet, key=symbol_rank):
        to_left = to_right = 0
        for other, w in adjacency.get(sym, ()):
            assigned = sides.get(other)
            if assigned is True:
                to_left += w
            elif assigned is False:
                to_right += w
        # joining the side opposite the heavier neighborhood keeps more
        # pairs crossing; ties go left
        sides[sym] = False if to_left > to_right else True
    part = Partition(sides)
    forward = replaced_weight(pairs, part)
    backward = replaced_weight(pairs, part.flipped())
    return part if forward >= backward else part.flipped()


def randomized_partition(alphabet, rng: random.Random) -> Partition:
    """Independent fair coin per symbol, in rank order for stable
    replay under a fixed seed."""
    return Partition({sym: bool(rng.getrandbits(1))
                      for sym in sorted(alphabet, key=symbol_rank)})


def make_partition(pairs: PairMaps, alphabet, strategy: str,
                   rng: random.Random, pcomp_round: int) -> Partition:
    if strategy == "det":
        return deterministic_partition(pairs, alphabet)
    if strategy == "rand":
        return randomized_partition(alphabet, rng)
    if strategy == "mixed":
        if pcomp_round % 2 == 0:
            return deterministic_partition(pairs, alphabet)
        return randomized_partition(alphabet, rng)
    raise ValueError(f"unknown strategy {strategy!r}")


class PartitionSource:
    """Per-round partition supplier: strategy-driven or injected.

    Every partition handed out is logged, so a recorded run can be
    replayed into the other engine for lock-step comparison.
    """

    def __init__(self, strategy: str = "mixed", seed: int = 42,
                 injected: list[Partition] | None = None) -> None:
        if injected is None and strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.rng = random.Random(seed)
        self.injected = list(injected) if injected is not None else None
        self.pcomp_rounds = 0
        self.log: list[Partition] = []

    def next_partition(self, pairs: PairMaps, alphabet) -> Partition:
        if self.injected is not None:
            if self.pcomp_rounds >= len(self.injected):
                raise PartitionError(
                    f"injected partitions exhausted after {self.pcomp_rounds}")
            part = self.injected[self.pcomp_rounds]
        else:
            part = make_partition(pairs, alphabet, self.strategy, self.rng,
                                  self.pcomp_rounds)
        self.pcomp_rounds += 1
        self.log.append(part)
        return part


@dataclass
class RoundRecord:
    """Telemetry for one compression phase."""

    round: int
    phase: str  # "bcomp" or "pcomp"
    length_after: int
    new_rules: int
    replaced_weight: int = 0
    total_weight: int = 0
    work_size: int = 0  # working grammar size, grammar engine only


def records_to_tsv(records: list[RoundRecord]) -> str:
    """Long-format telemetry: one `round phase metric value` row each."""
    lines = ["round\tphase\tmetric\tvalue"]
    for r in records:
        rows = [("length_after", r.length_after), ("new_rules", r.new_rules)]
        if r.phase == "pcomp":
            rows += [("replaced_weight", r.replaced_weight),
                     ("total_weight", r.total_weight)]
        if r.work_size:
            rows.append(("work_size", r.work_size))
        for metric, value in rows:
            lines.append(f"{r.round}\t{r.phase}\t{metric}\t{value}")
    return "\n".join(lines) + "\n"


class RlslpBuilder:
    """Accumulates the output grammar across rounds.

    Rules are appended monotonically, so ids from earlier rounds stay
    stable.  Run rules are deduplicated globally by (base, exponent);
    pair rules are deduplicated only within their round, matching the
    fact that later rounds speak a fresh level alphabet.
    """

    def __init__(self) -> None:
        self.rules: list[SeqRule | RunRule] = []
        self.run_keys: dict[tuple[int, int], int] = {}

    def add_runs(self, keys) -> dict[tuple[int, int], int]:
        """Run rules for the distinct (symbol, length) keys, assigned in
        sorted key order.  Returns the key -> symbol id mapping."""
        out: dict[tuple[int, int], int] = {}
        for key in sorted(set(keys)):
            existing = self.run_keys.get(key)
            if existing is not None:
                out[key] = existing
                continue
            self.rules.append(RunRule(key[0], key[1]))
            rid = len(self.rules)
            self.run_keys[key] = rid
            out[key] = rid
        return out

    def add_pairs(self, keys) -> dict[tuple[int, int], int]:
        """Pair rules for the distinct (a, b) keys of one round, in
        sorted key order."""
        out: dict[tuple[int, int], int] = {}
        for key in sorted(set(keys)):
            self.rules.append(SeqRule(key))
            out[key] = len(self.rules)
        return out

    @property
    def productions(self) -> int:
        return len(self.rules)

    def finish(self, final_symbol: int) -> Grammar:
        """Close the grammar so `final_symbol` expands the whole text."""
        rules = list(self.rules)
        if final_symbol < 0 or final_symbol != len(rules):
            rules.append(SeqRule((final_symbol,)))
        return Grammar(rules, alphabet_size=256)


@dataclass
class RecompressResult:
    grammar: Grammar
    records: list[RoundRecord]
    partitions: list[Partition]
    trace: list | None = None


def round_limit(n: int) -> int:
    """Defensive bound on compression phases for an n-byte input."""
    return 64 * max(1, n).bit_length() + 64
