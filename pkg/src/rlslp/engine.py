"""Grammar-level recompression engine.

Runs the same round structure as the string-level reference, but on a
straight-line grammar of the text instead of the text itself, so each
round costs time proportional to the current grammar size.  The level
string is never materialized: run replacement works on per-rule maximal
prefix/suffix runs, pair replacement on exposed boundary symbols.

Within the working grammar, entries of a right-hand side are either
references to working rules (positive) or encoded level symbols
(negative).  A level symbol is an output-grammar symbol: a terminal
-(c+1) or a previously created rule id, encoded here as -(256 + id).
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

from .grammar import Grammar, GrammarError, RunRule, SeqRule
from .partition import (PairMaps, Partition, PartitionSource, RecompressResult,
                        RlslpBuilder, RoundRecord, replaced_weight,
                        round_limit)


def enc(level_sym: int) -> int:
    """Encode a level symbol for storage in a working rhs."""
    return level_sym if level_sym < 0 else -(256 + level_sym)


def dec(entry: int) -> int:
    """Decode a working rhs entry known to be a level symbol."""
    return entry if entry >= -256 else -entry - 256


class LevelGrammar:
    """Working straight-line grammar over the current level alphabet."""

    __slots__ = ("rules",)

    def __init__(self, rules: list[list[int]]) -> None:
        self.rules = rules

    @classmethod
    def from_slp(cls, g: Grammar) -> "LevelGrammar":
        """Import a sequence-only grammar, keeping only reachable rules.

        Unreachable rules would otherwise shed dead productions into the
        output and shift fresh symbol ids away from what the reference
        engine assigns for the same text.
        """
        for i, rule in enumerate(g.rules, start=1):
            if not isinstance(rule, SeqRule):
                raise GrammarError(f"rule {i}: run rules are not valid input")
        m = len(g.rules)
        alive = [False] * (m + 1)
        alive[m] = True
        for j in range(m, 0, -1):
            if not alive[j]:
                continue
            for e in g.rules[j - 1].rhs:
                if e > 0:
                    alive[e] = True
        remap = [0] * (m + 1)
        rules: list[list[int]] = []
        for j in range(1, m + 1):
            if not alive[j]:
                continue
            rules.append([e if e < 0 else remap[e]
                          for e in g.rules[j - 1].rhs])
            remap[j] = len(rules)
        return cls(rules)

    def level_lengths(self) -> tuple[list[int], int]:
        """Per-rule expansion length in level symbols, plus total rhs size."""
        lengths = [0] * (len(self.rules) + 1)
        size = 0
        for j, rhs in enumerate(self.rules, start=1):
            size += len(rhs)
            total = 0
            for e in rhs:
                total += 1 if e < 0 else lengths[e]
            lengths[j] = total
        return lengths, size

    def level_string(self) -> np.ndarray:
        """Materialized level string (tests and traces only)."""
        if not self.rules:
            return np.empty(0, dtype=np.int64)
        out: list[int] = []
        stack: list[list] = [[self.rules[-1], 0]]
        while stack:
            frame = stack[-1]
            rhs, pos = frame
            if pos == len(rhs):
                stack.pop()
                continue
            frame[1] = pos + 1
            e = rhs[pos]
            if e < 0:
                out.append(dec(e))
            else:
                stack.append([self.rules[e - 1], 0])
        return np.array(out, dtype=np.int64)


class RunVector:
    """Per-rule (symbol, length) runs with byte-packed lengths.

    Lengths below 255 live in a byte array; the sentinel 255 redirects
    to a rule-index-sorted overflow table, searched by bisection.
    """

    OVERFLOW = 255

    def __init__(self) -> None:
        self.syms: list[int] = []
        self.counts = bytearray()
        self.overflow: list[tuple[int, int]] = []

    def append(self, sym: int, count: int) -> None:
        index = len(self.syms)
        self.syms.append(sym)
        if count < self.OVERFLOW:
            self.counts.append(count)
        else:
            self.counts.append(self.OVERFLOW)
            self.overflow.append((index, count))

    def get(self, rule_index: int) -> tuple[int, int]:
        """Run of the 1-based rule; exact length even past the sentinel."""
        index = rule_index - 1
        count = self.counts[index]
        if count != self.OVERFLOW:
            return self.syms[index], count
        pos = bisect_left(self.overflow, (index, 0))
        return self.syms[index], self.overflow[pos][1]

    def __len__(self) -> int:
        return len(self.syms)


def _scan_blocks(lg: LevelGrammar, builder: RlslpBuilder | None):
    """Single bottom-up pass deriving per-rule run structure.

    With a builder, also produces the rewritten grammar of the next
    level (run replacement); without one, only the run data needed by
    compute_runs.  Item lists hold maximal blocks as (symbol, length)
    2-tuples, interleaved with opaque already-rewritten entries.
    """
    rules = lg.rules
    m = len(rules)
    lr: list = [None] * (m + 1)
    rr: list = [None] * (m + 1)
    single = [False] * (m + 1)
    cap_entry: list = [None] * (m + 1)
    new_rules: list[list] = [] if builder is not None else None
    run_keys: set[tuple[int, int]] = set()
    build = builder is not None

    for j, rhs in enumerate(rules, start=1):
        items: list = []
        for e in rhs:
            if e < 0:
                s = dec(e)
                if items and type(items[-1]) is tuple and len(items[-1]) == 2 \
                        and items[-1][0] == s:
                    items[-1] = (s, items[-1][1] + 1)
                else:
                    items.append((s, 1))
                continue
            child_lr = lr[e]
            if items and type(items[-1]) is tuple and len(items[-1]) == 2 \
                    and items[-1][0] == child_lr[0]:
                items[-1] = (child_lr[0], items[-1][1] + child_lr[1])
            else:
                items.append(child_lr)
            if single[e]:
                continue
            ce = cap_entry[e]
            if ce is not None:
                items.append(ce)
            # the suffix run never merges leftward: a cap starts and ends
            # with symbols different from the boundary runs
            items.append(rr[e])
        lr[j] = items[0]
        rr[j] = items[-1]
        if len(items) == 1:
            single[j] = True
            continue
        if not build:
            continue
        cap = items[1:-1]
        if not cap:
            continue
        entries = []
        for item in cap:
            if type(item) is tuple and len(item) == 2:
                sym, count = item
                if count >= 2:
                    run_keys.add(item)
                    entries.append(("R", sym, count))
                else:
                    entries.append(enc(sym))
            else:
                entries.append(item)
        if len(entries) == 1:
            cap_entry[j] = entries[0]
        else:
            new_rules.append(entries)
            cap_entry[j] = len(new_rules)
    return lr, rr, single, cap_entry, new_rules, run_keys


def compute_runs(lg: LevelGrammar) -> tuple[RunVector, RunVector]:
    """Maximal prefix and suffix runs of every rule's level expansion."""
    lr, rr, _single, _caps, _new, _keys = _scan_blocks(lg, None)
    lr_vec = RunVector()
    rr_vec = RunVector()
    for j in range(1, len(lg.rules) + 1):
        lr_vec.append(*lr[j])
        rr_vec.append(*rr[j])
    return lr_vec, rr_vec


def bcomp(lg: LevelGrammar, builder: RlslpBuilder) -> LevelGrammar:
    """One run-replacement round on the working grammar.

    Every maximal run of length >= 2 in the level string appears either
    inside some rule's cap or at the start symbol's boundary, so run
    rules are created from those places only, never by expansion.
    """
    m = len(lg.rules)
    lr, rr, single, cap_entry, new_rules, run_keys = _scan_blocks(lg, builder)

    def block(item: tuple[int, int]):
        sym, count = item
        if count >= 2:
            run_keys.add(item)
            return ("R", sym, count)
        return enc(sym)

    # the start symbol has no parent to absorb its boundary runs
    wrapper = [block(lr[m])]
    if not single[m]:
        if cap_entry[m] is not None:
            wrapper.append(cap_entry[m])
        wrapper.append(block(rr[m]))
    new_rules.append(wrapper)

    ids = builder.add_runs(run_keys)
    for rhs in new_rules:
        for k, e in enumerate(rhs):
            if type(e) is tuple:
                rhs[k] = enc(ids[(e[1], e[2])])
    return LevelGrammar(new_rules)


def compute_nocc(lg: LevelGrammar) -> list[int]:
    """How often each rule occurs in the derivation of the start symbol.

    Occurrence counts flow from the start rule backwards through the
    reversed reference edges, weighted by how often a rule mentions its
    child; rules are already in reverse topological order from the end.
    """
    m = len(lg.rules)
    occ = [0] * (m + 1)
    occ[m] = 1
    for j in range(m, 0, -1):
        w = occ[j]
        if w == 0:
            continue
        for e in lg.rules[j - 1]:
            if e > 0:
                occ[e] += w
    return occ


def collect_pair_frequencies(lg: LevelGrammar, occ: list[int]
                             ) -> tuple[PairMaps, set[int]]:
    """Weighted boundary pairs of all reachable rules, and the alphabet.

    Every adjacent position of the level string crosses exactly one rule
    boundary (at the lowest rule spanning it), so summing boundary pairs
    weighted by rule occurrences counts each adjacency exactly once.
    """
    m = len(lg.rules)
    lms = [0] * (m + 1)
    rms = [0] * (m + 1)
    alphabet: set[int] = set()
    maps = PairMaps()
    for j, rhs in enumerate(lg.rules, start=1):
        first = rhs[0]
        lms[j] = dec(first) if first < 0 else lms[first]
        last = rhs[-1]
        rms[j] = dec(last) if last < 0 else rms[last]
    for j, rhs in enumerate(lg.rules, start=1):
        w = occ[j]
        if w == 0:
            continue
        prev = None
        for e in rhs:
            if e < 0:
                sym = dec(e)
                alphabet.add(sym)
                left_edge = right_edge = sym
            else:
                left_edge = lms[e]
                right_edge = rms[e]
            if prev is not None:
                maps.add(prev, left_edge, w)
            prev = right_edge
    return maps, alphabet


def pcomp(lg: LevelGrammar, part: Partition, builder: RlslpBuilder
          ) -> LevelGrammar:
    """One pair-replacement round on the working grammar.

    Each rule is rewritten over exposed atoms: its own level symbols,
    and per child the stripped boundary symbols around an opaque middle.
    A left-side first symbol or right-side last symbol can only combine
    across the rule boundary, so it moves up to the parent; everything
    else is settled locally.  Atoms here are ints (level symbols),
    ("r", id) references, or ("P", a, b) placeholders for fresh pairs.
    """
    m = len(lg.rules)
    triples: list = [None] * (m + 1)
    new_rules: list[list] = []
    pair_keys: set[tuple[int, int]] = set()
    is_left = part.is_left
    is_right = part.is_right

    def to_entry(atom):
        if type(atom) is int:
            return enc(atom)
        if len(atom) == 3:
            return atom
        return atom[1]

    for j, rhs in enumerate(lg.rules, start=1):
        atoms: list = []
        for e in rhs:
            if e < 0:
                atoms.append(dec(e))
            else:
                lb, mid, rb = triples[e]
                if lb is not None:
                    atoms.append(lb)
                if mid is not None:
                    atoms.append(mid)
                if rb is not None:
                    atoms.append(rb)
        out: list = []
        i = 0
        count = len(atoms)
        while i < count:
            a = atoms[i]
            if i + 1 < count and type(a) is int and is_left(a):
                b = atoms[i + 1]
                if type(b) is int and is_right(b):
                    pair_keys.add((a, b))
                    out.append(("P", a, b))
                    i += 2
                    continue
            out.append(a)
            i += 1
        lb = rb = None
        start, end = 0, len(out)
        if type(out[0]) is int and is_right(out[0]):
            lb = out[0]
            start = 1
        if end > start and type(out[end - 1]) is int and is_left(out[end - 1]):
            rb = out[end - 1]
            end -= 1
        width = end - start
        if width == 0:
            mid = None
        elif width == 1:
            mid = out[start]
        else:
            new_rules.append([to_entry(x) for x in out[start:end]])
            mid = ("r", len(new_rules))
        triples[j] = (lb, mid, rb)

    lb, mid, rb = triples[m]
    wrapper: list = []
    if lb is not None:
        wrapper.append(enc(lb))
    if mid is not None:
        wrapper.append(to_entry(mid))
    if rb is not None:
        wrapper.append(enc(rb))
    if not (len(wrapper) == 1 and type(wrapper[0]) is int
            and wrapper[0] == len(new_rules) and new_rules):
        new_rules.append(wrapper)

    ids = builder.add_pairs(pair_keys)
    for rhs_new in new_rules:
        for k, e in enumerate(rhs_new):
            if type(e) is tuple:
                rhs_new[k] = enc(ids[(e[1], e[2])])
    return LevelGrammar(new_rules)


def _start_symbol(lg: LevelGrammar) -> int:
    """Level symbol a start rule of level length 1 expands to."""
    e = lg.rules[-1][0]
    while e > 0:
        e = lg.rules[e - 1][0]
    return dec(e)


def recompress(slp: Grammar, strategy: str = "mixed", seed: int = 42,
               source: PartitionSource | None = None,
               collect_trace: bool = False) -> RecompressResult:
    """Run-length grammar of the text an SLP expands to.

    Alternates run and pair replacement on the working grammar until the
    level string is a single symbol; that symbol, wrapped if needed,
    becomes the start of the accumulated output grammar.
    """
    if not slp.rules:
        raise GrammarError("cannot recompress an empty grammar")
    lg = LevelGrammar.from_slp(slp)
    lengths, _size = lg.level_lengths()
    length = lengths[-1]
    if source is None:
        source = PartitionSource(strategy, seed)
    builder = RlslpBuilder()
    records: list[RoundRecord] = []
    trace: list[np.ndarray] | None = [] if collect_trace else None
    limit = round_limit(length)
    round_no = 0
    while length > 1:
        if round_no >= limit:
            raise RuntimeError(f"no convergence within {limit} phases")
        before = builder.productions
        lg = bcomp(lg, builder)
        lengths, size = lg.level_lengths()
        length = lengths[-1]
        records.append(RoundRecord(round_no, "bcomp", length,
                                   builder.productions - before,
                                   work_size=size))
        if trace is not None:
            trace.append(lg.level_string())
        round_no += 1
        if length <= 1:
            break
        occ = compute_nocc(lg)
        pairs, alphabet = collect_pair_frequencies(lg, occ)
        part = source.next_partition(pairs, alphabet)
        replaced = replaced_weight(pairs, part)
        before = builder.productions
        lg = pcomp(lg, part, builder)
        lengths, size = lg.level_lengths()
        length = lengths[-1]
        records.append(RoundRecord(round_no, "pcomp", length,
                                   builder.productions - before,
                                   replaced_weight=replaced,
                                   total_weight=pairs.total_weight(),
                                   work_size=size))
        if trace is not None:
            trace.append(lg.level_string())
        round_no += 1
    grammar = builder.finish(_start_symbol(lg))
    return RecompressResult(grammar, records, source.log, trace)
