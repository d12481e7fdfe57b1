"""Factorization-to-grammar conversion and grammar normalization.

lz_to_slg turns an LZ factorization into a straight-line grammar by
keeping a height-balanced concatenation tree over the processed prefix;
every phrase is materialized from O(log n) existing nodes.  slg_to_slp
binarizes wide rules, prune_slp removes dead, chain and duplicate rules.
"""

from __future__ import annotations

from .grammar import Grammar, RunRule, SeqRule, term
from .lz import Factorization, ParseError


class _Builder:
    """Binary concatenation rules with hash-consing and AVL balancing.

    Nodes are symbol ids: negative terminals (height 0, length 1) or
    1-based rule ids.  Joins keep the AVL criterion, sibling heights
    differ by at most one, so node height stays O(log length).
    """

    def __init__(self) -> None:
        self.rules: list[tuple[int, int]] = []
        self.dedup: dict[tuple[int, int], int] = {}
        self.heights: list[int] = [0]  # index 0 unused
        self.lengths: list[int] = [0]

    def height(self, x: int) -> int:
        return 0 if x < 0 else self.heights[x]

    def length(self, x: int) -> int:
        return 1 if x < 0 else self.lengths[x]

    def children(self, x: int) -> tuple[int, int]:
        return self.rules[x - 1]

    def node(self, a: int, b: int) -> int:
        key = (a, b)
        found = self.dedup.get(key)
        if found is not None:
            return found
        self.rules.append(key)
        rid = len(self.rules)
        self.dedup[key] = rid
        self.heights.append(1 + max(self.height(a), self.height(b)))
        self.lengths.append(self.length(a) + self.length(b))
        return rid

    def join(self, a: int, b: int) -> int:
        ha, hb = self.height(a), self.height(b)
        if abs(ha - hb) <= 1:
            return self.node(a, b)
        return self._join_right(a, b) if ha > hb else self._join_left(a, b)

    def _join_right(self, a: int, b: int) -> int:
        # pre: height(a) >= height(b) + 2, so a is an internal node
        al, ar = self.children(a)
        if self.height(ar) <= self.height(b) + 1:
            t = self.node(ar, b)
            if self.height(t) <= self.height(al) + 1:
                return self.node(al, t)
            arl, arr = self.children(ar)
            return self.node(self.node(al, arl), self.node(arr, b))
        t = self._join_right(ar, b)
        if self.height(t) <= self.height(al) + 1:
            return self.node(al, t)
        tl, tr = self.children(t)
        return self.node(self.node(al, tl), tr)

    def _join_left(self, a: int, b: int) -> int:
        bl, br = self.children(b)
        if self.height(bl) <= self.height(a) + 1:
            t = self.node(a, bl)
            if self.height(t) <= self.height(br) + 1:
                return self.node(t, br)
            bll, blr = self.children(bl)
            return self.node(self.node(a, bll), self.node(blr, br))
        t = self._join_left(a, bl)
        if self.height(t) <= self.height(br) + 1:
            return self.node(t, br)
        tl, tr = self.children(t)
        return self.node(tl, self.node(tr, br))

    def extract(self, x: int, lo: int, hi: int) -> int:
        """Node expanding to positions [lo, hi) of x's expansion."""
        while True:
            if lo == 0 and hi == self.length(x):
                return x
            a, b = self.children(x)
            left = self.length(a)
            if hi <= left:
                x = a
            elif lo >= left:
                x = b
                lo -= left
                hi -= left
            else:
                return self.join(self.extract(a, lo, left),
                                 self.extract(b, 0, hi - left))

    def power(self, x: int, q: int) -> int:
        """Concatenation of q >= 1 copies of x, by binary decomposition."""
        result = None
        base = x
        while q:
            if q & 1:
                result = base if result is None else self.join(result, base)
            q >>= 1
            if q:
                base = self.join(base, base)
        return result


def lz_to_slg(fz: Factorization) -> Grammar:
    """Straight-line grammar (binary rules) expanding to the parsed text."""
    b = _Builder()
    root: int | None = None
    pos = 0
    pending: list[int] = []

    def append(node: int) -> None:
        nonlocal root, pos
        root = node if root is None else b.join(root, node)
        pos += b.length(node)

    def flush() -> None:
        # batch buffered literals: pairwise joins of equal-height trees
        # are O(1) each, against O(log n) per plain root join
        nodes = pending
        while len(nodes) > 1:
            merged = [b.join(nodes[i], nodes[i + 1])
                      for i in range(0, len(nodes) - 1, 2)]
            if len(nodes) % 2:
                merged.append(nodes[-1])
            nodes = merged
        if nodes:
            append(nodes[0])
        pending.clear()

    for idx, ph in enumerate(fz.phrases):
        if ph.length == 0:
            if not 0 <= ph.pos <= 255:
                raise ParseError(f"phrase {idx + 1}: literal {ph.pos} out of range")
            pending.append(term(ph.pos))
            continue
        flush()
        if ph.pos < 1 or ph.pos > pos:
            raise ParseError(f"phrase {idx + 1}: source {ph.pos} beyond prefix")
        src = ph.pos - 1
        window = pos - src
        if ph.length <= window:
            append(b.extract(root, src, src + ph.length))
            continue
        # overlapping phrase: the content is periodic with period `window`
        period = b.extract(root, src, src + window)
        reps, tail = divmod(ph.length, window)
        append(b.power(period, reps))
        if tail:
            append(b.extract(root, src, src + tail))
    flush()
    if pos != fz.text_length:
        raise ParseError(f"phrases expand to {pos} bytes, "
                         f"header promised {fz.text_length}")

    if root is None:
        return Grammar([])
    rules: list[SeqRule] = [SeqRule(rhs) for rhs in b.rules]
    if root < 0 or root != len(rules):
        rules.append(SeqRule((root,)))
    return Grammar(rules)


def slg_to_slp(g: Grammar) -> Grammar:
    """Left-comb binarization: every Sequence rule gets rhs length <= 2."""
    if all(isinstance(r, RunRule) or len(r.rhs) <= 2 for r in g.rules):
        return g
    remap: list[int] = [0] * (len(g.rules) + 1)
    out: list[SeqRule | RunRule] = []
    for i, rule in enumerate(g.rules, start=1):
        if isinstance(rule, RunRule):
            base = rule.base if rule.base < 0 else remap[rule.base]
            out.append(RunRule(base, rule.exponent))
        else:
            rhs = [s if s < 0 else remap[s] for s in rule.rhs]
            while len(rhs) > 2:
                out.append(SeqRule((rhs[0], rhs[1])))
                rhs[:2] = [len(out)]
            out.append(SeqRule(tuple(rhs)))
        remap[i] = len(out)
    return Grammar(out, g.alphabet_size)


def prune_slp(g: Grammar) -> Grammar:
    """Drop unreachable rules, collapse unary chains, merge equal rhs.

    Idempotent: a second application returns an identical grammar.
    """
    if not g.rules:
        return Grammar([], g.alphabet_size)
    m = len(g.rules)
    # reachability first, so consing never touches dead rules
    alive = [False] * (m + 1)
    alive[m] = True
    for j in range(m, 0, -1):
        if not alive[j]:
            continue
        rule = g.rules[j - 1]
        refs = (rule.base,) if isinstance(rule, RunRule) else rule.rhs
        for s in refs:
            if s > 0:
                alive[s] = True
    remap: list[int] = [0] * (m + 1)
    consed: list[SeqRule | RunRule] = []
    seen: dict = {}
    for i in range(1, m + 1):
        if not alive[i]:
            continue
        rule = g.rules[i - 1]
        if isinstance(rule, RunRule):
            base = rule.base if rule.base < 0 else remap[rule.base]
            key = ("r", base, rule.exponent)
            new_rule: SeqRule | RunRule = RunRule(base, rule.exponent)
        else:
            rhs = tuple(s if s < 0 else remap[s] for s in rule.rhs)
            if len(rhs) == 1 and rhs[0] > 0:
                remap[i] = rhs[0]
                continue
            key = ("s", rhs)
            new_rule = SeqRule(rhs)
        found = seen.get(key)
        if found is not None:
            remap[i] = found
            continue
        consed.append(new_rule)
        remap[i] = len(consed)
        seen[key] = len(consed)
    # collapsing or deduplicating the start rule cannot leave later
    # rules behind: everything it references was consed before it
    del consed[remap[m]:]
    return Grammar(consed, g.alphabet_size)
