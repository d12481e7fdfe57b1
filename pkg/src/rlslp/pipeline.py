"""End-to-end compression pipeline and artifact verification.

Five stages: approximate LZ parse, factorization to grammar, grammar to
binary form, pruning, then grammar-level recompression.  Each stage is
timed and its allocation peak recorded, so engine comparisons can be
made without the input text buffer polluting the numbers.
"""

from __future__ import annotations

import resource
import time
import tracemalloc
from dataclasses import dataclass, field
from pathlib import Path

from .engine import recompress
from .grammar import Grammar, encode_grammar, grammar_size, iter_expansion
from .lz import encode_factorization, parse_bentley_mcilroy
from .partition import STRATEGIES
from .slg import lz_to_slg, prune_slp, slg_to_slp

STAGE_NAMES = ("parse_bm", "lz_to_slg", "slg_to_slp", "prune_slp",
               "recompress")


class PipelineError(RuntimeError):
    """Stage failure; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(message)
        self.stage = stage


@dataclass
class PipelineConfig:
    block_size: int = 50
    strategy: str = "mixed"
    seed: int = 42
    verify: bool = False
    keep_intermediates: bool = False
    lz_only: bool = False
    # allocation tracing roughly triples stage cost; switch it off for
    # timing-sensitive runs and peak_alloc reads as 0
    profile_memory: bool = True

    def __post_init__(self) -> None:
        if self.block_size < 2:
            raise ValueError("block_size must be at least 2")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class StageStat:
    name: str
    seconds: float
    peak_alloc: int
    rss_peak: int


@dataclass
class StatsReport:
    stages: list[StageStat] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)

    def stage(self, name: str) -> StageStat:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def total_seconds(self) -> float:
        return sum(s.seconds for s in self.stages)

    def to_tsv(self) -> str:
        lines = ["name\tmetric\tvalue"]
        for s in self.stages:
            lines.append(f"{s.name}\tseconds\t{s.seconds:.6f}")
            lines.append(f"{s.name}\tpeak_alloc_bytes\t{s.peak_alloc}")
            lines.append(f"{s.name}\trss_peak_bytes\t{s.rss_peak}")
        for key, value in self.counts.items():
            lines.append(f"totals\t{key}\t{value}")
        return "\n".join(lines) + "\n"


def _rss_peak_bytes() -> int:
    # ru_maxrss is in KiB on Linux; a lifetime high-water mark, so
    # per-stage values are monotone and only approximate
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def run_stage(report: StatsReport, name: str, fn, profile: bool = True):
    """Run one stage with wall-clock and allocation-peak accounting."""
    tracing = tracemalloc.is_tracing()
    if profile:
        if not tracing:
            tracemalloc.start()
        tracemalloc.reset_peak()
    t0 = time.perf_counter()
    try:
        result = fn()
    except Exception as exc:
        if profile and not tracing:
            tracemalloc.stop()
        raise PipelineError(name, str(exc)) from exc
    seconds = time.perf_counter() - t0
    peak = 0
    if profile:
        _current, peak = tracemalloc.get_traced_memory()
        if not tracing:
            tracemalloc.stop()
    report.stages.append(StageStat(name, seconds, peak, _rss_peak_bytes()))
    return result


def verify_expansion(g: Grammar, text: bytes) -> int | None:
    """First mismatch offset between expand(g) and text, None if equal."""
    off = 0
    for chunk in iter_expansion(g):
        want = text[off:off + len(chunk)]
        if want != chunk:
            limit = min(len(want), len(chunk))
            for i in range(limit):
                if chunk[i] != want[i]:
                    return off + i
            return off + limit
        off += len(chunk)
    if off != len(text):
        return off
    return None


def verify_files(grammar_path: str | Path, text_path: str | Path
                 ) -> tuple[bool, int | None]:
    """Streaming comparison of a stored grammar against a text file."""
    from .grammar import decode_grammar

    g = decode_grammar(Path(grammar_path).read_bytes())
    off = 0
    with open(text_path, "rb") as fh:
        for chunk in iter_expansion(g):
            want = fh.read(len(chunk))
            if want != chunk:
                limit = min(len(want), len(chunk))
                for i in range(limit):
                    if chunk[i] != want[i]:
                        return False, off + i
                return False, off + limit
            off += len(chunk)
        if fh.read(1):
            return False, off
    return True, None


def run_pipeline(input_path: str | Path, output_path: str | Path,
                 cfg: PipelineConfig | None = None) -> StatsReport:
    """Compress a text file into a stored run-length grammar.

    Writes the grammar to output_path (or the factorization, when only
    the parse stage is selected) and returns the stats report; the
    caller persists the report wherever it wants it.
    """
    cfg = cfg or PipelineConfig()
    input_path = Path(input_path)
    output_path = Path(output_path)
    text = input_path.read_bytes()
    if not text:
        raise PipelineError("input", f"{input_path}: input is empty")
    report = StatsReport()
    report.counts["input_bytes"] = len(text)

    prof = cfg.profile_memory
    fz = run_stage(report, "parse_bm",
                   lambda: parse_bentley_mcilroy(text, cfg.block_size),
                   profile=prof)
    report.counts["phrases"] = len(fz.phrases)
    if cfg.lz_only:
        output_path.write_bytes(encode_factorization(fz))
        return report
    if cfg.keep_intermediates:
        Path(str(output_path) + ".lzpf").write_bytes(encode_factorization(fz))

    slg = run_stage(report, "lz_to_slg", lambda: lz_to_slg(fz),
                    profile=prof)
    report.counts["slg_rules"] = len(slg.rules)
    if cfg.keep_intermediates:
        Path(str(output_path) + ".slg").write_bytes(encode_grammar(slg))

    slp = run_stage(report, "slg_to_slp", lambda: slg_to_slp(slg),
                    profile=prof)
    report.counts["slp_rules"] = len(slp.rules)
    if cfg.keep_intermediates:
        Path(str(output_path) + ".slp").write_bytes(encode_grammar(slp))

    pruned = run_stage(report, "prune_slp", lambda: prune_slp(slp),
                       profile=prof)
    report.counts["pruned_rules"] = len(pruned.rules)
    if cfg.keep_intermediates:
        Path(str(output_path) + ".pruned").write_bytes(encode_grammar(pruned))

    result = run_stage(report, "recompress",
                       lambda: recompress(pruned, cfg.strategy, cfg.seed),
                       profile=prof)
    size = grammar_size(result.grammar)
    report.counts["productions"] = size.productions
    report.counts["grammar_size"] = size.size
    output_path.write_bytes(encode_grammar(result.grammar))

    if cfg.verify:
        offset = verify_expansion(result.grammar, text)
        if offset is not None:
            raise PipelineError(
                "verify", f"expansion mismatch at offset {offset}")
    return report
