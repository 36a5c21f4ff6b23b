"""Prefix codebooks and character distributions for slotted binary links.

Three codebook families are supported: classic Huffman trees built with the
low-probability branch labeled 1, a run-length-limited variant of the same
tree in which every 1 is expanded to "10" (so no transmitted codeword stream
ever contains adjacent ones), and a fixed 5-bit teleprinter alphabet.
"""
from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "CharacterDistribution",
    "Codebook",
    "ValidationIssue",
    "ValidationReport",
    "english_letter_distribution",
    "build_huffman",
    "build_proposed",
    "ita2",
    "expected_length",
    "expected_ones",
    "validate",
    "load_distribution",
    "write_codebook_csv",
]

# Letter appearance frequencies (percent) from a dictionary-headword count,
# in descending order. These are the unrounded values; the usual two-decimal
# display of this table rounds them.
_ENGLISH_LETTER_PERCENT: tuple[tuple[str, float], ...] = (
    ("E", 11.1607), ("A", 8.4966), ("R", 7.5809), ("I", 7.5448),
    ("O", 7.1635), ("T", 6.9509), ("N", 6.6544), ("S", 5.7351),
    ("L", 5.4893), ("C", 4.5388), ("U", 3.6308), ("D", 3.3844),
    ("P", 3.1671), ("M", 3.0129), ("H", 3.0034), ("G", 2.4705),
    ("B", 2.0720), ("F", 1.8121), ("Y", 1.7779), ("W", 1.2899),
    ("K", 1.1016), ("V", 1.0074), ("X", 0.2902), ("Z", 0.2722),
    ("J", 0.1965), ("Q", 0.1962),
)

# The fixed 5-bit teleprinter letter codes, listed for A..Z.
_ITA2_ALPHABETICAL: tuple[str, ...] = (
    "11000", "10011", "01110", "10010", "10000", "10110", "01011",
    "00101", "01100", "11010", "11110", "01001", "00111", "00110",
    "00011", "01101", "11101", "01010", "10100", "00001", "11100",
    "01111", "11001", "10111", "10101", "10001",
)

_KINDS = ("huffman", "proposed", "ita2", "custom")

# Relative slack allowed on the raw sum (against 1.0 or 100.0) before
# normalization of an input distribution. The boundary is inclusive up to
# float summation noise: a percent column off by exactly 1e-4 is accepted.
_SUM_TOLERANCE = 1e-6 * (1.0 + 1e-9)


@dataclass(frozen=True)
class CharacterDistribution:
    """Alphabet symbols with appearance probabilities summing to one.

    Symbol order is preserved; it is the tie-breaking order for codebook
    construction, so two distributions with the same weights but different
    order may build different (equally optimal) trees.
    """

    symbols: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) < 2:
            raise ValueError("a distribution needs at least 2 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in distribution")
        if len(self.symbols) != len(self.probs):
            raise ValueError("symbols and probs length mismatch")
        if any(p <= 0.0 for p in self.probs):
            raise ValueError("probabilities must be positive")
        total = sum(self.probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")

    @classmethod
    def from_weights(
        cls, weights: Mapping[str, float] | Iterable[tuple[str, float]]
    ) -> "CharacterDistribution":
        """Build from symbol weights given as fractions or percentages.

        The raw sum must land within a relative 1e-6 of either 1 or 100;
        values are then normalized exactly.
        """
        pairs = list(weights.items()) if isinstance(weights, Mapping) else list(weights)
        if len(pairs) < 2:
            raise ValueError("a distribution needs at least 2 symbols")
        total = sum(p for _, p in pairs)
        if total <= 0:
            raise ValueError("weights must sum to a positive value")
        scale = 100.0 if total > 50.0 else 1.0
        if abs(total / scale - 1.0) > _SUM_TOLERANCE:
            raise ValueError(
                f"weights sum to {total!r}; expected 1 or 100 within rel {_SUM_TOLERANCE}"
            )
        return cls(
            symbols=tuple(s for s, _ in pairs),
            probs=tuple(p / total for _, p in pairs),
        )

    def prob(self, symbol: str) -> float:
        try:
            return self.probs[self.symbols.index(symbol)]
        except ValueError:
            raise KeyError(symbol) from None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.symbols, self.probs))


_ENGLISH: CharacterDistribution | None = None


def english_letter_distribution() -> CharacterDistribution:
    """The 26-letter English alphabet distribution bundled with the package."""
    global _ENGLISH
    if _ENGLISH is None:
        _ENGLISH = CharacterDistribution.from_weights(_ENGLISH_LETTER_PERCENT)
    return _ENGLISH


@dataclass(frozen=True)
class Codebook:
    """A prefix code: symbol to codeword over the alphabet {0, 1}.

    kind is one of huffman | proposed | ita2 | custom and selects
    receiver-side behavior (the proposed kind is the only one that gets
    error correction and contraction-based decoding).
    """

    kind: str
    codewords: dict[str, str] = field(repr=False)
    source: CharacterDistribution | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown codebook kind {self.kind!r}")
        if len(self.codewords) < 2:
            raise ValueError("a codebook needs at least 2 codewords")
        for sym, word in self.codewords.items():
            if not word or set(word) - {"0", "1"}:
                raise ValueError(f"bad codeword {word!r} for symbol {sym!r}")

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self.codewords)

    def __getitem__(self, symbol: str) -> str:
        return self.codewords[symbol]

    def kraft_sum(self) -> Fraction:
        return sum(
            (Fraction(1, 2 ** len(w)) for w in self.codewords.values()),
            start=Fraction(0),
        )


class _Node:
    __slots__ = ("prob", "seq", "symbol", "one_child", "zero_child")

    def __init__(self, prob, seq, symbol=None, one_child=None, zero_child=None):
        self.prob = prob
        self.seq = seq
        self.symbol = symbol
        self.one_child = one_child
        self.zero_child = zero_child

    def __lt__(self, other: "_Node") -> bool:
        # FIFO among equal probabilities: earlier insertion dequeues first.
        return (self.prob, self.seq) < (other.prob, other.seq)


def _build_tree(dist: CharacterDistribution) -> _Node:
    """Huffman merge with bit-1 on the strictly lower probability operand.

    At exact probability ties the earlier-inserted operand takes branch 0.
    Leaves are inserted in distribution order, merged nodes in creation order.
    """
    heap: list[_Node] = []
    seq = 0
    for sym, p in zip(dist.symbols, dist.probs):
        heapq.heappush(heap, _Node(p, seq, symbol=sym))
        seq += 1
    while len(heap) > 1:
        first = heapq.heappop(heap)
        second = heapq.heappop(heap)
        if first.prob == second.prob:
            one_child, zero_child = second, first
        else:
            one_child, zero_child = first, second
        heapq.heappush(
            heap,
            _Node(first.prob + second.prob, seq, one_child=one_child, zero_child=zero_child),
        )
        seq += 1
    return heap[0]


def _tree_codewords(root: _Node, one_label: str) -> dict[str, str]:
    codes: dict[str, str] = {}

    def walk(node: _Node, prefix: str) -> None:
        if node.symbol is not None:
            codes[node.symbol] = prefix
            return
        walk(node.one_child, prefix + one_label)
        walk(node.zero_child, prefix + "0")

    walk(root, "")
    return codes


def build_huffman(dist: CharacterDistribution) -> Codebook:
    """Optimal prefix code for dist with bit-0 on the higher probability branch."""
    words = _tree_codewords(_build_tree(dist), "1")
    return Codebook(kind="huffman", codewords={s: words[s] for s in dist.symbols}, source=dist)


def build_proposed(dist: CharacterDistribution) -> Codebook:
    """Run-length-limited code: the Huffman tree for dist with 1 expanded to 10.

    The expansion guarantees no codeword contains "11" and none ends in 1,
    so arbitrary concatenations stay free of adjacent ones.
    """
    huff = build_huffman(dist)
    words = {s: w.replace("1", "10") for s, w in huff.codewords.items()}
    return Codebook(kind="proposed", codewords=words, source=dist)


def _proposed_via_tree(dist: CharacterDistribution) -> Codebook:
    """Same code built directly on the merge tree with branch labels 10 / 0.

    Kept as an independent construction route; it must agree with
    build_proposed exactly and the test suite enforces that.
    """
    words = _tree_codewords(_build_tree(dist), "10")
    return Codebook(kind="proposed", codewords={s: words[s] for s in dist.symbols}, source=dist)


def ita2() -> Codebook:
    """The fixed 5-bit teleprinter codebook over the 26 English letters.

    Codewords are assigned by frequency rank: the i-th most frequent letter
    receives the i-th code of the classic alphabetical code list. All rate
    statistics of this package (expected 2.4696 ones per character under the
    bundled frequencies, and the derived fair molecule budgets) are defined
    by this ranked assignment.
    """
    dist = english_letter_distribution()
    words = dict(zip(dist.symbols, _ITA2_ALPHABETICAL))
    return Codebook(kind="ita2", codewords=words, source=dist)


def _check_symbols(cb: Codebook, dist: CharacterDistribution) -> None:
    if set(cb.codewords) != set(dist.symbols):
        missing = set(cb.codewords) ^ set(dist.symbols)
        raise ValueError(f"codebook and distribution symbols differ: {sorted(missing)}")


def expected_length(cb: Codebook, dist: CharacterDistribution) -> float:
    """Mean codeword length in bits per character under dist."""
    _check_symbols(cb, dist)
    return sum(dist.prob(s) * len(w) for s, w in cb.codewords.items())


def expected_ones(cb: Codebook, dist: CharacterDistribution) -> float:
    """Mean number of bit-1s per character under dist."""
    _check_symbols(cb, dist)
    return sum(dist.prob(s) * w.count("1") for s, w in cb.codewords.items())


@dataclass(frozen=True)
class ValidationIssue:
    check: str
    symbols: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


def validate(cb: Codebook) -> ValidationReport:
    """Structural checks for a codebook. Violations are data, not exceptions."""
    issues: list[ValidationIssue] = []
    words = cb.codewords

    seen: dict[str, str] = {}
    for sym, w in words.items():
        if w in seen:
            issues.append(
                ValidationIssue("duplicate", (seen[w], sym), f"codeword {w!r} assigned twice")
            )
        seen[w] = sym

    by_len = sorted(words.items(), key=lambda kv: len(kv[1]))
    for i, (sym_a, a) in enumerate(by_len):
        for sym_b, b in by_len[i + 1:]:
            if len(b) > len(a) and b.startswith(a):
                issues.append(
                    ValidationIssue("prefix", (sym_a, sym_b), f"{a!r} is a prefix of {b!r}")
                )

    kraft = cb.kraft_sum()
    if kraft > 1:
        issues.append(ValidationIssue("kraft", (), f"Kraft sum {kraft} exceeds 1"))
    if cb.kind == "huffman" and kraft != 1:
        issues.append(ValidationIssue("kraft", (), f"Kraft sum {kraft} of a huffman code is not 1"))

    if cb.kind == "proposed":
        for sym, w in words.items():
            if "11" in w:
                issues.append(ValidationIssue("adjacent-ones", (sym,), f"{w!r} contains '11'"))
            if w.endswith("1"):
                issues.append(ValidationIssue("trailing-one", (sym,), f"{w!r} ends in 1"))

    if cb.kind == "ita2":
        for sym, w in words.items():
            if len(w) != 5:
                issues.append(ValidationIssue("length", (sym,), f"{w!r} is not 5 bits"))

    return ValidationReport(tuple(issues))


def load_distribution(path: str | Path) -> CharacterDistribution:
    """Read a distribution from a CSV file with columns symbol, prob.

    The probability column may be named prob, probability or percent, and
    values may be fractions or percentages (detected from their sum).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty distribution file")
        fields = [f.strip().lower() for f in reader.fieldnames]
        try:
            sym_col = reader.fieldnames[fields.index("symbol")]
        except ValueError:
            raise ValueError(f"{path}: missing 'symbol' column") from None
        prob_col = None
        for name in ("prob", "probability", "percent"):
            if name in fields:
                prob_col = reader.fieldnames[fields.index(name)]
                break
        if prob_col is None:
            raise ValueError(f"{path}: missing probability column")
        pairs = []
        for row in reader:
            sym = (row[sym_col] or "").strip()
            if not sym:
                continue
            pairs.append((sym, float(row[prob_col])))
    return CharacterDistribution.from_weights(pairs)


def write_codebook_csv(cb: Codebook, dist: CharacterDistribution, path: str | Path) -> None:
    """Write symbol, codeword, probability rows for cb under dist."""
    _check_symbols(cb, dist)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["symbol", "codeword", "probability"])
        for sym in cb.codewords:
            writer.writerow([sym, cb.codewords[sym], repr(dist.prob(sym))])
