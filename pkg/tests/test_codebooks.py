"""Codebook construction, statistics and validation."""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molcode import codebooks
from molcode.codebooks import (
    CharacterDistribution,
    Codebook,
    build_huffman,
    build_proposed,
    expected_length,
    expected_ones,
    ita2,
    load_distribution,
    validate,
    write_codebook_csv,
)

# Reference codeword table for the English letter distribution. Frozen from
# an independent hand-checked construction; the builder must reproduce it
# bit for bit.
GOLDEN_HUFFMAN = {
    "E": "101", "A": "0000", "R": "0001", "I": "0010", "O": "0100",
    "T": "0101", "N": "0110", "S": "1001", "L": "1100", "C": "1110",
    "U": "00110", "D": "01110", "P": "01111", "M": "10000", "H": "10001",
    "G": "11010", "B": "11110", "F": "001110", "Y": "001111",
    "W": "110110", "K": "110111", "V": "111110", "X": "11111100",
    "Z": "11111101", "J": "11111110", "Q": "11111111",
}

# Statistics of the three bundled codebooks under the English letters,
# frozen at full precision from the same reference construction.
EXP_LEN_HUFFMAN = 4.273785726214272
EXP_ONES_HUFFMAN = 1.9753280246719744
EXP_LEN_PROPOSED = 6.249113750886247
EXP_ONES_ITA2 = 2.469588530411469
ONES_RATIO = 0.7998611915900243


def small_distributions():
    """Random distributions over 2..6 symbols for property tests."""
    return st.integers(2, 6).flatmap(
        lambda n: st.lists(
            st.floats(0.01, 1.0, allow_nan=False), min_size=n, max_size=n
        )
    ).map(
        lambda ws: CharacterDistribution.from_weights(
            {chr(ord("a") + i): w / math.fsum(ws) for i, w in enumerate(ws)}
        )
    )


class TestEnglishDistribution:
    def test_has_26_letters_summing_to_one(self, dist):
        assert len(dist.symbols) == 26
        assert math.fsum(dist.probs) == pytest.approx(1.0, abs=1e-12)

    def test_e_is_most_frequent(self, dist):
        assert max(dist.as_dict(), key=dist.prob) == "E"

    def test_probabilities_keep_relative_weights(self, dist):
        # E/A weight ratio survives normalization exactly.
        assert dist.prob("E") / dist.prob("A") == pytest.approx(
            11.1607 / 8.4966, rel=1e-12
        )


class TestHuffman:
    def test_reference_table_bit_exact(self, hcb):
        assert hcb.codewords == GOLDEN_HUFFMAN

    def test_expected_length(self, hcb, dist):
        assert expected_length(hcb, dist) == pytest.approx(EXP_LEN_HUFFMAN, abs=1e-12)

    def test_expected_ones(self, hcb, dist):
        assert expected_ones(hcb, dist) == pytest.approx(EXP_ONES_HUFFMAN, abs=1e-12)

    def test_kraft_equality(self, hcb):
        assert hcb.kraft_sum() == Fraction(1)

    def test_two_equal_symbols_tie_break(self):
        d = CharacterDistribution.from_weights({"a": 0.5, "b": 0.5})
        cb = build_huffman(d)
        assert cb.codewords == {"a": "0", "b": "1"}

    def test_two_unequal_symbols(self):
        d = CharacterDistribution.from_weights({"a": 0.9, "b": 0.1})
        cb = build_huffman(d)
        assert cb.codewords == {"a": "0", "b": "1"}

    @settings(max_examples=60, deadline=None)
    @given(small_distributions())
    def test_optimal_among_prefix_codes(self, d):
        """Cost matches brute force over all Kraft-tight length multisets."""
        cb = build_huffman(d)
        n = len(d.symbols)
        probs = sorted(d.probs, reverse=True)
        best = math.inf
        max_len = n - 1

        def search(remaining, budget, min_len, lengths):
            nonlocal best
            if remaining == 0:
                if budget == 0:
                    # Rearrangement: longest codes on rarest symbols.
                    cost = sum(p * l for p, l in zip(probs, sorted(lengths)))
                    best = min(best, cost)
                return
            for l in range(min_len, max_len + 1):
                share = Fraction(1, 2 ** l)
                if share * remaining < budget and l < max_len:
                    continue
                if share > budget:
                    break
                search(remaining - 1, budget - share, l, lengths + [l])

        search(n, Fraction(1), 1, [])
        assert expected_length(cb, d) == pytest.approx(best, rel=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(small_distributions())
    def test_prefix_free_and_kraft_tight(self, d):
        cb = build_huffman(d)
        assert validate(cb).ok
        assert cb.kraft_sum() == Fraction(1)


class TestProposed:
    def test_is_bit_one_substitution_of_huffman(self, hcb, pcb):
        assert set(pcb.codewords) == set(hcb.codewords)
        for sym, w in hcb.codewords.items():
            assert pcb.codewords[sym] == w.replace("1", "10")

    def test_reference_codewords(self, pcb):
        assert pcb.codewords["E"] == "10010"
        assert pcb.codewords["S"] == "100010"
        assert pcb.codewords["H"] == "1000010"
        assert pcb.codewords["Q"] == "1010101010101010"

    def test_expected_length(self, pcb, dist):
        assert expected_length(pcb, dist) == pytest.approx(EXP_LEN_PROPOSED, abs=1e-12)

    def test_ones_count_unchanged_by_substitution(self, pcb, dist):
        assert expected_ones(pcb, dist) == pytest.approx(EXP_ONES_HUFFMAN, abs=1e-12)

    def test_matches_tree_labeled_construction(self, dist, pcb):
        alt = codebooks._proposed_via_tree(dist)
        assert alt.codewords == pcb.codewords

    def test_kraft_strictly_below_one(self, pcb):
        assert pcb.kraft_sum() < 1

    @settings(max_examples=100, deadline=None)
    @given(small_distributions())
    def test_no_adjacent_ones_and_zero_tail(self, d):
        cb = build_proposed(d)
        assert validate(cb).ok
        for w in cb.codewords.values():
            assert "11" not in w
            assert len(w) == 1 or not w.endswith("1")


class TestIta2:
    def test_five_bit_fixed_length(self, icb):
        assert all(len(w) == 5 for w in icb.codewords.values())
        assert len(set(icb.codewords.values())) == 26

    def test_frequent_letters_get_light_codes(self, icb, dist):
        # The assignment pairs letters by frequency rank with the standard
        # five-bit patterns in alphabetical order, so E lands on the
        # pattern listed first.
        assert icb.codewords["E"] == "11000"
        ranked = sorted(dist.symbols, key=dist.prob, reverse=True)
        assert [icb.codewords[s] for s in ranked] == list(codebooks._ITA2_ALPHABETICAL)

    def test_expected_ones(self, icb, dist):
        assert expected_ones(icb, dist) == pytest.approx(EXP_ONES_ITA2, abs=1e-12)

    def test_ones_ratio_vs_huffman(self, hcb, icb, dist):
        ratio = expected_ones(hcb, dist) / expected_ones(icb, dist)
        assert ratio == pytest.approx(ONES_RATIO, abs=1e-12)


class TestValidate:
    def test_duplicate_codeword(self):
        cb = Codebook(kind="custom", codewords={"a": "0", "b": "0"})
        checks = {i.check for i in validate(cb).issues}
        assert "duplicate" in checks

    def test_prefix_violation(self):
        cb = Codebook(kind="custom", codewords={"a": "0", "b": "01"})
        checks = {i.check for i in validate(cb).issues}
        assert "prefix" in checks

    def test_kraft_overflow(self):
        cb = Codebook(kind="custom", codewords={"a": "0", "b": "1", "c": "10"})
        checks = {i.check for i in validate(cb).issues}
        assert "kraft" in checks

    def test_adjacent_ones_flagged_for_proposed_kind(self):
        cb = Codebook(kind="proposed", codewords={"a": "110", "b": "0"})
        checks = {i.check for i in validate(cb).issues}
        assert "adjacent-ones" in checks

    def test_trailing_one_flagged_for_proposed_kind(self):
        cb = Codebook(kind="proposed", codewords={"a": "01", "b": "00"})
        checks = {i.check for i in validate(cb).issues}
        assert "trailing-one" in checks

    def test_wrong_length_flagged_for_ita2_kind(self):
        cb = Codebook(kind="ita2", codewords={"a": "0000", "b": "00011"})
        checks = {i.check for i in validate(cb).issues}
        assert "length" in checks


class TestDistributionIO:
    def test_from_weights_accepts_percent_and_fraction(self):
        pct = CharacterDistribution.from_weights({"a": 75.0, "b": 25.0})
        frac = CharacterDistribution.from_weights({"a": 0.75, "b": 0.25})
        assert pct.prob("a") == pytest.approx(frac.prob("a"), abs=1e-15)

    def test_from_weights_rejects_bad_total(self):
        with pytest.raises(ValueError):
            CharacterDistribution.from_weights({"a": 0.5, "b": 0.3})

    def test_from_weights_rejects_single_symbol(self):
        with pytest.raises(ValueError):
            CharacterDistribution.from_weights({"a": 1.0})

    def test_load_distribution_percent_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("symbol,percent\na,60\nb,40\n")
        d = load_distribution(p)
        assert d.prob("a") == pytest.approx(0.6)

    def test_load_distribution_prob_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("symbol,prob\nx,0.25\ny,0.75\n")
        d = load_distribution(p)
        assert d.prob("y") == pytest.approx(0.75)

    def test_load_distribution_bad_sum(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("symbol,prob\nx,0.2\ny,0.2\n")
        with pytest.raises(ValueError):
            load_distribution(p)

    def test_codebook_csv_round_trip(self, tmp_path, hcb, dist):
        p = tmp_path / "cb.csv"
        write_codebook_csv(hcb, dist, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "symbol,codeword,probability"
        assert len(lines) == 27
        body = {row[0]: row[1] for row in (line.split(",") for line in lines[1:])}
        assert body == dict(hcb.codewords)
