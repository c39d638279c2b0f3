#include <gtest/gtest.h>

#include "mpocert/mpo.hpp"
#include "mpocert/reduction.hpp"
#include "test_util.hpp"

using namespace mpocert;

namespace {

Rational sigma_gap(const PcpInstance& inst, const Word& w, const Rational& lambda) {
    const std::size_t b = inst.alphabet().size();
    const BigInt diff = numeric_rep(inst.upper().apply(w), b) - numeric_rep(inst.lower().apply(w), b);
    return Rational(diff * diff) - (lambda + 1);
}

Word binary_word(std::size_t index, std::size_t len) { return word_at(index, 2, len); }

}  // namespace

TEST(Gadget, FrozenEntries) {
    // sigma(1) = 1, sigma(2 1 1) = 2*4 + 2 + 1 = 11 in base 2.
    const auto a = gadget_matrix(Word{1}, Word{2, 1, 1}, 2);
    EXPECT_EQ(a(0, 0), 4);
    EXPECT_EQ(a(1, 1), 16);
    EXPECT_EQ(a(2, 2), 64);
    EXPECT_EQ(a(3, 1), 22);
    EXPECT_EQ(a(4, 2), 88);
    EXPECT_EQ(a(5, 1), 22);
    EXPECT_EQ(a(5, 2), 121);
    EXPECT_EQ(a(5, 5), 1);
    EXPECT_EQ(a(0, 5), 0);
}

TEST(Gadget, EmptyWordsGiveIdentity) {
    EXPECT_EQ(gadget_matrix(Word{}, Word{}, 3), Matrix<Rational>::identity(6));
}

TEST(Gadget, MorphismLaw) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const std::size_t b = 1 + rng() % 3;
        const Word u1 = fixtures::random_word(rng, b, 0, 5), v1 = fixtures::random_word(rng, b, 0, 5);
        const Word u2 = fixtures::random_word(rng, b, 0, 5), v2 = fixtures::random_word(rng, b, 0, 5);
        EXPECT_EQ(gadget_matrix(u1, v1, b) * gadget_matrix(u2, v2, b), gadget_matrix(u1 + u2, v1 + v2, b));
    }
}

TEST(Sandwich, ClassicOracles) {
    const auto inst = fixtures::classic_instance();
    const auto m0 = build_d6(inst, Rational(0));
    // sigma("a") = 1, sigma("baa") = 11.
    EXPECT_EQ(sandwich(m0, Word{1}), 99);
    EXPECT_EQ(sandwich(m0, Word{3, 2, 3, 1}), -1);
    EXPECT_EQ(sandwich(build_d6(inst, Rational(7, 3)), Word{3, 2, 3, 1}), Rational(-10, 3));
}

TEST(Sandwich, FormulaOnRandomWords) {
    const auto inst = fixtures::classic_instance();
    std::mt19937_64 rng(12);
    for (const Rational& lambda : {Rational(0), Rational(1), Rational(7, 3), Rational(-1, 2)}) {
        const auto m = build_d6(inst, lambda);
        for (int t = 0; t < 60; ++t) {
            const Word w = fixtures::random_word(rng, 3, 1, 9);
            EXPECT_EQ(sandwich(m, w), sigma_gap(inst, w, lambda));
        }
    }
}

TEST(Sandwich, NegativeExactlyOnSolutions) {
    const auto inst = fixtures::classic_instance();
    const auto m = build_d6(inst, Rational(0));
    for (std::size_t n = 1; n <= 6; ++n)
        for (std::size_t i = 0, c = checked_power(3, n, 1u << 20, "words"); i < c; ++i) {
            const Word w = word_at(i, 3, n);
            EXPECT_EQ(sandwich(m, w) < 0, verify_solution(inst, w)) << n;
        }
}

TEST(Encoder, RoundTripAndRejection) {
    const LetterEncoder e(3);
    EXPECT_EQ(e.encode_letter(1), (Word{1, 2, 2}));
    EXPECT_EQ(e.encode_letter(3), (Word{2, 2, 1}));
    EXPECT_EQ(e.encode(Word{3, 2, 3, 1}), (Word{2, 2, 1, 2, 1, 2, 2, 2, 1, 1, 2, 2}));
    EXPECT_EQ(e.decode(e.encode(Word{3, 2, 3, 1})), (Word{3, 2, 3, 1}));
    EXPECT_FALSE(e.decode(Word{2, 2, 2}));
    EXPECT_FALSE(e.decode(Word{1, 1, 2}));
    EXPECT_FALSE(e.decode(Word{1, 2}));
    EXPECT_THROW(e.encode_letter(4), DomainError);
}

TEST(BinaryReduction, StandardPreservesSandwich) {
    const auto inst = fixtures::classic_instance();
    const auto d6 = build_d6(inst, Rational(0));
    const auto bin = binary_reduce(d6);
    EXPECT_EQ(bin.morphism.dim, 18u);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 100; ++t) {
        const Word w = fixtures::random_word(rng, 3, 1, 7);
        const Word x = bin.encoder.encode(w);
        EXPECT_EQ(x.size(), 3 * w.size());
        EXPECT_EQ(sandwich(bin.morphism, x), sandwich(d6, w));
    }
}

TEST(BinaryReduction, ShiftStructure) {
    const auto bin = binary_reduce(build_d6(fixtures::classic_instance(), Rational(0)));
    EXPECT_EQ(power(bin.shift, 3), Matrix<Rational>::identity(18));
    EXPECT_FALSE(power(bin.shift, 2) == Matrix<Rational>::identity(18));
    for (Letter a = 1; a <= 3; ++a) {
        const auto c = rotated_block_diagonal(bin, a);
        EXPECT_EQ(c, bin.morphism.evaluate(bin.encoder.encode_letter(a)));
        for (std::size_t i = 0; i < 18; ++i)
            for (std::size_t j = 0; j < 18; ++j)
                if (i / 6 != j / 6) {
                    EXPECT_EQ(c(i, j), 0);
                }
    }
}

// With B1 itself as the generator for letter 1, X(alpha) carries only d-1
// shifts, so the product of a one-letter word never returns to block 0.
TEST(BinaryReduction, LiteralGeneratorsMissOneShift) {
    const auto inst = fixtures::classic_instance();
    const auto d6 = build_d6(inst, Rational(0));
    const auto bin = binary_reduce(d6);
    MatrixMorphism literal = bin.morphism;
    literal.generators = {bin.block_diagonal, bin.shift};
    EXPECT_EQ(sandwich(literal, bin.encoder.encode(Word{1})), 0);
    EXPECT_NE(sandwich(d6, Word{1}), 0);
}

// The standard encoding reads any binary word as the generator sequence at
// the positions of its 1s, so words outside the image of X still spell
// sandwich values, including the empty product -(lambda+1).
TEST(BinaryReduction, StandardEncodingReadsEveryBinaryWord) {
    const auto inst = fixtures::classic_instance();
    const auto d6 = build_d6(inst, Rational(0));
    const auto bin = binary_reduce(d6);
    for (std::size_t len : {3u, 6u})
        for (std::size_t i = 0; i < (std::size_t{1} << len); ++i) {
            const Word x = binary_word(i, len);
            EXPECT_EQ(sandwich(bin.morphism, x), sandwich(d6, bin.encoder.product_word(x)));
        }
    EXPECT_EQ(sandwich(bin.morphism, Word{2, 2, 2}), -1);
}

TEST(BinaryReduction, GuardedEncodingFiltersMalformedWords) {
    const auto inst = fixtures::classic_instance();
    for (const Rational& lambda : {Rational(0), Rational(2)}) {
        const auto d6 = build_d6(inst, lambda);
        const auto bin = binary_reduce(d6, BinaryEncoding::guarded);
        EXPECT_EQ(bin.morphism.dim, 30u);
        for (std::size_t len : {3u, 6u, 9u})
            for (std::size_t i = 0; i < (std::size_t{1} << len); ++i) {
                const Word x = binary_word(i, len);
                const auto dec = bin.encoder.decode(x);
                EXPECT_EQ(sandwich(bin.morphism, x), dec ? sandwich(d6, *dec) : Rational(0));
            }
    }
}

TEST(Compile, ClassicDimensions) {
    const auto inst = fixtures::classic_instance();
    const auto c = compile(inst, Rational(0));
    EXPECT_EQ(c.mpo.physical_dim(), 2u);
    EXPECT_EQ(c.mpo.bond_dim(), 18u);
    EXPECT_TRUE(c.mpo.diagonal());
    EXPECT_EQ(c.system_size(4), 12u);
    EXPECT_EQ(compile(inst, Rational(0), BinaryEncoding::guarded).mpo.bond_dim(), 30u);
}

TEST(Compile, SevenDominoBinaryInstance) {
    const Alphabet ab({"0", "1"});
    const auto inst = PcpInstance::from_strings(
        ab, {{"0", "01"}, {"10", "1"}, {"011", "0"}, {"1", "110"}, {"00", "001"}, {"101", "01"}, {"11", "1"}});
    const auto c = compile(inst, Rational(0));
    EXPECT_EQ(c.mpo.physical_dim(), 2u);
    EXPECT_EQ(c.mpo.bond_dim(), 42u);
    EXPECT_TRUE(c.mpo.diagonal());
}

TEST(Compile, DiagonalEntriesAreSandwiches) {
    const auto inst = fixtures::classic_instance();
    const auto c = compile(inst, Rational(1));
    std::mt19937_64 rng(14);
    for (int t = 0; t < 30; ++t) {
        const Word w = fixtures::random_word(rng, 3, 1, 4);
        EXPECT_EQ(diagonal_entry(c.mpo, c.encoder.encode(w)), sigma_gap(inst, w, Rational(1)));
    }
}

TEST(Compile, SingleDominoIsRejected) {
    const auto inst = PcpInstance::from_strings(Alphabet({"a", "b"}), {{"a", "ab"}});
    EXPECT_THROW(compile(inst, Rational(0)), PreconditionError);
}
