#include <gtest/gtest.h>

#include <random>

#include "mpocert/hmm.hpp"
#include "test_util.hpp"

using namespace mpocert;

namespace {

Hmm iid_uniform(std::size_t d) {
    return Hmm(std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Constant(1, 1, 1.0 / static_cast<double>(d))),
               Eigen::RowVectorXd::Ones(1));
}

// Two-state chain that flips with probability 1/4 and reveals its state.
Hmm sticky_chain() {
    Eigen::MatrixXd m1(2, 2), m2(2, 2);
    m1 << 0.75, 0, 0.25, 0;
    m2 << 0, 0.25, 0, 0.75;
    Eigen::RowVectorXd p(2);
    p << 0.5, 0.5;
    return Hmm({m1, m2}, p);
}

}  // namespace

TEST(Hmm, UniformIidOracle) {
    const auto h = iid_uniform(2);
    EXPECT_DOUBLE_EQ(prob(h, Word{1, 2, 1}), 0.125);
    const auto h3 = iid_uniform(3);
    EXPECT_NEAR(prob(h3, Word{3, 3, 1, 2}), 1.0 / 81.0, 1e-15);
    EXPECT_DOUBLE_EQ(prob(h, Word{}), 1.0);
}

TEST(Hmm, ProbabilitiesSumToOne) {
    std::mt19937_64 rng(5);
    for (std::size_t D : {1u, 2u, 3u}) {
        const auto h = random_hmm(D, 3, rng);
        for (std::size_t n : {1u, 3u, 5u}) {
            double total = 0;
            std::size_t count = 1;
            for (std::size_t i = 0; i < n; ++i) count *= 3;
            for (std::size_t idx = 0; idx < count; ++idx) total += prob(h, word_at(idx, 3, n));
            EXPECT_NEAR(total, 1.0, 1e-12) << "D=" << D << " n=" << n;
        }
    }
}

TEST(Hmm, MarginalConsistency) {
    std::mt19937_64 rng(17);
    const auto h = random_hmm(3, 2, rng);
    for (int t = 0; t < 20; ++t) {
        const Word w = fixtures::random_word(rng, 2, 0, 6);
        EXPECT_NEAR(prob(h, w + Word{1}) + prob(h, w + Word{2}), prob(h, w), 1e-13);
    }
}

TEST(Hmm, Stationarity) {
    EXPECT_TRUE(is_stationary(sticky_chain()));
    EXPECT_TRUE(is_stationary(iid_uniform(4)));
    Eigen::MatrixXd m1(2, 2), m2(2, 2);
    m1 << 0.9, 0, 0.9, 0;
    m2 << 0, 0.1, 0, 0.1;
    Eigen::RowVectorXd p(2);
    p << 0.5, 0.5;
    EXPECT_FALSE(is_stationary(Hmm({m1, m2}, p)));
}

TEST(Hmm, ConstructorRejectsInvalidModels) {
    Eigen::MatrixXd half = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const Eigen::RowVectorXd one = Eigen::RowVectorXd::Ones(1);
    EXPECT_THROW(Hmm({half}, one), PreconditionError);
    EXPECT_THROW(Hmm({}, one), PreconditionError);
    Eigen::MatrixXd neg = Eigen::MatrixXd::Constant(1, 1, -0.5);
    Eigen::MatrixXd up = Eigen::MatrixXd::Constant(1, 1, 1.5);
    EXPECT_THROW(Hmm({neg, up}, one), PreconditionError);
    EXPECT_THROW(Hmm({half, half}, Eigen::RowVectorXd::Constant(1, 0.7)), PreconditionError);
    EXPECT_THROW(Hmm({half, Eigen::MatrixXd::Constant(2, 2, 0.25)}, one), PreconditionError);
}

TEST(Hmm, OutcomeOutOfRange) {
    const auto h = iid_uniform(2);
    EXPECT_THROW(prob(h, Word{3}), DomainError);
    EXPECT_THROW(prob(h, Word{0}), DomainError);
}

TEST(Hankel, RankBoundedByBondDimension) {
    std::mt19937_64 rng(99);
    for (std::size_t D : {1u, 2u, 3u}) {
        const auto h = random_hmm(D, 2, rng);
        for (const auto& b : hankel_family(h, 6)) EXPECT_LE(numerical_rank(b.values), D);
        EXPECT_EQ(numerical_rank(hankel(h, 3, 3).values), D);
    }
}

TEST(Hankel, BlockLayout) {
    const auto h = sticky_chain();
    const auto b = hankel(h, 1, 2);
    ASSERT_EQ(b.values.rows(), 2);
    ASSERT_EQ(b.values.cols(), 4);
    // Row 1 = prefix "2", column 2 = suffix "21".
    EXPECT_DOUBLE_EQ(b.values(1, 2), prob(h, Word{2, 2, 1}));
    EXPECT_DOUBLE_EQ(b.values(1, 2), 0.5 * 0.75 * 0.25);
}

TEST(Hankel, SizeCap) {
    const auto h = iid_uniform(4);
    EXPECT_THROW(hankel(h, 6, 6, HankelOptions{1000}), SizeCapExceeded);
}

TEST(Hankel, CsvLabelsAndValues) {
    const auto csv = hankel_csv(hankel(iid_uniform(2), 0, 1));
    EXPECT_EQ(csv, "prefix\\suffix,1,2\n-,0.5,0.5\n");
}

TEST(Quasi, RoundTripReproducesProbabilities) {
    std::mt19937_64 rng(3);
    for (std::size_t D : {1u, 2u, 3u}) {
        const auto h = random_hmm(D, 2, rng);
        const auto r = quasi_realize(hankel_family(h, 7));
        EXPECT_EQ(r.rank, D);
        EXPECT_EQ(r.horizon, 7u);
        for (std::size_t idx = 0; idx < 128; ++idx) {
            const Word w = word_at(idx, 2, 7);
            EXPECT_NEAR(prob(r.model, w), prob(h, w), 1e-10);
        }
    }
}

TEST(Quasi, FromHmmMatchesHmm) {
    const auto h = sticky_chain();
    const auto q = QuasiRealization::from(h);
    EXPECT_DOUBLE_EQ(prob(q, Word{1, 2, 2, 1}), prob(h, Word{1, 2, 2, 1}));
}

TEST(Quasi, InconsistentBlocksThrow) {
    auto blocks = hankel_family(sticky_chain(), 4);
    blocks.back().values(0, 0) += 0.01;
    EXPECT_THROW(quasi_realize(blocks), ConsistencyError);

    auto mixed = hankel_family(sticky_chain(), 2);
    mixed.push_back(hankel(iid_uniform(3), 0, 1));
    EXPECT_THROW(quasi_realize(mixed), ConsistencyError);

    EXPECT_THROW(quasi_realize({}), PreconditionError);
}

TEST(Quasi, MarginalViolationThrows) {
    // A single length-1 block whose entries do not sum to Pr[empty] = 1.
    HankelBlock b{0, 1, 2, Eigen::MatrixXd(1, 2)};
    b.values << 0.5, 0.6;
    HankelBlock b2 = hankel(iid_uniform(2), 0, 2);
    EXPECT_THROW(quasi_realize({b, b2}), ConsistencyError);
}

TEST(ExactHmm, RationalHankelRank) {
    ExactHmm h;
    Matrix<Rational> m1(2, 2), m2(2, 2);
    m1(0, 0) = Rational(3, 4);
    m1(1, 0) = Rational(1, 4);
    m2(0, 1) = Rational(1, 4);
    m2(1, 1) = Rational(3, 4);
    h.transitions = {m1, m2};
    h.initial = {Rational(1, 2), Rational(1, 2)};
    EXPECT_EQ(prob(h, Word{2, 2, 1}), Rational(3, 32));
    EXPECT_EQ(exact_rank(hankel_exact(h, 2, 2)), 2u);
    EXPECT_DOUBLE_EQ(to_double(prob(h, Word{1, 2})), prob(sticky_chain(), Word{1, 2}));
}
