#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/matrix.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/words.hpp"

namespace mpocert {

/// Hidden Markov model in matrix-product form:
/// Pr[Y_1 = a_1, ..., Y_n = a_n] = p M^{(a_1)} ... M^{(a_n)} 1,
/// with M^{(a)}_{i,j} = Pr[(X_{t+1}, Y_{t+1}) = (j, a) | X_t = i].
class Hmm {
public:
    static constexpr double kTolerance = 1e-12;

    Hmm(std::vector<Eigen::MatrixXd> transitions, Eigen::RowVectorXd initial)
        : transitions_(std::move(transitions)), initial_(std::move(initial)) {
        if (transitions_.empty()) throw PreconditionError("HMM needs at least one outcome");
        const auto D = initial_.size();
        if (D < 1) throw PreconditionError("HMM needs bond dimension >= 1");
        Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(D);
        for (const auto& m : transitions_) {
            if (m.rows() != D || m.cols() != D) throw PreconditionError("HMM transition is not D x D");
            if ((m.array() < 0).any()) throw PreconditionError("HMM transitions must be elementwise nonnegative");
            row_sums += m.rowwise().sum();
        }
        if ((row_sums.array() - 1.0).abs().maxCoeff() > kTolerance)
            throw PreconditionError("HMM kernel sum_a M^(a) is not row-stochastic");
        if ((initial_.array() < 0).any() || std::fabs(initial_.sum() - 1.0) > kTolerance)
            throw PreconditionError("HMM initial vector is not a probability vector");
    }

    std::size_t bond_dim() const noexcept { return static_cast<std::size_t>(initial_.size()); }
    std::size_t outcomes() const noexcept { return transitions_.size(); }
    const std::vector<Eigen::MatrixXd>& transitions() const noexcept { return transitions_; }
    const Eigen::RowVectorXd& initial() const noexcept { return initial_; }

    const Eigen::MatrixXd& transition(Letter a) const {
        if (a < 1 || a > transitions_.size()) throw DomainError("outcome outside [1, d]");
        return transitions_[a - 1];
    }

    Eigen::MatrixXd kernel() const {
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(initial_.size(), initial_.size());
        for (const auto& m : transitions_) k += m;
        return k;
    }

private:
    std::vector<Eigen::MatrixXd> transitions_;
    Eigen::RowVectorXd initial_;
};

/// Same contraction as an HMM without any positivity constraint.
struct QuasiRealization {
    std::vector<Eigen::MatrixXd> transitions;
    Eigen::RowVectorXd left;
    Eigen::VectorXd right;

    std::size_t bond_dim() const noexcept { return static_cast<std::size_t>(left.size()); }
    std::size_t outcomes() const noexcept { return transitions.size(); }

    static QuasiRealization from(const Hmm& h) {
        return {h.transitions(), h.initial(), Eigen::VectorXd::Ones(static_cast<Eigen::Index>(h.bond_dim()))};
    }
};

inline double prob(const QuasiRealization& q, const Word& w) {
    require_letters_in(w, q.outcomes(), "outcome sequence");
    Eigen::RowVectorXd v = q.left;
    for (Letter a : w) v = v * q.transitions[a - 1];
    return v.dot(q.right.transpose());
}

inline double prob(const Hmm& h, const Word& w) {
    require_letters_in(w, h.outcomes(), "outcome sequence");
    Eigen::RowVectorXd v = h.initial();
    for (Letter a : w) v = v * h.transitions()[a - 1];
    return v.sum();
}

/// Stationarity in the row convention used by prob(): p (sum_a M^(a)) = p.
inline bool is_stationary(const Hmm& h, double tol = Hmm::kTolerance) {
    Eigen::RowVectorXd next = h.initial() * h.kernel();
    return (next - h.initial()).cwiseAbs().maxCoeff() <= tol;
}

/// F^{(k,n)}: rows are prefixes in [d]^k, columns suffixes in [d]^n, both in
/// lexicographic order; entry = Pr[prefix . suffix].
struct HankelBlock {
    std::size_t prefix_length = 0;  // k
    std::size_t suffix_length = 0;  // n
    std::size_t outcomes = 0;       // d
    Eigen::MatrixXd values;
};

struct HankelOptions {
    std::size_t cap = std::size_t{1} << 22;  // maximal number of entries
};

template <typename Model>
HankelBlock hankel(const Model& h, std::size_t k, std::size_t n, const HankelOptions& opts = {}) {
    const std::size_t d = h.outcomes();
    const std::size_t rows = checked_power(d, k, opts.cap, "hankel");
    const std::size_t cols = checked_power(d, n, opts.cap, "hankel");
    if (rows > opts.cap / cols) throw SizeCapExceeded("hankel: block exceeds the entry cap");
    HankelBlock out{k, n, d, Eigen::MatrixXd(rows, cols)};
    for (std::size_t r = 0; r < rows; ++r) {
        const Word prefix = word_at(r, d, k);
        for (std::size_t c = 0; c < cols; ++c)
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = prob(h, prefix + word_at(c, d, n));
    }
    return out;
}

/// Numerical rank: singular values above rel_tol * sigma_max.
inline std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

/// All Hankel blocks F^{(k,n)} with k + n <= horizon.
template <typename Model>
std::vector<HankelBlock> hankel_family(const Model& h, std::size_t horizon, const HankelOptions& opts = {}) {
    std::vector<HankelBlock> out;
    for (std::size_t total = 0; total <= horizon; ++total)
        for (std::size_t k = 0; k <= total; ++k) out.push_back(hankel(h, k, total - k, opts));
    return out;
}

inline std::string hankel_csv(const HankelBlock& b) {
    auto label = [&](std::size_t idx, std::size_t len) {
        if (len == 0) return std::string("-");
        std::string s;
        for (Letter a : word_at(idx, b.outcomes, len)) {
            if (!s.empty() && b.outcomes > 9) s += '.';
            s += std::to_string(a);
        }
        return s;
    };
    std::ostringstream os;
    os << "prefix\\suffix";
    for (Eigen::Index c = 0; c < b.values.cols(); ++c) os << ',' << label(static_cast<std::size_t>(c), b.suffix_length);
    os << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < b.values.rows(); ++r) {
        os << label(static_cast<std::size_t>(r), b.prefix_length);
        for (Eigen::Index c = 0; c < b.values.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", b.values(r, c));
            os << ',' << buf;
        }
        os << '\n';
    }
    return os.str();
}

struct QuasiRealizeOptions {
    double rank_tolerance = 1e-10;    // relative singular value threshold
    double consistency_tolerance = 1e-10;
};

struct QuasiRealizeResult {
    QuasiRealization model;
    std::size_t rank = 0;
    std::size_t horizon = 0;  // T: every word of length <= T was supplied
    std::vector<double> singular_values;
    double rank_tolerance = 0;
    /// sigma_{rank+1} / sigma_rank, or 0 when the spectrum ends at the rank.
    /// Values near 1 mean the rank cut was ambiguous.
    double gap_ratio = 0;
};

namespace detail {

inline std::map<Word, double> collect_probabilities(const std::vector<HankelBlock>& blocks, double tol,
                                                    std::size_t& outcomes) {
    if (blocks.empty()) throw PreconditionError("quasi_realize needs at least one Hankel block");
    outcomes = blocks.front().outcomes;
    std::map<Word, double> f;
    for (const auto& b : blocks) {
        if (b.outcomes != outcomes) throw ConsistencyError("Hankel blocks disagree on the number of outcomes");
        const std::size_t d = b.outcomes;
        for (Eigen::Index r = 0; r < b.values.rows(); ++r)
            for (Eigen::Index c = 0; c < b.values.cols(); ++c) {
                Word w = word_at(static_cast<std::size_t>(r), d, b.prefix_length) +
                         word_at(static_cast<std::size_t>(c), d, b.suffix_length);
                const double v = b.values(r, c);
                auto [it, inserted] = f.emplace(std::move(w), v);
                if (!inserted && std::fabs(it->second - v) > tol)
                    throw ConsistencyError("Hankel blocks assign different probabilities to the same sequence");
            }
    }
    f.emplace(Word{}, 1.0);
    return f;
}

}  // namespace detail

/// Builds a quasi-realization from Hankel data by a rank-revealing SVD of
/// the prefix/suffix matrix with prefixes of length <= (T-1)/2 and suffixes
/// covering the rest of the horizon.
inline QuasiRealizeResult quasi_realize(const std::vector<HankelBlock>& blocks, const QuasiRealizeOptions& opts = {}) {
    std::size_t d = 0;
    const auto f = detail::collect_probabilities(blocks, opts.consistency_tolerance, d);
    if (d < 1) throw PreconditionError("Hankel blocks have no outcomes");

    // Horizon: largest T such that every word of length <= T is known.
    std::size_t horizon = 0;
    for (std::size_t len = 1;; ++len) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < len; ++i) count *= d;
        bool all = true;
        for (std::size_t idx = 0; idx < count && all; ++idx) all = f.count(word_at(idx, d, len)) > 0;
        if (!all) break;
        horizon = len;
        if (count > (std::size_t{1} << 22)) break;
    }
    if (horizon == 0) throw ConsistencyError("Hankel blocks do not cover all sequences of length 1");

    // Suffix marginals: sum_a f(w a) = f(w).
    for (const auto& [w, p] : f) {
        if (w.size() >= horizon) continue;
        double sum = 0;
        for (Letter a = 1; a <= d; ++a) {
            Word wa = w;
            wa.push_back(a);
            sum += f.at(wa);
        }
        if (std::fabs(sum - p) > opts.consistency_tolerance)
            throw ConsistencyError("Hankel marginals are inconsistent: sum_a Pr[w a] != Pr[w]");
    }

    const std::size_t k = (horizon - 1) / 2;
    const std::size_t l = horizon - 1 - k;
    auto words_up_to = [d](std::size_t len) {
        std::vector<Word> out;
        for (std::size_t m = 0; m <= len; ++m) {
            std::size_t count = 1;
            for (std::size_t i = 0; i < m; ++i) count *= d;
            for (std::size_t idx = 0; idx < count; ++idx) out.push_back(word_at(idx, d, m));
        }
        return out;
    };
    const auto prefixes = words_up_to(k);
    const auto suffixes = words_up_to(l);
    const auto P = static_cast<Eigen::Index>(prefixes.size());
    const auto S = static_cast<Eigen::Index>(suffixes.size());

    Eigen::MatrixXd F(P, S);
    std::vector<Eigen::MatrixXd> Fa(d, Eigen::MatrixXd(P, S));
    for (Eigen::Index i = 0; i < P; ++i)
        for (Eigen::Index j = 0; j < S; ++j) {
            F(i, j) = f.at(prefixes[i] + suffixes[j]);
            for (Letter a = 1; a <= d; ++a) {
                Word w = prefixes[i];
                w.push_back(a);
                Fa[a - 1](i, j) = f.at(w + suffixes[j]);
            }
        }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    QuasiRealizeResult out;
    out.horizon = horizon;
    out.rank_tolerance = opts.rank_tolerance;
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > opts.rank_tolerance * sv(0)) ++r;
    if (r == 0) throw ConsistencyError("Hankel matrix is numerically zero");
    out.rank = static_cast<std::size_t>(r);
    out.gap_ratio = r < sv.size() ? sv(r) / sv(r - 1) : 0.0;

    const Eigen::MatrixXd Ur = svd.matrixU().leftCols(r);
    const Eigen::MatrixXd Vr = svd.matrixV().leftCols(r);
    const Eigen::VectorXd inv_s = sv.head(r).cwiseInverse();
    // Rows/columns of the empty prefix and suffix sit at index 0.
    out.model.left = F.row(0) * Vr;
    out.model.right = inv_s.asDiagonal() * (Ur.transpose() * F.col(0));
    for (Letter a = 1; a <= d; ++a)
        out.model.transitions.push_back(inv_s.asDiagonal() * (Ur.transpose() * Fa[a - 1] * Vr));
    return out;
}

/// Random HMM with uniform-then-normalized rows and a random initial law.
template <typename Rng>
Hmm random_hmm(std::size_t D, std::size_t d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<Eigen::MatrixXd> ms(d, Eigen::MatrixXd(D, D));
    for (std::size_t i = 0; i < D; ++i) {
        double total = 0;
        for (auto& m : ms)
            for (std::size_t j = 0; j < D; ++j) total += (m(i, j) = u(rng));
        for (auto& m : ms) m.row(i) /= total;
    }
    Eigen::RowVectorXd p(D);
    for (std::size_t i = 0; i < D; ++i) p(i) = u(rng);
    p /= p.sum();
    return Hmm(std::move(ms), std::move(p));
}

/// Exact-rational HMM evaluation, for rational inputs whose Hankel rank
/// must be determined without a numerical threshold.
struct ExactHmm {
    std::vector<Matrix<Rational>> transitions;
    std::vector<Rational> initial;

    std::size_t outcomes() const noexcept { return transitions.size(); }
};

inline Rational prob(const ExactHmm& h, const Word& w) {
    require_letters_in(w, h.outcomes(), "outcome sequence");
    std::vector<Rational> v = h.initial;
    for (Letter a : w) v = row_times(v, h.transitions[a - 1]);
    Rational s = 0;
    for (const auto& x : v) s += x;
    return s;
}

inline Matrix<Rational> hankel_exact(const ExactHmm& h, std::size_t k, std::size_t n,
                                     const HankelOptions& opts = {}) {
    const std::size_t d = h.outcomes();
    const std::size_t rows = checked_power(d, k, opts.cap, "hankel");
    const std::size_t cols = checked_power(d, n, opts.cap, "hankel");
    Matrix<Rational> out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out(r, c) = prob(h, word_at(r, d, k) + word_at(c, d, n));
    return out;
}

}  // namespace mpocert
