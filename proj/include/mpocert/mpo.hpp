#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/matrix.hpp"
#include "mpocert/rational.hpp"
#include "mpocert/words.hpp"

namespace mpocert {

/// Translation-invariant MPO: tensor M^{(alpha,beta)}_{i,j} of shape
/// d x d x D x D with boundary vectors L and R. For system size n it
/// represents rho = sum_j L_{j1} M_{j1,j2} (x) ... (x) M_{jn,jn+1} R_{jn+1},
/// where each M_{i,j} is the d x d physical matrix (alpha, beta).
///
/// Physical letters are 1-based like everywhere else; the basis state |w>
/// has dense index sum_k (w_k - 1) d^{n-k}, so lexicographic word order is
/// index order.
template <typename T>
class Mpo {
public:
    Mpo() = default;

    /// `blocks` holds the D x D matrices M^{(alpha,beta)} at index
    /// (alpha-1)*d + (beta-1).
    Mpo(std::size_t physical_dim, std::size_t bond_dim, std::vector<Matrix<T>> blocks, std::vector<T> left,
        std::vector<T> right)
        : d_(physical_dim), D_(bond_dim), blocks_(std::move(blocks)), left_(std::move(left)), right_(std::move(right)) {
        if (d_ < 1 || D_ < 1) throw PreconditionError("MPO dimensions must be positive");
        if (blocks_.size() != d_ * d_) throw PreconditionError("MPO needs d*d physical blocks");
        for (const auto& b : blocks_)
            if (b.rows() != D_ || b.cols() != D_) throw PreconditionError("MPO block is not D x D");
        if (left_.size() != D_ || right_.size() != D_) throw PreconditionError("MPO boundary length differs from D");
        diagonal_ = true;
        for (std::size_t a = 0; a < d_ && diagonal_; ++a)
            for (std::size_t b = 0; b < d_; ++b)
                if (a != b && !blocks_[a * d_ + b].is_zero()) {
                    diagonal_ = false;
                    break;
                }
    }

    /// Builds from the row-major tensor (alpha, beta, i, j).
    static Mpo from_tensor(std::size_t d, std::size_t D, const std::vector<T>& tensor, std::vector<T> left,
                           std::vector<T> right) {
        if (tensor.size() != d * d * D * D) throw PreconditionError("MPO tensor size is not d*d*D*D");
        std::vector<Matrix<T>> blocks;
        blocks.reserve(d * d);
        for (std::size_t ab = 0; ab < d * d; ++ab)
            blocks.emplace_back(D, D, std::vector<T>(tensor.begin() + ab * D * D, tensor.begin() + (ab + 1) * D * D));
        return Mpo(d, D, std::move(blocks), std::move(left), std::move(right));
    }

    std::size_t physical_dim() const noexcept { return d_; }
    std::size_t bond_dim() const noexcept { return D_; }
    bool diagonal() const noexcept { return diagonal_; }

    const Matrix<T>& block(Letter alpha, Letter beta) const {
        if (alpha < 1 || alpha > d_ || beta < 1 || beta > d_) throw DomainError("physical index outside [1, d]");
        return blocks_[(alpha - 1) * d_ + (beta - 1)];
    }
    const std::vector<T>& left() const noexcept { return left_; }
    const std::vector<T>& right() const noexcept { return right_; }

    std::vector<T> tensor() const {
        std::vector<T> out;
        out.reserve(d_ * d_ * D_ * D_);
        for (const auto& b : blocks_) out.insert(out.end(), b.data().begin(), b.data().end());
        return out;
    }

    /// True when M^{(alpha,beta)} = M^{(beta,alpha)}, i.e. rho is symmetric
    /// for every n.
    bool physically_symmetric() const {
        for (std::size_t a = 0; a < d_; ++a)
            for (std::size_t b = a + 1; b < d_; ++b)
                if (!(blocks_[a * d_ + b] == blocks_[b * d_ + a])) return false;
        return true;
    }

    double max_entry_magnitude() const {
        double m = 0;
        for (const auto& b : blocks_)
            for (const auto& x : b.data()) m = std::max(m, magnitude(x));
        for (const auto& x : left_) m = std::max(m, magnitude(x));
        for (const auto& x : right_) m = std::max(m, magnitude(x));
        return m;
    }

private:
    std::size_t d_ = 0;
    std::size_t D_ = 0;
    std::vector<Matrix<T>> blocks_;
    std::vector<T> left_;
    std::vector<T> right_;
    bool diagonal_ = false;
};

using ExactMpo = Mpo<Rational>;
using RealMpo = Mpo<double>;

inline RealMpo to_real(const ExactMpo& m) {
    std::vector<double> tensor, left, right;
    for (const auto& x : m.tensor()) tensor.push_back(x.get_d());
    for (const auto& x : m.left()) left.push_back(x.get_d());
    for (const auto& x : m.right()) right.push_back(x.get_d());
    return RealMpo::from_tensor(m.physical_dim(), m.bond_dim(), tensor, std::move(left), std::move(right));
}

/// rho = identity on (C^d)^{(x) n} for every n.
template <typename T = Rational>
Mpo<T> identity_mpo(std::size_t d) {
    std::vector<Matrix<T>> blocks;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            Matrix<T> m(1, 1);
            if (a == b) m(0, 0) = T(1);
            blocks.push_back(std::move(m));
        }
    return Mpo<T>(d, 1, std::move(blocks), {T(1)}, {T(1)});
}

struct DenseOptions {
    std::size_t cap = 4096;  // maximal d^n
};

inline std::size_t checked_power(std::size_t d, std::size_t n, std::size_t cap, const char* what) {
    std::size_t out = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (out > cap / d) throw SizeCapExceeded(std::string(what) + ": d^n exceeds the cap of " + std::to_string(cap));
        out *= d;
    }
    if (out > cap) throw SizeCapExceeded(std::string(what) + ": d^n exceeds the cap of " + std::to_string(cap));
    return out;
}

/// Index of a word in [d]^n under lexicographic order (0-based).
inline std::size_t word_index(const Word& w, std::size_t d) {
    std::size_t idx = 0;
    for (Letter a : w) idx = idx * d + (a - 1);
    return idx;
}

inline Word word_at(std::size_t index, std::size_t d, std::size_t n) {
    std::vector<Letter> letters(n);
    for (std::size_t k = n; k-- > 0;) {
        letters[k] = static_cast<Letter>(index % d + 1);
        index /= d;
    }
    return Word(std::move(letters));
}

/// Full d^n x d^n operator, obtained by contracting the bond indices over
/// every (bra, ket) pair of basis words. Partial products that vanish are
/// pruned, so sparse MPOs (e.g. diagonal ones) stay cheap.
template <typename T>
Matrix<T> dense_assemble(const Mpo<T>& mpo, std::size_t n, const DenseOptions& opts = {}) {
    const std::size_t d = mpo.physical_dim();
    const std::size_t dim = checked_power(d, n, opts.cap, "dense_assemble");
    Matrix<T> out(dim, dim);
    if (n == 0) {
        out(0, 0) = dot(mpo.left(), mpo.right());
        return out;
    }
    std::vector<std::vector<T>> stack(n + 1);
    stack[0] = mpo.left();
    auto recurse = [&](auto&& self, std::size_t site, std::size_t row, std::size_t col) -> void {
        const auto& v = stack[site];
        if (std::all_of(v.begin(), v.end(), [](const T& x) { return is_zero(x); })) return;
        if (site == n) {
            out(row, col) = dot(v, mpo.right());
            return;
        }
        for (Letter a = 1; a <= d; ++a)
            for (Letter b = 1; b <= d; ++b) {
                const auto& blk = mpo.block(a, b);
                if (blk.is_zero()) continue;
                stack[site + 1] = row_times(v, blk);
                self(self, site + 1, row * d + (a - 1), col * d + (b - 1));
            }
    };
    recurse(recurse, 0, 0, 0);
    return out;
}

/// <w| rho |w> = L M^{(w1,w1)} ... M^{(wn,wn)} R for a diagonal MPO.
template <typename T>
T diagonal_entry(const Mpo<T>& mpo, const Word& w) {
    if (!mpo.diagonal()) throw Unsupported("diagonal_entry requires a diagonal MPO");
    require_letters_in(w, mpo.physical_dim(), "basis word");
    std::vector<T> v = mpo.left();
    for (Letter a : w) v = row_times(v, mpo.block(a, a));
    return dot(v, mpo.right());
}

/// Tr rho(n) = L (sum_alpha M^{(alpha,alpha)})^n R.
template <typename T>
T trace(const Mpo<T>& mpo, std::size_t n) {
    Matrix<T> sum(mpo.bond_dim(), mpo.bond_dim());
    for (Letter a = 1; a <= mpo.physical_dim(); ++a) sum = sum + mpo.block(a, a);
    std::vector<T> v = mpo.left();
    for (std::size_t k = 0; k < n; ++k) v = row_times(v, sum);
    return dot(v, mpo.right());
}

template <typename T>
struct DiagonalMinimum {
    T value;
    Word witness;
};

struct EnumerationOptions {
    std::uint64_t budget = std::uint64_t{1} << 24;  // maximal number of words
    unsigned threads = 1;
};

namespace detail {

template <typename T>
bool better(const DiagonalMinimum<T>& a, const DiagonalMinimum<T>& b) {
    if (a.value < b.value) return true;
    if (b.value < a.value) return false;
    return a.witness < b.witness;
}

// Minimum over all words extending `prefix` (whose left vector is v) to
// length n. Subtrees whose left vector vanishes evaluate to 0 everywhere;
// their least word is the prefix padded with letter 1.
template <typename T>
DiagonalMinimum<T> min_diagonal_subtree(const Mpo<T>& mpo, std::size_t n, std::vector<Letter> prefix,
                                        std::vector<T> v) {
    const std::size_t d = mpo.physical_dim();
    std::optional<DiagonalMinimum<T>> best;
    std::vector<std::vector<T>> stack(n + 1);
    std::vector<Letter> word = std::move(prefix);
    const std::size_t start = word.size();
    stack[start] = std::move(v);
    auto consider = [&](T value) {
        DiagonalMinimum<T> cand{std::move(value), Word(word)};
        if (!best || better(cand, *best)) best = std::move(cand);
    };
    auto recurse = [&](auto&& self, std::size_t site) -> void {
        const auto& cur = stack[site];
        if (std::all_of(cur.begin(), cur.end(), [](const T& x) { return is_zero(x); })) {
            const std::size_t len = word.size();
            word.resize(n, 1);
            consider(T(0));
            word.resize(len);
            return;
        }
        if (site == n) {
            consider(dot(cur, mpo.right()));
            return;
        }
        for (Letter a = 1; a <= d; ++a) {
            stack[site + 1] = row_times(cur, mpo.block(a, a));
            word.push_back(a);
            self(self, site + 1);
            word.pop_back();
        }
    };
    recurse(recurse, start);
    return std::move(*best);
}

}  // namespace detail

/// Exact minimum of <w|rho|w> over [d]^n with the lexicographically least
/// minimizing word. Requires a diagonal MPO; for those this is the minimal
/// eigenvalue.
template <typename T>
DiagonalMinimum<T> min_diagonal(const Mpo<T>& mpo, std::size_t n, const EnumerationOptions& opts = {}) {
    if (!mpo.diagonal()) throw Unsupported("min_diagonal requires a diagonal MPO");
    const std::size_t d = mpo.physical_dim();
    {
        long double words = std::pow(static_cast<long double>(d), static_cast<long double>(n));
        if (words > static_cast<long double>(opts.budget))
            throw BudgetExhausted("min_diagonal: d^n words exceed the enumeration budget", opts.budget);
    }
    if (opts.threads <= 1 || n == 0) return detail::min_diagonal_subtree(mpo, n, {}, mpo.left());

    // Lexicographic chunks by prefix; the reduction is order independent.
    std::size_t depth = 0, chunks = 1;
    while (depth < n && chunks < 4 * static_cast<std::size_t>(opts.threads)) {
        chunks *= d;
        ++depth;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::optional<DiagonalMinimum<T>>> results(chunks);
    auto worker = [&] {
        for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
            Word prefix = word_at(c, d, depth);
            std::vector<T> v = mpo.left();
            for (Letter a : prefix) v = row_times(v, mpo.block(a, a));
            results[c] = detail::min_diagonal_subtree(mpo, n, prefix.letters(), std::move(v));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < opts.threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    DiagonalMinimum<T> best = std::move(*results[0]);
    for (std::size_t c = 1; c < chunks; ++c)
        if (detail::better(*results[c], best)) best = std::move(*results[c]);
    return best;
}

using DenseMatrix = Eigen::MatrixXd;

inline DenseMatrix to_eigen(const Matrix<double>& m) {
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

struct SpectralSummary {
    double min_eigenvalue = 0;
    Eigen::VectorXd eigenvector;  // normalized, for the minimal eigenvalue
    double asymmetry = 0;         // ||rho - rho^T||_F
    double norm = 0;              // ||rho||_F
    bool non_normal = false;      // asymmetry > 1e-12 ||rho||
};

/// Smallest eigenvalue of the Hermitized operator (rho + rho^T)/2 from a
/// dense self-adjoint eigendecomposition. An operator that is already
/// diagonal has its spectrum on the diagonal; that case skips the solver.
inline SpectralSummary min_eigenvalue(const RealMpo& mpo, std::size_t n, const DenseOptions& opts = {}) {
    Matrix<double> rho = dense_assemble(mpo, n, opts);
    const std::size_t dim = rho.rows();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
        rho.data().data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    SpectralSummary out;
    out.norm = view.norm();
    out.asymmetry = (view - view.transpose()).norm();
    out.non_normal = out.asymmetry > 1e-12 * out.norm;

    bool is_diag = true;
    for (std::size_t i = 0; i < dim && is_diag; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            if (i != j && rho(i, j) != 0.0) {
                is_diag = false;
                break;
            }
    if (is_diag) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < dim; ++i)
            if (rho(i, i) < rho(arg, arg)) arg = i;
        out.min_eigenvalue = rho(arg, arg);
        out.eigenvector = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(arg));
        return out;
    }
    DenseMatrix herm = 0.5 * (view + view.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(herm);
    if (solver.info() != Eigen::Success) throw Error("dense eigensolver failed");
    out.min_eigenvalue = solver.eigenvalues()(0);
    out.eigenvector = solver.eigenvectors().col(0);
    return out;
}

enum class Positivity { positive, not_positive, inconclusive };

inline const char* to_string(Positivity p) {
    switch (p) {
        case Positivity::positive: return "positive";
        case Positivity::not_positive: return "not_positive";
        case Positivity::inconclusive: return "inconclusive";
    }
    return "?";
}

enum class CheckPath { exact_diagonal, dense };

struct CheckOptions {
    CheckPath path = CheckPath::exact_diagonal;
    EnumerationOptions enumeration{};
    DenseOptions dense{};
};

/// Answer to "is rho(n) + lambda 1 positive?".
struct ThresholdVerdict {
    Positivity status = Positivity::inconclusive;
    std::size_t n = 0;
    Rational lambda;
    CheckPath path = CheckPath::exact_diagonal;
    // Exactly one of the two is meaningful, depending on the path.
    std::variant<Rational, double> min_value;
    std::optional<Word> witness_word;          // exact path, when not positive
    std::optional<Eigen::VectorXd> witness_vector;  // dense path, when not positive
    bool non_normal = false;

    bool positive() const noexcept { return status == Positivity::positive; }

    double min_as_double() const {
        return std::holds_alternative<Rational>(min_value) ? std::get<Rational>(min_value).get_d()
                                                           : std::get<double>(min_value);
    }
    /// |min + lambda|: distance of the spectrum edge from the threshold.
    double margin() const {
        if (std::holds_alternative<Rational>(min_value)) {
            Rational m = std::get<Rational>(min_value) + lambda;
            return std::fabs(m.get_d());
        }
        return std::fabs(std::get<double>(min_value) + lambda.get_d());
    }
};

/// Width of the band around -lambda in which the float path answers
/// "inconclusive".
inline double dense_tolerance(const Rational& lambda) { return 1e-9 * (1.0 + std::fabs(lambda.get_d())); }

template <typename T>
ThresholdVerdict threshold_check(const Mpo<T>& mpo, std::size_t n, const Rational& lambda,
                                 const CheckOptions& opts = {}) {
    ThresholdVerdict v;
    v.n = n;
    v.lambda = lambda;
    v.path = opts.path;
    if (opts.path == CheckPath::exact_diagonal) {
        if constexpr (std::is_same_v<T, Rational>) {
            auto m = min_diagonal(mpo, n, opts.enumeration);
            const bool ok = m.value >= -lambda;
            v.status = ok ? Positivity::positive : Positivity::not_positive;
            if (!ok) v.witness_word = m.witness;
            v.min_value = m.value;
            return v;
        } else {
            throw Unsupported("the exact path needs an MPO with rational entries");
        }
    }
    SpectralSummary s;
    if constexpr (std::is_same_v<T, Rational>)
        s = min_eigenvalue(to_real(mpo), n, opts.dense);
    else
        s = min_eigenvalue(mpo, n, opts.dense);
    v.min_value = s.min_eigenvalue;
    v.non_normal = s.non_normal;
    const double shifted = s.min_eigenvalue + lambda.get_d();
    const double band = dense_tolerance(lambda);
    if (shifted < -band) {
        v.status = Positivity::not_positive;
        v.witness_vector = s.eigenvector;
    } else if (shifted > band) {
        v.status = Positivity::positive;
    } else {
        v.status = Positivity::inconclusive;
    }
    return v;
}

struct SearchStep {
    std::size_t n = 0;
    Positivity status = Positivity::inconclusive;
    double min_value = 0;
    double margin = 0;
};

/// Bounded semi-decision for "is there an n with rho(n) + lambda 1 not
/// positive?". `violation` is empty when none was found up to n_max, which
/// says nothing about larger n.
struct ThresholdSearch {
    std::optional<ThresholdVerdict> violation;
    std::size_t n_max = 0;
    std::vector<SearchStep> steps;
    bool inconclusive_seen = false;
};

template <typename T>
ThresholdSearch threshold_search(const Mpo<T>& mpo, const Rational& lambda, std::size_t n_max,
                                 const CheckOptions& opts = {}) {
    if (n_max < 1) throw PreconditionError("n_max must be at least 1");
    ThresholdSearch out;
    out.n_max = n_max;
    for (std::size_t n = 1; n <= n_max; ++n) {
        auto v = threshold_check(mpo, n, lambda, opts);
        out.steps.push_back({n, v.status, v.min_as_double(), v.margin()});
        if (v.status == Positivity::inconclusive) out.inconclusive_seen = true;
        if (v.status == Positivity::not_positive) {
            out.violation = std::move(v);
            break;
        }
    }
    return out;
}

}  // namespace mpocert
