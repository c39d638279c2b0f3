#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/matrix.hpp"
#include "mpocert/rational.hpp"

namespace mpocert {

inline constexpr double factor_tolerance = 1e-10;
inline constexpr double factor_sign_slack = 1e-12;
inline constexpr double psd_tolerance = 1e-10;

/// F = sum_i L_i R_i^T with L_i the columns of `left` (rows x D) and R_i the
/// columns of `right` (cols x D).
struct NmfCandidate {
    Eigen::MatrixXd F;
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;

    NmfCandidate(Eigen::MatrixXd f, Eigen::MatrixXd l, Eigen::MatrixXd r)
        : F(std::move(f)), left(std::move(l)), right(std::move(r)) {
        if (!F.allFinite() || (F.size() > 0 && F.minCoeff() < 0)) throw DomainError("F must be entrywise nonnegative");
        if (left.rows() != F.rows() || right.rows() != F.cols() || left.cols() != right.cols())
            throw PreconditionError("factor shapes do not match F");
    }
    std::size_t inner_dim() const { return static_cast<std::size_t>(left.cols()); }
};

struct FactorCheck {
    bool ok = false;
    double residual = 0;      // max-norm of the reconstruction error
    double min_factor = 0;    // smallest factor entry (NMF) or eigenvalue (PSD)
};

inline FactorCheck verify_nmf(const NmfCandidate& c) {
    FactorCheck out;
    out.residual = c.F.size() == 0 ? 0.0 : (c.left * c.right.transpose() - c.F).cwiseAbs().maxCoeff();
    double m = 0;
    if (c.left.size() > 0) m = std::min(m, c.left.minCoeff());
    if (c.right.size() > 0) m = std::min(m, c.right.minCoeff());
    out.min_factor = m;
    out.ok = out.residual <= factor_tolerance && m >= -factor_sign_slack;
    return out;
}

/// F_{ab} = Tr(A_a B_b) with every A_a, B_b positive semidefinite.
struct PsdCandidate {
    Eigen::MatrixXd F;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> B;

    PsdCandidate(Eigen::MatrixXd f, std::vector<Eigen::MatrixXd> a, std::vector<Eigen::MatrixXd> b)
        : F(std::move(f)), A(std::move(a)), B(std::move(b)) {
        if (!F.allFinite()) throw DomainError("F has non-finite entries");
        if (A.size() != static_cast<std::size_t>(F.rows()) || B.size() != static_cast<std::size_t>(F.cols()))
            throw PreconditionError("need one A per row and one B per column of F");
        const Eigen::Index D = A.empty() ? (B.empty() ? 0 : B[0].rows()) : A[0].rows();
        auto square = [D](const Eigen::MatrixXd& m) { return m.rows() == D && m.cols() == D; };
        if (!std::all_of(A.begin(), A.end(), square) || !std::all_of(B.begin(), B.end(), square))
            throw PreconditionError("all PSD factors must be D x D for a common D");
    }
};

namespace detail {

inline double min_sym_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace detail

inline FactorCheck verify_psd(const PsdCandidate& c) {
    FactorCheck out;
    double res = 0, m = 0;
    bool symmetric = true;
    auto visit = [&](const Eigen::MatrixXd& x) {
        if ((x - x.transpose()).cwiseAbs().maxCoeff() > psd_tolerance) symmetric = false;
        m = std::min(m, detail::min_sym_eigenvalue(x));
    };
    for (const auto& a : c.A) visit(a);
    for (const auto& b : c.B) visit(b);
    for (Eigen::Index i = 0; i < c.F.rows(); ++i)
        for (Eigen::Index j = 0; j < c.F.cols(); ++j)
            res = std::max(res, std::fabs((c.A[static_cast<std::size_t>(i)] * c.B[static_cast<std::size_t>(j)]).trace() - c.F(i, j)));
    out.residual = res;
    out.min_factor = m;
    out.ok = symmetric && res <= factor_tolerance && m >= -psd_tolerance;
    return out;
}

/// Nonnegative vectors become diagonal PSD matrices; the trace pairing of
/// diagonals is the dot product, so a valid NMF maps to a valid PSD
/// factorization of the same size.
inline PsdCandidate embed_nmf(const NmfCandidate& c) {
    std::vector<Eigen::MatrixXd> A, B;
    for (Eigen::Index i = 0; i < c.left.rows(); ++i) A.push_back(c.left.row(i).transpose().asDiagonal());
    for (Eigen::Index j = 0; j < c.right.rows(); ++j) B.push_back(c.right.row(j).transpose().asDiagonal());
    return PsdCandidate(c.F, std::move(A), std::move(B));
}

enum class RankMode { plain, nonnegative };

inline const char* to_string(RankMode m) { return m == RankMode::plain ? "plain" : "nonnegative"; }

struct RankOracleOptions {
    std::size_t grid = 4;  // generator entries are multiples of 1/grid on the simplex
};

struct RankOracleResult {
    RankMode mode = RankMode::plain;
    bool found = false;
    // Plain mode: the exact rank. Nonnegative mode: a verified factorization
    // when found; "not found" only means none exists on the grid.
    std::optional<std::size_t> rank;
    std::optional<Matrix<Rational>> left;
    std::optional<Matrix<Rational>> right;
    std::string note;
};

inline constexpr std::size_t nonnegative_oracle_max_side = 4;
inline constexpr std::size_t nonnegative_oracle_max_rank = 3;

namespace detail {

// Unique exact solution of A x = b for A with independent columns, if any.
inline std::optional<std::vector<Rational>> solve_full_column_rank(Matrix<Rational> a, std::vector<Rational> b) {
    const std::size_t m = a.rows(), k = a.cols();
    std::size_t row = 0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = row;
        while (piv < m && a(piv, col) == 0) ++piv;
        if (piv == m) return std::nullopt;  // dependent columns
        for (std::size_t j = 0; j < k; ++j) std::swap(a(row, j), a(piv, j));
        std::swap(b[row], b[piv]);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || a(i, col) == 0) continue;
            const Rational f = a(i, col) / a(row, col);
            for (std::size_t j = col; j < k; ++j) a(i, j) -= f * a(row, j);
            b[i] -= f * b[row];
        }
        ++row;
    }
    for (std::size_t i = k; i < m; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<Rational> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = b[i] / a(i, i);
    return x;
}

// Nonnegative coefficients expressing f in the cone of the columns of g, by
// trying every independent column subset (Caratheodory).
inline std::optional<std::vector<Rational>> cone_coefficients(const Matrix<Rational>& g, const std::vector<Rational>& f) {
    const std::size_t m = g.rows(), k = g.cols();
    if (std::all_of(f.begin(), f.end(), [](const Rational& x) { return x == 0; })) return std::vector<Rational>(k, 0);
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < k; ++j)
            if (mask & (1u << j)) cols.push_back(j);
        if (cols.size() > m) continue;
        Matrix<Rational> sub(m, cols.size());
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = g(i, cols[j]);
        auto x = solve_full_column_rank(sub, f);
        if (!x || std::any_of(x->begin(), x->end(), [](const Rational& v) { return v < 0; })) continue;
        std::vector<Rational> out(k, 0);
        for (std::size_t j = 0; j < cols.size(); ++j) out[cols[j]] = (*x)[j];
        return out;
    }
    return std::nullopt;
}

// All vectors of length m with entries in {0, 1/q, ..., 1} summing to 1.
inline void simplex_grid(std::size_t m, std::size_t q, std::vector<std::vector<Rational>>& out) {
    std::vector<std::size_t> parts(m, 0);
    auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
        if (i + 1 == m) {
            parts[i] = left;
            std::vector<Rational> v(m);
            for (std::size_t j = 0; j < m; ++j) v[j] = Rational(static_cast<long>(parts[j]), static_cast<long>(q));
            for (auto& x : v) x.canonicalize();
            out.push_back(std::move(v));
            return;
        }
        for (std::size_t p = 0; p <= left; ++p) {
            parts[i] = p;
            self(self, i + 1, left - p);
        }
    };
    rec(rec, 0, q);
}

}  // namespace detail

/// Plain mode decides rank(F) <= D exactly. Nonnegative mode searches for
/// F = L R^T with L, R >= 0 and inner dimension D, drawing the columns of L
/// from the normalized columns of F and a simplex grid and solving for R
/// exactly. Only tiny inputs are accepted in that mode.
inline RankOracleResult rank_oracle(const Matrix<Rational>& F, RankMode mode, std::size_t D,
                                    const RankOracleOptions& opts = {}) {
    RankOracleResult out;
    out.mode = mode;
    if (mode == RankMode::plain) {
        const std::size_t r = exact_rank(F);
        out.rank = r;
        out.found = r <= D;
        out.note = "exact rank " + std::to_string(r);
        return out;
    }
    const std::size_t m = F.rows(), n = F.cols();
    if (m > nonnegative_oracle_max_side || n > nonnegative_oracle_max_side || D > nonnegative_oracle_max_rank)
        throw SizeCapExceeded("nonnegative rank oracle is limited to 4 x 4 matrices and D <= 3");
    if (D < 1) throw PreconditionError("D must be at least 1");
    if (opts.grid < 1) throw PreconditionError("grid resolution must be at least 1");
    for (const auto& x : F.data())
        if (x < 0) throw DomainError("F must be entrywise nonnegative");

    std::vector<std::vector<Rational>> generators;
    for (std::size_t j = 0; j < n; ++j) {
        Rational s = 0;
        for (std::size_t i = 0; i < m; ++i) s += F(i, j);
        if (s == 0) continue;
        std::vector<Rational> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = F(i, j) / s;
        if (std::find(generators.begin(), generators.end(), v) == generators.end()) generators.push_back(std::move(v));
    }
    {
        std::vector<std::vector<Rational>> grid;
        detail::simplex_grid(m, opts.grid, grid);
        for (auto& v : grid)
            if (std::find(generators.begin(), generators.end(), v) == generators.end()) generators.push_back(std::move(v));
    }

    std::vector<std::vector<Rational>> columns(n, std::vector<Rational>(m));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) columns[j][i] = F(i, j);

    // Nondecreasing index tuples: column order of L is irrelevant.
    std::vector<std::size_t> pick(D, 0);
    const std::size_t g = generators.size();
    while (true) {
        Matrix<Rational> L(m, D);
        for (std::size_t c = 0; c < D; ++c)
            for (std::size_t i = 0; i < m; ++i) L(i, c) = generators[pick[c]][i];
        Matrix<Rational> R(n, D);
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            auto coef = detail::cone_coefficients(L, columns[j]);
            if (!coef) {
                ok = false;
                break;
            }
            for (std::size_t c = 0; c < D; ++c) R(j, c) = (*coef)[c];
        }
        if (ok) {
            out.found = true;
            out.left = std::move(L);
            out.right = std::move(R);
            out.note = "found an exact nonnegative factorization";
            return out;
        }
        std::size_t c = D;
        while (c > 0 && pick[c - 1] + 1 == g) --c;
        if (c == 0) break;
        ++pick[c - 1];
        for (std::size_t k = c; k < D; ++k) pick[k] = pick[c - 1];
    }
    out.note = "not found on the grid; this does not prove that none exists";
    return out;
}

}  // namespace mpocert
