#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/mps.hpp"

namespace mpocert {

/// Completely positive map Phi(X) = sum_e K_e X K_e^T from the auxiliary
/// space C^D into C^d (x) C^D. Each K_e is (d*D) x D with row index
/// s*D + a' (emitted letter s, new auxiliary state a') and column index a.
struct KrausChannel {
    std::size_t D = 0;
    std::size_t d = 0;
    std::size_t E = 0;
    std::vector<Eigen::MatrixXd> kraus;

    KrausChannel() = default;
    KrausChannel(std::size_t aux_dim, std::size_t phys_dim, std::vector<Eigen::MatrixXd> ops)
        : D(aux_dim), d(phys_dim), E(ops.size()), kraus(std::move(ops)) {
        if (D < 1 || d < 1) throw PreconditionError("channel dimensions must be positive");
        if (kraus.empty()) throw PreconditionError("channel needs at least one Kraus operator");
        for (const auto& k : kraus)
            if (static_cast<std::size_t>(k.rows()) != d * D || static_cast<std::size_t>(k.cols()) != D)
                throw PreconditionError("Kraus operator must be (d*D) x D");
    }

    /// D x D slice of K_e for emitted letter s (0-based).
    Eigen::MatrixXd slice(std::size_t e, std::size_t s) const {
        return kraus.at(e).middleRows(static_cast<Eigen::Index>(s * D), static_cast<Eigen::Index>(D));
    }
};

struct ChannelCheck {
    bool ok = false;
    double residual = 0;  // || sum_e K_e^T K_e - 1 ||_F
};

inline constexpr double channel_tolerance = 1e-10;

/// Trace preservation: sum_e K_e^T K_e = 1 on C^D.
inline ChannelCheck validate_channel(const KrausChannel& c) {
    Eigen::MatrixXd acc = -Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(c.D), static_cast<Eigen::Index>(c.D));
    for (const auto& k : c.kraus) acc += k.transpose() * k;
    ChannelCheck out;
    out.residual = acc.norm();
    out.ok = out.residual < channel_tolerance;
    return out;
}

/// Channel from a Gaussian isometry V: C^D -> C^E (x) C^d (x) C^D, cut into
/// E Kraus operators.
template <typename Rng>
KrausChannel random_channel(std::size_t D, std::size_t d, std::size_t E, Rng& rng) {
    if (D < 1 || d < 1 || E < 1) throw PreconditionError("channel dimensions must be positive");
    const auto rows = static_cast<Eigen::Index>(E * d * D), cols = static_cast<Eigen::Index>(D);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd v = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    std::vector<Eigen::MatrixXd> ops;
    for (std::size_t e = 0; e < E; ++e)
        ops.push_back(v.middleRows(static_cast<Eigen::Index>(e * d * D), static_cast<Eigen::Index>(d * D)));
    return KrausChannel(D, d, std::move(ops));
}

/// Full-rank random density matrix G G^T / tr.
template <typename Rng>
Eigen::MatrixXd random_density(std::size_t D, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(D);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(rng);
    Eigen::MatrixXd rho = m * m.transpose();
    return rho / rho.trace();
}

/// A channel together with the initial auxiliary density matrix sigma.
struct FcsInstance {
    KrausChannel channel;
    Eigen::MatrixXd sigma;

    FcsInstance() = default;
    FcsInstance(KrausChannel c, Eigen::MatrixXd s) : channel(std::move(c)), sigma(std::move(s)) {
        const auto D = static_cast<Eigen::Index>(channel.D);
        if (sigma.rows() != D || sigma.cols() != D) throw PreconditionError("sigma must be D x D");
        if ((sigma - sigma.transpose()).norm() > 1e-12) throw PreconditionError("sigma is not symmetric");
        if (std::fabs(sigma.trace() - 1.0) > 1e-12) throw PreconditionError("sigma must have trace 1");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) < -1e-10) throw PreconditionError("sigma is not positive semidefinite");
    }
};

namespace detail {

// d^n x d^n matrix of D x D blocks, flattened as one (d^n D) square matrix
// with row index x*D + a.
inline Eigen::MatrixXd trace_aux(const Eigen::MatrixXd& blocks, std::size_t outer, std::size_t D) {
    const auto o = static_cast<Eigen::Index>(outer), dd = static_cast<Eigen::Index>(D);
    Eigen::MatrixXd out(o, o);
    for (Eigen::Index x = 0; x < o; ++x)
        for (Eigen::Index y = 0; y < o; ++y) out(x, y) = blocks.block(x * dd, y * dd, dd, dd).trace();
    return out;
}

}  // namespace detail

/// n-site state: Phi applied n times to sigma, each application emitting one
/// site, then the auxiliary leg traced out. Rows are ordered like
/// dense_assemble (first site most significant).
inline Eigen::MatrixXd fcs_density(const FcsInstance& f, std::size_t n, const DenseOptions& opts = {}) {
    const auto& c = f.channel;
    const std::size_t outer = checked_power(c.d, n, opts.cap, "fcs_density");
    const auto D = static_cast<Eigen::Index>(c.D);
    std::vector<std::vector<Eigen::MatrixXd>> slices(c.E);
    for (std::size_t e = 0; e < c.E; ++e)
        for (std::size_t s = 0; s < c.d; ++s) slices[e].push_back(c.slice(e, s));

    Eigen::MatrixXd cur = f.sigma;
    std::size_t width = 1;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t nw = width * c.d;
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nw) * D, static_cast<Eigen::Index>(nw) * D);
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t y = 0; y < width; ++y) {
                const Eigen::MatrixXd b = cur.block(static_cast<Eigen::Index>(x) * D, static_cast<Eigen::Index>(y) * D, D, D);
                for (std::size_t e = 0; e < c.E; ++e)
                    for (std::size_t s = 0; s < c.d; ++s) {
                        const Eigen::MatrixXd left = slices[e][s] * b;
                        for (std::size_t t = 0; t < c.d; ++t)
                            next.block(static_cast<Eigen::Index>(x * c.d + s) * D, static_cast<Eigen::Index>(y * c.d + t) * D, D, D) +=
                                left * slices[e][t].transpose();
                    }
            }
        cur = std::move(next);
        width = nw;
    }
    return detail::trace_aux(cur, outer, c.D);
}

/// Local purification on C^D (x) (C^d (x) C^E)^{(x) n} (x) C^D: site 0 is the
/// left boundary leg carrying sqrt(sigma), sites 1..n carry the pair (s, e)
/// as physical index s*E + e, and site n+1 is the right boundary leg.
inline Mps purify(const FcsInstance& f, std::size_t n) {
    if (n < 1) throw PreconditionError("purification needs at least one site");
    const auto& c = f.channel;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.sigma);
    const Eigen::MatrixXd root =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

    std::vector<SiteTensor> sites;
    SiteTensor first(1, c.D, c.D);
    for (std::size_t p = 0; p < c.D; ++p)
        for (std::size_t a = 0; a < c.D; ++a) first(0, p, a) = root(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(a));
    sites.push_back(std::move(first));
    for (std::size_t k = 0; k < n; ++k) {
        SiteTensor s(c.D, c.d * c.E, c.D);
        for (std::size_t a = 0; a < c.D; ++a)
            for (std::size_t x = 0; x < c.d; ++x)
                for (std::size_t e = 0; e < c.E; ++e)
                    for (std::size_t b = 0; b < c.D; ++b)
                        s(a, x * c.E + e, b) = c.kraus[e](static_cast<Eigen::Index>(x * c.D + b), static_cast<Eigen::Index>(a));
        sites.push_back(std::move(s));
    }
    SiteTensor last(c.D, c.D, 1);
    for (std::size_t a = 0; a < c.D; ++a) last(a, a, 0) = 1.0;
    sites.push_back(std::move(last));
    return Mps(std::move(sites));
}

/// Reduced density matrix of |psi><psi| keeping, at site k, the factor of
/// dimension kept[k] in physical index = kept_index * (phys / kept[k]) +
/// traced_index. kept[k] = 1 traces the site out entirely.
inline Eigen::MatrixXd reduced_state(const Mps& psi, const std::vector<std::size_t>& kept,
                                     const DenseOptions& opts = {}) {
    if (kept.size() != psi.size()) throw PreconditionError("one kept dimension per site is required");
    std::size_t outer = 1;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto& s = psi.site(k);
        if (kept[k] < 1 || s.phys % kept[k] != 0) throw PreconditionError("kept dimension must divide the site dimension");
        outer *= kept[k];
        if (outer > opts.cap) throw SizeCapExceeded("reduced_state: kept dimension exceeds the dense cap");
    }
    // Blocks indexed by kept prefixes (x, y), each chi x chi.
    Eigen::MatrixXd cur = Eigen::MatrixXd::Ones(1, 1);
    std::size_t width = 1;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        const auto& s = psi.site(k);
        const std::size_t keep = kept[k], traced = s.phys / keep;
        const auto cl = static_cast<Eigen::Index>(s.left), cr = static_cast<Eigen::Index>(s.right);
        std::vector<Eigen::MatrixXd> slice(s.phys, Eigen::MatrixXd(cl, cr));
        for (std::size_t p = 0; p < s.phys; ++p)
            for (Eigen::Index a = 0; a < cl; ++a)
                for (Eigen::Index b = 0; b < cr; ++b)
                    slice[p](a, b) = s(static_cast<std::size_t>(a), p, static_cast<std::size_t>(b));
        const std::size_t nw = width * keep;
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nw) * cr, static_cast<Eigen::Index>(nw) * cr);
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t y = 0; y < width; ++y) {
                const Eigen::MatrixXd b = cur.block(static_cast<Eigen::Index>(x) * cl, static_cast<Eigen::Index>(y) * cl, cl, cl);
                for (std::size_t u = 0; u < keep; ++u)
                    for (std::size_t v = 0; v < keep; ++v) {
                        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(cr, cr);
                        for (std::size_t e = 0; e < traced; ++e)
                            acc += slice[u * traced + e].transpose() * b * slice[v * traced + e];
                        next.block(static_cast<Eigen::Index>(x * keep + u) * cr, static_cast<Eigen::Index>(y * keep + v) * cr, cr, cr) = acc;
                    }
            }
        cur = std::move(next);
        width = nw;
    }
    return cur;
}

/// Tr over the environment and boundary legs of purify(f, n).
inline Eigen::MatrixXd purification_reduced_state(const FcsInstance& f, std::size_t n, const DenseOptions& opts = {}) {
    std::vector<std::size_t> kept(n + 2, f.channel.d);
    kept.front() = kept.back() = 1;
    return reduced_state(purify(f, n), kept, opts);
}

/// The MPO of the same state: bond D^2, M^{(s,t)} = sum_e (K_e^s (x) K_e^t)^T
/// acting on row-major vec of the auxiliary matrix, left vec(sigma), right
/// vec(1).
inline RealMpo induced_mpo(const FcsInstance& f) {
    const auto& c = f.channel;
    const std::size_t D2 = c.D * c.D;
    std::vector<Matrix<double>> blocks;
    for (std::size_t s = 0; s < c.d; ++s)
        for (std::size_t t = 0; t < c.d; ++t) {
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(D2), static_cast<Eigen::Index>(D2));
            for (std::size_t e = 0; e < c.E; ++e) {
                const Eigen::MatrixXd ks = c.slice(e, s), kt = c.slice(e, t);
                for (Eigen::Index a = 0; a < ks.rows(); ++a)
                    for (Eigen::Index b = 0; b < kt.rows(); ++b)
                        for (Eigen::Index i = 0; i < ks.cols(); ++i)
                            for (Eigen::Index j = 0; j < kt.cols(); ++j)
                                acc(i * kt.cols() + j, a * kt.rows() + b) += ks(a, i) * kt(b, j);
            }
            Matrix<double> m(D2, D2);
            for (std::size_t i = 0; i < D2; ++i)
                for (std::size_t j = 0; j < D2; ++j) m(i, j) = acc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            blocks.push_back(std::move(m));
        }
    std::vector<double> left(D2), right(D2, 0.0);
    for (std::size_t a = 0; a < c.D; ++a) {
        for (std::size_t b = 0; b < c.D; ++b) left[a * c.D + b] = f.sigma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        right[a * c.D + a] = 1.0;
    }
    return RealMpo(c.d, D2, std::move(blocks), std::move(left), std::move(right));
}

}  // namespace mpocert
