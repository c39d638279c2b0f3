#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/words.hpp"

namespace mpocert {

/// One MPS site: entries A[a, s, b] with a the left bond, s the physical
/// index (0-based) and b the right bond, stored row-major.
struct SiteTensor {
    std::size_t left = 1;
    std::size_t phys = 1;
    std::size_t right = 1;
    std::vector<double> data;

    SiteTensor() = default;
    SiteTensor(std::size_t l, std::size_t p, std::size_t r) : left(l), phys(p), right(r), data(l * p * r, 0.0) {}

    double& operator()(std::size_t a, std::size_t s, std::size_t b) { return data[(a * phys + s) * right + b]; }
    double operator()(std::size_t a, std::size_t s, std::size_t b) const { return data[(a * phys + s) * right + b]; }

    /// (left*phys) x right view as a matrix.
    Eigen::MatrixXd as_left_matrix() const {
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            data.data(), static_cast<Eigen::Index>(left * phys), static_cast<Eigen::Index>(right));
    }
    /// left x (phys*right) view as a matrix.
    Eigen::MatrixXd as_right_matrix() const {
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            data.data(), static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(phys * right));
    }
    void assign_row_major(const Eigen::MatrixXd& m) {
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
        data.assign(rm.data(), rm.data() + rm.size());
    }
};

/// Open-boundary MPS; bond dimensions chain up and the outer bonds are 1.
class Mps {
public:
    Mps() = default;
    explicit Mps(std::vector<SiteTensor> sites) : sites_(std::move(sites)) { validate(); }

    std::size_t size() const noexcept { return sites_.size(); }
    const SiteTensor& site(std::size_t k) const { return sites_.at(k); }
    SiteTensor& site(std::size_t k) { return sites_.at(k); }
    const std::vector<SiteTensor>& sites() const noexcept { return sites_; }

    std::size_t max_bond() const {
        std::size_t m = 1;
        for (const auto& s : sites_) m = std::max(m, s.right);
        return m;
    }

    void validate() const {
        if (sites_.empty()) throw PreconditionError("MPS needs at least one site");
        if (sites_.front().left != 1 || sites_.back().right != 1)
            throw PreconditionError("MPS outer bonds must have dimension 1");
        for (std::size_t k = 0; k < sites_.size(); ++k) {
            const auto& s = sites_[k];
            if (s.data.size() != s.left * s.phys * s.right) throw PreconditionError("MPS site data size mismatch");
            if (k + 1 < sites_.size() && s.right != sites_[k + 1].left)
                throw PreconditionError("MPS bond dimensions do not chain");
        }
    }

    /// <psi|psi> by transfer matrices.
    double norm_squared() const {
        Eigen::MatrixXd env = Eigen::MatrixXd::Ones(1, 1);
        for (const auto& s : sites_) {
            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(s.right, s.right);
            for (std::size_t p = 0; p < s.phys; ++p) {
                Eigen::MatrixXd slice(s.left, s.right);
                for (std::size_t a = 0; a < s.left; ++a)
                    for (std::size_t b = 0; b < s.right; ++b) slice(a, b) = s(a, p, b);
                next += slice.transpose() * env * slice;
            }
            env = std::move(next);
        }
        return env(0, 0);
    }

    /// Dense state vector (small systems only); first site most significant.
    Eigen::VectorXd to_dense(std::size_t cap = std::size_t{1} << 22) const {
        Eigen::MatrixXd cur = Eigen::MatrixXd::Ones(1, 1);  // rows: basis prefix, cols: bond
        for (const auto& s : sites_) {
            if (static_cast<std::size_t>(cur.rows()) * s.phys > cap) throw SizeCapExceeded("MPS too large to densify");
            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(cur.rows() * static_cast<Eigen::Index>(s.phys), s.right);
            for (Eigen::Index r = 0; r < cur.rows(); ++r)
                for (std::size_t p = 0; p < s.phys; ++p)
                    for (std::size_t b = 0; b < s.right; ++b) {
                        double acc = 0;
                        for (std::size_t a = 0; a < s.left; ++a) acc += cur(r, static_cast<Eigen::Index>(a)) * s(a, p, b);
                        next(r * static_cast<Eigen::Index>(s.phys) + static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(b)) = acc;
                    }
            cur = std::move(next);
        }
        return cur.col(0);
    }

private:
    std::vector<SiteTensor> sites_;
};

/// Computational basis product state |w>, w over [d].
inline Mps product_state(const Word& w, std::size_t d) {
    require_letters_in(w, d, "basis word");
    std::vector<SiteTensor> sites;
    for (Letter a : w) {
        SiteTensor s(1, d, 1);
        s(0, a - 1, 0) = 1.0;
        sites.push_back(std::move(s));
    }
    return Mps(std::move(sites));
}

/// Bond dimension across the cut after site k of an n-site chain, capped
/// at chi and at the dimension of either side.
inline std::size_t capped_bond(std::size_t k, std::size_t n, std::size_t d, std::size_t chi) {
    std::size_t left = 1, right = 1;
    for (std::size_t i = 0; i < k && left < chi; ++i) left *= d;
    for (std::size_t i = 0; i < n - k && right < chi; ++i) right *= d;
    return std::min({chi, left, right});
}

template <typename Rng>
Mps random_mps(std::size_t n, std::size_t d, std::size_t chi, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<SiteTensor> sites;
    for (std::size_t k = 0; k < n; ++k) {
        SiteTensor s(capped_bond(k, n, d, chi), d, capped_bond(k + 1, n, d, chi));
        for (auto& x : s.data) x = g(rng);
        sites.push_back(std::move(s));
    }
    return Mps(std::move(sites));
}

/// Embeds psi into the manifold of bond dimension chi by zero padding; the
/// represented state is unchanged.
inline Mps pad_mps(const Mps& psi, std::size_t chi) {
    const std::size_t n = psi.size();
    std::vector<SiteTensor> sites;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = psi.site(k);
        SiteTensor t(std::max(s.left, capped_bond(k, n, s.phys, chi)), s.phys,
                     std::max(s.right, capped_bond(k + 1, n, s.phys, chi)));
        for (std::size_t a = 0; a < s.left; ++a)
            for (std::size_t p = 0; p < s.phys; ++p)
                for (std::size_t b = 0; b < s.right; ++b) t(a, p, b) = s(a, p, b);
        sites.push_back(std::move(t));
    }
    return Mps(std::move(sites));
}

namespace detail {

// Environments are flat (bra bond, MPO bond, ket bond) arrays.

// Absorbs one site into a left environment of bond chi:
// next[b,j,b'] = sum A[a,alpha,b] env[a,i,a'] W^{alpha,beta}_{ij} A[a',beta,b'].
inline std::vector<double> extend_left(const std::vector<double>& env, std::size_t chi, const SiteTensor& s,
                                       const RealMpo& mpo) {
    const std::size_t D = mpo.bond_dim();
    const std::size_t d = mpo.physical_dim();
    const std::size_t cr = s.right;
    if (s.phys != d) throw PreconditionError("MPS physical dimension differs from the MPO's");
    if (s.left != chi) throw PreconditionError("MPS bond does not match the environment");
    std::vector<double> t1(d * cr * D * chi, 0.0);  // [alpha][b][i][a']
    for (std::size_t a = 0; a < chi; ++a)
        for (std::size_t al = 0; al < d; ++al)
            for (std::size_t b = 0; b < cr; ++b) {
                const double x = s(a, al, b);
                if (x == 0.0) continue;
                for (std::size_t i = 0; i < D; ++i)
                    for (std::size_t ap = 0; ap < chi; ++ap)
                        t1[((al * cr + b) * D + i) * chi + ap] += x * env[(a * D + i) * chi + ap];
            }
    std::vector<double> t2(cr * d * D * chi, 0.0);  // [b][beta][j][a']
    for (Letter al = 1; al <= d; ++al)
        for (Letter be = 1; be <= d; ++be) {
            const auto& w = mpo.block(al, be);
            if (w.is_zero()) continue;
            for (std::size_t b = 0; b < cr; ++b)
                for (std::size_t i = 0; i < D; ++i)
                    for (std::size_t j = 0; j < D; ++j) {
                        const double wij = w(i, j);
                        if (wij == 0.0) continue;
                        for (std::size_t ap = 0; ap < chi; ++ap)
                            t2[((b * d + (be - 1)) * D + j) * chi + ap] +=
                                t1[(((al - 1) * cr + b) * D + i) * chi + ap] * wij;
                    }
        }
    std::vector<double> next(cr * D * cr, 0.0);
    for (std::size_t b = 0; b < cr; ++b)
        for (std::size_t be = 0; be < d; ++be)
            for (std::size_t j = 0; j < D; ++j)
                for (std::size_t ap = 0; ap < chi; ++ap) {
                    const double x = t2[((b * d + be) * D + j) * chi + ap];
                    if (x == 0.0) continue;
                    for (std::size_t bp = 0; bp < cr; ++bp) next[(b * D + j) * cr + bp] += x * s(ap, be, bp);
                }
    return next;
}

// Mirror image of extend_left for a right environment of bond chi = s.right:
// next[a,i,a'] = sum A[a,alpha,b] W^{alpha,beta}_{ij} env[b,j,b'] A[a',beta,b'].
inline std::vector<double> extend_right(const std::vector<double>& env, const SiteTensor& s, const RealMpo& mpo) {
    const std::size_t D = mpo.bond_dim();
    const std::size_t d = mpo.physical_dim();
    const std::size_t cl = s.left, cr = s.right;
    if (s.phys != d) throw PreconditionError("MPS physical dimension differs from the MPO's");
    std::vector<double> u1(cr * D * cl * d, 0.0);  // [b][j][a'][beta]
    for (std::size_t b = 0; b < cr; ++b)
        for (std::size_t j = 0; j < D; ++j)
            for (std::size_t bp = 0; bp < cr; ++bp) {
                const double r = env[(b * D + j) * cr + bp];
                if (r == 0.0) continue;
                for (std::size_t ap = 0; ap < cl; ++ap)
                    for (std::size_t be = 0; be < d; ++be) u1[((b * D + j) * cl + ap) * d + be] += r * s(ap, be, bp);
            }
    std::vector<double> u2(cr * d * D * cl, 0.0);  // [b][alpha][i][a']
    for (Letter al = 1; al <= d; ++al)
        for (Letter be = 1; be <= d; ++be) {
            const auto& w = mpo.block(al, be);
            if (w.is_zero()) continue;
            for (std::size_t b = 0; b < cr; ++b)
                for (std::size_t i = 0; i < D; ++i)
                    for (std::size_t j = 0; j < D; ++j) {
                        const double wij = w(i, j);
                        if (wij == 0.0) continue;
                        for (std::size_t ap = 0; ap < cl; ++ap)
                            u2[((b * d + (al - 1)) * D + i) * cl + ap] += wij * u1[((b * D + j) * cl + ap) * d + (be - 1)];
                    }
        }
    std::vector<double> next(cl * D * cl, 0.0);
    for (std::size_t a = 0; a < cl; ++a)
        for (std::size_t al = 0; al < d; ++al)
            for (std::size_t b = 0; b < cr; ++b) {
                const double x = s(a, al, b);
                if (x == 0.0) continue;
                for (std::size_t i = 0; i < D; ++i)
                    for (std::size_t ap = 0; ap < cl; ++ap)
                        next[(a * D + i) * cl + ap] += x * u2[((b * d + al) * D + i) * cl + ap];
            }
    return next;
}

}  // namespace detail

/// <psi| rho |psi> by the three-layer transfer contraction; cost is
/// polynomial in chi, D, d and n.
inline double expectation(const Mps& psi, const RealMpo& mpo) {
    std::vector<double> env(mpo.left().begin(), mpo.left().end());
    std::size_t chi = 1;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        env = detail::extend_left(env, chi, psi.site(k), mpo);
        chi = psi.site(k).right;
    }
    double out = 0;
    for (std::size_t i = 0; i < mpo.bond_dim(); ++i) out += env[i] * mpo.right()[i];
    return out;
}

}  // namespace mpocert
