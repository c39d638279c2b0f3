#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/mps.hpp"
#include "mpocert/rational.hpp"

namespace mpocert {

/// MPO for (rho + rho^T)/2. Symmetric inputs are returned unchanged;
/// otherwise the bond doubles: blocks diag(M^{ab}, M^{ba}), left (L, L)/2,
/// right (R, R).
inline RealMpo hermitized(const RealMpo& mpo) {
    if (mpo.physically_symmetric()) return mpo;
    const std::size_t d = mpo.physical_dim(), D = mpo.bond_dim();
    std::vector<Matrix<double>> blocks;
    for (Letter a = 1; a <= d; ++a)
        for (Letter b = 1; b <= d; ++b) {
            Matrix<double> m(2 * D, 2 * D);
            m.set_block(0, 0, mpo.block(a, b));
            m.set_block(D, D, mpo.block(b, a));
            blocks.push_back(std::move(m));
        }
    std::vector<double> left(2 * D), right(2 * D);
    for (std::size_t i = 0; i < D; ++i) {
        left[i] = left[D + i] = 0.5 * mpo.left()[i];
        right[i] = right[D + i] = mpo.right()[i];
    }
    return RealMpo(d, 2 * D, std::move(blocks), std::move(left), std::move(right));
}

/// Largest entry magnitude accepted when converting an exact MPO for float
/// probing. Beyond it the float contraction is meaningless.
inline constexpr double probe_magnitude_limit = 1e15;

/// Float copy of an exact MPO for probing; refuses oversized entries.
inline RealMpo probe_operator(const ExactMpo& mpo) {
    const double mag = mpo.max_entry_magnitude();
    if (!(mag <= probe_magnitude_limit))
        throw Unsupported("MPO entries reach " + std::to_string(mag) +
                          ", beyond float probing; use the exact diagonal path");
    return to_real(mpo);
}

struct VariationalOptions {
    std::size_t max_sweeps = 40;
    double tolerance = 1e-12;  // relative energy change that counts as converged
    unsigned threads = 0;      // 0: hardware concurrency
};

struct VariationalRun {
    double value = 0;  // Rayleigh quotient of `state`
    Mps state;         // normalized
    bool converged = false;
    double initial_value = 0;
    std::vector<double> sweep_values;
    std::uint64_t seed = 0;
};

namespace detail {

// Effective single-site operator H[(a,s,b),(a',t,b')] =
// sum_ij L[a,i,a'] W^{st}_{ij} R[b,j,b'], symmetrized.
inline Eigen::MatrixXd effective_operator(const std::vector<double>& L, const std::vector<double>& R, std::size_t cl,
                                          std::size_t cr, const RealMpo& mpo) {
    const std::size_t D = mpo.bond_dim(), d = mpo.physical_dim();
    const auto dim = static_cast<Eigen::Index>(cl * d * cr);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<double> x(cl * cl * D);  // [a][a'][j]
    for (Letter s = 1; s <= d; ++s)
        for (Letter t = 1; t <= d; ++t) {
            const auto& w = mpo.block(s, t);
            if (w.is_zero()) continue;
            std::fill(x.begin(), x.end(), 0.0);
            for (std::size_t a = 0; a < cl; ++a)
                for (std::size_t i = 0; i < D; ++i)
                    for (std::size_t ap = 0; ap < cl; ++ap) {
                        const double l = L[(a * D + i) * cl + ap];
                        if (l == 0.0) continue;
                        for (std::size_t j = 0; j < D; ++j) x[(a * cl + ap) * D + j] += l * w(i, j);
                    }
            for (std::size_t a = 0; a < cl; ++a)
                for (std::size_t ap = 0; ap < cl; ++ap)
                    for (std::size_t j = 0; j < D; ++j) {
                        const double xv = x[(a * cl + ap) * D + j];
                        if (xv == 0.0) continue;
                        for (std::size_t b = 0; b < cr; ++b)
                            for (std::size_t bp = 0; bp < cr; ++bp)
                                H(static_cast<Eigen::Index>((a * d + (s - 1)) * cr + b),
                                  static_cast<Eigen::Index>((ap * d + (t - 1)) * cr + bp)) +=
                                    xv * R[(b * D + j) * cr + bp];
                    }
        }
    // For real states <psi|rho|psi> only sees the symmetric part.
    return 0.5 * (H + H.transpose());
}

// Moves the orthogonality center from site k to k+1 (QR).
inline void shift_right(std::vector<SiteTensor>& sites, std::size_t k) {
    auto& s = sites[k];
    auto& t = sites[k + 1];
    const Eigen::MatrixXd m = s.as_left_matrix();
    const Eigen::Index rows = m.rows(), keep = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, keep);
    Eigen::MatrixXd r = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    SiteTensor ns(s.left, s.phys, static_cast<std::size_t>(keep));
    ns.assign_row_major(q);
    Eigen::MatrixXd next = r * t.as_right_matrix();
    SiteTensor nt(static_cast<std::size_t>(keep), t.phys, t.right);
    nt.assign_row_major(next);
    s = std::move(ns);
    t = std::move(nt);
}

// Moves the orthogonality center from site k to k-1 (LQ via QR of the
// transpose).
inline void shift_left(std::vector<SiteTensor>& sites, std::size_t k) {
    auto& s = sites[k];
    auto& t = sites[k - 1];
    const Eigen::MatrixXd mt = s.as_right_matrix().transpose();
    const Eigen::Index rows = mt.rows(), keep = std::min(mt.rows(), mt.cols());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(mt);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, keep);
    Eigen::MatrixXd r = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    SiteTensor ns(static_cast<std::size_t>(keep), s.phys, s.right);
    ns.assign_row_major(q.transpose());
    Eigen::MatrixXd prev = t.as_left_matrix() * r.transpose();
    SiteTensor nt(t.left, t.phys, static_cast<std::size_t>(keep));
    nt.assign_row_major(prev);
    s = std::move(ns);
    t = std::move(nt);
}

inline double normalize_site(SiteTensor& s) {
    double nrm = 0;
    for (double x : s.data) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw PreconditionError("cannot normalize the zero MPS");
    for (double& x : s.data) x /= nrm;
    return nrm;
}

}  // namespace detail

/// Single-site alternating minimization of <psi|rho|psi>/<psi|psi> started
/// from `init`. The state is kept in mixed-canonical form so every local
/// step is an ordinary symmetric eigenproblem and the energy never rises.
inline VariationalRun variational_sweeps(const RealMpo& mpo, Mps init, const VariationalOptions& opts = {}) {
    const std::size_t n = init.size();
    const std::size_t d = mpo.physical_dim();
    for (const auto& s : init.sites())
        if (s.phys != d) throw PreconditionError("MPS physical dimension differs from the MPO's");

    std::vector<SiteTensor> sites = init.sites();
    for (std::size_t k = n - 1; k > 0; --k) detail::shift_left(sites, k);
    detail::normalize_site(sites[0]);

    const std::vector<double> left_boundary(mpo.left().begin(), mpo.left().end());
    const std::vector<double> right_boundary(mpo.right().begin(), mpo.right().end());
    std::vector<std::vector<double>> lenv(n), renv(n);
    lenv[0] = left_boundary;
    renv[n - 1] = right_boundary;
    for (std::size_t k = n - 1; k > 0; --k) renv[k - 1] = detail::extend_right(renv[k], sites[k], mpo);

    VariationalRun run;
    run.initial_value = expectation(Mps(sites), mpo);
    double energy = run.initial_value;

    // Replaces the center tensor by the local ground state unless that would
    // not lower the energy (roundoff near a fixed point).
    auto optimize = [&](std::size_t k) {
        auto& s = sites[k];
        Eigen::MatrixXd H = detail::effective_operator(lenv[k], renv[k], s.left, s.right, mpo);
        Eigen::Map<Eigen::VectorXd> cur(s.data.data(), static_cast<Eigen::Index>(s.data.size()));
        const double current = cur.dot(H * cur);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() != Eigen::Success) throw Error("local eigensolver failed");
        if (es.eigenvalues()(0) < current) {
            Eigen::VectorXd v = es.eigenvectors().col(0);
            std::copy(v.data(), v.data() + v.size(), s.data.begin());
            energy = es.eigenvalues()(0);
        } else {
            energy = current;
        }
    };

    double previous = energy;
    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        if (n == 1) {
            optimize(0);
        } else {
            for (std::size_t k = 0; k + 1 < n; ++k) {
                optimize(k);
                detail::shift_right(sites, k);
                lenv[k + 1] = detail::extend_left(lenv[k], sites[k].left, sites[k], mpo);
            }
            for (std::size_t k = n - 1; k > 0; --k) {
                optimize(k);
                detail::shift_left(sites, k);
                renv[k - 1] = detail::extend_right(renv[k], sites[k], mpo);
            }
        }
        run.sweep_values.push_back(energy);
        if (previous - energy <= opts.tolerance * std::max(1.0, std::fabs(energy)) && sweep > 0) {
            run.converged = true;
            break;
        }
        previous = energy;
        if (n == 1) {
            run.converged = true;
            break;
        }
    }
    run.state = Mps(std::move(sites));
    run.value = expectation(run.state, mpo);
    return run;
}

namespace detail {

template <typename Task>
void run_parallel(std::size_t count, unsigned threads, Task task) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    task(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline bool better_run(const VariationalRun& a, const VariationalRun& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.seed < b.seed;
}

}  // namespace detail

/// Best of `restarts` runs from random MPS of bond chi, run r seeded with
/// seed + r.
inline VariationalRun variational_min(const RealMpo& mpo, std::size_t n, std::size_t chi, std::size_t restarts,
                                      std::uint64_t seed, const VariationalOptions& opts = {}) {
    if (chi < 1) throw PreconditionError("bond dimension chi must be at least 1");
    if (n < 1) throw PreconditionError("system size must be at least 1");
    if (restarts < 1) throw PreconditionError("at least one restart is needed");
    std::vector<VariationalRun> runs(restarts);
    detail::run_parallel(restarts, opts.threads, [&](std::size_t r) {
        std::mt19937_64 rng(seed + r);
        VariationalOptions local = opts;
        runs[r] = variational_sweeps(mpo, random_mps(n, mpo.physical_dim(), chi, rng), local);
        runs[r].seed = seed + r;
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (detail::better_run(runs[r], runs[best])) best = r;
    return std::move(runs[best]);
}

struct ProbeLevel {
    std::size_t chi = 0;
    double value = 0;
    bool converged = false;
    bool warm_started = false;  // best state came from the previous level
    std::uint64_t seed = 0;
    std::vector<double> sweep_values;
    Mps witness;
};

struct ProbeReport {
    std::size_t n = 0;
    Rational lambda;
    double tolerance = 0;  // detection needs value < -lambda - tolerance
    std::size_t restarts = 0;
    std::uint64_t seed = 0;
    bool non_normal = false;  // rho was not symmetric and got Hermitized
    std::vector<ProbeLevel> levels;
    bool negativity_detected = false;

    double best_value() const {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& l : levels) v = std::min(v, l.value);
        return v;
    }
};

/// Runs variational_min for each chi in ascending order. Every level after
/// the first also sweeps the padded best state of the previous level, so
/// reported values never increase with chi.
inline ProbeReport probe_hierarchy(const RealMpo& mpo, std::size_t n, std::vector<std::size_t> chis,
                                   std::size_t restarts, std::uint64_t seed, const Rational& lambda,
                                   const VariationalOptions& opts = {}) {
    if (chis.empty()) throw PreconditionError("probe needs at least one bond dimension");
    std::sort(chis.begin(), chis.end());
    chis.erase(std::unique(chis.begin(), chis.end()), chis.end());
    ProbeReport rep;
    rep.n = n;
    rep.lambda = lambda;
    rep.tolerance = dense_tolerance(lambda);
    rep.restarts = restarts;
    rep.seed = seed;
    rep.non_normal = !mpo.physically_symmetric();
    const RealMpo herm = hermitized(mpo);

    for (std::size_t i = 0; i < chis.size(); ++i) {
        VariationalRun best = variational_min(herm, n, chis[i], restarts, seed, opts);
        bool warm = false;
        if (i > 0) {
            const auto& prev = rep.levels.back();
            Mps padded = pad_mps(prev.witness, chis[i]);
            VariationalRun cont = variational_sweeps(herm, padded, opts);
            cont.seed = prev.seed;
            if (cont.value > prev.value) {
                // Roundoff moved the warm start up; the padded state itself
                // is a member of this level.
                cont.value = expectation(padded, herm);
                cont.state = std::move(padded);
            }
            if (cont.value <= best.value) {
                best = std::move(cont);
                warm = true;
            }
        }
        ProbeLevel lvl;
        lvl.chi = chis[i];
        lvl.value = best.value;
        lvl.converged = best.converged;
        lvl.warm_started = warm;
        lvl.seed = best.seed;
        lvl.sweep_values = std::move(best.sweep_values);
        lvl.witness = std::move(best.state);
        rep.levels.push_back(std::move(lvl));
    }
    const double threshold = -lambda.get_d() - rep.tolerance;
    for (const auto& l : rep.levels)
        if (l.value < threshold) rep.negativity_detected = true;
    return rep;
}

inline ProbeReport probe_hierarchy(const ExactMpo& mpo, std::size_t n, std::vector<std::size_t> chis,
                                   std::size_t restarts, std::uint64_t seed, const Rational& lambda,
                                   const VariationalOptions& opts = {}) {
    return probe_hierarchy(probe_operator(mpo), n, std::move(chis), restarts, seed, lambda, opts);
}

}  // namespace mpocert
