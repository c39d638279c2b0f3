// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Informational lines are marked INFO and never fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mpocert/factor_checks.hpp"
#include "mpocert/hmm.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/mps_probe.hpp"
#include "mpocert/pcp.hpp"
#include "mpocert/purification.hpp"
#include "mpocert/reduction.hpp"

using namespace mpocert;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void run(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= limit_s) {
        o.pass = false;
        o.detail += "; over the time limit";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d: %s  %s (%.2fs / %.0fs) %s\n", id, o.pass ? "PASS" : "FAIL", title, secs, limit_s,
                o.detail.c_str());
    std::fflush(stdout);
}

Word random_word(std::mt19937_64& rng, std::size_t alphabet, std::size_t min_len, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<Letter> letter(1, static_cast<Letter>(alphabet));
    std::vector<Letter> w(len(rng));
    for (auto& a : w) a = letter(rng);
    return Word(std::move(w));
}

PcpInstance classic() {
    return PcpInstance::from_strings(Alphabet({"a", "b"}), {{"a", "baa"}, {"ab", "aa"}, {"bba", "bb"}});
}

std::string word_str(const Word& w) {
    std::string s;
    for (Letter a : w) s += std::to_string(a);
    return s;
}

// Verdict pattern of the end-to-end check for one encoding.
struct EndToEnd {
    bool agree = true;
    std::string table;
    Rational min4;
    Word witness4;
    std::optional<Word> decoded4;
};

EndToEnd end_to_end(BinaryEncoding enc) {
    const auto inst = classic();
    const auto c = compile(inst, Rational(0), enc);
    EndToEnd r;
    std::ostringstream os;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto v = threshold_check(c.mpo, c.system_size(n), Rational(0));
        const bool solvable = solve_bpcp(inst, n).has_value();
        const bool negative = v.status == Positivity::not_positive;
        if (negative != solvable) r.agree = false;
        os << " n=" << n << ":" << (negative ? "neg" : "pos") << "/" << (solvable ? "sol" : "none");
        if (n == 4) {
            r.min4 = std::get<Rational>(v.min_value);
            if (v.witness_word) {
                r.witness4 = *v.witness_word;
                r.decoded4 = c.encoder.decode(*v.witness_word);
            }
        }
    }
    r.table = os.str();
    return r;
}

}  // namespace

int main() {
    run(1, "gadget morphism law on 500 random word pairs", 5, [] {
        std::mt19937_64 rng(101);
        std::uniform_int_distribution<std::size_t> base(1, 3);
        for (int t = 0; t < 500; ++t) {
            const std::size_t b = base(rng);
            const Word u1 = random_word(rng, b, 0, 6), v1 = random_word(rng, b, 0, 6);
            const Word u2 = random_word(rng, b, 0, 6), v2 = random_word(rng, b, 0, 6);
            if (!(gadget_matrix(u1, v1, b) * gadget_matrix(u2, v2, b) == gadget_matrix(u1 + u2, v1 + v2, b)))
                return Outcome{false, "mismatch for u1=" + word_str(u1) + " v1=" + word_str(v1)};
        }
        return Outcome{true, ""};
    });

    run(2, "sandwich = (sigma(U)-sigma(V))^2 - (lambda+1) on 200 words x 3 thresholds", 5, [] {
        const auto inst = classic();
        std::mt19937_64 rng(202);
        const std::vector<Rational> lambdas{Rational(0), Rational(1), Rational(7, 3)};
        std::vector<MatrixMorphism> ms;
        for (const auto& l : lambdas) ms.push_back(build_d6(inst, l));
        for (int t = 0; t < 200; ++t) {
            const Word w = random_word(rng, inst.size(), 1, 10);
            const BigInt diff = numeric_rep(inst.upper().apply(w), 2) - numeric_rep(inst.lower().apply(w), 2);
            for (std::size_t i = 0; i < lambdas.size(); ++i) {
                const Rational expect = Rational(diff * diff) - (lambdas[i] + 1);
                if (sandwich(ms[i], w) != expect) return Outcome{false, "mismatch at w=" + word_str(w)};
            }
        }
        return Outcome{true, ""};
    });

    run(3, "binary reduction preserves the sandwich on 200 words, |X(w)| = d|w|", 10, [] {
        const auto inst = classic();
        std::mt19937_64 rng(303);
        for (const Rational& lambda : {Rational(0), Rational(7, 3)}) {
            const auto d6 = build_d6(inst, lambda);
            const auto bin = binary_reduce(d6);
            for (int t = 0; t < 100; ++t) {
                const Word w = random_word(rng, inst.size(), 1, 8);
                const Word x = bin.encoder.encode(w);
                if (x.size() != inst.size() * w.size()) return Outcome{false, "length of X(w) is not d|w|"};
                if (sandwich(bin.morphism, x) != sandwich(d6, w))
                    return Outcome{false, "mismatch at w=" + word_str(w)};
            }
        }
        return Outcome{true, ""};
    });

    run(4, "end-to-end soundness at lambda=0, classic instance, n=1..4", 30, [] {
        const auto r = end_to_end(BinaryEncoding::standard);
        const bool ok4 = r.min4 == -1 && r.decoded4 && verify_solution(classic(), *r.decoded4);
        std::string detail = "verdict/BPCP:" + r.table + "; n=4 min " + to_string(r.min4) + " witness " +
                             word_str(r.witness4) + (r.decoded4 ? " decodes" : " does not decode");
        return Outcome{r.agree && ok4, detail};
    });
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = end_to_end(BinaryEncoding::guarded);
        const bool ok4 = r.min4 == -1 && r.decoded4 && verify_solution(classic(), *r.decoded4);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion  4: INFO  same check with the guarded encoding (bond 30): %s (%.2fs) verdict/BPCP:%s; "
                    "n=4 witness %s -> %s\n",
                    r.agree && ok4 ? "agrees" : "disagrees", secs, r.table.c_str(), word_str(r.witness4).c_str(),
                    r.decoded4 ? word_str(*r.decoded4).c_str() : "undecodable");
    }

    run(5, "7-domino binary instances compile to d=2, D=42, diagonal", 1, [] {
        std::mt19937_64 rng(505);
        const Alphabet ab({"0", "1"});
        for (int t = 0; t < 5; ++t) {
            std::vector<Domino> ds;
            for (int i = 0; i < 7; ++i) ds.push_back({random_word(rng, 2, 1, 3), random_word(rng, 2, 1, 3)});
            const auto c = compile(PcpInstance(ab, ds), Rational(0));
            if (c.mpo.physical_dim() != 2 || c.mpo.bond_dim() != 42 || !c.mpo.diagonal())
                return Outcome{false, "got d=" + std::to_string(c.mpo.physical_dim()) +
                                          " D=" + std::to_string(c.mpo.bond_dim())};
        }
        return Outcome{true, ""};
    });

    run(6, "dense assembly of 20 random diagonal MPOs matches per-word evaluation", 10, [] {
        std::mt19937_64 rng(606);
        std::uniform_int_distribution<int> entry(-3, 3);
        std::uniform_int_distribution<std::size_t> bond(1, 6), size(1, 5);
        for (int t = 0; t < 20; ++t) {
            const std::size_t D = bond(rng), n = size(rng);
            std::vector<Matrix<Rational>> blocks;
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = 0; b < 2; ++b) {
                    Matrix<Rational> m(D, D);
                    if (a == b)
                        for (auto& x : m.data()) x = Rational(entry(rng), 1 + static_cast<int>(rng() % 3));
                    for (auto& x : m.data()) x.canonicalize();
                    blocks.push_back(std::move(m));
                }
            std::vector<Rational> l(D), r(D);
            for (auto& x : l) x = entry(rng);
            for (auto& x : r) x = entry(rng);
            const ExactMpo mpo(2, D, std::move(blocks), l, r);
            const auto dense = dense_assemble(mpo, n);
            for (std::size_t i = 0; i < dense.rows(); ++i)
                for (std::size_t j = 0; j < dense.cols(); ++j) {
                    const Rational expect = i == j ? diagonal_entry(mpo, word_at(i, 2, n)) : Rational(0);
                    if (dense(i, j) != expect) return Outcome{false, "entry mismatch"};
                }
        }
        return Outcome{true, ""};
    });

    run(7, "HMM normalization, Hankel rank <= D, quasi-realization round trip", 60, [] {
        std::mt19937_64 rng(707);
        std::uniform_int_distribution<std::size_t> bond(1, 4), outs(1, 3);
        double worst_norm = 0, worst_trip = 0;
        for (int t = 0; t < 20; ++t) {
            const std::size_t D = bond(rng), d = outs(rng);
            const Hmm h = random_hmm(D, d, rng);
            for (std::size_t n = 1; n <= 6; ++n) {
                double total = 0;
                const std::size_t count = checked_power(d, n, std::size_t{1} << 20, "words");
                for (std::size_t i = 0; i < count; ++i) total += prob(h, word_at(i, d, n));
                worst_norm = std::max(worst_norm, std::fabs(total - 1.0));
            }
            const auto blocks = hankel_family(h, 6);
            for (const auto& b : blocks)
                if (numerical_rank(b.values) > D) return Outcome{false, "Hankel rank above D"};
            const auto q = quasi_realize(blocks);
            for (std::size_t n = 1; n <= 6; ++n) {
                const std::size_t count = checked_power(d, n, std::size_t{1} << 20, "words");
                for (std::size_t i = 0; i < count; ++i) {
                    const Word w = word_at(i, d, n);
                    worst_trip = std::max(worst_trip, std::fabs(prob(q.model, w) - prob(h, w)));
                }
            }
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "max |sum - 1| = %.1e, max round-trip error = %.1e", worst_norm, worst_trip);
        return Outcome{worst_norm <= 1e-12 && worst_trip <= 1e-10, buf};
    });

    run(8, "MPS probe hierarchy: detection, identity, variational bound", 120, [] {
        const auto c = compile(classic(), Rational(0));
        const RealMpo rho = probe_operator(c.mpo);
        const auto rep = probe_hierarchy(rho, 12, {1, 2, 4}, 8, 1, Rational(0));
        const double dense_min = min_eigenvalue(rho, 12).min_eigenvalue;
        bool bound_ok = true;
        for (const auto& l : rep.levels) bound_ok = bound_ok && l.value >= dense_min - 1e-6;

        const RealMpo id = identity_mpo<double>(2);
        const auto rid = probe_hierarchy(id, 8, {1, 2, 4}, 4, 11, Rational(0));
        const double id_min = min_eigenvalue(id, 8).min_eigenvalue;
        bool id_ok = true;
        for (const auto& l : rid.levels) {
            id_ok = id_ok && std::fabs(l.value - 1.0) <= 1e-9;
            bound_ok = bound_ok && l.value >= id_min - 1e-6;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "classic size 12 best %.12g (dense min %.12g), identity levels within 1e-9: %s",
                      rep.best_value(), dense_min, id_ok ? "yes" : "no");
        return Outcome{rep.best_value() <= -0.9 && id_ok && bound_ok, buf};
    });

    run(9, "purification suite on 20 random finitely correlated states", 60, [] {
        std::mt19937_64 rng(909);
        std::uniform_int_distribution<std::size_t> aux(1, 4), phys(1, 3), env(1, 4), sites(1, 5);
        double res = 0, min_eig = 0, tr = 0, pur = 0;
        for (int t = 0; t < 20; ++t) {
            const std::size_t D = aux(rng), d = phys(rng), E = env(rng), n = sites(rng);
            const FcsInstance f(random_channel(D, d, E, rng), random_density(D, rng));
            res = std::max(res, validate_channel(f.channel).residual);
            const Eigen::MatrixXd rho = fcs_density(f, n);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (rho + rho.transpose()), Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, es.eigenvalues()(0));
            tr = std::max(tr, std::fabs(rho.trace() - 1.0));
            pur = std::max(pur, (purification_reduced_state(f, n) - rho).cwiseAbs().maxCoeff());
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "channel residual %.1e, min eigenvalue %.1e, trace error %.1e, partial trace %.1e",
                      res, min_eig, tr, pur);
        return Outcome{res < 1e-10 && min_eig >= -1e-10 && tr <= 1e-12 && pur <= 1e-10, buf};
    });

    run(10, "NMF embeds into PSD; accepted PSD candidates have F >= -1e-10", 10, [] {
        std::mt19937_64 rng(1010);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::uniform_int_distribution<int> dim(1, 4);
        int accepted_psd = 0;
        for (int t = 0; t < 50; ++t) {
            const int m = dim(rng), n = dim(rng), D = dim(rng);
            Eigen::MatrixXd L(m, D), R(n, D);
            for (int i = 0; i < L.size(); ++i) L.data()[i] = u(rng);
            for (int i = 0; i < R.size(); ++i) R.data()[i] = u(rng);
            const NmfCandidate c(L * R.transpose(), L, R);
            if (!verify_nmf(c).ok || !verify_psd(embed_nmf(c)).ok) return Outcome{false, "embedding rejected"};

            // Random symmetric factors, PSD or not, with the induced F.
            std::normal_distribution<double> g(0.0, 1.0);
            std::vector<Eigen::MatrixXd> A, B;
            auto sample = [&] {
                Eigen::MatrixXd x(D, D);
                for (int i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
                return u(rng) < 0.5 ? Eigen::MatrixXd(x * x.transpose()) : Eigen::MatrixXd(x + x.transpose());
            };
            for (int i = 0; i < m; ++i) A.push_back(sample());
            for (int j = 0; j < n; ++j) B.push_back(sample());
            Eigen::MatrixXd F(m, n);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) F(i, j) = (A[i] * B[j]).trace();
            const PsdCandidate p(F, A, B);
            if (verify_psd(p).ok) {
                ++accepted_psd;
                if (F.minCoeff() < -1e-10) return Outcome{false, "accepted PSD candidate with a negative entry"};
            }
        }
        return Outcome{true, std::to_string(accepted_psd) + " random PSD candidates accepted"};
    });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
