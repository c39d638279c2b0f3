#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/words.hpp"

namespace mpocert {

struct Domino {
    Word upper;  // u_alpha
    Word lower;  // v_alpha
};

/// d dominos (u_alpha, v_alpha) over a common alphabet. Letters of the
/// index alphabet [d] select dominos; U and V are the induced morphisms.
class PcpInstance {
public:
    PcpInstance(Alphabet alphabet, std::vector<Domino> dominos)
        : alphabet_(std::move(alphabet)), dominos_(std::move(dominos)) {
        if (dominos_.empty()) throw PreconditionError("a PCP instance needs at least one domino");
        std::vector<Word> us, vs;
        for (const auto& dm : dominos_) {
            require_letters_in(dm.upper, alphabet_.size(), "domino");
            require_letters_in(dm.lower, alphabet_.size(), "domino");
            us.push_back(dm.upper);
            vs.push_back(dm.lower);
        }
        upper_ = WordMorphism(std::move(us));
        lower_ = WordMorphism(std::move(vs));
    }

    /// Convenience: dominos given as strings over the alphabet.
    static PcpInstance from_strings(const Alphabet& alphabet,
                                    const std::vector<std::pair<std::string, std::string>>& pairs) {
        std::vector<Domino> ds;
        for (const auto& [u, v] : pairs) ds.push_back({alphabet.parse(u), alphabet.parse(v)});
        return PcpInstance(alphabet, std::move(ds));
    }

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    const std::vector<Domino>& dominos() const noexcept { return dominos_; }
    std::size_t size() const noexcept { return dominos_.size(); }  // d
    const WordMorphism& upper() const noexcept { return upper_; }   // U
    const WordMorphism& lower() const noexcept { return lower_; }   // V

private:
    Alphabet alphabet_;
    std::vector<Domino> dominos_;
    WordMorphism upper_;
    WordMorphism lower_;
};

inline bool verify_solution(const PcpInstance& inst, const Word& w) {
    if (w.empty()) throw PreconditionError("PCP solutions are non-empty words");
    require_letters_in(w, inst.size(), "candidate solution");
    return inst.upper().apply(w) == inst.lower().apply(w);
}

struct SearchOptions {
    /// Maximum number of partial words visited before giving up.
    std::uint64_t budget = 10'000'000;
    /// Workers splitting the first letter. The witness does not depend on it.
    unsigned threads = 1;
};

namespace detail {

// Depth-first search over [d]^n in lexicographic order, keeping U(w) and
// V(w) and pruning as soon as neither is a prefix of the other.
class BpcpSearch {
public:
    BpcpSearch(const PcpInstance& inst, std::size_t n, std::atomic<std::uint64_t>& visited,
               std::uint64_t budget, const std::atomic<Letter>* cutoff)
        : inst_(inst), n_(n), visited_(visited), budget_(budget), cutoff_(cutoff) {}

    // Searches words starting with `first`. Returns the lexicographically
    // least solution in that subtree, if any.
    std::optional<Word> run(Letter first) {
        word_.clear();
        top_.clear();
        bottom_.clear();
        if (extend(first) && descend()) return Word(word_);
        return std::nullopt;
    }

private:
    bool extend(Letter a) {
        if (visited_.fetch_add(1, std::memory_order_relaxed) + 1 > budget_) throw BudgetExhausted("BPCP search budget exhausted", budget_);
        const std::size_t old_common = std::min(top_.size(), bottom_.size());
        const auto& u = inst_.upper().image(a);
        const auto& v = inst_.lower().image(a);
        top_.insert(top_.end(), u.begin(), u.end());
        bottom_.insert(bottom_.end(), v.begin(), v.end());
        word_.push_back(a);
        const std::size_t new_common = std::min(top_.size(), bottom_.size());
        for (std::size_t i = old_common; i < new_common; ++i)
            if (top_[i] != bottom_[i]) {
                retract(u.size(), v.size());
                return false;
            }
        return true;
    }

    void retract(std::size_t nu, std::size_t nv) {
        top_.resize(top_.size() - nu);
        bottom_.resize(bottom_.size() - nv);
        word_.pop_back();
    }

    bool descend() {
        if (cutoff_ && !word_.empty() && word_.front() > cutoff_->load(std::memory_order_relaxed)) return false;
        if (word_.size() == n_) return top_.size() == bottom_.size();
        for (Letter a = 1; a <= inst_.size(); ++a) {
            if (!extend(a)) continue;
            if (descend()) return true;
            retract(inst_.upper().image(a).size(), inst_.lower().image(a).size());
        }
        return false;
    }

    const PcpInstance& inst_;
    std::size_t n_;
    std::atomic<std::uint64_t>& visited_;
    std::uint64_t budget_;
    const std::atomic<Letter>* cutoff_;
    std::vector<Letter> word_;
    std::vector<Letter> top_;
    std::vector<Letter> bottom_;
};

inline std::optional<Word> solve_bpcp_counted(const PcpInstance& inst, std::size_t n, const SearchOptions& opts,
                                              std::atomic<std::uint64_t>& visited) {
    const Letter d = static_cast<Letter>(inst.size());
    if (opts.threads <= 1 || d == 1) {
        BpcpSearch search(inst, n, visited, opts.budget, nullptr);
        for (Letter a = 1; a <= d; ++a)
            if (auto w = search.run(a)) return w;
        return std::nullopt;
    }

    // Parallel: one task per first letter. A found witness lowers the cutoff
    // so that subtrees with larger first letters stop early; the reducer then
    // takes the smallest first letter, which gives the lexicographic minimum.
    std::atomic<Letter> cutoff{d};
    std::atomic<Letter> next{1};
    std::vector<std::optional<Word>> found(d);
    std::vector<char> exhausted(d, 0);
    auto worker = [&] {
        BpcpSearch search(inst, n, visited, opts.budget, &cutoff);
        for (Letter a = next.fetch_add(1); a <= d; a = next.fetch_add(1)) {
            if (a > cutoff.load()) continue;
            try {
                found[a - 1] = search.run(a);
            } catch (const BudgetExhausted&) {
                exhausted[a - 1] = 1;
                continue;
            }
            if (found[a - 1]) {
                Letter cur = cutoff.load();
                while (a < cur && !cutoff.compare_exchange_weak(cur, a)) {
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(opts.threads, d);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (Letter a = 1; a <= d; ++a) {
        if (exhausted[a - 1]) throw BudgetExhausted("BPCP search budget exhausted", opts.budget);
        if (found[a - 1]) return found[a - 1];
    }
    return std::nullopt;
}

}  // namespace detail

/// Some w in [d]^n with U(w) = V(w) (the lexicographically least one), or
/// nullopt when none exists. Throws BudgetExhausted when the candidate budget
/// runs out first; that outcome means "unknown", not "absent".
inline std::optional<Word> solve_bpcp(const PcpInstance& inst, std::size_t n, const SearchOptions& opts = {}) {
    if (n < 1) throw PreconditionError("BPCP word length must be at least 1");
    std::atomic<std::uint64_t> visited{0};
    return detail::solve_bpcp_counted(inst, n, opts, visited);
}

struct BoundedSolution {
    Word word;
    std::size_t length = 0;
};

/// Semi-decision search for unrestricted PCP: the shortest solution of
/// length <= n_max. The budget is shared across all lengths.
inline std::optional<BoundedSolution> solve_pcp_bounded(const PcpInstance& inst, std::size_t n_max,
                                                        const SearchOptions& opts = {}) {
    if (n_max < 1) throw PreconditionError("n_max must be at least 1");
    std::atomic<std::uint64_t> visited{0};
    for (std::size_t n = 1; n <= n_max; ++n)
        if (auto w = detail::solve_bpcp_counted(inst, n, opts, visited)) return BoundedSolution{*w, n};
    return std::nullopt;
}

}  // namespace mpocert
