#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/rational.hpp"

namespace mpocert {

/// Letters are 1-based indices into an alphabet: [b] = {1, ..., b}.
using Letter = std::uint32_t;

/// A finite word over some alphabet [b]. Ordering is lexicographic on the
/// letter sequence, which is also the enumeration order of every search.
class Word {
public:
    Word() = default;
    Word(std::initializer_list<Letter> letters) : letters_(letters) {}
    explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}

    std::size_t size() const noexcept { return letters_.size(); }
    bool empty() const noexcept { return letters_.empty(); }
    Letter operator[](std::size_t i) const { return letters_[i]; }
    const std::vector<Letter>& letters() const noexcept { return letters_; }

    auto begin() const noexcept { return letters_.begin(); }
    auto end() const noexcept { return letters_.end(); }

    void push_back(Letter a) { letters_.push_back(a); }
    void append(const Word& w) { letters_.insert(letters_.end(), w.letters_.begin(), w.letters_.end()); }

    friend Word operator+(Word a, const Word& b) {
        a.append(b);
        return a;
    }
    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word& a, const Word& b) { return a.letters_ <=> b.letters_; }

private:
    std::vector<Letter> letters_;
};

/// Throws DomainError unless every letter of w lies in [1, size].
inline void require_letters_in(const Word& w, std::size_t size, std::string_view what = "word") {
    for (Letter a : w)
        if (a < 1 || a > size)
            throw DomainError(std::string(what) + " has letter " + std::to_string(a) + " outside [1, " +
                              std::to_string(size) + "]");
}

/// Ordered set of distinct symbols. The position of a symbol (1-based) is
/// its letter index and its value under the numeric representation.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
        if (symbols_.empty()) throw PreconditionError("alphabet must have at least one symbol");
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (symbols_[i].empty()) throw PreconditionError("alphabet symbols must be non-empty");
            if (!index_.emplace(symbols_[i], static_cast<Letter>(i + 1)).second)
                throw PreconditionError("duplicate alphabet symbol '" + symbols_[i] + "'");
        }
        // Multi-character symbols need a prefix-free set for unique parsing.
        for (const auto& a : symbols_)
            for (const auto& b : symbols_)
                if (&a != &b && b.size() > a.size() && b.compare(0, a.size(), a) == 0)
                    throw PreconditionError("alphabet symbol '" + a + "' is a prefix of '" + b + "'");
    }

    std::size_t size() const noexcept { return symbols_.size(); }
    const std::vector<std::string>& symbols() const noexcept { return symbols_; }

    const std::string& symbol(Letter a) const {
        if (a < 1 || a > symbols_.size()) throw DomainError("letter " + std::to_string(a) + " not in alphabet");
        return symbols_[a - 1];
    }

    Letter letter(std::string_view symbol) const {
        auto it = index_.find(std::string(symbol));
        if (it == index_.end()) throw DomainError("symbol '" + std::string(symbol) + "' not in alphabet");
        return it->second;
    }

    /// Splits text into symbols (greedy; unambiguous because the symbol set
    /// is prefix-free).
    Word parse(std::string_view text) const {
        Word w;
        std::size_t pos = 0;
        while (pos < text.size()) {
            Letter found = 0;
            std::size_t len = 0;
            for (std::size_t i = 0; i < symbols_.size(); ++i) {
                const auto& s = symbols_[i];
                if (text.compare(pos, s.size(), s) == 0 && s.size() > len) {
                    found = static_cast<Letter>(i + 1);
                    len = s.size();
                }
            }
            if (found == 0)
                throw DomainError("cannot parse '" + std::string(text) + "' at offset " + std::to_string(pos));
            w.push_back(found);
            pos += len;
        }
        return w;
    }

    std::string format(const Word& w) const {
        std::string out;
        for (Letter a : w) out += symbol(a);
        return out;
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.symbols_ == b.symbols_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, Letter> index_;
};

/// Morphism [d]* -> Sigma*, fixed by the images of the d letters.
class WordMorphism {
public:
    WordMorphism() = default;
    explicit WordMorphism(std::vector<Word> images) : images_(std::move(images)) {}

    std::size_t domain_size() const noexcept { return images_.size(); }
    const Word& image(Letter a) const {
        if (a < 1 || a > images_.size())
            throw DomainError("letter " + std::to_string(a) + " outside morphism domain [1, " +
                              std::to_string(images_.size()) + "]");
        return images_[a - 1];
    }

    Word operator()(const Word& w) const { return apply(w); }

    Word apply(const Word& w) const {
        Word out;
        for (Letter a : w) out.append(image(a));
        return out;
    }

private:
    std::vector<Word> images_;
};

inline Word apply_morphism(const WordMorphism& m, const Word& w) { return m.apply(w); }

/// Numeric representation: sigma(w) = sum_j sigma(w_j) b^{|w|-j} with the
/// letter values sigma(a) = a. sigma(empty) = 0.
inline BigInt numeric_rep(const Word& w, std::size_t base) {
    if (base == 0) throw PreconditionError("numeric representation needs a non-empty alphabet");
    require_letters_in(w, base);
    BigInt value = 0;
    for (Letter a : w) {
        value *= static_cast<unsigned long>(base);
        value += static_cast<unsigned long>(a);
    }
    return value;
}

inline BigInt pow_big(std::size_t base, std::size_t exponent) {
    BigInt out;
    mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(exponent));
    return out;
}

}  // namespace mpocert
