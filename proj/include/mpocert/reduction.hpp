#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/matrix.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/pcp.hpp"
#include "mpocert/rational.hpp"
#include "mpocert/words.hpp"

namespace mpocert {

/// Monoid morphism [d]* -> Q^{D x D} together with boundary vectors:
/// A(w) = A(w_1) ... A(w_|w|), A(empty) = 1.
struct MatrixMorphism {
    std::size_t dim = 0;
    std::vector<Matrix<Rational>> generators;  // generator alpha at index alpha-1
    std::vector<Rational> left;
    std::vector<Rational> right;

    std::size_t alphabet_size() const noexcept { return generators.size(); }

    const Matrix<Rational>& generator(Letter a) const {
        if (a < 1 || a > generators.size()) throw DomainError("letter outside the morphism's alphabet");
        return generators[a - 1];
    }

    Matrix<Rational> evaluate(const Word& w) const {
        require_letters_in(w, generators.size());
        Matrix<Rational> out = Matrix<Rational>::identity(dim);
        for (Letter a : w) out = out * generators[a - 1];
        return out;
    }
};

/// <L| A(w_1) ... A(w_n) |R>, evaluated left to right on row vectors.
inline Rational sandwich(const MatrixMorphism& m, const Word& w) {
    require_letters_in(w, m.alphabet_size());
    std::vector<Rational> v = m.left;
    for (Letter a : w) v = row_times(v, m.generators[a - 1]);
    return dot(v, m.right);
}

/// The 6 x 6 matrix A(u, v) over N whose products track sigma(u), sigma(v),
/// their squares and their cross term:
///
///   b^{2|u|}       0              0            0         0        0
///   0              b^{|u|+|v|}    0            0         0        0
///   0              0              b^{2|v|}     0         0        0
///   s(u) b^{|u|}   s(v) b^{|u|}   0            b^{|u|}   0        0
///   0              s(u) b^{|v|}   s(v) b^{|v|} 0         b^{|v|}  0
///   s(u)^2         2 s(u) s(v)    s(v)^2       2 s(u)    2 s(v)   1
///
/// A(u1, v1) A(u2, v2) = A(u1 u2, v1 v2).
inline Matrix<Rational> gadget_matrix(const Word& u, const Word& v, std::size_t base) {
    const BigInt su = numeric_rep(u, base);
    const BigInt sv = numeric_rep(v, base);
    const BigInt bu = pow_big(base, u.size());
    const BigInt bv = pow_big(base, v.size());
    Matrix<Rational> a(6, 6);
    a(0, 0) = Rational(bu * bu);
    a(1, 1) = Rational(bu * bv);
    a(2, 2) = Rational(bv * bv);
    a(3, 0) = Rational(su * bu);
    a(3, 1) = Rational(sv * bu);
    a(3, 3) = Rational(bu);
    a(4, 1) = Rational(su * bv);
    a(4, 2) = Rational(sv * bv);
    a(4, 4) = Rational(bv);
    a(5, 0) = Rational(su * su);
    a(5, 1) = Rational(2 * su * sv);
    a(5, 2) = Rational(sv * sv);
    a(5, 3) = Rational(2 * su);
    a(5, 4) = Rational(2 * sv);
    a(5, 5) = Rational(1);
    return a;
}

/// Dimension-6 encoding of a PCP instance: generator alpha is
/// A(u_alpha, v_alpha), <L| = <6| and |R> = |1> - |2> + |3> - (lambda+1)|6>,
/// so that <L|A(w)|R> = (sigma(U(w)) - sigma(V(w)))^2 - (lambda + 1).
inline MatrixMorphism build_d6(const PcpInstance& inst, const Rational& lambda) {
    MatrixMorphism m;
    m.dim = 6;
    const std::size_t base = inst.alphabet().size();
    for (const auto& dm : inst.dominos()) m.generators.push_back(gadget_matrix(dm.upper, dm.lower, base));
    m.left.assign(6, Rational(0));
    m.left[5] = 1;
    m.right.assign(6, Rational(0));
    m.right[0] = 1;
    m.right[1] = -1;
    m.right[2] = 1;
    m.right[5] = -(lambda + 1);
    return m;
}

/// How words over [d] are spelled over the binary alphabet [2].
enum class BinaryEncoding {
    /// Bond dimension d*D. Letter 1 acts as (block diagonal) x (block
    /// shift) and letter 2 as the shift alone, so X(alpha) spells exactly
    /// C^{(alpha)}. Binary words outside the image of X are not filtered.
    standard,
    /// Bond dimension (2d-1)*D. Adds a "letter already read in this round"
    /// state so that every binary word outside the image of X contracts to
    /// zero.
    guarded,
};

inline const char* to_string(BinaryEncoding e) {
    return e == BinaryEncoding::standard ? "standard" : "guarded";
}

/// The injective morphism X: [d]* -> [2]*, X(alpha) = 2^{alpha-1} 1 2^{d-alpha}.
class LetterEncoder {
public:
    LetterEncoder() = default;
    explicit LetterEncoder(std::size_t d, BinaryEncoding encoding = BinaryEncoding::standard)
        : d_(d), encoding_(encoding) {
        if (d < 1) throw PreconditionError("encoder needs d >= 1");
    }

    std::size_t source_size() const noexcept { return d_; }
    BinaryEncoding encoding() const noexcept { return encoding_; }

    Word encode_letter(Letter a) const {
        if (a < 1 || a > d_) throw DomainError("letter outside [1, d]");
        std::vector<Letter> out(d_, 2);
        out[a - 1] = 1;
        return Word(std::move(out));
    }

    Word encode(const Word& w) const {
        Word out;
        for (Letter a : w) out.append(encode_letter(a));
        return out;
    }

    /// Inverse of X on its image; nullopt for any other binary word.
    std::optional<Word> decode(const Word& x) const {
        if (x.size() % d_ != 0) return std::nullopt;
        Word out;
        for (std::size_t start = 0; start < x.size(); start += d_) {
            Letter found = 0;
            for (std::size_t p = 0; p < d_; ++p) {
                const Letter c = x[start + p];
                if (c == 1) {
                    if (found != 0) return std::nullopt;
                    found = static_cast<Letter>(p + 1);
                } else if (c != 2) {
                    return std::nullopt;
                }
            }
            if (found == 0) return std::nullopt;
            out.push_back(found);
        }
        return out;
    }

    /// The word over [d] whose matrix product a binary word of length
    /// divisible by d spells under the standard encoding: every letter 1 at
    /// position t (0-based) contributes generator (t mod d) + 1. On the image
    /// of X this coincides with decode().
    Word product_word(const Word& x) const {
        require_letters_in(x, 2, "binary word");
        Word out;
        for (std::size_t t = 0; t < x.size(); ++t)
            if (x[t] == 1) out.push_back(static_cast<Letter>(t % d_ + 1));
        return out;
    }

private:
    std::size_t d_ = 0;
    BinaryEncoding encoding_ = BinaryEncoding::standard;
};

struct BinaryReduction {
    MatrixMorphism morphism;  // over [2]
    LetterEncoder encoder;
    Matrix<Rational> block_diagonal;  // B1 = diag(A^{(1)}, ..., A^{(d)})
    Matrix<Rational> shift;           // B2 = S (x) 1_D, cyclic block left shift
};

/// Cyclic left shift on d blocks of size D: [[0, 1_{D(d-1)}], [1_D, 0]].
inline Matrix<Rational> block_shift(std::size_t d, std::size_t D) {
    Matrix<Rational> s(d * D, d * D);
    for (std::size_t i = 0; i < d * D; ++i) s(i, (i + D) % (d * D)) = 1;
    return s;
}

inline Matrix<Rational> block_diagonal(const std::vector<Matrix<Rational>>& blocks) {
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.rows();
    Matrix<Rational> out(total, total);
    std::size_t off = 0;
    for (const auto& b : blocks) {
        out.set_block(off, off, b);
        off += b.rows();
    }
    return out;
}

/// Reduces a morphism over [d] to one over [2] such that
/// <L~| B(X(w)) |R~> = <L| A(w) |R> for all w, with zero-padded boundaries.
inline BinaryReduction binary_reduce(const MatrixMorphism& m, BinaryEncoding encoding = BinaryEncoding::standard) {
    const std::size_t d = m.alphabet_size();
    const std::size_t D = m.dim;
    if (d < 2 || D < 2) throw PreconditionError("binary reduction needs d >= 2 generators of dimension D >= 2");
    for (const auto& g : m.generators)
        if (g.rows() != D || g.cols() != D) throw PreconditionError("generator shape differs from the morphism dimension");
    if (m.left.size() != D || m.right.size() != D) throw PreconditionError("boundary length differs from D");

    BinaryReduction out;
    out.encoder = LetterEncoder(d, encoding);
    out.block_diagonal = block_diagonal(m.generators);
    out.shift = block_shift(d, D);

    if (encoding == BinaryEncoding::standard) {
        out.morphism.dim = d * D;
        out.morphism.generators = {out.block_diagonal * out.shift, out.shift};
    } else {
        // Blocks 0..d-1: "position q of the round, no 1 read yet".
        // Blocks d..2d-2: "position q in 1..d-1, the round's 1 was read".
        const std::size_t blocks = 2 * d - 1;
        const std::size_t dim = blocks * D;
        auto unread = [](std::size_t q) { return q; };
        auto read = [d](std::size_t q) { return d + q - 1; };
        Matrix<Rational> one(dim, dim), two(dim, dim);
        const auto id = Matrix<Rational>::identity(D);
        for (std::size_t q = 0; q < d; ++q) {
            // Letter 1 at position q selects generator q+1.
            const std::size_t to = (q + 1 == d) ? unread(0) : read(q + 1);
            one.set_block(unread(q) * D, to * D, m.generators[q]);
            // Letter 2 while still unread advances the position, unless the
            // round would end without a 1.
            if (q + 1 < d) two.set_block(unread(q) * D, unread(q + 1) * D, id);
        }
        for (std::size_t q = 1; q < d; ++q) {
            const std::size_t to = (q + 1 == d) ? unread(0) : read(q + 1);
            two.set_block(read(q) * D, to * D, id);
        }
        out.morphism.dim = dim;
        out.morphism.generators = {std::move(one), std::move(two)};
    }
    out.morphism.left.assign(out.morphism.dim, Rational(0));
    out.morphism.right.assign(out.morphism.dim, Rational(0));
    for (std::size_t i = 0; i < D; ++i) {
        out.morphism.left[i] = m.left[i];
        out.morphism.right[i] = m.right[i];
    }
    return out;
}

/// C^{(alpha)} = B2^{alpha-1} B1 B2^{d-alpha+1}.
inline Matrix<Rational> rotated_block_diagonal(const BinaryReduction& r, Letter alpha) {
    const std::size_t d = r.encoder.source_size();
    if (alpha < 1 || alpha > d) throw DomainError("letter outside [1, d]");
    return power(r.shift, alpha - 1) * r.block_diagonal * power(r.shift, d - alpha + 1);
}

/// Diagonal MPO with M^{(alpha,beta)} = delta_{alpha,beta} C^{(alpha)}.
inline ExactMpo assemble_mpo(const MatrixMorphism& m) {
    const std::size_t d = m.alphabet_size();
    if (d < 1) throw PreconditionError("assemble_mpo needs at least one generator");
    std::vector<Matrix<Rational>> blocks;
    blocks.reserve(d * d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            blocks.push_back(a == b ? m.generators[a] : Matrix<Rational>(m.dim, m.dim));
    return ExactMpo(d, m.dim, std::move(blocks), m.left, m.right);
}

/// PCP instance -> diagonal MPO with physical dimension 2. A BPCP question
/// of word length n becomes a threshold question at system size d*n.
struct CompiledReduction {
    ExactMpo mpo;
    LetterEncoder encoder;
    Rational lambda;
    std::size_t dominos = 0;     // d
    std::size_t gadget_dim = 0;  // D before the binary reduction

    std::size_t system_size(std::size_t word_length) const { return dominos * word_length; }
};

inline CompiledReduction compile(const PcpInstance& inst, const Rational& lambda,
                                 BinaryEncoding encoding = BinaryEncoding::standard) {
    auto d6 = build_d6(inst, lambda);
    auto bin = binary_reduce(d6, encoding);
    return CompiledReduction{assemble_mpo(bin.morphism), bin.encoder, lambda, inst.size(), d6.dim};
}

}  // namespace mpocert
