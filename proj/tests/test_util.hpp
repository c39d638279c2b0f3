#pragma once

#include <random>
#include <string>
#include <vector>

#include "mpocert/pcp.hpp"
#include "mpocert/words.hpp"

namespace mpocert::fixtures {

inline Word random_word(std::mt19937_64& rng, std::size_t alphabet, std::size_t min_len, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<Letter> letter(1, static_cast<Letter>(alphabet));
    std::vector<Letter> w(len(rng));
    for (auto& a : w) a = letter(rng);
    return Word(std::move(w));
}

// (a | baa), (ab | aa), (bba | bb); shortest solution 3 2 3 1.
inline PcpInstance classic_instance() {
    return PcpInstance::from_strings(Alphabet({"a", "b"}), {{"a", "baa"}, {"ab", "aa"}, {"bba", "bb"}});
}

}  // namespace mpocert::fixtures
