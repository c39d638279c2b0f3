#pragma once

// JSON encodings of every value type exchanged by the command-line tool.
// Each document carries a "schema" field "mpocert.<kind>/<version>"; loaders
// reject other kinds or versions and accept a missing field for hand-written
// inputs.

#include <Eigen/Dense>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/factor_checks.hpp"
#include "mpocert/hmm.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/mps.hpp"
#include "mpocert/pcp.hpp"
#include "mpocert/purification.hpp"
#include "mpocert/rational.hpp"
#include "mpocert/reduction.hpp"

namespace mpocert::io {

using json = nlohmann::json;

inline std::string schema_id(std::string_view kind, int version = 1) {
    return "mpocert." + std::string(kind) + "/" + std::to_string(version);
}

inline void check_schema(const json& j, std::string_view kind, int version = 1) {
    if (!j.is_object()) throw ParseError("expected a JSON object for " + std::string(kind));
    auto it = j.find("schema");
    if (it == j.end()) return;
    if (!it->is_string() || it->get<std::string>() != schema_id(kind, version))
        throw ParseError("schema mismatch: expected " + schema_id(kind, version) + ", got " + it->dump());
}

inline json parse_text(const std::string& text, const std::string& origin = "input") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": malformed JSON: " + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json load_file(const std::string& path) { return parse_text(read_file(path), path); }

inline void write_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

template <typename T>
T field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field \"") + key + "\"");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field \"") + key + "\": " + e.what());
    }
}

inline const json& member(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field \"") + key + "\"");
    return *it;
}

// ---- scalars ---------------------------------------------------------

inline json to_json(const Rational& q) { return to_string(q); }

inline Rational rational_from(const json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(BigInt(j.dump()));
    throw ParseError("exact entries must be \"p/q\" strings or integers, got " + j.dump());
}

inline double real_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return to_double(parse_rational(j.get<std::string>()));
    throw ParseError("expected a number, got " + j.dump());
}

inline json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from(const json& j) {
    if (!j.is_array()) throw ParseError("matrix must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& r = j[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) throw ParseError("ragged matrix");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = real_from(r[static_cast<std::size_t>(k)]);
    }
    return m;
}

inline json to_json(const Matrix<Rational>& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) r.push_back(to_string(m(i, k)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Matrix<Rational> rational_matrix_from(const json& j) {
    if (!j.is_array()) throw ParseError("matrix must be an array of rows");
    const std::size_t rows = j.size(), cols = rows == 0 ? 0 : j[0].size();
    Matrix<Rational> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ParseError("ragged matrix");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = rational_from(j[i][k]);
    }
    return m;
}

inline std::string word_digits(const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(w[i]);
    }
    return s;
}

inline json to_json(const Word& w) { return w.letters(); }

inline Word word_from(const json& j) {
    if (!j.is_array()) throw ParseError("word must be an array of 1-based letters");
    std::vector<Letter> out;
    for (const auto& x : j) {
        if (!x.is_number_unsigned() || x.get<std::uint64_t>() < 1) throw ParseError("letters are positive integers");
        out.push_back(x.get<Letter>());
    }
    return Word(std::move(out));
}

// ---- PCP instances ---------------------------------------------------

inline json to_json(const PcpInstance& inst) {
    json ds = json::array();
    for (const auto& d : inst.dominos())
        ds.push_back({{"u", inst.alphabet().format(d.upper)}, {"v", inst.alphabet().format(d.lower)}});
    return {{"schema", schema_id("pcp")}, {"alphabet", inst.alphabet().symbols()}, {"dominos", ds}};
}

inline PcpInstance pcp_from(const json& j) {
    check_schema(j, "pcp");
    Alphabet ab(field<std::vector<std::string>>(j, "alphabet"));
    const auto& ds = member(j, "dominos");
    if (!ds.is_array()) throw ParseError("\"dominos\" must be an array");
    std::vector<Domino> dominos;
    for (const auto& d : ds) dominos.push_back({ab.parse(field<std::string>(d, "u")), ab.parse(field<std::string>(d, "v"))});
    return PcpInstance(std::move(ab), std::move(dominos));
}

// ---- MPOs ------------------------------------------------------------

template <typename T>
json to_json(const Mpo<T>& m) {
    constexpr bool exact = std::is_same_v<T, Rational>;
    json tensor = json::array(), left = json::array(), right = json::array();
    auto put = [](json& arr, const T& x) {
        if constexpr (exact)
            arr.push_back(to_string(x));
        else
            arr.push_back(x);
    };
    for (const auto& x : m.tensor()) put(tensor, x);
    for (const auto& x : m.left()) put(left, x);
    for (const auto& x : m.right()) put(right, x);
    return {{"schema", schema_id("mpo")},
            {"field", exact ? "rational" : "real"},
            {"d", m.physical_dim()},
            {"D", m.bond_dim()},
            {"tensor", tensor},
            {"left", left},
            {"right", right},
            {"diagonal", m.diagonal()}};
}

// The field of a stored MPO: "rational" unless stated otherwise.
inline bool mpo_is_exact(const json& j) {
    auto it = j.find("field");
    return it == j.end() || it->get<std::string>() == "rational";
}

template <typename T>
Mpo<T> mpo_from(const json& j) {
    check_schema(j, "mpo");
    const auto d = field<std::size_t>(j, "d");
    const auto D = field<std::size_t>(j, "D");
    auto read = [](const json& arr, const char* what) {
        if (!arr.is_array()) throw ParseError(std::string("\"") + what + "\" must be an array");
        std::vector<T> out;
        for (const auto& x : arr) {
            if constexpr (std::is_same_v<T, Rational>)
                out.push_back(rational_from(x));
            else
                out.push_back(real_from(x));
        }
        return out;
    };
    auto m = Mpo<T>::from_tensor(d, D, read(member(j, "tensor"), "tensor"), read(member(j, "left"), "left"),
                                 read(member(j, "right"), "right"));
    if (auto it = j.find("diagonal"); it != j.end() && it->get<bool>() != m.diagonal())
        throw ConsistencyError("\"diagonal\" flag disagrees with the tensor");
    return m;
}

// ---- encoder table ---------------------------------------------------

inline json encoder_json(const CompiledReduction& c, const PcpInstance& inst) {
    json table = json::array();
    for (Letter a = 1; a <= inst.size(); ++a) {
        const auto& dom = inst.dominos()[a - 1];
        table.push_back({{"letter", a},
                         {"u", inst.alphabet().format(dom.upper)},
                         {"v", inst.alphabet().format(dom.lower)},
                         {"code", word_digits(c.encoder.encode_letter(a))}});
    }
    return {{"schema", schema_id("encoder")},
            {"encoding", to_string(c.encoder.encoding())},
            {"dominos", c.dominos},
            {"gadget_dim", c.gadget_dim},
            {"bond_dim", c.mpo.bond_dim()},
            {"lambda", to_string(c.lambda)},
            {"sites_per_letter", c.dominos},
            {"table", table}};
}

inline LetterEncoder encoder_from(const json& j) {
    check_schema(j, "encoder");
    const auto enc = field<std::string>(j, "encoding");
    if (enc != "standard" && enc != "guarded") throw ParseError("unknown encoding \"" + enc + "\"");
    return LetterEncoder(field<std::size_t>(j, "dominos"),
                         enc == "standard" ? BinaryEncoding::standard : BinaryEncoding::guarded);
}

// ---- HMMs ------------------------------------------------------------

inline json to_json(const Hmm& h) {
    json ts = json::array();
    for (const auto& m : h.transitions()) ts.push_back(to_json(Eigen::MatrixXd(m)));
    json init = json::array();
    for (Eigen::Index i = 0; i < h.initial().size(); ++i) init.push_back(h.initial()(i));
    return {{"schema", schema_id("hmm")}, {"transitions", ts}, {"initial", init}};
}

inline Hmm hmm_from(const json& j) {
    check_schema(j, "hmm");
    std::vector<Eigen::MatrixXd> ts;
    for (const auto& m : member(j, "transitions")) ts.push_back(matrix_from(m));
    const auto& init = member(j, "initial");
    Eigen::RowVectorXd p(static_cast<Eigen::Index>(init.size()));
    for (std::size_t i = 0; i < init.size(); ++i) p(static_cast<Eigen::Index>(i)) = real_from(init[i]);
    return Hmm(std::move(ts), std::move(p));
}

inline json to_json(const QuasiRealization& q) {
    json ts = json::array();
    for (const auto& m : q.transitions) ts.push_back(to_json(Eigen::MatrixXd(m)));
    json l = json::array(), r = json::array();
    for (Eigen::Index i = 0; i < q.left.size(); ++i) l.push_back(q.left(i));
    for (Eigen::Index i = 0; i < q.right.size(); ++i) r.push_back(q.right(i));
    return {{"schema", schema_id("quasi")}, {"transitions", ts}, {"left", l}, {"right", r}};
}

inline json to_json(const HankelBlock& b) {
    return {{"prefix_length", b.prefix_length}, {"suffix_length", b.suffix_length}, {"outcomes", b.outcomes},
            {"values", to_json(Eigen::MatrixXd(b.values))}};
}

inline HankelBlock hankel_from(const json& j) {
    HankelBlock b;
    b.prefix_length = field<std::size_t>(j, "prefix_length");
    b.suffix_length = field<std::size_t>(j, "suffix_length");
    b.outcomes = field<std::size_t>(j, "outcomes");
    b.values = matrix_from(member(j, "values"));
    return b;
}

// ---- channels and MPS ------------------------------------------------

inline json to_json(const FcsInstance& f) {
    json ks = json::array();
    for (const auto& k : f.channel.kraus) ks.push_back(to_json(Eigen::MatrixXd(k)));
    return {{"schema", schema_id("channel")},
            {"D", f.channel.D},
            {"d", f.channel.d},
            {"kraus", ks},
            {"sigma", to_json(Eigen::MatrixXd(f.sigma))}};
}

inline FcsInstance fcs_from(const json& j) {
    check_schema(j, "channel");
    const auto D = field<std::size_t>(j, "D");
    const auto d = field<std::size_t>(j, "d");
    std::vector<Eigen::MatrixXd> ks;
    for (const auto& k : member(j, "kraus")) ks.push_back(matrix_from(k));
    KrausChannel c(D, d, std::move(ks));
    Eigen::MatrixXd sigma;
    if (auto it = j.find("sigma"); it != j.end())
        sigma = matrix_from(*it);
    else
        sigma = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D)) / static_cast<double>(D);
    return FcsInstance(std::move(c), std::move(sigma));
}

inline json to_json(const Mps& psi) {
    json sites = json::array();
    for (const auto& s : psi.sites())
        sites.push_back({{"left", s.left}, {"phys", s.phys}, {"right", s.right}, {"data", s.data}});
    return {{"schema", schema_id("mps")}, {"sites", sites}};
}

inline Mps mps_from(const json& j) {
    check_schema(j, "mps");
    std::vector<SiteTensor> sites;
    for (const auto& s : member(j, "sites")) {
        SiteTensor t(field<std::size_t>(s, "left"), field<std::size_t>(s, "phys"), field<std::size_t>(s, "right"));
        auto data = field<std::vector<double>>(s, "data");
        if (data.size() != t.data.size()) throw ParseError("MPS site data has the wrong length");
        t.data = std::move(data);
        sites.push_back(std::move(t));
    }
    return Mps(std::move(sites));
}

// ---- factorizations --------------------------------------------------

inline json to_json(const FactorCheck& c) {
    return {{"ok", c.ok}, {"residual", c.residual}, {"min_factor", c.min_factor}};
}

inline std::vector<Eigen::MatrixXd> matrices_from(const json& j) {
    if (!j.is_array()) throw ParseError("expected an array of matrices");
    std::vector<Eigen::MatrixXd> out;
    for (const auto& m : j) out.push_back(matrix_from(m));
    return out;
}

}  // namespace mpocert::io
