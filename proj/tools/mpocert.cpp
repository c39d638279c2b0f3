// Command-line front end. Exit codes: 0 decided, 2 inconclusive or out of
// budget, 1 error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpocert/factor_checks.hpp"
#include "mpocert/hmm.hpp"
#include "mpocert/json_io.hpp"
#include "mpocert/manifest.hpp"
#include "mpocert/mpo.hpp"
#include "mpocert/mps_probe.hpp"
#include "mpocert/pcp.hpp"
#include "mpocert/purification.hpp"
#include "mpocert/reduction.hpp"
#include "mpocert/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace mpocert;
using io::json;

namespace {

constexpr int exit_decided = 0;
constexpr int exit_error = 1;
constexpr int exit_undecided = 2;

// Environment overrides for the search budgets.
struct Limits {
    std::uint64_t budget = 0;  // 0: library default
    std::size_t dense_cap = 0;
    unsigned threads = 0;

    static Limits from_env() {
        Limits l;
        auto num = [](const char* name) -> std::uint64_t {
            const char* v = std::getenv(name);
            if (!v || !*v) return 0;
            char* end = nullptr;
            const unsigned long long x = std::strtoull(v, &end, 10);
            if (*end != '\0') throw PreconditionError(std::string(name) + " must be a non-negative integer");
            return x;
        };
        l.budget = num("MPOCERT_BUDGET");
        l.dense_cap = static_cast<std::size_t>(num("MPOCERT_DENSE_CAP"));
        l.threads = static_cast<unsigned>(num("MPOCERT_THREADS"));
        return l;
    }
    unsigned thread_count() const { return threads ? threads : std::max(1u, std::thread::hardware_concurrency()); }
    json to_json() const { return {{"budget", budget}, {"dense_cap", dense_cap}, {"threads", thread_count()}}; }
};

struct Input {
    std::string path;
    std::string text;
    json doc;
};

Input load(const std::string& path, RunManifest& m) {
    Input in{path, io::read_file(path), {}};
    in.doc = io::parse_text(in.text, path);
    m.add_input(path, in.text);
    return in;
}

void emit(json doc, const RunManifest& m, const std::string& out) {
    doc["manifest"] = m.to_json();
    if (out.empty() || out == "-")
        std::cout << doc.dump(2) << '\n';
    else
        io::write_file(out, doc);
}

CheckOptions check_options(const std::string& mode, const Limits& lim) {
    CheckOptions o;
    o.path = mode == "dense" ? CheckPath::dense : CheckPath::exact_diagonal;
    if (lim.budget) o.enumeration.budget = lim.budget;
    o.enumeration.threads = lim.thread_count();
    if (lim.dense_cap) o.dense.cap = lim.dense_cap;
    return o;
}

std::vector<std::size_t> parse_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoull(item)));
    if (out.empty()) throw PreconditionError("empty list \"" + s + "\"");
    return out;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// ---- check ----------------------------------------------------------

struct WitnessContext {
    std::optional<LetterEncoder> encoder;
    std::optional<PcpInstance> pcp;
};

json verdict_json(const ThresholdVerdict& v, const WitnessContext& ctx) {
    json j = {{"schema", io::schema_id("verdict")},
              {"status", to_string(v.status)},
              {"n", v.n},
              {"lambda", to_string(v.lambda)},
              {"mode", v.path == CheckPath::dense ? "dense" : "exact"},
              {"margin", v.margin()},
              {"certified", v.path == CheckPath::exact_diagonal}};
    if (std::holds_alternative<Rational>(v.min_value))
        j["min_value"] = to_string(std::get<Rational>(v.min_value));
    else
        j["min_value"] = std::get<double>(v.min_value);
    if (v.path == CheckPath::dense) {
        j["non_normal"] = v.non_normal;
        j["tolerance"] = dense_tolerance(v.lambda);
    }
    if (v.witness_word) {
        j["witness_word"] = io::to_json(*v.witness_word);
        if (ctx.encoder) {
            auto dec = ctx.encoder->decode(*v.witness_word);
            j["witness_decoded"] = dec ? json(io::to_json(*dec)) : json(nullptr);
            if (dec && ctx.pcp) j["witness_is_pcp_solution"] = verify_solution(*ctx.pcp, *dec);
        }
    }
    if (v.witness_vector) j["witness_vector"] = vector_json(*v.witness_vector);
    if (ctx.encoder && v.lambda < 0) j["soundness"] = "not verified for negative lambda";
    return j;
}

json probe_json(const ProbeReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels)
        levels.push_back({{"chi", l.chi},
                          {"value", l.value},
                          {"converged", l.converged},
                          {"warm_started", l.warm_started},
                          {"seed", l.seed},
                          {"sweep_values", l.sweep_values},
                          {"witness", io::to_json(l.witness)}});
    return {{"schema", io::schema_id("probe")},
            {"n", r.n},
            {"lambda", to_string(r.lambda)},
            {"tolerance", r.tolerance},
            {"restarts", r.restarts},
            {"seed", r.seed},
            {"non_normal", r.non_normal},
            {"best_value", r.best_value()},
            {"negativity_detected", r.negativity_detected},
            {"levels", levels}};
}

int cmd_check(const std::string& path, std::size_t n, const std::string& lambda_s, const std::string& mode,
              const std::string& chi_s, std::size_t restarts, std::uint64_t seed, const std::string& enc_path,
              const std::string& pcp_path, const std::string& out, bool timings) {
    RunManifest m("check", timings);
    const Limits lim = Limits::from_env();
    const Rational lambda = parse_rational(lambda_s);
    auto in = load(path, m);
    WitnessContext ctx;
    if (!enc_path.empty()) ctx.encoder = io::encoder_from(load(enc_path, m).doc);
    else if (in.doc.contains("encoder")) ctx.encoder = io::encoder_from(in.doc["encoder"]);
    if (!pcp_path.empty()) ctx.pcp = io::pcp_from(load(pcp_path, m).doc);
    m.parameters() = {{"n", n}, {"lambda", to_string(lambda)}, {"mode", mode}, {"limits", lim.to_json()}};
    if (n < 1) throw PreconditionError("--n must be at least 1");

    if (mode == "probe") {
        const auto chis = parse_list(chi_s);
        m.parameters()["chi"] = chis;
        m.parameters()["restarts"] = restarts;
        m.parameters()["seed"] = seed;
        VariationalOptions vo;
        vo.threads = lim.thread_count();
        ProbeReport rep = io::mpo_is_exact(in.doc)
                              ? probe_hierarchy(io::mpo_from<Rational>(in.doc), n, chis, restarts, seed, lambda, vo)
                              : probe_hierarchy(io::mpo_from<double>(in.doc), n, chis, restarts, seed, lambda, vo);
        // A variational value is an upper bound on the minimum; only a
        // detection is a certificate.
        json j = {{"schema", io::schema_id("verdict")},
                  {"status", rep.negativity_detected ? "not_positive" : "positive"},
                  {"certified", rep.negativity_detected},
                  {"n", n},
                  {"lambda", to_string(lambda)},
                  {"mode", "probe"},
                  {"min_value", rep.best_value()},
                  {"margin", std::fabs(rep.best_value() + lambda.get_d())},
                  {"probe", probe_json(rep)}};
        emit(j, m, out);
        return exit_decided;
    }
    if (mode != "exact" && mode != "dense") throw PreconditionError("--mode must be exact, dense or probe");
    const auto opts = check_options(mode, lim);
    ThresholdVerdict v;
    if (io::mpo_is_exact(in.doc))
        v = threshold_check(io::mpo_from<Rational>(in.doc), n, lambda, opts);
    else
        v = threshold_check(io::mpo_from<double>(in.doc), n, lambda, opts);
    emit(verdict_json(v, ctx), m, out);
    return v.status == Positivity::inconclusive ? exit_undecided : exit_decided;
}

// ---- search ---------------------------------------------------------

int cmd_search(const std::string& path, const std::string& lambda_s, std::size_t n_max, const std::string& mode,
               const std::string& out, bool timings) {
    RunManifest m("search", timings);
    const Limits lim = Limits::from_env();
    const Rational lambda = parse_rational(lambda_s);
    auto in = load(path, m);
    m.parameters() = {{"lambda", to_string(lambda)}, {"n_max", n_max}, {"mode", mode}, {"limits", lim.to_json()}};
    if (mode != "exact" && mode != "dense") throw PreconditionError("--mode must be exact or dense");
    const auto opts = check_options(mode, lim);
    ThresholdSearch s;
    if (io::mpo_is_exact(in.doc))
        s = threshold_search(io::mpo_from<Rational>(in.doc), lambda, n_max, opts);
    else
        s = threshold_search(io::mpo_from<double>(in.doc), lambda, n_max, opts);
    json steps = json::array();
    for (const auto& st : s.steps)
        steps.push_back(
            {{"n", st.n}, {"status", to_string(st.status)}, {"min_value", st.min_value}, {"margin", st.margin}});
    json j = {{"schema", io::schema_id("search")},
              {"lambda", to_string(lambda)},
              {"n_max", n_max},
              {"mode", mode},
              {"result", s.violation ? "violation" : "none_up_to_n_max"},
              {"inconclusive_seen", s.inconclusive_seen},
              {"steps", steps}};
    if (s.violation) {
        j["n"] = s.violation->n;
        WitnessContext ctx;
        if (in.doc.contains("encoder")) ctx.encoder = io::encoder_from(in.doc["encoder"]);
        j["verdict"] = verdict_json(*s.violation, ctx);
    }
    emit(j, m, out);
    if (s.violation) return exit_decided;
    return s.inconclusive_seen ? exit_undecided : exit_decided;
}

// ---- compile --------------------------------------------------------

int cmd_compile(const std::string& path, const std::string& lambda_s, const std::string& encoding,
                const std::string& out, const std::string& enc_out, bool timings) {
    RunManifest m("compile", timings);
    const Rational lambda = parse_rational(lambda_s);
    auto in = load(path, m);
    const PcpInstance inst = io::pcp_from(in.doc);
    if (encoding != "standard" && encoding != "guarded") throw PreconditionError("--encoding must be standard or guarded");
    const auto enc = encoding == "standard" ? BinaryEncoding::standard : BinaryEncoding::guarded;
    m.parameters() = {{"lambda", to_string(lambda)}, {"encoding", encoding}};
    auto c = compile(inst, lambda, enc);
    json mpo = io::to_json(c.mpo);
    json encj = io::encoder_json(c, inst);
    if (!enc_out.empty()) emit(encj, m, enc_out);
    else mpo["encoder"] = encj;
    emit(mpo, m, out);
    std::cerr << "compiled " << inst.size() << " dominos: d = " << c.mpo.physical_dim() << ", D = " << c.mpo.bond_dim()
              << (c.mpo.diagonal() ? ", diagonal" : "") << '\n';
    return exit_decided;
}

// ---- pcp ------------------------------------------------------------

int cmd_pcp(const std::string& path, std::size_t n, std::size_t n_max, const std::string& out, bool timings) {
    RunManifest m("pcp", timings);
    const Limits lim = Limits::from_env();
    auto in = load(path, m);
    const PcpInstance inst = io::pcp_from(in.doc);
    if ((n == 0) == (n_max == 0)) throw PreconditionError("give exactly one of --n and --n-max");
    SearchOptions so;
    if (lim.budget) so.budget = lim.budget;
    so.threads = lim.thread_count();
    m.parameters() = {{"n", n}, {"n_max", n_max}, {"budget", so.budget}};
    json j = {{"schema", io::schema_id("pcp-solution")}};
    if (n) j["n"] = n;
    else j["n_max"] = n_max;
    int code = exit_decided;
    try {
        std::optional<Word> w;
        std::size_t len = n;
        if (n) {
            w = solve_bpcp(inst, n, so);
        } else if (auto b = solve_pcp_bounded(inst, n_max, so)) {
            w = b->word;
            len = b->length;
        }
        if (w) {
            j["status"] = "solution";
            j["length"] = len;
            j["word"] = io::to_json(*w);
            j["top"] = inst.alphabet().format(inst.upper().apply(*w));
            j["bottom"] = inst.alphabet().format(inst.lower().apply(*w));
        } else {
            j["status"] = "none";
        }
    } catch (const BudgetExhausted& e) {
        j["status"] = "unknown";
        j["reason"] = e.what();
        code = exit_undecided;
    }
    emit(j, m, out);
    return code;
}

// ---- hmm / quasi ----------------------------------------------------

int cmd_hmm(const std::string& path, const std::vector<std::string>& words, std::size_t horizon,
            const std::string& csv_dir, const std::string& out, bool timings) {
    RunManifest m("hmm", timings);
    auto in = load(path, m);
    const Hmm h = io::hmm_from(in.doc);
    m.parameters() = {{"words", words}, {"horizon", horizon}};
    json probs = json::array();
    for (const auto& s : words) {
        std::vector<Letter> ls;
        std::stringstream ss(s);
        unsigned x;
        while (ss >> x) ls.push_back(x);
        Word w(std::move(ls));
        probs.push_back({{"word", io::to_json(w)}, {"prob", prob(h, w)}});
    }
    json blocks = json::array();
    if (horizon) {
        for (const auto& b : hankel_family(h, horizon)) {
            blocks.push_back({{"prefix_length", b.prefix_length},
                              {"suffix_length", b.suffix_length},
                              {"numerical_rank", numerical_rank(b.values)}});
            if (!csv_dir.empty()) {
                fs::create_directories(csv_dir);
                std::ofstream f(fs::path(csv_dir) /
                                ("hankel_" + std::to_string(b.prefix_length) + "_" + std::to_string(b.suffix_length) + ".csv"));
                f << hankel_csv(b);
            }
        }
    }
    json j = {{"schema", io::schema_id("hmm-report")},
              {"bond_dim", h.bond_dim()},
              {"outcomes", h.outcomes()},
              {"stationary", is_stationary(h)},
              {"probabilities", probs},
              {"hankel", blocks}};
    emit(j, m, out);
    return exit_decided;
}

int cmd_quasi(const std::string& path, std::size_t horizon, const std::string& out, bool timings) {
    RunManifest m("quasi", timings);
    auto in = load(path, m);
    m.parameters() = {{"horizon", horizon}};
    std::vector<HankelBlock> blocks;
    std::optional<Hmm> source;
    const auto schema = in.doc.value("schema", std::string());
    if (schema == io::schema_id("hankel")) {
        for (const auto& b : io::member(in.doc, "blocks")) blocks.push_back(io::hankel_from(b));
    } else {
        source = io::hmm_from(in.doc);
        if (horizon < 1) throw PreconditionError("--horizon must be at least 1");
        blocks = hankel_family(*source, horizon);
    }
    auto res = quasi_realize(blocks);
    // Round trip over every word the data covers.
    const std::size_t d = res.model.outcomes();
    double worst = 0;
    for (const auto& b : blocks)
        for (Eigen::Index r = 0; r < b.values.rows(); ++r)
            for (Eigen::Index c = 0; c < b.values.cols(); ++c) {
                Word w = word_at(static_cast<std::size_t>(r), d, b.prefix_length) +
                         word_at(static_cast<std::size_t>(c), d, b.suffix_length);
                worst = std::max(worst, std::fabs(prob(res.model, w) - b.values(r, c)));
            }
    json j = {{"schema", io::schema_id("quasi-report")},
              {"rank", res.rank},
              {"horizon", res.horizon},
              {"singular_values", res.singular_values},
              {"gap_ratio", res.gap_ratio},
              {"round_trip_residual", worst},
              {"realization", io::to_json(res.model)}};
    emit(j, m, out);
    return exit_decided;
}

// ---- purify ---------------------------------------------------------

int cmd_purify(const std::string& path, std::size_t n, const std::string& mps_out, const std::string& out,
               bool timings) {
    RunManifest m("purify", timings);
    const Limits lim = Limits::from_env();
    auto in = load(path, m);
    const FcsInstance f = io::fcs_from(in.doc);
    m.parameters() = {{"n", n}, {"limits", lim.to_json()}};
    if (n < 1) throw PreconditionError("--n must be at least 1");
    DenseOptions dense;
    if (lim.dense_cap) dense.cap = lim.dense_cap;
    const auto chk = validate_channel(f.channel);
    const Eigen::MatrixXd rho = fcs_density(f, n, dense);
    const Eigen::MatrixXd red = purification_reduced_state(f, n, dense);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (rho + rho.transpose()), Eigen::EigenvaluesOnly);
    const Mps psi = purify(f, n);
    if (!mps_out.empty()) emit(io::to_json(psi), m, mps_out);
    json j = {{"schema", io::schema_id("purify-report")},
              {"n", n},
              {"channel_ok", chk.ok},
              {"channel_residual", chk.residual},
              {"trace", rho.trace()},
              {"min_eigenvalue", es.eigenvalues()(0)},
              {"partial_trace_residual", (red - rho).cwiseAbs().maxCoeff()},
              {"purification_norm", psi.norm_squared()},
              {"leg_order", "boundary-left, sites 1..n as (s, e), boundary-right"}};
    emit(j, m, out);
    return chk.ok ? exit_decided : exit_error;
}

// ---- factor ---------------------------------------------------------

int cmd_factor(const std::string& path, const std::string& out, bool timings) {
    RunManifest m("factor", timings);
    auto in = load(path, m);
    io::check_schema(in.doc, "factor");
    const auto kind = io::field<std::string>(in.doc, "kind");
    json j = {{"schema", io::schema_id("factor-report")}, {"kind", kind}};
    int code = exit_decided;
    if (kind == "nmf") {
        NmfCandidate c(io::matrix_from(io::member(in.doc, "F")), io::matrix_from(io::member(in.doc, "left")),
                       io::matrix_from(io::member(in.doc, "right")));
        j["nmf"] = io::to_json(verify_nmf(c));
        j["psd_embedding"] = io::to_json(verify_psd(embed_nmf(c)));
    } else if (kind == "psd") {
        PsdCandidate c(io::matrix_from(io::member(in.doc, "F")), io::matrices_from(io::member(in.doc, "A")),
                       io::matrices_from(io::member(in.doc, "B")));
        j["psd"] = io::to_json(verify_psd(c));
    } else if (kind == "rank") {
        const auto mode_s = io::field<std::string>(in.doc, "mode");
        if (mode_s != "plain" && mode_s != "nonnegative") throw ParseError("\"mode\" must be plain or nonnegative");
        const auto mode = mode_s == "plain" ? RankMode::plain : RankMode::nonnegative;
        RankOracleOptions ro;
        ro.grid = in.doc.value("grid", ro.grid);
        auto r = rank_oracle(io::rational_matrix_from(io::member(in.doc, "F")), mode, io::field<std::size_t>(in.doc, "D"), ro);
        j["mode"] = mode_s;
        j["D"] = io::field<std::size_t>(in.doc, "D");
        j["found"] = r.found;
        j["note"] = r.note;
        if (r.rank) j["rank"] = *r.rank;
        if (r.left) j["left"] = io::to_json(*r.left);
        if (r.right) j["right"] = io::to_json(*r.right);
        // "Not found on the grid" is not a proof of anything.
        if (mode == RankMode::nonnegative && !r.found) code = exit_undecided;
    } else {
        throw ParseError("\"kind\" must be nmf, psd or rank");
    }
    emit(j, m, out);
    return code;
}

// ---- report ---------------------------------------------------------

int cmd_report(const std::vector<std::string>& paths, const std::string& plot_dir, bool timings) {
    RunManifest m("report", timings);
    if (!plot_dir.empty()) fs::create_directories(plot_dir);
    json written = json::array();
    for (const auto& p : paths) {
        auto in = load(p, m);
        const auto schema = in.doc.value("schema", std::string());
        const std::string stem = fs::path(p).stem().string();
        const json* probe = nullptr;
        if (schema == io::schema_id("probe")) probe = &in.doc;
        else if (schema == io::schema_id("verdict") && in.doc.contains("probe")) probe = &in.doc["probe"];

        if (schema == io::schema_id("search")) {
            PlotSeries margin{"|min + lambda|", {}, {}}, minv{"min value", {}, {}};
            std::cout << p << ": " << in.doc["result"].get<std::string>() << '\n';
            for (const auto& s : in.doc["steps"]) {
                const double n = s["n"].get<double>();
                margin.x.push_back(n);
                margin.y.push_back(s["margin"].get<double>());
                minv.x.push_back(n);
                minv.y.push_back(s["min_value"].get<double>());
                std::cout << "  n=" << s["n"] << "  " << s["status"].get<std::string>() << "  min=" << s["min_value"]
                          << "  margin=" << s["margin"] << '\n';
            }
            if (!plot_dir.empty()) {
                const double lam = to_double(parse_rational(in.doc["lambda"].get<std::string>()));
                LinePlot plot{"Threshold search: margin vs system size", "system size n", "value",
                              {margin, minv}, {-lam}};
                const auto file = (fs::path(plot_dir) / (stem + "_margin.svg")).string();
                std::ofstream(file) << render_svg(plot);
                written.push_back(file);
            }
        } else if (probe) {
            PlotSeries val{"best probe value", {}, {}};
            std::cout << p << ": negativity " << ((*probe)["negativity_detected"].get<bool>() ? "detected" : "not detected")
                      << '\n';
            for (const auto& l : (*probe)["levels"]) {
                val.x.push_back(l["chi"].get<double>());
                val.y.push_back(l["value"].get<double>());
                std::cout << "  chi=" << l["chi"] << "  value=" << l["value"] << "  converged=" << l["converged"] << '\n';
            }
            if (!plot_dir.empty()) {
                const double lam = to_double(parse_rational((*probe)["lambda"].get<std::string>()));
                LinePlot plot{"MPS probe: value vs bond dimension", "MPS bond dimension chi", "<psi|rho|psi>",
                              {val}, {-lam}};
                const auto file = (fs::path(plot_dir) / (stem + "_probe.svg")).string();
                std::ofstream(file) << render_svg(plot);
                written.push_back(file);
            }
        } else if (schema == io::schema_id("verdict")) {
            std::cout << p << ": " << in.doc["status"].get<std::string>() << " at n=" << in.doc["n"]
                      << ", margin " << in.doc["margin"] << '\n';
        } else {
            throw ParseError(p + ": nothing to report for schema \"" + schema + "\"");
        }
    }
    if (!plot_dir.empty()) {
        json j = {{"schema", io::schema_id("report")}, {"plots", written}};
        j["manifest"] = m.to_json();
        io::write_file((fs::path(plot_dir) / "report.json").string(), j);
        for (const auto& f : written) std::cout << "wrote " << f.get<std::string>() << '\n';
    }
    return exit_decided;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certify positivity questions for matrix product operators, with the reductions, probes and "
                 "checkers around them."};
    app.require_subcommand(1);
    bool timings = false;
    app.add_flag("--timings", timings, "Record wall-clock time in the run manifest (breaks byte-identical reruns)");
    std::string out;

    auto* compile_cmd = app.add_subcommand("compile", "Compile a PCP instance into a diagonal MPO");
    std::string c_in, c_lambda = "0", c_enc = "standard", c_enc_out;
    compile_cmd->add_option("instance", c_in, "PCP instance JSON")->required()->check(CLI::ExistingFile);
    compile_cmd->add_option("--lambda", c_lambda, "Threshold lambda as p/q")->capture_default_str();
    compile_cmd->add_option("--encoding", c_enc, "standard (bond d*6) or guarded (bond (2d-1)*6)")
        ->check(CLI::IsMember({"standard", "guarded"}))
        ->capture_default_str();
    compile_cmd->add_option("--encoder-out", c_enc_out, "Write the encoder table here instead of embedding it");
    compile_cmd->add_option("-o,--output", out, "Output MPO JSON (default stdout)");

    auto* check_cmd = app.add_subcommand("check", "Is rho(n) + lambda 1 positive?");
    std::string k_in, k_lambda = "0", k_mode = "exact", k_chi = "1,2,4", k_enc, k_pcp;
    std::size_t k_n = 0, k_restarts = 8;
    std::uint64_t k_seed = 1;
    check_cmd->add_option("mpo", k_in, "MPO JSON")->required()->check(CLI::ExistingFile);
    check_cmd->add_option("--n", k_n, "System size")->required();
    check_cmd->add_option("--lambda", k_lambda, "Threshold lambda as p/q")->capture_default_str();
    check_cmd->add_option("--mode", k_mode, "exact | dense | probe")
        ->check(CLI::IsMember({"exact", "dense", "probe"}))
        ->capture_default_str();
    check_cmd->add_option("--chi", k_chi, "Probe bond dimensions, comma separated")->capture_default_str();
    check_cmd->add_option("--restarts", k_restarts, "Probe restarts per bond dimension")->capture_default_str();
    check_cmd->add_option("--seed", k_seed, "Probe seed; restart i uses seed + i")->capture_default_str();
    check_cmd->add_option("--encoder", k_enc, "Encoder JSON, to decode witness words")->check(CLI::ExistingFile);
    check_cmd->add_option("--pcp", k_pcp, "PCP instance JSON, to verify decoded witnesses")->check(CLI::ExistingFile);
    check_cmd->add_option("-o,--output", out, "Output verdict JSON (default stdout)");

    auto* search_cmd = app.add_subcommand("search", "Look for a system size n <= n-max where positivity fails");
    std::string s_in, s_lambda = "0", s_mode = "exact";
    std::size_t s_nmax = 0;
    search_cmd->add_option("mpo", s_in, "MPO JSON")->required()->check(CLI::ExistingFile);
    search_cmd->add_option("--lambda", s_lambda, "Threshold lambda as p/q")->capture_default_str();
    search_cmd->add_option("--n-max", s_nmax, "Largest system size")->required();
    search_cmd->add_option("--mode", s_mode, "exact | dense")
        ->check(CLI::IsMember({"exact", "dense"}))
        ->capture_default_str();
    search_cmd->add_option("-o,--output", out, "Output JSON (default stdout)");

    auto* pcp_cmd = app.add_subcommand("pcp", "Solve a PCP instance with a bounded word length");
    std::string p_in;
    std::size_t p_n = 0, p_nmax = 0;
    pcp_cmd->add_option("instance", p_in, "PCP instance JSON")->required()->check(CLI::ExistingFile);
    auto* p_n_opt = pcp_cmd->add_option("--n", p_n, "Exact solution length");
    auto* p_nmax_opt = pcp_cmd->add_option("--n-max", p_nmax, "Shortest solution up to this length");
    p_n_opt->excludes(p_nmax_opt);
    pcp_cmd->add_option("-o,--output", out, "Output JSON (default stdout)");

    auto* hmm_cmd = app.add_subcommand("hmm", "Evaluate a hidden Markov model and its Hankel ranks");
    std::string h_in, h_csv;
    std::vector<std::string> h_words;
    std::size_t h_horizon = 0;
    hmm_cmd->add_option("model", h_in, "HMM JSON")->required()->check(CLI::ExistingFile);
    hmm_cmd->add_option("--word", h_words, "Word as space separated 1-based letters (repeatable)");
    hmm_cmd->add_option("--hankel-horizon", h_horizon, "Report Hankel ranks for k + n <= this");
    hmm_cmd->add_option("--csv", h_csv, "Directory for Hankel blocks as CSV");
    hmm_cmd->add_option("-o,--output", out, "Output JSON (default stdout)");

    auto* quasi_cmd = app.add_subcommand("quasi", "Quasi-realization from Hankel data or an HMM");
    std::string q_in;
    std::size_t q_horizon = 6;
    quasi_cmd->add_option("input", q_in, "HMM JSON or Hankel JSON")->required()->check(CLI::ExistingFile);
    quasi_cmd->add_option("--horizon", q_horizon, "Word length covered when the input is an HMM")->capture_default_str();
    quasi_cmd->add_option("-o,--output", out, "Output JSON (default stdout)");

    auto* purify_cmd = app.add_subcommand("purify", "Density and local purification of a finitely correlated state");
    std::string u_in, u_mps;
    std::size_t u_n = 0;
    purify_cmd->add_option("channel", u_in, "Channel JSON")->required()->check(CLI::ExistingFile);
    purify_cmd->add_option("--n", u_n, "Number of sites")->required();
    purify_cmd->add_option("--mps-out", u_mps, "Write the purification MPS here");
    purify_cmd->add_option("-o,--output", out, "Output report JSON (default stdout)");

    auto* factor_cmd = app.add_subcommand("factor", "Verify NMF/PSD factorizations or query the rank oracle");
    std::string f_in;
    factor_cmd->add_option("input", f_in, "Factor JSON")->required()->check(CLI::ExistingFile);
    factor_cmd->add_option("-o,--output", out, "Output JSON (default stdout)");

    auto* report_cmd = app.add_subcommand("report", "Summarize search, check and probe outputs");
    std::vector<std::string> r_in;
    std::string r_plot;
    report_cmd->add_option("inputs", r_in, "Output JSON files")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--plot", r_plot, "Write SVG plots into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        if (*compile_cmd) return cmd_compile(c_in, c_lambda, c_enc, out, c_enc_out, timings);
        if (*check_cmd)
            return cmd_check(k_in, k_n, k_lambda, k_mode, k_chi, k_restarts, k_seed, k_enc, k_pcp, out, timings);
        if (*search_cmd) return cmd_search(s_in, s_lambda, s_nmax, s_mode, out, timings);
        if (*pcp_cmd) return cmd_pcp(p_in, p_n, p_nmax, out, timings);
        if (*hmm_cmd) return cmd_hmm(h_in, h_words, h_horizon, h_csv, out, timings);
        if (*quasi_cmd) return cmd_quasi(q_in, q_horizon, out, timings);
        if (*purify_cmd) return cmd_purify(u_in, u_n, u_mps, out, timings);
        if (*factor_cmd) return cmd_factor(f_in, out, timings);
        if (*report_cmd) return cmd_report(r_in, r_plot, timings);
    } catch (const BudgetExhausted& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return exit_undecided;
    } catch (const SizeCapExceeded& e) {
        std::cerr << "size cap exceeded: " << e.what() << '\n';
        return exit_undecided;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
