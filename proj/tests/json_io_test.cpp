#include <gtest/gtest.h>

#include <random>

#include "mpocert/json_io.hpp"
#include "mpocert/manifest.hpp"
#include "mpocert/svg_plot.hpp"
#include "test_util.hpp"

using namespace mpocert;
using io::json;

TEST(Json, PcpRoundTrip) {
    const auto inst = fixtures::classic_instance();
    const json j = io::to_json(inst);
    EXPECT_EQ(j.at("schema"), "mpocert.pcp/1");
    const auto back = io::pcp_from(j);
    EXPECT_EQ(back.alphabet(), inst.alphabet());
    ASSERT_EQ(back.size(), inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i) {
        EXPECT_EQ(back.dominos()[i].upper, inst.dominos()[i].upper);
        EXPECT_EQ(back.dominos()[i].lower, inst.dominos()[i].lower);
    }
}

TEST(Json, ExactMpoRoundTrip) {
    const auto c = compile(fixtures::classic_instance(), Rational(7, 3));
    const json j = io::to_json(c.mpo);
    EXPECT_TRUE(io::mpo_is_exact(j));
    const auto back = io::mpo_from<Rational>(j);
    EXPECT_EQ(back.bond_dim(), c.mpo.bond_dim());
    EXPECT_EQ(back.diagonal(), c.mpo.diagonal());
    for (Letter a = 1; a <= 2; ++a)
        for (Letter b = 1; b <= 2; ++b) EXPECT_EQ(back.block(a, b), c.mpo.block(a, b));
    EXPECT_EQ(back.left(), c.mpo.left());
    EXPECT_EQ(back.right(), c.mpo.right());
    EXPECT_EQ(io::to_json(back).dump(), j.dump());
}

TEST(Json, RealMpoRoundTripIsBitExact) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> t(2 * 2 * 3 * 3), l(3), r(3);
    for (auto& x : t) x = g(rng);
    for (auto& x : l) x = g(rng);
    for (auto& x : r) x = g(rng);
    const auto m = RealMpo::from_tensor(2, 3, t, l, r);
    const json j = io::to_json(m);
    EXPECT_FALSE(io::mpo_is_exact(j));
    const auto back = io::mpo_from<double>(json::parse(j.dump()));
    for (Letter a = 1; a <= 2; ++a)
        for (Letter b = 1; b <= 2; ++b) EXPECT_EQ(back.block(a, b), m.block(a, b));
    EXPECT_EQ(back.left(), l);
}

TEST(Json, DiagonalFlagMismatch) {
    json j = io::to_json(identity_mpo<Rational>(2));
    j["diagonal"] = false;
    EXPECT_THROW(io::mpo_from<Rational>(j), ConsistencyError);
}

TEST(Json, SchemaAndSyntaxErrors) {
    json j = io::to_json(fixtures::classic_instance());
    j["schema"] = "mpocert.hmm/1";
    EXPECT_THROW(io::pcp_from(j), ParseError);
    j["schema"] = "mpocert.pcp/2";
    EXPECT_THROW(io::pcp_from(j), ParseError);
    j.erase("schema");
    EXPECT_NO_THROW(io::pcp_from(j));
    EXPECT_THROW(io::parse_text("{\"alphabet\": [\"a\""), ParseError);
    EXPECT_THROW(io::pcp_from(json::parse(R"({"alphabet":["a"]})")), ParseError);
    EXPECT_THROW(io::pcp_from(json::parse(R"({"alphabet":"a","dominos":[]})")), ParseError);
}

TEST(Json, EncoderRoundTrip) {
    const auto inst = fixtures::classic_instance();
    for (auto enc : {BinaryEncoding::standard, BinaryEncoding::guarded}) {
        const auto c = compile(inst, Rational(0), enc);
        const auto e = io::encoder_from(io::encoder_json(c, inst));
        EXPECT_EQ(e.encoding(), enc);
        EXPECT_EQ(e.encode(Word{3, 2, 3, 1}), c.encoder.encode(Word{3, 2, 3, 1}));
    }
}

TEST(Json, HmmRoundTrip) {
    std::mt19937_64 rng(2);
    const auto h = random_hmm(2, 3, rng);
    const auto back = io::hmm_from(json::parse(io::to_json(h).dump()));
    EXPECT_EQ(back.initial(), h.initial());
    for (Letter a = 1; a <= 3; ++a) EXPECT_EQ(back.transition(a), h.transition(a));
}

TEST(Json, HankelRoundTrip) {
    std::mt19937_64 rng(3);
    const auto b = hankel(random_hmm(2, 2, rng), 1, 2);
    const auto back = io::hankel_from(json::parse(io::to_json(b).dump()));
    EXPECT_EQ(back.prefix_length, 1u);
    EXPECT_EQ(back.suffix_length, 2u);
    EXPECT_EQ(back.values, b.values);
}

TEST(Json, ChannelRoundTrip) {
    std::mt19937_64 rng(4);
    const FcsInstance f(random_channel(2, 2, 2, rng), random_density(2, rng));
    const auto back = io::fcs_from(json::parse(io::to_json(f).dump()));
    EXPECT_EQ(back.sigma, f.sigma);
    ASSERT_EQ(back.channel.kraus.size(), 2u);
    EXPECT_EQ(back.channel.kraus[1], f.channel.kraus[1]);
}

TEST(Json, ChannelSigmaDefaultsToMaximallyMixed) {
    const json j = json::parse(R"({"D":2,"d":1,"kraus":[[[1,0],[0,1]]]})");
    const auto f = io::fcs_from(j);
    EXPECT_EQ(f.sigma, Eigen::MatrixXd::Identity(2, 2) / 2.0);
}

TEST(Json, MpsRoundTrip) {
    std::mt19937_64 rng(5);
    const auto psi = random_mps(4, 2, 2, rng);
    const auto back = io::mps_from(json::parse(io::to_json(psi).dump()));
    ASSERT_EQ(back.size(), 4u);
    EXPECT_EQ(back.to_dense(), psi.to_dense());
}

TEST(Manifest, FnvKnownVectors) {
    EXPECT_EQ(fnv1a64(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a64("foobar"), "85944171f73967e8");
}

TEST(Manifest, DeterministicWithoutTimings) {
    auto make = [] {
        RunManifest m("check");
        m.add_input("x.json", "{}");
        m.parameters()["n"] = 4;
        return m.to_json().dump();
    };
    EXPECT_EQ(make(), make());
    EXPECT_EQ(make().find("timings"), std::string::npos);
    RunManifest t("check", true);
    EXPECT_TRUE(t.to_json().contains("timings"));
}

TEST(Svg, RendersSeriesAndEscapes) {
    LinePlot p;
    p.title = "a < b & c";
    p.x_label = "n";
    p.y_label = "value";
    p.series.push_back({"margin", {1, 2, 3}, {0.5, -1, 2}});
    p.reference_lines.push_back(-1);
    const auto svg = render_svg(p);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
}
