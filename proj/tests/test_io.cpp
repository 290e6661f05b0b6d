#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rvar/io.hpp"
#include "rvar/window.hpp"

using namespace rvar;

namespace {

std::istringstream text(const std::string& s) { return std::istringstream(s); }

std::size_t error_row(const std::string& input) {
    auto in = text(input);
    try {
        parse_table(in);
    } catch (const parse_error& e) {
        return e.row();
    }
    return 0;
}

}  // namespace

TEST(ParseTable, ThreeColumnsHundredRows) {
    std::ostringstream out;
    out << "a,b,c\n";
    for (int t = 0; t < 100; ++t) out << t << "," << 2 * t << "," << (t % 7) << "\n";
    auto in = text(out.str());
    const auto ts = parse_table(in);
    EXPECT_EQ(ts.K(), 3u);
    EXPECT_EQ(ts.N(), 100u);
    EXPECT_EQ(ts.names(), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_NEAR(ts.values().row(0).mean(), 0.0, 1e-12);
}

TEST(ParseTable, DelimitersAndBlankLines) {
    for (const std::string s : {"x\ty\n1\t2\n3\t5\n", "x;y\n1;2\n\n3;5\n", "x y\n 1   2\n3 5\r\n"}) {
        auto in = text(s);
        const auto ts = parse_table(in);
        EXPECT_EQ(ts.K(), 2u);
        EXPECT_EQ(ts.N(), 2u);
        EXPECT_DOUBLE_EQ(ts(1, 1), 1.5);
    }
}

TEST(ParseTable, Errors) {
    auto header_only = text("a,b\n");
    EXPECT_THROW(parse_table(header_only), parse_error);
    auto empty = text("");
    EXPECT_THROW(parse_table(empty), parse_error);
    auto one_column = text("a\n1\n2\n");
    EXPECT_THROW(parse_table(one_column), parse_error);

    auto nan = text("a,b\n1,2\n3,NaN\n");
    try {
        parse_table(nan);
        FAIL() << "NaN accepted";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_EQ(e.column(), 2u);
        EXPECT_NE(std::string(e.what()).find("NaN"), std::string::npos);
    }
    EXPECT_EQ(error_row("a,b\n1,2\n3\n"), 3u);
    EXPECT_EQ(error_row("a,b\n1,x\n"), 2u);
    EXPECT_EQ(error_row("a,b\n1,inf\n2,2\n"), 2u);
    EXPECT_EQ(error_row("a,b\n1,\n2,2\n"), 2u);
}

TEST(Table, RoundTrip) {
    const auto ts = demean(gen_var(make_s1().spec, 60, 3));
    std::stringstream buf;
    write_table(buf, ts);
    const auto back = parse_table(buf);
    EXPECT_EQ(back.names(), ts.names());
    EXPECT_LE((back.values() - ts.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Config, KeyValuesAndCoefficients) {
    auto in = text(
        "# custom system\n"
        "method = BUlag\n"
        "pmax = 3   # trailing comment\n"
        "coef 1 1 1 = 0.5\n"
        "coef 2 1 2 = -0.4\n"
        "noise 2 = 0.5\n");
    const auto cfg = parse_config(in);
    EXPECT_EQ(cfg.get("method"), "BUlag");
    EXPECT_EQ(cfg.get("pmax"), "3");
    EXPECT_FALSE(cfg.get("alpha").has_value());
    const auto spec = var_spec_from_config(cfg);
    EXPECT_EQ(spec.K(), 2u);
    EXPECT_EQ(spec.order(), 2u);
    EXPECT_DOUBLE_EQ(spec.lag(2)(1, 0), -0.4);
    EXPECT_DOUBLE_EQ(spec.noise_scale()(1), 0.5);
    EXPECT_DOUBLE_EQ(spec.noise_scale()(0), 1.0);
    EXPECT_TRUE(spec.true_graph()(0, 1));
}

TEST(Config, Errors) {
    for (const std::string s : {"pmax\n", "coef 1 2 = 0.3\n", "coef 1 0 1 = 0.3\n", "noise 1 = x\n", "two words = 1\n"}) {
        auto in = text(s);
        EXPECT_THROW(parse_config(in), parse_error) << s;
    }
    auto unstable = text("coef 1 1 1 = 1.2\n");
    EXPECT_THROW(var_spec_from_config(parse_config(unstable)), invalid_input);
}

TEST(Window, CountFormula) {
    EXPECT_EQ(window_count(400, 400, 1), 1u);
    EXPECT_EQ(window_count(4600, 400, 200), 22u);
    for (std::size_t N = 10; N < 60; N += 7)
        for (std::size_t len = 1; len <= N; len += 3)
            for (std::size_t step = 1; step < 9; ++step) {
                std::size_t brute = 0;
                for (std::size_t off = 0; off + len <= N; off += step) ++brute;
                EXPECT_EQ(window_count(N, len, step), brute);
            }
    EXPECT_THROW(window_count(100, 101, 1), invalid_input);
    EXPECT_THROW(window_count(100, 10, 0), invalid_input);
}

TEST(Window, ScanLayoutAndStrengthIdentities) {
    const auto ts = gen_var(make_s1().spec, 1000, 31);
    SelectionConfig cfg;
    const auto wa = window_scan(ts, cfg, 0.05, Significance::fdr, 400, 200);
    ASSERT_EQ(wa.matrices.size(), 4u);
    EXPECT_EQ(wa.offsets, (std::vector<std::size_t>{0, 200, 400, 600}));
    for (std::size_t w = 0; w < wa.matrices.size(); ++w) {
        const auto& cm = wa.matrices[w];
        for (Eigen::Index i = 0; i < 5; ++i) {
            double row = 0.0;
            for (Eigen::Index j = 0; j < 5; ++j)
                if (i != j) row += cm.cgci(i, j);
            EXPECT_DOUBLE_EQ(wa.node_strength[w](i), row / 4.0);
            EXPECT_GE(wa.node_strength[w](i), 0.0);
        }
        EXPECT_DOUBLE_EQ(wa.avg_strength[w], wa.node_strength[w].mean());
    }
    const auto direct = causality_matrix(ts.slice(200, 400), cfg, 0.05);
    EXPECT_EQ(wa.matrices[1].cgci, direct.cgci);
}

TEST(Window, TooShortIsInfeasible) {
    SelectionConfig cfg;
    cfg.pmax = 5;
    EXPECT_THROW(window_scan(oracle::white_noise(3, 100, 1), cfg, 0.05, Significance::fdr, 6, 1), infeasible_model);
}

TEST(Window, NoiseStrengthBelowDrivenReference) {
    SelectionConfig cfg;
    const auto noise = window_scan(oracle::white_noise(5, 2000, 4), cfg, 0.05, Significance::fdr, 400, 200);
    const auto driven = window_scan(gen_var(make_s1().spec, 2000, 4), cfg, 0.05, Significance::fdr, 400, 200);
    double sn = 0.0, sd = 0.0;
    for (double v : noise.avg_strength) sn += v;
    for (double v : driven.avg_strength) sd += v;
    sn /= double(noise.avg_strength.size());
    sd /= double(driven.avg_strength.size());
    EXPECT_LT(sn, 0.01);
    EXPECT_LT(sn, sd);
}

TEST(StateCompare, IdenticalStrengths) {
    std::vector<Episode> eps(4);
    for (auto& e : eps) {
        e.strength = {0.2, 0.2, 0.2, 0.2};
        e.state = {EpisodeState::preED, EpisodeState::ED, EpisodeState::ED, EpisodeState::postED};
    }
    const auto sc = state_compare(eps);
    EXPECT_DOUBLE_EQ(sc.p_pre_vs_ed, 1.0);
    EXPECT_DOUBLE_EQ(sc.p_post_vs_ed, 1.0);
    EXPECT_DOUBLE_EQ(sc.p_pre_vs_post, 1.0);
}

TEST(StateCompare, ConstructedEffect) {
    // 8 episodes, 20 windows per state, ED strength raised by 5 SDs.
    std::mt19937_64 rng(77);
    std::normal_distribution<double> z(0.1, 0.01);
    std::vector<Episode> eps(8);
    for (auto& e : eps)
        for (auto state : {EpisodeState::preED, EpisodeState::ED, EpisodeState::postED})
            for (int w = 0; w < 20; ++w) {
                e.strength.push_back(z(rng) + (state == EpisodeState::ED ? 0.05 : 0.0));
                e.state.push_back(state);
            }
    const auto sc = state_compare(eps);
    EXPECT_LT(sc.p_pre_vs_ed, 0.01);
    EXPECT_LT(sc.p_post_vs_ed, 0.01);
    EXPECT_GT(sc.p_pre_vs_post, 0.1);
}

TEST(StateCompare, Errors) {
    std::vector<Episode> eps(2);
    for (auto& e : eps) {
        e.strength = {0.1, 0.2};
        e.state = {EpisodeState::preED, EpisodeState::ED};
    }
    EXPECT_THROW(state_compare(eps), invalid_input);
    EXPECT_THROW(state_compare({eps[0]}), invalid_input);
    EXPECT_EQ(parse_state("posted"), EpisodeState::postED);
    EXPECT_THROW(parse_state("during"), invalid_input);
}

TEST(Json, CausalitySchema) {
    SelectionConfig cfg;
    cfg.pmax = 3;
    const auto cm = causality_matrix(gen_var(make_s1().spec, 150, 2), cfg, 0.05);
    const auto j = to_json(cm);
    for (const char* key : {"method", "pmax", "alpha", "fdr", "channels", "cgci", "pvalue", "adjacency", "models", "status"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["method"], "mBTS");
    EXPECT_EQ(j["cgci"].size(), 5u);
    EXPECT_TRUE(j["cgci"][0][0].is_null());
    EXPECT_EQ(j["models"][0]["terms"].size(), cm.models[0].size());
    EXPECT_EQ(j.dump(), to_json(causality_matrix(gen_var(make_s1().spec, 150, 2), cfg, 0.05)).dump());
}

TEST(Json, RealsHaveSixSignificantDigits) {
    EXPECT_DOUBLE_EQ(json_real(0.123456789).get<double>(), 0.123457);
    EXPECT_DOUBLE_EQ(json_real(123456789.0).get<double>(), 123457000.0);
    EXPECT_TRUE(json_real(std::numeric_limits<double>::infinity()).is_null());
}

TEST(Json, BenchmarkCarriesDetectionFrequency) {
    BenchmarkConfig cfg;
    cfg.methods = {Method::mBTS, Method::Full};
    cfg.realizations = 3;
    const auto j = to_json(run_benchmark(var_simulator(make_s1()), cfg));
    EXPECT_EQ(j["methods"].size(), 2u);
    EXPECT_EQ(j["methods"][0]["detection_frequency"].size(), 5u);
    EXPECT_TRUE(j.contains("conventions"));
    EXPECT_EQ(j["truth"][4][0], 1);
}
