// Command-line front end: analyze, window, simulate, benchmark, compare-states.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rvar/io.hpp"
#include "rvar/rvar.hpp"

namespace {

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, infeasible_error = 3 };

/// Values shared by the subcommands. Each one can come from the command line
/// or from the config file; an explicit flag wins.
struct Options {
    std::string input;
    std::string config_path;
    std::string output;
    std::string method = "mBTS";
    std::string methods = "mBTS,TDlag,TDvar,BUlag,BUvar,LASSO,Full";
    std::string system = "S1";
    std::size_t pmax = 5;
    double alpha = 0.05;
    bool no_fdr = false;
    bool no_test = false;
    std::size_t window = 400;
    std::size_t step = 200;
    std::uint64_t seed = 1;
    std::size_t realizations = 100;
    std::size_t length = 100;
    std::size_t threads = 1;
    std::size_t henon_K = 5;
    double coupling = 0.3;
};

class usage_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool parse_bool(const std::string& key, const std::string& v) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw usage_failure("config key '" + key + "' expects true or false, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (!in || !(in >> std::ws).eof()) throw usage_failure("config key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

/// Fills every option that was not given on the command line from the
/// config file. Unknown keys are rejected so typos do not pass silently.
void merge_config(const rvar::ConfigFile& cfg, Options& o, const CLI::App& sub) {
    static const std::vector<std::string> known{"method", "methods", "system", "pmax", "alpha", "fdr", "test",
                                                "window", "step", "seed", "realizations", "N", "threads", "K",
                                                "coupling", "name", "output", "input"};
    for (const auto& [key, _] : cfg.values)
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw usage_failure("unknown config key '" + key + "'");

    auto unset = [&](const std::string& flag) {
        try {
            return sub.get_option(flag)->count() == 0;
        } catch (const CLI::OptionNotFound&) {
            return true;
        }
    };
    auto take = [&](const std::string& key, const std::string& flag, auto& field) {
        const auto v = cfg.get(key);
        if (!v || !unset(flag)) return;
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, std::string>)
            field = *v;
        else
            field = parse_number<T>(key, *v);
    };
    take("method", "--method", o.method);
    take("methods", "--methods", o.methods);
    take("system", "--system", o.system);
    take("pmax", "--pmax", o.pmax);
    take("alpha", "--alpha", o.alpha);
    take("window", "--window", o.window);
    take("step", "--step", o.step);
    take("seed", "--seed", o.seed);
    take("realizations", "--realizations", o.realizations);
    take("N", "--length", o.length);
    take("threads", "--threads", o.threads);
    take("K", "--henon-K", o.henon_K);
    take("coupling", "--coupling", o.coupling);
    take("output", "--output", o.output);
    take("input", "input", o.input);
    if (auto v = cfg.get("fdr"); v && unset("--no-fdr")) o.no_fdr = !parse_bool("fdr", *v);
    if (auto v = cfg.get("test"); v && unset("--no-test")) o.no_test = !parse_bool("test", *v);
}

rvar::Significance significance_of(const Options& o) {
    if (o.no_test) return rvar::Significance::none;
    return o.no_fdr ? rvar::Significance::raw : rvar::Significance::fdr;
}

rvar::Method method_of(const std::string& name) {
    try {
        return rvar::parse_method(name);
    } catch (const rvar::invalid_input& e) {
        throw usage_failure(e.what());
    }
}

rvar::SelectionConfig selection_of(const Options& o) {
    rvar::SelectionConfig cfg;
    cfg.method = method_of(o.method);
    cfg.pmax = o.pmax;
    return cfg;
}

std::vector<rvar::Method> method_list(const std::string& text) {
    std::vector<rvar::Method> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(method_of(item));
    }
    if (out.empty()) throw usage_failure("no methods given");
    return out;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw rvar::parse_error("cannot write '" + path + "'");
    out << text;
}

std::string dump(const rvar::Json& j) { return j.dump(2) + "\n"; }

/// A simulator from the system name; "config" uses the coefficient blocks
/// of the config file.
rvar::Simulator simulator_of(const Options& o, const std::optional<rvar::ConfigFile>& cfg) {
    std::string s = o.system;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (s == "S1") return rvar::var_simulator(rvar::make_s1());
    if (s == "S2") return rvar::var_simulator(rvar::make_s2());
    if (s == "S3") return rvar::var_simulator(rvar::make_s3(o.seed));
    if (s == "S4" || s == "HENON") {
        rvar::HenonSpec spec;
        spec.K = o.henon_K;
        spec.coupling = o.coupling;
        return rvar::henon_simulator(spec);
    }
    if (s == "CONFIG" || s == "CUSTOM") {
        if (!cfg) throw usage_failure("system 'config' needs --config with coef lines");
        const auto spec = rvar::var_spec_from_config(*cfg);
        return rvar::var_simulator({spec, spec.true_graph()});
    }
    throw usage_failure("unknown system '" + o.system + "' (S1, S2, S3, S4, config)");
}

int run_analyze(const Options& o) {
    if (o.input.empty()) throw usage_failure("analyze needs an input file");
    const auto ts = rvar::read_table(o.input);
    const auto cm = rvar::causality_matrix(ts, selection_of(o), o.alpha, significance_of(o));
    emit(o.output, dump(rvar::to_json(cm)));
    return cm.any_infeasible() ? infeasible_error : ok;
}

int run_window(const Options& o) {
    if (o.input.empty()) throw usage_failure("window needs an input file");
    const auto ts = rvar::read_table(o.input);
    const auto wa = rvar::window_scan(ts, selection_of(o), o.alpha, significance_of(o), o.window, o.step);
    emit(o.output, dump(rvar::to_json(wa)));
    for (const auto& cm : wa.matrices)
        if (cm.any_infeasible()) return infeasible_error;
    return ok;
}

int run_simulate(const Options& o, const std::optional<rvar::ConfigFile>& cfg) {
    const auto sim = simulator_of(o, cfg);
    const auto ts = sim.generate(o.length, o.seed);
    std::ostringstream out;
    rvar::write_table(out, ts);
    emit(o.output, out.str());
    return ok;
}

int run_benchmark(const Options& o, const std::optional<rvar::ConfigFile>& cfg) {
    const auto sim = simulator_of(o, cfg);
    rvar::BenchmarkConfig bc;
    bc.methods = method_list(o.methods);
    bc.N = o.length;
    bc.pmax = o.pmax;
    bc.realizations = o.realizations;
    bc.alpha = o.alpha;
    bc.significance = significance_of(o);
    bc.seed = o.seed;
    bc.threads = o.threads;
    emit(o.output, dump(rvar::to_json(rvar::run_benchmark(sim, bc))));
    return ok;
}

/// Rows of `episode,state,S` with a header line.
int run_compare_states(const Options& o) {
    if (o.input.empty()) throw usage_failure("compare-states needs an input file");
    std::ifstream in(o.input);
    if (!in) throw rvar::parse_error("cannot open '" + o.input + "'");
    std::map<std::string, rvar::Episode> episodes;
    std::vector<std::string> order;
    std::string line;
    std::size_t row = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (rvar::detail::trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto cells = rvar::detail::split_cells(line, ',');
        if (cells.size() != 3) throw rvar::parse_error("expected episode,state,S", row);
        const auto s = rvar::detail::parse_real(cells[2]);
        if (!s) throw rvar::parse_error("non-numeric strength '" + std::string(cells[2]) + "'", row, 3);
        rvar::EpisodeState state;
        try {
            state = rvar::parse_state(cells[1]);
        } catch (const rvar::invalid_input& e) {
            throw rvar::parse_error(e.what(), row, 2);
        }
        const std::string key(cells[0]);
        if (!episodes.count(key)) order.push_back(key);
        auto& ep = episodes[key];
        ep.strength.push_back(*s);
        ep.state.push_back(state);
    }
    std::vector<rvar::Episode> list;
    for (const auto& k : order) list.push_back(episodes[k]);
    auto j = rvar::to_json(rvar::state_compare(list));
    j["episodes"] = order;
    emit(o.output, dump(j));
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granger causality with restricted VAR models"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "Flat key = value config file");
        sub->add_option("--output", o.output, "Output file (default stdout)");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--method", o.method, "mBTS, TDlag, TDvar, BUlag, BUvar, LASSO or Full");
        sub->add_option("--pmax", o.pmax, "Maximum lag");
        sub->add_option("--alpha", o.alpha, "Significance level");
        sub->add_flag("--no-fdr", o.no_fdr, "Test each pair at level alpha instead of controlling the FDR");
        sub->add_flag("--no-test", o.no_test, "Report every positive CGCI without testing");
    };
    auto add_system = [&](CLI::App* sub) {
        sub->add_option("--system", o.system, "S1, S2, S3, S4 (Henon) or config");
        sub->add_option("--length,-N", o.length, "Series length");
        sub->add_option("--seed", o.seed, "Random seed");
        sub->add_option("--henon-K", o.henon_K, "Henon chain length");
        sub->add_option("--coupling", o.coupling, "Henon coupling strength");
    };

    auto* analyze = app.add_subcommand("analyze", "Causality matrix of one dataset");
    analyze->add_option("input", o.input, "Delimited table with a header row");
    add_common(analyze);
    add_model(analyze);

    auto* window = app.add_subcommand("window", "Sliding-window causality and node strengths");
    window->add_option("input", o.input, "Delimited table with a header row");
    window->add_option("--window", o.window, "Window length in samples");
    window->add_option("--step", o.step, "Window step in samples");
    add_common(window);
    add_model(window);

    auto* simulate = app.add_subcommand("simulate", "Write one realization of a simulation system");
    add_common(simulate);
    add_system(simulate);

    auto* benchmark = app.add_subcommand("benchmark", "Monte Carlo comparison of selection methods");
    add_common(benchmark);
    add_system(benchmark);
    benchmark->add_option("--methods", o.methods, "Comma-separated methods; the first is the reference");
    benchmark->add_option("--pmax", o.pmax, "Maximum lag");
    benchmark->add_option("--alpha", o.alpha, "Significance level");
    benchmark->add_flag("--no-fdr", o.no_fdr, "Test each pair at level alpha");
    benchmark->add_flag("--no-test", o.no_test, "Report every positive CGCI without testing");
    benchmark->add_option("--realizations", o.realizations, "Number of realizations");
    benchmark->add_option("--threads", o.threads, "Worker threads");

    auto* compare = app.add_subcommand("compare-states", "Paired tests of window strength across episode states");
    compare->add_option("input", o.input, "CSV with columns episode,state,S");
    compare->add_option("--output", o.output, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_error;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        std::optional<rvar::ConfigFile> cfg;
        if (!o.config_path.empty()) {
            cfg = rvar::read_config(o.config_path);
            merge_config(*cfg, o, *sub);
        }
        if (sub == analyze) return run_analyze(o);
        if (sub == window) return run_window(o);
        if (sub == simulate) return run_simulate(o, cfg);
        if (sub == benchmark) return run_benchmark(o, cfg);
        return run_compare_states(o);
    } catch (const usage_failure& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage_error;
    } catch (const rvar::infeasible_model& e) {
        std::cerr << "infeasible model: " << e.what() << '\n';
        return infeasible_error;
    } catch (const rvar::parse_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const rvar::invalid_input& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return data_error;
    }
}
