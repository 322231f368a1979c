#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdlab/suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sdlab;

namespace {

constexpr int exit_ok = 0, exit_failed = 1, exit_invalid = 2;

using SuiteFn = std::function<SuiteResult(const SuiteConfig&)>;

const std::vector<std::pair<std::string, SuiteFn>>& suites() {
    static const std::vector<std::pair<std::string, SuiteFn>> all{
        {"equivalence", equivalence_suite}, {"cz", cz_suite},           {"stopping", stopping_suite},
        {"weights", weights_suite},         {"exponents", exponents_suite}, {"transfer", transfer_suite},
        {"structure", structure_suite},
    };
    return all;
}

const SuiteFn* find_suite(const std::string& name) {
    for (const auto& [n, f] : suites())
        if (n == name) return &f;
    return nullptr;
}

Exponents parse_tuple(const std::string& text, const char* flag) {
    Exponents out;
    std::stringstream ss(text);
    std::string item;
    try {
        while (std::getline(ss, item, ',')) out.push_back(Exponent::parse(item));
    } catch (const std::exception&) {
        throw ConfigError(std::string("violated ") + flag + " must be a comma-separated list of exponents in (0, inf]");
    }
    if (out.empty()) throw ConfigError(std::string("violated ") + flag + " must not be empty");
    return out;
}

/// Raw option values as given on the command line or in the config file.
struct RawOptions {
    std::optional<int> dim, depth, trials;
    std::uint64_t seed = 1;
    bool shifts = true;
    double eta = 0.5;
    std::string p, r, t, q, s;
};

SuiteConfig validate(const RawOptions& o) {
    SuiteConfig c;
    if (o.dim && *o.dim != 1 && *o.dim != 2) throw ConfigError("violated dim in {1, 2}");
    if (o.depth && (*o.depth < 1 || *o.depth > (o.dim.value_or(1) == 1 ? 12 : 6)))
        throw ConfigError("violated 1 <= depth <= 12 (d=1) or 6 (d=2)");
    if (o.trials && *o.trials < 1) throw ConfigError("violated trials >= 1");
    if (!(o.eta > 0 && o.eta <= 1)) throw ConfigError("violated 0 < eta <= 1");
    c.dim = o.dim;
    c.depth = o.depth;
    c.trials = o.trials;
    c.seed = o.seed;
    c.shifts = o.shifts;
    c.eta = o.eta;
    if (!o.p.empty()) c.p = parse_tuple(o.p, "--p");
    if (!o.r.empty()) c.r = parse_tuple(o.r, "--r");
    if (!o.t.empty()) c.t = parse_tuple(o.t, "--t");
    if (!o.q.empty()) c.q = parse_tuple(o.q, "--q").front();
    if (!o.s.empty()) c.s = parse_tuple(o.s, "--s").front();
    return c;
}

json config_json(const std::string& suite, const RawOptions& o) {
    json j{{"suite", suite}, {"seed", o.seed}, {"shifts", o.shifts}, {"eta", o.eta}};
    if (o.dim) j["dim"] = *o.dim;
    if (o.depth) j["depth"] = *o.depth;
    if (o.trials) j["trials"] = *o.trials;
    for (const auto& [k, v] : {std::pair{"p", &o.p}, {"r", &o.r}, {"t", &o.t}, {"q", &o.q}, {"s", &o.s}})
        if (!v->empty()) j[k] = *v;
    return j;
}

RawOptions options_from_json(const json& j) {
    RawOptions o;
    if (j.contains("dim")) o.dim = j["dim"].get<int>();
    if (j.contains("depth")) o.depth = j["depth"].get<int>();
    if (j.contains("trials")) o.trials = j["trials"].get<int>();
    o.seed = j.value("seed", std::uint64_t{1});
    o.shifts = j.value("shifts", true);
    o.eta = j.value("eta", 0.5);
    o.p = j.value("p", "");
    o.r = j.value("r", "");
    o.t = j.value("t", "");
    o.q = j.value("q", "");
    o.s = j.value("s", "");
    return o;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

void write_table(const fs::path& path, const Table& t) {
    std::ofstream os(path);
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << csv_field(t.header[i]);
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
        os << "\n";
    }
}

json result_json(const SuiteResult& r, const json& config) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"schema", 1}, {"suite", r.suite}, {"config", config}, {"pass", r.pass()}, {"checks", checks},
            {"report", r.report}};
}

/// Runs one suite, prints its verdict lines and writes its artifacts. Returns whether every check passed.
bool run_suite(const std::string& name, const RawOptions& raw, const fs::path& out) {
    const SuiteConfig cfg = validate(raw);
    const json config = config_json(name, raw);
    SuiteResult r;
    try {
        r = (*find_suite(name))(cfg);
    } catch (const CounterexampleCandidate& e) {
        r.suite = name;
        r.checks.push_back({"stopping construction stabilises", false, e.what(), json::parse(e.dump)});
    }
    for (const auto& c : r.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << r.suite << ": " << c.name
                  << (c.detail.empty() ? "" : " | " + c.detail) << "\n";

    fs::create_directories(out);
    std::ofstream(out / (name + ".json")) << result_json(r, config).dump(2) << "\n";
    for (const auto& t : r.tables) write_table(out / (name + "_" + t.name + ".csv"), t);
    for (const auto& c : r.checks)
        if (!c.pass && !c.failing.is_null()) {
            const auto path = out / (name + "_failure.json");
            std::ofstream(path) << json{{"schema", 1}, {"config", config}, {"check", c.name}, {"case", c.failing}}.dump(2)
                                << "\n";
            std::cout << "  failing case written to " << path.string() << "\n";
            break;
        }
    return r.pass();
}

int replay(const fs::path& dump) {
    std::ifstream is(dump);
    if (!is) throw ConfigError("violated replay file must be readable: " + dump.string());
    const json j = json::parse(is);
    const auto name = j.at("config").at("suite").get<std::string>();
    if (!find_suite(name)) throw ConfigError("violated known suite in replay file: " + name);
    const auto r = (*find_suite(name))(validate(options_from_json(j.at("config"))));
    for (const auto& c : r.checks)
        if (c.name == j.at("check").get<std::string>()) {
            const bool same = !c.pass && c.failing.dump() == j.at("case").dump();
            std::cout << (same ? "REPRODUCED " : "NOT REPRODUCED ") << name << ": " << c.name << "\n";
            return same ? exit_failed : exit_ok;
        }
    std::cout << "NOT REPRODUCED " << name << ": no check named " << j.at("check") << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse domination and vector-valued transfer experiments on dyadic grids"};
    app.set_config("--config", "", "flat key = value file with option defaults");
    app.require_subcommand(1);
    app.fallthrough();

    RawOptions raw;
    std::string out_dir = "sdlab_out";
    std::string dump_path;

    app.add_option("--dim", raw.dim, "dimension (1 or 2)");
    app.add_option("--depth", raw.depth, "finest level L");
    app.add_flag("--shifts,!--no-shifts", raw.shifts, "use all 3^d shifted lattices where applicable");
    app.add_option("--seed", raw.seed, "base seed");
    app.add_option("--trials", raw.trials, "inputs per configuration");
    app.add_option("--eta", raw.eta, "sparseness parameter");
    app.add_option("--out", out_dir, "output directory")->envname("SDLAB_OUT");
    app.add_option("--p", raw.p, "comma-separated p_j")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--r", raw.r, "comma-separated r_j")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--t", raw.t, "comma-separated t_j")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--q", raw.q, "aggregation exponent q")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--s", raw.s, "dual-side exponent s")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    for (const auto& [name, fn] : suites()) app.add_subcommand(name, "run the " + name + " suite");
    app.add_subcommand("all", "run every suite");
    auto* rep = app.add_subcommand("replay", "rerun a serialized failing case and compare it bit-for-bit");
    rep->add_option("dump", dump_path, "failure JSON written by an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        if (sub->get_name() == "replay") return replay(dump_path);
        bool ok = true;
        if (sub->get_name() == "all") {
            for (const auto& [name, fn] : suites()) ok = run_suite(name, raw, out_dir) && ok;
        } else {
            ok = run_suite(sub->get_name(), raw, out_dir);
        }
        std::cout << (ok ? "ALL PASS" : "FAILURES") << "\n";
        return ok ? exit_ok : exit_failed;
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
    } catch (const DomainError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
    } catch (const SizeError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
    } catch (const ResolutionError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
    } catch (const UnsupportedError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
    }
    return exit_invalid;
}
