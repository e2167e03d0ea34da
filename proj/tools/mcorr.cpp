// Experiment runner. Exit codes: 0 done, 1 bad input, 2 assertion failed
// (with --assert), 3 resource or I/O failure.
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mcorr/errors.hpp"
#include "mcorr/parallel.hpp"
#include "runner/experiments.hpp"

using namespace mcorr;
using namespace mcorr::runner;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
    std::string config;
    std::string out = "out";
    unsigned threads = 0;
    bool assert_mode = false;
    std::string sieve_cache;
    std::vector<std::string> sets;
    std::string formats = "csv,json,plotdata";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

int run(const std::string& kind, const Options& opt) {
    Config cfg = opt.config.empty() ? Config{} : Config::parse(read_file(opt.config), opt.config);
    for (const auto& s : opt.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("--set " + s, "expected key=value");
        cfg.set(std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))));
    }
    bool csv = false, json_out = false, plot = false;
    for (const auto& f : split_list(opt.formats)) {
        if (f == "csv") csv = true;
        else if (f == "json") json_out = true;
        else if (f == "plotdata") plot = true;
        else throw ParseError("--format", "unknown format '" + f + "'");
    }
    set_thread_count(opt.threads);
    SieveProvider sieves(opt.sieve_cache.empty() ? std::nullopt
                                                 : std::optional<std::filesystem::path>(opt.sieve_cache));
    auto start = std::chrono::steady_clock::now();
    auto report = run_experiment(kind, std::move(cfg), sieves);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit_report(report, opt.out, csv, json_out, plot);
    json meta{{"version", kVersion},
              {"kind", kind},
              {"timestamp", utc_now()},
              {"threads", thread_count()},
              {"elapsed_seconds", elapsed}};
    {
        std::ofstream m(std::filesystem::path(opt.out) / "meta.json", std::ios::binary);
        m << dump_json(meta);
        if (!m) throw ResourceError("cannot write meta.json");
    }
    for (const auto& c : report.checks)
        std::printf("%s %s: %s %s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), format_double(c.value).c_str(),
                    c.relation.c_str(), format_double(c.bound).c_str());
    if (opt.assert_mode && !report.passed()) return 2;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Checkpointed experiments on correlations of multiplicative functions"};
    app.set_version_flag("--version", kVersion);
    Options opt;
    app.add_option("--config", opt.config, "Experiment config file (key = value lines)");
    app.add_option("--out", opt.out, "Output directory")->capture_default_str();
    app.add_option("--threads", opt.threads, "Worker cap; 0 uses every core")->capture_default_str();
    app.add_flag("--assert", opt.assert_mode, "Exit 2 when a tolerance check fails");
    app.add_option("--sieve-cache", opt.sieve_cache, "Directory for cached sieve tables");
    app.add_option("--set", opt.sets, "Override a config key: --set key=value (repeatable)");
    app.add_option("--format", opt.formats, "Any of csv,json,plotdata")->capture_default_str();
    app.require_subcommand(1);
    std::string chosen;
    for (const auto& kind : experiment_kinds())
        app.add_subcommand(kind, "Run a " + kind + " experiment")->fallthrough()->callback([&, kind] { chosen = kind; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        return run(chosen, opt);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const RangeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const OverflowError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "resource error: out of memory\n");
        return 3;
    }
}
