#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "mcorr/averaging.hpp"
#include "mcorr/sieve.hpp"

namespace mcorr::runner {

using json = nlohmann::ordered_json;

struct Series {
    std::string name;
    std::vector<Checkpoint> points;
    bool complex = false;
};

/// A tolerance gate; `relation` reads "value <relation> bound".
struct Check {
    std::string name;
    std::string relation;
    double value = 0.0;
    double bound = 0.0;
    bool passed = false;
};

struct Report {
    std::string kind;
    Config config;  ///< resolved: given keys plus the defaults used
    json results = json::object();
    std::vector<Series> series;
    std::vector<Check> checks;

    bool passed() const;
    /// Deterministic payload: no timestamps or thread counts.
    json payload() const;
};

/// Sieves by limit, optionally backed by on-disk tables named
/// sieve-v<format>-<limit>.bin.
class SieveProvider {
public:
    explicit SieveProvider(std::optional<std::filesystem::path> cache_dir = std::nullopt)
        : cache_dir_(std::move(cache_dir)) {}

    /// A sieve covering need; config key sieve_limit (default auto) may
    /// declare a larger limit, and a declared limit below need is an error.
    const FactorSieve& get(std::uint64_t need, Config& config);

private:
    std::optional<std::filesystem::path> cache_dir_;
    std::map<std::uint64_t, std::unique_ptr<FactorSieve>> sieves_;
};

const std::vector<std::string>& experiment_kinds();

/// Runs one experiment; `kind` must match config key kind when present.
Report run_experiment(const std::string& kind, Config config, SieveProvider& sieves);

/// JSON text with every float printed as %.17g, two-space indent, LF.
std::string dump_json(const json& value);

/// Writes report.json, <series>.csv and <series>.plot as selected.
void emit_report(const Report& report, const std::filesystem::path& dir, bool csv, bool json_out, bool plot);

/// File-safe series name.
std::string series_file_stem(const std::string& name);

} // namespace mcorr::runner
