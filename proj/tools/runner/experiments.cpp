#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "mcorr/correlations.hpp"
#include "mcorr/ergodic.hpp"
#include "mcorr/errors.hpp"
#include "mcorr/furstenberg.hpp"
#include "mcorr/pretentious.hpp"
#include "mcorr/sequences.hpp"
#include "mcorr/text.hpp"

namespace mcorr::runner {

namespace {

using Keys = std::vector<std::string>;

const std::vector<std::pair<std::string, Keys>>& key_table() {
    static const std::vector<std::pair<std::string, Keys>> table = {
        {"corr-fixed", {"functions", "shifts", "schedule", "average", "tolerance", "decay_from"}},
        {"corr-deterministic", {"functions", "sequence", "shifts", "schedule", "tolerance", "decay_from"}},
        {"corr-family", {"functions", "family", "point", "schedule", "tolerance", "decay_from"}},
        {"identity-deterministic", {"functions", "sequence", "shifts", "n_outer", "n_inner", "tolerance"}},
        {"product-identity", {"functions", "family", "n_outer", "n_inner", "target", "tolerance"}},
        {"pattern-density",
         {"functions", "shifts", "sequence", "family", "point", "signs", "schedule", "target", "tolerance",
          "sum_tolerance"}},
        {"discrepancy", {"function", "sequence", "schedule", "require_growth"}},
        {"prime-dilation", {"functions", "shifts", "d", "prime_bound", "n", "tolerance"}},
        {"pretentious",
         {"function", "against", "schedule", "twist", "t_max", "grid_step", "refinement", "expect", "tolerance"}},
        {"aperiodicity-scan",
         {"function", "max_modulus", "schedule", "t_max", "grid_step", "refinement", "growth_tolerance",
          "require_growth"}},
        {"furstenberg-moment",
         {"sequences", "moments", "schedule", "window", "translate", "admission_tolerance", "gap_tolerance"}},
        {"correspondence-check", {"sequences", "sequence", "shifts", "n", "tolerance"}},
        {"ergodic-oracle",
         {"oracle", "theta", "trials", "seed", "n", "beta", "d", "prime_bound", "rotation", "monomials", "shifts",
          "start_x", "start_y", "r0", "m_bound", "x0", "y0", "a", "b", "expect", "tolerance"}},
        {"sequence-check",
         {"family", "check", "bound", "horizon", "max_modulus", "length", "prefix", "threshold", "expect",
          "tolerance"}},
    };
    return table;
}

// ---- typed config access ----

std::uint64_t get_uint(const Config& c, const std::string& key) {
    return c.get<std::uint64_t>(key, [&](const std::string& v) { return parse_uint(v, key); });
}

std::uint64_t uint_or(Config& c, const std::string& key, const std::string& fallback) {
    auto v = c.value_or(key, fallback);
    return c.located(key, [&] { return parse_uint(v, key); });
}

double get_double(const Config& c, const std::string& key) {
    return c.get<double>(key, [&](const std::string& v) { return parse_double(v, key); });
}

double double_or(Config& c, const std::string& key, const std::string& fallback) {
    auto v = c.value_or(key, fallback);
    return c.located(key, [&] { return parse_double(v, key); });
}

std::optional<double> opt_double(const Config& c, const std::string& key) {
    if (!c.has(key)) return std::nullopt;
    return get_double(c, key);
}

bool bool_or(Config& c, const std::string& key, const std::string& fallback) {
    auto v = c.value_or(key, fallback);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(c.find(key)->origin + " (" + key + ")", "expected true or false");
}

std::vector<std::int64_t> get_ints(const Config& c, const std::string& key) {
    return c.get<std::vector<std::int64_t>>(key, [&](const std::string& v) { return parse_int_list(v, key); });
}

std::vector<MultFn> get_functions(const Config& c, const std::string& key = "functions") {
    return c.get<std::vector<MultFn>>(key, [](const std::string& v) {
        std::vector<MultFn> out;
        for (const auto& d : split_list(v, ';')) out.push_back(MultFn::parse(d));
        if (out.empty()) throw ParseError("", "empty function list");
        return out;
    });
}

MultFn get_function(const Config& c, const std::string& key = "function") {
    return c.get<MultFn>(key, [](const std::string& v) { return MultFn::parse(v); });
}

Sequence get_sequence(const Config& c, const std::string& key = "sequence") {
    return c.get<Sequence>(key, [](const std::string& v) { return Sequence::parse(v); });
}

SequenceFamily get_family(const Config& c, const std::string& key = "family") {
    return c.get<SequenceFamily>(key, [](const std::string& v) { return SequenceFamily::parse(v); });
}

CheckpointSchedule get_schedule(const Config& c, const std::string& key = "schedule") {
    return c.get<CheckpointSchedule>(key, [&](const std::string& v) {
        if (v.find(',') == std::string::npos) return CheckpointSchedule::single(parse_uint(v, key));
        return CheckpointSchedule::parse(v);
    });
}

std::vector<BoundedSequence> get_bounded(const Config& c, const std::string& key = "sequences") {
    return c.get<std::vector<BoundedSequence>>(key, [](const std::string& v) {
        std::vector<BoundedSequence> out;
        for (const auto& d : split_list(v, ';')) out.push_back(BoundedSequence::parse(d));
        if (out.empty()) throw ParseError("", "empty sequence list");
        return out;
    });
}

void require_count(const Config& c, const std::string& key, std::size_t got, std::size_t want) {
    if (got != want)
        c.located(key, [&]() -> int {
            throw DomainError("expected " + std::to_string(want) + " entries, got " + std::to_string(got));
        });
}

std::int64_t max_shift(const std::vector<std::int64_t>& s) {
    std::int64_t m = 0;
    for (auto x : s) m = std::max(m, x);
    return m;
}

std::uint64_t add_need(std::int64_t a, std::uint64_t b) {
    if (a < 0) a = 0;
    std::uint64_t r;
    if (__builtin_add_overflow(static_cast<std::uint64_t>(a), b, &r))
        throw OverflowError("required sieve range exceeds 64 bits");
    return r;
}

// ---- report helpers ----

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

Series make_series(std::string name, const ConvergenceReport& rep) {
    Series s{std::move(name), rep.points, false};
    for (const auto& p : rep.points) s.complex = s.complex || p.value.imag() != 0.0;
    return s;
}

json trend_json(const ConvergenceReport& rep) {
    auto t = rep.trend();
    return json{{"tail_length", t.tail_length}, {"tail_max", t.tail_max}, {"drift", t.drift}};
}

void add_check(Report& r, std::string name, double value, std::string relation, double bound) {
    bool ok = false;
    if (relation == "<=") ok = value <= bound;
    else if (relation == "<") ok = value < bound;
    else if (relation == ">=") ok = value >= bound;
    else if (relation == "==") ok = value == bound;
    r.checks.push_back({std::move(name), std::move(relation), value, bound, ok});
}

void correlation_checks(Report& r, Config& c, const ConvergenceReport& rep) {
    const double final_abs = std::abs(rep.final_value());
    if (auto tol = opt_double(c, "tolerance")) add_check(r, "abs_final", final_abs, "<=", *tol);
    if (c.has("decay_from")) {
        auto n = get_uint(c, "decay_from");
        auto it = std::find_if(rep.points.begin(), rep.points.end(), [&](const Checkpoint& p) { return p.n == n; });
        if (it == rep.points.end())
            c.located("decay_from", [&]() -> int { throw DomainError("not a checkpoint of the schedule"); });
        add_check(r, "decay_from_" + std::to_string(n), final_abs, "<", std::abs(it->value));
    }
}

void correlation_results(Report& r, const CorrelationResult& res) {
    r.results["mode"] = to_string(res.mode);
    r.results["shifts"] = res.shifts;
    if (res.mode == CorrelationMode::family) {
        r.results["outer_point"] = res.outer_point;
        r.results["outer_norm"] = res.outer_norm;
    }
    r.results["final"] = cjson(res.report.final_value());
    r.results["abs_final"] = std::abs(res.report.final_value());
    r.results["trend"] = trend_json(res.report);
    r.series.push_back(make_series("value", res.report));
}

// ---- experiments ----

void corr_fixed(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto shifts = get_ints(c, "shifts");
    require_count(c, "shifts", shifts.size(), fs.size());
    auto sched = get_schedule(c);
    auto avg = c.value_or("average", "log");
    auto kind = c.located("average", [&] { return parse_average_kind(avg); });
    const auto& sieve = sp.get(add_need(max_shift(shifts), sched.final()), c);
    auto res = corr_fixed_shifts(fs, shifts, sched, kind, sieve);
    correlation_results(r, res);
    correlation_checks(r, c, res.report);
}

void corr_deterministic(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto a = get_sequence(c);
    auto shifts = get_ints(c, "shifts");
    require_count(c, "shifts", shifts.size(), fs.size());
    auto sched = get_schedule(c);
    auto top = c.located("sequence", [&] {
        return a(static_cast<std::int64_t>(add_need(max_shift(shifts), sched.final())));
    });
    const auto& sieve = sp.get(add_need(top, 0), c);
    auto res = corr_along_deterministic(fs, a, shifts, sched, sieve);
    correlation_results(r, res);
    correlation_checks(r, c, res.report);
}

std::int64_t family_max(const SequenceFamily& family, const std::vector<std::int64_t>& point) {
    std::int64_t m = 0;
    for (std::size_t j = 0; j < family.size(); ++j) m = std::max(m, family[j](point));
    return m;
}

void corr_family(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto family = get_family(c);
    auto point = get_ints(c, "point");
    require_count(c, "functions", fs.size(), family.size() + 1);
    require_count(c, "point", point.size(), family.arity());
    auto sched = get_schedule(c);
    auto top = c.located("point", [&] { return family_max(family, point); });
    const auto& sieve = sp.get(add_need(top, sched.final()), c);
    auto res = corr_shifted_by_family(fs, family, point, sched, sieve);
    correlation_results(r, res);
    correlation_checks(r, c, res.report);
}

void identity_deterministic(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto a = get_sequence(c);
    auto shifts = get_ints(c, "shifts");
    require_count(c, "shifts", shifts.size(), fs.size());
    auto n_outer = get_uint(c, "n_outer"), n_inner = get_uint(c, "n_inner");
    const auto ms = max_shift(shifts);
    auto need = c.located("sequence", [&] {
        return std::max(add_need(a(static_cast<std::int64_t>(add_need(ms, n_outer))), n_inner),
                        add_need(a(static_cast<std::int64_t>(add_need(ms, n_inner))), 0));
    });
    const auto& sieve = sp.get(need, c);
    auto res = identity_check_deterministic(fs, a, shifts, n_outer, n_inner, sieve);
    r.results["lhs"] = cjson(res.lhs);
    r.results["rhs"] = cjson(res.rhs);
    r.results["gap"] = res.gap;
    if (auto tol = opt_double(c, "tolerance")) add_check(r, "gap", res.gap, "<=", *tol);
}

void product_identity(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto family = get_family(c);
    require_count(c, "functions", fs.size(), family.size() + 1);
    auto n_outer = get_uint(c, "n_outer"), n_inner = get_uint(c, "n_inner");
    // largest shift over the outer box
    std::int64_t top = 0;
    c.located("family", [&] {
        std::vector<std::int64_t> p(family.arity(), 1);
        double count = std::pow(static_cast<double>(n_outer), family.arity());
        if (count > 1e8) throw ResourceError("product identity: too many outer points");
        for (;;) {
            top = std::max(top, family_max(family, p));
            std::size_t i = p.size();
            bool done = true;
            while (i > 0) {
                --i;
                if (++p[i] <= static_cast<std::int64_t>(n_outer)) {
                    done = false;
                    break;
                }
                p[i] = 1;
            }
            if (done) break;
        }
        return 0;
    });
    const auto& sieve = sp.get(add_need(top, n_inner), c);
    auto res = product_identity_check(fs, family, n_outer, n_inner, sieve);
    r.results["lhs"] = res.lhs;
    r.results["rhs_a"] = res.rhs_a;
    r.results["rhs_b"] = res.rhs_b;
    r.results["gap_a"] = res.gap_a;
    r.results["gap_b"] = res.gap_b;
    r.results["means"] = res.means;
    if (auto target = opt_double(c, "target")) {
        r.results["target"] = *target;
        r.results["target_gap"] = std::abs(res.lhs - *target);
        if (auto tol = opt_double(c, "tolerance")) add_check(r, "target_gap", std::abs(res.lhs - *target), "<=", *tol);
    } else if (auto tol = opt_double(c, "tolerance")) {
        add_check(r, "gap_b", res.gap_b, "<=", *tol);
    }
}

std::string pattern_name(const std::vector<int>& eps) {
    std::string s = "pattern_";
    for (int e : eps) s += e > 0 ? '+' : '-';
    return s;
}

void pattern(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto sched = get_schedule(c);
    ShiftSource source;
    std::uint64_t need = 0;
    if (c.has("family")) {
        auto family = get_family(c);
        auto point = get_ints(c, "point");
        require_count(c, "functions", fs.size(), family.size() + 1);
        require_count(c, "point", point.size(), family.arity());
        need = add_need(c.located("point", [&] { return family_max(family, point); }), sched.final());
        source = FamilyPoint{family, point};
    } else {
        auto shifts = get_ints(c, "shifts");
        require_count(c, "shifts", shifts.size(), fs.size());
        need = add_need(max_shift(shifts), sched.final());
        if (c.has("sequence")) {
            auto a = get_sequence(c);
            need = add_need(c.located("sequence", [&] { return a(static_cast<std::int64_t>(need)); }), 0);
            source = Composition{a, shifts};
        } else {
            source = FixedShifts{shifts};
        }
    }
    std::vector<std::vector<int>> patterns;
    auto signs = c.value_or("signs", "all");
    if (signs == "all") {
        if (fs.size() > 16) c.located("signs", [&]() -> int { throw DomainError("too many functions for all patterns"); });
        for (std::uint64_t mask = 0; mask < (1ull << fs.size()); ++mask) {
            std::vector<int> eps;
            for (std::size_t j = 0; j < fs.size(); ++j) eps.push_back(mask >> j & 1 ? -1 : 1);
            patterns.push_back(eps);
        }
    } else {
        auto v = get_ints(c, "signs");
        require_count(c, "signs", v.size(), fs.size());
        patterns.emplace_back(v.begin(), v.end());
    }
    const double target = double_or(c, "target", format_double(std::ldexp(1.0, -static_cast<int>(fs.size()))));
    const auto tol = opt_double(c, "tolerance");
    const auto& sieve = sp.get(need, c);
    std::vector<double> totals(sched.points().size(), 0.0);
    json dens = json::object();
    double worst = 0.0;
    for (const auto& eps : patterns) {
        auto res = c.located("signs", [&] { return pattern_density(fs, source, eps, sched, sieve); });
        for (std::size_t k = 0; k < totals.size(); ++k) totals[k] += res.report.points[k].value.real();
        double v = res.report.final_value().real();
        dens[pattern_name(eps)] = v;
        worst = std::max(worst, std::abs(v - target));
        r.series.push_back(make_series(pattern_name(eps), res.report));
        if (tol) add_check(r, pattern_name(eps), std::abs(v - target), "<=", *tol);
    }
    r.results["target"] = target;
    r.results["densities"] = dens;
    r.results["max_deviation"] = worst;
    if (signs == "all") {
        double sum_err = 0.0;
        for (double t : totals) sum_err = std::max(sum_err, std::abs(t - 1.0));
        r.results["sum_error"] = sum_err;
        add_check(r, "sum_to_one", sum_err, "<=", double_or(c, "sum_tolerance", "1e-12"));
    }
}

void discrepancy(Report& r, Config& c, SieveProvider& sp) {
    auto f = get_function(c);
    auto a = get_sequence(c);
    auto sched = get_schedule(c);
    auto need = c.located("sequence", [&] { return add_need(a(static_cast<std::int64_t>(sched.final())), 0); });
    const auto& sieve = sp.get(need, c);
    auto rep = discrepancy_growth(f, a, sched, sieve);
    r.series.push_back(make_series("max_partial_sum", rep));
    bool increasing = true;
    for (std::size_t k = 1; k < rep.points.size(); ++k)
        increasing = increasing && rep.points[k].value.real() > rep.points[k - 1].value.real();
    r.results["final"] = rep.final_value().real();
    r.results["strictly_increasing"] = increasing;
    if (bool_or(c, "require_growth", "false")) add_check(r, "strictly_increasing", increasing ? 1.0 : 0.0, "==", 1.0);
}

void prime_dilation(Report& r, Config& c, SieveProvider& sp) {
    auto fs = get_functions(c);
    auto shifts = get_ints(c, "shifts");
    require_count(c, "shifts", shifts.size(), fs.size());
    auto d = uint_or(c, "d", "1");
    auto bound = get_uint(c, "prime_bound");
    auto n = get_uint(c, "n");
    __int128 need = static_cast<__int128>(bound) * max_shift(shifts) + n;
    if (need > static_cast<__int128>(UINT64_MAX)) throw OverflowError("required sieve range exceeds 64 bits");
    const auto& sieve = sp.get(std::max(static_cast<std::uint64_t>(need), bound), c);
    auto res = prime_dilation_identity_check(fs, shifts, d, bound, n, sieve);
    r.results["lhs"] = cjson(res.lhs);
    r.results["rhs"] = cjson(res.rhs);
    r.results["gap"] = res.gap;
    r.results["prime_count"] = sieve.primes_up_to(bound, d).size();
    if (auto tol = opt_double(c, "tolerance")) add_check(r, "gap", res.gap, "<=", *tol);
}

TwistSearchConfig twist_config(Config& c) {
    TwistSearchConfig t;
    t.t_max = double_or(c, "t_max", format_double(t.t_max));
    t.grid_step = double_or(c, "grid_step", format_double(t.grid_step));
    t.refinement = static_cast<int>(uint_or(c, "refinement", std::to_string(t.refinement)));
    c.located("grid_step", [&] {
        t.validate();
        return 0;
    });
    return t;
}

void pretentious(Report& r, Config& c, SieveProvider& sp) {
    auto f = get_function(c);
    auto g = c.located("against", [&] { return MultFn::parse(c.value_or("against", "one")); });
    auto sched = get_schedule(c);
    const auto& sieve = sp.get(sched.final(), c);
    ConvergenceReport dist;
    for (auto n : sched.points()) dist.points.push_back({n, {pretentious_distance_sq(f, g, n, sieve), 0.0}});
    r.series.push_back(make_series("distance_sq", dist));
    r.results["distance_sq"] = dist.final_value().real();
    if (bool_or(c, "twist", "false")) {
        auto cfg = twist_config(c);
        auto trace = archimedean_min_trace(prime_values(f, sched.final(), sieve), sched, cfg);
        ConvergenceReport mins;
        json ts = json::array();
        for (const auto& m : trace) {
            mins.points.push_back({m.n, {m.value, 0.0}});
            ts.push_back(json{{"n", m.n}, {"t", m.t}, {"value", m.value}});
        }
        r.series.push_back(make_series("archimedean_min", mins));
        r.results["archimedean_min"] = ts;
    }
    if (auto expect = opt_double(c, "expect")) {
        double tol = double_or(c, "tolerance", "1e-9");
        add_check(r, "distance_sq", std::abs(dist.final_value().real() - *expect), "<=", tol);
    }
}

void aperiodicity(Report& r, Config& c, SieveProvider& sp) {
    auto f = get_function(c);
    auto q = get_uint(c, "max_modulus");
    auto sched = get_schedule(c);
    auto cfg = twist_config(c);
    auto tol = double_or(c, "growth_tolerance", "0");
    const auto& sieve = sp.get(sched.final(), c);
    auto scan = aperiodicity_scan(f, q, sched, cfg, sieve, tol);
    json entries = json::array();
    for (const auto& e : scan.entries) {
        std::string name = "q" + std::to_string(e.modulus) + "_chi" + std::to_string(e.index);
        ConvergenceReport rep;
        for (const auto& m : e.minima) rep.points.push_back({m.n, {m.value, 0.0}});
        r.series.push_back(make_series(name, rep));
        entries.push_back(json{{"modulus", e.modulus},
                               {"index", e.index},
                               {"principal", e.principal},
                               {"growing", e.growing},
                               {"final_min", e.minima.back().value},
                               {"final_t", e.minima.back().t}});
    }
    r.results["twist_search"] = cfg.describe();
    r.results["entries"] = entries;
    r.results["all_growing"] = scan.all_growing();
    if (bool_or(c, "require_growth", "false")) add_check(r, "all_growing", scan.all_growing() ? 1.0 : 0.0, "==", 1.0);
}

void furstenberg(Report& r, Config& c, SieveProvider& sp) {
    auto seqs = get_bounded(c);
    auto specs = c.get<std::vector<MomentSpec>>("moments", [](const std::string& v) {
        std::vector<MomentSpec> out;
        for (const auto& k : split_list(v, ';')) out.push_back(MomentSpec::parse(k));
        if (out.empty()) throw ParseError("", "empty moment list");
        return out;
    });
    auto sched = get_schedule(c);
    auto h = static_cast<std::int64_t>(uint_or(c, "translate", "1"));
    std::int64_t reach = 0;
    for (const auto& s : specs)
        for (const auto& f : s.factors) {
            if (f.shift < 0) c.located("moments", [&]() -> int { throw DomainError("moment shifts must be nonnegative"); });
            reach = std::max(reach, f.shift);
        }
    auto window = static_cast<std::int64_t>(uint_or(c, "window", std::to_string(reach + h)));
    std::uint64_t need = 0;
    for (const auto& s : seqs) need = std::max(need, s.sieve_need(add_need(window, sched.final())));
    const auto& sieve = sp.get(std::max<std::uint64_t>(need, 2), c);
    auto emp = c.located("moments", [&] { return EmpiricalSystem(seqs, sched, window, sieve); });
    json table = json::object();
    for (const auto& s : specs) {
        const auto& rep = c.located("moments", [&]() -> const ConvergenceReport& { return emp.moment(s); });
        auto key = s.canonical().key();
        if (!table.contains(key)) {
            table[key] = cjson(rep.final_value());
            r.series.push_back(make_series("moment " + key, rep));
        }
    }
    r.results["moments"] = table;
    auto gap = c.located("translate", [&] { return shift_invariance_check(emp, specs, h); });
    r.results["shift_invariance"] = json{{"translate", h}, {"max_gap", gap.max_gap}, {"worst", gap.worst_key}};
    if (auto tol = opt_double(c, "gap_tolerance")) add_check(r, "shift_invariance", gap.max_gap, "<=", *tol);
    if (sched.points().size() >= 3) {
        double tol = double_or(c, "admission_tolerance", "1e-2");
        json verdicts = json::array();
        for (const auto& v : admission_test(emp, specs, tol)) {
            verdicts.push_back(json{{"moment", v.key}, {"stabilizing", v.stabilizing}, {"max_step", v.max_step}});
            if (c.find("admission_tolerance")->origin != "default")
                add_check(r, "stabilizing " + v.key, v.max_step, "<=", tol);
        }
        r.results["admission"] = verdicts;
    }
}

void correspondence(Report& r, Config& c, SieveProvider& sp) {
    auto b = get_bounded(c);
    auto a = get_sequence(c);
    auto shifts = get_ints(c, "shifts");
    require_count(c, "shifts", shifts.size(), b.size());
    auto n = get_uint(c, "n");
    auto hi = c.located("sequence", [&] { return add_need(a(static_cast<std::int64_t>(add_need(max_shift(shifts), n + 1))), 0); });
    std::uint64_t need = 2;
    for (const auto& s : b) need = std::max(need, s.sieve_need(hi));
    const auto& sieve = sp.get(need, c);
    auto res = correspondence_identity_check(b, a, shifts, n, sieve);
    r.results["lhs"] = cjson(res.lhs);
    r.results["rhs"] = cjson(res.rhs);
    r.results["density"] = res.density;
    r.results["gap"] = res.gap;
    if (auto tol = opt_double(c, "tolerance")) add_check(r, "gap", res.gap, "<=", *tol);
}

FixedReal get_real(const Config& c, const std::string& key) {
    return c.get<FixedReal>(key, [](const std::string& v) { return FixedReal::parse(v); });
}

FixedReal real_or(Config& c, const std::string& key, const std::string& fallback) {
    auto v = c.value_or(key, fallback);
    return c.located(key, [&] { return FixedReal::parse(v); });
}

std::vector<TrigMonomial> get_monomials(const Config& c) {
    return c.get<std::vector<TrigMonomial>>("monomials", [](const std::string& v) {
        std::vector<TrigMonomial> out;
        for (const auto& m : split_list(v, ';')) out.push_back(TrigMonomial::parse(m));
        return out;
    });
}

void ergodic(Report& r, Config& c, SieveProvider& sp) {
    const auto oracle = c.required("oracle");
    r.results["oracle"] = oracle;
    const auto tol = opt_double(c, "tolerance");
    if (oracle == "weyl") {
        auto n = get_uint(c, "n");
        std::vector<FixedReal> thetas;
        if (c.has("theta")) {
            c.located("theta", [&] {
                for (const auto& t : split_list(c.required("theta"), ';')) thetas.push_back(FixedReal::parse(t));
                return 0;
            });
        } else {
            // theta = k / p for a large prime p, drawn reproducibly
            auto trials = uint_or(c, "trials", "100");
            std::mt19937_64 rng(uint_or(c, "seed", "1"));
            for (std::uint64_t i = 0; i < trials; ++i)
                thetas.push_back(FixedReal::parse(std::to_string(rng() % 1000000007) + "/1000000007"));
        }
        json rows = json::array();
        std::uint64_t violations = 0;
        for (const auto& t : thetas) {
            auto w = weyl_sum(t, n);
            double bound = weyl_bound(t, n);
            bool ok = std::abs(w) <= bound * (1 + 1e-12);
            violations += !ok;
            rows.push_back(json{{"theta", t.text()}, {"value", cjson(w)}, {"abs", std::abs(w)}, {"bound", bound}});
        }
        r.results["sums"] = rows;
        r.results["violations"] = violations;
        add_check(r, "weyl_bound_violations", static_cast<double>(violations), "==", 0.0);
    } else if (oracle == "prime-phase") {
        auto beta = get_real(c, "beta");
        auto d = uint_or(c, "d", "1");
        auto bound = get_uint(c, "prime_bound");
        const auto& sieve = sp.get(bound, c);
        auto v = prime_phase_average(beta, d, bound, sieve);
        r.results["value"] = cjson(v);
        if (auto expect = opt_double(c, "expect")) {
            r.results["gap"] = std::abs(v - cplx(*expect, 0.0));
            if (tol) add_check(r, "gap", std::abs(v - cplx(*expect, 0.0)), "<=", *tol);
        } else if (tol) {
            add_check(r, "abs_value", std::abs(v), "<=", *tol);
        }
    } else if (oracle == "rotation") {
        auto rot = c.get<TorusRotation>("rotation", [](const std::string& v) { return TorusRotation::parse(v); });
        auto f = get_monomials(c);
        auto shifts = get_ints(c, "shifts");
        require_count(c, "shifts", shifts.size(), f.size());
        auto n = uint_or(c, "n", "1000000");
        OrbitStart start{static_cast<std::int64_t>(uint_or(c, "start_x", "0")), {}};
        auto ys = c.value_or("start_y", "");
        c.located("start_y", [&] {
            for (const auto& y : split_list(ys)) start.y.push_back(FixedReal::parse(y));
            if (start.y.empty()) start.y.assign(rot.dim(), FixedReal{});
            return 0;
        });
        auto analytic = c.located("monomials", [&] { return rotation_correlation(rot, f, shifts); });
        auto orbit = c.located("start_y", [&] { return rotation_correlation_orbit(rot, f, shifts, n, start); });
        r.results["analytic"] = cjson(analytic);
        r.results["orbit"] = cjson(orbit);
        r.results["gap"] = std::abs(orbit - analytic);
        if (tol) add_check(r, "gap", std::abs(orbit - analytic), "<=", *tol);
    } else if (oracle == "ergid2") {
        auto rot = c.get<TorusRotation>("rotation", [](const std::string& v) { return TorusRotation::parse(v); });
        auto f = get_monomials(c);
        auto shifts = get_ints(c, "shifts");
        require_count(c, "shifts", shifts.size(), f.size());
        auto d = uint_or(c, "d", "1");
        auto r0 = uint_or(c, "r0", "1");
        auto bound = get_uint(c, "prime_bound");
        auto m = get_uint(c, "m_bound");
        const auto& sieve = sp.get(bound, c);
        auto res = c.located("monomials", [&] { return ergid2_check(rot, f, shifts, d, r0, bound, m, sieve); });
        r.results["lhs"] = cjson(res.lhs);
        r.results["rhs"] = cjson(res.rhs);
        r.results["analytic"] = cjson(res.analytic);
        r.results["analytic_primes"] = cjson(res.analytic_primes);
        r.results["gap"] = res.gap;
        r.results["gap_lhs"] = res.gap_lhs;
        r.results["gap_rhs"] = res.gap_rhs;
        r.results["prime_count"] = res.prime_count;
        r.results["class_count"] = res.class_count;
        r.results["rational_relation"] = res.relation ? json(*res.relation) : json(nullptr);
        if (tol) add_check(r, "gap", res.gap, "<=", *tol);
    } else if (oracle == "skew") {
        auto x0 = get_real(c, "x0");
        auto y0 = real_or(c, "y0", "0");
        auto a = static_cast<std::int64_t>(c.located("a", [&] { return parse_int(c.value_or("a", "0"), "a"); }));
        auto b = static_cast<std::int64_t>(c.located("b", [&] { return parse_int(c.value_or("b", "1"), "b"); }));
        auto n = get_uint(c, "n");
        auto v = skew_orbit_average(x0, y0, a, b, n);
        r.results["value"] = cjson(v);
        if (tol) add_check(r, "abs_value", std::abs(v), "<=", *tol);
    } else {
        throw ParseError(c.find("oracle")->origin + " (oracle)",
                         "unknown oracle '" + oracle + "'; expected weyl, prime-phase, rotation, ergid2 or skew");
    }
}

json verdict_json(const CoefficientVerdict& v) {
    json j{{"k", v.k}, {"solutions", v.solutions}, {"density", v.density}, {"density_half", v.density_half}};
    if (!v.largest.empty()) j["largest"] = v.largest;
    if (v.infinite) j["infinite"] = *v.infinite;
    return j;
}

void sequence_check(Report& r, Config& c, SieveProvider&) {
    auto family = get_family(c);
    const auto check = c.value_or("check", "independence");
    std::optional<bool> passed;
    if (check == "independence" || check == "weak-independence") {
        auto bound = static_cast<std::int64_t>(uint_or(c, "bound", "5"));
        auto horizon = get_uint(c, "horizon");
        IndependenceOptions opt;
        opt.prefix = uint_or(c, "prefix", "0");
        opt.weak_threshold = double_or(c, "threshold", "1e-2");
        auto rep = c.located("family", [&] {
            return check == "independence" ? check_independence(family, bound, horizon, opt)
                                           : check_weak_independence(family, bound, horizon, opt);
        });
        r.results["passed"] = rep.passed;
        r.results["exact"] = rep.exact;
        r.results["rank"] = rep.rank;
        r.results["certificate"] = rep.certificate;
        r.results["prefix"] = rep.prefix;
        json verdicts = json::array();
        for (const auto& v : rep.verdicts) verdicts.push_back(verdict_json(v));
        r.results["verdicts"] = verdicts;
        r.results["counterexample"] = rep.counterexample ? verdict_json(*rep.counterexample) : json(nullptr);
        passed = rep.passed;
    } else if (check == "congruence") {
        auto u = uint_or(c, "max_modulus", "6");
        auto horizon = get_uint(c, "horizon");
        auto rep = c.located("family", [&] { return check_congruence_equidistribution(family, u, horizon); });
        r.results["statistic"] = rep.statistic;
        r.results["worst_modulus"] = rep.worst_modulus;
        r.results["worst_k"] = rep.worst_k;
        if (auto tol = opt_double(c, "tolerance")) add_check(r, "statistic", rep.statistic, "<=", *tol);
    } else if (check == "complexity") {
        auto horizon = get_uint(c, "horizon");
        auto length = uint_or(c, "length", "10");
        if (family.size() != 1)
            c.located("family", [&]() -> int { throw DomainError("complexity takes a single sequence"); });
        auto word = c.located("family", [&] { return indicator_of_range(family[0], horizon); });
        json counts = json::array();
        for (std::uint64_t l = 1; l <= length; ++l) counts.push_back(word_complexity(word, l, horizon));
        r.results["complexity"] = counts;
    } else {
        throw ParseError(c.find("check")->origin + " (check)",
                         "unknown check '" + check + "'; expected independence, weak-independence, congruence or complexity");
    }
    if (c.has("expect")) {
        auto want = c.required("expect");
        if (!passed || (want != "pass" && want != "fail"))
            throw ParseError(c.find("expect")->origin + " (expect)", "expect takes pass or fail for independence checks");
        add_check(r, "verdict", *passed == (want == "pass") ? 1.0 : 0.0, "==", 1.0);
    }
}

using Runner = void (*)(Report&, Config&, SieveProvider&);

const std::vector<std::pair<std::string, Runner>>& runners() {
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"corr-fixed", corr_fixed},
        {"corr-deterministic", corr_deterministic},
        {"corr-family", corr_family},
        {"identity-deterministic", identity_deterministic},
        {"product-identity", product_identity},
        {"pattern-density", pattern},
        {"discrepancy", discrepancy},
        {"prime-dilation", prime_dilation},
        {"pretentious", pretentious},
        {"aperiodicity-scan", aperiodicity},
        {"furstenberg-moment", furstenberg},
        {"correspondence-check", correspondence},
        {"ergodic-oracle", ergodic},
        {"sequence-check", sequence_check},
    };
    return table;
}

} // namespace

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json Report::payload() const {
    json j;
    j["kind"] = kind;
    json cfg = json::object();
    for (const auto& e : config.entries()) cfg[e.key] = e.value;
    j["config"] = cfg;
    j["config_text"] = config.text();
    j["results"] = results;
    json checks_json = json::array();
    for (const auto& ch : checks)
        checks_json.push_back(json{{"name", ch.name},
                                   {"value", ch.value},
                                   {"relation", ch.relation},
                                   {"bound", ch.bound},
                                   {"passed", ch.passed}});
    j["checks"] = checks_json;
    j["passed"] = passed();
    json series_json = json::array();
    std::set<std::string> used;
    for (const auto& s : series) {
        std::string stem = series_file_stem(s.name);
        for (int i = 2; used.count(stem); ++i) stem = series_file_stem(s.name) + "_" + std::to_string(i);
        used.insert(stem);
        json pts = json::array();
        for (const auto& p : s.points) pts.push_back(json::array({p.n, p.value.real(), p.value.imag()}));
        series_json.push_back(json{{"name", s.name}, {"file", stem}, {"points", pts}});
    }
    j["series"] = series_json;
    return j;
}

const FactorSieve& SieveProvider::get(std::uint64_t need, Config& config) {
    auto declared = config.value_or("sieve_limit", "auto");
    std::uint64_t limit = std::max<std::uint64_t>(need, 2);
    if (declared != "auto") {
        auto d = config.located("sieve_limit", [&] { return parse_uint(declared, "sieve_limit"); });
        if (need > d)
            throw ParseError(config.find("sieve_limit")->origin + " (sieve_limit)",
                             "experiment needs the sieve up to " + std::to_string(need) + ", declared limit is " +
                                 std::to_string(d));
        limit = std::max<std::uint64_t>(d, 2);
    }
    auto& slot = sieves_[limit];
    if (slot) return *slot;
    slot = std::make_unique<FactorSieve>(FactorSieve::build(limit));
    if (cache_dir_) {
        namespace fs = std::filesystem;
        fs::create_directories(*cache_dir_);
        auto path = *cache_dir_ / ("sieve-v" + std::to_string(kTableFormatVersion) + "-" + std::to_string(limit) + ".bin");
        std::shared_ptr<ArithmeticTable> table;
        if (fs::exists(path)) {
            std::ifstream in(path, std::ios::binary);
            try {
                auto t = read_table(in);
                if (t.window == Window{1, limit}) table = std::make_shared<ArithmeticTable>(std::move(t));
            } catch (const std::exception&) {
                table.reset();  // unreadable cache entries are rebuilt
            }
        }
        if (!table) {
            table = std::make_shared<ArithmeticTable>(slot->arithmetic_table({1, limit}));
            auto tmp = path;
            tmp += ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary);
                write_table(out, *table);
                if (!out) throw ResourceError("cannot write sieve cache " + tmp.string());
            }
            fs::rename(tmp, path);
        }
        slot->attach_cache(table);
    }
    return *slot;
}

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : runners()) k.push_back(name);
        return k;
    }();
    return kinds;
}

Report run_experiment(const std::string& kind, Config config, SieveProvider& sieves) {
    const auto run = std::find_if(runners().begin(), runners().end(), [&](const auto& p) { return p.first == kind; });
    if (run == runners().end()) throw ParseError("kind", "unknown experiment kind '" + kind + "'");
    if (auto* e = config.find("kind"); e && e->value != kind)
        throw ParseError(e->origin, "config is for '" + e->value + "', not '" + kind + "'");
    const auto& allowed = std::find_if(key_table().begin(), key_table().end(), [&](const auto& p) {
                              return p.first == kind;
                          })->second;
    for (const auto& e : config.entries())
        if (e.key != "kind" && e.key != "sieve_limit" &&
            std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
            throw ParseError(e.origin, "unknown key '" + e.key + "' for " + kind);
    Report r;
    r.kind = kind;
    config.set("kind", kind, config.has("kind") ? config.find("kind")->origin : "default");
    run->second(r, config, sieves);
    r.config = std::move(config);
    return r;
}

namespace {

void dump(const json& v, std::string& out, int indent) {
    auto pad = [&](int n) { out.append(static_cast<std::size_t>(n), ' '); };
    switch (v.type()) {
    case json::value_t::null: out += "null"; break;
    case json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
    case json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
    case json::value_t::number_float: {
        double x = v.get<double>();
        out += std::isfinite(x) ? format_double(x) : "null";
        break;
    }
    case json::value_t::string: out += v.dump(); break;
    case json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            break;
        }
        bool flat = std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
        if (flat) {
            out += '[';
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ", ";
                dump(v[i], out, indent);
            }
            out += ']';
            break;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            pad(indent + 2);
            dump(v[i], out, indent + 2);
            out += i + 1 < v.size() ? ",\n" : "\n";
        }
        pad(indent);
        out += ']';
        break;
    }
    case json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            break;
        }
        out += "{\n";
        std::size_t i = 0;
        for (auto it = v.begin(); it != v.end(); ++it, ++i) {
            pad(indent + 2);
            out += json(it.key()).dump() + ": ";
            dump(it.value(), out, indent + 2);
            out += i + 1 < v.size() ? ",\n" : "\n";
        }
        pad(indent);
        out += '}';
        break;
    }
    default: out += v.dump(); break;
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw ResourceError("cannot write " + path.string());
}

} // namespace

std::string dump_json(const json& value) {
    std::string out;
    dump(value, out, 0);
    out += '\n';
    return out;
}

std::string series_file_stem(const std::string& name) {
    std::string s;
    for (char ch : name) {
        bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                  ch == '-' || ch == '+' || ch == '.';
        s += ok ? ch : '_';
    }
    return s.empty() ? "series" : s;
}

void emit_report(const Report& report, const std::filesystem::path& dir, bool csv, bool json_out, bool plot) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ResourceError("cannot create " + dir.string() + ": " + ec.message());
    auto payload = report.payload();
    if (json_out) write_file(dir / "report.json", dump_json(payload));
    const auto& series = payload["series"];
    for (std::size_t i = 0; i < report.series.size(); ++i) {
        const auto& s = report.series[i];
        const auto stem = series[i]["file"].get<std::string>();
        if (csv) {
            std::string text = "N,re,im\n";
            for (const auto& p : s.points)
                text += std::to_string(p.n) + "," + format_double(p.value.real()) + "," + format_double(p.value.imag()) + "\n";
            write_file(dir / (stem + ".csv"), text);
        }
        if (plot) {
            std::string text = s.complex ? "# log10_N re im\n" : "# log10_N value\n";
            for (const auto& p : s.points) {
                text += format_double(std::log10(static_cast<double>(p.n))) + " " + format_double(p.value.real());
                if (s.complex) text += " " + format_double(p.value.imag());
                text += "\n";
            }
            write_file(dir / (stem + ".plot"), text);
        }
    }
}

} // namespace mcorr::runner
