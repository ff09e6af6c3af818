// propdiff: intervals for p1 - p2 and their exact coverage from the command line.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "propdiff/propdiff.hpp"

namespace {

using namespace propdiff;

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Value = std::variant<std::string, std::int64_t, double, bool>;

/// Flat ordered key/value record; one per output line in machine formats.
struct OutputRecord {
    std::vector<std::pair<std::string, Value>> fields;

    OutputRecord& add(std::string key, Value v) {
        fields.emplace_back(std::move(key), std::move(v));
        return *this;
    }
};

// Shortest representation that parses back to the same double.
std::string exact_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, end};
}

std::string rounded_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    if (s == "-0.000") s = "0.000";
    return s;
}

std::string render_value(const Value& v, bool human) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return x;
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else {
                return human ? rounded_number(x) : exact_number(x);
            }
        },
        v);
}

nlohmann::ordered_json to_json(const OutputRecord& rec) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [key, value] : rec.fields) {
        std::visit([&](const auto& x) { j[key] = x; }, value);
    }
    return j;
}

enum class Format { text, json, csv };

void emit(std::ostream& os, const std::vector<OutputRecord>& records, Format format) {
    if (records.empty()) return;
    switch (format) {
        case Format::json:
            for (const auto& r : records) os << to_json(r).dump() << '\n';
            break;
        case Format::csv: {
            const auto& head = records.front().fields;
            for (std::size_t i = 0; i < head.size(); ++i) os << (i ? "," : "") << head[i].first;
            os << '\n';
            for (const auto& r : records) {
                for (std::size_t i = 0; i < r.fields.size(); ++i) {
                    os << (i ? "," : "") << render_value(r.fields[i].second, false);
                }
                os << '\n';
            }
            break;
        }
        case Format::text:
            for (const auto& r : records) {
                bool first = true;
                for (const auto& [key, value] : r.fields) {
                    os << (first ? "" : "  ") << key << '=' << render_value(value, true);
                    first = false;
                }
                os << '\n';
            }
            break;
    }
}

// Writes to --out when given, stdout otherwise. The file is opened before any
// work so that an unwritable path fails fast.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) throw UsageError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void finish() {
        stream().flush();
        if (!stream()) throw std::runtime_error("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

const std::map<std::string, Format> format_names{
    {"text", Format::text}, {"json", Format::json}, {"csv", Format::csv}};

const std::map<std::string, Method> method_names{{"wal", Method::wal},
                                                 {"agc", Method::agc},
                                                 {"jeffreys", Method::jef_fid},
                                                 {"divergence", Method::div},
                                                 {"matching", Method::match}};

struct McFlags {
    std::uint64_t seed = 0;
    std::size_t samples = McConfig::default_samples;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Seed for all Monte Carlo streams")->capture_default_str();
        cmd->add_option("--samples", samples, "Accepted matching-posterior draws per outcome")
            ->capture_default_str()
            ->check(CLI::Range(McConfig::min_samples, std::size_t{1} << 40));
    }
    [[nodiscard]] McConfig config() const { return McConfig(seed, samples); }
};

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct TableRow {
    double p1;
    double p2;
};

constexpr TableRow table_rows[] = {{0.1, 0.1}, {0.1, 0.7}, {0.3, 0.3}, {0.3, 0.7}, {0.5, 0.5}};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intervals for the difference of two binomial proportions and their exact coverage"};
    app.require_subcommand(1);

    // interval
    auto* interval_cmd = app.add_subcommand("interval", "Interval for one pair of observed counts");
    Method iv_method = Method::wal;
    int iv_x1 = 0, iv_n1 = 0, iv_x2 = 0, iv_n2 = 0;
    double iv_level = 0.95;
    bool iv_clip = false;
    Format iv_format = Format::text;
    McFlags iv_mc;
    interval_cmd->add_option("--method", iv_method, "wal|agc|jeffreys|divergence|matching")
        ->required()
        ->transform(CLI::CheckedTransformer(method_names, CLI::ignore_case));
    interval_cmd->add_option("--x1", iv_x1, "Successes in group 1")->required();
    interval_cmd->add_option("--n1", iv_n1, "Trials in group 1")->required();
    interval_cmd->add_option("--x2", iv_x2, "Successes in group 2")->required();
    interval_cmd->add_option("--n2", iv_n2, "Trials in group 2")->required();
    interval_cmd->add_option("--level", iv_level, "Nominal level 1 - alpha")->capture_default_str();
    iv_mc.attach(interval_cmd);
    interval_cmd->add_flag("--clip", iv_clip, "Clip wal/agc endpoints to [-1, 1]");
    interval_cmd->add_option("--format", iv_format, "text|json|csv")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));

    // coverage
    auto* coverage_cmd = app.add_subcommand("coverage", "Exact coverage rate and expected length");
    Method cv_method = Method::wal;
    int cv_n1 = 0, cv_n2 = 0;
    double cv_p1 = 0.0, cv_p2 = 0.0, cv_level = 0.95;
    bool cv_clip = false;
    unsigned cv_threads = default_threads();
    Format cv_format = Format::text;
    McFlags cv_mc;
    coverage_cmd->add_option("--method", cv_method, "wal|agc|jeffreys|divergence|matching")
        ->required()
        ->transform(CLI::CheckedTransformer(method_names, CLI::ignore_case));
    coverage_cmd->add_option("--n1", cv_n1, "Trials in group 1")->required();
    coverage_cmd->add_option("--n2", cv_n2, "Trials in group 2")->required();
    coverage_cmd->add_option("--p1", cv_p1, "True success probability of group 1")->required();
    coverage_cmd->add_option("--p2", cv_p2, "True success probability of group 2")->required();
    coverage_cmd->add_option("--level", cv_level, "Nominal level 1 - alpha")->capture_default_str();
    cv_mc.attach(coverage_cmd);
    coverage_cmd->add_flag("--clip", cv_clip, "Clip wal/agc endpoints to [-1, 1]");
    coverage_cmd->add_option("--threads", cv_threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    coverage_cmd->add_option("--format", cv_format, "text|json|csv")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));

    // table
    auto* table_cmd = app.add_subcommand("table", "Coverage table for n1 = n2 = 10 (2) or 20 (3)");
    int tb_which = 2;
    std::string tb_out;
    unsigned tb_threads = default_threads();
    McFlags tb_mc;
    table_cmd->add_option("--which", tb_which, "2 (n = 10) or 3 (n = 20)")
        ->required()
        ->check(CLI::IsMember({2, 3}));
    table_cmd->add_option("--out", tb_out, "Output CSV path (default stdout)");
    tb_mc.attach(table_cmd);
    table_cmd->add_option("--threads", tb_threads, "Worker threads")->check(CLI::Range(1u, 1024u));

    // example
    auto* example_cmd = app.add_subcommand("example", "Five-method comparison for x1=9/29, x2=5/31");
    std::string ex_out;
    Format ex_format = Format::text;
    McFlags ex_mc;
    example_cmd->add_option("--out", ex_out, "Output path (default stdout)");
    ex_mc.attach(example_cmd);
    example_cmd->add_option("--format", ex_format, "text|json|csv")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*interval_cmd) {
            const Counts c1(iv_x1, iv_n1);
            const Counts c2(iv_x2, iv_n2);
            const IntervalOptions opts{iv_mc.config(), iv_clip ? Clip::unit : Clip::none};
            const auto est = compute_interval(iv_method, c1, c2, iv_level, opts);
            OutputRecord rec;
            rec.add("method", std::string(method_name(iv_method)))
                .add("x1", std::int64_t{iv_x1})
                .add("n1", std::int64_t{iv_n1})
                .add("x2", std::int64_t{iv_x2})
                .add("n2", std::int64_t{iv_n2})
                .add("level", iv_level)
                .add("seed", static_cast<std::int64_t>(iv_mc.seed))
                .add("samples", static_cast<std::int64_t>(iv_mc.samples))
                .add("clip", iv_clip)
                .add("lower", est.lower)
                .add("upper", est.upper)
                .add("length", est.length())
                .add("fallback", est.fallback);
            emit(std::cout, {rec}, iv_format);
        } else if (*coverage_cmd) {
            const Scenario s{cv_n1, cv_n2, Probability(cv_p1), Probability(cv_p2), cv_level};
            CoverageOptions opts;
            opts.interval = {cv_mc.config(), cv_clip ? Clip::unit : Clip::none};
            opts.workers = cv_threads;
            const auto r = exact_coverage(cv_method, s, opts);
            OutputRecord rec;
            rec.add("method", std::string(method_name(cv_method)))
                .add("n1", std::int64_t{cv_n1})
                .add("n2", std::int64_t{cv_n2})
                .add("p1", cv_p1)
                .add("p2", cv_p2)
                .add("level", cv_level)
                .add("seed", static_cast<std::int64_t>(cv_mc.seed))
                .add("samples", static_cast<std::int64_t>(cv_mc.samples))
                .add("clip", cv_clip)
                .add("cr", r.cr)
                .add("le", r.le)
                .add("cells", static_cast<std::int64_t>(r.cells))
                .add("fallback_mass", r.fallback_mass);
            emit(std::cout, {rec}, cv_format);
        } else if (*table_cmd) {
            Sink sink(tb_out);
            const int n = tb_which == 2 ? 10 : 20;
            std::vector<Scenario> rows;
            for (const auto& r : table_rows) rows.push_back({n, n, Probability(r.p1), Probability(r.p2), 0.95});
            CoverageOptions opts;
            opts.interval.mc = tb_mc.config();
            opts.workers = tb_threads;
            const auto table = table_sweep(rows, all_methods, opts);
            std::vector<OutputRecord> records;
            for (const auto& e : table) {
                OutputRecord rec;
                rec.add("p1", e.scenario.p1.value())
                    .add("p2", e.scenario.p2.value())
                    .add("method", std::string(method_name(e.method)))
                    .add("cr", e.result.cr)
                    .add("le", e.result.le);
                records.push_back(std::move(rec));
            }
            emit(sink.stream(), records, Format::csv);
            sink.finish();
        } else if (*example_cmd) {
            Sink sink(ex_out);
            const Counts c1(9, 29);
            const Counts c2(5, 31);
            const IntervalOptions opts{ex_mc.config(), Clip::none};
            std::vector<IntervalEstimate> ests;
            for (Method m : all_methods) ests.push_back(compute_interval(m, c1, c2, 0.95, opts));

            if (ex_format == Format::text) {
                auto& os = sink.stream();
                os << "x1=9 n1=29 x2=5 n2=31 level=0.95 seed=" << ex_mc.seed << " samples=" << ex_mc.samples
                   << '\n';
                char line[160];
                std::snprintf(line, sizeof line, "%-12s", "");
                os << line;
                for (const auto& e : ests) {
                    std::snprintf(line, sizeof line, "%9s", std::string(method_tag(e.method)).c_str());
                    os << line;
                }
                os << '\n';
                const std::pair<const char*, double (*)(const IntervalEstimate&)> rows[] = {
                    {"Lower limit", [](const IntervalEstimate& e) { return e.lower; }},
                    {"Upper limit", [](const IntervalEstimate& e) { return e.upper; }},
                    {"Length", [](const IntervalEstimate& e) { return e.length(); }}};
                for (const auto& [label, get] : rows) {
                    std::snprintf(line, sizeof line, "%-12s", label);
                    os << line;
                    for (const auto& e : ests) {
                        std::snprintf(line, sizeof line, "%9s", rounded_number(get(e)).c_str());
                        os << line;
                    }
                    os << '\n';
                }
            } else {
                std::vector<OutputRecord> records;
                for (const auto& e : ests) {
                    OutputRecord rec;
                    rec.add("method", std::string(method_name(e.method)))
                        .add("lower", e.lower)
                        .add("upper", e.upper)
                        .add("length", e.length())
                        .add("fallback", e.fallback);
                    records.push_back(std::move(rec));
                }
                emit(sink.stream(), records, ex_format);
            }
            sink.finish();
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_ok;
}
