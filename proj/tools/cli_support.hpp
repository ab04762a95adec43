#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rkit/rkit.hpp"

namespace rkit::cli {

inline constexpr const char* kSeedEnv = "RKIT_SEED";
inline constexpr const char* kCsvHeader = "b,t,m,attempts,build_success_rate,total_bits,redundancy_bits,mean_query_words";

enum ExitCode : int { kOk = 0, kUsage = 2, kBuildFailure = 3, kIntegrity = 4, kValidation = 5 };

inline int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::build_failure: return kBuildFailure;
        case ErrorKind::integrity: return kIntegrity;
        default: return kUsage;
    }
}

// --seed wins, then the environment, then the all-zero seed.
inline Seed resolve_seed(const std::string& flag) {
    if (!flag.empty()) return Seed::from_hex(flag);
    if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
        try {
            return Seed::from_hex(env);
        } catch (const UsageError& e) {
            throw UsageError(std::string(kSeedEnv) + ": " + e.what());
        }
    }
    return Seed{};
}

inline u64 parse_u64(std::string_view text, const std::string& where) {
    u64 x = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size())
        throw UsageError(where + ": expected an unsigned decimal integer, got '" + std::string(text) + "'");
    return x;
}

inline std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

// key<TAB>value lines; blank lines are skipped. value_optional accepts bare keys (value 0).
inline std::vector<KeyValue> parse_pairs(std::istream& in, const std::string& name, bool value_optional = false) {
    std::vector<KeyValue> out;
    std::string line;
    u64 lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim_cr(line);
        if (view.empty()) continue;
        std::string where = name + ":" + std::to_string(lineno);
        auto tab = view.find('\t');
        if (tab == std::string_view::npos) {
            if (!value_optional) throw UsageError(where + ": expected key<TAB>value");
            out.push_back({parse_u64(view, where), 0});
            continue;
        }
        if (view.find('\t', tab + 1) != std::string_view::npos) throw UsageError(where + ": more than two fields");
        out.push_back({parse_u64(view.substr(0, tab), where), parse_u64(view.substr(tab + 1), where)});
    }
    return out;
}

inline std::vector<KeyValue> read_pairs(const std::string& path, bool value_optional = false) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    return parse_pairs(in, path, value_optional);
}

// One unsigned decimal per line.
inline std::vector<u64> read_numbers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::vector<u64> out;
    std::string line;
    u64 lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim_cr(line);
        if (view.empty()) continue;
        out.push_back(parse_u64(view, path + ":" + std::to_string(lineno)));
    }
    return out;
}

// Positional arguments: decimal keys or @file with one key per line.
inline std::vector<u64> expand_keys(const std::vector<std::string>& args) {
    std::vector<u64> out;
    for (const auto& a : args) {
        if (!a.empty() && a[0] == '@') {
            auto part = read_numbers(a.substr(1));
            out.insert(out.end(), part.begin(), part.end());
        } else {
            out.push_back(parse_u64(a, "argument"));
        }
    }
    return out;
}

inline nlohmann::ordered_json to_json(const SpaceReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = r.kind;
    j["n"] = r.n;
    j["payload_bits"] = r.payload_bits;
    j["rank_bits"] = r.rank_bits;
    j["dict_bits"] = r.dict_bits;
    j["seed_bits"] = r.seed_bits;
    j["overhead_bits"] = r.overhead_bits;
    j["total_bits"] = r.total_bits;
    j["info_bits"] = r.info_bits;
    j["redundancy_bits"] = r.redundancy();
    return j;
}

inline nlohmann::ordered_json to_json(const SplitSpaceReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = std::string("split_") + r.kind;
    j["n"] = r.n;
    j["bucket_count"] = r.bucket_count;
    j["seed_bits"] = r.seed_bits;
    j["pointer_bits"] = r.pointer_bits;
    j["group_index_bits"] = r.group_index_bits;
    j["header_bits"] = r.header_bits;
    j["capacity_slack_bits"] = r.capacity_slack_bits;
    j["capacity_slack_slots"] = r.capacity_slack_slots;
    j["per_bucket_redundancy_bits"] = r.per_bucket_redundancy_bits;
    j["value_rounding_bits"] = r.value_rounding_bits;
    j["total_bits"] = r.total_bits;
    j["info_bits"] = r.info_bits;
    j["redundancy_bits"] = r.redundancy();
    return j;
}

inline nlohmann::ordered_json to_json(const CheckRecord& r) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["suite"] = r.suite;
    j["statistic"] = r.statistic;
    j["bound"] = r.bound;
    j["relation"] = r.relation;
    j["pass"] = r.passed;
    j["detail"] = r.detail;
    return j;
}

struct SweepRow {
    u32 b = 0;
    double t = 0;
    u32 m = 0;
    u64 attempts = 0;
    double build_success_rate = 0;
    bool built = false;  // at least one seed succeeded
    double total_bits = 0;
    double redundancy_bits = 0;
    double mean_query_words = 0;
};

inline std::string format_number(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string to_csv(const SweepRow& r) {
    std::ostringstream os;
    os << r.b << ',' << format_number(r.t) << ',' << r.m << ',' << r.attempts << ',' << format_number(r.build_success_rate)
       << ',';
    if (r.built) {
        os << format_number(r.total_bits) << ',' << format_number(r.redundancy_bits) << ','
           << format_number(r.mean_query_words);
    } else {
        os << ",,";
    }
    return os.str();
}

// Seed of the i-th sweep repetition; repetition 0 uses the master seed itself.
inline Seed sweep_seed(const Seed& master, u64 i) { return i == 0 ? master : master.derive(Domain::sample, i); }

// n distinct random keys below the universe with v-bit values.
inline std::vector<KeyValue> generate_pairs(const Seed& seed, u64 n, u32 v, u64 universe = kMaxUniverse) {
    if (n > universe) throw UsageError("cannot draw more distinct keys than the universe holds");
    SeedStream s(seed, Domain::sample, n);
    std::vector<u64> keys;
    keys.reserve(n);
    std::unordered_set<u64> seen;
    seen.reserve(n);
    while (keys.size() < n) {
        u64 k = s.below(universe);
        if (seen.insert(k).second) keys.push_back(k);
    }
    std::vector<KeyValue> out;
    out.reserve(n);
    for (u64 k : keys) out.push_back({k, s.next() & low_mask(v)});
    return out;
}

// One sweep point: builds under each repetition seed and aggregates the measurements.
inline SweepRow sweep_point(const std::vector<KeyValue>& pairs, bool filter, u32 v, u32 b, const SlackConstants& slack,
                            const Seed& master, u64 seeds, unsigned max_attempts) {
    SweepRow row;
    auto params = RetrievalParams::from_b(pairs.size(), v, b, slack);
    params.max_attempts = max_attempts;
    row.b = b;
    row.t = params.t();
    row.m = params.m;
    u64 successes = 0;
    double words = 0;
    u64 queries = 0;
    for (u64 i = 0; i < seeds; ++i) {
        Seed seed = sweep_seed(master, i);
        try {
            SpaceReport rep;
            const RetrievalStructure* inner = nullptr;
            std::optional<FilterStructure> f;
            std::optional<RetrievalStructure> r;
            if (filter) {
                std::vector<u64> keys;
                keys.reserve(pairs.size());
                for (const auto& kv : pairs) keys.push_back(kv.key);
                f = build_filter(keys, params, seed);
                rep = measure_space(*f);
                inner = &f->inner();
            } else {
                r = build_retrieval(pairs, params, seed);
                rep = measure_space(*r);
                inner = &*r;
            }
            row.attempts += inner->attempts();
            ++successes;
            row.total_bits += static_cast<double>(rep.total_bits);
            row.redundancy_bits += rep.redundancy();
            for (const auto& kv : pairs) {
                QueryStats qs;
                (void)inner->query(kv.key, &qs);
                words += qs.payload_words;
            }
            queries += pairs.size();
        } catch (const BuildFailure& e) {
            row.attempts += e.attempts();
        }
    }
    row.build_success_rate = row.attempts == 0 ? 0 : static_cast<double>(successes) / static_cast<double>(row.attempts);
    row.built = successes > 0;
    if (row.built) {
        row.total_bits /= static_cast<double>(successes);
        row.redundancy_bits /= static_cast<double>(successes);
        row.mean_query_words = words / static_cast<double>(queries);
    }
    return row;
}

}  // namespace rkit::cli
