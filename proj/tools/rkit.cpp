#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_support.hpp"

using namespace rkit;
using namespace rkit::cli;

namespace {

struct BuildArgs {
    std::string kind = "retrieval";
    std::string input;
    std::string aug_input;
    std::string output;
    std::string seed;
    u32 v = 8;
    u32 b = 0;
    double t = 0;
    u64 universe = kMaxUniverse;
    SlackConstants slack;
    unsigned max_attempts = 64;
    u64 c = 4;
    u64 alpha = 4;
    u64 value_range = 0;
    unsigned packed_k = 0;
    bool allow_small_v = false;
    bool split = false;
    bool small_v = false;
};

RetrievalParams retrieval_params(const BuildArgs& a, u64 n) {
    if (a.b != 0 && a.t != 0) throw UsageError("give either --b or --t, not both");
    auto params = a.t != 0 ? RetrievalParams::from_t(n, a.v, a.t, a.slack)
                           : RetrievalParams::from_b(n, a.v, a.b != 0 ? a.b : 8, a.slack);
    params.universe = a.universe;
    params.max_attempts = a.max_attempts;
    return params;
}

void emit(const nlohmann::ordered_json& j) { std::cout << j.dump() << '\n'; }

int run_build(const BuildArgs& a) {
    const Seed seed = resolve_seed(a.seed);
    if (a.small_v && a.kind != "augmented") throw UsageError("--small-v applies to --kind augmented");
    if (a.kind == "augmented" && a.value_range == 0) throw UsageError("--kind augmented needs --V");
    if (a.kind != "augmented" && !a.aug_input.empty()) throw UsageError("--aug applies to --kind augmented");
    Bytes bytes;
    nlohmann::ordered_json report;
    if (a.kind == "retrieval" || a.kind == "filter") {
        const bool filter = a.kind == "filter";
        auto pairs = read_pairs(a.input, filter);
        if (pairs.empty()) throw UsageError(a.input + ": no input pairs");
        if (a.split) {
            SplitConfig cfg;
            cfg.kind = filter ? SplitKind::filter : SplitKind::retrieval;
            cfg.v = a.v;
            cfg.b = a.b != 0 ? a.b : retrieval_params(a, pairs.size()).ell;
            cfg.slack = a.slack;
            cfg.universe = a.universe;
            std::vector<u64> keys, values;
            for (const auto& kv : pairs) {
                keys.push_back(kv.key);
                values.push_back(kv.value);
            }
            auto s = split_build(cfg, keys, filter ? std::vector<u64>{} : values, {}, seed);
            bytes = s.to_bytes();
            report = to_json(space_report(s));
            report["master_attempts"] = s.stats().master_attempts;
        } else if (filter) {
            std::vector<u64> keys;
            for (const auto& kv : pairs) keys.push_back(kv.key);
            auto f = build_filter(keys, retrieval_params(a, keys.size()), seed);
            bytes = f.to_bytes();
            report = to_json(measure_space(f));
            report["attempts"] = f.inner().attempts();
        } else {
            auto r = build_retrieval(pairs, retrieval_params(a, pairs.size()), seed);
            bytes = r.to_bytes();
            report = to_json(measure_space(r));
            report["attempts"] = r.attempts();
        }
    } else if (a.kind == "augmented") {
        auto pairs = read_pairs(a.input);
        std::vector<u64> aug = a.aug_input.empty() ? std::vector<u64>{} : read_numbers(a.aug_input);
        if (a.split || a.small_v) {
            SplitConfig cfg;
            cfg.kind = a.small_v ? SplitKind::small_v : SplitKind::augmented;
            cfg.c = a.c;
            cfg.alpha = a.alpha;
            cfg.value_range = a.value_range;
            cfg.allow_small_v = a.allow_small_v;
            cfg.universe = a.universe;
            std::vector<u64> keys, values;
            for (const auto& kv : pairs) {
                keys.push_back(kv.key);
                values.push_back(kv.value);
            }
            auto s = split_build(cfg, keys, values, aug, seed);
            bytes = s.to_bytes();
            report = to_json(space_report(s));
            report["master_attempts"] = s.stats().master_attempts;
        } else {
            AugmentedConfig cfg;
            cfg.n = pairs.size() + aug.size();
            cfg.c = a.c;
            cfg.alpha = a.alpha;
            cfg.value_range = a.value_range;
            cfg.universe = a.universe;
            cfg.allow_small_v = a.allow_small_v;
            if (aug.size() * a.c != cfg.n) throw UsageError("augmented values must number exactly n/c");
            auto s = build_augmented(pairs, aug, cfg, seed);
            bytes = s.to_bytes(a.packed_k);
            report = to_json(measure_space(s, a.packed_k));
            report["attempts"] = s.attempts();
        }
    } else {
        throw UsageError("unknown kind '" + a.kind + "'");
    }
    write_file(a.output, bytes);
    report["output"] = a.output;
    report["seed"] = seed.to_hex();
    emit(report);
    return kOk;
}

int run_query(const std::string& path, const std::vector<std::string>& args, bool slots) {
    auto bytes = read_file(path);
    auto view = open_container(bytes);
    auto keys = expand_keys(args);
    std::string out;
    auto line = [&out](u64 x) {
        out += std::to_string(x);
        out += '\n';
    };
    switch (view.kind) {
        case StructureKind::retrieval: {
            if (slots) throw UsageError("--slot needs an augmented container");
            auto r = RetrievalStructure::from_bytes(bytes);
            for (u64 k : keys) line(r.query(k));
            break;
        }
        case StructureKind::filter: {
            if (slots) throw UsageError("--slot needs an augmented container");
            auto f = FilterStructure::from_bytes(bytes);
            for (u64 k : keys) line(f.contains(k) ? 1 : 0);
            break;
        }
        case StructureKind::augmented: {
            auto s = AugmentedStructure::from_bytes(bytes);
            for (u64 k : keys) line(slots ? s.query_aug(k) : s.query_key(k));
            break;
        }
        case StructureKind::split: {
            auto s = SplitStructure::from_bytes(bytes);
            if (slots && !s.config().augmented()) throw UsageError("--slot needs an augmented container");
            for (u64 k : keys) {
                if (slots) line(s.query_aug(k));
                else if (s.kind() == SplitKind::filter) line(s.contains(k) ? 1 : 0);
                else line(s.query(k));
            }
            break;
        }
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return kOk;
}

struct SweepArgs {
    std::string kind = "retrieval";
    std::string input;
    std::string seed;
    u64 n = 1 << 12;
    u32 v = 8;
    std::vector<u32> bs{4, 8, 12, 16};
    u64 seeds = 1;
    unsigned max_attempts = 64;
    SlackConstants slack;
};

int run_sweep(const SweepArgs& a) {
    const Seed seed = resolve_seed(a.seed);
    if (a.kind != "retrieval" && a.kind != "filter") throw UsageError("sweep supports --kind retrieval or filter");
    if (a.seeds == 0) throw UsageError("--seeds must be positive");
    const bool filter = a.kind == "filter";
    std::vector<KeyValue> pairs;
    if (!a.input.empty()) {
        pairs = read_pairs(a.input, filter);
    } else {
        pairs = generate_pairs(seed.derive(Domain::sample, 0), a.n, a.v);
    }
    std::cout << kCsvHeader << '\n';
    for (u32 b : a.bs) {
        SweepRow row;
        try {
            row = sweep_point(pairs, filter, a.v, b, a.slack, seed, a.seeds, a.max_attempts);
        } catch (const ConfigError& e) {
            row.b = b;
            std::cerr << "b=" << b << ": " << e.what() << '\n';
        }
        std::cout << to_csv(row) << '\n';
    }
    return kOk;
}

int run_validate(const std::vector<std::string>& suites, bool fault, const std::string& seed_flag, bool list) {
    if (list) {
        for (const auto& c : validation_checks()) std::cout << c.suite << '\t' << c.name << '\n';
        return kOk;
    }
    ValidationOptions opt;
    opt.seed = resolve_seed(seed_flag);
    opt.inject_fault = fault;
    auto records = run_validation(suites, opt);
    bool all = true;
    for (const auto& r : records) {
        emit(to_json(r));
        all = all && r.passed;
    }
    return all ? kOk : kValidation;
}

int run_fpr(const std::string& path, u64 samples, const std::string& seed_flag) {
    auto bytes = read_file(path);
    auto view = open_container(bytes);
    std::function<bool(u64)> contains;
    std::optional<FilterStructure> f;
    std::optional<SplitStructure> s;
    u32 v = 0;
    if (view.kind == StructureKind::filter) {
        f = FilterStructure::from_bytes(bytes);
        v = f->v();
        contains = [&](u64 k) { return f->contains(k); };
    } else if (view.kind == StructureKind::split) {
        s = SplitStructure::from_bytes(bytes);
        if (s->kind() != SplitKind::filter) throw UsageError("fpr needs a filter container");
        v = s->config().v;
        contains = [&](u64 k) { return s->contains(k); };
    } else {
        throw UsageError("fpr needs a filter container");
    }
    if (samples == 0) throw UsageError("--samples must be positive");
    SeedStream stream(resolve_seed(seed_flag), Domain::sample, samples);
    u64 hits = 0;
    for (u64 i = 0; i < samples; ++i) hits += contains(stream.below(kMaxUniverse));
    auto est = MonteCarloEstimate::of(hits, samples);
    nlohmann::ordered_json j;
    j["samples"] = samples;
    j["positives"] = hits;
    j["fpr"] = est.rate;
    j["std_error"] = est.std_error;
    j["epsilon"] = std::ldexp(1.0, -static_cast<int>(v));
    j["note"] = "samples are uniform over the universe and may include stored keys";
    emit(j);
    return kOk;
}

int run_gen(u64 n, u32 v, const std::string& seed_flag) {
    auto pairs = generate_pairs(resolve_seed(seed_flag).derive(Domain::sample, 0), n, v);
    std::string out;
    for (const auto& kv : pairs) {
        out += std::to_string(kv.key);
        out += '\t';
        out += std::to_string(kv.value);
        out += '\n';
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return kOk;
}

void add_slack(CLI::App* cmd, SlackConstants& slack) {
    cmd->add_option("--c1", slack.c1, "Slack multiplier C1")->capture_default_str();
    cmd->add_option("--c2", slack.c2, "Slack exponent divisor C2")->capture_default_str();
    cmd->add_option("--c3", slack.c3, "Logarithmic slack C3")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static retrieval, augmented retrieval and filter structures"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rkit 1.0");

    BuildArgs build;
    auto* cmd_build = app.add_subcommand("build", "Build a structure from key<TAB>value lines");
    cmd_build->add_option("--kind", build.kind, "retrieval | filter | augmented")
        ->check(CLI::IsMember({"retrieval", "filter", "augmented"}))
        ->capture_default_str();
    cmd_build->add_option("-i,--input", build.input, "Input file of key<TAB>value lines")->required();
    cmd_build->add_option("-o,--output", build.output, "Container file to write")->required();
    cmd_build->add_option("--aug", build.aug_input, "Augmented slot values, one per line");
    cmd_build->add_option("--seed", build.seed, "64 hex digits (default from RKIT_SEED)");
    cmd_build->add_option("--v", build.v, "Bits per value or fingerprint")->capture_default_str();
    cmd_build->add_option("--b", build.b, "Redundancy knob b = floor(64 t / v) (default 8)");
    cmd_build->add_option("--t", build.t, "Query time knob t; sets b = floor(64 t / v)");
    cmd_build->add_option("--universe", build.universe, "Key universe bound U")->capture_default_str();
    cmd_build->add_option("--max-attempts", build.max_attempts, "Seeds tried before giving up")->capture_default_str();
    add_slack(cmd_build, build.slack);
    cmd_build->add_option("--c", build.c, "Augmented: one slot per c memory words")->capture_default_str();
    cmd_build->add_option("--alpha", build.alpha, "Augmented: entry multiplier")->capture_default_str();
    cmd_build->add_option("--V", build.value_range, "Augmented: values lie in [0, V)");
    cmd_build->add_option("--packed", build.packed_k, "Augmented: store memory in groups of k base-p digits");
    cmd_build->add_flag("--allow-small-v", build.allow_small_v, "Augmented: permit V < n^3");
    cmd_build->add_flag("--split", build.split, "Build through the bucket split layer");
    cmd_build->add_flag("--small-v", build.small_v, "Augmented: small-V split with seed groups");

    std::string query_path;
    std::vector<std::string> query_keys;
    bool query_slots = false;
    auto* cmd_query = app.add_subcommand("query", "Answer queries against a container");
    cmd_query->add_option("container", query_path, "Container file")->required();
    cmd_query->add_option("keys", query_keys, "Keys, or @file with one key per line")->required();
    cmd_query->add_flag("--slot", query_slots, "Treat inputs as augmented slot indices");

    SweepArgs sweep;
    auto* cmd_sweep = app.add_subcommand("sweep", "Space/time tradeoff over b, as CSV");
    cmd_sweep->add_option("--kind", sweep.kind, "retrieval | filter")
        ->check(CLI::IsMember({"retrieval", "filter"}))
        ->capture_default_str();
    cmd_sweep->add_option("-i,--input", sweep.input, "Input pairs (default: n random pairs)");
    cmd_sweep->add_option("--n", sweep.n, "Random pair count")->capture_default_str();
    cmd_sweep->add_option("--v", sweep.v, "Bits per value")->capture_default_str();
    cmd_sweep->add_option("--b", sweep.bs, "Comma-separated b values")->delimiter(',')->capture_default_str();
    cmd_sweep->add_option("--seeds", sweep.seeds, "Repetitions per point")->capture_default_str();
    cmd_sweep->add_option("--seed", sweep.seed, "64 hex digits (default from RKIT_SEED)");
    cmd_sweep->add_option("--max-attempts", sweep.max_attempts, "Seeds tried per build")->capture_default_str();
    add_slack(cmd_sweep, sweep.slack);

    std::vector<std::string> suites;
    bool fault = false;
    bool list = false;
    std::string validate_seed;
    auto* cmd_validate = app.add_subcommand("validate", "Run oracle checks; one JSON record per check");
    cmd_validate->add_option("--suite", suites, "Suite or check names (default: all)");
    cmd_validate->add_flag("--inject-fault", fault, "Corrupt one payload bit before checking");
    cmd_validate->add_flag("--list", list, "List registered checks");
    cmd_validate->add_option("--seed", validate_seed, "64 hex digits (default from RKIT_SEED)");

    std::string fpr_path;
    u64 fpr_samples = 1000000;
    std::string fpr_seed;
    auto* cmd_fpr = app.add_subcommand("fpr", "Monte-Carlo false-positive rate of a filter");
    cmd_fpr->add_option("container", fpr_path, "Filter container")->required();
    cmd_fpr->add_option("--samples", fpr_samples, "Random probes")->capture_default_str();
    cmd_fpr->add_option("--seed", fpr_seed, "64 hex digits (default from RKIT_SEED)");

    u64 gen_n = 1000;
    u32 gen_v = 8;
    std::string gen_seed;
    auto* cmd_gen = app.add_subcommand("gen", "Print random key<TAB>value lines");
    cmd_gen->add_option("--n", gen_n, "Pair count")->capture_default_str();
    cmd_gen->add_option("--v", gen_v, "Bits per value")->check(CLI::Range(1, 64))->capture_default_str();
    cmd_gen->add_option("--seed", gen_seed, "64 hex digits (default from RKIT_SEED)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*cmd_build) return run_build(build);
        if (*cmd_query) return run_query(query_path, query_keys, query_slots);
        if (*cmd_sweep) return run_sweep(sweep);
        if (*cmd_validate) return run_validate(suites, fault, validate_seed, list);
        if (*cmd_fpr) return run_fpr(fpr_path, fpr_samples, fpr_seed);
        if (*cmd_gen) return run_gen(gen_n, gen_v, gen_seed);
    } catch (const Error& e) {
        std::cerr << "rkit: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "rkit: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}
