// Builds each structure kind over a small key set and prints answers and space usage.

#include <iostream>
#include <vector>

#include "rkit/rkit.hpp"

int main() {
    using namespace rkit;
    const Seed seed = Seed::from_u64(2024);

    std::vector<KeyValue> pairs;
    for (u64 i = 0; i < 1000; ++i) pairs.push_back({i * 7919 + 13, i % 256});

    auto retrieval = build_retrieval(pairs, RetrievalParams::from_b(pairs.size(), 8, 8), seed);
    auto rep = measure_space(retrieval);
    std::cout << "retrieval: key " << pairs[5].key << " -> " << query(retrieval, pairs[5].key) << ", "
              << rep.total_bits << " bits for " << rep.info_bits << " bits of values\n";

    std::vector<u64> keys;
    for (const auto& kv : pairs) keys.push_back(kv.key);
    auto filter = build_filter(keys, RetrievalParams::from_b(keys.size(), 8, 8), seed);
    std::cout << "filter: stored key " << (query_filter(filter, keys[0]) ? "present" : "absent") << ", key 1 "
              << (query_filter(filter, 1) ? "present (false positive)" : "absent") << ", epsilon " << filter.epsilon()
              << "\n";

    AugmentedConfig cfg;
    cfg.n = 64;
    cfg.c = 4;
    cfg.value_range = 64 * 64 * 64;
    std::vector<KeyValue> few(pairs.begin(), pairs.begin() + 48);
    std::vector<u64> slots(16);
    for (u64 j = 0; j < slots.size(); ++j) slots[j] = 1000 + j;
    auto aug = build_augmented(few, slots, cfg, seed);
    std::cout << "augmented: slot 3 -> " << query_aug(aug, 3) << ", key " << few[0].key << " -> "
              << query_key(aug, few[0].key) << ", memory " << aug.memory().size() << " elements mod "
              << aug.field_order() << "\n";

    SplitConfig split;
    std::vector<u64> values;
    for (const auto& kv : pairs) values.push_back(kv.value);
    auto s = split_build(split, keys, values, {}, seed);
    auto srep = space_report(s);
    std::cout << "split: " << s.bucket_count() << " bucket(s), key " << keys[9] << " -> " << s.query(keys[9]) << ", "
              << srep.total_bits << " bits\n";
    return 0;
}
