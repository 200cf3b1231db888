#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "permlens/ir.hpp"

namespace permlens {

struct corpus_spec {
    uint64_t seed = 42;
    int model_count = 10;
    std::pair<int, int> class_count{3, 8};
    std::pair<int, int> methods_per_class{1, 4};
    double call_density = 0.5;
    int permission_count = 6;
    double pep_density = 0.3;
    double cycle_probability = 0.3;
    int proxy_count = 0;
    int service_count = 1;
    int apps_per_model = 2;

    void check() const;  // throws std::invalid_argument on bad ranges
};

struct generated_model {
    framework_model fw;
    std::vector<app_model> apps;
};

// Deterministic under the seed. Every generated model passes validation; the
// corpus as a whole populates all five string-resolution categories and, when
// cycle_probability is 1, every model contains an SCC of size >= 2.
std::vector<generated_model> generate_corpus(const corpus_spec& spec);

}  // namespace permlens
