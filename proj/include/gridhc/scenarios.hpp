#pragma once

// Uniform-random PV placement scenarios and their injection indicator vectors.
// Scenario i is drawn from a counter-based stream (study seed, i), so the
// sequence is reproducible and independent of evaluation order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gridhc/errors.hpp"
#include "gridhc/netmodel.hpp"

namespace gridhc {

struct Scenario {
    std::vector<int> omega; // sorted distinct load indices hosting PV
    std::int64_t seed_id = 0;

    int n_gen() const { return static_cast<int>(omega.size()); }
};

struct IndicatorVector {
    RealVector lambda; // length 3(N_bus-1), entries in {0,1}; q rows are implicitly zero
};

/// Deterministic per-scenario engine. mt19937_64 and the rejection draw below
/// are fully specified, so streams match across platforms and stdlibs.
class ScenarioRng {
public:
    ScenarioRng(std::uint64_t study_seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(study_seed),
                          static_cast<std::uint32_t>(study_seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n), by rejection.
    int bounded(int n) {
        auto m = static_cast<std::uint64_t>(n);
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % m;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<int>(x % m);
    }

private:
    std::mt19937_64 engine_;
};

/// Uniform sample of n_gen distinct load indices (partial Fisher-Yates).
inline Scenario sample_scenario(ScenarioRng& rng, int n_lds, int n_gen) {
    require(n_gen >= 1 && n_gen <= n_lds, ErrorCode::validation,
            "n_gen must be in [1, " + std::to_string(n_lds) + "], got " + std::to_string(n_gen));
    std::vector<int> pool(static_cast<std::size_t>(n_lds));
    std::iota(pool.begin(), pool.end(), 0);
    for (int j = 0; j < n_gen; ++j) {
        int r = j + rng.bounded(n_lds - j);
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(r)]);
    }
    Scenario s;
    s.omega.assign(pool.begin(), pool.begin() + n_gen);
    std::sort(s.omega.begin(), s.omega.end());
    return s;
}

inline std::vector<Scenario> sample_scenario_set(std::uint64_t study_seed, int n_mc, int n_lds,
                                                 int n_gen) {
    require(n_mc >= 1, ErrorCode::validation, "n_mc must be at least 1");
    std::vector<Scenario> set;
    set.reserve(static_cast<std::size_t>(n_mc));
    for (int i = 0; i < n_mc; ++i) {
        ScenarioRng rng(study_seed, static_cast<std::uint64_t>(i));
        Scenario s = sample_scenario(rng, n_lds, n_gen);
        s.seed_id = i;
        set.push_back(std::move(s));
    }
    return set;
}

/// Lambda with a 1 at the node row of every selected load; PV injects real
/// power only, so the q block stays zero.
inline IndicatorVector indicator(const Scenario& s, const NodeOrdering& ordering) {
    IndicatorVector ind;
    ind.lambda = RealVector::Zero(ordering.n_l_rows());
    for (int load : s.omega) {
        require(load >= 0 && load < static_cast<int>(ordering.load_node_rows.size()),
                ErrorCode::validation, "scenario references unmapped load index " + std::to_string(load));
        ind.lambda[ordering.load_node_rows[static_cast<std::size_t>(load)]] = 1.0;
    }
    return ind;
}

inline double penetration(int n_gen, int n_lds) {
    require(n_lds > 0, ErrorCode::validation, "n_lds must be positive");
    return static_cast<double>(n_gen) / static_cast<double>(n_lds);
}

/// Nearest integer generator count for a penetration fraction, at least 1.
inline int n_gen_for_penetration(double n_pen, int n_lds) {
    require(n_pen > 0.0 && n_pen <= 1.0, ErrorCode::validation,
            "penetration must be in (0, 1]");
    auto n = static_cast<int>(std::llround(n_pen * n_lds));
    return std::clamp(n, 1, n_lds);
}

} // namespace gridhc
