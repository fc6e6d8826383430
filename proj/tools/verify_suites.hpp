#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loopforge/chain.hpp"

namespace loopforge::verify {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<std::string> suite_names();

// Runs one suite (or "all"); checks may execute on a worker pool but the
// returned order is deterministic.  `tolerance` overrides the default
// 1e-10 threshold of the exact-identity checks.
std::vector<Check> run_suite(const std::string& suite, std::uint64_t seed, int workers,
                             double tolerance = 1e-10);

// fomin suite against a user graph with four boundary points x1,x2,y1,y2
std::vector<Check> run_fomin_on(const WeightedChain& chain, const std::vector<VertexId>& points);

} // namespace loopforge::verify
