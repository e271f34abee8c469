// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------
//
// Invariant battery behind `manoma check`: surrogate dominance and tightness, curvature
// domination, channel-constant identities and an end-to-end feasibility run. Targets are
// evaluated from channel primitives, never from the surrogate code under test.

#ifndef MANOMA_CHECKS_HPP
#define MANOMA_CHECKS_HPP

#include "manoma/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace manoma
{

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckOptions
{
    std::uint64_t seed = 1;
    int samples = 1000;        // per surrogate
    int hessian_points = 50;   // per curvature instance
    bool run_optimizer = true; // end-to-end run on `config`
};

std::vector<CheckResult> run_checks(const SystemConfig &config, const CheckOptions &options = {});

} // namespace manoma

#endif
