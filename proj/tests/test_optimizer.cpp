// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/optimizer.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace manoma;

namespace
{

SystemConfig small(std::uint64_t seed, int M = 4, int N = 3, int L = 4)
{
    SystemConfig c;
    c.num_bs_antennas = M;
    c.num_users = N;
    c.num_paths = L;
    c.rng_seed = seed;
    c.outer_iters = 8;
    return c;
}

// SIC throughput from the oracle channel at the returned layout
double oracle_throughput(const SystemConfig &c, const std::vector<UserGeometry> &users, const OptimizerState &s)
{
    const Eigen::MatrixXcd H =
        oracle::channels(users, s.layout.bs_positions, s.layout.user_positions, c.wavelength);
    return oracle::throughput(H, s.design.V, c.noise_power);
}

} // namespace

TEST(Optimizer, InitialPointIsFeasible)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        SystemConfig c;
        c.rng_seed = seed;
        const auto users = sample_geometry(c);
        const OptimizerState s = initialize_feasible(c, users);
        const FeasibilityReport rep = check_feasibility(c, users, s);
        EXPECT_TRUE(rep.feasible) << "seed " << seed << ": " << rep.detail;
        EXPECT_LE(s.design.total_power(), c.power_budget);
        const Eigen::MatrixXcd H = oracle::channels(users, s.layout.bs_positions, s.layout.user_positions, c.wavelength);
        EXPECT_TRUE(mrt_chain_holds(H, s.design.V, c.mrt_coefficient, 0.0));
        // aux rates never exceed the achieved ones
        for (int k = 0; k < c.num_users; ++k)
            EXPECT_LE(std::log2(s.aux.r[k]), oracle::rate(H, s.design.V, k, c.noise_power) + 1e-12);
    }
}

TEST(Optimizer, InitialPointOnSparseChannels)
{
    // two paths leave some MRT beams nearly orthogonal to other users (seed 16 is such a case)
    SystemConfig c;
    c.num_paths = 2;
    for (std::uint64_t seed = 0; seed < 40; ++seed)
    {
        c.rng_seed = seed;
        const auto users = sample_geometry(c);
        OptimizerState s;
        ASSERT_NO_THROW(s = initialize_feasible(c, users)) << "seed " << seed;
        EXPECT_TRUE(check_feasibility(c, users, s).feasible) << "seed " << seed;
    }
}

TEST(Optimizer, InitRejectsCrowdedGrid)
{
    SystemConfig c = small(0);
    c.num_bs_antennas = 9;
    c.bs_region = 0.5 * c.wavelength; // 3 x 3 lattice with quarter-wavelength spacing
    EXPECT_THROW(initialize_feasible(c, sample_geometry(c)), std::invalid_argument);
}

TEST(Optimizer, CheckerFlagsViolations)
{
    const SystemConfig c = small(1);
    const auto users = sample_geometry(c);
    OptimizerState s = initialize_feasible(c, users);
    ASSERT_TRUE(check_feasibility(c, users, s).feasible);

    OptimizerState loud = s;
    loud.design.V *= 1.01 * std::sqrt(c.power_budget / s.design.total_power());
    EXPECT_FALSE(check_feasibility(c, users, loud).feasible);

    OptimizerState crowded = s;
    crowded.layout.bs_positions.row(1) = crowded.layout.bs_positions.row(0);
    crowded.layout.bs_positions(1, 0) += 0.4 * c.wavelength;
    EXPECT_FALSE(check_feasibility(c, users, crowded).feasible);

    OptimizerState outside = s;
    outside.layout.user_positions(0, 0) = c.user_region;
    EXPECT_FALSE(check_feasibility(c, users, outside).feasible);

    OptimizerState greedy = s;
    greedy.aux.r[0] *= 100.0;
    EXPECT_FALSE(check_feasibility(c, users, greedy).feasible);
}

TEST(Optimizer, BlocksKeepFeasibilityAndImprove)
{
    const SystemConfig c = small(2);
    const auto users = sample_geometry(c);
    OptimizerOptions o;
    o.verify_surrogates = true;
    o.check_feasibility = true;
    OptimizerState s = initialize_feasible(c, users);
    double last = aux_objective(s.aux);

    EXPECT_GE(solve_p2(s, c, users, o), 1);
    EXPECT_GE(aux_objective(s.aux), last - 1e-9);
    last = aux_objective(s.aux);
    EXPECT_TRUE(check_feasibility(c, users, s).feasible);

    solve_p3(s, c, users, o);
    EXPECT_GE(aux_objective(s.aux), last - 1e-9);
    last = aux_objective(s.aux);
    EXPECT_TRUE(user_positions_valid(c, s.layout.user_positions));

    for (int m = 0; m < c.num_bs_antennas; ++m)
    {
        solve_p4m(s, c, users, m, o);
        EXPECT_GE(aux_objective(s.aux), last - 1e-9);
        last = aux_objective(s.aux);
        EXPECT_TRUE(bs_positions_valid(c, s.layout.bs_positions)) << "antenna " << m;
    }
    const FeasibilityReport rep = check_feasibility(c, users, s);
    EXPECT_TRUE(rep.feasible) << rep.detail;
    EXPECT_LE(aux_objective(s.aux), oracle_throughput(c, users, s) + 1e-9);
}

TEST(Optimizer, TraceIsMonotoneAndResultConsistent)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        const SystemConfig c = small(seed);
        const auto users = sample_geometry(c);
        const OptimizeResult r = optimize(c, users);
        const auto &t = r.state.objective_trace;
        ASSERT_GE(t.size(), 2u);
        for (size_t i = 1; i < t.size(); ++i)
            EXPECT_GE(t[i], t[i - 1] - 1e-8);
        EXPECT_LE(r.counts.outer, c.outer_iters);
        // the loop stopped on a small step, which the trace still shows
        if (r.counts.outer < c.outer_iters)
            EXPECT_LT(t[r.counts.outer] - t[r.counts.outer - 1], c.convergence_tol_outer);
        EXPECT_NEAR(r.throughput, oracle_throughput(c, users, r.state), 1e-9);
        EXPECT_NEAR(r.per_user_rates.sum(), r.throughput, 1e-9);
        EXPECT_GE(r.throughput, t.back() - 1e-9);
        EXPECT_TRUE(check_feasibility(c, users, r.state).feasible);
        EXPECT_EQ(r.trace.front().subproblem, "init");
    }
}

TEST(Optimizer, SingleUserReachesShannonBound)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        SystemConfig c = small(seed, 4, 1, 4);
        const auto users = sample_geometry(c);
        const OptimizeResult r = optimize(c, users);
        const Eigen::VectorXcd h = oracle::channel(users[0], r.state.layout.bs_positions,
                                                   r.state.layout.user_positions.row(0).transpose(), c.wavelength);
        const double bound = std::log2(1.0 + c.power_budget * h.squaredNorm() / c.noise_power);
        EXPECT_NEAR(r.throughput, bound, 1e-3) << "seed " << seed;
    }
}

TEST(Optimizer, SinglePathIsPositionInvariant)
{
    SystemConfig c = small(5, 4, 1, 1);
    const auto users = sample_geometry(c);
    const OptimizeResult moved = optimize(c, users);
    OptimizerOptions fixed;
    fixed.optimize_bs = fixed.optimize_users = false;
    const OptimizeResult still = optimize(c, users, fixed);
    const Eigen::VectorXcd h = oracle::channel(users[0], uniform_bs_grid(c), Position::Zero(), c.wavelength);
    const double bound = std::log2(1.0 + c.power_budget * h.squaredNorm() / c.noise_power);
    EXPECT_NEAR(moved.throughput, bound, 1e-3);
    EXPECT_NEAR(still.throughput, bound, 1e-3);
}

TEST(Optimizer, DegenerateUserRegionLeavesUsersInPlace)
{
    SystemConfig c = small(6);
    c.user_region = 0.0;
    const auto users = sample_geometry(c);
    const OptimizeResult r = optimize(c, users);
    EXPECT_EQ(r.state.layout.user_positions, centered_user_positions(c));
    EXPECT_EQ(r.counts.user, 0);
    OptimizerOptions o;
    o.optimize_users = false;
    const OptimizeResult ref = optimize(c, users, o);
    EXPECT_NEAR(r.throughput, ref.throughput, 1e-9);
}

TEST(Optimizer, Deterministic)
{
    const SystemConfig c = small(7);
    const auto users = sample_geometry(c);
    const OptimizeResult a = optimize(c, users), b = optimize(c, users);
    EXPECT_EQ(a.throughput, b.throughput);
    EXPECT_EQ(a.state.objective_trace, b.state.objective_trace);
    EXPECT_EQ(a.state.layout.bs_positions, b.state.layout.bs_positions);
}

TEST(Optimizer, OptimizeFromKeepsStartingPointFloor)
{
    const SystemConfig c = small(8);
    const auto users = sample_geometry(c);
    OptimizerState s = initialize_feasible(c, users);
    solve_p2(s, c, users);
    const double start = aux_objective(s.aux);
    const OptimizeResult r = optimize_from(s, c, users);
    EXPECT_GE(r.state.objective_trace.back(), start - 1e-9);
}
