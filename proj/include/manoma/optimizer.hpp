// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------
//
// Alternating optimization over beamforming / power (P2), user antenna positions (P3) and
// BS antenna positions (P4.m, one antenna at a time). Each block runs an SCA inner loop over
// convex surrogates assembled from bounds.hpp and solved with the barrier method in conic.hpp.
//
// Internally all programs are built in noise-normalized units (sigma^2 = 1). OptimizerState
// keeps physical units: V in sqrt(W), nu in W.

#ifndef MANOMA_OPTIMIZER_HPP
#define MANOMA_OPTIMIZER_HPP

#include "manoma/bounds.hpp"
#include "manoma/channel.hpp"
#include "manoma/config.hpp"
#include "manoma/metrics.hpp"

#include <string>
#include <vector>

namespace manoma
{

struct OptimizerState
{
    LayoutState layout;
    TransmitDesign design;
    AuxState aux; // r dimensionless, nu in watts
    int outer_iter = 0;
    std::vector<double> objective_trace; // sum_n log2 r_n: initial point, each outer iteration, closing P2 pass
};

struct OptimizerOptions
{
    bool optimize_users = true; // run P3
    bool optimize_bs = true;    // run P4.m for every m
    bool verify_surrogates = false; // compare every surrogate with its target at each expansion point
    bool check_feasibility = false; // run the independent checker after every subproblem
};

struct IterationCounts
{
    int outer = 0; // chi
    int bf = 0;    // chi_1, summed over outer iterations
    int user = 0;  // chi_2
    int bs = 0;    // chi_3, summed over antennas
};

struct TraceRecord
{
    int iteration = 0;
    std::string subproblem; // "init", "P2", "P3", "P4"
    double objective = 0.0; // sum_n log2 r_n
    Eigen::VectorXd per_user_rates;
};

struct OptimizeResult
{
    OptimizerState state;
    std::vector<TraceRecord> trace;
    IterationCounts counts;
    double wall_time_s = 0.0;
    double throughput = 0.0; // evaluated from (H, V), >= the aux objective
    Eigen::VectorXd per_user_rates;
};

// Every constraint of the original problem re-evaluated from the raw channel
struct FeasibilityReport
{
    bool feasible = true;
    double worst = 0.0;  // largest normalized violation (<= 0 when feasible)
    std::string detail;  // first violated constraint, empty when feasible
};

FeasibilityReport check_feasibility(const SystemConfig &config, const std::vector<UserGeometry> &users,
                                    const OptimizerState &state, double tol = kConstraintTolerance);

// sum_n log2 r_n
double aux_objective(const AuxState &aux);

// Uniform BS grid, centered users, MRT beams and a geometric power split satisfying the ordering
// chain. Throws std::invalid_argument when the grid violates the spacing rule and
// std::runtime_error when no admissible power split is found.
OptimizerState initialize_feasible(const SystemConfig &config, const std::vector<UserGeometry> &users);

// One SCA inner loop each; the return value is the number of convex programs solved.
int solve_p2(OptimizerState &state, const SystemConfig &config, const std::vector<UserGeometry> &users,
             const OptimizerOptions &options = {});
int solve_p3(OptimizerState &state, const SystemConfig &config, const std::vector<UserGeometry> &users,
             const OptimizerOptions &options = {});
int solve_p4m(OptimizerState &state, const SystemConfig &config, const std::vector<UserGeometry> &users, int m,
              const OptimizerOptions &options = {});

OptimizeResult optimize(const SystemConfig &config, const std::vector<UserGeometry> &users,
                        const OptimizerOptions &options = {});

// Same loop from a caller-supplied feasible state
OptimizeResult optimize_from(OptimizerState state, const SystemConfig &config,
                             const std::vector<UserGeometry> &users, const OptimizerOptions &options = {});

} // namespace manoma

#endif
