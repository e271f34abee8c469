// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------
//
// Comparison schemes evaluated on the same channel realizations as the NOMA optimizer.
// SDMA uses normalized zero-forcing with water-filling; TDMA uses equal slots with MRT.
// The movable variants of both search positions on a quarter-wavelength lattice.

#ifndef MANOMA_BENCHMARKS_HPP
#define MANOMA_BENCHMARKS_HPP

#include "manoma/channel.hpp"
#include "manoma/config.hpp"
#include "manoma/optimizer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace manoma
{

enum class Scheme
{
    noma_ma,
    noma_ma_ue,
    noma_fpa,
    sdma_ma,
    sdma_fpa,
    tdma_ma,
    tdma_fpa
};

// "NOMA-MA", "NOMA-MA-UE", ...
const char *to_string(Scheme s);
std::optional<Scheme> parse_scheme(const std::string &name);
std::vector<Scheme> all_schemes();

// MA scheme paired with its fixed-position twin, if any
std::optional<Scheme> fpa_twin(Scheme s);

struct SchemeResult
{
    Scheme scheme = Scheme::noma_ma;
    double throughput = 0.0;        // bits/s/Hz; equals per_user_rates.sum()
    Eigen::VectorXd per_user_rates; // TDMA: already weighted by the slot fraction
    LayoutState layout;             // TDMA-MA: layout of the first slot
    std::vector<LayoutState> slot_layouts; // TDMA only, one per user
    double wall_time_s = 0.0;
    int outer_iters = 0;            // AO outer iterations or coordinate-search sweeps
    std::vector<double> trace;      // NOMA: outer objective trace
    IterationCounts counts;         // NOMA only
};

SchemeResult run_noma_ma(const SystemConfig &config, const std::vector<UserGeometry> &users,
                         const OptimizerOptions &options = {});
SchemeResult run_noma_ma_ue(const SystemConfig &config, const std::vector<UserGeometry> &users,
                            const OptimizerOptions &options = {});
SchemeResult run_noma_fpa(const SystemConfig &config, const std::vector<UserGeometry> &users,
                          const OptimizerOptions &options = {});

// Requires M >= N (std::invalid_argument otherwise)
SchemeResult run_sdma(const SystemConfig &config, const std::vector<UserGeometry> &users, bool movable);
SchemeResult run_tdma(const SystemConfig &config, const std::vector<UserGeometry> &users, bool movable);

SchemeResult run_scheme(Scheme s, const SystemConfig &config, const std::vector<UserGeometry> &users);

// ZF + water-filling building blocks (H in noise-normalized units)
struct ZfDesign
{
    Eigen::MatrixXcd W;     // unit-norm columns
    Eigen::VectorXd powers; // water-filled
    bool damped = false;    // rank-deficient H, damped pseudo-inverse used
};
ZfDesign zero_forcing(const Eigen::MatrixXcd &H, double power_budget);

// argmax sum log2(1 + p_k g_k) subject to sum p_k = P, p >= 0
Eigen::VectorXd water_filling(const Eigen::VectorXd &gains, double power_budget);

// log2(1 + p_k |h_k w_k|^2 / (sum_{j != k} p_j |h_k w_j|^2 + 1)) per user
Eigen::VectorXd sdma_rates(const Eigen::MatrixXcd &H, const ZfDesign &design);

// Lattice -side/2 + i*step for i = 0 .. floor(side/step); always contains both ends of the interval
std::vector<double> lattice(double side, double step);

} // namespace manoma

#endif
