// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#ifndef MANOMA_CONFIG_HPP
#define MANOMA_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace manoma
{

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

// Free-space reference gain at 1 m for unit antenna gains
inline double free_space_reference_gain(double wavelength)
{
    const double f = wavelength / (4.0 * std::numbers::pi);
    return f * f;
}

// All scenario scalars. Powers in watts, lengths in meters.
struct SystemConfig
{
    int num_bs_antennas = 16;                   // M
    int num_users = 4;                          // N
    int num_paths = 10;                         // L (transmit = receive)
    double wavelength = 0.01;                   // lambda_c
    double power_budget = 1.0;                  // P_t, 30 dBm
    double noise_power = 1e-11;                 // sigma^2, -80 dBm
    double mrt_coefficient = 1.0;               // alpha
    double bs_region = 0.2;                     // R_t, side of C_t (20 lambda)
    double user_region = 0.04;                  // R_r, side of each C_r,n (4 lambda)
    double pathloss_exponent = 2.8;             // alpha_0
    double reference_gain = free_space_reference_gain(0.01); // c_0 (G_t = G_r = 1 folded in)
    double distance_min = 50.0;
    double distance_max = 200.0;
    int outer_iters = 30;                       // vartheta
    int inner_iters_bf = 10;                    // vartheta_1
    int inner_iters_user = 10;                  // vartheta_2
    int inner_iters_bs = 10;                    // vartheta_3
    double convergence_tol_outer = 0.01;        // bits/s/Hz
    double convergence_tol_inner = 1e-4;        // relative objective change
    std::uint64_t rng_seed = 0;

    // Side length of the smallest square grid holding M antennas
    int grid_side() const
    {
        int s = 1;
        while (s * s < num_bs_antennas)
            ++s;
        return s;
    }

    // Throws std::invalid_argument naming the offending field
    void validate() const;
};

} // namespace manoma

#endif
