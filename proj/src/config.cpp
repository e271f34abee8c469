// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/config.hpp"

#include <stdexcept>

namespace manoma
{

namespace
{
void require(bool ok, const char *field, const char *what)
{
    if (!ok)
        throw std::invalid_argument(std::string(field) + ": " + what);
}
} // namespace

void SystemConfig::validate() const
{
    require(num_bs_antennas >= 1, "num_bs_antennas", "must be >= 1");
    require(num_users >= 1, "num_users", "must be >= 1");
    require(num_paths >= 1, "num_paths", "must be >= 1");
    require(wavelength > 0.0, "wavelength", "must be > 0");
    require(power_budget > 0.0, "power_budget", "must be > 0");
    require(noise_power > 0.0, "noise_power", "must be > 0");
    require(mrt_coefficient >= 1.0, "mrt_coefficient", "must be >= 1");
    require(bs_region >= 0.0, "bs_region", "must be >= 0");
    require(user_region >= 0.0, "user_region", "must be >= 0");
    require(bs_region + 1e-9 >= 0.5 * wavelength * (grid_side() - 1), "bs_region",
            "too small for a half-wavelength antenna grid");
    require(reference_gain > 0.0, "reference_gain", "must be > 0");
    require(distance_min > 0.0, "distance_min", "must be > 0");
    require(distance_max >= distance_min, "distance_max", "must be >= distance_min");
    require(outer_iters >= 1, "outer_iters", "must be >= 1");
    require(inner_iters_bf >= 1, "inner_iters_bf", "must be >= 1");
    require(inner_iters_user >= 1, "inner_iters_user", "must be >= 1");
    require(inner_iters_bs >= 1, "inner_iters_bs", "must be >= 1");
    require(convergence_tol_outer >= 0.0, "convergence_tol_outer", "must be >= 0");
    require(convergence_tol_inner >= 0.0, "convergence_tol_inner", "must be >= 0");
}

} // namespace manoma
