// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#ifndef MANOMA_CHANNEL_HPP
#define MANOMA_CHANNEL_HPP

#include "manoma/config.hpp"

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace manoma
{

using cplx = std::complex<double>;
using Position = Eigen::Vector2d;
using PositionList = Eigen::Matrix<double, Eigen::Dynamic, 2>; // one (x, y) row per antenna

// Far-field multipath geometry between the BS origin and one user origin.
// Paths are reciprocal and one-to-one, so the path-response matrix is diagonal.
struct UserGeometry
{
    double distance = 0.0;          // meters
    Eigen::VectorXd aod_elevation;  // theta^t, [0, pi/2]
    Eigen::VectorXd aod_azimuth;    // phi^t, [0, 2pi)
    Eigen::VectorXd aoa_elevation;  // theta^r
    Eigen::VectorXd aoa_azimuth;    // phi^r
    Eigen::VectorXcd prm_diag;      // diagonal of Sigma

    int num_paths() const { return static_cast<int>(prm_diag.size()); }
};

struct LayoutState
{
    PositionList bs_positions;   // M x 2
    PositionList user_positions; // N x 2
};

// Absolute tolerance used by every region / spacing check (meters)
inline constexpr double kRegionTolerance = 1e-9;

// Draws N user geometries, sorted into SIC order (farthest user first, ties by draw index).
std::vector<UserGeometry> sample_geometry(const SystemConfig &config, std::mt19937_64 &rng);

// Convenience overload seeded from config.rng_seed
std::vector<UserGeometry> sample_geometry(const SystemConfig &config);

// rho_i = x cos(theta_i) cos(phi_i) + y cos(theta_i) sin(phi_i)
Eigen::VectorXd path_differences(const Position &position, const Eigen::VectorXd &elevation,
                                 const Eigen::VectorXd &azimuth);

// exp(j 2 pi rho_i / lambda)
Eigen::VectorXcd field_response_vector(const Eigen::VectorXd &rho, double wavelength);

// Transmit field-response matrix G (L x M), column m is the FRV of BS antenna m
Eigen::MatrixXcd transmit_field_response(const UserGeometry &user, const PositionList &bs_positions,
                                         double wavelength);

// Receive FRV f (length L) of the user antenna at the given position
Eigen::VectorXcd receive_field_response(const UserGeometry &user, const Position &user_position,
                                        double wavelength);

// h = f^T Sigma G as a length-M vector (row semantics)
Eigen::VectorXcd channel_vector(const UserGeometry &user, const PositionList &bs_positions,
                                const Position &user_position, double wavelength);

// Same channel for a general (dense) L_r x L_t path-response matrix
Eigen::VectorXcd channel_vector_dense(const UserGeometry &user, const Eigen::MatrixXcd &prm,
                                      const PositionList &bs_positions, const Position &user_position,
                                      double wavelength);

// Stacks h_1 ... h_N as rows of an N x M matrix
Eigen::MatrixXcd channel_matrix(const std::vector<UserGeometry> &users, const LayoutState &layout,
                                double wavelength);

// Region and spacing checks against the configured geometry (kRegionTolerance)
bool bs_positions_valid(const SystemConfig &config, const PositionList &bs_positions);
bool user_positions_valid(const SystemConfig &config, const PositionList &user_positions);

// Uniform ceil(sqrt(M)) x ceil(sqrt(M)) lattice spanning C_t, first M points in row-major order
PositionList uniform_bs_grid(const SystemConfig &config);

// Every user antenna at its region origin
PositionList centered_user_positions(const SystemConfig &config);

// Order-sensitive FNV-1a digest over every geometry array (used to verify matched realizations)
std::uint64_t geometry_digest(const std::vector<UserGeometry> &users);

// Copy with every path gain divided by sqrt(noise_power): received powers become SNR units
std::vector<UserGeometry> noise_normalized(const std::vector<UserGeometry> &users, double noise_power);

} // namespace manoma

#endif
