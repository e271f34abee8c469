// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace manoma
{

std::vector<UserGeometry> sample_geometry(const SystemConfig &config, std::mt19937_64 &rng)
{
    constexpr double pi = std::numbers::pi;
    const int N = config.num_users, L = config.num_paths;

    // Elevation endpoints are included, azimuth is half-open
    std::uniform_real_distribution<double> distance(config.distance_min, config.distance_max);
    std::uniform_real_distribution<double> elevation(0.0, std::nextafter(0.5 * pi, 1.0));
    std::uniform_real_distribution<double> azimuth(0.0, 2.0 * pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<UserGeometry> users(N);
    for (auto &u : users)
    {
        u.distance = distance(rng);
        u.aod_elevation.resize(L);
        u.aod_azimuth.resize(L);
        u.aoa_elevation.resize(L);
        u.aoa_azimuth.resize(L);
        u.prm_diag.resize(L);
        for (int i = 0; i < L; ++i)
        {
            u.aod_elevation[i] = elevation(rng);
            u.aod_azimuth[i] = azimuth(rng);
            u.aoa_elevation[i] = elevation(rng);
            u.aoa_azimuth[i] = azimuth(rng);
        }
        // CN(0, c0 d^-a0 / L): each real component has half the variance
        const double variance = config.reference_gain * std::pow(u.distance, -config.pathloss_exponent) / L;
        const double s = std::sqrt(0.5 * variance);
        for (int i = 0; i < L; ++i)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            u.prm_diag[i] = cplx(s * re, s * im);
        }
    }

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return users[a].distance > users[b].distance; });
    std::vector<UserGeometry> sorted;
    sorted.reserve(N);
    for (int i : order)
        sorted.push_back(std::move(users[i]));
    return sorted;
}

std::vector<UserGeometry> sample_geometry(const SystemConfig &config)
{
    std::mt19937_64 rng(config.rng_seed);
    return sample_geometry(config, rng);
}

Eigen::VectorXd path_differences(const Position &position, const Eigen::VectorXd &elevation,
                                 const Eigen::VectorXd &azimuth)
{
    if (elevation.size() != azimuth.size())
        throw std::invalid_argument("path_differences: elevation and azimuth lengths differ");
    const Eigen::ArrayXd c = elevation.array().cos();
    return (position.x() * c * azimuth.array().cos() + position.y() * c * azimuth.array().sin()).matrix();
}

Eigen::VectorXcd field_response_vector(const Eigen::VectorXd &rho, double wavelength)
{
    const double k = 2.0 * std::numbers::pi / wavelength;
    Eigen::VectorXcd out(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i)
        out[i] = std::polar(1.0, k * rho[i]);
    return out;
}

Eigen::MatrixXcd transmit_field_response(const UserGeometry &user, const PositionList &bs_positions,
                                         double wavelength)
{
    Eigen::MatrixXcd G(user.num_paths(), bs_positions.rows());
    for (Eigen::Index m = 0; m < bs_positions.rows(); ++m)
        G.col(m) = field_response_vector(
            path_differences(bs_positions.row(m).transpose(), user.aod_elevation, user.aod_azimuth), wavelength);
    return G;
}

Eigen::VectorXcd receive_field_response(const UserGeometry &user, const Position &user_position,
                                        double wavelength)
{
    return field_response_vector(path_differences(user_position, user.aoa_elevation, user.aoa_azimuth),
                                 wavelength);
}

Eigen::VectorXcd channel_vector(const UserGeometry &user, const PositionList &bs_positions,
                                const Position &user_position, double wavelength)
{
    const Eigen::VectorXcd f = receive_field_response(user, user_position, wavelength);
    const Eigen::MatrixXcd G = transmit_field_response(user, bs_positions, wavelength);
    const Eigen::VectorXcd eta = f.cwiseProduct(user.prm_diag); // (f^T Sigma)^T
    return G.transpose() * eta;
}

Eigen::VectorXcd channel_vector_dense(const UserGeometry &user, const Eigen::MatrixXcd &prm,
                                      const PositionList &bs_positions, const Position &user_position,
                                      double wavelength)
{
    const Eigen::VectorXcd f = receive_field_response(user, user_position, wavelength);
    const Eigen::MatrixXcd G = transmit_field_response(user, bs_positions, wavelength);
    if (prm.rows() != f.size() || prm.cols() != G.rows())
        throw std::invalid_argument("channel_vector_dense: path-response matrix shape mismatch");
    return (f.transpose() * prm * G).transpose();
}

Eigen::MatrixXcd channel_matrix(const std::vector<UserGeometry> &users, const LayoutState &layout,
                                double wavelength)
{
    const auto N = static_cast<Eigen::Index>(users.size());
    Eigen::MatrixXcd H(N, layout.bs_positions.rows());
    for (Eigen::Index k = 0; k < N; ++k)
        H.row(k) = channel_vector(users[k], layout.bs_positions, layout.user_positions.row(k).transpose(),
                                  wavelength)
                       .transpose();
    return H;
}

bool bs_positions_valid(const SystemConfig &config, const PositionList &bs_positions)
{
    const double half = 0.5 * config.bs_region + kRegionTolerance;
    if ((bs_positions.array().abs() > half).any())
        return false;
    const double min_spacing = 0.5 * config.wavelength - kRegionTolerance;
    for (Eigen::Index i = 0; i < bs_positions.rows(); ++i)
        for (Eigen::Index l = i + 1; l < bs_positions.rows(); ++l)
            if ((bs_positions.row(i) - bs_positions.row(l)).norm() < min_spacing)
                return false;
    return true;
}

bool user_positions_valid(const SystemConfig &config, const PositionList &user_positions)
{
    return !(user_positions.array().abs() > 0.5 * config.user_region + kRegionTolerance).any();
}

PositionList uniform_bs_grid(const SystemConfig &config)
{
    const int side = config.grid_side();
    const double step = side > 1 ? config.bs_region / (side - 1) : 0.0;
    const double origin = side > 1 ? -0.5 * config.bs_region : 0.0;
    PositionList pos(config.num_bs_antennas, 2);
    for (int m = 0; m < config.num_bs_antennas; ++m)
    {
        const int row = m / side, col = m % side;
        pos(m, 0) = origin + col * step;
        pos(m, 1) = -origin - row * step;
    }
    return pos;
}

PositionList centered_user_positions(const SystemConfig &config)
{
    return PositionList::Zero(config.num_users, 2);
}

std::uint64_t geometry_digest(const std::vector<UserGeometry> &users)
{
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void *data, std::size_t bytes) {
        const auto *p = static_cast<const unsigned char *>(data);
        for (std::size_t i = 0; i < bytes; ++i)
        {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto &u : users)
    {
        mix(&u.distance, sizeof(double));
        mix(u.aod_elevation.data(), sizeof(double) * u.aod_elevation.size());
        mix(u.aod_azimuth.data(), sizeof(double) * u.aod_azimuth.size());
        mix(u.aoa_elevation.data(), sizeof(double) * u.aoa_elevation.size());
        mix(u.aoa_azimuth.data(), sizeof(double) * u.aoa_azimuth.size());
        mix(u.prm_diag.data(), sizeof(cplx) * u.prm_diag.size());
    }
    return h;
}

std::vector<UserGeometry> noise_normalized(const std::vector<UserGeometry> &users, double noise_power)
{
    const double s = 1.0 / std::sqrt(noise_power);
    std::vector<UserGeometry> out = users;
    for (auto &u : out)
        u.prm_diag *= s;
    return out;
}

} // namespace manoma
