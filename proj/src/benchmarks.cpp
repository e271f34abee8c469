// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/benchmarks.hpp"

#include "manoma/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace manoma
{

namespace
{

constexpr int kMaxSweeps = 20;
constexpr double kSweepTol = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SchemeResult from_optimizer(Scheme s, const OptimizeResult &r)
{
    SchemeResult out;
    out.scheme = s;
    out.throughput = r.throughput;
    out.per_user_rates = r.per_user_rates;
    out.layout = r.state.layout;
    out.wall_time_s = r.wall_time_s;
    out.outer_iters = r.counts.outer;
    out.trace = r.state.objective_trace;
    out.counts = r.counts;
    return out;
}

// Per-user pieces of h_k = eta_k G_k with the noise folded into eta
struct ChannelParts
{
    const SystemConfig &config;
    std::vector<UserGeometry> users; // noise-normalized

    ChannelParts(const SystemConfig &c, const std::vector<UserGeometry> &raw)
        : config(c), users(noise_normalized(raw, c.noise_power))
    {
    }

    Eigen::RowVectorXcd eta(int k, const Position &u) const
    {
        return receive_field_response(users[k], u, config.wavelength).cwiseProduct(users[k].prm_diag).transpose();
    }

    Eigen::VectorXcd tx_frv(int k, const Position &u) const
    {
        return field_response_vector(path_differences(u, users[k].aod_elevation, users[k].aod_azimuth),
                                     config.wavelength);
    }

    Eigen::MatrixXcd H(const LayoutState &layout) const { return channel_matrix(users, layout, config.wavelength); }
};

bool spacing_ok(const PositionList &B, int m, const Position &cand, double min_dist)
{
    for (int l = 0; l < B.rows(); ++l)
        if (l != m && (B.row(l).transpose() - cand).norm() < min_dist - kRegionTolerance)
            return false;
    return true;
}

double sdma_sum_rate(const Eigen::MatrixXcd &H, double P) { return sdma_rates(H, zero_forcing(H, P)).sum(); }

double tdma_slot_gain(const ChannelParts &cp, int k, const LayoutState &layout)
{
    return channel_vector(cp.users[k], layout.bs_positions, layout.user_positions.row(k).transpose(),
                          cp.config.wavelength)
        .squaredNorm();
}

// Coordinate search maximizing ||h_k||^2 for one slot
int tdma_search(const ChannelParts &cp, int k, LayoutState &layout)
{
    const SystemConfig &c = cp.config;
    const std::vector<double> bs_grid = lattice(c.bs_region, 0.25 * c.wavelength);
    const std::vector<double> ue_grid = lattice(c.user_region, 0.25 * c.wavelength);
    const int M = c.num_bs_antennas;
    double best = tdma_slot_gain(cp, k, layout);
    int sweeps = 0;
    while (sweeps < kMaxSweeps)
    {
        ++sweeps;
        const double start = best;
        const Eigen::RowVectorXcd eta = cp.eta(k, layout.user_positions.row(k).transpose());
        // each BS antenna contributes |eta g(u_m)|^2 independently, subject to spacing
        for (int m = 0; m < M; ++m)
        {
            Position pos = layout.bs_positions.row(m).transpose();
            double term = std::norm((eta * cp.tx_frv(k, pos))(0));
            for (double x : bs_grid)
                for (double y : bs_grid)
                {
                    const Position cand(x, y);
                    if (!spacing_ok(layout.bs_positions, m, cand, 0.5 * c.wavelength))
                        continue;
                    const double v = std::norm((eta * cp.tx_frv(k, cand))(0));
                    if (v > term)
                    {
                        term = v;
                        pos = cand;
                    }
                }
            layout.bs_positions.row(m) = pos.transpose();
        }
        if (c.user_region > 0.0)
        {
            const Eigen::MatrixXcd G = transmit_field_response(cp.users[k], layout.bs_positions, c.wavelength);
            Position pos = layout.user_positions.row(k).transpose();
            double val = (cp.eta(k, pos) * G).squaredNorm();
            for (double x : ue_grid)
                for (double y : ue_grid)
                {
                    const Position cand(x, y);
                    const double v = (cp.eta(k, cand) * G).squaredNorm();
                    if (v > val)
                    {
                        val = v;
                        pos = cand;
                    }
                }
            layout.user_positions.row(k) = pos.transpose();
        }
        best = tdma_slot_gain(cp, k, layout);
        if (best - start <= kSweepTol * std::max(1.0, std::abs(start)))
            break;
    }
    return sweeps;
}

// Coordinate search maximizing the ZF + water-filling sum rate
int sdma_search(const ChannelParts &cp, LayoutState &layout)
{
    const SystemConfig &c = cp.config;
    const std::vector<double> bs_grid = lattice(c.bs_region, 0.25 * c.wavelength);
    const std::vector<double> ue_grid = lattice(c.user_region, 0.25 * c.wavelength);
    const int M = c.num_bs_antennas, N = c.num_users;
    const double P = c.power_budget;

    Eigen::MatrixXcd H = cp.H(layout);
    double best = sdma_sum_rate(H, P);
    int sweeps = 0;
    while (sweeps < kMaxSweeps)
    {
        ++sweeps;
        const double start = best;
        std::vector<Eigen::RowVectorXcd> eta(N);
        for (int k = 0; k < N; ++k)
            eta[k] = cp.eta(k, layout.user_positions.row(k).transpose());

        for (int m = 0; m < M; ++m)
        {
            Position pos = layout.bs_positions.row(m).transpose();
            Eigen::VectorXcd col = H.col(m);
            Eigen::MatrixXcd Ht = H;
            for (double x : bs_grid)
                for (double y : bs_grid)
                {
                    const Position cand(x, y);
                    if (!spacing_ok(layout.bs_positions, m, cand, 0.5 * c.wavelength))
                        continue;
                    for (int k = 0; k < N; ++k)
                        Ht(k, m) = (eta[k] * cp.tx_frv(k, cand))(0);
                    const double v = sdma_sum_rate(Ht, P);
                    if (v > best)
                    {
                        best = v;
                        pos = cand;
                        col = Ht.col(m);
                    }
                }
            layout.bs_positions.row(m) = pos.transpose();
            H.col(m) = col;
        }

        if (c.user_region > 0.0)
        {
            for (int k = 0; k < N; ++k)
            {
                const Eigen::MatrixXcd G = transmit_field_response(cp.users[k], layout.bs_positions, c.wavelength);
                Position pos = layout.user_positions.row(k).transpose();
                Eigen::RowVectorXcd row = H.row(k);
                Eigen::MatrixXcd Ht = H;
                for (double x : ue_grid)
                    for (double y : ue_grid)
                    {
                        const Position cand(x, y);
                        Ht.row(k) = cp.eta(k, cand) * G;
                        const double v = sdma_sum_rate(Ht, P);
                        if (v > best)
                        {
                            best = v;
                            pos = cand;
                            row = Ht.row(k);
                        }
                    }
                layout.user_positions.row(k) = pos.transpose();
                H.row(k) = row;
            }
        }
        if (best - start <= kSweepTol * std::max(1.0, std::abs(start)))
            break;
    }
    return sweeps;
}

LayoutState fixed_layout(const SystemConfig &config)
{
    LayoutState layout{uniform_bs_grid(config), centered_user_positions(config)};
    if (!bs_positions_valid(config, layout.bs_positions))
        throw std::invalid_argument("bs_region: uniform grid cannot satisfy half-wavelength spacing");
    return layout;
}

} // namespace

const char *to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::noma_ma:
        return "NOMA-MA";
    case Scheme::noma_ma_ue:
        return "NOMA-MA-UE";
    case Scheme::noma_fpa:
        return "NOMA-FPA";
    case Scheme::sdma_ma:
        return "SDMA-MA";
    case Scheme::sdma_fpa:
        return "SDMA-FPA";
    case Scheme::tdma_ma:
        return "TDMA-MA";
    case Scheme::tdma_fpa:
        return "TDMA-FPA";
    }
    return "?";
}

std::vector<Scheme> all_schemes()
{
    return {Scheme::noma_ma,  Scheme::noma_ma_ue, Scheme::noma_fpa, Scheme::sdma_ma,
            Scheme::sdma_fpa, Scheme::tdma_ma,    Scheme::tdma_fpa};
}

std::optional<Scheme> parse_scheme(const std::string &name)
{
    for (Scheme s : all_schemes())
        if (name == to_string(s))
            return s;
    return std::nullopt;
}

std::optional<Scheme> fpa_twin(Scheme s)
{
    switch (s)
    {
    case Scheme::noma_ma:
    case Scheme::noma_ma_ue:
        return Scheme::noma_fpa;
    case Scheme::sdma_ma:
        return Scheme::sdma_fpa;
    case Scheme::tdma_ma:
        return Scheme::tdma_fpa;
    default:
        return std::nullopt;
    }
}

std::vector<double> lattice(double side, double step)
{
    if (!(step > 0.0))
        throw std::invalid_argument("lattice: step must be positive");
    std::vector<double> pts;
    const double half = 0.5 * side;
    const int count = static_cast<int>(std::floor(side / step + 1e-9));
    for (int i = 0; i <= count; ++i)
        pts.push_back(-half + i * step);
    if (half - pts.back() > 1e-12)
        pts.push_back(half);
    return pts;
}

Eigen::VectorXd water_filling(const Eigen::VectorXd &gains, double power_budget)
{
    const auto N = gains.size();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(N);
    std::vector<Eigen::Index> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return gains[a] > gains[b]; });

    // Largest active set whose water level clears every inverse gain in it
    double level = 0.0;
    Eigen::Index active = 0;
    double inv_sum = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
    {
        const double g = gains[order[i]];
        if (!(g > 0.0))
            break;
        const double candidate = (power_budget + inv_sum + 1.0 / g) / static_cast<double>(i + 1);
        if (candidate <= 1.0 / g)
            break;
        inv_sum += 1.0 / g;
        level = candidate;
        active = i + 1;
    }
    for (Eigen::Index i = 0; i < active; ++i)
        p[order[i]] = std::max(0.0, level - 1.0 / gains[order[i]]);
    return p;
}

ZfDesign zero_forcing(const Eigen::MatrixXcd &H, double power_budget)
{
    const auto N = H.rows(), M = H.cols();
    if (M < N)
        throw std::invalid_argument("zero_forcing: requires at least as many BS antennas as users");
    ZfDesign d;
    Eigen::MatrixXcd gram = H * H.adjoint();
    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
    const Eigen::VectorXd D = ldlt.vectorD().real();
    const double scale = std::max(gram.diagonal().real().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success || D.minCoeff() <= 1e-12 * scale)
    {
        d.damped = true;
        gram.diagonal().array() += 1e-9 * scale;
    }
    d.W = H.adjoint() * gram.ldlt().solve(Eigen::MatrixXcd::Identity(N, N));
    Eigen::VectorXd g(N);
    for (Eigen::Index k = 0; k < N; ++k)
    {
        const double nrm = d.W.col(k).norm();
        if (nrm > 0.0)
            d.W.col(k) /= nrm;
        g[k] = std::norm((H.row(k) * d.W.col(k))(0));
    }
    d.powers = water_filling(g, power_budget);
    return d;
}

Eigen::VectorXd sdma_rates(const Eigen::MatrixXcd &H, const ZfDesign &design)
{
    const auto N = H.rows();
    const Eigen::MatrixXd G = (H * design.W).cwiseAbs2();
    Eigen::VectorXd r(N);
    for (Eigen::Index k = 0; k < N; ++k)
    {
        double interference = 1.0;
        for (Eigen::Index j = 0; j < N; ++j)
            if (j != k)
                interference += design.powers[j] * G(k, j);
        r[k] = std::log2(1.0 + design.powers[k] * G(k, k) / interference);
    }
    return r;
}

SchemeResult run_noma_ma(const SystemConfig &config, const std::vector<UserGeometry> &users,
                         const OptimizerOptions &options)
{
    OptimizerOptions o = options;
    o.optimize_users = o.optimize_bs = true;
    return from_optimizer(Scheme::noma_ma, optimize(config, users, o));
}

SchemeResult run_noma_ma_ue(const SystemConfig &config, const std::vector<UserGeometry> &users,
                            const OptimizerOptions &options)
{
    OptimizerOptions o = options;
    o.optimize_users = true;
    o.optimize_bs = false;
    return from_optimizer(Scheme::noma_ma_ue, optimize(config, users, o));
}

SchemeResult run_noma_fpa(const SystemConfig &config, const std::vector<UserGeometry> &users,
                          const OptimizerOptions &options)
{
    OptimizerOptions o = options;
    o.optimize_users = o.optimize_bs = false;
    return from_optimizer(Scheme::noma_fpa, optimize(config, users, o));
}

SchemeResult run_sdma(const SystemConfig &config, const std::vector<UserGeometry> &users, bool movable)
{
    const auto t0 = Clock::now();
    config.validate();
    if (config.num_bs_antennas < config.num_users)
        throw std::invalid_argument("SDMA requires num_bs_antennas >= num_users");
    const ChannelParts cp(config, users);
    SchemeResult out;
    out.scheme = movable ? Scheme::sdma_ma : Scheme::sdma_fpa;
    out.layout = fixed_layout(config);
    if (movable)
        out.outer_iters = sdma_search(cp, out.layout);
    const Eigen::MatrixXcd H = cp.H(out.layout);
    out.per_user_rates = sdma_rates(H, zero_forcing(H, config.power_budget));
    out.throughput = out.per_user_rates.sum();
    out.wall_time_s = seconds_since(t0);
    return out;
}

SchemeResult run_tdma(const SystemConfig &config, const std::vector<UserGeometry> &users, bool movable)
{
    const auto t0 = Clock::now();
    config.validate();
    const ChannelParts cp(config, users);
    const int N = config.num_users;
    const double tau = 1.0 / N;
    SchemeResult out;
    out.scheme = movable ? Scheme::tdma_ma : Scheme::tdma_fpa;
    out.per_user_rates.resize(N);
    const LayoutState base = fixed_layout(config);
    for (int k = 0; k < N; ++k)
    {
        LayoutState layout = base;
        if (movable)
            out.outer_iters = std::max(out.outer_iters, tdma_search(cp, k, layout));
        out.per_user_rates[k] = tau * std::log2(1.0 + config.power_budget * tdma_slot_gain(cp, k, layout));
        out.slot_layouts.push_back(layout);
    }
    out.layout = out.slot_layouts.front();
    out.throughput = out.per_user_rates.sum();
    out.wall_time_s = seconds_since(t0);
    return out;
}

SchemeResult run_scheme(Scheme s, const SystemConfig &config, const std::vector<UserGeometry> &users)
{
    switch (s)
    {
    case Scheme::noma_ma:
        return run_noma_ma(config, users);
    case Scheme::noma_ma_ue:
        return run_noma_ma_ue(config, users);
    case Scheme::noma_fpa:
        return run_noma_fpa(config, users);
    case Scheme::sdma_ma:
        return run_sdma(config, users, true);
    case Scheme::sdma_fpa:
        return run_sdma(config, users, false);
    case Scheme::tdma_ma:
        return run_tdma(config, users, true);
    case Scheme::tdma_fpa:
        return run_tdma(config, users, false);
    }
    throw std::invalid_argument("run_scheme: unknown scheme");
}

} // namespace manoma
