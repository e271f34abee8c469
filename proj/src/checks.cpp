// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/checks.hpp"

#include "manoma/bounds.hpp"
#include "manoma/conic.hpp"
#include "manoma/channel.hpp"
#include "manoma/metrics.hpp"
#include "manoma/optimizer.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace manoma
{

namespace
{

constexpr double kTol = 1e-9;

struct Tally
{
    int samples = 0;
    int violations = 0;
    double worst = 0.0;

    // bound must be >= target (upper) within kTol relative to the magnitudes involved
    void upper(double bound, double target)
    {
        ++samples;
        const double excess = (target - bound) / std::max(1.0, std::abs(target));
        worst = std::max(worst, excess);
        if (excess > kTol)
            ++violations;
    }
    void tight(double a, double b)
    {
        ++samples;
        const double gap = std::abs(a - b) / std::max(1.0, std::abs(b));
        worst = std::max(worst, gap);
        if (gap > kTol)
            ++violations;
    }
    CheckResult result(const std::string &name) const
    {
        std::ostringstream os;
        os << samples << " samples, " << violations << " violations, worst " << worst;
        return {name, violations == 0, os.str()};
    }
};

Eigen::MatrixXcd random_hermitian(int L, std::mt19937_64 &rng)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXcd A(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            A(i, j) = cplx(g(rng), g(rng));
    return 0.5 * (A + A.adjoint());
}

// f^T Q f^* evaluated directly from the receive FRV
double receive_direct(const UserGeometry &user, const Position &u, const Eigen::MatrixXcd &Q, double lambda)
{
    const Eigen::VectorXcd f = receive_field_response(user, u, lambda);
    return (f.transpose() * Q * f.conjugate())(0).real();
}

// g^H O g + 2 Re(tau g) + l with g the transmit FRV at u
double transmit_direct(const UserGeometry &user, const Position &u, const Eigen::MatrixXcd &O,
                       const Eigen::RowVectorXcd &tau, double l, double lambda)
{
    const Eigen::VectorXcd g =
        field_response_vector(path_differences(u, user.aod_elevation, user.aod_azimuth), lambda);
    return (g.adjoint() * O * g)(0).real() + 2.0 * (tau * g)(0).real() + l;
}

Position random_point(double side, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> d(-0.5 * side, 0.5 * side);
    const double x = d(rng);
    return {x, d(rng)};
}

template <class F>
double fd_hessian_max_eig(F f, const Position &u, double h)
{
    Eigen::Matrix2d H;
    const Eigen::Vector2d ex(h, 0), ey(0, h);
    const double f0 = f(u);
    H(0, 0) = (f(u + ex) - 2 * f0 + f(u - ex)) / (h * h);
    H(1, 1) = (f(u + ey) - 2 * f0 + f(u - ey)) / (h * h);
    H(0, 1) = H(1, 0) = (f(u + ex + ey) - f(u + ex - ey) - f(u - ex + ey) + f(u - ex - ey)) / (4 * h * h);
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues().maxCoeff();
}

} // namespace

std::vector<CheckResult> run_checks(const SystemConfig &config, const CheckOptions &options)
{
    config.validate();
    std::vector<CheckResult> out;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double lambda = config.wavelength;
    const int L = config.num_paths;

    SystemConfig cfg = config;
    cfg.rng_seed = options.seed;
    const auto users = noise_normalized(sample_geometry(cfg), cfg.noise_power);
    const UserGeometry &user = users.front();

    // (r - 1) nu <= h(r, nu)
    {
        Tally t;
        for (int s = 0; s < options.samples; ++s)
        {
            const double rj = 1.0 + 10.0 * unit(rng), nj = 1.0 + 10.0 * unit(rng);
            const double r = 1.0 + 10.0 * unit(rng), nu = 1.0 + 10.0 * unit(rng);
            t.upper(bilinear_upper(r, nu, rj, nj), (r - 1.0) * nu);
            t.tight(bilinear_upper(rj, nj, rj, nj), (rj - 1.0) * nj);
        }
        out.push_back(t.result("bilinear upper bound"));
    }

    const LayoutState layout{uniform_bs_grid(cfg), centered_user_positions(cfg)};
    const Eigen::MatrixXcd H = channel_matrix(users, layout, lambda);
    const int M = cfg.num_bs_antennas;
    std::normal_distribution<double> g;
    auto random_beam = [&] {
        Eigen::VectorXcd v(M);
        for (int i = 0; i < M; ++i)
            v[i] = cplx(g(rng), g(rng));
        return v;
    };

    // |h v|^2 >= linearization
    {
        Tally t;
        const Eigen::VectorXcd h = H.row(0).transpose();
        const Eigen::MatrixXd A = realified_gram(h);
        for (int s = 0; s < options.samples; ++s)
        {
            const Eigen::VectorXcd v = random_beam(), vj = random_beam();
            const double target = std::norm((h.transpose() * v)(0));
            t.upper(target, quadratic_lower(stack_real(v), stack_real(vj), A));
            t.tight(quadratic_lower(stack_real(vj), stack_real(vj), A), std::norm((h.transpose() * vj)(0)));
        }
        out.push_back(t.result("quadratic lower bound"));
    }

    // ordering gap <= f_k
    {
        Tally t;
        const Eigen::VectorXcd h = H.row(0).transpose();
        const Eigen::MatrixXd A = realified_gram(h);
        const double alpha = cfg.mrt_coefficient;
        const double curv = ordering_curvature(h, alpha);
        for (int s = 0; s < options.samples; ++s)
        {
            const Eigen::VectorXcd a = random_beam(), b = random_beam(), aj = random_beam(), bj = random_beam();
            auto gap = [&](const Eigen::VectorXcd &x, const Eigen::VectorXcd &y) {
                return alpha * std::norm((h.transpose() * y)(0)) - std::norm((h.transpose() * x)(0));
            };
            t.upper(ordering_upper_fk(stack_real(a), stack_real(b), stack_real(aj), stack_real(bj), A, alpha, curv),
                    gap(a, b));
            t.tight(ordering_upper_fk(stack_real(aj), stack_real(bj), stack_real(aj), stack_real(bj), A, alpha, curv),
                    gap(aj, bj));
        }
        out.push_back(t.result("ordering upper bound"));
    }

    const PathProjections rx = receive_projections(user), tx = transmit_projections(user);

    // receive and transmit position surrogates
    {
        Tally tr, tt;
        for (int s = 0; s < options.samples; ++s)
        {
            const Eigen::MatrixXcd Q = random_hermitian(L, rng);
            const Position u = random_point(cfg.user_region, rng), uj = random_point(cfg.user_region, rng);
            tr.upper(receive_taylor_upper(u, uj, Q, rx, lambda), receive_direct(user, u, Q, lambda));
            tr.tight(receive_taylor_upper(uj, uj, Q, rx, lambda), receive_direct(user, uj, Q, lambda));

            Eigen::RowVectorXcd tau(L);
            for (int i = 0; i < L; ++i)
                tau[i] = cplx(g(rng), g(rng));
            const double l = g(rng);
            const Position w = random_point(cfg.bs_region, rng), wj = random_point(cfg.bs_region, rng);
            tt.upper(transmit_taylor_upper(w, wj, Q, tau, l, tx, lambda), transmit_direct(user, w, Q, tau, l, lambda));
            tt.tight(transmit_taylor_upper(wj, wj, Q, tau, l, tx, lambda),
                     transmit_direct(user, wj, Q, tau, l, lambda));
        }
        out.push_back(tr.result("receive position upper bound"));
        out.push_back(tt.result("transmit position upper bound"));
    }

    // ||u - u_l|| >= linearization
    {
        Tally t;
        for (int s = 0; s < options.samples; ++s)
        {
            const Position u = random_point(cfg.bs_region, rng), uj = random_point(cfg.bs_region, rng),
                           ul = random_point(cfg.bs_region, rng);
            t.upper((u - ul).norm(), min_distance_linearized(u, uj, ul));
            t.tight(min_distance_linearized(uj, uj, ul), (uj - ul).norm());
        }
        out.push_back(t.result("distance linearization"));
    }

    // curvature constants dominate finite-difference Hessians
    {
        int points = 0, fails = 0;
        double worst = -kInf;
        const double h = 1e-6 * lambda;
        for (int inst = 0; inst < 5; ++inst)
        {
            const Eigen::MatrixXcd Q = random_hermitian(L, rng);
            Eigen::RowVectorXcd tau(L);
            for (int i = 0; i < L; ++i)
                tau[i] = cplx(g(rng), g(rng));
            const double delta = receive_curvature(Q, rx, lambda);
            const double xi = transmit_curvature(Q, tau, tx, lambda);
            for (int p = 0; p < options.hessian_points; ++p)
            {
                const Position u = random_point(cfg.user_region, rng), w = random_point(cfg.bs_region, rng);
                const double er = fd_hessian_max_eig([&](const Position &x) { return receive_direct(user, x, Q, lambda); },
                                                     u, h) - delta;
                const double et =
                    fd_hessian_max_eig([&](const Position &x) { return transmit_direct(user, x, Q, tau, 0.0, lambda); },
                                       w, h) - xi;
                points += 2;
                const double e = std::max(er / std::max(1.0, delta), et / std::max(1.0, xi));
                worst = std::max(worst, e);
                if (e > 1e-6)
                    ++fails;
            }
        }
        std::ostringstream os;
        os << points << " points, " << fails << " failures, worst relative excess " << worst;
        out.push_back({"curvature domination", fails == 0, os.str()});
    }

    if (options.run_optimizer)
    {
        OptimizerOptions o;
        o.verify_surrogates = true;
        o.check_feasibility = true;
        const auto raw = sample_geometry(cfg);
        try
        {
            const OptimizeResult r = optimize(cfg, raw, o);
            bool monotone = true;
            for (size_t i = 1; i < r.state.objective_trace.size(); ++i)
                monotone = monotone && r.state.objective_trace[i] >= r.state.objective_trace[i - 1] - 1e-8;
            const FeasibilityReport rep = check_feasibility(cfg, raw, r.state);
            const bool consistent = aux_objective(r.state.aux) <= r.throughput + 1e-6;
            std::ostringstream os;
            os << "throughput " << r.throughput << " bits/s/Hz after " << r.counts.outer << " outer iterations"
               << (rep.feasible ? "" : "; " + rep.detail) << (monotone ? "" : "; trace decreased")
               << (consistent ? "" : "; aux objective exceeds throughput");
            out.push_back({"optimizer feasibility and monotonicity", rep.feasible && monotone && consistent, os.str()});
        }
        catch (const std::exception &e)
        {
            out.push_back({"optimizer feasibility and monotonicity", false, e.what()});
        }
    }
    return out;
}

} // namespace manoma
