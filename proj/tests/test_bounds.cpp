// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/bounds.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace manoma;

namespace
{

struct Fixture
{
    SystemConfig cfg;
    std::vector<UserGeometry> users;
    std::mt19937_64 rng{17};

    Fixture()
    {
        cfg.num_bs_antennas = 4;
        cfg.num_users = 3;
        cfg.num_paths = 6;
        cfg.rng_seed = 8;
        users = noise_normalized(sample_geometry(cfg), cfg.noise_power);
    }

    Position point(double side)
    {
        std::uniform_real_distribution<double> d(-side / 2, side / 2);
        const double x = d(rng);
        return {x, d(rng)};
    }
    PositionList bs_layout()
    {
        PositionList p(cfg.num_bs_antennas, 2);
        for (int m = 0; m < p.rows(); ++m)
            p.row(m) = point(cfg.bs_region).transpose();
        return p;
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// |h v|^2 with h from the oracle double sum
double oracle_gain(const UserGeometry &u, const PositionList &bs, const Position &ur, double lambda,
                   const Eigen::VectorXcd &v)
{
    return std::norm(oracle::channel(u, bs, ur, lambda).dot(v.conjugate()));
}

} // namespace

TEST(Bounds, BilinearDominatesAndTouches)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(1.0, 20.0);
    for (int s = 0; s < 2000; ++s)
    {
        const double r = d(rng), nu = d(rng), rj = d(rng), nj = d(rng);
        EXPECT_GE(bilinear_upper(r, nu, rj, nj), (r - 1.0) * nu - 1e-9 * std::max(1.0, (r - 1.0) * nu));
        EXPECT_NEAR(bilinear_upper(rj, nj, rj, nj), (rj - 1.0) * nj, 1e-9 * (rj * nj));
        const BilinearTerms t = bilinear_upper_terms(rj, nj);
        const Eigen::Vector2d x(r, nu);
        EXPECT_NEAR(x.dot(t.Q * x) + t.a.dot(x) + t.b, bilinear_upper(r, nu, rj, nj), 1e-9 * r * nu);
    }
}

TEST(Bounds, RealifiedGramReproducesGain)
{
    std::mt19937_64 rng(2);
    for (int s = 0; s < 100; ++s)
    {
        const Eigen::VectorXcd h = oracle::random_matrix(5, 1, rng), v = oracle::random_matrix(5, 1, rng);
        const Eigen::VectorXd beta = stack_real(v);
        const double direct = std::norm((h.transpose() * v)(0));
        EXPECT_NEAR(beta.dot(realified_gram(h) * beta), direct, 1e-9 * direct);
        EXPECT_LT((unstack_real(beta) - v).norm(), 1e-15);
    }
}

TEST(Bounds, QuadraticLowerMinorizes)
{
    std::mt19937_64 rng(3);
    const Eigen::VectorXcd h = oracle::random_matrix(4, 1, rng);
    const Eigen::MatrixXd A = realified_gram(h);
    for (int s = 0; s < 1000; ++s)
    {
        const Eigen::VectorXd b = stack_real(oracle::random_matrix(4, 1, rng)),
                              bj = stack_real(oracle::random_matrix(4, 1, rng));
        const double target = b.dot(A * b);
        EXPECT_LE(quadratic_lower(b, bj, A), target + 1e-9 * std::max(1.0, target));
        EXPECT_NEAR(quadratic_lower(bj, bj, A), bj.dot(A * bj), 1e-9 * std::max(1.0, bj.dot(A * bj)));
        const LinearForm f = quadratic_lower_terms(bj, A);
        EXPECT_NEAR(f.a.dot(b) + f.b, quadratic_lower(b, bj, A), 1e-9 * std::max(1.0, target));
    }
}

TEST(Bounds, QuadraticLowerRejectsIndefinite)
{
    Eigen::Matrix2d A;
    A << 1.0, 0.0, 0.0, -1.0;
    EXPECT_THROW(quadratic_lower(Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1), A), std::invalid_argument);
}

TEST(Bounds, OrderingSurrogate)
{
    std::mt19937_64 rng(4);
    const Eigen::VectorXcd h = oracle::random_matrix(3, 1, rng);
    const Eigen::MatrixXd A = realified_gram(h);
    const double alpha = 2.0;
    const double curv = ordering_curvature(h, alpha);
    EXPECT_NEAR(curv, 2.0 * alpha * h.squaredNorm(), 1e-12 * curv);
    for (int s = 0; s < 1000; ++s)
    {
        const Eigen::VectorXd a = stack_real(oracle::random_matrix(3, 1, rng)), b = stack_real(oracle::random_matrix(3, 1, rng)),
                              aj = stack_real(oracle::random_matrix(3, 1, rng)),
                              bj = stack_real(oracle::random_matrix(3, 1, rng));
        const double gap = alpha * b.dot(A * b) - a.dot(A * a);
        const double fk = ordering_upper_fk(a, b, aj, bj, A, alpha, curv);
        EXPECT_GE(fk, gap - 1e-9 * std::max(1.0, std::abs(gap)));
        EXPECT_NEAR(ordering_upper_fk(aj, bj, aj, bj, A, alpha, curv), alpha * bj.dot(A * bj) - aj.dot(A * aj),
                    1e-9 * std::max(1.0, std::abs(gap)) + 1e-9);
        Eigen::VectorXd x(a.size() + b.size());
        x << a, b;
        const IsotropicQuadratic q = ordering_upper_terms(aj, bj, A, alpha, curv);
        EXPECT_GE(q.c, 0.0);
        EXPECT_NEAR(q.eval(x), fk, 1e-9 * std::max(1.0, std::abs(fk)));
    }
}

TEST(Bounds, InterferenceConeEncodesSum)
{
    std::mt19937_64 rng(5);
    const int N = 4;
    const Eigen::VectorXcd h = oracle::random_matrix(3, 1, rng);
    std::vector<Eigen::VectorXd> beta;
    for (int j = 0; j < N; ++j)
        beta.push_back(stack_real(oracle::random_matrix(3, 1, rng)));
    for (double noise : {1.0, 0.25})
    {
        const InterferenceCone cone = interference_soc_terms(2, 1, h, N, noise);
        double sum = noise;
        for (int j = 2; j < N; ++j)
            sum += std::norm((h.transpose() * unstack_real(beta[j]))(0));
        EXPECT_TRUE(cone.contains(beta, sum * (1 + 1e-9)));
        EXPECT_FALSE(cone.contains(beta, sum * (1 - 1e-6)));
        // squared norm minus squared rhs equals sum - nu
        const double nu = 3.0 * sum;
        EXPECT_NEAR(cone.norm_entries(beta, nu).squaredNorm() - std::pow(cone.rhs(nu), 2), sum - nu, 1e-9 * nu);
    }
}

TEST(Bounds, ReceiveSurrogateAndGradient)
{
    Fixture fx;
    const double lambda = fx.cfg.wavelength;
    const UserGeometry &u = fx.users[1];
    const PathProjections rx = receive_projections(u);
    for (int inst = 0; inst < 20; ++inst)
    {
        const Eigen::MatrixXcd Q = oracle::random_hermitian(fx.cfg.num_paths, fx.rng);
        const double delta = receive_curvature(Q, rx, lambda);
        for (int s = 0; s < 50; ++s)
        {
            const Position p = fx.point(fx.cfg.user_region), pj = fx.point(fx.cfg.user_region);
            const Eigen::VectorXcd fv = receive_field_response(u, p, lambda);
            const double direct = (fv.transpose() * Q * fv.conjugate())(0).real();
            EXPECT_NEAR(receive_quadform_eval(p, Q, rx, lambda), direct, 1e-9 * std::max(1.0, std::abs(direct)));
            EXPECT_GE(receive_taylor_upper(p, pj, Q, rx, lambda), direct - 1e-9 * std::max(1.0, std::abs(direct)));
            const double at = receive_quadform_eval(pj, Q, rx, lambda);
            EXPECT_NEAR(receive_taylor_upper(pj, pj, Q, rx, lambda), at, 1e-9 * std::max(1.0, std::abs(at)));
            const IsotropicQuadratic q = receive_taylor_terms(pj, Q, rx, lambda);
            EXPECT_NEAR(q.c, 0.5 * delta, 1e-12 * std::max(1.0, delta));
            EXPECT_NEAR(q.eval(p), receive_taylor_upper(p, pj, Q, rx, lambda),
                        1e-9 * std::max(1.0, std::abs(q.eval(p))));

            const double step = 1e-7 * lambda;
            const Eigen::Vector2d g = receive_quadform_gradient(p, Q, rx, lambda);
            for (int axis = 0; axis < 2; ++axis)
            {
                Position e = Position::Zero();
                e[axis] = step;
                const double fd = (receive_quadform_eval(p + e, Q, rx, lambda) - receive_quadform_eval(p - e, Q, rx, lambda)) /
                                  (2 * step);
                EXPECT_NEAR(g[axis], fd, 1e-5 * std::max(1.0, g.norm()));
            }
        }
    }
}

TEST(Bounds, TransmitSurrogateAndGradient)
{
    Fixture fx;
    const double lambda = fx.cfg.wavelength;
    const UserGeometry &u = fx.users[0];
    const PathProjections tx = transmit_projections(u);
    const int L = fx.cfg.num_paths;
    for (int inst = 0; inst < 20; ++inst)
    {
        const Eigen::MatrixXcd O = oracle::random_hermitian(L, fx.rng);
        const Eigen::RowVectorXcd tau = oracle::random_matrix(1, L, fx.rng);
        const double l = 0.3 * inst;
        for (int s = 0; s < 50; ++s)
        {
            const Position p = fx.point(fx.cfg.bs_region), pj = fx.point(fx.cfg.bs_region);
            const Eigen::VectorXcd g = field_response_vector(path_differences(p, u.aod_elevation, u.aod_azimuth), lambda);
            const double direct = (g.adjoint() * O * g)(0).real() + 2.0 * (tau * g)(0).real() + l;
            const double scale = std::max(1.0, std::abs(direct));
            EXPECT_NEAR(transmit_quadform_eval(p, O, tau, l, tx, lambda), direct, 1e-9 * scale);
            EXPECT_GE(transmit_taylor_upper(p, pj, O, tau, l, tx, lambda), direct - 1e-9 * scale);
            const double at = transmit_quadform_eval(pj, O, tau, l, tx, lambda);
            EXPECT_NEAR(transmit_taylor_upper(pj, pj, O, tau, l, tx, lambda), at, 1e-9 * std::max(1.0, std::abs(at)));
            const IsotropicQuadratic q = transmit_taylor_terms(pj, O, tau, l, tx, lambda);
            EXPECT_NEAR(q.eval(p), transmit_taylor_upper(p, pj, O, tau, l, tx, lambda),
                        1e-9 * std::max(1.0, std::abs(q.eval(p))));

            const double step = 1e-7 * lambda;
            const Eigen::Vector2d grad = transmit_quadform_gradient(p, O, tau, tx, lambda);
            for (int axis = 0; axis < 2; ++axis)
            {
                Position e = Position::Zero();
                e[axis] = step;
                const double fd = (transmit_quadform_eval(p + e, O, tau, l, tx, lambda) -
                                   transmit_quadform_eval(p - e, O, tau, l, tx, lambda)) /
                                  (2 * step);
                EXPECT_NEAR(grad[axis], fd, 1e-5 * std::max(1.0, grad.norm()));
            }
        }
    }
}

TEST(Bounds, CurvatureDominatesFiniteDifferenceHessian)
{
    Fixture fx;
    const double lambda = fx.cfg.wavelength;
    const UserGeometry &u = fx.users[2];
    const PathProjections rx = receive_projections(u), tx = transmit_projections(u);
    const int L = fx.cfg.num_paths;
    const double h = 1e-6 * lambda;
    auto max_eig = [&](auto f, const Position &p) {
        Eigen::Matrix2d H;
        const Eigen::Vector2d ex(h, 0), ey(0, h);
        H(0, 0) = (f(p + ex) - 2 * f(p) + f(p - ex)) / (h * h);
        H(1, 1) = (f(p + ey) - 2 * f(p) + f(p - ey)) / (h * h);
        H(0, 1) = H(1, 0) = (f(p + ex + ey) - f(p + ex - ey) - f(p - ex + ey) + f(p - ex - ey)) / (4 * h * h);
        return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues().maxCoeff();
    };
    for (int inst = 0; inst < 5; ++inst)
    {
        const Eigen::MatrixXcd Q = oracle::random_hermitian(L, fx.rng);
        const Eigen::RowVectorXcd tau = oracle::random_matrix(1, L, fx.rng);
        const double delta = receive_curvature(Q, rx, lambda), xi = transmit_curvature(Q, tau, tx, lambda);
        for (int s = 0; s < 50; ++s)
        {
            const Position p = fx.point(fx.cfg.user_region), w = fx.point(fx.cfg.bs_region);
            const double er = max_eig([&](const Position &x) {
                const Eigen::VectorXcd f = receive_field_response(u, x, lambda);
                return (f.transpose() * Q * f.conjugate())(0).real();
            }, p);
            const double et = max_eig([&](const Position &x) {
                const Eigen::VectorXcd g = field_response_vector(path_differences(x, u.aod_elevation, u.aod_azimuth), lambda);
                return (g.adjoint() * Q * g)(0).real() + 2.0 * (tau * g)(0).real();
            }, w);
            EXPECT_LE(er - delta, 1e-6 * std::max(1.0, delta));
            EXPECT_LE(et - xi, 1e-6 * std::max(1.0, xi));
        }
    }
}

TEST(Bounds, DistanceLinearization)
{
    Fixture fx;
    for (int s = 0; s < 1000; ++s)
    {
        const Position a = fx.point(0.2), aj = fx.point(0.2), b = fx.point(0.2);
        EXPECT_LE(min_distance_linearized(a, aj, b), (a - b).norm() + 1e-9);
        EXPECT_NEAR(min_distance_linearized(aj, aj, b), (aj - b).norm(), 1e-12);
    }
    EXPECT_THROW(min_distance_linearized(Position(1, 0), Position(0, 0), Position(0, 0)), std::domain_error);
}

TEST(Bounds, ReceiveConstantsReconstructChannelTerms)
{
    Fixture fx;
    const double lambda = fx.cfg.wavelength, alpha = 1.5;
    const int N = fx.cfg.num_users;
    for (int inst = 0; inst < 100; ++inst)
    {
        const PositionList bs = fx.bs_layout();
        const Eigen::MatrixXcd V = oracle::random_matrix(fx.cfg.num_bs_antennas, N, fx.rng, 1e-3);
        const int k = inst % N, n = (inst / N) % (k + 1);
        const UserGeometry &u = fx.users[k];
        const Position ur = fx.point(fx.cfg.user_region);
        const ReceiveConstants c = build_receive_constants(k, n, V, u, bs, lambda, alpha);
        const Eigen::VectorXcd f = receive_field_response(u, ur, lambda);
        auto form = [&](const Eigen::MatrixXcd &Q) { return (f.transpose() * Q * f.conjugate())(0).real(); };

        const double own = oracle_gain(u, bs, ur, lambda, V.col(n));
        double interference = 1.0; // sigma^2 = 1 after normalization
        for (int j = n + 1; j < N; ++j)
            interference += oracle_gain(u, bs, ur, lambda, V.col(j));
        const double gap = n + 1 < N ? alpha * oracle_gain(u, bs, ur, lambda, V.col(n + 1)) - own : 0.0;

        EXPECT_LT(rel(-form(-c.C), own), 1e-9);
        EXPECT_LT(rel(form(c.D) + 1.0, interference), 1e-9);
        EXPECT_LT(std::abs(form(c.E) - gap) / std::max({1.0, own, std::abs(gap)}), 1e-9);
    }
}

TEST(Bounds, BsConstantsReconstructChannelTerms)
{
    Fixture fx;
    const double lambda = fx.cfg.wavelength, alpha = 2.0;
    const int N = fx.cfg.num_users, M = fx.cfg.num_bs_antennas;
    for (int inst = 0; inst < 100; ++inst)
    {
        const PositionList bs = fx.bs_layout();
        const Eigen::MatrixXcd V = oracle::random_matrix(M, N, fx.rng, 1e-3);
        const int k = inst % N, n = (inst / N) % (k + 1), m = inst % M;
        const UserGeometry &u = fx.users[k];
        const Position ur = fx.point(fx.cfg.user_region);
        const BsConstants c = build_bs_constants(m, k, n, V, u, bs, ur, lambda, alpha);
        const Position w = bs.row(m).transpose();
        const Eigen::VectorXcd g = field_response_vector(path_differences(w, u.aod_elevation, u.aod_azimuth), lambda);
        auto T = [&](const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau, double l) {
            return (g.adjoint() * O * g)(0).real() + 2.0 * (tau * g)(0).real() + l;
        };

        const double own = oracle_gain(u, bs, ur, lambda, V.col(n));
        double interference = 0.0;
        for (int j = n + 1; j < N; ++j)
            interference += oracle_gain(u, bs, ur, lambda, V.col(j));
        const double scale = std::max(1.0, own + interference);

        EXPECT_LT(std::abs(T(c.I, -c.z, c.i) + own) / scale, 1e-9);
        EXPECT_EQ(c.has_next, n + 1 < N);
        if (c.has_next)
        {
            const double gap = alpha * oracle_gain(u, bs, ur, lambda, V.col(n + 1)) - own;
            EXPECT_LT(std::abs(T(c.J, c.d, c.j) - interference) / scale, 1e-9);
            EXPECT_LT(std::abs(T(c.Lmat, c.e, c.l) - gap) / std::max(scale, std::abs(gap)), 1e-9);
        }
    }
}

TEST(Bounds, ConstantsRejectBadIndices)
{
    Fixture fx;
    const Eigen::MatrixXcd V = Eigen::MatrixXcd::Ones(4, 3);
    const PositionList bs = uniform_bs_grid(fx.cfg);
    EXPECT_THROW(build_receive_constants(0, 1, V, fx.users[0], bs, 0.01, 1.0), std::out_of_range);
    EXPECT_THROW(build_bs_constants(4, 1, 0, V, fx.users[1], bs, Position::Zero(), 0.01, 1.0), std::out_of_range);
}
