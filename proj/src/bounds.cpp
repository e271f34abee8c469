// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/bounds.hpp"

#include "manoma/conic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace manoma
{

namespace
{
constexpr double kPi = std::numbers::pi;

double wavenumber(double wavelength) { return 2.0 * kPi / wavelength; }

void require_hermitian(const Eigen::MatrixXcd &Q, const char *who)
{
    if (Q.rows() != Q.cols())
        throw std::invalid_argument(std::string(who) + ": matrix is not square");
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
}
} // namespace

PathProjections receive_projections(const UserGeometry &user)
{
    const Eigen::ArrayXd c = user.aoa_elevation.array().cos();
    return {(c * user.aoa_azimuth.array().cos()).matrix(), (c * user.aoa_azimuth.array().sin()).matrix()};
}

PathProjections transmit_projections(const UserGeometry &user)
{
    const Eigen::ArrayXd c = user.aod_elevation.array().cos();
    return {(c * user.aod_azimuth.array().cos()).matrix(), (c * user.aod_azimuth.array().sin()).matrix()};
}

// ------------------------------------------------------------------ rate / nu coupling

double bilinear_upper(double r, double nu, double r_j, double nu_j)
{
    const double dj = r_j - nu_j;
    return 0.25 * (r + nu) * (r + nu) - nu - 0.25 * (dj * dj + 2.0 * dj * (r - r_j - nu + nu_j));
}

BilinearTerms bilinear_upper_terms(double r_j, double nu_j)
{
    // 1/4 (r + nu)^2 - nu - 1/4 dj^2 - 1/2 dj (r - nu) + 1/2 dj dj
    const double dj = r_j - nu_j;
    BilinearTerms t;
    t.Q << 0.25, 0.25, 0.25, 0.25;
    t.a << -0.5 * dj, -1.0 + 0.5 * dj;
    t.b = 0.25 * dj * dj;
    return t;
}

// ------------------------------------------------------------------ beamforming subproblem

Eigen::MatrixXd realified_gram(const Eigen::VectorXcd &h)
{
    const auto M = h.size();
    Eigen::MatrixXd Mr(2, 2 * M);
    Mr.row(0) << h.real().transpose(), -h.imag().transpose();
    Mr.row(1) << h.imag().transpose(), h.real().transpose();
    return Mr.transpose() * Mr;
}

Eigen::VectorXd stack_real(const Eigen::VectorXcd &v)
{
    Eigen::VectorXd b(2 * v.size());
    b << v.real(), v.imag();
    return b;
}

Eigen::VectorXcd unstack_real(const Eigen::VectorXd &beta)
{
    const auto M = beta.size() / 2;
    Eigen::VectorXcd v(M);
    for (Eigen::Index i = 0; i < M; ++i)
        v[i] = cplx(beta[i], beta[M + i]);
    return v;
}

LinearForm quadratic_lower_terms(const Eigen::VectorXd &beta_j, const Eigen::MatrixXd &A)
{
    if (!is_psd(A))
        throw std::invalid_argument("quadratic_lower: matrix is not positive semidefinite");
    const Eigen::VectorXd Ab = A.transpose() * beta_j;
    return {2.0 * Ab, -beta_j.dot(A * beta_j)};
}

double quadratic_lower(const Eigen::VectorXd &beta, const Eigen::VectorXd &beta_j, const Eigen::MatrixXd &A)
{
    const LinearForm f = quadratic_lower_terms(beta_j, A);
    return f.a.dot(beta) + f.b;
}

Eigen::VectorXd InterferenceCone::norm_entries(const std::vector<Eigen::VectorXd> &beta, double nu) const
{
    const auto J = static_cast<Eigen::Index>(interferers.size());
    Eigen::VectorXd e(2 * J + 2);
    for (Eigen::Index j = 0; j < J; ++j)
    {
        e[j] = alpha1.dot(beta[interferers[j]]);
        e[J + j] = alpha2.dot(beta[interferers[j]]);
    }
    e[2 * J] = noise_amplitude;
    e[2 * J + 1] = 0.5 * (1.0 - nu);
    return e;
}

bool InterferenceCone::contains(const std::vector<Eigen::VectorXd> &beta, double nu, double tol) const
{
    return norm_entries(beta, nu).norm() <= rhs(nu) + tol;
}

InterferenceCone interference_soc_terms(int k, int n, const Eigen::VectorXcd &h, int num_users, double noise_power)
{
    if (n < 0 || n > k || k >= num_users)
        throw std::out_of_range("interference_soc_terms: require 0 <= n <= k < N");
    InterferenceCone c;
    c.user = k;
    c.stream = n;
    const auto M = h.size();
    c.alpha1.resize(2 * M);
    c.alpha2.resize(2 * M);
    c.alpha1 << h.real().transpose(), -h.imag().transpose();
    c.alpha2 << h.imag().transpose(), h.real().transpose();
    for (int j = n + 1; j < num_users; ++j)
        c.interferers.push_back(j);
    c.noise_amplitude = std::sqrt(noise_power);
    return c;
}

double ordering_curvature(const Eigen::VectorXcd &h, double alpha) { return 2.0 * alpha * h.squaredNorm(); }

IsotropicQuadratic ordering_upper_terms(const Eigen::VectorXd &beta_n_j, const Eigen::VectorXd &beta_next_j,
                                        const Eigen::MatrixXd &A, double alpha, double curvature)
{
    if (!is_psd(A))
        throw std::invalid_argument("ordering_upper_fk: matrix is not positive semidefinite");
    const auto D = beta_n_j.size();
    Eigen::VectorXd xj(2 * D);
    xj << beta_n_j, beta_next_j;
    const Eigen::VectorXd Ab = A * beta_n_j, Abn = A * beta_next_j;
    const double m_j = alpha * beta_next_j.dot(Abn) - beta_n_j.dot(Ab);
    Eigen::VectorXd grad(2 * D);
    grad << -2.0 * Ab, 2.0 * alpha * Abn;
    // m_j + grad^T (x - xj) + curvature/2 ||x - xj||^2
    IsotropicQuadratic q;
    q.c = 0.5 * curvature;
    q.a = grad - curvature * xj;
    q.b = m_j - grad.dot(xj) + 0.5 * curvature * xj.squaredNorm();
    return q;
}

double ordering_upper_fk(const Eigen::VectorXd &beta_n, const Eigen::VectorXd &beta_next,
                         const Eigen::VectorXd &beta_n_j, const Eigen::VectorXd &beta_next_j,
                         const Eigen::MatrixXd &A, double alpha, double curvature)
{
    if (!is_psd(A))
        throw std::invalid_argument("ordering_upper_fk: matrix is not positive semidefinite");
    const Eigen::VectorXd Ab = A * beta_n_j, Abn = A * beta_next_j;
    const double m_j = alpha * beta_next_j.dot(Abn) - beta_n_j.dot(Ab);
    const Eigen::VectorXd dn = beta_n - beta_n_j, dnext = beta_next - beta_next_j;
    return m_j - 2.0 * Ab.dot(dn) + 2.0 * alpha * Abn.dot(dnext) +
           0.5 * curvature * (dn.squaredNorm() + dnext.squaredNorm());
}

// ------------------------------------------------------------------ receive-side positions

double receive_quadform_eval(const Position &u, const Eigen::MatrixXcd &Q, const PathProjections &paths,
                             double wavelength)
{
    require_hermitian(Q, "receive_quadform_eval");
    const double kw = wavenumber(wavelength);
    const auto L = Q.rows();
    const Eigen::VectorXd rho = u.x() * paths.cx + u.y() * paths.cy;
    double v = Q.diagonal().real().sum();
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i + 1; j < L; ++j)
            v += 2.0 * std::abs(Q(i, j)) * std::cos(kw * (rho[i] - rho[j]) + std::arg(Q(i, j)));
    return v;
}

Eigen::Vector2d receive_quadform_gradient(const Position &u, const Eigen::MatrixXcd &Q, const PathProjections &paths,
                                          double wavelength)
{
    const double kw = wavenumber(wavelength);
    const auto L = Q.rows();
    const Eigen::VectorXd rho = u.x() * paths.cx + u.y() * paths.cy;
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i + 1; j < L; ++j)
        {
            const double s = -2.0 * std::abs(Q(i, j)) * kw * std::sin(kw * (rho[i] - rho[j]) + std::arg(Q(i, j)));
            g.x() += s * (paths.cx[i] - paths.cx[j]);
            g.y() += s * (paths.cy[i] - paths.cy[j]);
        }
    return g;
}

double receive_curvature(const Eigen::MatrixXcd &Q, const PathProjections &paths, double wavelength)
{
    const double scale = 8.0 * kPi * kPi / (wavelength * wavelength);
    double z1 = 0.0, z2 = 0.0, z3 = 0.0;
    const auto L = Q.rows();
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i + 1; j < L; ++j)
        {
            const double q = std::abs(Q(i, j));
            const double dx = paths.cx[i] - paths.cx[j];
            const double dy = paths.cy[i] - paths.cy[j];
            z1 += q * dx * dx;
            z2 += q * dy * dy;
            z3 += q * std::abs(dx) * std::abs(dy);
        }
    z1 *= scale;
    z2 *= scale;
    z3 *= scale;
    return std::sqrt(z1 * z1 + z2 * z2 + 2.0 * z3 * z3);
}

IsotropicQuadratic receive_taylor_terms(const Position &u_j, const Eigen::MatrixXcd &Q, const PathProjections &paths,
                                        double wavelength)
{
    const double P = receive_quadform_eval(u_j, Q, paths, wavelength);
    const Eigen::Vector2d g = receive_quadform_gradient(u_j, Q, paths, wavelength);
    const double delta = receive_curvature(Q, paths, wavelength);
    IsotropicQuadratic q;
    q.c = 0.5 * delta;
    q.a = g - delta * u_j;
    q.b = P - g.dot(u_j) + 0.5 * delta * u_j.squaredNorm();
    return q;
}

double receive_taylor_upper(const Position &u, const Position &u_j, const Eigen::MatrixXcd &Q,
                            const PathProjections &paths, double wavelength)
{
    const double P = receive_quadform_eval(u_j, Q, paths, wavelength);
    const Eigen::Vector2d g = receive_quadform_gradient(u_j, Q, paths, wavelength);
    const double delta = receive_curvature(Q, paths, wavelength);
    const Eigen::Vector2d d = u - u_j;
    return P + g.dot(d) + 0.5 * delta * d.squaredNorm();
}

// ------------------------------------------------------------------ transmit-side positions

double transmit_quadform_eval(const Position &u, const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau, double l,
                              const PathProjections &paths, double wavelength)
{
    require_hermitian(O, "transmit_quadform_eval");
    const double kw = wavenumber(wavelength);
    const auto L = O.rows();
    const Eigen::VectorXd rho = u.x() * paths.cx + u.y() * paths.cy;
    double v = O.diagonal().real().sum() + l;
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i + 1; j < L; ++j)
            v += 2.0 * std::abs(O(i, j)) * std::cos(kw * (rho[j] - rho[i]) + std::arg(O(i, j)));
    for (Eigen::Index i = 0; i < L; ++i)
        v += 2.0 * (tau[i].real() * std::cos(kw * rho[i]) - tau[i].imag() * std::sin(kw * rho[i]));
    return v;
}

Eigen::Vector2d transmit_quadform_gradient(const Position &u, const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau,
                                           const PathProjections &paths, double wavelength)
{
    const double kw = wavenumber(wavelength);
    const auto L = O.rows();
    const Eigen::VectorXd rho = u.x() * paths.cx + u.y() * paths.cy;
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i + 1; j < L; ++j)
        {
            const double s = -2.0 * std::abs(O(i, j)) * kw * std::sin(kw * (rho[j] - rho[i]) + std::arg(O(i, j)));
            g.x() += s * (paths.cx[j] - paths.cx[i]);
            g.y() += s * (paths.cy[j] - paths.cy[i]);
        }
    for (Eigen::Index i = 0; i < L; ++i)
    {
        const double s = -2.0 * kw * (tau[i].real() * std::sin(kw * rho[i]) + tau[i].imag() * std::cos(kw * rho[i]));
        g.x() += s * paths.cx[i];
        g.y() += s * paths.cy[i];
    }
    return g;
}

double transmit_curvature(const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau, const PathProjections &paths,
                          double wavelength)
{
    const double scale = 8.0 * kPi * kPi / (wavelength * wavelength);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const auto L = O.rows();
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i + 1; j < L; ++j)
        {
            const double o = std::abs(O(i, j));
            const double dx = paths.cx[j] - paths.cx[i];
            const double dy = paths.cy[j] - paths.cy[i];
            s1 += o * dx * dx;
            s2 += o * dy * dy;
            s3 += o * std::abs(dx) * std::abs(dy);
        }
    for (Eigen::Index i = 0; i < L; ++i)
    {
        const double w = std::abs(tau[i].real()) + std::abs(tau[i].imag());
        s1 += w * paths.cx[i] * paths.cx[i];
        s2 += w * paths.cy[i] * paths.cy[i];
        s3 += w * std::abs(paths.cx[i]) * std::abs(paths.cy[i]);
    }
    s1 *= scale;
    s2 *= scale;
    s3 *= scale;
    return std::sqrt(s1 * s1 + s2 * s2 + 2.0 * s3 * s3);
}

IsotropicQuadratic transmit_taylor_terms(const Position &u_j, const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau,
                                         double l, const PathProjections &paths, double wavelength)
{
    const double T = transmit_quadform_eval(u_j, O, tau, l, paths, wavelength);
    const Eigen::Vector2d g = transmit_quadform_gradient(u_j, O, tau, paths, wavelength);
    const double xi = transmit_curvature(O, tau, paths, wavelength);
    IsotropicQuadratic q;
    q.c = 0.5 * xi;
    q.a = g - xi * u_j;
    q.b = T - g.dot(u_j) + 0.5 * xi * u_j.squaredNorm();
    return q;
}

double transmit_taylor_upper(const Position &u, const Position &u_j, const Eigen::MatrixXcd &O,
                             const Eigen::RowVectorXcd &tau, double l, const PathProjections &paths, double wavelength)
{
    return transmit_taylor_terms(u_j, O, tau, l, paths, wavelength).eval(u);
}

double min_distance_linearized(const Position &u_m, const Position &u_m_j, const Position &u_l)
{
    const Eigen::Vector2d ref = u_m_j - u_l;
    const double norm = ref.norm();
    if (norm == 0.0)
        throw std::domain_error("min_distance_linearized: expansion point coincides with the other antenna");
    return ref.dot(u_m - u_l) / norm;
}

// ------------------------------------------------------------------ channel constants

ReceiveConstants build_receive_constants(int k, int n, const Eigen::MatrixXcd &V, const UserGeometry &user,
                                         const PositionList &bs_positions, double wavelength, double alpha)
{
    const int N = static_cast<int>(V.cols());
    if (n < 0 || n > k || k >= N)
        throw std::out_of_range("build_receive_constants: require 0 <= n <= k < N");
    const Eigen::MatrixXcd G = transmit_field_response(user, bs_positions, wavelength);
    // column j: Sigma G v_j
    const Eigen::MatrixXcd A = user.prm_diag.asDiagonal() * (G * V);
    const auto L = A.rows();
    ReceiveConstants c;
    c.C = A.col(n) * A.col(n).adjoint();
    c.D = Eigen::MatrixXcd::Zero(L, L);
    for (int j = n + 1; j < N; ++j)
        c.D += A.col(j) * A.col(j).adjoint();
    c.E = Eigen::MatrixXcd::Zero(L, L);
    if (n + 1 < N)
        c.E = alpha * A.col(n + 1) * A.col(n + 1).adjoint() - c.C;
    return c;
}

BsConstants build_bs_constants(int m, int k, int n, const Eigen::MatrixXcd &V, const UserGeometry &user,
                               const PositionList &bs_positions, const Position &user_position, double wavelength,
                               double alpha)
{
    const int N = static_cast<int>(V.cols());
    const int M = static_cast<int>(V.rows());
    if (m < 0 || m >= M || n < 0 || n > k || k >= N)
        throw std::out_of_range("build_bs_constants: index out of range");

    const Eigen::VectorXcd f = receive_field_response(user, user_position, wavelength);
    const Eigen::RowVectorXcd eta = f.cwiseProduct(user.prm_diag).transpose();
    const Eigen::MatrixXcd G = transmit_field_response(user, bs_positions, wavelength);
    return build_bs_constants(m, n, V, eta, eta * G, alpha);
}

BsConstants build_bs_constants(int m, int n, const Eigen::MatrixXcd &V, const Eigen::RowVectorXcd &eta,
                               const Eigen::RowVectorXcd &h, double alpha)
{
    const int N = static_cast<int>(V.cols());
    if (m < 0 || m >= V.rows() || n < 0 || n >= N || h.size() != V.rows())
        throw std::out_of_range("build_bs_constants: index out of range");

    BsConstants c;
    c.eta = eta;
    c.F = c.eta.adjoint() * c.eta;

    // t_j: stream j received through every antenna except m; z_j = v_{j,m} conj(t_j) eta
    std::vector<cplx> t(N);
    std::vector<Eigen::RowVectorXcd> z(N);
    for (int j = 0; j < N; ++j)
    {
        t[j] = (h * V.col(j))(0) - V(m, j) * h[m];
        z[j] = V(m, j) * std::conj(t[j]) * c.eta;
    }
    const auto L = c.eta.size();
    c.t = t[n];
    c.z = z[n];
    c.I = -std::norm(V(m, n)) * c.F;
    c.i = -std::norm(t[n]);
    c.d = Eigen::RowVectorXcd::Zero(L);
    c.Lmat = Eigen::MatrixXcd::Zero(L, L);
    c.e = Eigen::RowVectorXcd::Zero(L);
    c.has_next = n + 1 < N;
    double vsum = 0.0;
    for (int j = n + 1; j < N; ++j)
    {
        vsum += std::norm(V(m, j));
        c.d += z[j];
        c.j += std::norm(t[j]);
    }
    c.J = vsum * c.F;
    if (c.has_next)
    {
        c.Lmat = (alpha * std::norm(V(m, n + 1)) - std::norm(V(m, n))) * c.F;
        c.e = alpha * z[n + 1] - z[n];
        c.l = alpha * std::norm(t[n + 1]) - std::norm(t[n]);
    }
    return c;
}

} // namespace manoma
