// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------
//
// Surrogate (majorizer / minorizer) constructions for the three SCA subproblems.
//
// Every surrogate is tight at its expansion point and bounds its target globally:
//   - bilinear_upper        (r - 1) nu           <= h(r, nu; r_j, nu_j)
//   - quadratic_lower       beta^T A beta        >= g(beta; beta_j)         (linear in beta)
//   - ordering_upper_fk     a b'Ab' - b^T A b    <= f(b, b'; b_j, b'_j)     (isotropic quadratic)
//   - receive_taylor_upper  f^T(u) Q f^*(u)      <= p(u; u_j)               (isotropic quadratic in u)
//   - transmit_taylor_upper g^H O g + 2Re(tau g) + l <= t(u; u_j)           (isotropic quadratic in u)
//   - min_distance_linearized ||u_m - u_l||      >= linear(u_m; u_m_j)
//
// Curvatures for the position surrogates come from entrywise bounds on the Hessian followed by
// the Frobenius-norm bound on its spectral norm.

#ifndef MANOMA_BOUNDS_HPP
#define MANOMA_BOUNDS_HPP

#include "manoma/channel.hpp"

#include <Eigen/Dense>
#include <vector>

namespace manoma
{

// Auxiliary rate / interference variables. nu(k, n) is used for n <= k only.
struct AuxState
{
    Eigen::VectorXd r;  // length N, r_n >= 1
    Eigen::MatrixXd nu; // N x N, lower triangle in use

    int num_users() const { return static_cast<int>(r.size()); }
};

// c ||x||^2 + a^T x + b, with c >= 0 (convex)
struct IsotropicQuadratic
{
    double c = 0.0;
    Eigen::VectorXd a;
    double b = 0.0;

    double eval(const Eigen::VectorXd &x) const { return c * x.squaredNorm() + a.dot(x) + b; }
};

// Per-path projections of the unit direction onto the antenna plane: rho_i = x cx_i + y cy_i
struct PathProjections
{
    Eigen::VectorXd cx;
    Eigen::VectorXd cy;
};

PathProjections receive_projections(const UserGeometry &user);
PathProjections transmit_projections(const UserGeometry &user);

// ------------------------------------------------------------------ rate / nu coupling

double bilinear_upper(double r, double nu, double r_j, double nu_j);

// h(r, nu) = x^T Q x + a^T x + b with x = (r, nu)
struct BilinearTerms
{
    Eigen::Matrix2d Q;
    Eigen::Vector2d a;
    double b = 0.0;
};
BilinearTerms bilinear_upper_terms(double r_j, double nu_j);

// ------------------------------------------------------------------ beamforming subproblem

// A_k = M^T M with M = [Re h, -Im h; Im h, Re h], so beta^T A beta = |h v|^2
Eigen::MatrixXd realified_gram(const Eigen::VectorXcd &h);

// beta = (Re v; Im v)
Eigen::VectorXd stack_real(const Eigen::VectorXcd &v);
Eigen::VectorXcd unstack_real(const Eigen::VectorXd &beta);

// Linear minorizer of beta^T A beta at beta_j; throws std::invalid_argument if A is not PSD
double quadratic_lower(const Eigen::VectorXd &beta, const Eigen::VectorXd &beta_j, const Eigen::MatrixXd &A);

// Coefficients of quadratic_lower as an affine function a^T beta + b
struct LinearForm
{
    Eigen::VectorXd a;
    double b = 0.0;
};
LinearForm quadratic_lower_terms(const Eigen::VectorXd &beta_j, const Eigen::MatrixXd &A);

// Second-order cone encoding nu_{k,n} >= sum_{j>n} |h_k v_j|^2 + sigma^2:
//   (nu + 1)/2 >= || [alpha_1 beta_j ...; alpha_2 beta_j ...; sigma; (1 - nu)/2] ||_2
struct InterferenceCone
{
    int user = 0;                // k
    int stream = 0;              // n
    Eigen::RowVectorXd alpha1;   // (Re h, -Im h)
    Eigen::RowVectorXd alpha2;   // (Im h,  Re h)
    std::vector<int> interferers; // j = n+1 .. N-1
    double noise_amplitude = 1.0; // sigma

    // Norm entries and right-hand side at a given point
    Eigen::VectorXd norm_entries(const std::vector<Eigen::VectorXd> &beta, double nu) const;
    double rhs(double nu) const { return 0.5 * (nu + 1.0); }
    bool contains(const std::vector<Eigen::VectorXd> &beta, double nu, double tol = 0.0) const;
};
InterferenceCone interference_soc_terms(int k, int n, const Eigen::VectorXcd &h, int num_users, double noise_power);

// Largest eigenvalue of the Hessian of m_k: 2 alpha lambda_max(A_k) = 2 alpha ||h_k||^2
double ordering_curvature(const Eigen::VectorXcd &h, double alpha);

// f_k(beta_n, beta_{n+1}) majorizing alpha b'^T A b' - b^T A b, evaluated directly
double ordering_upper_fk(const Eigen::VectorXd &beta_n, const Eigen::VectorXd &beta_next,
                         const Eigen::VectorXd &beta_n_j, const Eigen::VectorXd &beta_next_j,
                         const Eigen::MatrixXd &A, double alpha, double curvature);

// The same surrogate as an isotropic quadratic over x = (beta_n; beta_{n+1})
IsotropicQuadratic ordering_upper_terms(const Eigen::VectorXd &beta_n_j, const Eigen::VectorXd &beta_next_j,
                                        const Eigen::MatrixXd &A, double alpha, double curvature);

// ------------------------------------------------------------------ receive-side positions

// P(u, Q) = f^T(u) Q f^*(u) through its trigonometric expansion; Q must be Hermitian
double receive_quadform_eval(const Position &u, const Eigen::MatrixXcd &Q, const PathProjections &paths,
                             double wavelength);
Eigen::Vector2d receive_quadform_gradient(const Position &u, const Eigen::MatrixXcd &Q,
                                          const PathProjections &paths, double wavelength);
// delta = (zeta_1^2 + zeta_2^2 + 2 zeta_3^2)^(1/2)
double receive_curvature(const Eigen::MatrixXcd &Q, const PathProjections &paths, double wavelength);

double receive_taylor_upper(const Position &u, const Position &u_j, const Eigen::MatrixXcd &Q,
                            const PathProjections &paths, double wavelength);
IsotropicQuadratic receive_taylor_terms(const Position &u_j, const Eigen::MatrixXcd &Q,
                                        const PathProjections &paths, double wavelength);

// ------------------------------------------------------------------ transmit-side positions

// T(u, O, tau, l) = g^H(u) O g(u) + 2 Re(tau g(u)) + l; O must be Hermitian
double transmit_quadform_eval(const Position &u, const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau,
                              double l, const PathProjections &paths, double wavelength);
Eigen::Vector2d transmit_quadform_gradient(const Position &u, const Eigen::MatrixXcd &O,
                                           const Eigen::RowVectorXcd &tau, const PathProjections &paths,
                                           double wavelength);
// xi = (s_1^2 + s_2^2 + 2 s_3^2)^(1/2)
double transmit_curvature(const Eigen::MatrixXcd &O, const Eigen::RowVectorXcd &tau, const PathProjections &paths,
                          double wavelength);

double transmit_taylor_upper(const Position &u, const Position &u_j, const Eigen::MatrixXcd &O,
                             const Eigen::RowVectorXcd &tau, double l, const PathProjections &paths,
                             double wavelength);
IsotropicQuadratic transmit_taylor_terms(const Position &u_j, const Eigen::MatrixXcd &O,
                                         const Eigen::RowVectorXcd &tau, double l, const PathProjections &paths,
                                         double wavelength);

// (u_m_j - u_l)^T (u_m - u_l) / ||u_m_j - u_l||; throws std::domain_error if u_m_j == u_l
double min_distance_linearized(const Position &u_m, const Position &u_m_j, const Position &u_l);

// ------------------------------------------------------------------ channel constants

// a_n = Sigma_k G_k v_n; then C = a_n a_n^H, D = sum_{j>n} a_j a_j^H, E = alpha a_{n+1} a_{n+1}^H - a_n a_n^H
struct ReceiveConstants
{
    Eigen::MatrixXcd C;
    Eigen::MatrixXcd D; // zero for n = N-1
    Eigen::MatrixXcd E; // zero for n = N-1
};
ReceiveConstants build_receive_constants(int k, int n, const Eigen::MatrixXcd &V, const UserGeometry &user,
                                         const PositionList &bs_positions, double wavelength, double alpha);

// Constants isolating BS antenna m in |h_k v_n|^2, the interference sum and the ordering gap
struct BsConstants
{
    Eigen::RowVectorXcd eta; // f_k^T Sigma_k
    Eigen::MatrixXcd F;      // eta^H eta
    cplx t;                  // t^m_{k,n}
    Eigen::RowVectorXcd z;   // z^m_{k,n}
    Eigen::MatrixXcd I, J, Lmat;
    Eigen::RowVectorXcd d, e;
    double i = 0.0, j = 0.0, l = 0.0;
    bool has_next = false; // J/d/j and L/e/l are defined only when n < N-1
};
BsConstants build_bs_constants(int m, int k, int n, const Eigen::MatrixXcd &V, const UserGeometry &user,
                               const PositionList &bs_positions, const Position &user_position, double wavelength,
                               double alpha);

// Same constants from a precomputed eta = f_k^T Sigma_k and channel h_k = eta G_k
BsConstants build_bs_constants(int m, int n, const Eigen::MatrixXcd &V, const Eigen::RowVectorXcd &eta,
                               const Eigen::RowVectorXcd &h, double alpha);

} // namespace manoma

#endif
