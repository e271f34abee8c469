// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#ifndef MANOMA_METRICS_HPP
#define MANOMA_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

namespace manoma
{

// Combined beamforming / power matrix. Column n is v_n = sqrt(p_n) w_n.
struct TransmitDesign
{
    Eigen::MatrixXcd V; // M x N

    double power(Eigen::Index n) const { return V.col(n).squaredNorm(); }
    double total_power() const { return V.squaredNorm(); }

    // Unit-norm beamformer, or the zero vector when no power is allocated
    Eigen::VectorXcd beamformer(Eigen::Index n) const
    {
        const double norm = V.col(n).norm();
        if (norm == 0.0)
            return Eigen::VectorXcd::Zero(V.rows());
        return V.col(n) / norm;
    }

    static TransmitDesign from_beams(const Eigen::MatrixXcd &W, const Eigen::VectorXd &powers);
};

struct MrtMargin
{
    int user;   // k (0-based), observing receiver
    int stream; // n (0-based), margin compares stream n against stream n+1
    double margin;
};

struct RateReport
{
    Eigen::MatrixXd sinr_table;     // (k, l) defined for l <= k, NaN above the diagonal
    Eigen::VectorXd per_user_rates; // bits/s/Hz
    double throughput = 0.0;
    std::vector<MrtMargin> mrt_margins;
};

// Received power |h_k v_n|^2 for every (k, n)
Eigen::MatrixXd received_powers(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V);

// SINR of stream l at receiver k after cancelling streams 0..l-1 (0-based, l <= k)
double sinr(int k, int l, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power);

// min over receivers k..N-1 of the SINR of stream k
double min_sinr(int k, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power);

// log2(1 + min SINR) (bits/s/Hz)
double user_rate(int k, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power);

double throughput(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power);

// N log2 of the geometric mean of r_k = 1 + min SINR_k; equals throughput()
double geometric_mean_throughput(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power);

// |h_k v_n|^2 - alpha |h_k v_{n+1}|^2 for k >= 1, n < k (0-based)
std::vector<MrtMargin> mrt_margins(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double alpha);

// Checks the chained form |h_k v_0|^2 >= alpha |h_k v_1|^2 >= ... >= alpha^k |h_k v_k|^2 directly
bool mrt_chain_holds(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double alpha, double tol);

RateReport rate_report(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power, double alpha);

// Absolute constraint tolerance in watts
inline constexpr double kConstraintTolerance = 1e-7;

} // namespace manoma

#endif
