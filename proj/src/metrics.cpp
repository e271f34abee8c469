// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace manoma
{

TransmitDesign TransmitDesign::from_beams(const Eigen::MatrixXcd &W, const Eigen::VectorXd &powers)
{
    if (W.cols() != powers.size())
        throw std::invalid_argument("TransmitDesign::from_beams: beam / power count mismatch");
    TransmitDesign d;
    d.V = W;
    for (Eigen::Index n = 0; n < W.cols(); ++n)
        d.V.col(n) *= std::sqrt(powers[n]);
    return d;
}

Eigen::MatrixXd received_powers(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V)
{
    if (H.cols() != V.rows())
        throw std::invalid_argument("received_powers: channel / design shape mismatch");
    return (H * V).cwiseAbs2();
}

namespace
{
double sinr_from_powers(int k, int l, const Eigen::MatrixXd &G, double noise_power)
{
    double interference = 0.0;
    for (Eigen::Index j = l + 1; j < G.cols(); ++j)
        interference += G(k, j);
    return G(k, l) / (interference + noise_power);
}
} // namespace

double sinr(int k, int l, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power)
{
    const int N = static_cast<int>(H.rows());
    if (l < 0 || k < l || k >= N || V.cols() != N)
        throw std::out_of_range("sinr: require 0 <= l <= k < N");
    return sinr_from_powers(k, l, received_powers(H, V), noise_power);
}

double min_sinr(int k, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power)
{
    const int N = static_cast<int>(H.rows());
    if (k < 0 || k >= N)
        throw std::out_of_range("min_sinr: user index out of range");
    const Eigen::MatrixXd G = received_powers(H, V);
    double best = std::numeric_limits<double>::infinity();
    for (int d = k; d < N; ++d)
        best = std::min(best, sinr_from_powers(d, k, G, noise_power));
    return best;
}

double user_rate(int k, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power)
{
    return std::log2(1.0 + min_sinr(k, H, V, noise_power));
}

double throughput(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power)
{
    double sum = 0.0;
    for (int k = 0; k < H.rows(); ++k)
        sum += user_rate(k, H, V, noise_power);
    return sum;
}

double geometric_mean_throughput(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power)
{
    const int N = static_cast<int>(H.rows());
    double log_sum = 0.0;
    for (int k = 0; k < N; ++k)
        log_sum += std::log(1.0 + min_sinr(k, H, V, noise_power));
    const double geometric_mean = std::exp(log_sum / N);
    return N * std::log2(geometric_mean);
}

std::vector<MrtMargin> mrt_margins(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double alpha)
{
    if (alpha < 1.0)
        throw std::invalid_argument("mrt_margins: alpha must be >= 1");
    const Eigen::MatrixXd G = received_powers(H, V);
    std::vector<MrtMargin> out;
    for (int k = 1; k < G.rows(); ++k)
        for (int n = 0; n < k; ++n)
            out.push_back({k, n, G(k, n) - alpha * G(k, n + 1)});
    return out;
}

bool mrt_chain_holds(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double alpha, double tol)
{
    const Eigen::MatrixXd G = received_powers(H, V);
    for (int k = 0; k < G.rows(); ++k)
    {
        double scale = 1.0;
        for (int n = 0; n < k; ++n)
        {
            // alpha^n |h_k v_n|^2 >= alpha^(n+1) |h_k v_{n+1}|^2
            if (scale * G(k, n) < scale * alpha * G(k, n + 1) - tol)
                return false;
            scale *= alpha;
        }
    }
    return true;
}

RateReport rate_report(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &V, double noise_power, double alpha)
{
    const int N = static_cast<int>(H.rows());
    const Eigen::MatrixXd G = received_powers(H, V);
    RateReport rep;
    rep.sinr_table = Eigen::MatrixXd::Constant(N, N, std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < N; ++k)
        for (int l = 0; l <= k; ++l)
            rep.sinr_table(k, l) = sinr_from_powers(k, l, G, noise_power);
    rep.per_user_rates.resize(N);
    for (int k = 0; k < N; ++k)
    {
        double m = std::numeric_limits<double>::infinity();
        for (int d = k; d < N; ++d)
            m = std::min(m, rep.sinr_table(d, k));
        rep.per_user_rates[k] = std::log2(1.0 + m);
    }
    rep.throughput = rep.per_user_rates.sum();
    rep.mrt_margins = mrt_margins(H, V, alpha);
    return rep;
}

} // namespace manoma
