// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/optimizer.hpp"

#include "manoma/conic.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace manoma
{

namespace
{

// Noise-normalized view of one problem instance
struct Scaled
{
    const SystemConfig &config;
    std::vector<UserGeometry> users; // gains divided by sigma
    std::vector<PathProjections> rx, tx;

    Scaled(const SystemConfig &c, const std::vector<UserGeometry> &raw)
        : config(c), users(noise_normalized(raw, c.noise_power))
    {
        if (static_cast<int>(raw.size()) != c.num_users)
            throw std::invalid_argument("optimizer: channel count does not match num_users");
        for (const auto &u : users)
        {
            rx.push_back(receive_projections(u));
            tx.push_back(transmit_projections(u));
        }
    }

    int N() const { return config.num_users; }
    int M() const { return config.num_bs_antennas; }
    Eigen::MatrixXcd H(const LayoutState &layout) const { return channel_matrix(users, layout, config.wavelength); }
};

double sum_log(const Eigen::VectorXd &r) { return r.array().log().sum(); }

// Variable layout shared by every program: blocks first, then r, then nu(k, n) for n <= k
struct AuxIndex
{
    std::vector<int> r;
    std::vector<std::vector<int>> nu; // nu[k][n], n <= k

    void add(ConvexProgram &p, int N)
    {
        r = p.add_variables("r", N, 1.0, kInf);
        nu.assign(N, {});
        for (int k = 0; k < N; ++k)
            for (int n = 0; n <= k; ++n)
                nu[k].push_back(p.add_variable("nu[" + std::to_string(k) + "," + std::to_string(n) + "]", 1.0, kInf));
    }

    // State values are normalized: nu / sigma^2
    void fill(Eigen::VectorXd &x, const AuxState &aux, double noise) const
    {
        const int N = static_cast<int>(r.size());
        for (int n = 0; n < N; ++n)
            x[r[n]] = aux.r[n];
        for (int k = 0; k < N; ++k)
            for (int n = 0; n <= k; ++n)
                x[nu[k][n]] = aux.nu(k, n) / noise;
    }

    AuxState read(const Eigen::VectorXd &x, double noise) const
    {
        const int N = static_cast<int>(r.size());
        AuxState a;
        a.r.resize(N);
        a.nu = Eigen::MatrixXd::Zero(N, N);
        for (int n = 0; n < N; ++n)
            a.r[n] = x[r[n]];
        for (int k = 0; k < N; ++k)
            for (int n = 0; n <= k; ++n)
                a.nu(k, n) = x[nu[k][n]] * noise;
        return a;
    }
};

// h(r, nu) over (r, nu) plus an isotropic quadratic over a 2-vector position
void add_rate_constraint(ConvexProgram &p, int ir, int inu, const AuxState &aux, int k, int n, double noise,
                         const IsotropicQuadratic &pos, const std::vector<int> &pos_idx, const std::string &label)
{
    const BilinearTerms b = bilinear_upper_terms(aux.r[n], aux.nu(k, n) / noise);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(4, 4);
    Q.topLeftCorner<2, 2>() = b.Q;
    Q(2, 2) = Q(3, 3) = pos.c;
    AffineExpr e(b.b + pos.b);
    e.add(ir, b.a[0]).add(inu, b.a[1]).add(pos_idx[0], pos.a[0]).add(pos_idx[1], pos.a[1]);
    p.add_quadratic({ir, inu, pos_idx[0], pos_idx[1]}, Q, e, label);
}

// pos(u) + offset - coeff_nu * nu <= 0
void add_position_quadratic(ConvexProgram &p, const IsotropicQuadratic &pos, const std::vector<int> &pos_idx,
                            double offset, int inu, const std::string &label)
{
    Eigen::MatrixXd Q = pos.c * Eigen::MatrixXd::Identity(2, 2);
    AffineExpr e(pos.b + offset);
    e.add(pos_idx[0], pos.a[0]).add(pos_idx[1], pos.a[1]);
    if (inu >= 0)
        e.add(inu, -1.0);
    p.add_quadratic(pos_idx, Q, e, label);
}

double quadratic_value(const ConvexProgram::Quadratic &q, const Eigen::VectorXd &x)
{
    Eigen::VectorXd xs(q.support.size());
    for (size_t i = 0; i < q.support.size(); ++i)
        xs[i] = x[q.support[i]];
    return xs.dot(q.Q * xs) + q.affine.eval(x);
}

// True constraint values (normalized) in the order the programs add their quadratic constraints:
// for each k, n <= k: rate; then (n < N-1) interference; then (n < k) ordering.
std::vector<double> true_constraint_values(const Eigen::MatrixXcd &Hn, const Eigen::MatrixXcd &V,
                                           const AuxState &aux, double noise, double alpha, bool with_interference)
{
    const int N = static_cast<int>(V.cols());
    const Eigen::MatrixXd G = received_powers(Hn, V);
    std::vector<double> out;
    for (int k = 0; k < N; ++k)
        for (int n = 0; n <= k; ++n)
        {
            const double nu = aux.nu(k, n) / noise;
            out.push_back((aux.r[n] - 1.0) * nu - G(k, n));
            if (with_interference && n < N - 1)
                out.push_back(G.row(k).tail(N - n - 1).sum() + 1.0 - nu);
            if (n < k)
                out.push_back(alpha * G(k, n + 1) - G(k, n));
        }
    return out;
}

void verify_expansion(const ConvexProgram &p, const Eigen::VectorXd &x0, const std::vector<double> &expected,
                      const char *who)
{
    const auto &qs = p.quadratic();
    if (qs.size() != expected.size())
        throw std::logic_error(std::string(who) + ": surrogate count mismatch");
    for (size_t i = 0; i < qs.size(); ++i)
    {
        const double got = quadratic_value(qs[i], x0);
        if (std::abs(got - expected[i]) > 1e-9 * std::max(1.0, std::abs(expected[i])))
        {
            std::ostringstream os;
            os << who << ": surrogate " << qs[i].label << " not tight at expansion point (" << got << " vs "
               << expected[i] << ")";
            throw std::logic_error(os.str());
        }
    }
}

struct StepResult
{
    bool accepted = false;
    OptimizerState state;
};

// Generic SCA loop: `step` builds and solves one surrogate program from the current state.
template <class Step>
int sca_loop(OptimizerState &state, int cap, double tol, const SystemConfig &config,
             const std::vector<UserGeometry> &users, const OptimizerOptions &options, const char *who, Step step)
{
    double obj = sum_log(state.aux.r);
    int solved = 0;
    for (int it = 0; it < cap; ++it)
    {
        StepResult res = step(state);
        ++solved;
        if (!res.accepted)
            break;
        const double next = sum_log(res.state.aux.r);
        if (!(next >= obj))
            break; // never accept a decrease; the entering point stays
        if (options.check_feasibility)
        {
            const FeasibilityReport rep = check_feasibility(config, users, res.state);
            if (!rep.feasible)
                throw std::logic_error(std::string(who) + ": accepted state infeasible: " + rep.detail);
        }
        const double rel = (next - obj) / std::max(1.0, std::abs(obj));
        state = std::move(res.state);
        obj = next;
        if (rel < tol)
            break;
    }
    return solved;
}

Solution run_program(const ConvexProgram &p, const Eigen::VectorXd &x0, const char *who)
{
    Solution sol = solve(p, x0);
    if (sol.status == SolveStatus::infeasible)
    {
        // The expansion point satisfies every surrogate, so only a point that was already
        // violated beyond tolerance can end up here
        if (p.max_violation(x0) > 1e-7)
            throw std::runtime_error(std::string(who) + ": subproblem infeasible at its expansion point");
    }
    return sol;
}

bool solution_usable(const Solution &sol, const ConvexProgram &p)
{
    return sol.status != SolveStatus::infeasible && sol.x.allFinite() && p.max_violation(sol.x) <= 0.0;
}

Eigen::VectorXd user_rates(const Scaled &sc, const OptimizerState &s)
{
    const Eigen::MatrixXcd H = sc.H(s.layout);
    Eigen::VectorXd r(sc.N());
    for (int k = 0; k < sc.N(); ++k)
        r[k] = user_rate(k, H, s.design.V, 1.0);
    return r;
}

// ------------------------------------------------------------------ P2

StepResult p2_step(const Scaled &sc, const OptimizerState &st, const OptimizerOptions &options)
{
    const int N = sc.N(), M = sc.M();
    const double alpha = sc.config.mrt_coefficient;
    const Eigen::MatrixXcd H = sc.H(st.layout);
    const Eigen::MatrixXcd &V = st.design.V;

    ConvexProgram p;
    std::vector<std::vector<int>> beta(N);
    for (int n = 0; n < N; ++n)
        beta[n] = p.add_variables("beta" + std::to_string(n), 2 * M);
    AuxIndex aux;
    aux.add(p, N);
    for (int n = 0; n < N; ++n)
        p.maximize_log(aux.r[n]);

    Eigen::VectorXd x0(p.num_variables());
    std::vector<Eigen::VectorXd> bj(N);
    for (int n = 0; n < N; ++n)
    {
        bj[n] = stack_real(V.col(n));
        for (int i = 0; i < 2 * M; ++i)
            x0[beta[n][i]] = bj[n][i];
    }
    aux.fill(x0, st.aux, sc.config.noise_power);

    for (int k = 0; k < N; ++k)
    {
        const Eigen::VectorXcd h = H.row(k).transpose();
        const Eigen::MatrixXd A = realified_gram(h);
        const InterferenceCone cone = interference_soc_terms(k, 0, h, N, 1.0);
        const double curv = ordering_curvature(h, alpha);
        for (int n = 0; n <= k; ++n)
        {
            const std::string tag = "[" + std::to_string(k) + "," + std::to_string(n) + "]";
            // rate: h(r_n, nu_kn) - g(beta_n) <= 0
            const BilinearTerms b = bilinear_upper_terms(st.aux.r[n], st.aux.nu(k, n) / sc.config.noise_power);
            const LinearForm g = quadratic_lower_terms(bj[n], A);
            AffineExpr e(b.b - g.b);
            e.add(aux.r[n], b.a[0]).add(aux.nu[k][n], b.a[1]);
            for (int i = 0; i < 2 * M; ++i)
                e.add(beta[n][i], -g.a[i]);
            p.add_quadratic({aux.r[n], aux.nu[k][n]}, b.Q, e, "rate" + tag);

            // interference: sum_{j>n} |h_k v_j|^2 + 1 <= nu_kn as a rotated cone
            if (n < N - 1)
            {
                std::vector<AffineExpr> terms;
                for (int j = n + 1; j < N; ++j)
                {
                    AffineExpr re, im;
                    for (int i = 0; i < 2 * M; ++i)
                    {
                        re.add(beta[j][i], cone.alpha1[i]);
                        im.add(beta[j][i], cone.alpha2[i]);
                    }
                    terms.push_back(re);
                    terms.push_back(im);
                }
                terms.emplace_back(1.0);
                AffineExpr half(0.5);
                half.add(aux.nu[k][n], -0.5);
                terms.push_back(half);
                AffineExpr rhs(0.5);
                rhs.add(aux.nu[k][n], 0.5);
                p.add_soc(terms, rhs, "interference" + tag);
            }

            // ordering: alpha |h_k v_{n+1}|^2 - |h_k v_n|^2 <= 0, majorized
            if (n < k)
            {
                const IsotropicQuadratic f = ordering_upper_terms(bj[n], bj[n + 1], A, alpha, curv);
                std::vector<int> support = beta[n];
                support.insert(support.end(), beta[n + 1].begin(), beta[n + 1].end());
                AffineExpr fe(f.b);
                for (size_t i = 0; i < support.size(); ++i)
                    fe.add(support[i], f.a[i]);
                p.add_quadratic(support, f.c * Eigen::MatrixXd::Identity(support.size(), support.size()), fe,
                                "ordering" + tag);
            }
        }
    }

    // ||V||_F <= sqrt(P_t)
    {
        std::vector<AffineExpr> terms;
        for (int n = 0; n < N; ++n)
            for (int i = 0; i < 2 * M; ++i)
                terms.push_back(AffineExpr().add(beta[n][i], 1.0));
        p.add_soc(terms, AffineExpr(std::sqrt(sc.config.power_budget)), "power");
    }

    if (options.verify_surrogates)
        verify_expansion(p, x0, true_constraint_values(H, V, st.aux, sc.config.noise_power, alpha, false), "P2");

    const Solution sol = run_program(p, x0, "P2");
    StepResult res;
    if (!solution_usable(sol, p))
        return res;
    res.accepted = true;
    res.state = st;
    for (int n = 0; n < N; ++n)
    {
        Eigen::VectorXd b(2 * M);
        for (int i = 0; i < 2 * M; ++i)
            b[i] = sol.x[beta[n][i]];
        res.state.design.V.col(n) = unstack_real(b);
    }
    res.state.aux = aux.read(sol.x, sc.config.noise_power);
    return res;
}

// ------------------------------------------------------------------ P3

StepResult p3_step(const Scaled &sc, const OptimizerState &st, const OptimizerOptions &options)
{
    const int N = sc.N();
    const double alpha = sc.config.mrt_coefficient;
    const double half = 0.5 * sc.config.user_region;
    const double lambda = sc.config.wavelength;
    const Eigen::MatrixXcd &V = st.design.V;

    ConvexProgram p;
    std::vector<std::vector<int>> u(N);
    for (int k = 0; k < N; ++k)
        u[k] = p.add_variables("u" + std::to_string(k), 2, -half, half);
    AuxIndex aux;
    aux.add(p, N);
    for (int n = 0; n < N; ++n)
        p.maximize_log(aux.r[n]);

    Eigen::VectorXd x0(p.num_variables());
    for (int k = 0; k < N; ++k)
    {
        x0[u[k][0]] = st.layout.user_positions(k, 0);
        x0[u[k][1]] = st.layout.user_positions(k, 1);
    }
    aux.fill(x0, st.aux, sc.config.noise_power);

    for (int k = 0; k < N; ++k)
    {
        const Position uj = st.layout.user_positions.row(k).transpose();
        for (int n = 0; n <= k; ++n)
        {
            const std::string tag = "[" + std::to_string(k) + "," + std::to_string(n) + "]";
            const ReceiveConstants c =
                build_receive_constants(k, n, V, sc.users[k], st.layout.bs_positions, lambda, alpha);
            const IsotropicQuadratic pr = receive_taylor_terms(uj, -c.C, sc.rx[k], lambda);
            add_rate_constraint(p, aux.r[n], aux.nu[k][n], st.aux, k, n, sc.config.noise_power, pr, u[k],
                                "rate" + tag);
            if (n < N - 1)
                add_position_quadratic(p, receive_taylor_terms(uj, c.D, sc.rx[k], lambda), u[k], 1.0, aux.nu[k][n],
                                       "interference" + tag);
            if (n < k)
                add_position_quadratic(p, receive_taylor_terms(uj, c.E, sc.rx[k], lambda), u[k], 0.0, -1,
                                       "ordering" + tag);
        }
    }

    if (options.verify_surrogates)
        verify_expansion(p, x0,
                         true_constraint_values(sc.H(st.layout), V, st.aux, sc.config.noise_power, alpha, true),
                         "P3");

    const Solution sol = run_program(p, x0, "P3");
    StepResult res;
    if (!solution_usable(sol, p))
        return res;
    res.accepted = true;
    res.state = st;
    for (int k = 0; k < N; ++k)
        res.state.layout.user_positions.row(k) << sol.x[u[k][0]], sol.x[u[k][1]];
    res.state.aux = aux.read(sol.x, sc.config.noise_power);
    return res;
}

// ------------------------------------------------------------------ P4.m

StepResult p4_step(const Scaled &sc, const OptimizerState &st, int m, const OptimizerOptions &options)
{
    const int N = sc.N(), M = sc.M();
    const double alpha = sc.config.mrt_coefficient;
    const double half = 0.5 * sc.config.bs_region;
    const double lambda = sc.config.wavelength;
    const Eigen::MatrixXcd &V = st.design.V;
    const Position uj = st.layout.bs_positions.row(m).transpose();

    ConvexProgram p;
    const std::vector<int> u = p.add_variables("u", 2, -half, half);
    AuxIndex aux;
    aux.add(p, N);
    for (int n = 0; n < N; ++n)
        p.maximize_log(aux.r[n]);

    Eigen::VectorXd x0(p.num_variables());
    x0[u[0]] = uj.x();
    x0[u[1]] = uj.y();
    aux.fill(x0, st.aux, sc.config.noise_power);

    for (int k = 0; k < N; ++k)
    {
        const Position ur = st.layout.user_positions.row(k).transpose();
        const Eigen::VectorXcd f = receive_field_response(sc.users[k], ur, lambda);
        const Eigen::RowVectorXcd eta = f.cwiseProduct(sc.users[k].prm_diag).transpose();
        const Eigen::RowVectorXcd h = eta * transmit_field_response(sc.users[k], st.layout.bs_positions, lambda);
        for (int n = 0; n <= k; ++n)
        {
            const std::string tag = "[" + std::to_string(k) + "," + std::to_string(n) + "]";
            const BsConstants c = build_bs_constants(m, n, V, eta, h, alpha);
            const IsotropicQuadratic tr = transmit_taylor_terms(uj, c.I, -c.z, c.i, sc.tx[k], lambda);
            add_rate_constraint(p, aux.r[n], aux.nu[k][n], st.aux, k, n, sc.config.noise_power, tr, u,
                                "rate" + tag);
            if (n < N - 1)
                add_position_quadratic(p, transmit_taylor_terms(uj, c.J, c.d, c.j, sc.tx[k], lambda), u, 1.0,
                                       aux.nu[k][n], "interference" + tag);
            if (n < k)
                add_position_quadratic(p, transmit_taylor_terms(uj, c.Lmat, c.e, c.l, sc.tx[k], lambda), u, 0.0, -1,
                                       "ordering" + tag);
        }
    }

    // spacing: lambda/2 - linearized distance <= 0
    for (int l = 0; l < M; ++l)
    {
        if (l == m)
            continue;
        const Position ul = st.layout.bs_positions.row(l).transpose();
        const Eigen::Vector2d dir = (uj - ul) / (uj - ul).norm();
        AffineExpr e(0.5 * lambda + dir.dot(ul));
        e.add(u[0], -dir.x()).add(u[1], -dir.y());
        p.add_linear(e, "spacing[" + std::to_string(l) + "]");
    }

    if (options.verify_surrogates)
        verify_expansion(p, x0,
                         true_constraint_values(sc.H(st.layout), V, st.aux, sc.config.noise_power, alpha, true),
                         "P4");

    const Solution sol = run_program(p, x0, "P4");
    StepResult res;
    if (!solution_usable(sol, p))
        return res;
    res.accepted = true;
    res.state = st;
    res.state.layout.bs_positions.row(m) << sol.x[u[0]], sol.x[u[1]];
    res.state.aux = aux.read(sol.x, sc.config.noise_power);
    return res;
}

// Shared body of solve_p* once the scaled instance exists
int run_p2(OptimizerState &s, const Scaled &sc, const std::vector<UserGeometry> &users, const OptimizerOptions &o)
{
    return sca_loop(s, sc.config.inner_iters_bf, sc.config.convergence_tol_inner, sc.config, users, o, "P2",
                    [&](const OptimizerState &st) { return p2_step(sc, st, o); });
}

int run_p3(OptimizerState &s, const Scaled &sc, const std::vector<UserGeometry> &users, const OptimizerOptions &o)
{
    if (sc.config.user_region <= 0.0)
        return 0; // positions pinned at the origin
    return sca_loop(s, sc.config.inner_iters_user, sc.config.convergence_tol_inner, sc.config, users, o, "P3",
                    [&](const OptimizerState &st) { return p3_step(sc, st, o); });
}

int run_p4m(OptimizerState &s, const Scaled &sc, const std::vector<UserGeometry> &users, int m,
            const OptimizerOptions &o)
{
    if (m < 0 || m >= sc.M())
        throw std::out_of_range("solve_p4m: antenna index out of range");
    if (sc.config.bs_region <= 0.0)
        return 0;
    return sca_loop(s, sc.config.inner_iters_bs, sc.config.convergence_tol_inner, sc.config, users, o, "P4",
                    [&](const OptimizerState &st) { return p4_step(sc, st, m, o); });
}

// Powers geometric in the SIC order with ratio t; the first user takes the largest share
Eigen::VectorXd geometric_powers(int N, double P, double t)
{
    Eigen::VectorXd p(N);
    const double denom = 1.0 - std::pow(t, N);
    for (int n = 0; n < N; ++n)
        p[n] = P * (1.0 - t) * std::pow(t, n) / denom;
    return p;
}

bool strict_chain(const Eigen::MatrixXcd &Hn, const Eigen::MatrixXcd &V, double alpha)
{
    for (const auto &mm : mrt_margins(Hn, V, alpha))
        if (mm.margin < 1e-9)
            return false;
    return true;
}

} // namespace

double aux_objective(const AuxState &aux) { return sum_log(aux.r) / std::log(2.0); }

FeasibilityReport check_feasibility(const SystemConfig &config, const std::vector<UserGeometry> &users,
                                    const OptimizerState &state, double tol)
{
    FeasibilityReport rep;
    auto note = [&](double violation, const std::string &what) {
        if (violation > rep.worst)
            rep.worst = violation;
        if (violation > tol && rep.feasible)
        {
            rep.feasible = false;
            std::ostringstream os;
            os << what << " violated by " << violation;
            rep.detail = os.str();
        }
    };

    const int N = config.num_users;
    const double s2 = config.noise_power;
    const Eigen::MatrixXcd H = channel_matrix(users, state.layout, config.wavelength);
    const Eigen::MatrixXcd &V = state.design.V;

    // Power in watts
    note(V.squaredNorm() - config.power_budget, "power budget");

    // Received-power constraints compared in units of the noise power
    const Eigen::MatrixXd G = received_powers(H, V) / s2;
    for (int k = 0; k < N; ++k)
        for (int n = 0; n <= k; ++n)
        {
            const std::string tag = "[" + std::to_string(k) + "," + std::to_string(n) + "]";
            const double nu = state.aux.nu(k, n) / s2;
            const double scale = std::max(1.0, G(k, n));
            note(((state.aux.r[n] - 1.0) * nu - G(k, n)) / scale, "rate" + tag);
            double interference = 1.0;
            for (int j = n + 1; j < N; ++j)
                interference += G(k, j);
            note((interference - nu) / std::max(1.0, nu), "interference" + tag);
            if (n < k)
                note((config.mrt_coefficient * G(k, n + 1) - G(k, n)) / std::max(1.0, G(k, n)), "ordering" + tag);
        }
    for (int n = 0; n < N; ++n)
        note(1.0 - state.aux.r[n], "r >= 1");

    // Geometry in meters
    const double ht = 0.5 * config.bs_region, hr = 0.5 * config.user_region;
    note(state.layout.bs_positions.cwiseAbs().maxCoeff() - ht, "BS region");
    note(state.layout.user_positions.cwiseAbs().maxCoeff() - hr, "user region");
    const auto &B = state.layout.bs_positions;
    for (int a = 0; a < B.rows(); ++a)
        for (int b = a + 1; b < B.rows(); ++b)
            note(0.5 * config.wavelength - (B.row(a) - B.row(b)).norm(),
                 "spacing(" + std::to_string(a) + "," + std::to_string(b) + ")");
    return rep;
}

OptimizerState initialize_feasible(const SystemConfig &config, const std::vector<UserGeometry> &users)
{
    config.validate();
    const Scaled sc(config, users);
    const int N = sc.N();

    OptimizerState s;
    s.layout.bs_positions = uniform_bs_grid(config);
    s.layout.user_positions = centered_user_positions(config);
    if (!bs_positions_valid(config, s.layout.bs_positions))
        throw std::invalid_argument("bs_region: uniform grid cannot satisfy half-wavelength spacing");

    const Eigen::MatrixXcd H = sc.H(s.layout);
    Eigen::MatrixXcd W(config.num_bs_antennas, N);
    for (int n = 0; n < N; ++n)
    {
        const Eigen::VectorXcd h = H.row(n).adjoint();
        W.col(n) = h / h.norm();
    }

    bool ok = false;
    double t = 0.5;
    for (int step = 0; step < 30 && !ok; ++step, t *= 0.5)
    {
        s.design = TransmitDesign::from_beams(W, geometric_powers(N, config.power_budget, t));
        ok = strict_chain(H, s.design.V, config.mrt_coefficient);
    }
    for (double eps = 1e-2; !ok && eps > 1e-30; eps *= 0.5)
    {
        Eigen::VectorXd p = Eigen::VectorXd::Constant(N, eps * config.power_budget / std::max(1, N - 1));
        p[0] = (1.0 - eps) * config.power_budget;
        s.design = TransmitDesign::from_beams(W, p);
        ok = strict_chain(H, s.design.V, config.mrt_coefficient);
    }
    // Shared beam: |h_k v_n|^2 = p_n |h_k w|^2, so the chain only asks p_n > alpha p_{n+1}.
    // Needed when the MRT beams are nearly orthogonal to some user (sparse channels).
    if (!ok)
    {
        Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(config.num_bs_antennas);
        for (int n = 0; n < N; ++n)
            sum += W.col(n);
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinV);
        for (const Eigen::VectorXcd &w : {Eigen::VectorXcd(sum), Eigen::VectorXcd(svd.matrixV().col(0))})
        {
            if (ok || !(w.norm() > 0.0))
                continue;
            const Eigen::MatrixXcd shared = (w / w.norm()).replicate(1, N);
            t = 0.5 / std::max(1.0, config.mrt_coefficient);
            for (int step = 0; step < 30 && !ok; ++step, t *= 0.5)
            {
                s.design = TransmitDesign::from_beams(shared, geometric_powers(N, config.power_budget, t));
                ok = strict_chain(H, s.design.V, config.mrt_coefficient);
            }
        }
    }
    if (!ok)
        throw std::runtime_error("initialize_feasible: no power split satisfies the ordering chain");

    // Keep strictly inside the power ball so the barrier has room
    s.design.V *= std::sqrt(1.0 - 1e-9);

    const Eigen::MatrixXd G = received_powers(H, s.design.V);
    s.aux.r.resize(N);
    s.aux.nu = Eigen::MatrixXd::Zero(N, N);
    for (int n = 0; n < N; ++n)
        s.aux.r[n] = 1.0 + 0.9 * min_sinr(n, H, s.design.V, 1.0);
    for (int k = 0; k < N; ++k)
        for (int n = 0; n <= k; ++n)
            s.aux.nu(k, n) = 1.1 * (G.row(k).tail(N - n - 1).sum() + 1.0) * config.noise_power;
    s.objective_trace.push_back(aux_objective(s.aux));
    return s;
}

int solve_p2(OptimizerState &state, const SystemConfig &config, const std::vector<UserGeometry> &users,
             const OptimizerOptions &options)
{
    const Scaled sc(config, users);
    return run_p2(state, sc, users, options);
}

int solve_p3(OptimizerState &state, const SystemConfig &config, const std::vector<UserGeometry> &users,
             const OptimizerOptions &options)
{
    const Scaled sc(config, users);
    return run_p3(state, sc, users, options);
}

int solve_p4m(OptimizerState &state, const SystemConfig &config, const std::vector<UserGeometry> &users, int m,
              const OptimizerOptions &options)
{
    const Scaled sc(config, users);
    return run_p4m(state, sc, users, m, options);
}

OptimizeResult optimize(const SystemConfig &config, const std::vector<UserGeometry> &users,
                        const OptimizerOptions &options)
{
    const auto t0 = std::chrono::steady_clock::now();
    OptimizeResult r = optimize_from(initialize_feasible(config, users), config, users, options);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

OptimizeResult optimize_from(OptimizerState state, const SystemConfig &config, const std::vector<UserGeometry> &users,
                             const OptimizerOptions &options)
{
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    const Scaled sc(config, users);
    OptimizeResult res;

    auto record = [&](int it, const char *what) {
        res.trace.push_back({it, what, aux_objective(state.aux), user_rates(sc, state)});
    };
    state.objective_trace.assign(1, aux_objective(state.aux));
    state.outer_iter = 0;
    record(0, "init");

    for (int it = 1; it <= config.outer_iters; ++it)
    {
        const double before = state.objective_trace.back();
        res.counts.bf += run_p2(state, sc, users, options);
        record(it, "P2");
        if (options.optimize_users && config.user_region > 0.0)
        {
            res.counts.user += run_p3(state, sc, users, options);
            record(it, "P3");
        }
        if (options.optimize_bs && config.bs_region > 0.0)
        {
            for (int m = 0; m < sc.M(); ++m)
                res.counts.bs += run_p4m(state, sc, users, m, options);
            record(it, "P4");
        }
        state.outer_iter = it;
        state.objective_trace.push_back(aux_objective(state.aux));
        res.counts.outer = it;
        if (state.objective_trace.back() - before < config.convergence_tol_outer)
            break;
    }

    // Positions moved after the last P2, so the beams are matched to an older channel. One more
    // P2 pass can only raise the objective; it gets its own trace entry.
    if (res.counts.outer > 0 && (res.counts.user > 0 || res.counts.bs > 0))
    {
        res.counts.bf += run_p2(state, sc, users, options);
        record(res.counts.outer, "P2");
        state.objective_trace.push_back(aux_objective(state.aux));
    }

    const Eigen::MatrixXcd H = sc.H(state.layout);
    res.per_user_rates = user_rates(sc, state);
    res.throughput = throughput(H, state.design.V, 1.0);
    res.state = std::move(state);
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace manoma
