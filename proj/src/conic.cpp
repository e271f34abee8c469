// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace manoma
{

bool is_psd(const Eigen::MatrixXd &Q, double tol)
{
    if (Q.rows() != Q.cols())
        return false;
    if (Q.size() == 0)
        return true;
    if (!Q.isApprox(Q.transpose(), 1e-12) && (Q - Q.transpose()).cwiseAbs().maxCoeff() > tol)
        return false;
    const double scale = std::max(1.0, Q.diagonal().cwiseAbs().maxCoeff());
    // Pivoted LDL^T: a PSD matrix has a non-negative D
    // (info() also flags rank-deficient PSD input, so only the pivots are inspected)
    Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (Q + Q.transpose()));
    return ldlt.vectorD().allFinite() && (ldlt.vectorD().array() >= -tol * scale).all();
}

// ---------------------------------------------------------------- builder

int ConvexProgram::add_variable(const std::string &name, double lower, double upper)
{
    if (names_.count(name))
        throw std::invalid_argument("duplicate variable name: " + name);
    if (lower > upper)
        throw std::invalid_argument("variable " + name + ": lower bound exceeds upper bound");
    const int id = num_variables();
    names_.emplace(name, id);
    variables_.push_back({name, lower, upper});
    return id;
}

std::vector<int> ConvexProgram::add_variables(const std::string &name, int count, double lower, double upper)
{
    std::vector<int> ids;
    ids.reserve(count);
    for (int i = 0; i < count; ++i)
        ids.push_back(add_variable(name + "[" + std::to_string(i) + "]", lower, upper));
    return ids;
}

namespace
{
void check_indices(const AffineExpr &e, int n)
{
    for (const auto &[i, a] : e.terms)
        if (i < 0 || i >= n)
            throw std::invalid_argument("affine expression references an unknown variable");
}
} // namespace

void ConvexProgram::add_linear(AffineExpr expr, std::string label)
{
    check_indices(expr, num_variables());
    linear_.push_back({std::move(expr), std::move(label)});
}

void ConvexProgram::add_quadratic(std::vector<int> support, Eigen::MatrixXd Q, AffineExpr affine, std::string label)
{
    if (Q.rows() != static_cast<Eigen::Index>(support.size()) || Q.cols() != Q.rows())
        throw std::invalid_argument("quadratic constraint: matrix does not match its support");
    for (int i : support)
        if (i < 0 || i >= num_variables())
            throw std::invalid_argument("quadratic constraint references an unknown variable");
    check_indices(affine, num_variables());
    if (!is_psd(Q))
        throw NotConvexError("quadratic constraint " + label + " is not positive semidefinite");
    Q = 0.5 * (Q + Q.transpose());
    quadratic_.push_back({std::move(support), std::move(Q), std::move(affine), std::move(label)});
}

void ConvexProgram::add_soc(const std::vector<AffineExpr> &terms, const AffineExpr &bound, std::string label)
{
    check_indices(bound, num_variables());
    std::vector<int> support;
    for (const auto &t : terms)
    {
        check_indices(t, num_variables());
        for (const auto &[i, a] : t.terms)
            support.push_back(i);
    }
    for (const auto &[i, a] : bound.terms)
        support.push_back(i);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    auto local = [&](int i) {
        return static_cast<Eigen::Index>(std::lower_bound(support.begin(), support.end(), i) - support.begin());
    };
    Cone c;
    c.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(terms.size()), static_cast<Eigen::Index>(support.size()));
    c.b.resize(static_cast<Eigen::Index>(terms.size()));
    for (std::size_t r = 0; r < terms.size(); ++r)
    {
        for (const auto &[i, a] : terms[r].terms)
            c.A(static_cast<Eigen::Index>(r), local(i)) += a;
        c.b[static_cast<Eigen::Index>(r)] = terms[r].constant;
    }
    c.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(support.size()));
    for (const auto &[i, a] : bound.terms)
        c.c[local(i)] += a;
    c.d = bound.constant;
    c.support = std::move(support);
    c.label = std::move(label);
    cones_.push_back(std::move(c));
}

void ConvexProgram::maximize_log(int index, double weight)
{
    if (index < 0 || index >= num_variables())
        throw std::invalid_argument("maximize_log: unknown variable");
    if (!(variables_[index].lower > 0.0))
        throw std::invalid_argument("maximize_log: variable " + variables_[index].name +
                                    " needs a positive lower bound");
    if (weight <= 0.0)
        throw std::invalid_argument("maximize_log: weight must be positive");
    log_terms_.emplace_back(index, weight);
}

void ConvexProgram::maximize_linear(int index, double coeff)
{
    if (index < 0 || index >= num_variables())
        throw std::invalid_argument("maximize_linear: unknown variable");
    linear_objective_.emplace_back(index, coeff);
}

int ConvexProgram::index(const std::string &name) const
{
    auto it = names_.find(name);
    if (it == names_.end())
        throw std::out_of_range("unknown variable: " + name);
    return it->second;
}

double ConvexProgram::objective(const Eigen::VectorXd &x) const
{
    double v = 0.0;
    for (const auto &[i, w] : log_terms_)
        v += w * std::log(x[i]);
    for (const auto &[i, c] : linear_objective_)
        v += c * x[i];
    return v;
}

namespace
{
Eigen::VectorXd gather(const Eigen::VectorXd &x, const std::vector<int> &support)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = x[support[i]];
    return out;
}
} // namespace

double ConvexProgram::max_violation(const Eigen::VectorXd &x) const
{
    double worst = -kInf;
    for (int i = 0; i < num_variables(); ++i)
    {
        if (std::isfinite(variables_[i].lower))
            worst = std::max(worst, variables_[i].lower - x[i]);
        if (std::isfinite(variables_[i].upper))
            worst = std::max(worst, x[i] - variables_[i].upper);
    }
    for (const auto &l : linear_)
        worst = std::max(worst, l.expr.eval(x));
    for (const auto &q : quadratic_)
    {
        const Eigen::VectorXd xs = gather(x, q.support);
        worst = std::max(worst, xs.dot(q.Q * xs) + q.affine.eval(x));
    }
    for (const auto &c : cones_)
    {
        const Eigen::VectorXd xs = gather(x, c.support);
        worst = std::max(worst, (c.A * xs + c.b).norm() - (c.c.dot(xs) + c.d));
    }
    return worst;
}

std::string ConvexProgram::dump() const
{
    std::ostringstream os;
    os << std::setprecision(12);
    auto name = [&](int i) { return variables_[i].name; };
    auto affine = [&](const AffineExpr &e) {
        std::ostringstream s;
        s << std::setprecision(12);
        for (const auto &[i, a] : e.terms)
            s << (a < 0 ? " - " : " + ") << std::abs(a) << "*" << name(i);
        s << (e.constant < 0 ? " - " : " + ") << std::abs(e.constant);
        return s.str();
    };
    os << "maximize";
    for (const auto &[i, w] : log_terms_)
        os << " + " << w << "*log(" << name(i) << ")";
    for (const auto &[i, c] : linear_objective_)
        os << " + " << c << "*" << name(i);
    os << "\n";
    for (const auto &v : variables_)
        os << "var " << v.name << " in [" << v.lower << ", " << v.upper << "]\n";
    for (const auto &l : linear_)
        os << "linear " << l.label << ":" << affine(l.expr) << " <= 0\n";
    for (const auto &q : quadratic_)
    {
        os << "quadratic " << q.label << ": x^T Q x over {";
        for (std::size_t i = 0; i < q.support.size(); ++i)
            os << (i ? "," : "") << name(q.support[i]);
        os << "} trace(Q)=" << q.Q.trace() << affine(q.affine) << " <= 0\n";
    }
    for (const auto &c : cones_)
    {
        os << "soc " << c.label << ": ||A x + b|| (" << c.A.rows() << " rows) <= c^T x + " << c.d << " over {";
        for (std::size_t i = 0; i < c.support.size(); ++i)
            os << (i ? "," : "") << name(c.support[i]);
        os << "}\n";
    }
    return os.str();
}

const char *to_string(SolveStatus s)
{
    switch (s)
    {
    case SolveStatus::optimal:
        return "optimal";
    case SolveStatus::infeasible:
        return "infeasible";
    case SolveStatus::max_iter:
        return "max_iter";
    }
    return "unknown";
}

// ---------------------------------------------------------------- solver

namespace
{

// Scalar constraint f(x) - shift <= 0 with a precomputed dense local support
struct ScalarTerm
{
    std::vector<int> support;  // union of quadratic support and affine terms
    Eigen::MatrixXd Q;         // over support (zero rows for affine-only entries)
    Eigen::VectorXd a;         // over support
    double b = 0.0;
    bool quadratic = false;
};

struct ConeTerm
{
    std::vector<int> support;
    Eigen::MatrixXd AtA;
    Eigen::VectorXd Atb;
    double btb = 0.0;
    Eigen::VectorXd c;
    double d = 0.0;
};

// Log-barrier of the program, optionally in phase-I form where every constraint is relaxed
// by an extra variable s (stored last) and the objective is s itself.
class Barrier
{
  public:
    Barrier(const ConvexProgram &p, bool phase_one) : p_(p), phase_one_(phase_one), n_(p.num_variables())
    {
        for (const auto &l : p.linear())
            add_scalar({}, Eigen::MatrixXd(), l.expr);
        for (const auto &q : p.quadratic())
            add_scalar(q.support, q.Q, q.affine);
        for (const auto &c : p.cones())
        {
            ConeTerm t;
            t.support = c.support;
            t.AtA = c.A.transpose() * c.A;
            t.Atb = c.A.transpose() * c.b;
            t.btb = c.b.squaredNorm();
            t.c = c.c;
            t.d = c.d;
            cones_.push_back(std::move(t));
        }
        for (int i = 0; i < n_; ++i)
        {
            const auto &v = p.variables()[i];
            fixed_.push_back(v.lower == v.upper);
        }
    }

    int dim() const { return n_ + (phase_one_ ? 1 : 0); }

    double theta() const
    {
        double th = static_cast<double>(scalars_.size()) + 2.0 * static_cast<double>(cones_.size());
        for (int i = 0; i < n_; ++i)
        {
            if (fixed_[i])
                continue;
            th += std::isfinite(p_.variables()[i].lower) ? 1.0 : 0.0;
            th += std::isfinite(p_.variables()[i].upper) ? 1.0 : 0.0;
        }
        return th;
    }

    double shift(const Eigen::VectorXd &z) const { return phase_one_ ? z[n_] : 0.0; }

    double objective_term(const Eigen::VectorXd &z) const
    {
        // minimisation form
        if (phase_one_)
            return z[n_];
        return -p_.objective(z.head(n_));
    }

    // Slack of every constraint (positive = strictly inside); used for feasibility tests
    double min_slack(const Eigen::VectorXd &z) const
    {
        const double s = shift(z);
        double worst = kInf;
        for (const auto &t : scalars_)
            worst = std::min(worst, s - scalar_value(t, z));
        for (const auto &t : cones_)
        {
            const Eigen::VectorXd xs = gather(z, t.support);
            const double u = t.c.dot(xs) + t.d + s;
            const double w2 = xs.dot(t.AtA * xs) + 2.0 * t.Atb.dot(xs) + t.btb;
            worst = std::min(worst, u - std::sqrt(std::max(w2, 0.0)));
        }
        for (int i = 0; i < n_; ++i)
        {
            if (fixed_[i])
                continue;
            const auto &v = p_.variables()[i];
            if (std::isfinite(v.lower))
                worst = std::min(worst, z[i] - v.lower + s);
            if (std::isfinite(v.upper))
                worst = std::min(worst, v.upper - z[i] + s);
        }
        if (!phase_one_)
            for (const auto &[i, w] : p_.log_terms())
                worst = std::min(worst, z[i]);
        return worst;
    }

    // Returns false when z lies outside the barrier domain
    bool value(const Eigen::VectorXd &z, double t, double &phi) const
    {
        const double s = shift(z);
        phi = t * objective_term(z);
        for (const auto &term : scalars_)
        {
            const double slack = s - scalar_value(term, z);
            if (!(slack > 0.0))
                return false;
            phi -= std::log(slack);
        }
        for (const auto &term : cones_)
        {
            const Eigen::VectorXd xs = gather(z, term.support);
            const double u = term.c.dot(xs) + term.d + s;
            const double w2 = xs.dot(term.AtA * xs) + 2.0 * term.Atb.dot(xs) + term.btb;
            const double sc = u * u - w2;
            if (!(u > 0.0) || !(sc > 0.0))
                return false;
            phi -= std::log(sc);
        }
        for (int i = 0; i < n_; ++i)
        {
            if (fixed_[i])
                continue;
            const auto &v = p_.variables()[i];
            if (std::isfinite(v.lower))
            {
                const double sl = z[i] - v.lower + s;
                if (!(sl > 0.0))
                    return false;
                phi -= std::log(sl);
            }
            if (std::isfinite(v.upper))
            {
                const double sl = v.upper - z[i] + s;
                if (!(sl > 0.0))
                    return false;
                phi -= std::log(sl);
            }
        }
        if (!phase_one_)
            for (const auto &[i, w] : p_.log_terms())
                if (!(z[i] > 0.0))
                    return false;
        return std::isfinite(phi);
    }

    // Gradient and Hessian of the barrier function; z must lie in the domain
    void derivatives(const Eigen::VectorXd &z, double t, Eigen::VectorXd &g, Eigen::MatrixXd &H) const
    {
        const int d = dim();
        g = Eigen::VectorXd::Zero(d);
        H = Eigen::MatrixXd::Zero(d, d);
        const double s = shift(z);

        if (phase_one_)
            g[n_] += t;
        else
        {
            for (const auto &[i, w] : p_.log_terms())
            {
                g[i] -= t * w / z[i];
                H(i, i) += t * w / (z[i] * z[i]);
            }
            for (const auto &[i, c] : p_.linear_objective())
                g[i] -= t * c;
        }

        for (const auto &term : scalars_)
        {
            const Eigen::VectorXd xs = gather(z, term.support);
            Eigen::VectorXd grad = term.a;
            double f = term.a.dot(xs) + term.b;
            if (term.quadratic)
            {
                const Eigen::VectorXd Qx = term.Q * xs;
                f += xs.dot(Qx);
                grad += 2.0 * Qx;
            }
            const double slack = s - f; // > 0
            // -log(slack): gradient grad/slack, Hessian grad grad^T / slack^2 + Q''/slack
            scatter_outer(term.support, grad, 1.0 / slack, -1.0 / (slack * slack), g, H);
            if (term.quadratic)
                scatter_matrix(term.support, term.Q, 2.0 / slack, H);
        }

        for (const auto &term : cones_)
        {
            const Eigen::VectorXd xs = gather(z, term.support);
            const double u = term.c.dot(xs) + term.d + s;
            const Eigen::VectorXd AtAx = term.AtA * xs;
            const double w2 = xs.dot(AtAx) + 2.0 * term.Atb.dot(xs) + term.btb;
            const double sc = u * u - w2;
            // grad sc = 2u c - 2(AtA x + Atb) ; Hess sc = 2 c c^T - 2 AtA (plus s couplings)
            const Eigen::VectorXd gs = 2.0 * u * term.c - 2.0 * (AtAx + term.Atb);
            const double gs_shift = 2.0 * u;
            // -log(sc): gradient -gs/sc, Hessian gs gs^T / sc^2 - Hess sc / sc
            const double inv = 1.0 / sc, inv2 = inv * inv;
            for (std::size_t a = 0; a < term.support.size(); ++a)
            {
                const int ia = term.support[a];
                g[ia] -= gs[static_cast<Eigen::Index>(a)] * inv;
                for (std::size_t b = 0; b < term.support.size(); ++b)
                {
                    const int ib = term.support[b];
                    const auto ea = static_cast<Eigen::Index>(a), eb = static_cast<Eigen::Index>(b);
                    H(ia, ib) += gs[ea] * gs[eb] * inv2 - (2.0 * term.c[ea] * term.c[eb] - 2.0 * term.AtA(ea, eb)) * inv;
                }
            }
            if (phase_one_)
            {
                g[n_] -= gs_shift * inv;
                H(n_, n_) += gs_shift * gs_shift * inv2 - 2.0 * inv;
                for (std::size_t a = 0; a < term.support.size(); ++a)
                {
                    const int ia = term.support[a];
                    const auto ea = static_cast<Eigen::Index>(a);
                    const double v = gs[ea] * gs_shift * inv2 - 2.0 * term.c[ea] * inv;
                    H(ia, n_) += v;
                    H(n_, ia) += v;
                }
            }
        }

        for (int i = 0; i < n_; ++i)
        {
            if (fixed_[i])
                continue;
            const auto &v = p_.variables()[i];
            if (std::isfinite(v.lower))
                box_term(i, z[i] - v.lower + s, 1.0, g, H);
            if (std::isfinite(v.upper))
                box_term(i, v.upper - z[i] + s, -1.0, g, H);
        }

        for (int i = 0; i < n_; ++i)
        {
            if (!fixed_[i])
                continue;
            g[i] = 0.0;
            H.row(i).setZero();
            H.col(i).setZero();
            H(i, i) = 1.0;
        }
    }

  private:
    void add_scalar(const std::vector<int> &qsupport, const Eigen::MatrixXd &Q, const AffineExpr &affine)
    {
        ScalarTerm t;
        t.support = qsupport;
        for (const auto &[i, a] : affine.terms)
            t.support.push_back(i);
        std::sort(t.support.begin(), t.support.end());
        t.support.erase(std::unique(t.support.begin(), t.support.end()), t.support.end());
        auto local = [&](int i) {
            return static_cast<Eigen::Index>(std::lower_bound(t.support.begin(), t.support.end(), i) -
                                             t.support.begin());
        };
        const auto k = static_cast<Eigen::Index>(t.support.size());
        t.a = Eigen::VectorXd::Zero(k);
        for (const auto &[i, a] : affine.terms)
            t.a[local(i)] += a;
        t.b = affine.constant;
        t.quadratic = Q.size() > 0;
        if (t.quadratic)
        {
            t.Q = Eigen::MatrixXd::Zero(k, k);
            for (std::size_t r = 0; r < qsupport.size(); ++r)
                for (std::size_t c = 0; c < qsupport.size(); ++c)
                    t.Q(local(qsupport[r]), local(qsupport[c])) +=
                        Q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
        scalars_.push_back(std::move(t));
    }

    double scalar_value(const ScalarTerm &t, const Eigen::VectorXd &z) const
    {
        const Eigen::VectorXd xs = gather(z, t.support);
        double f = t.a.dot(xs) + t.b;
        if (t.quadratic)
            f += xs.dot(t.Q * xs);
        return f;
    }

    // Adds the -log(slack) contribution of a scalar constraint whose slack is (shift - f)
    void scatter_outer(const std::vector<int> &support, const Eigen::VectorXd &grad, double gscale, double hscale,
                       Eigen::VectorXd &g, Eigen::MatrixXd &H) const
    {
        // d/dx -log(s - f) = grad / (s - f); d/ds = -1 / (s - f)
        const double h = -hscale; // 1 / slack^2
        for (std::size_t a = 0; a < support.size(); ++a)
        {
            const int ia = support[a];
            const double ga = grad[static_cast<Eigen::Index>(a)];
            g[ia] += ga * gscale;
            for (std::size_t b = 0; b < support.size(); ++b)
                H(ia, support[b]) += ga * grad[static_cast<Eigen::Index>(b)] * h;
            if (phase_one_)
            {
                H(ia, n_) -= ga * h;
                H(n_, ia) -= ga * h;
            }
        }
        if (phase_one_)
        {
            g[n_] -= gscale;
            H(n_, n_) += h;
        }
    }

    void scatter_matrix(const std::vector<int> &support, const Eigen::MatrixXd &Q, double scale,
                        Eigen::MatrixXd &H) const
    {
        for (std::size_t a = 0; a < support.size(); ++a)
            for (std::size_t b = 0; b < support.size(); ++b)
                H(support[a], support[b]) += scale * Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }

    // -log(sl), sl = sign * x_i + const + s
    void box_term(int i, double sl, double sign, Eigen::VectorXd &g, Eigen::MatrixXd &H) const
    {
        const double inv = 1.0 / sl, inv2 = inv * inv;
        g[i] -= sign * inv;
        H(i, i) += inv2;
        if (phase_one_)
        {
            g[n_] -= inv;
            H(n_, n_) += inv2;
            H(i, n_) += sign * inv2;
            H(n_, i) += sign * inv2;
        }
    }

    const ConvexProgram &p_;
    bool phase_one_;
    int n_;
    std::vector<ScalarTerm> scalars_;
    std::vector<ConeTerm> cones_;
    std::vector<bool> fixed_;
};

struct CenteringResult
{
    bool ok = true;        // false when the step budget ran out
    double decrement = 0.0; // Newton decrement at exit
};

// Newton centering on phi_t with backtracking; `stop` may end the loop early (phase I)
template <typename Stop>
CenteringResult center(const Barrier &barrier, Eigen::VectorXd &z, double t, int &budget, Stop stop)
{
    constexpr double kDecrementTol = 1e-10; // lambda^2 / 2
    constexpr int kStageSteps = 80;
    CenteringResult res;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    double phi = 0.0;
    barrier.value(z, t, phi);
    for (int steps = 0;; ++steps)
    {
        if (stop(z) || steps == kStageSteps)
            return res;
        if (budget <= 0)
        {
            res.ok = false;
            return res;
        }
        --budget;
        barrier.derivatives(z, t, g, H);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step = ldlt.solve(-g);
        double lambda2 = -g.dot(step);
        if (ldlt.info() != Eigen::Success || !step.allFinite() || !(lambda2 >= 0.0))
        {
            // fall back to a regularised system
            const double reg = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
            H.diagonal().array() += reg;
            step = H.llt().solve(-g);
            lambda2 = -g.dot(step);
            if (!step.allFinite() || !(lambda2 >= 0.0))
            {
                res.decrement = kInf;
                return res;
            }
        }
        res.decrement = std::sqrt(lambda2);
        // phi grows like t, so below ~1e-13 |phi| the decrease is not representable
        if (0.5 * lambda2 <= std::max(kDecrementTol, 1e-13 * std::abs(phi)))
            return res;

        double alpha = 1.0;
        double phi_new = 0.0;
        bool moved = false;
        while (alpha > 1e-16)
        {
            const Eigen::VectorXd trial = z + alpha * step;
            if (barrier.value(trial, t, phi_new) && phi_new <= phi - 0.01 * alpha * lambda2)
            {
                z = trial;
                phi = phi_new;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved)
            return res; // numerically centred
    }
}

} // namespace

Solution solve(const ConvexProgram &program, const Eigen::VectorXd &start, const SolverOptions &options)
{
    const int n = program.num_variables();
    if (start.size() != n)
        throw std::invalid_argument("solve: start point has the wrong dimension");

    Solution sol;
    int budget = options.max_newton_steps;
    Eigen::VectorXd x = start;
    for (int i = 0; i < n; ++i)
    {
        const auto &v = program.variables()[i];
        if (v.lower == v.upper)
            x[i] = v.lower;
    }

    Barrier phase2(program, false);
    double phi = 0.0;
    if (!phase2.value(x, 1.0, phi))
    {
        // Phase I: minimise s subject to every constraint relaxed by s
        sol.used_phase_one = true;
        Barrier phase1(program, true);
        Eigen::VectorXd z(n + 1);
        z.head(n) = x;
        const double violation = -phase1.min_slack([&] {
            Eigen::VectorXd z0(n + 1);
            z0.head(n) = x;
            z0[n] = 0.0;
            return z0;
        }());
        z[n] = std::max(violation, 0.0) + 1.0 + std::abs(violation);
        auto strictly_inside = [&](const Eigen::VectorXd &zz) {
            if (zz[n] >= 0.0)
                return false;
            double dummy = 0.0;
            return phase2.value(zz.head(n), 1.0, dummy);
        };
        double t = 1.0;
        bool found = false;
        const double theta1 = phase1.theta();
        for (int stage = 0; stage < 60 && budget > 0; ++stage)
        {
            center(phase1, z, t, budget, strictly_inside);
            if (strictly_inside(z))
            {
                found = true;
                break;
            }
            if (theta1 / t < 1e-13 * std::max(1.0, std::abs(z[n])))
                break;
            t *= options.barrier_growth;
        }
        sol.newton_steps = options.max_newton_steps - budget;
        if (!found)
        {
            sol.x = z.head(n);
            sol.status = budget > 0 ? SolveStatus::infeasible : SolveStatus::max_iter;
            return sol;
        }
        x = z.head(n);
    }

    const double theta = phase2.theta();
    double t = options.initial_barrier;
    CenteringResult last;
    auto never = [](const Eigen::VectorXd &) { return false; };
    while (true)
    {
        last = center(phase2, x, t, budget, never);
        if (!last.ok)
            break;
        if (theta / t <= options.gap_tolerance)
            break;
        t *= options.barrier_growth;
    }

    sol.x = x;
    sol.objective = program.objective(x);
    sol.newton_steps = options.max_newton_steps - budget;
    const double gap_bound = (theta + std::sqrt(theta) * std::min(last.decrement, 1.0)) / t;
    sol.kkt_residual = gap_bound / std::max(1.0, std::abs(sol.objective));
    const bool feasible = program.max_violation(x) <= options.feasibility_tolerance;
    if (last.ok && feasible && theta / t <= options.gap_tolerance && sol.kkt_residual <= 1e-6)
        sol.status = SolveStatus::optimal;
    else
        sol.status = SolveStatus::max_iter;
    return sol;
}

} // namespace manoma
