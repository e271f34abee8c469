// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#ifndef MANOMA_CONIC_HPP
#define MANOMA_CONIC_HPP

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace manoma
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse affine expression sum_i coeff_i x_{index_i} + constant
struct AffineExpr
{
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    AffineExpr() = default;
    explicit AffineExpr(double c) : constant(c) {}

    AffineExpr &add(int index, double coeff)
    {
        if (coeff != 0.0)
            terms.emplace_back(index, coeff);
        return *this;
    }
    AffineExpr &operator+=(double c)
    {
        constant += c;
        return *this;
    }
    double eval(const Eigen::VectorXd &x) const
    {
        double v = constant;
        for (const auto &[i, a] : terms)
            v += a * x[i];
        return v;
    }
};

// Thrown when a quadratic constraint matrix fails the PSD certificate
class NotConvexError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Returns true when Q is positive semidefinite within tol (relative to its largest diagonal entry)
bool is_psd(const Eigen::MatrixXd &Q, double tol = 1e-10);

// Convex program in standard form:
//   maximize   sum_i w_i log(x_{a_i}) + c^T x
//   subject to lower <= x <= upper
//              a^T x + b <= 0                              (linear)
//              x_S^T Q x_S + a^T x + b <= 0,  Q PSD         (convex quadratic)
//              || A x_S + b ||_2 <= c^T x_S + d             (second-order cone)
class ConvexProgram
{
  public:
    struct Variable
    {
        std::string name;
        double lower = -kInf;
        double upper = kInf;
    };
    struct Linear
    {
        AffineExpr expr;
        std::string label;
    };
    struct Quadratic
    {
        std::vector<int> support;
        Eigen::MatrixXd Q; // symmetric PSD, over support
        AffineExpr affine;
        std::string label;
    };
    struct Cone
    {
        std::vector<int> support;
        Eigen::MatrixXd A; // rows x |support|
        Eigen::VectorXd b;
        Eigen::VectorXd c; // |support|
        double d = 0.0;
        std::string label;
    };

    int add_variable(const std::string &name, double lower = -kInf, double upper = kInf);
    std::vector<int> add_variables(const std::string &name, int count, double lower = -kInf, double upper = kInf);

    // expr <= 0
    void add_linear(AffineExpr expr, std::string label = {});

    // x_S^T Q x_S + affine <= 0
    void add_quadratic(std::vector<int> support, Eigen::MatrixXd Q, AffineExpr affine, std::string label = {});

    // || terms ||_2 <= bound, each term an affine expression
    void add_soc(const std::vector<AffineExpr> &terms, const AffineExpr &bound, std::string label = {});

    void maximize_log(int index, double weight = 1.0);
    void maximize_linear(int index, double coeff);

    int num_variables() const { return static_cast<int>(variables_.size()); }
    int index(const std::string &name) const;
    const std::vector<Variable> &variables() const { return variables_; }
    const std::vector<Linear> &linear() const { return linear_; }
    const std::vector<Quadratic> &quadratic() const { return quadratic_; }
    const std::vector<Cone> &cones() const { return cones_; }
    const std::vector<std::pair<int, double>> &log_terms() const { return log_terms_; }
    const std::vector<std::pair<int, double>> &linear_objective() const { return linear_objective_; }

    double objective(const Eigen::VectorXd &x) const;

    // Largest violation over all constraints and bounds (<= 0 means feasible)
    double max_violation(const Eigen::VectorXd &x) const;

    // One constraint per line in insertion order; for debugging only
    std::string dump() const;

  private:
    std::vector<Variable> variables_;
    std::map<std::string, int> names_;
    std::vector<Linear> linear_;
    std::vector<Quadratic> quadratic_;
    std::vector<Cone> cones_;
    std::vector<std::pair<int, double>> log_terms_;
    std::vector<std::pair<int, double>> linear_objective_;
};

enum class SolveStatus
{
    optimal,
    infeasible,
    max_iter
};

const char *to_string(SolveStatus s);

struct SolverOptions
{
    double gap_tolerance = 1e-10;        // absolute bound on objective suboptimality
    double feasibility_tolerance = 1e-7; // reported feasibility check
    double barrier_growth = 20.0;
    double initial_barrier = 1.0;
    int max_newton_steps = 600;
};

struct Solution
{
    Eigen::VectorXd x;
    double objective = -kInf;
    SolveStatus status = SolveStatus::max_iter;
    double kkt_residual = kInf; // relative duality-gap bound at the returned point
    int newton_steps = 0;
    bool used_phase_one = false;
};

// Log-barrier interior point method. `start` should be feasible; when it is not strictly
// feasible a phase-I problem is solved from it first. Returned iterates are strictly feasible.
Solution solve(const ConvexProgram &program, const Eigen::VectorXd &start, const SolverOptions &options = {});

} // namespace manoma

#endif
