// fogopt/convex.hpp - a self-contained smooth convex-program solver: primal
// log-barrier interior point with equality-constrained Newton steps and a
// phase-I feasibility stage.
//
// Programs have a linear objective, box bounds, linear equality rows, and
// inequality rows built from linear terms plus the convex curve terms
// coef*x^2/r, coef*x^2 and coef/r (coef >= 0, r > 0). These are exactly the
// shapes occurring in the relaxed offloading problems, the per-node slack
// subproblems, and the master LP relaxations.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fogopt/model.hpp"

namespace fogopt {

// ─── Program description ────────────────────────────────────────────────────

struct VariableBounds {
    double lb = -kInfinity;
    double ub = kInfinity;
};

struct LinearTerm {
    int var = -1;
    double coef = 0.0;
};

/// Convex curve term. Shapes, selected by which indices are set:
///   num >= 0, den >= 0 : coef * x[num]^2 / x[den]
///   num >= 0, den <  0 : coef * x[num]^2
///   num <  0, den >= 0 : coef / x[den]
/// coef must be >= 0 and any referenced denominator must have lb > 0, so
/// every term is convex on the program domain.
struct CurveTerm {
    double coef = 0.0;
    int num = -1;
    int den = -1;
};

/// One row: sum of linear and curve terms, compared against rhs.
struct ConstraintExpr {
    std::vector<LinearTerm> linear;
    std::vector<CurveTerm> curves;
    double rhs = 0.0;
};

struct ConvexProgram {
    std::vector<VariableBounds> variables;
    std::vector<double> objective;           // linear coefficients c
    double objective_constant = 0.0;
    std::vector<ConstraintExpr> inequalities;  // expr <= rhs
    std::vector<ConstraintExpr> equalities;    // linear only, expr == rhs

    int add_variable(double lb, double ub) {
        variables.push_back({lb, ub});
        objective.push_back(0.0);
        return static_cast<int>(variables.size()) - 1;
    }
    int num_variables() const { return static_cast<int>(variables.size()); }

    /// Throws std::invalid_argument on malformed terms (negative curve
    /// coefficients, denominators without a positive lower bound, curve
    /// terms inside equality rows).
    void check_well_formed() const;
};

// ─── Derivatives of the ratio term (the Hessian identity behind convexity) ──

struct RatioDerivatives {
    Eigen::Vector2d gradient;   // d/dx, d/dr of x^2/r
    Eigen::Matrix2d hessian;    // v^T H v = (2/r) (v1 - v2 x/r)^2
};

inline RatioDerivatives ratio_term_derivatives(double x, double r) {
    if (r <= 0.0) throw std::domain_error("ratio_term_derivatives: r <= 0");
    RatioDerivatives d;
    d.gradient << 2.0 * x / r, -(x * x) / (r * r);
    d.hessian << 2.0 / r, -2.0 * x / (r * r),
                 -2.0 * x / (r * r), 2.0 * x * x / (r * r * r);
    return d;
}

// ─── Results ────────────────────────────────────────────────────────────────

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

struct OuterIterRecord {
    double mu = 0.0;
    double objective = 0.0;      // c.x + constant at the end of the iteration
    double barrier_value = 0.0;  // c.x + mu * phi
    int newton_steps = 0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::IterationLimit;
    Eigen::VectorXd point;
    double objective_value = 0.0;
    int newton_iterations = 0;
    double kkt_residual = kInfinity;
    double infeasibility_slack = 0.0;        // phase-I optimum when Infeasible
    std::vector<OuterIterRecord> trace;      // per outer iteration (phase II)
};

struct SolveOptions {
    double tol = 1e-8;          // stop when m * mu < tol
    double mu0 = 10.0;
    double mu_factor = 0.1;
    double armijo_alpha = 0.3;
    double backtrack_beta = 0.5;
    int max_outer = 200;
    int max_inner = 100;
    double inner_tol = 1e-9;    // on the Newton decrement lambda^2 / 2
    bool record_trace = false;
};

inline constexpr double kRateFloor = 1e-9;          // lb floor for denominators
inline constexpr double kInfeasibleSlack = 1e-6;    // phase-I certificate level

// ─── Evaluation helpers ─────────────────────────────────────────────────────

namespace detail {

inline double expr_value(const ConstraintExpr& c, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const LinearTerm& t : c.linear) v += t.coef * x[t.var];
    for (const CurveTerm& t : c.curves) {
        if (t.num >= 0 && t.den >= 0) {
            if (x[t.den] <= 0.0) return kInfinity;
            v += t.coef * x[t.num] * x[t.num] / x[t.den];
        } else if (t.num >= 0) {
            v += t.coef * x[t.num] * x[t.num];
        } else {
            if (x[t.den] <= 0.0) return kInfinity;
            v += t.coef / x[t.den];
        }
    }
    return v;
}

/// Sparse gradient of a constraint expression as (index, value) pairs.
inline void expr_gradient(const ConstraintExpr& c, const Eigen::VectorXd& x,
                          std::vector<std::pair<int, double>>& out) {
    out.clear();
    for (const LinearTerm& t : c.linear) out.emplace_back(t.var, t.coef);
    for (const CurveTerm& t : c.curves) {
        if (t.num >= 0 && t.den >= 0) {
            double xn = x[t.num], xd = x[t.den];
            out.emplace_back(t.num, t.coef * 2.0 * xn / xd);
            out.emplace_back(t.den, -t.coef * xn * xn / (xd * xd));
        } else if (t.num >= 0) {
            out.emplace_back(t.num, t.coef * 2.0 * x[t.num]);
        } else {
            double xd = x[t.den];
            out.emplace_back(t.den, -t.coef / (xd * xd));
        }
    }
}

/// Adds w * (Hessian of the expression) into H.
inline void add_expr_hessian(const ConstraintExpr& c, const Eigen::VectorXd& x,
                             double w, Eigen::MatrixXd& H) {
    for (const CurveTerm& t : c.curves) {
        if (t.num >= 0 && t.den >= 0) {
            double xn = x[t.num], xd = x[t.den];
            double a = 2.0 / xd;
            double b = -2.0 * xn / (xd * xd);
            double d = 2.0 * xn * xn / (xd * xd * xd);
            H(t.num, t.num) += w * t.coef * a;
            H(t.num, t.den) += w * t.coef * b;
            H(t.den, t.num) += w * t.coef * b;
            H(t.den, t.den) += w * t.coef * d;
        } else if (t.num >= 0) {
            H(t.num, t.num) += w * t.coef * 2.0;
        } else {
            double xd = x[t.den];
            H(t.den, t.den) += w * t.coef * 2.0 / (xd * xd * xd);
        }
    }
}

}  // namespace detail

inline void ConvexProgram::check_well_formed() const {
    if (objective.size() != variables.size())
        throw std::invalid_argument("convex: objective size mismatch");
    auto check_expr = [&](const ConstraintExpr& c, bool allow_curves) {
        for (const LinearTerm& t : c.linear)
            if (t.var < 0 || t.var >= num_variables())
                throw std::invalid_argument("convex: linear term out of range");
        if (!allow_curves && !c.curves.empty())
            throw std::invalid_argument("convex: equality rows must be linear");
        for (const CurveTerm& t : c.curves) {
            if (t.coef < 0.0)
                throw std::invalid_argument("convex: negative curve coefficient");
            if (t.num < 0 && t.den < 0)
                throw std::invalid_argument("convex: empty curve term");
            if (t.den >= 0 && variables[t.den].lb <= 0.0)
                throw std::invalid_argument(
                    "convex: ratio denominator needs a positive lower bound");
        }
    };
    for (const auto& c : inequalities) check_expr(c, true);
    for (const auto& c : equalities) check_expr(c, false);
}

// ─── The barrier engine ─────────────────────────────────────────────────────

namespace detail {

class BarrierEngine {
public:
    BarrierEngine(const ConvexProgram& p, const SolveOptions& opt)
        : p_(p), opt_(opt), n_(p.num_variables()) {
        c_ = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), n_);
        const int neq = static_cast<int>(p.equalities.size());
        A_ = Eigen::MatrixXd::Zero(neq, n_);
        beq_ = Eigen::VectorXd::Zero(neq);
        for (int k = 0; k < neq; ++k) {
            for (const LinearTerm& t : p.equalities[k].linear)
                A_(k, t.var) += t.coef;
            beq_[k] = p.equalities[k].rhs;
        }
        m_ = static_cast<int>(p.inequalities.size());
        for (const VariableBounds& b : p.variables) {
            if (std::isfinite(b.lb)) ++m_;
            if (std::isfinite(b.ub)) ++m_;
        }
        grad_scratch_.reserve(64);
    }

    int inequality_count() const { return m_; }

    bool in_domain(const Eigen::VectorXd& x, double margin = 0.0) const {
        for (int i = 0; i < n_; ++i) {
            if (std::isfinite(p_.variables[i].lb) && x[i] - p_.variables[i].lb <= margin)
                return false;
            if (std::isfinite(p_.variables[i].ub) && p_.variables[i].ub - x[i] <= margin)
                return false;
        }
        for (const auto& c : p_.inequalities)
            if (c.rhs - expr_value(c, x) <= margin) return false;
        return true;
    }

    double max_violation(const Eigen::VectorXd& x) const {
        double v = -kInfinity;
        for (int i = 0; i < n_; ++i) {
            if (std::isfinite(p_.variables[i].lb)) v = std::max(v, p_.variables[i].lb - x[i]);
            if (std::isfinite(p_.variables[i].ub)) v = std::max(v, x[i] - p_.variables[i].ub);
        }
        for (const auto& c : p_.inequalities)
            v = std::max(v, expr_value(c, x) - c.rhs);
        return v;
    }

    double barrier_phi(const Eigen::VectorXd& x) const {
        double phi = 0.0;
        for (int i = 0; i < n_; ++i) {
            const auto& b = p_.variables[i];
            if (std::isfinite(b.lb)) {
                double s = x[i] - b.lb;
                if (s <= 0) return kInfinity;
                phi -= std::log(s);
            }
            if (std::isfinite(b.ub)) {
                double s = b.ub - x[i];
                if (s <= 0) return kInfinity;
                phi -= std::log(s);
            }
        }
        for (const auto& c : p_.inequalities) {
            double s = c.rhs - expr_value(c, x);
            if (s <= 0) return kInfinity;
            phi -= std::log(s);
        }
        return phi;
    }

    /// Equality-correct a candidate start: x <- x0 + A^T (A A^T)^-1 (b - A x0).
    bool project_onto_equalities(Eigen::VectorXd& x) const {
        if (A_.rows() == 0) return true;
        Eigen::VectorXd resid = beq_ - A_ * x;
        if (resid.lpNorm<Eigen::Infinity>() < 1e-12) return true;
        Eigen::MatrixXd AAt = A_ * A_.transpose();
        Eigen::LDLT<Eigen::MatrixXd> f(AAt);
        if (f.info() != Eigen::Success) return false;
        x += A_.transpose() * f.solve(resid);
        return (beq_ - A_ * x).lpNorm<Eigen::Infinity>() < 1e-8;
    }

    /// Midpoint-ish start inside the boxes, corrected onto the equalities.
    Eigen::VectorXd box_center() const {
        Eigen::VectorXd x(n_);
        for (int i = 0; i < n_; ++i) {
            const auto& b = p_.variables[i];
            if (std::isfinite(b.lb) && std::isfinite(b.ub))
                x[i] = 0.5 * (b.lb + b.ub);
            else if (std::isfinite(b.lb))
                x[i] = b.lb + 1.0;
            else if (std::isfinite(b.ub))
                x[i] = b.ub - 1.0;
            else
                x[i] = 0.0;
        }
        return x;
    }

    /// Minimizes c.x + mu*phi from a strictly interior, equality-feasible x.
    /// Returns false on a hard numerical failure.
    bool center(Eigen::VectorXd& x, double mu, int& newton_steps,
                double& last_decrement, int max_inner) {
        const int p = static_cast<int>(A_.rows());
        Eigen::VectorXd g(n_);
        Eigen::MatrixXd H(n_, n_);
        for (int it = 0; it < max_inner; ++it) {
            build_gradient_hessian(x, mu, g, H);
            Eigen::VectorXd dx(n_);
            Eigen::VectorXd w;
            if (!solve_kkt(H, g, dx, w)) {
                // Fall back to a projected gradient direction.
                dx = -g;
                if (p > 0) {
                    Eigen::MatrixXd AAt = A_ * A_.transpose();
                    dx += A_.transpose() * AAt.ldlt().solve(A_ * g);
                }
                if (!dx.allFinite()) return false;
            }
            double decrement = -g.dot(dx);
            last_decrement = 0.5 * decrement;
            if (!(decrement == decrement)) return false;  // NaN guard
            if (0.5 * decrement <= opt_.inner_tol) return true;

            double b0 = c_.dot(x) + mu * barrier_phi(x);
            double slope = g.dot(dx);
            double t = 1.0;
            int backtracks = 0;
            while (backtracks < 80) {
                Eigen::VectorXd xt = x + t * dx;
                if (in_domain(xt)) {
                    double bt = c_.dot(xt) + mu * barrier_phi(xt);
                    if (bt <= b0 + opt_.armijo_alpha * t * slope) break;
                }
                t *= opt_.backtrack_beta;
                ++backtracks;
            }
            if (backtracks >= 80) return 0.5 * decrement <= 1e-6;
            x += t * dx;
            ++newton_steps;
        }
        return last_decrement <= 1e-6;
    }

    /// Full barrier run from a strictly interior start.
    SolveResult run(Eigen::VectorXd x) {
        SolveResult res;
        double mu = opt_.mu0;
        int total_steps = 0;
        double last_dec = kInfinity;
        bool clean = true;
        for (int outer = 0; outer < opt_.max_outer; ++outer) {
            int steps = 0;
            clean = center(x, mu, steps, last_dec, opt_.max_inner);
            total_steps += steps;
            if (opt_.record_trace)
                res.trace.push_back({mu, c_.dot(x) + p_.objective_constant,
                                     c_.dot(x) + mu * barrier_phi(x), steps});
            if (m_ * mu < opt_.tol) break;
            mu *= opt_.mu_factor;
        }
        res.point = std::move(x);
        res.objective_value = c_.dot(res.point) + p_.objective_constant;
        res.newton_iterations = total_steps;
        res.kkt_residual = std::max(m_ * mu, last_dec);
        res.status = (clean && m_ * mu < opt_.tol) ? SolveStatus::Optimal
                                                   : SolveStatus::IterationLimit;
        return res;
    }

private:
    void build_gradient_hessian(const Eigen::VectorXd& x, double mu,
                                Eigen::VectorXd& g, Eigen::MatrixXd& H) {
        g = c_;
        H.setZero();
        for (int i = 0; i < n_; ++i) {
            const auto& b = p_.variables[i];
            if (std::isfinite(b.lb)) {
                double s = x[i] - b.lb;
                g[i] -= mu / s;
                H(i, i) += mu / (s * s);
            }
            if (std::isfinite(b.ub)) {
                double s = b.ub - x[i];
                g[i] += mu / s;
                H(i, i) += mu / (s * s);
            }
        }
        for (const auto& c : p_.inequalities) {
            double s = c.rhs - expr_value(c, x);
            expr_gradient(c, x, grad_scratch_);
            double w1 = mu / s;
            double w2 = mu / (s * s);
            for (const auto& [i, vi] : grad_scratch_) {
                g[i] += w1 * vi;
                for (const auto& [j, vj] : grad_scratch_) H(i, j) += w2 * vi * vj;
            }
            add_expr_hessian(c, x, w1, H);
        }
    }

    bool solve_kkt(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                   Eigen::VectorXd& dx, Eigen::VectorXd& w) {
        const int p = static_cast<int>(A_.rows());
        Eigen::LLT<Eigen::MatrixXd> llt(H);
        if (llt.info() == Eigen::Success) {
            if (p == 0) {
                dx = llt.solve(-g);
                return dx.allFinite();
            }
            Eigen::VectorXd hg = llt.solve(g);
            Eigen::MatrixXd hat = llt.solve(A_.transpose());
            Eigen::MatrixXd S = A_ * hat;
            w = S.ldlt().solve(-A_ * hg);
            dx = -hg - hat * w;
            if (dx.allFinite()) return true;
        }
        // Ridge retry, then a full LU of the KKT system.
        Eigen::MatrixXd Hr = H;
        double ridge = 1e-10 * (H.trace() / n_ + 1.0);
        Hr.diagonal().array() += ridge;
        Eigen::LLT<Eigen::MatrixXd> llt2(Hr);
        if (llt2.info() == Eigen::Success && p == 0) {
            dx = llt2.solve(-g);
            return dx.allFinite();
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n_ + p, n_ + p);
        K.topLeftCorner(n_, n_) = Hr;
        if (p > 0) {
            K.topRightCorner(n_, p) = A_.transpose();
            K.bottomLeftCorner(p, n_) = A_;
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_ + p);
        rhs.head(n_) = -g;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        Eigen::VectorXd sol = lu.solve(rhs);
        if (!sol.allFinite()) return false;
        dx = sol.head(n_);
        if (p > 0) w = sol.tail(p);
        return true;
    }

    const ConvexProgram& p_;
    const SolveOptions& opt_;
    int n_;
    int m_ = 0;
    Eigen::VectorXd c_;
    Eigen::MatrixXd A_;
    Eigen::VectorXd beq_;
    std::vector<std::pair<int, double>> grad_scratch_;
};

}  // namespace detail

// ─── Phase I ────────────────────────────────────────────────────────────────

struct FeasibilityOutcome {
    std::optional<Eigen::VectorXd> point;  // strictly interior when set
    double slack = 0.0;                    // phase-I optimum when infeasible
};

/// Finds a strictly interior, equality-feasible point, or certifies
/// infeasibility by a positive slack-minimization optimum. An optional hint
/// that is already strictly interior is accepted directly.
inline FeasibilityOutcome feasibility_phase(
    const ConvexProgram& program, const SolveOptions& options = {},
    std::optional<Eigen::VectorXd> hint = std::nullopt) {
    program.check_well_formed();
    detail::BarrierEngine engine(program, options);

    if (hint && static_cast<int>(hint->size()) == program.num_variables()) {
        Eigen::VectorXd x = *hint;
        if (engine.project_onto_equalities(x) && engine.in_domain(x, 1e-12))
            return {x, 0.0};
    }

    Eigen::VectorXd x0 = engine.box_center();
    if (!engine.project_onto_equalities(x0))
        return {std::nullopt, kInfinity};
    if (program.inequalities.empty()) {
        if (engine.in_domain(x0, 0.0)) return {x0, 0.0};
        return {std::nullopt, kInfinity};
    }
    if (engine.in_domain(x0, 1e-9)) return {x0, 0.0};

    // Phase-I program: minimize s subject to g_k(x) - s <= rhs_k.
    ConvexProgram aux;
    aux.variables = program.variables;
    aux.objective.assign(program.variables.size(), 0.0);
    aux.equalities = program.equalities;
    int s_var = aux.add_variable(-kInfinity, kInfinity);
    aux.objective[s_var] = 1.0;
    for (const ConstraintExpr& c : program.inequalities) {
        ConstraintExpr cc = c;
        cc.linear.push_back({s_var, -1.0});
        aux.inequalities.push_back(std::move(cc));
    }

    double viol0 = engine.max_violation(x0);
    Eigen::VectorXd y0(aux.num_variables());
    y0.head(program.num_variables()) = x0;
    y0[s_var] = std::max(viol0, 0.0) + 1.0;

    // Run the barrier on the phase-I program, probing for early exit once a
    // point is strictly interior for the original program.
    SolveOptions popt = options;
    popt.record_trace = false;
    detail::BarrierEngine aux_engine(aux, popt);
    double mu = popt.mu0;
    Eigen::VectorXd y = y0;
    const double interior_margin = 1e-7;
    for (int outer = 0; outer < popt.max_outer; ++outer) {
        int steps = 0;
        double dec = kInfinity;
        aux_engine.center(y, mu, steps, dec, popt.max_inner);
        Eigen::VectorXd xpart = y.head(program.num_variables());
        if (engine.max_violation(xpart) < -interior_margin)
            return {xpart, 0.0};
        if (aux_engine.inequality_count() * mu < popt.tol) break;
        mu *= popt.mu_factor;
    }
    Eigen::VectorXd xpart = y.head(program.num_variables());
    double final_viol = engine.max_violation(xpart);
    if (final_viol < 0.0) return {xpart, 0.0};
    return {std::nullopt, std::max(final_viol, y[s_var])};
}

// ─── Top-level solve ────────────────────────────────────────────────────────

/// Solves the program to KKT residual <= options.tol, certifies
/// infeasibility through the phase-I slack optimum, or reports
/// IterationLimit. An optional start point is used when strictly interior.
inline SolveResult solve_program(const ConvexProgram& program,
                                 const SolveOptions& options = {},
                                 std::optional<Eigen::VectorXd> start = std::nullopt) {
    program.check_well_formed();

    // Degenerate rows without variables decide feasibility immediately.
    for (const ConstraintExpr& c : program.inequalities)
        if (c.linear.empty() && c.curves.empty() && 0.0 > c.rhs + 1e-12) {
            SolveResult res;
            res.status = SolveStatus::Infeasible;
            res.infeasibility_slack = -c.rhs;
            return res;
        }
    if (program.num_variables() == 0) {
        SolveResult res;
        res.status = SolveStatus::Optimal;
        res.point = Eigen::VectorXd();
        res.objective_value = program.objective_constant;
        res.kkt_residual = 0.0;
        return res;
    }

    FeasibilityOutcome feas = feasibility_phase(program, options, std::move(start));
    if (!feas.point) {
        SolveResult res;
        res.status = feas.slack > kInfeasibleSlack ? SolveStatus::Infeasible
                                                   : SolveStatus::IterationLimit;
        res.infeasibility_slack = feas.slack;
        return res;
    }

    detail::BarrierEngine engine(program, options);
    return engine.run(std::move(*feas.point));
}

}  // namespace fogopt
