#include "fogopt/convex.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fogopt/relaxation.hpp"
#include "test_util.hpp"

using namespace fogopt;

// ─── Ratio-term derivatives ──────────────────────────────────────────────────

TEST(Convex, RatioTermDerivatives) {
    auto d = ratio_term_derivatives(1.0, 1.0);
    EXPECT_DOUBLE_EQ(d.gradient[0], 2.0);
    EXPECT_DOUBLE_EQ(d.gradient[1], -1.0);

    auto z = ratio_term_derivatives(0.0, 3.0);
    EXPECT_DOUBLE_EQ(z.gradient[0], 0.0);
    EXPECT_DOUBLE_EQ(z.gradient[1], 0.0);
    Eigen::Vector2d v(1.0, 5.0);
    EXPECT_NEAR(v.dot(z.hessian * v), 2.0 / 3.0, 1e-15);  // 2 v1^2 / r

    auto h = ratio_term_derivatives(2.0, 1.0);
    Eigen::Vector2d w(2.0, 4.0);
    EXPECT_NEAR(w.dot(h.hessian * w), 72.0, 1e-12);

    EXPECT_THROW(ratio_term_derivatives(1.0, 0.0), std::domain_error);
    EXPECT_THROW(ratio_term_derivatives(1.0, -2.0), std::domain_error);
}

TEST(Convex, HessianQuadraticFormIdentity) {
    // v'Hv == (2/r)(v1 - v2 x/r)^2 on random inputs.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0), up(0.2, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        double x = u(rng), r = up(rng);
        Eigen::Vector2d v(u(rng), u(rng));
        auto d = ratio_term_derivatives(x, r);
        double expected = 2.0 / r * std::pow(v[0] - v[1] * x / r, 2);
        EXPECT_NEAR(v.dot(d.hessian * v), expected, 1e-9 * (1.0 + expected));
        EXPECT_GE(v.dot(d.hessian * v), -1e-12);
    }
}

// ─── Small program examples ──────────────────────────────────────────────────

TEST(Convex, BoundCorner) {
    ConvexProgram p;
    int x = p.add_variable(3.0, kInfinity);
    p.objective[x] = 1.0;
    SolveResult res = solve_program(p);
    ASSERT_EQ(res.status, SolveStatus::Optimal);
    EXPECT_NEAR(res.point[x], 3.0, 1e-6);
    EXPECT_NEAR(res.objective_value, 3.0, 1e-6);
}

TEST(Convex, ReciprocalContradictionInfeasible) {
    // 1/r <= 1 requires r >= 1, but r is boxed at 0.5.
    ConvexProgram p;
    int r = p.add_variable(kRateFloor, 0.5);
    ConstraintExpr c;
    c.curves.push_back({1.0, -1, r});
    c.rhs = 1.0;
    p.inequalities.push_back(c);
    SolveResult res = solve_program(p);
    EXPECT_EQ(res.status, SolveStatus::Infeasible);
    EXPECT_GT(res.infeasibility_slack, kInfeasibleSlack);
}

TEST(Convex, LpVertexWithEquality) {
    // min 2a + b over the simplex a + b = 1 -> (0, 1).
    ConvexProgram p;
    int a = p.add_variable(0.0, 1.0);
    int b = p.add_variable(0.0, 1.0);
    p.objective[a] = 2.0;
    p.objective[b] = 1.0;
    ConstraintExpr eq;
    eq.linear = {{a, 1.0}, {b, 1.0}};
    eq.rhs = 1.0;
    p.equalities.push_back(eq);
    SolveResult res = solve_program(p);
    ASSERT_EQ(res.status, SolveStatus::Optimal);
    EXPECT_NEAR(res.objective_value, 1.0, 1e-6);
    EXPECT_NEAR(res.point[a], 0.0, 1e-6);
    EXPECT_NEAR(res.point[b], 1.0, 1e-6);
}

TEST(Convex, OptimalMeetsToleranceContract) {
    ConvexProgram p;
    int x = p.add_variable(0.0, 1.0);
    int r = p.add_variable(kRateFloor, kInfinity);
    p.objective[x] = -1.0;  // push x to 1
    ConstraintExpr c;      // x^2 / r <= 0.5 with r <= 4 via second row
    c.curves.push_back({1.0, x, r});
    c.rhs = 0.5;
    p.inequalities.push_back(c);
    ConstraintExpr cap;
    cap.linear = {{r, 1.0}};
    cap.rhs = 4.0;
    p.inequalities.push_back(cap);
    SolveResult res = solve_program(p);
    ASSERT_EQ(res.status, SolveStatus::Optimal);
    EXPECT_LE(res.kkt_residual, 1e-8);
    EXPECT_NEAR(res.point[x], 1.0, 1e-5);
    // Constraint satisfied at the returned point.
    EXPECT_LE(res.point[x] * res.point[x] / res.point[r], 0.5 + 1e-8);
}

// ─── Feasibility phase ───────────────────────────────────────────────────────

TEST(Convex, FeasibilityPhaseBoundsOnly) {
    ConvexProgram p;
    p.add_variable(2.0, 6.0);
    p.add_variable(-1.0, 1.0);
    auto out = feasibility_phase(p);
    ASSERT_TRUE(out.point);
    EXPECT_DOUBLE_EQ((*out.point)[0], 4.0);
    EXPECT_DOUBLE_EQ((*out.point)[1], 0.0);
}

TEST(Convex, FeasibilityPhaseAcceptsInteriorHint) {
    ConvexProgram p;
    int r = p.add_variable(kRateFloor, kInfinity);
    ConstraintExpr c;
    c.curves.push_back({2.0, -1, r});  // 2/r <= 1 -> r >= 2
    c.rhs = 1.0;
    p.inequalities.push_back(c);
    Eigen::VectorXd hint(1);
    hint[0] = 8.0;  // balanced-allocation style strictly interior start
    auto out = feasibility_phase(p, {}, hint);
    ASSERT_TRUE(out.point);
    EXPECT_DOUBLE_EQ((*out.point)[0], 8.0);
}

TEST(Convex, FeasibilityPhaseCertifiesContradiction) {
    ConvexProgram p;
    int x = p.add_variable(0.0, 1.0);
    ConstraintExpr lo;  // x >= 0.8
    lo.linear = {{x, -1.0}};
    lo.rhs = -0.8;
    ConstraintExpr hi;  // x <= 0.2
    hi.linear = {{x, 1.0}};
    hi.rhs = 0.2;
    p.inequalities.push_back(lo);
    p.inequalities.push_back(hi);
    auto out = feasibility_phase(p);
    EXPECT_FALSE(out.point);
    EXPECT_GT(out.slack, kInfeasibleSlack);
}

// ─── Gradient finite differences ─────────────────────────────────────────────

TEST(Convex, ConstraintGradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> coef(0.1, 5.0), point(0.5, 4.0);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 4;
        ConstraintExpr c;
        c.linear.push_back({static_cast<int>(rng() % n), coef(rng)});
        c.curves.push_back({coef(rng), static_cast<int>(rng() % n),
                            static_cast<int>(rng() % n)});
        c.curves.push_back({coef(rng), static_cast<int>(rng() % n), -1});
        c.curves.push_back({coef(rng), -1, static_cast<int>(rng() % n)});
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = point(rng);

        std::vector<std::pair<int, double>> grad;
        detail::expr_gradient(c, x, grad);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        for (auto& [i, v] : grad) g[i] += v;

        for (int i = 0; i < n; ++i) {
            double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd =
                (detail::expr_value(c, xp) - detail::expr_value(c, xm)) / (2 * h);
            EXPECT_NEAR(g[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
            ++checked;
        }
    }
    EXPECT_EQ(checked, 4000);
}

// ─── Barrier trace ───────────────────────────────────────────────────────────

TEST(Convex, ObjectiveMonotoneAcrossOuterIterations) {
    SystemInstance in = fogopt::testutil::random_small_instance(4, 2, 99);
    std::vector<int> free_all(in.num_tasks(), kFreeTask);
    RelaxedBuild build = build_relaxed_program(in, free_all);
    SolveOptions opt;
    opt.record_trace = true;
    SolveResult res = solve_program(build.program, opt);
    ASSERT_EQ(res.status, SolveStatus::Optimal);
    ASSERT_GE(res.trace.size(), 3u);
    for (size_t k = 1; k < res.trace.size(); ++k)
        EXPECT_LE(res.trace[k].objective,
                  res.trace[k - 1].objective +
                      1e-7 * (1.0 + std::abs(res.trace[k - 1].objective)));
}

TEST(Convex, RateFloorHolds) {
    SystemInstance in = fogopt::testutil::random_small_instance(3, 1, 5);
    std::vector<int> free_all(in.num_tasks(), kFreeTask);
    RelaxedBuild build = build_relaxed_program(in, free_all);
    SolveResult res = solve_program(build.program);
    if (res.status != SolveStatus::Optimal) GTEST_SKIP();
    for (const ConstraintExpr& c : build.program.inequalities)
        for (const CurveTerm& t : c.curves)
            if (t.den >= 0) EXPECT_GE(res.point[t.den], kRateFloor);
}

// ─── LP agreement with a vertex-enumeration oracle ───────────────────────────

namespace {

struct DenseLp {
    Eigen::VectorXd c;
    Eigen::MatrixXd G;  // G x <= h, includes box faces
    Eigen::VectorXd h;
};

// Brute-force optimum over all basic feasible points (n tight rows).
double lp_vertex_optimum(const DenseLp& lp) {
    const int n = static_cast<int>(lp.c.size());
    const int m = static_cast<int>(lp.G.rows());
    double best = kInfinity;
    std::vector<int> idx(n, 0);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            Eigen::MatrixXd A(n, n);
            Eigen::VectorXd b(n);
            for (int k = 0; k < n; ++k) {
                A.row(k) = lp.G.row(idx[k]);
                b[k] = lp.h[idx[k]];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            if (!lu.isInvertible()) return;
            Eigen::VectorXd x = lu.solve(b);
            if (((lp.G * x).array() <= lp.h.array() + 1e-9).all())
                best = std::min(best, lp.c.dot(x));
            return;
        }
        for (int i = start; i < m; ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

}  // namespace

TEST(Convex, MatchesVertexOracleOnRandomLps) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> cdist(-2.0, 2.0), adist(0.1, 1.0),
        ub(0.5, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const int rows = 1 + static_cast<int>(rng() % 3);
        ConvexProgram p;
        DenseLp lp;
        lp.c.resize(n);
        std::vector<double> upper(n);
        for (int i = 0; i < n; ++i) {
            upper[i] = ub(rng);
            p.add_variable(0.0, upper[i]);
            lp.c[i] = cdist(rng);
            p.objective[i] = lp.c[i];
        }
        lp.G = Eigen::MatrixXd::Zero(rows + 2 * n, n);
        lp.h.resize(rows + 2 * n);
        for (int k = 0; k < rows; ++k) {
            ConstraintExpr c;
            double slackroom = 0.2 + adist(rng);
            double lhs_at_mid = 0.0;
            for (int i = 0; i < n; ++i) {
                double a = adist(rng);
                c.linear.push_back({i, a});
                lp.G(k, i) = a;
                lhs_at_mid += a * upper[i] / 2;
            }
            c.rhs = lhs_at_mid + slackroom;  // midpoint kept feasible
            lp.h[k] = c.rhs;
            p.inequalities.push_back(c);
        }
        for (int i = 0; i < n; ++i) {
            lp.G(rows + 2 * i, i) = 1.0;
            lp.h[rows + 2 * i] = upper[i];
            lp.G(rows + 2 * i + 1, i) = -1.0;
            lp.h[rows + 2 * i + 1] = 0.0;
        }
        double expected = lp_vertex_optimum(lp);
        SolveResult res = solve_program(p);
        ASSERT_EQ(res.status, SolveStatus::Optimal);
        EXPECT_NEAR(res.objective_value, expected,
                    1e-6 * (1.0 + std::abs(expected)));
    }
}
