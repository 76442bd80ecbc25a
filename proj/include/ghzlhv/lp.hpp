#pragma once

// Linear programming over the 64-dimensional instruction-set simplex:
// a self-contained dense two-phase primal simplex (Bland's rule), the
// Mermin-type functional separating instruction-set models from the GHZ
// prediction, exhaustive vertex scans, and best-fit distributions to
// target statistics.

#include "ghzlhv/model.hpp"
#include "ghzlhv/polarization.hpp"
#include "ghzlhv/qm.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ghzlhv {

class LpError : public std::runtime_error {
  public:
    explicit LpError(const std::string& msg) : std::runtime_error(msg) {}
};

// minimize objective . x  subject to  rows . x = rhs,  x >= 0.
struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;

    void add_equality(std::vector<double> row, double b) {
        rows.push_back(std::move(row));
        rhs.push_back(b);
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    std::vector<double> x;
    double objective = 0;
    int iterations = 0;
};

namespace detail {

constexpr double kLpEps = 1e-9;

// Dense simplex tableau; columns = structural vars + artificials + rhs.
struct SimplexTableau {
    int rows;
    int cols;       // structural + artificial
    int enterable;  // columns allowed to enter the basis (phase 2 bars artificials)
    std::vector<std::vector<double>> a;  // rows x (cols+1)
    std::vector<double> cost;            // reduced-cost row, size cols+1
    std::vector<int> basis;              // basic variable per row
    int iterations = 0;
    int iteration_limit;

    SimplexTableau(int rows_, int cols_, int iteration_limit_)
        : rows(rows_),
          cols(cols_),
          enterable(cols_),
          a(rows_, std::vector<double>(cols_ + 1, 0.0)),
          cost(cols_ + 1, 0.0),
          basis(rows_, -1),
          iteration_limit(iteration_limit_) {}

    void pivot(int r, int c) {
        double p = a[r][c];
        for (double& v : a[r]) v /= p;
        for (int i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0.0) continue;
            double f = a[i][c];
            for (int j = 0; j <= cols; ++j) a[i][j] -= f * a[r][j];
        }
        double f = cost[c];
        if (f != 0.0) {
            for (int j = 0; j <= cols; ++j) cost[j] -= f * a[r][j];
        }
        basis[r] = c;
    }

    // Bland's rule: entering = lowest-index improving column; leaving = the
    // ratio-test row, ties broken by lowest basic variable index. Guarantees
    // termination; the iteration cap is a belt-and-braces guard.
    bool iterate() {
        while (true) {
            int entering = -1;
            for (int j = 0; j < enterable; ++j) {
                if (cost[j] < -kLpEps) {
                    entering = j;
                    break;
                }
            }
            if (entering < 0) return true;  // optimal

            int leaving = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                if (a[i][entering] > kLpEps) {
                    double ratio = a[i][cols] / a[i][entering];
                    if (ratio < best_ratio - kLpEps ||
                        (ratio < best_ratio + kLpEps &&
                         (leaving < 0 || basis[i] < basis[leaving]))) {
                        best_ratio = ratio;
                        leaving = i;
                    }
                }
            }
            if (leaving < 0) return false;  // unbounded

            pivot(leaving, entering);
            if (++iterations > iteration_limit) {
                throw LpError("simplex cycling guard tripped after " +
                              std::to_string(iterations) + " iterations");
            }
        }
    }
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& problem, int iteration_limit = 200000) {
    const int m = static_cast<int>(problem.rows.size());
    const int n = problem.num_vars;
    detail::SimplexTableau t(m, n + m, iteration_limit);

    // Load rows with b >= 0; artificial i is column n+i and starts basic.
    for (int i = 0; i < m; ++i) {
        double sgn = problem.rhs[i] < 0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) t.a[i][j] = sgn * problem.rows[i][j];
        t.a[i][t.cols] = sgn * problem.rhs[i];
        t.a[i][n + i] = 1.0;
        t.basis[i] = n + i;
    }

    // Phase 1: minimize the sum of artificials.
    for (int j = 0; j <= t.cols; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += t.a[i][j];
        t.cost[j] = (j >= n && j < n + m ? 1.0 : 0.0) - s;
    }
    if (!t.iterate()) {
        throw LpError("phase-1 simplex reported an unbounded problem");
    }
    LpSolution solution;
    solution.iterations = t.iterations;
    if (-t.cost[t.cols] > 1e-7) {
        solution.status = LpStatus::infeasible;
        return solution;
    }

    // Drive any leftover artificials out of the basis.
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j) {
            if (std::abs(t.a[i][j]) > detail::kLpEps) {
                col = j;
                break;
            }
        }
        if (col >= 0) {
            t.pivot(i, col);
        }
        // else: redundant row; its artificial stays basic at value ~0.
    }

    // Phase 2: original objective; artificial columns are barred from
    // entering (their reduced costs are immaterial, basic ones sit at ~0 on
    // redundant rows).
    t.enterable = n;
    for (int j = 0; j <= t.cols; ++j) {
        t.cost[j] = j < n ? problem.objective[j] : 0.0;
    }
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] < n) {
            double c = problem.objective[t.basis[i]];
            if (c != 0.0) {
                for (int j = 0; j <= t.cols; ++j) t.cost[j] -= c * t.a[i][j];
            }
        }
    }
    if (!t.iterate()) {
        solution.status = LpStatus::unbounded;
        solution.iterations = t.iterations;
        return solution;
    }

    solution.status = LpStatus::optimal;
    solution.iterations = t.iterations;
    solution.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] < n) solution.x[t.basis[i]] = t.a[i][t.cols];
    }
    double obj = 0;
    for (int j = 0; j < n; ++j) obj += problem.objective[j] * solution.x[j];
    solution.objective = obj;
    return solution;
}

// ---------------------------------------------------------------------------
// The Mermin functional E[xxx] - E[xyy] - E[yxy] - E[yyx].
// ---------------------------------------------------------------------------

struct MainContextExpectations {
    double xxx = 0;
    double xyy = 0;
    double yxy = 0;
    double yyx = 0;
};

inline double mermin_value(const MainContextExpectations& e) {
    for (double v : {e.xxx, e.xyy, e.yxy, e.yyx}) {
        if (!(v >= -1.0 && v <= 1.0)) {
            throw ValidationError("expectation " + std::to_string(v) + " outside [-1, 1]");
        }
    }
    return e.xxx - e.xyy - e.yxy - e.yyx;
}

inline MainContextExpectations main_expectations(const ModelDistribution& m) {
    MainContextExpectations e;
    e.xxx = to_double(model_expectation(m, parse_context("xxx")));
    e.xyy = to_double(model_expectation(m, parse_context("xyy")));
    e.yxy = to_double(model_expectation(m, parse_context("yxy")));
    e.yyx = to_double(model_expectation(m, parse_context("yyx")));
    return e;
}

inline MainContextExpectations main_expectations_qm() {
    MainContextExpectations e;
    e.xxx = expectation_product(parse_context("xxx"));
    e.xyy = expectation_product(parse_context("xyy"));
    e.yxy = expectation_product(parse_context("yxy"));
    e.yyx = expectation_product(parse_context("yyx"));
    return e;
}

// ---------------------------------------------------------------------------
// Linear functionals over the model polytope.
// ---------------------------------------------------------------------------

// weights[context index][outcome index]; the functional is
// sum over contexts and outcomes of weight * P(outcome | context).
using FunctionalWeights = std::array<std::array<double, 8>, 8>;

inline FunctionalWeights zero_weights() {
    FunctionalWeights w{};
    for (auto& row : w) row.fill(0.0);
    return w;
}

// The Mermin functional expressed as outcome weights: +product on xxx,
// -product on xyy, yxy, yyx.
inline FunctionalWeights mermin_weights() {
    FunctionalWeights w = zero_weights();
    for (const char* name : {"xxx", "xyy", "yxy", "yyx"}) {
        Context ctx = parse_context(name);
        double sign = ctx.name() == "xxx" ? 1.0 : -1.0;
        for (int o = 0; o < 8; ++o) {
            w[ctx.index()][o] = sign * Outcome(ctx, o).product();
        }
    }
    return w;
}

inline double functional_value(const FunctionalWeights& w, InstructionSet s) {
    double v = 0;
    for (Context ctx : all_contexts()) {
        v += w[ctx.index()][outcome_of(s, ctx).index()];
    }
    return v;
}

struct FunctionalOptimum {
    double value = 0;
    InstructionSet witness;
};

// The maximum of a linear functional over all model distributions is
// attained at a point mass, so an exhaustive scan of the 64 deterministic
// strategies is exact. Ties resolve to the lowest canonical rank.
inline FunctionalOptimum max_linear_functional(const FunctionalWeights& w) {
    FunctionalOptimum best{-std::numeric_limits<double>::infinity(), InstructionSet::from_code(0)};
    for (InstructionSet s : all_instruction_sets()) {
        double v = functional_value(w, s);
        if (v > best.value) {
            best = {v, s};
        }
    }
    return best;
}

// Same maximum through the simplex solver; used to cross-check the scan.
inline LpSolution lp_maximize_functional(const FunctionalWeights& w) {
    LpProblem p;
    p.num_vars = 64;
    p.objective.assign(64, 0.0);
    for (InstructionSet s : all_instruction_sets()) {
        p.objective[s.code()] = -functional_value(w, s);  // maximize
    }
    p.add_equality(std::vector<double>(64, 1.0), 1.0);
    LpSolution sol = solve_lp(p);
    sol.objective = -sol.objective;
    return sol;
}

// ---------------------------------------------------------------------------
// Best-fit distributions.
// ---------------------------------------------------------------------------

enum class FitMetric { l1, linf };

inline std::string metric_name(FitMetric m) { return m == FitMetric::l1 ? "l1" : "linf"; }

struct FitResult {
    ModelDistribution model;
    double objective = 0;  // certified LP optimum for the chosen metric
    FitMetric metric = FitMetric::l1;
    // Residuals (model probability - target) of the returned model, one
    // entry per target context; agree with `objective` to the clamp bound.
    std::vector<RealOutcomeDistribution> residuals;
    int lp_iterations = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// Rounds the LP weight vector to the 2^-40 grid and renormalizes so the
// rational weights sum to exactly 1.
inline ModelDistribution model_from_lp_weights(const std::vector<double>& x) {
    const int64_t grid = int64_t(1) << 40;
    std::array<Rational, 64> w;
    Rational sum = 0;
    for (int i = 0; i < 64; ++i) {
        if (x[i] < -1e-9) {
            throw LpError("LP weight " + std::to_string(x[i]) + " below the clamp tolerance");
        }
        double clamped = x[i] < 0 ? 0.0 : x[i];
        auto ticks = static_cast<int64_t>(std::llround(clamped * static_cast<double>(grid)));
        w[i] = Rational(ticks, grid);
        sum += w[i];
    }
    if (sum == 0) throw LpError("LP returned an all-zero weight vector");
    for (auto& v : w) v /= sum;
    return ModelDistribution(std::move(w));
}

}  // namespace detail

// Minimizes the chosen norm of the residuals between the model-induced
// outcome distributions and the targets, over all distributions on the 64
// instruction sets. L1 counts every (context, outcome) cell; Linf bounds
// the worst cell.
inline FitResult fit_distribution(const std::vector<RealOutcomeDistribution>& targets_in,
                                  FitMetric metric = FitMetric::l1) {
    if (targets_in.empty()) {
        throw ValidationError("fit requires at least one target context");
    }
    std::vector<RealOutcomeDistribution> targets;
    std::vector<std::string> warnings;
    for (const auto& t : targets_in) {
        bool dup = false;
        for (const auto& kept : targets) {
            if (kept.context == t.context) {
                dup = true;
                break;
            }
        }
        if (dup) {
            warnings.push_back("duplicate target context " + t.context.name() +
                               " ignored (first occurrence kept)");
        } else {
            targets.push_back(t);
        }
    }

    const int k = static_cast<int>(targets.size());
    LpProblem p;
    // Incidence of instruction set s on (target row, outcome).
    auto incidence = [&](int target_idx, int outcome_idx, int code) {
        return outcome_of(InstructionSet::from_code(code), targets[target_idx].context).index() ==
                       outcome_idx
                   ? 1.0
                   : 0.0;
    };

    if (metric == FitMetric::l1) {
        // vars: p[64], then u,v pairs per (target, outcome): r = u - v.
        p.num_vars = 64 + 16 * k;
        p.objective.assign(p.num_vars, 0.0);
        for (int j = 64; j < p.num_vars; ++j) p.objective[j] = 1.0;
        for (int t = 0; t < k; ++t) {
            for (int o = 0; o < 8; ++o) {
                std::vector<double> row(p.num_vars, 0.0);
                for (int code = 0; code < 64; ++code) row[code] = incidence(t, o, code);
                row[64 + 16 * t + 2 * o] = -1.0;      // u
                row[64 + 16 * t + 2 * o + 1] = 1.0;   // v
                p.add_equality(std::move(row), targets[t].probs[o]);
            }
        }
    } else {
        // vars: p[64], z, slack pair per (target, outcome):
        //   A p - z + s1 = t      (residual <= z)
        //   A p + z - s2 = t      (residual >= -z)
        p.num_vars = 64 + 1 + 16 * k;
        p.objective.assign(p.num_vars, 0.0);
        p.objective[64] = 1.0;
        for (int t = 0; t < k; ++t) {
            for (int o = 0; o < 8; ++o) {
                std::vector<double> upper(p.num_vars, 0.0);
                std::vector<double> lower(p.num_vars, 0.0);
                for (int code = 0; code < 64; ++code) {
                    upper[code] = lower[code] = incidence(t, o, code);
                }
                upper[64] = -1.0;
                upper[65 + 16 * t + 2 * o] = 1.0;
                lower[64] = 1.0;
                lower[65 + 16 * t + 2 * o + 1] = -1.0;
                p.add_equality(std::move(upper), targets[t].probs[o]);
                p.add_equality(std::move(lower), targets[t].probs[o]);
            }
        }
    }
    {
        std::vector<double> simplex_row(p.num_vars, 0.0);
        for (int code = 0; code < 64; ++code) simplex_row[code] = 1.0;
        p.add_equality(std::move(simplex_row), 1.0);
    }

    LpSolution sol = solve_lp(p);
    if (sol.status != LpStatus::optimal) {
        throw LpError("fit LP did not reach an optimum (the simplex is never empty)");
    }

    FitResult result{detail::model_from_lp_weights({sol.x.begin(), sol.x.begin() + 64}),
                     sol.objective,
                     metric,
                     {},
                     sol.iterations,
                     std::move(warnings)};
    for (const auto& target : targets) {
        OutcomeDistribution induced = outcome_distribution(result.model, target.context);
        RealOutcomeDistribution res;
        res.context = target.context;
        for (int o = 0; o < 8; ++o) {
            res.probs[o] = to_double(induced.probs[o]) - target.probs[o];
        }
        result.residuals.push_back(res);
    }
    return result;
}

}  // namespace ghzlhv
