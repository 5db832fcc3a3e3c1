#pragma once

// Hosting-capacity estimators. The fixed-voltage method solves, per scenario,
// the largest per-generator power at which the maximum load voltage just
// reaches the limit (arithmetic and sorting only). The fixed-power method
// estimates the overvoltage probability at a trial total power and bisects.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gridhc/errors.hpp"
#include "gridhc/loadflow.hpp"
#include "gridhc/scenarios.hpp"

namespace gridhc {

struct StudyMeta {
    std::uint64_t seed = 0;
    double v_plus = 0.0;
    std::string feeder_id;
};

struct HcOptions {
    double gen_pf = 1.0;     // PV power factor; 1 = active power only
    bool gen_lagging = true; // below-unity pf absorbs reactive power when true
    int threads = 1;
};

struct HcSampleSet {
    std::vector<double> p_gen_max; // per-scenario max per-generator power, pu; +inf if unbounded
    int n_gen = 0;
    int n_lds = 0;
    int unbounded_count = 0;
    StudyMeta meta;
    double eval_seconds = 0.0; // scenario-evaluation wall time (sampling excluded)

    int n_mc() const { return static_cast<int>(p_gen_max.size()); }
    int finite_count() const { return n_mc() - unbounded_count; }
};

enum class Method { fixed_voltage, fixed_power };

inline const char* method_name(Method m) {
    return m == Method::fixed_voltage ? "fixed-voltage" : "fixed-power";
}

struct BisectionStep {
    double p_total = 0.0; // pu
    double eps_hat = 0.0;
};

struct HcEstimate {
    double phi_eps_per_gen = 0.0; // pu
    double phi_eps_total = 0.0;   // n_gen * phi_eps_per_gen
    double epsilon = 0.0;
    Method method = Method::fixed_voltage;
    int n_gen = 0;
    int iterations = 0;      // eps-hat evaluations (fixed-power only)
    double wall_time = 0.0;  // seconds over the scenario/bisection loop
    bool converged = true;   // error-metric tolerance met (always true for fixed-voltage)
    bool unbounded = false;  // quantile fell inside the unbounded tail
    std::vector<BisectionStep> steps; // fixed-power evaluation trace, one per iteration
};

namespace detail {

inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n < 2) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// min over entries with s[k] > 0 of h[k]/s[k]; empty when no sensitivity is
/// positive (the "no constraint ever binds" convention).
inline std::optional<double> min_positive_ratio(const RealVector& headroom, const RealVector& s) {
    std::optional<double> best;
    for (int k = 0; k < s.size(); ++k) {
        if (s[k] <= 0.0) continue;
        double r = headroom[k] / s[k];
        if (!best || r < *best) best = r;
    }
    return best;
}

/// Largest per-generator power with v_base + s*p <= v_plus at every row, in
/// the same double arithmetic the violation test uses. The candidate from the
/// ratio minimum is walked down by ulps until no row exceeds the limit.
inline std::optional<double> max_feasible_power(const RealVector& v_base, const RealVector& s,
                                                double v_plus) {
    RealVector headroom = (v_plus - v_base.array()).matrix();
    auto p = min_positive_ratio(headroom, s);
    if (!p) return std::nullopt;
    for (int guard = 0; guard < 8; ++guard) {
        bool ok = true;
        for (int k = 0; k < s.size(); ++k)
            if (v_base[k] + s[k] * *p > v_plus) {
                ok = false;
                break;
            }
        if (ok) return p;
        p = std::nextafter(*p, 0.0);
    }
    fail(ErrorCode::validation, "binding-power polish did not settle");
}

/// Caches the load-row sensitivity submatrix of a MagnitudeModel so scenario
/// evaluation is a column gather instead of a full F product.
class ScenarioEvaluator {
public:
    ScenarioEvaluator(const MagnitudeModel& mag, double v_plus, const HcOptions& opts = {})
        : v_plus_(v_plus) {
        const int nl = mag.n_l_rows();
        const int n_lds = mag.n_lds();
        require(n_lds > 0, ErrorCode::validation, "model has no loads");
        require(opts.gen_pf > 0.0 && opts.gen_pf <= 1.0, ErrorCode::validation,
                "generator power factor must be in (0, 1]");

        double beta = 0.0; // reactive injection per unit of active, signed
        if (opts.gen_pf < 1.0) {
            beta = std::sqrt(1.0 - opts.gen_pf * opts.gen_pf) / opts.gen_pf;
            if (opts.gen_lagging) beta = -beta;
        }

        v_base_.resize(n_lds);
        for (int l = 0; l < n_lds; ++l) v_base_[l] = mag.v_bar_mag[mag.load_rows[static_cast<std::size_t>(l)]];
        require((v_base_.array() < v_plus_).all(), ErrorCode::infeasible_limit,
                "voltage limit " + std::to_string(v_plus_) +
                    " pu does not exceed every base-case load voltage");

        // Column g: load-row voltage sensitivity to per-generator power at load g.
        sens_.resize(n_lds, n_lds);
        for (int g = 0; g < n_lds; ++g) {
            int col = mag.load_rows[static_cast<std::size_t>(g)] - 3; // p column = L row
            for (int l = 0; l < n_lds; ++l) {
                int row = mag.load_rows[static_cast<std::size_t>(l)];
                double v = mag.f(row, col);
                if (beta != 0.0) v += beta * mag.f(row, nl + col);
                sens_(l, g) = v;
            }
        }

        // Gather order fixed by ascending node row so any path summing the
        // same scenario reproduces these sums bitwise.
        col_order_.resize(static_cast<std::size_t>(n_lds));
        std::iota(col_order_.begin(), col_order_.end(), 0);
        std::sort(col_order_.begin(), col_order_.end(), [&](int x, int y) {
            return mag.load_rows[static_cast<std::size_t>(x)] < mag.load_rows[static_cast<std::size_t>(y)];
        });
        col_rank_.assign(static_cast<std::size_t>(n_lds), 0);
        for (int r = 0; r < n_lds; ++r)
            col_rank_[static_cast<std::size_t>(col_order_[static_cast<std::size_t>(r)])] = r;
    }

    int n_lds() const { return static_cast<int>(v_base_.size()); }
    double v_plus() const { return v_plus_; }
    const RealVector& base_voltages() const { return v_base_; }

    /// Sensitivity of every load-row voltage to the scenario's per-generator power.
    RealVector sensitivity(const Scenario& sc) const {
        std::vector<int> cols(sc.omega.begin(), sc.omega.end());
        std::sort(cols.begin(), cols.end(),
                  [&](int x, int y) { return col_rank_[static_cast<std::size_t>(x)] < col_rank_[static_cast<std::size_t>(y)]; });
        RealVector s = RealVector::Zero(n_lds());
        for (int g : cols) s += sens_.col(g);
        return s;
    }

    std::optional<double> max_feasible(const Scenario& sc) const {
        return max_feasible_power(v_base_, sensitivity(sc), v_plus_);
    }

    bool violates(const Scenario& sc, double p_gen) const {
        RealVector s = sensitivity(sc);
        for (int k = 0; k < s.size(); ++k)
            if (v_base_[k] + s[k] * p_gen > v_plus_) return true;
        return false;
    }

    /// max over load rows of predicted voltage minus the limit, at power p_gen.
    double binding_gap(const Scenario& sc, double p_gen) const {
        RealVector s = sensitivity(sc);
        return (v_base_.array() + s.array() * p_gen).maxCoeff() - v_plus_;
    }

private:
    RealMatrix sens_;
    RealVector v_base_;
    double v_plus_;
    std::vector<int> col_order_;
    std::vector<int> col_rank_;
};

/// Closed-form per-scenario capacity (the constraint-active method's kernel):
/// p_hat = min over load rows with positive sensitivity of headroom/sensitivity,
/// or Unbounded (nullopt) when no sensitivity is positive.
inline std::optional<double> max_gen_fixed_voltage(const MagnitudeModel& mag,
                                                   const IndicatorVector& lam, double v_plus) {
    const int nl = mag.n_l_rows();
    require(lam.lambda.size() == nl, ErrorCode::validation, "indicator length mismatch");
    const int n_lds = mag.n_lds();
    RealVector v_base(n_lds), s = RealVector::Zero(n_lds);
    for (int l = 0; l < n_lds; ++l)
        v_base[l] = mag.v_bar_mag[mag.load_rows[static_cast<std::size_t>(l)]];
    require((v_base.array() < v_plus).all(), ErrorCode::infeasible_limit,
            "voltage limit " + std::to_string(v_plus) +
                " pu does not exceed every base-case load voltage");
    for (int col = 0; col < nl; ++col) {
        if (lam.lambda[col] == 0.0) continue;
        for (int l = 0; l < n_lds; ++l)
            s[l] += lam.lambda[col] * mag.f(mag.load_rows[static_cast<std::size_t>(l)], col);
    }
    return max_feasible_power(v_base, s, v_plus);
}

/// Evaluates a pre-drawn scenario set with the fixed-voltage method. Samples
/// land at their scenario index, so the result is identical for any thread count.
inline HcSampleSet run_fixed_voltage(const MagnitudeModel& mag,
                                     const std::vector<Scenario>& scenarios, double v_plus,
                                     const HcOptions& opts = {}, const StudyMeta& meta = {}) {
    require(!scenarios.empty(), ErrorCode::validation, "empty scenario set");
    ScenarioEvaluator ev(mag, v_plus, opts);
    const int n = static_cast<int>(scenarios.size());

    HcSampleSet out;
    out.p_gen_max.assign(static_cast<std::size_t>(n), 0.0);
    out.n_gen = scenarios.front().n_gen();
    out.n_lds = ev.n_lds();
    out.meta = meta;
    out.meta.v_plus = v_plus;

    auto t0 = std::chrono::steady_clock::now();
    detail::parallel_for(n, opts.threads, [&](int i) {
        auto p = ev.max_feasible(scenarios[static_cast<std::size_t>(i)]);
        out.p_gen_max[static_cast<std::size_t>(i)] =
            p ? *p : std::numeric_limits<double>::infinity();
    });
    out.eval_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    out.unbounded_count = static_cast<int>(
        std::count_if(out.p_gen_max.begin(), out.p_gen_max.end(),
                      [](double v) { return std::isinf(v); }));
    return out;
}

/// Samples n_mc scenarios from the counter-based stream and evaluates them.
inline HcSampleSet run_fixed_voltage(const MagnitudeModel& mag, int n_gen, int n_mc,
                                     std::uint64_t seed, double v_plus, const HcOptions& opts = {},
                                     const StudyMeta& meta_in = {}) {
    auto scenarios = sample_scenario_set(seed, n_mc, mag.n_lds(), n_gen);
    StudyMeta meta = meta_in;
    meta.seed = seed;
    return run_fixed_voltage(mag, scenarios, v_plus, opts, meta);
}

/// Order statistic k = max(1, ceil(eps * N_MC)) over the finite samples, with
/// unbounded scenarios ranking above every finite one.
inline HcEstimate estimate_phi_eps(const HcSampleSet& samples, double epsilon) {
    require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::validation, "epsilon must be in [0, 1]");
    require(samples.n_mc() > 0, ErrorCode::validation, "empty sample set");
    require(samples.finite_count() > 0, ErrorCode::all_unbounded,
            "every scenario is unbounded; no voltage constraint ever binds");

    std::vector<double> finite;
    finite.reserve(static_cast<std::size_t>(samples.finite_count()));
    for (double v : samples.p_gen_max)
        if (!std::isinf(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());

    double target = epsilon * samples.n_mc();
    // ceil with a relative snap so eps*N landing a few ulps above an integer
    // does not shift the order statistic.
    int k = static_cast<int>(std::ceil(target - 1e-9 * std::max(1.0, target)));
    k = std::max(1, k);

    HcEstimate est;
    est.epsilon = epsilon;
    est.method = Method::fixed_voltage;
    est.n_gen = samples.n_gen;
    est.wall_time = samples.eval_seconds;
    if (k > static_cast<int>(finite.size())) {
        est.unbounded = true;
        est.phi_eps_per_gen = std::numeric_limits<double>::infinity();
        est.phi_eps_total = std::numeric_limits<double>::infinity();
        return est;
    }
    est.phi_eps_per_gen = finite[static_cast<std::size_t>(k - 1)];
    est.phi_eps_total = samples.n_gen * est.phi_eps_per_gen;
    return est;
}

/// Violation fraction over the scenario set at total power p_total split
/// evenly across each scenario's generators.
inline double eps_hat(const ScenarioEvaluator& ev, const std::vector<Scenario>& scenarios,
                      double p_total, int threads = 1) {
    require(!scenarios.empty(), ErrorCode::validation, "empty scenario set");
    require(p_total >= 0.0, ErrorCode::validation, "total power must be nonnegative");
    const int n = static_cast<int>(scenarios.size());
    double p_gen = p_total / scenarios.front().n_gen();
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    detail::parallel_for(n, threads, [&](int i) {
        hit[static_cast<std::size_t>(i)] =
            ev.violates(scenarios[static_cast<std::size_t>(i)], p_gen) ? 1 : 0;
    });
    int violations = static_cast<int>(std::count(hit.begin(), hit.end(), 1));
    return static_cast<double>(violations) / static_cast<double>(n);
}

inline double eps_hat(const MagnitudeModel& mag, const std::vector<Scenario>& scenarios,
                      double p_total, double v_plus, const HcOptions& opts = {}) {
    ScenarioEvaluator ev(mag, v_plus, opts);
    return eps_hat(ev, scenarios, p_total, opts.threads);
}

/// Mixed relative/absolute error between successive violation estimates.
inline double error_metric(double eps_j, double eps_jm1, double epsilon) {
    require(eps_j >= 0.0 && eps_j <= 1.0 && eps_jm1 >= 0.0 && eps_jm1 <= 1.0 && epsilon >= 0.0 &&
                epsilon <= 1.0,
            ErrorCode::validation, "error metric arguments must be in [0, 1]");
    return std::abs((eps_j - epsilon) - (eps_jm1 - epsilon)) / (1.0 + std::abs(eps_jm1 - epsilon));
}

struct BisectionOptions {
    double tau = 0.01;
    int max_iter = 60;
    HcOptions hc;
};

/// Fixed-power method: bisect on total power over a shared scenario set until
/// successive violation estimates agree within tau. Evaluations are counted in
/// `iterations`; a run that exhausts max_iter is returned with converged=false.
inline HcEstimate bisect_fixed_power(const MagnitudeModel& mag,
                                     const std::vector<Scenario>& scenarios, double epsilon,
                                     double tau, double p0, double p1, double v_plus,
                                     int max_iter = 60, const HcOptions& opts = {}) {
    require(!scenarios.empty(), ErrorCode::validation, "empty scenario set");
    require(tau > 0.0, ErrorCode::validation, "tau must be positive");
    require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::validation, "epsilon must be in [0, 1]");
    require(p1 > p0 && p0 >= 0.0, ErrorCode::bad_bracket,
            "bracket must satisfy 0 <= p0 < p1");

    ScenarioEvaluator ev(mag, v_plus, opts);
    const int n_gen = scenarios.front().n_gen();

    HcEstimate est;
    est.epsilon = epsilon;
    est.method = Method::fixed_power;
    est.n_gen = n_gen;
    est.converged = false;

    auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](double p_total) {
        est.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        est.phi_eps_per_gen = p_total / n_gen;
        est.phi_eps_total = n_gen * est.phi_eps_per_gen;
        return est;
    };

    double eps_lo = eps_hat(ev, scenarios, p0, opts.threads);
    est.iterations = 1;
    est.steps.push_back({p0, eps_lo});
    if (eps_lo == epsilon) {
        est.converged = true;
        return finish(p0);
    }
    double eps_hi = eps_hat(ev, scenarios, p1, opts.threads);
    est.iterations = 2;
    est.steps.push_back({p1, eps_hi});
    require(eps_lo <= epsilon && epsilon <= eps_hi, ErrorCode::bad_bracket,
            "eps_hat(p0)=" + std::to_string(eps_lo) + ", eps_hat(p1)=" + std::to_string(eps_hi) +
                " do not bracket epsilon=" + std::to_string(epsilon));
    if (eps_hi == epsilon) {
        est.converged = true;
        return finish(p1);
    }

    double lo = p0, hi = p1;
    double eps_prev = eps_hi;
    double p_mid = p1;
    while (est.iterations < max_iter) {
        p_mid = 0.5 * (lo + hi);
        double eps_mid = eps_hat(ev, scenarios, p_mid, opts.threads);
        ++est.iterations;
        est.steps.push_back({p_mid, eps_mid});
        // The error test is only meaningful across the target; same-side pairs
        // sit on one plateau of the staircase and would stop the search on any
        // repeat, arbitrarily far from the quantile.
        bool straddles = (eps_mid - epsilon) * (eps_prev - epsilon) <= 0.0;
        if (eps_mid == epsilon ||
            (straddles && error_metric(eps_mid, eps_prev, epsilon) < tau)) {
            est.converged = true;
            return finish(p_mid);
        }
        if (eps_mid > epsilon)
            hi = p_mid;
        else
            lo = p_mid;
        eps_prev = eps_mid;
    }
    return finish(p_mid);
}

/// Deterministic capacity at 100% penetration. Also the natural bracket top
/// for bisection, since every sampled scenario is the all-loads scenario.
inline double deterministic_capacity(const MagnitudeModel& mag, double v_plus,
                                     const HcOptions& opts = {}) {
    ScenarioEvaluator ev(mag, v_plus, opts);
    Scenario all;
    all.omega.resize(static_cast<std::size_t>(mag.n_lds()));
    std::iota(all.omega.begin(), all.omega.end(), 0);
    auto p = ev.max_feasible(all);
    require(p.has_value(), ErrorCode::all_unbounded,
            "the 100%-penetration scenario has no binding voltage constraint");
    return *p * mag.n_lds();
}

struct Bracket {
    double p0 = 0.0;
    double p1 = 0.0;
    int doublings = 0;
};

/// Bisection bracket: [0, deterministic 100%-penetration capacity], with p1
/// doubled (at most 10 times) when the violation fraction there still falls
/// short of epsilon.
inline Bracket initial_bracket(const MagnitudeModel& mag, const std::vector<Scenario>& scenarios,
                               double epsilon, double v_plus, const HcOptions& opts = {}) {
    Bracket br;
    br.p1 = deterministic_capacity(mag, v_plus, opts);
    ScenarioEvaluator ev(mag, v_plus, opts);
    while (eps_hat(ev, scenarios, br.p1, opts.threads) < epsilon) {
        require(br.doublings < 10, ErrorCode::bad_bracket,
                "violation fraction stays below epsilon after 10 bracket doublings");
        br.p1 *= 2.0;
        ++br.doublings;
    }
    return br;
}

// ---------------------------------------------------------------------------
// Linearization validation
// ---------------------------------------------------------------------------

struct ValidationLevel {
    double p_per_gen = 0.0;    // uniform injection at every load, pu
    double vmax_linear = 0.0;  // feeder max predicted |v|, non-slack rows
    double vmax_actual = 0.0;  // feeder max |v| from the nonlinear solver
    double max_abs_err = 0.0;  // max |linear - nonlinear| over non-slack rows
    double vmax_nonload = 0.0; // largest nonlinear |v| at rows without a load
};

struct ValidationReport {
    std::vector<ValidationLevel> levels;
    double p_house_det = 0.0; // deterministic per-load export limit, pu
    double max_abs_err = 0.0; // worst error across all levels
};

/// Sweeps a uniform per-load injection from zero to the deterministic
/// 100%-penetration capacity and compares the magnitude model against the
/// nonlinear solver at every level.
inline ValidationReport validate_linearization(const NetworkModel& net,
                                               const PartitionedAdmittance& adm,
                                               const MagnitudeModel& mag, double v_plus,
                                               int n_levels = 21,
                                               const SolveOptions& opts = {.tol = 1e-11, .max_iter = 100}) {
    require(n_levels >= 2, ErrorCode::validation, "need at least two sweep levels");
    const int nl = mag.n_l_rows();
    const int n_lds = mag.n_lds();

    ValidationReport rep;
    rep.p_house_det = deterministic_capacity(mag, v_plus) / n_lds;

    ComplexVector s_base = base_injections(net, adm.ordering);
    RealVector p_base = s_base.real();
    RealVector q_base = s_base.imag();
    ComplexVector v0 = net.slack_voltage();

    std::vector<char> is_load(static_cast<std::size_t>(nl), 0);
    for (int row : mag.load_rows) is_load[static_cast<std::size_t>(row - 3)] = 1;

    for (int lvl = 0; lvl < n_levels; ++lvl) {
        double p_gen = rep.p_house_det * lvl / (n_levels - 1);
        RealVector p = p_base;
        for (int row : mag.load_rows) p[row - 3] += p_gen;

        ComplexVector s = (p.cast<Complex>() + Complex(0.0, 1.0) * q_base.cast<Complex>());
        ComplexSolution sol;
        try {
            sol = solve_nonlinear(adm, s, v0, opts);
        } catch (const Error& e) {
            fail(e.code(), "sweep level " + std::to_string(lvl) + " (p_gen=" +
                               std::to_string(p_gen) + " pu): " + e.what());
        }

        RealVector v_lin = predict_voltages(mag, p, q_base);
        RealVector v_act = sol.vl.cwiseAbs();

        ValidationLevel out;
        out.p_per_gen = p_gen;
        out.vmax_linear = v_lin.tail(nl).maxCoeff();
        out.vmax_actual = v_act.maxCoeff();
        out.max_abs_err = (v_lin.tail(nl) - v_act).cwiseAbs().maxCoeff();
        out.vmax_nonload = 0.0;
        for (int k = 0; k < nl; ++k)
            if (!is_load[static_cast<std::size_t>(k)]) out.vmax_nonload = std::max(out.vmax_nonload, v_act[k]);
        rep.max_abs_err = std::max(rep.max_abs_err, out.max_abs_err);
        rep.levels.push_back(out);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Penetration sweeps
// ---------------------------------------------------------------------------

struct PenetrationStats {
    int n_gen = 0;
    double n_pen = 0.0;
    int unbounded = 0;
    // Boxplot statistics of per-generator power, pu (finite samples).
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    std::vector<double> phi_eps_per_gen; // one per requested epsilon, pu
};

struct DistributionSummary {
    std::vector<double> eps_list;
    std::vector<PenetrationStats> rows;
    StudyMeta meta;
    int n_mc = 0;
    int n_lds = 0;
};

namespace detail {

/// Linear-interpolation quantile (the common boxplot convention) on a sorted
/// sample.
inline double interp_quantile(const std::vector<double>& sorted, double p) {
    const auto m = sorted.size();
    if (m == 1) return sorted[0];
    double h = p * static_cast<double>(m - 1);
    auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= m) return sorted[m - 1];
    double w = h - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
}

} // namespace detail

inline PenetrationStats summarize_samples(const HcSampleSet& samples,
                                          const std::vector<double>& eps_list) {
    require(samples.finite_count() > 0, ErrorCode::all_unbounded,
            "every scenario is unbounded; no voltage constraint ever binds");
    std::vector<double> finite;
    finite.reserve(static_cast<std::size_t>(samples.finite_count()));
    for (double v : samples.p_gen_max)
        if (!std::isinf(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());

    PenetrationStats st;
    st.n_gen = samples.n_gen;
    st.n_pen = penetration(samples.n_gen, samples.n_lds);
    st.unbounded = samples.unbounded_count;
    st.min = finite.front();
    st.q1 = detail::interp_quantile(finite, 0.25);
    st.median = detail::interp_quantile(finite, 0.50);
    st.q3 = detail::interp_quantile(finite, 0.75);
    st.max = samples.unbounded_count > 0 ? std::numeric_limits<double>::infinity() : finite.back();
    for (double eps : eps_list)
        st.phi_eps_per_gen.push_back(estimate_phi_eps(samples, eps).phi_eps_per_gen);
    return st;
}

/// Fixed-voltage study per penetration level; scenario i always comes from
/// stream (seed, i), so levels share draws and stay comparable.
inline DistributionSummary sweep_penetration(const MagnitudeModel& mag,
                                             const std::vector<int>& n_gen_list, int n_mc,
                                             std::uint64_t seed, double v_plus,
                                             const std::vector<double>& eps_list,
                                             const HcOptions& opts = {},
                                             const StudyMeta& meta_in = {}) {
    require(!n_gen_list.empty(), ErrorCode::usage, "penetration list is empty");
    const int n_lds = mag.n_lds();
    for (int n_gen : n_gen_list)
        require(n_gen >= 1 && n_gen <= n_lds, ErrorCode::validation,
                "n_gen " + std::to_string(n_gen) + " outside [1, " + std::to_string(n_lds) + "]");

    DistributionSummary summary;
    summary.eps_list = eps_list;
    summary.meta = meta_in;
    summary.meta.seed = seed;
    summary.meta.v_plus = v_plus;
    summary.n_mc = n_mc;
    summary.n_lds = n_lds;
    for (int n_gen : n_gen_list) {
        HcSampleSet samples = run_fixed_voltage(mag, n_gen, n_mc, seed, v_plus, opts, summary.meta);
        summary.rows.push_back(summarize_samples(samples, eps_list));
    }
    return summary;
}

} // namespace gridhc
