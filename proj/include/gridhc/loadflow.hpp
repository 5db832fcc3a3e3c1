#pragma once

// Nonlinear three-phase load flow (fixed-point Z-bus iteration) and the
// linearized complex/magnitude voltage models derived from a solved base case.

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "gridhc/errors.hpp"
#include "gridhc/netmodel.hpp"

namespace gridhc {

struct SolveOptions {
    double tol = 1e-8;           // max power-mismatch magnitude, pu
    int max_iter = 50;
    double collapse_floor = 0.5; // reject solutions with any |v| below this, pu
};

struct ComplexSolution {
    ComplexVector v0;         // slack voltage, 3 entries
    ComplexVector vl;         // load-node voltages, 3(N_bus-1) entries
    ComplexVector s_injected; // injections that produced the solution
    double residual = 0.0;    // max power-mismatch magnitude at the L nodes
    int iterations = 0;
};

inline ComplexVector no_load_voltages(const PartitionedAdmittance& adm, const ComplexVector& v0) {
    return adm.yll_lu.solve((-(adm.yl0 * v0)).eval());
}

/// Z-bus fixed point: vL <- YLL^-1 (conj(sL ./ vL) - YL0 v0), iterated until the
/// power mismatch at every L node is within tol.
inline ComplexSolution solve_nonlinear(const PartitionedAdmittance& adm,
                                       const ComplexVector& s_load, const ComplexVector& v0,
                                       const SolveOptions& opts = {}) {
    const int nl = adm.n_l_rows();
    require(s_load.size() == nl, ErrorCode::validation,
            "injection vector has " + std::to_string(s_load.size()) + " entries, expected " +
                std::to_string(nl));
    require(v0.size() == 3, ErrorCode::validation, "slack voltage must have 3 entries");
    require(opts.tol > 0.0, ErrorCode::validation, "solver tolerance must be positive");

    ComplexVector b0 = adm.yl0 * v0;
    ComplexVector vl = adm.yll_lu.solve((-b0).eval());

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        for (int k = 0; k < nl; ++k)
            require(std::abs(vl[k]) > 1e-12, ErrorCode::voltage_collapse,
                    "zero voltage at node row " + std::to_string(k) + " during iteration");
        ComplexVector i_inj = (s_load.array() / vl.array()).conjugate();
        vl = adm.yll_lu.solve((i_inj - b0).eval());

        double vmin = vl.cwiseAbs().minCoeff();
        require(vmin >= opts.collapse_floor, ErrorCode::voltage_collapse,
                "voltage magnitude " + std::to_string(vmin) + " pu fell below the collapse floor");

        double residual =
            (vl.cwiseProduct((b0 + adm.yll * vl).conjugate()) - s_load).cwiseAbs().maxCoeff();
        if (residual <= opts.tol) {
            ComplexSolution sol;
            sol.v0 = v0;
            sol.vl = std::move(vl);
            sol.s_injected = s_load;
            sol.residual = residual;
            sol.iterations = iter;
            return sol;
        }
    }
    fail(ErrorCode::no_convergence,
         "load flow did not converge within " + std::to_string(opts.max_iter) + " iterations");
}

/// Convenience: solve the feeder at its nominal loads with zero generation.
/// This is the linearization point every hosting-capacity study shares, so it
/// runs tighter than the general default; residual left in the base point
/// shows up directly as model error at zero injection.
inline ComplexSolution solve_base_case(const NetworkModel& net, const PartitionedAdmittance& adm,
                                       const SolveOptions& opts = {.tol = 1e-11, .max_iter = 100}) {
    return solve_nonlinear(adm, base_injections(net, adm.ordering), net.slack_voltage(), opts);
}

/// First-order model v = M [p; q] + a around a solved base case. The top three
/// rows (slack) of M are zero and a starts with v0.
struct LinearModel {
    ComplexMatrix m;        // 3 N_bus x 2*3(N_bus-1)
    ComplexVector a;        // 3 N_bus
    ComplexSolution built_at;
    NodeOrdering ordering;

    int n_l_rows() const { return static_cast<int>(m.cols()) / 2; }
    int n_rows() const { return static_cast<int>(m.rows()); }
};

inline LinearModel linearize(const PartitionedAdmittance& adm, const ComplexSolution& base) {
    require(base.residual <= 1e-6, ErrorCode::validation,
            "linearization point residual " + std::to_string(base.residual) + " is not a solved load flow");
    const int nl = adm.n_l_rows();
    require(base.vl.size() == nl, ErrorCode::validation, "base solution size mismatch");
    for (int k = 0; k < nl; ++k)
        require(std::abs(base.vl[k]) > 0.0, ErrorCode::singular,
                "zero base voltage magnitude at node row " + std::to_string(k));

    // B = YLL^-1 diag(conj(v_bar_L))^-1; the conjugate matters off the flat start.
    ComplexVector d_inv = base.vl.conjugate().cwiseInverse();
    ComplexMatrix b = adm.yll_lu.solve(ComplexMatrix(d_inv.asDiagonal()));

    LinearModel lin;
    lin.m = ComplexMatrix::Zero(3 + nl, 2 * nl);
    lin.m.block(3, 0, nl, nl) = b;
    lin.m.block(3, nl, nl, nl) = Complex(0.0, -1.0) * b;
    lin.a = ComplexVector(3 + nl);
    lin.a.head(3) = base.v0;
    lin.a.tail(nl) = adm.yll_lu.solve((-(adm.yl0 * base.v0)).eval());
    lin.built_at = base;
    lin.ordering = adm.ordering;
    return lin;
}

inline ComplexVector evaluate_linear(const LinearModel& lin, const RealVector& p,
                                     const RealVector& q) {
    const int nl = lin.n_l_rows();
    require(p.size() == nl && q.size() == nl, ErrorCode::validation,
            "injection vectors must have " + std::to_string(nl) + " entries");
    return lin.m.leftCols(nl) * p + lin.m.rightCols(nl) * q + lin.a;
}

/// Angle-fixed magnitude projection of the linear model: v = F [p; q] + g with
/// F and g built from the base-case angles.
struct MagnitudeModel {
    RealMatrix f;               // 3 N_bus x 2*3(N_bus-1)
    RealVector g;               // 3 N_bus
    RealVector theta_bar;       // base angles, radians
    RealVector v_bar_mag;       // base magnitudes, pu
    std::vector<int> load_rows; // load index -> row of f/g

    int n_l_rows() const { return static_cast<int>(f.cols()) / 2; }
    int n_rows() const { return static_cast<int>(f.rows()); }
    int n_lds() const { return static_cast<int>(load_rows.size()); }
};

inline MagnitudeModel magnitude_model(const LinearModel& lin) {
    const int n = lin.n_rows();
    ComplexVector v_bar(n);
    v_bar.head(3) = lin.built_at.v0;
    v_bar.tail(n - 3) = lin.built_at.vl;

    MagnitudeModel mag;
    mag.theta_bar = v_bar.array().arg();
    mag.v_bar_mag = v_bar.cwiseAbs();
    RealVector c = mag.theta_bar.array().cos();
    RealVector s = mag.theta_bar.array().sin();
    mag.f = c.asDiagonal() * lin.m.real() + s.asDiagonal() * lin.m.imag();
    mag.g = c.cwiseProduct(lin.a.real()) + s.cwiseProduct(lin.a.imag());
    mag.load_rows.reserve(lin.ordering.load_node_rows.size());
    for (int lrow : lin.ordering.load_node_rows) mag.load_rows.push_back(lrow + 3);
    return mag;
}

/// Predicted voltage magnitudes at every node row for stacked injections (p, q).
inline RealVector predict_voltages(const MagnitudeModel& mag, const RealVector& p,
                                   const RealVector& q) {
    const int nl = mag.n_l_rows();
    require(p.size() == nl && q.size() == nl, ErrorCode::validation,
            "injection vectors must have " + std::to_string(nl) + " entries");
    return mag.f.leftCols(nl) * p + mag.f.rightCols(nl) * q + mag.g;
}

} // namespace gridhc
