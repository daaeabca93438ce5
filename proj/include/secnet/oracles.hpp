#pragma once

#include <string>
#include <vector>

#include "secnet/errors.hpp"
#include "secnet/lp.hpp"

namespace secnet::oracles {

// Two parallel source-destination channels.
struct ParallelPairParams {
    double delta1 = 0.0, delta1e = 0.0;
    double delta2 = 0.0, delta2e = 0.0;
};

// Line network: hop j has erasure probabilities (delta_j, delta_je).
struct LineParams {
    std::vector<std::pair<double, double>> hops;
};

namespace oracle_detail {
inline void check_prob(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " out of [0,1]");
}
}  // namespace oracle_detail

/// Secret-message rate bound for two parallel channels:
///   max (1-d1) M1 + (1-d2) M2
///   1 >= C_i + M_i
///   M_i (1-d_iE)(1-d_i)/(1-d_i d_iE) <= C_{3-i}(1-d_{3-i}) + C_i (1-d_i) d_iE
/// A channel with d_i = d_iE = 1 carries nothing and has M_i pinned to 0.
inline double parallel_pair_bound(const ParallelPairParams& p, const lp::Tolerances& tol = {}) {
    oracle_detail::check_prob(p.delta1, "delta1");
    oracle_detail::check_prob(p.delta1e, "delta1e");
    oracle_detail::check_prob(p.delta2, "delta2");
    oracle_detail::check_prob(p.delta2e, "delta2e");

    lp::LinearProgram prog;
    const double d[2] = {p.delta1, p.delta2};
    const double de[2] = {p.delta1e, p.delta2e};
    int M[2], C[2];
    for (int i = 0; i < 2; ++i) {
        M[i] = prog.add_variable("M" + std::to_string(i + 1), 1.0 - d[i]);
        C[i] = prog.add_variable("C" + std::to_string(i + 1));
    }
    for (int i = 0; i < 2; ++i)
        prog.add_constraint({{C[i], 1.0}, {M[i], 1.0}}, lp::Relation::LessEq, 1.0,
                            "share" + std::to_string(i + 1));
    for (int i = 0; i < 2; ++i) {
        int o = 1 - i;
        double joint = 1.0 - d[i] * de[i];
        if (joint <= 0.0) {
            prog.add_constraint({{M[i], 1.0}}, lp::Relation::LessEq, 0.0, "dead" + std::to_string(i + 1));
            continue;
        }
        double lhs = (1.0 - de[i]) * (1.0 - d[i]) / joint;
        prog.add_constraint({{M[i], lhs}, {C[o], -(1.0 - d[o])}, {C[i], -(1.0 - d[i]) * de[i]}},
                            lp::Relation::LessEq, 0.0, "security" + std::to_string(i + 1));
    }
    auto sol = lp::solve(prog, tol);
    if (sol.status != lp::SolveStatus::Optimal)
        throw InputError(std::string("parallel_pair_bound: unexpected LP status ") + lp::to_string(sol.status));
    return sol.objective;
}

/// Secret-message rate bound for an N-hop line with state feedback:
///   max m
///   (1-d_jE)/(1-d_j d_jE) m <= k_j
///   k_j/((1-d_j) d_jE) + m/(1-d_j) <= 1
///   k_j <= d_{j-1} d_jE (1-d_j)/(1-d_j d_jE)      (j > 1; the source side is unbounded)
///   d_j + m <= 1-d_j ;  d_j <= d_{j-1} for j > 1
/// Hops with d_jE = 0 force k_j = 0 instead of the singular budget row.
inline double line_bound(const LineParams& p, const lp::Tolerances& tol = {}) {
    if (p.hops.empty()) throw InputError("line_bound: at least one hop required");
    for (auto [d, de] : p.hops) {
        oracle_detail::check_prob(d, "delta");
        oracle_detail::check_prob(de, "deltaE");
    }
    const std::size_t n = p.hops.size();
    lp::LinearProgram prog;
    int m = prog.add_variable("m", 1.0);
    std::vector<int> k(n), dd(n);
    for (std::size_t j = 0; j < n; ++j) {
        k[j] = prog.add_variable("k" + std::to_string(j + 1));
        dd[j] = prog.add_variable("d" + std::to_string(j + 1));
    }
    for (std::size_t j = 0; j < n; ++j) {
        auto [del, dele] = p.hops[j];
        std::string tag = std::to_string(j + 1);
        if (del >= 1.0) {
            // hop never delivers
            prog.add_constraint({{dd[j], 1.0}, {m, 1.0}}, lp::Relation::LessEq, 0.0, "delivered" + tag);
            if (j > 0) prog.add_constraint({{dd[j], 1.0}, {dd[j - 1], -1.0}}, lp::Relation::LessEq, 0.0,
                                           "monotone" + tag);
            continue;
        }
        double joint = 1.0 - del * dele;
        double keygen = dele * (1.0 - del) / joint;

        prog.add_constraint({{m, (1.0 - dele) / joint}, {k[j], -1.0}}, lp::Relation::LessEq, 0.0,
                            "secrecy" + tag);
        if (dele > 0.0)
            prog.add_constraint({{k[j], 1.0 / ((1.0 - del) * dele)}, {m, 1.0 / (1.0 - del)}},
                                lp::Relation::LessEq, 1.0, "budget" + tag);
        else
            prog.add_constraint({{k[j], 1.0}}, lp::Relation::LessEq, 0.0, "budget" + tag);
        if (j > 0)
            prog.add_constraint({{k[j], 1.0}, {dd[j - 1], -keygen}}, lp::Relation::LessEq, 0.0, "supply" + tag);
        else if (keygen == 0.0)
            prog.add_constraint({{k[j], 1.0}}, lp::Relation::LessEq, 0.0, "supply" + tag);
        prog.add_constraint({{dd[j], 1.0}, {m, 1.0}}, lp::Relation::LessEq, 1.0 - del, "delivered" + tag);
        if (j > 0)
            prog.add_constraint({{dd[j], 1.0}, {dd[j - 1], -1.0}}, lp::Relation::LessEq, 0.0, "monotone" + tag);
    }
    auto sol = lp::solve(prog, tol);
    if (sol.status != lp::SolveStatus::Optimal)
        throw InputError(std::string("line_bound: unexpected LP status ") + lp::to_string(sol.status));
    return sol.objective;
}

}  // namespace secnet::oracles
