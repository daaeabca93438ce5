#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secnet/errors.hpp"
#include "secnet/lp.hpp"
#include "secnet/netmodel.hpp"

namespace secnet::formulations {

enum class Algo { Algo1, Algo2, Algo3, Algo4, Algo5, SncBaseline };

inline const char* to_string(Algo a) {
    switch (a) {
        case Algo::Algo1: return "algo1";
        case Algo::Algo2: return "algo2";
        case Algo::Algo3: return "algo3";
        case Algo::Algo4: return "algo4";
        case Algo::Algo5: return "algo5";
        case Algo::SncBaseline: return "snc";
    }
    return "?";
}

struct FormulationConfig {
    Algo algo = Algo::Algo1;
    int wiretap_count = 1;                   // Algo 4
    std::size_t max_paths = 100000;          // Algo 2 / Algo 5
    bool arq_only = false;                   // pin every MDS rate k to 0
    std::size_t max_security_rows = 200000;  // Algo 4 subset guard
};

struct EdgeRateSet {
    double m = 0.0, k = 0.0, r = 0.0, s = 0.0;
};

struct SourceEdgeRates {
    double m = 0.0, k = 0.0, r = 0.0, s = 0.0, w = 0.0;
};

// Decoded achievability scheme: per-edge rates plus whichever side
// information the formulation carries (path flows, virtual flows,
// per-source splits, linearization slack).
struct SchemeSolution {
    double rate = 0.0;
    std::vector<EdgeRateSet> per_edge;
    std::optional<std::vector<std::pair<Path, double>>> per_path;
    std::optional<std::map<std::pair<int, int>, double>> virtual_flows;
    std::optional<std::vector<std::vector<SourceEdgeRates>>> per_source;
    std::optional<std::vector<double>> auxiliary;
};

// Rate conversion factors of one erasure edge.
struct EdgeCoeffs {
    bool dead = false;   // delta == 1: the edge never delivers
    double p_bob = 0.0;  // 1 - delta
    double joint = 0.0;  // 1 - delta * deltaE
    double mds_deliver = 0.0;  // (1-delta)/(1-delta deltaE), delivered fraction of MDS traffic
    double eve_arq = 0.0;      // (1-deltaE)/(1-delta deltaE), ARQ overhear probability
    double eve_mds = 0.0;      // (1-deltaE)(1-delta)/(1-delta deltaE)
    double link_key = 0.0;     // deltaE(1-delta)/(1-delta deltaE), per-packet link-key yield
};

inline EdgeCoeffs edge_coeffs(double delta, double delta_e) {
    EdgeCoeffs c;
    if (delta >= 1.0) {
        c.dead = true;
        return c;
    }
    c.p_bob = 1.0 - delta;
    c.joint = 1.0 - delta * delta_e;
    c.mds_deliver = c.p_bob / c.joint;
    c.eve_arq = (1.0 - delta_e) / c.joint;
    c.eve_mds = (1.0 - delta_e) * c.p_bob / c.joint;
    c.link_key = delta_e * c.p_bob / c.joint;
    return c;
}

inline EdgeCoeffs edge_coeffs(const EdgeChannel& e) { return edge_coeffs(e.delta, e.delta_e); }

namespace build_detail {

inline std::string var_m(std::size_t e) { return "m#" + std::to_string(e); }
inline std::string var_k(std::size_t e) { return "k#" + std::to_string(e); }
inline std::string var_r(std::size_t e) { return "r#" + std::to_string(e); }
inline std::string var_s(std::size_t e) { return "s#" + std::to_string(e); }
inline std::string var_sv(std::size_t g, std::size_t j) {
    return "sv#" + std::to_string(g) + "#" + std::to_string(j);
}
inline std::string var_t(std::size_t e) { return "t#" + std::to_string(e); }
inline std::string var_sp(std::size_t p) { return "sp#" + std::to_string(p); }
inline std::string src_tag(std::size_t l, const std::string& base) {
    auto pos = base.find('#');
    return base.substr(0, pos) + "@" + std::to_string(l) + base.substr(pos);
}

inline void pin_zero(lp::LinearProgram& prog, int col, const std::string& label) {
    prog.add_constraint({{col, 1.0}}, lp::Relation::Eq, 0.0, label);
}

struct EdgeVars {
    int m = -1, k = -1, r = -1, s = -1;
};

// Shared flow/identity/time-sharing skeleton of Algo 1/2/4 and the secure
// network coding baseline. `ts_*` hold the per-class capacity divisors of
// the time-sharing row; `coeffs` hold the effective channel fractions.
struct FlowCore {
    std::vector<EdgeVars> vars;
    std::vector<EdgeCoeffs> coeffs;
};

inline FlowCore add_flow_core(lp::LinearProgram& prog, const Network& net,
                              const std::vector<EdgeCoeffs>& coeffs, const std::vector<double>& ts_r,
                              const std::vector<double>& ts_k, const std::vector<double>& ts_m,
                              bool relaxed_randomness, const std::string& src) {
    FlowCore core;
    core.coeffs = coeffs;
    const std::size_t ne = net.edge_count();
    core.vars.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        core.vars[e].m = prog.add_variable(var_m(e));
        core.vars[e].k = prog.add_variable(var_k(e));
        core.vars[e].r = prog.add_variable(var_r(e));
        core.vars[e].s = prog.add_variable(var_s(e));
    }
    for (std::size_t j = 0; j < ne; ++j)
        if (net.vertex_index(net.edge(j).head) == net.destination_index())
            prog.objective[static_cast<std::size_t>(core.vars[j].m)] = 1.0;

    int src_idx = net.vertex_index(src);
    for (std::size_t u = 0; u < net.vertex_count(); ++u) {
        int ui = static_cast<int>(u);
        if (ui == src_idx || ui == net.destination_index()) continue;
        std::vector<std::pair<int, double>> msg, rnd;
        for (int e : net.in_edges(ui)) {
            msg.emplace_back(core.vars[static_cast<std::size_t>(e)].m, 1.0);
            rnd.emplace_back(core.vars[static_cast<std::size_t>(e)].s, -1.0);
        }
        for (int e : net.out_edges(ui)) {
            msg.emplace_back(core.vars[static_cast<std::size_t>(e)].m, -1.0);
            rnd.emplace_back(core.vars[static_cast<std::size_t>(e)].k, 1.0);
            rnd.emplace_back(core.vars[static_cast<std::size_t>(e)].r, 1.0);
        }
        if (!msg.empty()) {
            prog.add_constraint(msg, lp::Relation::Eq, 0.0, "msg_conservation:" + net.vertices()[u]);
            prog.add_constraint(rnd, relaxed_randomness ? lp::Relation::LessEq : lp::Relation::Eq, 0.0,
                                "rnd_conservation:" + net.vertices()[u]);
        }
    }

    for (std::size_t e = 0; e < ne; ++e) {
        const auto& c = coeffs[e];
        const auto& v = core.vars[e];
        const std::string& id = net.edge(e).id;
        if (c.dead) {
            pin_zero(prog, v.m, "dead_m:" + id);
            pin_zero(prog, v.k, "dead_k:" + id);
            pin_zero(prog, v.r, "dead_r:" + id);
            pin_zero(prog, v.s, "dead_s:" + id);
            continue;
        }
        prog.add_constraint({{v.s, 1.0}, {v.r, -1.0}, {v.k, -c.mds_deliver}}, lp::Relation::Eq, 0.0,
                            "delivered:" + id);
        prog.add_constraint({{v.r, 1.0 / ts_r[e]}, {v.k, 1.0 / ts_k[e]}, {v.m, 1.0 / ts_m[e]}},
                            lp::Relation::LessEq, 1.0, "timeshare:" + id);
    }
    return core;
}

inline std::vector<std::pair<int, double>> destination_randomness(const Network& net, const FlowCore& core,
                                                                  double sign) {
    std::vector<std::pair<int, double>> terms;
    for (int j : net.in_edges(net.destination_index()))
        terms.emplace_back(core.vars[static_cast<std::size_t>(j)].s, sign);
    return terms;
}

}  // namespace build_detail

/// Algo 1: end-to-end key, conservative eavesdropper accounting.
inline lp::LinearProgram build_algo1(const Network& net, bool arq_only = false) {
    using namespace build_detail;
    lp::LinearProgram prog;
    const std::size_t ne = net.edge_count();
    std::vector<EdgeCoeffs> coeffs(ne);
    std::vector<double> ts_r(ne, 1.0), ts_k(ne, 1.0), ts_m(ne, 1.0);
    for (std::size_t e = 0; e < ne; ++e) {
        coeffs[e] = edge_coeffs(net.edge(e));
        if (!coeffs[e].dead) {
            ts_r[e] = coeffs[e].p_bob;
            ts_k[e] = coeffs[e].joint;
            ts_m[e] = coeffs[e].p_bob;
        }
    }
    FlowCore core = add_flow_core(prog, net, coeffs, ts_r, ts_k, ts_m,
                                  /*relaxed_randomness=*/false, net.source());
    for (std::size_t g = 0; g < ne; ++g) {
        const auto& c = coeffs[g];
        if (c.dead) continue;
        auto row = destination_randomness(net, core, -1.0);
        row.emplace_back(core.vars[g].m, c.eve_arq);
        row.emplace_back(core.vars[g].r, c.eve_arq);
        row.emplace_back(core.vars[g].k, c.eve_mds);
        prog.add_constraint(std::move(row), lp::Relation::LessEq, 0.0, "security:" + net.edge(g).id);
    }
    if (arq_only)
        for (std::size_t e = 0; e < ne; ++e) pin_zero(prog, core.vars[e].k, "arq_only:" + net.edge(e).id);
    return prog;
}

/// Channel coding followed by secure network coding: every edge becomes a
/// lossless pipe of capacity 1-delta that the eavesdropper hears in full.
inline lp::LinearProgram build_snc_baseline(const Network& net) {
    using namespace build_detail;
    lp::LinearProgram prog;
    const std::size_t ne = net.edge_count();
    std::vector<EdgeCoeffs> coeffs(ne);
    std::vector<double> ts(ne, 1.0);
    for (std::size_t e = 0; e < ne; ++e) {
        double cap = 1.0 - net.edge(e).delta;
        if (cap <= 0.0) {
            coeffs[e].dead = true;
            continue;
        }
        coeffs[e] = edge_coeffs(0.0, 0.0);
        ts[e] = cap;
    }
    FlowCore core = add_flow_core(prog, net, coeffs, ts, ts, ts, /*relaxed_randomness=*/false, net.source());
    for (std::size_t g = 0; g < ne; ++g) {
        if (coeffs[g].dead) continue;
        auto row = destination_randomness(net, core, -1.0);
        row.emplace_back(core.vars[g].m, 1.0);
        row.emplace_back(core.vars[g].r, 1.0);
        row.emplace_back(core.vars[g].k, 1.0);
        prog.add_constraint(std::move(row), lp::Relation::LessEq, 0.0, "security:" + net.edge(g).id);
    }
    return prog;
}

/// Algo 2: exact eavesdropper accounting by path decomposition, plus
/// link-by-link keys. `paths` must be enumerate_source_rooted_paths output
/// for the network's source.
inline lp::LinearProgram build_algo2(const Network& net, const std::vector<Path>& paths,
                                     bool arq_only = false) {
    using namespace build_detail;
    lp::LinearProgram prog;
    const std::size_t ne = net.edge_count();
    std::vector<EdgeCoeffs> coeffs(ne);
    std::vector<double> ts_r(ne, 1.0), ts_k(ne, 1.0), ts_m(ne, 1.0);
    for (std::size_t e = 0; e < ne; ++e) {
        coeffs[e] = edge_coeffs(net.edge(e));
        if (!coeffs[e].dead) {
            ts_r[e] = coeffs[e].p_bob;
            ts_k[e] = coeffs[e].joint;
            ts_m[e] = coeffs[e].p_bob;
        }
    }
    FlowCore core = add_flow_core(prog, net, coeffs, ts_r, ts_k, ts_m,
                                  /*relaxed_randomness=*/true, net.source());

    std::vector<int> sp(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) sp[p] = prog.add_variable(var_sp(p));

    for (std::size_t g = 0; g < ne; ++g) {
        std::vector<std::pair<int, double>> row{{core.vars[g].s, 1.0}};
        for (std::size_t p = 0; p < paths.size(); ++p)
            if (paths[p].contains_edge(static_cast<int>(g))) row.emplace_back(sp[p], -1.0);
        prog.add_constraint(std::move(row), lp::Relation::Eq, 0.0, "path_coupling:" + net.edge(g).id);
    }

    for (std::size_t g = 0; g < ne; ++g) {
        const auto& c = coeffs[g];
        if (c.dead) continue;
        std::vector<std::pair<int, double>> row{{core.vars[g].m, c.eve_arq},
                                                {core.vars[g].k, -c.link_key},
                                                {core.vars[g].r, -c.link_key}};
        for (std::size_t p = 0; p < paths.size(); ++p)
            if (paths[p].terminus == net.destination_index() && !paths[p].contains_edge(static_cast<int>(g)))
                row.emplace_back(sp[p], -1.0);
        prog.add_constraint(std::move(row), lp::Relation::LessEq, 0.0, "security:" + net.edge(g).id);
    }
    if (arq_only)
        for (std::size_t e = 0; e < ne; ++e) pin_zero(prog, core.vars[e].k, "arq_only:" + net.edge(e).id);
    return prog;
}

/// Algo 3: exact eavesdropper accounting in polynomial size via virtual
/// flows s_gj (randomness seen on edge g that later crosses edge j). The
/// positive-part/minimum in the security bound enters through the slack t_g.
inline lp::LinearProgram build_algo3(const Network& net) {
    using namespace build_detail;
    lp::LinearProgram prog;
    const std::size_t ne = net.edge_count();
    std::vector<EdgeCoeffs> coeffs(ne);
    for (std::size_t e = 0; e < ne; ++e) coeffs[e] = edge_coeffs(net.edge(e));

    std::vector<EdgeVars> ev(ne);
    std::vector<int> tvar(ne, -1);
    for (std::size_t e = 0; e < ne; ++e) {
        ev[e].m = prog.add_variable(var_m(e));
        ev[e].k = prog.add_variable(var_k(e));
        ev[e].r = prog.add_variable(var_r(e));
        ev[e].s = prog.add_variable(var_s(e));  // diagonal s_gg
        tvar[e] = prog.add_variable(var_t(e));
    }
    auto order = edge_partial_order(net);
    std::map<std::pair<int, int>, int> sv;
    for (auto [g, j] : order) sv[{g, j}] = prog.add_variable(var_sv(static_cast<std::size_t>(g),
                                                                   static_cast<std::size_t>(j)));
    // s_gj with j == g is the diagonal variable
    auto tagged = [&](int g, int j) -> int {
        if (g == j) return ev[static_cast<std::size_t>(g)].s;
        auto it = sv.find({g, j});
        return it == sv.end() ? -1 : it->second;
    };

    for (std::size_t j = 0; j < ne; ++j)
        if (net.vertex_index(net.edge(j).head) == net.destination_index())
            prog.objective[static_cast<std::size_t>(ev[j].m)] = 1.0;

    int src_idx = net.source_index();
    for (std::size_t u = 0; u < net.vertex_count(); ++u) {
        int ui = static_cast<int>(u);
        if (ui == src_idx || ui == net.destination_index()) continue;
        if (net.in_edges(ui).empty() && net.out_edges(ui).empty()) continue;
        std::vector<std::pair<int, double>> msg, rnd;
        for (int e : net.in_edges(ui)) {
            msg.emplace_back(ev[static_cast<std::size_t>(e)].m, 1.0);
            rnd.emplace_back(ev[static_cast<std::size_t>(e)].s, -1.0);
        }
        for (int e : net.out_edges(ui)) {
            msg.emplace_back(ev[static_cast<std::size_t>(e)].m, -1.0);
            rnd.emplace_back(ev[static_cast<std::size_t>(e)].k, 1.0);
            rnd.emplace_back(ev[static_cast<std::size_t>(e)].r, 1.0);
        }
        prog.add_constraint(msg, lp::Relation::Eq, 0.0, "msg_conservation:" + net.vertices()[u]);
        prog.add_constraint(rnd, lp::Relation::Eq, 0.0, "rnd_conservation:" + net.vertices()[u]);
    }

    for (std::size_t e = 0; e < ne; ++e) {
        const auto& c = coeffs[e];
        const std::string& id = net.edge(e).id;
        if (c.dead) {
            pin_zero(prog, ev[e].m, "dead_m:" + id);
            pin_zero(prog, ev[e].k, "dead_k:" + id);
            pin_zero(prog, ev[e].r, "dead_r:" + id);
            pin_zero(prog, ev[e].s, "dead_s:" + id);
            continue;
        }
        prog.add_constraint({{ev[e].s, 1.0}, {ev[e].r, -1.0}, {ev[e].k, -c.mds_deliver}}, lp::Relation::Eq,
                            0.0, "delivered:" + id);
        prog.add_constraint(
            {{ev[e].r, 1.0 / c.p_bob}, {ev[e].k, 1.0 / c.joint}, {ev[e].m, 1.0 / c.p_bob}},
            lp::Relation::LessEq, 1.0, "timeshare:" + id);
    }
    for (auto [g, j] : order) {
        // dead edges carry no virtual flow
        if (coeffs[static_cast<std::size_t>(g)].dead || coeffs[static_cast<std::size_t>(j)].dead)
            pin_zero(prog, sv.at({g, j}), "dead_sv");
        else
            prog.add_constraint({{sv.at({g, j}), 1.0}, {ev[static_cast<std::size_t>(j)].s, -1.0}},
                                lp::Relation::LessEq, 0.0,
                                "virtual_cap:" + net.edge(static_cast<std::size_t>(g)).id + ":" +
                                    net.edge(static_cast<std::size_t>(j)).id);
    }

    // tagged-flow conservation: what a node forwards of edge g's randomness
    // may shrink by no more than the node's total randomness shrinkage
    for (std::size_t u = 0; u < net.vertex_count(); ++u) {
        int ui = static_cast<int>(u);
        if (ui == src_idx || ui == net.destination_index()) continue;
        if (net.in_edges(ui).empty() || net.out_edges(ui).empty()) continue;
        for (std::size_t g = 0; g < ne; ++g) {
            std::vector<std::pair<int, double>> row;
            for (int j : net.in_edges(ui)) {
                if (int col = tagged(static_cast<int>(g), j); col >= 0) row.emplace_back(col, 1.0);
                row.emplace_back(ev[static_cast<std::size_t>(j)].s, -1.0);
            }
            for (int j : net.out_edges(ui)) {
                if (int col = tagged(static_cast<int>(g), j); col >= 0) row.emplace_back(col, -1.0);
                row.emplace_back(ev[static_cast<std::size_t>(j)].s, 1.0);
            }
            prog.add_constraint(std::move(row), lp::Relation::LessEq, 0.0,
                                "tag_flow:" + net.edge(g).id + ":" + net.vertices()[u]);
        }
    }

    for (std::size_t g = 0; g < ne; ++g) {
        const auto& c = coeffs[g];
        const std::string& id = net.edge(g).id;
        if (c.dead) {
            pin_zero(prog, tvar[g], "dead_t:" + id);
            continue;
        }
        const double c1 = c.eve_arq;
        const double c2 = 1.0 - net.edge(g).delta_e;
        // t_g >= A_g - K_g with A_g the part of edge g's randomness that
        // reaches the destination and K_g the MDS-delivered amount
        std::vector<std::pair<int, double>> trow{{tvar[g], -1.0}, {ev[g].k, -c.mds_deliver}};
        std::vector<std::pair<int, double>> srow{{ev[g].m, c1}, {tvar[g], c1 - c2}};
        for (int j : net.in_edges(net.destination_index())) {
            if (int col = tagged(static_cast<int>(g), j); col >= 0) {
                trow.emplace_back(col, 1.0);
                srow.emplace_back(col, c2);
            }
            srow.emplace_back(ev[static_cast<std::size_t>(j)].s, -1.0);
        }
        prog.add_constraint(std::move(trow), lp::Relation::LessEq, 0.0, "excess:" + id);
        prog.add_constraint(std::move(srow), lp::Relation::LessEq, 0.0, "security:" + id);
    }
    return prog;
}

/// Algo 4: the eavesdropper observes any `wiretap_count` edges at once.
inline lp::LinearProgram build_algo4(const Network& net, int wiretap_count,
                                     std::size_t max_security_rows = 200000) {
    using namespace build_detail;
    const std::size_t ne = net.edge_count();
    if (wiretap_count < 1 || static_cast<std::size_t>(wiretap_count) > ne)
        throw InputError("algo4: wiretap count must be in [1, " + std::to_string(ne) + "]");
    double expected = static_cast<double>(wiretap_count);
    for (int i = 0; i < wiretap_count; ++i)
        expected *= static_cast<double>(ne - static_cast<std::size_t>(i)) / static_cast<double>(i + 1);
    if (expected > static_cast<double>(max_security_rows))
        throw CapacityError("algo4: " + std::to_string(static_cast<long long>(expected)) +
                            " security rows exceed the limit of " + std::to_string(max_security_rows));

    lp::LinearProgram prog;
    std::vector<EdgeCoeffs> coeffs(ne);
    std::vector<double> ts_r(ne, 1.0), ts_k(ne, 1.0), ts_m(ne, 1.0);
    for (std::size_t e = 0; e < ne; ++e) {
        coeffs[e] = edge_coeffs(net.edge(e));
        if (!coeffs[e].dead) {
            ts_r[e] = coeffs[e].p_bob;
            ts_k[e] = coeffs[e].joint;
            ts_m[e] = coeffs[e].p_bob;
        }
    }
    FlowCore core = add_flow_core(prog, net, coeffs, ts_r, ts_k, ts_m,
                                  /*relaxed_randomness=*/true, net.source());

    std::vector<std::size_t> subset;
    auto emit_rows = [&]() {
        for (std::size_t g : subset) {
            if (coeffs[g].dead) continue;
            auto row = destination_randomness(net, core, -1.0);
            row.emplace_back(core.vars[g].m, coeffs[g].eve_arq);
            for (std::size_t h : subset) {
                if (coeffs[h].dead) continue;
                row.emplace_back(core.vars[h].r, coeffs[h].eve_arq);
                row.emplace_back(core.vars[h].k, coeffs[h].eve_mds);
            }
            prog.add_constraint(std::move(row), lp::Relation::LessEq, 0.0, "security:" + net.edge(g).id);
        }
    };
    auto recurse = [&](auto&& self, std::size_t next, int remaining) -> void {
        if (remaining == 0) {
            emit_rows();
            return;
        }
        for (std::size_t e = next; e + static_cast<std::size_t>(remaining) <= ne; ++e) {
            subset.push_back(e);
            self(self, e + 1, remaining - 1);
            subset.pop_back();
        }
    };
    recurse(recurse, 0, wiretap_count);
    return prog;
}

/// Algo 5: several sources share the network and pool their randomness into
/// one link-by-link key per edge. `paths_per_source[l]` must be the
/// enumeration for source l in network order.
inline lp::LinearProgram build_algo5(const Network& net,
                                     const std::vector<std::vector<Path>>& paths_per_source) {
    using namespace build_detail;
    const std::size_t nl = net.sources().size();
    if (paths_per_source.size() != nl) throw InputError("algo5: one path set per source required");
    const std::size_t ne = net.edge_count();

    lp::LinearProgram prog;
    std::vector<EdgeCoeffs> coeffs(ne);
    for (std::size_t e = 0; e < ne; ++e) coeffs[e] = edge_coeffs(net.edge(e));

    struct SrcVars {
        std::vector<EdgeVars> edge;
        std::vector<int> w;
        std::vector<int> sp;
    };
    std::vector<SrcVars> sv(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        sv[l].edge.resize(ne);
        sv[l].w.resize(ne);
        for (std::size_t e = 0; e < ne; ++e) {
            sv[l].edge[e].m = prog.add_variable(src_tag(l, var_m(e)));
            sv[l].edge[e].k = prog.add_variable(src_tag(l, var_k(e)));
            sv[l].edge[e].r = prog.add_variable(src_tag(l, var_r(e)));
            sv[l].edge[e].s = prog.add_variable(src_tag(l, var_s(e)));
            sv[l].w[e] = prog.add_variable(src_tag(l, "w#" + std::to_string(e)));
        }
        sv[l].sp.resize(paths_per_source[l].size());
        for (std::size_t p = 0; p < paths_per_source[l].size(); ++p)
            sv[l].sp[p] = prog.add_variable(src_tag(l, var_sp(p)));
    }

    for (std::size_t l = 0; l < nl; ++l)
        for (std::size_t j = 0; j < ne; ++j)
            if (net.vertex_index(net.edge(j).head) == net.destination_index())
                prog.objective[static_cast<std::size_t>(sv[l].edge[j].m)] = 1.0;

    // per-source conservation; a vertex that is another source's location is
    // an ordinary relay for this source's flow
    for (std::size_t l = 0; l < nl; ++l) {
        int own_src = net.vertex_index(net.sources()[l]);
        for (std::size_t u = 0; u < net.vertex_count(); ++u) {
            int ui = static_cast<int>(u);
            if (ui == own_src || ui == net.destination_index()) continue;
            if (net.in_edges(ui).empty() && net.out_edges(ui).empty()) continue;
            std::vector<std::pair<int, double>> msg, rnd;
            for (int e : net.in_edges(ui)) {
                msg.emplace_back(sv[l].edge[static_cast<std::size_t>(e)].m, 1.0);
                rnd.emplace_back(sv[l].edge[static_cast<std::size_t>(e)].s, -1.0);
            }
            for (int e : net.out_edges(ui)) {
                msg.emplace_back(sv[l].edge[static_cast<std::size_t>(e)].m, -1.0);
                rnd.emplace_back(sv[l].edge[static_cast<std::size_t>(e)].k, 1.0);
                rnd.emplace_back(sv[l].edge[static_cast<std::size_t>(e)].r, 1.0);
            }
            prog.add_constraint(msg, lp::Relation::Eq, 0.0,
                                "msg_conservation@" + std::to_string(l) + ":" + net.vertices()[u]);
            prog.add_constraint(rnd, lp::Relation::LessEq, 0.0,
                                "rnd_conservation@" + std::to_string(l) + ":" + net.vertices()[u]);
        }
    }

    for (std::size_t e = 0; e < ne; ++e) {
        const auto& c = coeffs[e];
        const std::string& id = net.edge(e).id;
        if (c.dead) {
            for (std::size_t l = 0; l < nl; ++l) {
                pin_zero(prog, sv[l].edge[e].m, "dead_m:" + id);
                pin_zero(prog, sv[l].edge[e].k, "dead_k:" + id);
                pin_zero(prog, sv[l].edge[e].r, "dead_r:" + id);
                pin_zero(prog, sv[l].edge[e].s, "dead_s:" + id);
                pin_zero(prog, sv[l].w[e], "dead_w:" + id);
            }
            continue;
        }
        std::vector<std::pair<int, double>> ts, pool;
        for (std::size_t l = 0; l < nl; ++l) {
            prog.add_constraint({{sv[l].edge[e].s, 1.0},
                                 {sv[l].edge[e].r, -1.0},
                                 {sv[l].edge[e].k, -c.mds_deliver}},
                                lp::Relation::Eq, 0.0, "delivered@" + std::to_string(l) + ":" + id);
            ts.emplace_back(sv[l].edge[e].r, 1.0 / c.p_bob);
            ts.emplace_back(sv[l].edge[e].k, 1.0 / c.joint);
            ts.emplace_back(sv[l].edge[e].m, 1.0 / c.p_bob);
            pool.emplace_back(sv[l].w[e], 1.0);
            pool.emplace_back(sv[l].edge[e].r, -c.link_key);
            pool.emplace_back(sv[l].edge[e].k, -c.link_key);
        }
        prog.add_constraint(std::move(ts), lp::Relation::LessEq, 1.0, "timeshare:" + id);
        prog.add_constraint(std::move(pool), lp::Relation::LessEq, 0.0, "key_pool:" + id);
    }

    for (std::size_t l = 0; l < nl; ++l) {
        const auto& paths = paths_per_source[l];
        for (std::size_t g = 0; g < ne; ++g) {
            std::vector<std::pair<int, double>> row{{sv[l].edge[g].s, 1.0}};
            for (std::size_t p = 0; p < paths.size(); ++p)
                if (paths[p].contains_edge(static_cast<int>(g))) row.emplace_back(sv[l].sp[p], -1.0);
            prog.add_constraint(std::move(row), lp::Relation::Eq, 0.0,
                                "path_coupling@" + std::to_string(l) + ":" + net.edge(g).id);
        }
        for (std::size_t g = 0; g < ne; ++g) {
            const auto& c = coeffs[g];
            if (c.dead) continue;
            std::vector<std::pair<int, double>> row{{sv[l].edge[g].m, c.eve_arq}, {sv[l].w[g], -1.0}};
            for (std::size_t p = 0; p < paths.size(); ++p)
                if (paths[p].terminus == net.destination_index() &&
                    !paths[p].contains_edge(static_cast<int>(g)))
                    row.emplace_back(sv[l].sp[p], -1.0);
            prog.add_constraint(std::move(row), lp::Relation::LessEq, 0.0,
                                "security@" + std::to_string(l) + ":" + net.edge(g).id);
        }
    }
    return prog;
}

/// Dispatcher used by the CLI and the solve pipeline.
inline lp::LinearProgram build(const Network& net, const FormulationConfig& config) {
    switch (config.algo) {
        case Algo::Algo1: return build_algo1(net, config.arq_only);
        case Algo::Algo2:
            return build_algo2(net, enumerate_source_rooted_paths(net, net.source(), config.max_paths),
                               config.arq_only);
        case Algo::Algo3: return build_algo3(net);
        case Algo::Algo4: return build_algo4(net, config.wiretap_count, config.max_security_rows);
        case Algo::Algo5: {
            std::vector<std::vector<Path>> per_source;
            per_source.reserve(net.sources().size());
            for (const auto& s : net.sources())
                per_source.push_back(enumerate_source_rooted_paths(net, s, config.max_paths));
            return build_algo5(net, per_source);
        }
        case Algo::SncBaseline: return build_snc_baseline(net);
    }
    throw InputError("unknown formulation");
}

namespace extract_detail {

struct ParsedName {
    char cls = 0;           // 'm','k','r','s','v' (sv),'t','p' (sp),'w'
    int source = -1;        // -1 when untagged
    int a = -1, b = -1;     // edge / path indices
};

inline ParsedName parse_var(const std::string& name) {
    ParsedName out;
    std::string head = name.substr(0, name.find_first_of("#@"));
    if (head == "m") out.cls = 'm';
    else if (head == "k") out.cls = 'k';
    else if (head == "r") out.cls = 'r';
    else if (head == "s") out.cls = 's';
    else if (head == "sv") out.cls = 'v';
    else if (head == "t") out.cls = 't';
    else if (head == "sp") out.cls = 'p';
    else if (head == "w") out.cls = 'w';
    else throw InputError("unrecognized LP variable '" + name + "'");
    std::size_t pos = head.size();
    if (pos < name.size() && name[pos] == '@') {
        std::size_t hash = name.find('#', pos);
        out.source = std::stoi(name.substr(pos + 1, hash - pos - 1));
        pos = hash;
    }
    std::size_t second = name.find('#', pos + 1);
    out.a = std::stoi(name.substr(pos + 1, second == std::string::npos ? std::string::npos : second - pos - 1));
    if (second != std::string::npos) out.b = std::stoi(name.substr(second + 1));
    return out;
}

}  // namespace extract_detail

/// Maps an optimal LP solution back onto scheme rates and verifies the
/// scheme-level invariants. Values within feas_tol below zero are clamped.
inline SchemeSolution extract_scheme(const Network& net, const lp::LinearProgram& prog,
                                     const lp::LpSolution& sol, const FormulationConfig& config,
                                     const lp::Tolerances& tol = {}) {
    using extract_detail::parse_var;
    if (sol.status != lp::SolveStatus::Optimal)
        throw InputError(std::string("extract_scheme: solution status is ") + lp::to_string(sol.status));

    SchemeSolution out;
    out.rate = sol.objective;
    out.per_edge.assign(net.edge_count(), {});
    const bool multi_source = config.algo == Algo::Algo5;
    if (multi_source)
        out.per_source.emplace(net.sources().size(),
                               std::vector<SourceEdgeRates>(net.edge_count()));
    if (config.algo == Algo::Algo2 || config.algo == Algo::Algo5) out.per_path.emplace();
    if (config.algo == Algo::Algo3) {
        out.virtual_flows.emplace();
        out.auxiliary.emplace(net.edge_count(), 0.0);
    }

    std::vector<std::vector<Path>> paths;
    if (config.algo == Algo::Algo2)
        paths.push_back(enumerate_source_rooted_paths(net, net.source(), config.max_paths));
    else if (config.algo == Algo::Algo5)
        for (const auto& s : net.sources())
            paths.push_back(enumerate_source_rooted_paths(net, s, config.max_paths));

    for (std::size_t col = 0; col < prog.variables.size(); ++col) {
        double v = sol.values[col];
        if (v < 0.0) {
            if (v < -tol.feas_tol)
                throw InputError("extract_scheme: variable " + prog.variables[col] + " is negative (" +
                                 std::to_string(v) + ")");
            v = 0.0;
        }
        if (std::abs(v) <= 1e-12) v = 0.0;  // pivot noise, and -0.0
        auto p = parse_var(prog.variables[col]);
        auto edge_of = [&](int idx) -> EdgeRateSet& { return out.per_edge[static_cast<std::size_t>(idx)]; };
        switch (p.cls) {
            case 'm':
                edge_of(p.a).m += v;
                if (p.source >= 0) (*out.per_source)[static_cast<std::size_t>(p.source)][static_cast<std::size_t>(p.a)].m = v;
                break;
            case 'k':
                edge_of(p.a).k += v;
                if (p.source >= 0) (*out.per_source)[static_cast<std::size_t>(p.source)][static_cast<std::size_t>(p.a)].k = v;
                break;
            case 'r':
                edge_of(p.a).r += v;
                if (p.source >= 0) (*out.per_source)[static_cast<std::size_t>(p.source)][static_cast<std::size_t>(p.a)].r = v;
                break;
            case 's':
                edge_of(p.a).s += v;
                if (p.source >= 0) (*out.per_source)[static_cast<std::size_t>(p.source)][static_cast<std::size_t>(p.a)].s = v;
                break;
            case 'w':
                if (p.source >= 0) (*out.per_source)[static_cast<std::size_t>(p.source)][static_cast<std::size_t>(p.a)].w = v;
                break;
            case 'v': (*out.virtual_flows)[{p.a, p.b}] = v; break;
            case 't': (*out.auxiliary)[static_cast<std::size_t>(p.a)] = v; break;
            case 'p': {
                std::size_t l = p.source >= 0 ? static_cast<std::size_t>(p.source) : 0;
                out.per_path->emplace_back(paths[l][static_cast<std::size_t>(p.a)], v);
                break;
            }
        }
    }

    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto c = edge_coeffs(net.edge(e));
        auto& rates = out.per_edge[e];
        const double joint_dead = net.edge(e).delta * net.edge(e).delta_e;
        if (joint_dead >= 1.0 && rates.k > tol.feas_tol)
            throw InputError("extract_scheme: edge " + net.edge(e).id + " has k=" + std::to_string(rates.k) +
                             " on a fully overheard dead channel");
        if (joint_dead >= 1.0) rates.k = 0.0;
        double residual = c.dead ? std::abs(rates.s - rates.r)
                                 : std::abs(rates.s - rates.r - rates.k * c.mds_deliver);
        if (residual > tol.feas_tol * 10)
            throw InputError("extract_scheme: delivered-randomness identity violated on edge " +
                             net.edge(e).id + " (residual " + std::to_string(residual) + ")");
    }
    return out;
}

/// Direct evaluation of the Algo 3 security bound in its original
/// positive-part/minimum form; returns the worst violation.
inline double algo3_security_residual(const Network& net, const SchemeSolution& scheme) {
    if (!scheme.virtual_flows) throw InputError("scheme carries no virtual flows");
    double worst = 0.0;
    double dest_total = 0.0;
    for (int j : net.in_edges(net.destination_index()))
        dest_total += scheme.per_edge[static_cast<std::size_t>(j)].s;
    for (std::size_t g = 0; g < net.edge_count(); ++g) {
        const auto c = edge_coeffs(net.edge(g));
        if (c.dead) continue;
        double a = 0.0;
        for (int j : net.in_edges(net.destination_index())) {
            if (static_cast<std::size_t>(j) == g)
                a += scheme.per_edge[g].s;
            else if (auto it = scheme.virtual_flows->find({static_cast<int>(g), j});
                     it != scheme.virtual_flows->end())
                a += it->second;
        }
        double kg = scheme.per_edge[g].k * c.mds_deliver;
        double c2 = 1.0 - net.edge(g).delta_e;
        double eve = std::max(a - kg, 0.0) * c.eve_arq + std::min(a, kg) * c2;
        double lhs = scheme.per_edge[g].m * c.eve_arq;
        worst = std::max(worst, lhs - (dest_total - eve));
    }
    return worst;
}

struct SolveOutcome {
    lp::LinearProgram lp;
    lp::LpSolution primary;
    lp::LpSolution refined;
    SchemeSolution scheme;
};

/// Builds, solves, re-solves with a gratuitous-randomness penalty at fixed
/// rate, and decodes the scheme. The second pass keeps the objective within
/// 1e-9 of the optimum and minimizes total randomness so that extracted
/// schemes are simulator-friendly.
inline SolveOutcome solve_scheme(const Network& net, const FormulationConfig& config,
                                 const lp::Tolerances& tol = {}) {
    SolveOutcome out{build(net, config), {}, {}, {}};
    out.primary = lp::solve(out.lp, tol);
    if (out.primary.status != lp::SolveStatus::Optimal) {
        out.refined = out.primary;
        return out;
    }

    lp::LinearProgram second = out.lp;
    std::vector<std::pair<int, double>> keep;
    for (std::size_t j = 0; j < second.variables.size(); ++j)
        if (second.objective[j] != 0.0) keep.emplace_back(static_cast<int>(j), -second.objective[j]);
    second.add_constraint(std::move(keep), lp::Relation::LessEq, -(out.primary.objective - 1e-9),
                          "hold_rate");
    for (std::size_t j = 0; j < second.variables.size(); ++j) {
        char cls = second.variables[j][0];
        second.objective[j] = (cls == 'm') ? 0.0 : -1.0;
    }
    out.refined = lp::solve(second, tol);
    if (out.refined.status != lp::SolveStatus::Optimal) {
        out.refined = out.primary;  // keep the valid optimum
        out.scheme = extract_scheme(net, out.lp, out.primary, config, tol);
        return out;
    }
    lp::LpSolution adopted = out.refined;
    double recomputed = 0.0;
    for (std::size_t j = 0; j < out.lp.variables.size(); ++j)
        recomputed += out.lp.objective[j] * adopted.values[j];
    adopted.objective = recomputed;
    out.scheme = extract_scheme(net, out.lp, adopted, config, tol);
    out.scheme.rate = out.primary.objective;
    return out;
}

}  // namespace secnet::formulations
