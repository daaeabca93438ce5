#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "secnet/errors.hpp"
#include "secnet/fieldsim.hpp"
#include "secnet/formulations.hpp"
#include "secnet/netmodel.hpp"
#include "secnet/oracles.hpp"

namespace secnet::cli {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitUnbounded = 3;
constexpr int kExitInput = 4;
constexpr int kExitLimit = 5;

namespace cli_detail {

inline std::string fmt_rate(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open network file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

inline formulations::Algo parse_algo(const std::string& token) {
    using formulations::Algo;
    if (token == "1") return Algo::Algo1;
    if (token == "2") return Algo::Algo2;
    if (token == "3") return Algo::Algo3;
    if (token == "4") return Algo::Algo4;
    if (token == "5") return Algo::Algo5;
    if (token == "snc") return Algo::SncBaseline;
    throw InputError("unknown formulation '" + token + "' (expected 1..5 or snc)");
}

inline int status_code(lp::SolveStatus s) {
    switch (s) {
        case lp::SolveStatus::Optimal: return kExitOk;
        case lp::SolveStatus::Infeasible: return kExitInfeasible;
        case lp::SolveStatus::Unbounded: return kExitUnbounded;
        case lp::SolveStatus::IterationLimit: return kExitLimit;
    }
    return kExitInput;
}

inline void write_scheme_csv(std::ostream& os, const Network& net,
                             const formulations::SchemeSolution& scheme) {
    os << "record,id,detail,m,k,r,s,w,value\n";
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& v = scheme.per_edge[e];
        os << "edge," << net.edge(e).id << ",," << fmt_g(v.m) << ',' << fmt_g(v.k) << ',' << fmt_g(v.r)
           << ',' << fmt_g(v.s) << ",,\n";
    }
    if (scheme.per_source) {
        for (std::size_t l = 0; l < scheme.per_source->size(); ++l)
            for (std::size_t e = 0; e < net.edge_count(); ++e) {
                const auto& v = (*scheme.per_source)[l][e];
                os << "source_edge," << net.edge(e).id << ',' << net.sources()[l] << ',' << fmt_g(v.m)
                   << ',' << fmt_g(v.k) << ',' << fmt_g(v.r) << ',' << fmt_g(v.s) << ',' << fmt_g(v.w)
                   << ",\n";
            }
    }
    if (scheme.per_path) {
        for (std::size_t p = 0; p < scheme.per_path->size(); ++p) {
            const auto& [path, flow] = (*scheme.per_path)[p];
            std::string detail;
            for (std::size_t i = 0; i < path.edges.size(); ++i) {
                if (i) detail += '>';
                detail += net.edge(static_cast<std::size_t>(path.edges[i])).id;
            }
            os << "path," << p << ',' << detail << ",,,,,," << fmt_g(flow) << "\n";
        }
    }
    if (scheme.virtual_flows) {
        for (const auto& [pair, flow] : *scheme.virtual_flows)
            os << "virtual," << net.edge(static_cast<std::size_t>(pair.first)).id << ','
               << net.edge(static_cast<std::size_t>(pair.second)).id << ",,,,,," << fmt_g(flow) << "\n";
    }
    if (scheme.auxiliary) {
        for (std::size_t e = 0; e < scheme.auxiliary->size(); ++e)
            os << "aux," << net.edge(e).id << ",,,,,,," << fmt_g((*scheme.auxiliary)[e]) << "\n";
    }
}

inline void emit(const std::string& text, const std::string& output_path, std::ostream& fallback) {
    if (output_path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(output_path);
    if (!f) throw InputError("cannot write output file '" + output_path + "'");
    f << text;
}

// One grid evaluation used by the sweep subcommand.
inline double rate_of(const Network& net, formulations::Algo algo, bool arq_only,
                      const lp::Tolerances& tol) {
    formulations::FormulationConfig cfg;
    cfg.algo = algo;
    cfg.arq_only = arq_only;
    auto prog = formulations::build(net, cfg);
    auto sol = lp::solve(prog, tol);
    if (sol.status != lp::SolveStatus::Optimal)
        throw InputError(std::string("sweep point did not solve to optimality (") +
                         lp::to_string(sol.status) + ")");
    return sol.objective;
}

inline Network two_hop_line(double d1, double d1e, double d2, double d2e) {
    return Network({}, {{"e1", "s", "v1", d1, d1e}, {"e2", "v1", "d", d2, d2e}}, {"s"}, "d");
}

inline Network parallel_channels(int count) {
    std::vector<EdgeChannel> edges;
    for (int i = 1; i <= count; ++i)
        edges.push_back({"e" + std::to_string(i), "s", "d", 0.6, (i % 2 == 1) ? 0.8 : 0.9});
    return Network({}, std::move(edges), {"s"}, "d");
}

}  // namespace cli_detail

/// Entry point shared by the binary and the tests. Returns the process exit
/// code; all output goes through the supplied streams.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    CLI::App app{"secure message rate toolkit for wiretapped erasure networks"};
    app.name("secnet");
    app.require_subcommand(1);

    double feas_tol = 1e-7, pivot_tol = 1e-9;
    app.add_option("--feas-tol", feas_tol, "feasibility tolerance")->capture_default_str();
    app.add_option("--pivot-tol", pivot_tol, "simplex pivot tolerance")->capture_default_str();

    // ---- solve ----
    auto* solve_cmd = app.add_subcommand("solve", "solve one formulation on a network file");
    std::string solve_file, solve_algo = "1", solve_output;
    int wiretaps = 1;
    std::size_t max_paths = 100000;
    bool arq_only = false;
    solve_cmd->add_option("network", solve_file, "network file")->required();
    solve_cmd->add_option("--algo", solve_algo, "formulation: 1,2,3,4,5,snc")->capture_default_str();
    solve_cmd->add_option("--wiretaps", wiretaps, "eavesdropped edge count (algo 4)")
        ->capture_default_str();
    solve_cmd->add_option("--max-paths", max_paths, "path enumeration limit")->capture_default_str();
    solve_cmd->add_flag("--arq-only", arq_only, "pin all MDS rates k to zero");
    solve_cmd->add_option("--output", solve_output, "write the scheme as CSV to this file");

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "evaluate formulations over a parameter grid");
    std::string sweep_preset, sweep_file, sweep_param = "deltaE", sweep_edges, sweep_algos = "1",
                sweep_output;
    double sweep_from = 0.0, sweep_to = 1.0, sweep_step = 0.1;
    sweep_cmd->add_option("preset", sweep_preset, "fig3 | fig4 | fig5 | custom")->required();
    sweep_cmd->add_option("network", sweep_file, "network file (custom preset)");
    sweep_cmd->add_option("--edges", sweep_edges, "comma-separated edge ids to sweep (custom)");
    sweep_cmd->add_option("--param", sweep_param, "delta | deltaE (custom)")->capture_default_str();
    sweep_cmd->add_option("--from", sweep_from, "grid start")->capture_default_str();
    sweep_cmd->add_option("--to", sweep_to, "grid end")->capture_default_str();
    sweep_cmd->add_option("--step", sweep_step, "grid step")->capture_default_str();
    sweep_cmd->add_option("--algos", sweep_algos, "comma list: 1,2,3,4,5,snc,arq1 (custom)")
        ->capture_default_str();
    sweep_cmd->add_option("--wiretaps", wiretaps, "eavesdropped edge count for algo 4 columns");
    sweep_cmd->add_option("--max-paths", max_paths, "path enumeration limit");
    sweep_cmd->add_option("--output", sweep_output, "write CSV here instead of stdout");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo run of an extracted scheme");
    std::string sim_file, sim_algo = "1", sim_eve, sim_output;
    long sim_slots = 20000, sim_trials = 1;
    std::uint64_t sim_seed = 1;
    bool two_phase = false;
    sim_cmd->add_option("network", sim_file, "network file")->required();
    sim_cmd->add_option("--algo", sim_algo, "formulation: 1, 2 or 3")->capture_default_str();
    sim_cmd->add_option("--slots", sim_slots, "channel uses per edge")->capture_default_str();
    sim_cmd->add_option("--eve", sim_eve, "eavesdropped edge id")->required();
    sim_cmd->add_option("--trials", sim_trials, "independent trials")->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "base RNG seed")->capture_default_str();
    sim_cmd->add_flag("--two-phase", two_phase, "strict key-before-message scheduling");
    sim_cmd->add_option("--max-paths", max_paths, "path enumeration limit");
    sim_cmd->add_option("--output", sim_output, "write CSV here instead of stdout");

    // ---- oracle ----
    auto* oracle_cmd = app.add_subcommand("oracle", "closed-form reference bounds");
    auto* par_cmd = oracle_cmd->add_subcommand("parallel", "two parallel channels");
    std::vector<double> par_args;
    par_cmd->add_option("params", par_args, "delta1 delta1E delta2 delta2E")->expected(4);
    auto* line_cmd = oracle_cmd->add_subcommand("line", "line network");
    std::vector<double> line_args;
    line_cmd->add_option("params", line_args, "delta1 delta1E [delta2 delta2E ...]")->expected(-2);
    oracle_cmd->require_subcommand(1);

    try {
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kExitInput;
    }

    lp::Tolerances tol;
    tol.feas_tol = feas_tol;
    tol.pivot_tol = pivot_tol;

    try {
        if (solve_cmd->parsed()) {
            Network net = load_network(solve_file);
            formulations::FormulationConfig cfg;
            cfg.algo = parse_algo(solve_algo);
            cfg.wiretap_count = wiretaps;
            cfg.max_paths = max_paths;
            cfg.arq_only = arq_only;
            auto prog = formulations::build(net, cfg);
            auto sol = lp::solve(prog, tol);
            if (sol.status != lp::SolveStatus::Optimal) {
                err << "no optimum: " << lp::to_string(sol.status) << "\n";
                return status_code(sol.status);
            }
            auto outcome = formulations::solve_scheme(net, cfg, tol);
            out << fmt_rate(outcome.scheme.rate) << "\n";
            if (!solve_output.empty()) {
                std::ostringstream csv;
                write_scheme_csv(csv, net, outcome.scheme);
                emit(csv.str(), solve_output, out);
            }
            return kExitOk;
        }

        if (sweep_cmd->parsed()) {
            std::ostringstream csv;
            if (sweep_preset == "fig3") {
                csv << "deltaE,arq_mds,arq_only\n";
                for (int i = 0; i <= 10; ++i) {
                    double de = static_cast<double>(i) / 10.0;
                    Network net = two_hop_line(0.2, de, 0.8, de);
                    csv << fmt_g(de) << ',' << fmt_g(rate_of(net, formulations::Algo::Algo1, false, tol))
                        << ',' << fmt_g(rate_of(net, formulations::Algo::Algo1, true, tol)) << "\n";
                }
            } else if (sweep_preset == "fig4") {
                csv << "channels,algo1,snc\n";
                for (int n = 2; n <= 10; ++n) {
                    Network net = parallel_channels(n);
                    csv << n << ',' << fmt_g(rate_of(net, formulations::Algo::Algo1, false, tol)) << ','
                        << fmt_g(rate_of(net, formulations::Algo::SncBaseline, false, tol)) << "\n";
                }
            } else if (sweep_preset == "fig5") {
                csv << "delta1,algo1,algo2,line_bound\n";
                for (int i = 0; i <= 10; ++i) {
                    double d1 = static_cast<double>(i) / 10.0;
                    Network net = two_hop_line(d1, 0.5, 0.6, 1.0);
                    double lb = oracles::line_bound({{{d1, 0.5}, {0.6, 1.0}}}, tol);
                    csv << fmt_g(d1) << ',' << fmt_g(rate_of(net, formulations::Algo::Algo1, false, tol))
                        << ',' << fmt_g(rate_of(net, formulations::Algo::Algo2, false, tol)) << ','
                        << fmt_g(lb) << "\n";
                }
            } else if (sweep_preset == "custom") {
                if (sweep_file.empty()) throw InputError("custom sweep requires a network file");
                if (sweep_edges.empty()) throw InputError("custom sweep requires --edges");
                if (sweep_step <= 0.0) throw InputError("sweep step must be positive");
                if (sweep_from < 0.0 || sweep_to > 1.0 || sweep_from > sweep_to)
                    throw InputError("sweep range must satisfy 0 <= from <= to <= 1");
                Network base = load_network(sweep_file);
                std::vector<std::string> edge_ids;
                for (std::size_t p = 0; p < sweep_edges.size();) {
                    auto q = sweep_edges.find(',', p);
                    if (q == std::string::npos) q = sweep_edges.size();
                    edge_ids.push_back(sweep_edges.substr(p, q - p));
                    p = q + 1;
                }
                for (const auto& id : edge_ids) base.edge_index(id);  // validate
                bool on_eve = sweep_param == "deltaE";
                if (!on_eve && sweep_param != "delta")
                    throw InputError("--param must be delta or deltaE");
                std::vector<std::string> tokens;
                for (std::size_t p = 0; p < sweep_algos.size();) {
                    auto q = sweep_algos.find(',', p);
                    if (q == std::string::npos) q = sweep_algos.size();
                    tokens.push_back(sweep_algos.substr(p, q - p));
                    p = q + 1;
                }
                csv << sweep_param;
                for (const auto& t : tokens) csv << ',' << (t == "arq1" ? "algo1_arq_only" : "algo" + t);
                csv << "\n";
                int points = static_cast<int>((sweep_to - sweep_from) / sweep_step + 1e-9) + 1;
                for (int i = 0; i < points; ++i) {
                    double value = sweep_from + sweep_step * static_cast<double>(i);
                    std::vector<EdgeChannel> edges(base.edges().begin(), base.edges().end());
                    for (auto& e : edges)
                        for (const auto& id : edge_ids)
                            if (e.id == id) (on_eve ? e.delta_e : e.delta) = value;
                    Network net(base.vertices(), edges, base.sources(), base.destination());
                    csv << fmt_g(value);
                    for (const auto& t : tokens) {
                        formulations::FormulationConfig cfg;
                        cfg.algo = (t == "arq1") ? formulations::Algo::Algo1 : parse_algo(t);
                        cfg.arq_only = (t == "arq1");
                        cfg.wiretap_count = wiretaps;
                        cfg.max_paths = max_paths;
                        auto sol = lp::solve(formulations::build(net, cfg), tol);
                        if (sol.status != lp::SolveStatus::Optimal)
                            throw InputError(std::string("sweep point did not solve (") +
                                             lp::to_string(sol.status) + ")");
                        csv << ',' << fmt_g(sol.objective);
                    }
                    csv << "\n";
                }
            } else {
                throw InputError("unknown sweep preset '" + sweep_preset + "'");
            }
            emit(csv.str(), sweep_output, out);
            return kExitOk;
        }

        if (sim_cmd->parsed()) {
            Network net = load_network(sim_file);
            formulations::FormulationConfig cfg;
            cfg.algo = parse_algo(sim_algo);
            cfg.max_paths = max_paths;
            if (cfg.algo != formulations::Algo::Algo1 && cfg.algo != formulations::Algo::Algo2 &&
                cfg.algo != formulations::Algo::Algo3)
                throw InputError("simulate supports --algo 1, 2 or 3");
            net.edge_index(sim_eve);  // validate before the solve
            if (sim_trials < 1) throw InputError("--trials must be >= 1");
            auto outcome = formulations::solve_scheme(net, cfg, tol);
            if (outcome.primary.status != lp::SolveStatus::Optimal) {
                err << "no optimum: " << lp::to_string(outcome.primary.status) << "\n";
                return status_code(outcome.primary.status);
            }
            sim::SimOptions opts;
            opts.link_keys = cfg.algo == formulations::Algo::Algo2;
            opts.remix = cfg.algo == formulations::Algo::Algo3;
            opts.two_phase = two_phase;
            std::ostringstream csv;
            csv << "trial,seed,slots,scheduled,delivered,delivered_random,decode,eve_msg,key_dim,"
                   "key_deficit,bob_secure,leak_fraction,secure_rate,lp_rate\n";
            double mean_rate = 0.0, mean_leak = 0.0, mean_deliv = 0.0, decode_all = 0.0;
            double ssq_rate = 0.0;
            for (long t = 0; t < sim_trials; ++t) {
                auto rep = sim::simulate(net, outcome.scheme, sim_slots, sim_eve,
                                         sim_seed + static_cast<std::uint64_t>(t), opts);
                csv << t << ',' << rep.seed << ',' << rep.slots << ',' << rep.scheduled_message_packets
                    << ',' << rep.delivered_message_packets << ',' << rep.delivered_random_packets << ','
                    << (rep.decode_success ? 1 : 0) << ',' << rep.eve_observed_message << ','
                    << rep.key_dimension << ',' << rep.eve_key_rank_deficit << ','
                    << rep.bob_secure_packet_count << ',' << fmt_g(rep.leaked_key_fraction) << ','
                    << fmt_g(rep.empirical_secure_rate) << ',' << fmt_g(outcome.scheme.rate) << "\n";
                mean_rate += rep.empirical_secure_rate;
                ssq_rate += rep.empirical_secure_rate * rep.empirical_secure_rate;
                mean_leak += rep.leaked_key_fraction;
                mean_deliv += static_cast<double>(rep.delivered_message_packets);
                decode_all += rep.decode_success ? 1.0 : 0.0;
            }
            double n = static_cast<double>(sim_trials);
            mean_rate /= n;
            mean_leak /= n;
            mean_deliv /= n;
            double sd = std::sqrt(std::max(0.0, ssq_rate / n - mean_rate * mean_rate));
            csv << "mean,,,," << fmt_g(mean_deliv) << ",," << fmt_g(decode_all / n) << ",,,,,"
                << fmt_g(mean_leak) << ',' << fmt_g(mean_rate) << ',' << fmt_g(outcome.scheme.rate)
                << "\n";
            csv << "stddev,,,,,,,,,,,," << fmt_g(sd) << ',' << "\n";
            emit(csv.str(), sim_output, out);
            return kExitOk;
        }

        if (oracle_cmd->parsed()) {
            if (par_cmd->parsed()) {
                oracles::ParallelPairParams p{par_args[0], par_args[1], par_args[2], par_args[3]};
                out << fmt_rate(oracles::parallel_pair_bound(p, tol)) << "\n";
                return kExitOk;
            }
            if (line_cmd->parsed()) {
                if (line_args.size() < 2 || line_args.size() % 2 != 0)
                    throw InputError("oracle line expects delta/deltaE pairs");
                oracles::LineParams p;
                for (std::size_t i = 0; i < line_args.size(); i += 2)
                    p.hops.emplace_back(line_args[i], line_args[i + 1]);
                out << fmt_rate(oracles::line_bound(p, tol)) << "\n";
                return kExitOk;
            }
        }
    } catch (const CapacityError& e) {
        err << "resource limit: " << e.what() << "\n";
        return kExitLimit;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    err << "error: no subcommand\n";
    return kExitInput;
}

}  // namespace secnet::cli
