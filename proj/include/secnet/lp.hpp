#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "secnet/errors.hpp"

namespace secnet::lp {

enum class Relation { LessEq, Eq };

struct Constraint {
    std::vector<std::pair<int, double>> terms;  // (variable column, coefficient)
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
    std::string label;
};

// Maximization LP over nonnegative variables. Rows are kept in the order
// they were added; labels are only for diagnostics.
struct LinearProgram {
    std::vector<std::string> variables;
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::map<std::string, int> index;

    int add_variable(const std::string& name, double obj_coeff = 0.0) {
        auto [it, fresh] = index.emplace(name, static_cast<int>(variables.size()));
        if (!fresh) throw InputError("duplicate LP variable '" + name + "'");
        variables.push_back(name);
        objective.push_back(obj_coeff);
        return it->second;
    }

    int variable(const std::string& name) const {
        auto it = index.find(name);
        if (it == index.end()) throw InputError("unknown LP variable '" + name + "'");
        return it->second;
    }

    Constraint& add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
                               std::string label = {}) {
        for (auto& [col, coef] : terms) {
            (void)coef;
            if (col < 0 || col >= static_cast<int>(variables.size()))
                throw InputError("constraint references undeclared variable column " + std::to_string(col));
        }
        constraints.push_back({std::move(terms), rel, rhs, std::move(label)});
        return constraints.back();
    }
};

struct Tolerances {
    double feas_tol = 1e-7;
    double pivot_tol = 1e-9;
    long iteration_limit = 100000;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> values;
    long iterations = 0;
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

namespace simplex_detail {

// Dense two-phase primal simplex tableau. Entering variable follows the
// largest-coefficient rule until progress stalls for 2*(rows+cols)
// iterations, then switches to Bland's rule, which cannot cycle.
class Tableau {
public:
    Tableau(const LinearProgram& lp, const Tolerances& tol) : lp_(lp), tol_(tol) {
        n_ = lp.variables.size();
        m_ = lp.constraints.size();

        std::vector<std::vector<double>> rows(m_, std::vector<double>(n_, 0.0));
        std::vector<double> rhs(m_, 0.0);
        std::vector<Relation> rel(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            for (auto [col, coef] : lp.constraints[i].terms) rows[i][static_cast<std::size_t>(col)] += coef;
            rhs[i] = lp.constraints[i].rhs;
            rel[i] = lp.constraints[i].rel;
        }
        // flip rows to keep rhs nonnegative
        for (std::size_t i = 0; i < m_; ++i) {
            if (rhs[i] < 0.0) {
                for (auto& v : rows[i]) v = -v;
                rhs[i] = -rhs[i];
                if (rel[i] == Relation::LessEq) flipped_geq_.push_back(i);
            }
        }

        std::size_t slack_count = 0, art_count = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            bool was_flipped = std::find(flipped_geq_.begin(), flipped_geq_.end(), i) != flipped_geq_.end();
            if (rel[i] == Relation::LessEq && !was_flipped)
                ++slack_count;  // slack can start basic
            else if (rel[i] == Relation::LessEq)
                ++slack_count, ++art_count;  // surplus + artificial
            else
                ++art_count;
        }
        total_ = n_ + slack_count + art_count;
        first_art_ = n_ + slack_count;
        tab_.assign(m_ + 2, std::vector<double>(total_ + 1, 0.0));
        basis_.assign(m_, -1);

        std::size_t slack_at = n_, art_at = first_art_;
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) tab_[i][j] = rows[i][j];
            tab_[i][total_] = rhs[i];
            bool was_flipped = std::find(flipped_geq_.begin(), flipped_geq_.end(), i) != flipped_geq_.end();
            if (rel[i] == Relation::LessEq && !was_flipped) {
                tab_[i][slack_at] = 1.0;
                basis_[i] = static_cast<int>(slack_at++);
            } else if (rel[i] == Relation::LessEq) {
                tab_[i][slack_at++] = -1.0;  // surplus of the flipped row
                tab_[i][art_at] = 1.0;
                basis_[i] = static_cast<int>(art_at++);
            } else {
                tab_[i][art_at] = 1.0;
                basis_[i] = static_cast<int>(art_at++);
            }
        }

        // phase II row: maximize c'x  <=>  row holds -c, kept reduced
        for (std::size_t j = 0; j < n_; ++j) tab_[m_][j] = -lp.objective[j];
        // phase I row: maximize -sum(artificials); start reduced against the basis
        for (std::size_t j = first_art_; j < total_; ++j) tab_[m_ + 1][j] = 1.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= static_cast<int>(first_art_))
                for (std::size_t j = 0; j <= total_; ++j) tab_[m_ + 1][j] -= tab_[i][j];
    }

    LpSolution run() {
        LpSolution out;
        if (m_ > 0 && first_art_ < total_) {
            if (!optimize(/*phase1=*/true, out)) return out;  // iteration limit
            if (tab_[m_ + 1][total_] < -tol_.feas_tol) {
                out.status = SolveStatus::Infeasible;
                out.iterations = iterations_;
                return out;
            }
            expel_artificials();
        }
        if (!optimize(/*phase1=*/false, out)) return out;  // limit or unbounded
        out.status = SolveStatus::Optimal;
        out.iterations = iterations_;
        out.values.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0 && basis_[i] < static_cast<int>(n_))
                out.values[static_cast<std::size_t>(basis_[i])] = tab_[i][total_];
        for (auto& v : out.values)
            if (v < 0.0 && v > -tol_.feas_tol) v = 0.0;
        double obj = 0.0;
        for (std::size_t j = 0; j < n_; ++j) obj += lp_.objective[j] * out.values[j];
        out.objective = obj;
        return out;
    }

private:
    // Returns false when the run must stop (limit / unbounded), with `out`
    // status set accordingly.
    bool optimize(bool phase1, LpSolution& out) {
        const std::size_t objrow = phase1 ? m_ + 1 : m_;
        const long stall_window = 2 * static_cast<long>(m_ + total_);
        bool bland = false;
        long stall = 0;
        double last = tab_[objrow][total_];
        for (;;) {
            std::size_t enter = total_;
            if (!bland) {
                double best = -tol_.pivot_tol;
                for (std::size_t j = 0; j < total_; ++j) {
                    if (excluded(j, phase1)) continue;
                    if (tab_[objrow][j] < best) {
                        best = tab_[objrow][j];
                        enter = j;
                    }
                }
            } else {
                for (std::size_t j = 0; j < total_; ++j) {
                    if (excluded(j, phase1)) continue;
                    if (tab_[objrow][j] < -tol_.pivot_tol) {
                        enter = j;
                        break;
                    }
                }
            }
            if (enter == total_) return true;  // optimal for this phase

            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                double a = tab_[i][enter];
                if (a <= tol_.pivot_tol) continue;
                double ratio = tab_[i][total_] / a;
                if (leave == m_ || ratio < best_ratio - 1e-12 ||
                    (std::abs(ratio - best_ratio) <= 1e-12 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) {
                out.status = SolveStatus::Unbounded;
                out.iterations = iterations_;
                return false;
            }
            pivot(leave, enter);
            if (++iterations_ > tol_.iteration_limit) {
                out.status = SolveStatus::IterationLimit;
                out.iterations = iterations_;
                return false;
            }
            double now = tab_[objrow][total_];
            stall = (now > last + 1e-12) ? 0 : stall + 1;
            last = now;
            if (stall > stall_window) bland = true;
        }
    }

    bool excluded(std::size_t col, bool phase1) const {
        // artificials never re-enter once phase I is done
        return !phase1 && col >= first_art_;
    }

    // Degenerate basic artificials are pivoted onto any usable structural or
    // slack column; rows with no such column are redundant and stay inert.
    void expel_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < static_cast<int>(first_art_)) continue;
            for (std::size_t j = 0; j < first_art_; ++j) {
                if (std::abs(tab_[i][j]) > tol_.pivot_tol) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        double inv = 1.0 / tab_[row][col];
        for (std::size_t j = 0; j <= total_; ++j) tab_[row][j] *= inv;
        tab_[row][col] = 1.0;
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == row) continue;
            double f = tab_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= total_; ++j) tab_[i][j] -= f * tab_[row][j];
            tab_[i][col] = 0.0;
        }
        basis_[row] = static_cast<int>(col);
    }

    const LinearProgram& lp_;
    Tolerances tol_;
    std::size_t n_ = 0, m_ = 0, total_ = 0, first_art_ = 0;
    std::vector<std::vector<double>> tab_;
    std::vector<int> basis_;
    std::vector<std::size_t> flipped_geq_;
    long iterations_ = 0;
};

}  // namespace simplex_detail

/// Solves a maximization LP with all variables bounded below by zero.
/// Deterministic: identical input yields a bit-identical solution.
inline LpSolution solve(const LinearProgram& lp, const Tolerances& tol = {}) {
    simplex_detail::Tableau t(lp, tol);
    LpSolution s = t.run();
    if (s.status == SolveStatus::IterationLimit)
        throw CapacityError("simplex iteration limit (" + std::to_string(tol.iteration_limit) +
                            ") exceeded after " + std::to_string(s.iterations) + " pivots");
    return s;
}

/// Largest violation of any constraint or sign bound at `values`;
/// exactly feasible points return 0.
inline double check_feasibility(const LinearProgram& lp, const std::vector<double>& values) {
    if (values.size() != lp.variables.size()) throw InputError("check_feasibility: value vector size mismatch");
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, -v);
    for (const auto& c : lp.constraints) {
        double lhs = 0.0;
        for (auto [col, coef] : c.terms) lhs += coef * values[static_cast<std::size_t>(col)];
        if (c.rel == Relation::LessEq)
            worst = std::max(worst, lhs - c.rhs);
        else
            worst = std::max(worst, std::abs(lhs - c.rhs));
    }
    return worst;
}

inline double check_feasibility(const LinearProgram& lp, const std::map<std::string, double>& named) {
    std::vector<double> values(lp.variables.size(), 0.0);
    for (const auto& [name, v] : named) values[static_cast<std::size_t>(lp.variable(name))] = v;
    return check_feasibility(lp, values);
}

namespace dump_detail {
inline std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}
}  // namespace dump_detail

/// Human-readable "max ...; s.t. ..." rendering, for debugging only.
inline std::string dump(const LinearProgram& lp) {
    std::string out = "max";
    bool first = true;
    for (std::size_t j = 0; j < lp.variables.size(); ++j) {
        if (lp.objective[j] == 0.0) continue;
        out += (first ? " " : " + ") + dump_detail::num(lp.objective[j]) + "*" + lp.variables[j];
        first = false;
    }
    if (first) out += " 0";
    out += "\ns.t.\n";
    for (const auto& c : lp.constraints) {
        std::string row;
        bool f = true;
        for (auto [col, coef] : c.terms) {
            if (coef == 0.0) continue;
            row += (f ? "" : " + ") + dump_detail::num(coef) + "*" + lp.variables[static_cast<std::size_t>(col)];
            f = false;
        }
        if (f) row += "0";
        row += (c.rel == Relation::LessEq ? " <= " : " = ") + dump_detail::num(c.rhs);
        if (!c.label.empty()) row += "   [" + c.label + "]";
        out += "  " + row + "\n";
    }
    out += "  all variables >= 0\n";
    return out;
}

}  // namespace secnet::lp
