#include "cem/lp.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cem/simplex.hpp"

namespace cem {

std::unique_ptr<SolverBackend> make_backend(const std::string& name) {
    if (name == "simplex" || name.empty()) return std::make_unique<SimplexBackend>();
    throw BackendError("unknown solver backend '" + name + "' (available: simplex)");
}

Eigen::VectorXd row_activity(const LpProblem& lp, const Eigen::VectorXd& x) {
    return lp.matrix() * x;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_terms(std::ofstream& out, const LpProblem& lp,
                 const std::vector<std::vector<std::pair<int, double>>>& rows, int r) {
    bool first = true;
    for (const auto& [col, coef] : rows[r]) {
        if (coef >= 0.0 && !first) out << " +";
        else if (coef < 0.0) out << (first ? "-" : " -");
        out << ' ' << num(std::abs(coef)) << ' ' << lp.col_names()[col];
        first = false;
    }
    if (first) out << " 0 " << lp.col_names()[0];
}

}  // namespace

void write_lp_format(const LpProblem& lp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    // Matrix re-expressed row-wise for printing.
    std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
    const auto& a = lp.matrix();
    for (int j = 0; j < lp.num_cols(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
            rows[it.row()].emplace_back(j, it.value());

    out << "\\ generated by cem\nMinimize\n obj:";
    bool first = true;
    for (int j = 0; j < lp.num_cols(); ++j) {
        const double c = lp.objective()[j];
        if (c == 0.0) continue;
        if (c >= 0.0 && !first) out << " +";
        else if (c < 0.0) out << (first ? "-" : " -");
        out << ' ' << num(std::abs(c)) << ' ' << lp.col_names()[j];
        first = false;
    }
    if (first) out << " 0 " << (lp.num_cols() ? lp.col_names()[0] : "x0");

    out << "\nSubject To\n";
    for (int r = 0; r < lp.num_rows(); ++r) {
        const double lo = lp.row_lower()[r], up = lp.row_upper()[r];
        const std::string& name = lp.row_names()[r];
        if (lo == up) {
            out << ' ' << name << ':';
            write_terms(out, lp, rows, r);
            out << " = " << num(up) << '\n';
        } else {
            if (std::isfinite(up)) {
                out << ' ' << name << ':';
                write_terms(out, lp, rows, r);
                out << " <= " << num(up) << '\n';
            }
            if (std::isfinite(lo)) {
                out << ' ' << name << (std::isfinite(up) ? "_lb:" : ":");
                write_terms(out, lp, rows, r);
                out << " >= " << num(lo) << '\n';
            }
        }
    }

    out << "Bounds\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
        const double lo = lp.col_lower()[j], up = lp.col_upper()[j];
        const std::string& name = lp.col_names()[j];
        if (lo == up) {
            out << ' ' << name << " = " << num(lo) << '\n';
        } else if (!std::isfinite(lo) && !std::isfinite(up)) {
            out << ' ' << name << " free\n";
        } else {
            out << ' ';
            if (std::isfinite(lo)) out << num(lo) << " <= ";
            else out << "-inf <= ";
            out << name;
            if (std::isfinite(up)) out << " <= " << num(up);
            out << '\n';
        }
    }
    out << "End\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace cem
