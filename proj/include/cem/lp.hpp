#pragma once

#include <Eigen/Sparse>
#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cem/errors.hpp"

namespace cem {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse linear program over bounded variables:
///   min  c'x   s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper.
/// Rows carry a family tag so violations and row counts can be reported per
/// constraint family.
class LpProblem {
public:
    int add_col(std::string name, double lower, double upper, double objective) {
        col_name_.push_back(std::move(name));
        col_lower_.push_back(lower);
        col_upper_.push_back(upper);
        obj_.push_back(objective);
        return static_cast<int>(col_name_.size()) - 1;
    }

    int add_row(std::string name, std::string family, double lower, double upper,
                const std::vector<std::pair<int, double>>& terms) {
        const int r = static_cast<int>(row_name_.size());
        row_name_.push_back(std::move(name));
        row_family_.push_back(std::move(family));
        row_lower_.push_back(lower);
        row_upper_.push_back(upper);
        for (const auto& [col, coef] : terms) {
            if (col < 0 || col >= num_cols())
                throw ModelBuildError("row " + row_name_.back() + ": column index out of range");
            if (coef != 0.0) triplets_.emplace_back(r, col, coef);
        }
        return r;
    }

    int num_cols() const { return static_cast<int>(col_name_.size()); }
    int num_rows() const { return static_cast<int>(row_name_.size()); }

    /// Column-major constraint matrix; built lazily after assembly.
    const Eigen::SparseMatrix<double>& matrix() const {
        if (matrix_.rows() != num_rows() || matrix_.cols() != num_cols()) {
            matrix_.resize(num_rows(), num_cols());
            matrix_.setFromTriplets(triplets_.begin(), triplets_.end());
            matrix_.makeCompressed();
        }
        return matrix_;
    }

    const std::vector<double>& col_lower() const { return col_lower_; }
    const std::vector<double>& col_upper() const { return col_upper_; }
    const std::vector<double>& objective() const { return obj_; }
    const std::vector<double>& row_lower() const { return row_lower_; }
    const std::vector<double>& row_upper() const { return row_upper_; }
    const std::vector<std::string>& col_names() const { return col_name_; }
    const std::vector<std::string>& row_names() const { return row_name_; }
    const std::vector<std::string>& row_families() const { return row_family_; }

    void set_col_bounds(int col, double lower, double upper) {
        col_lower_[col] = lower;
        col_upper_[col] = upper;
    }

    double objective_value(const Eigen::VectorXd& x) const {
        double v = 0.0;
        for (int j = 0; j < num_cols(); ++j) v += obj_[j] * x[j];
        return v;
    }

private:
    std::vector<std::string> col_name_;
    std::vector<double> col_lower_, col_upper_, obj_;
    std::vector<std::string> row_name_, row_family_;
    std::vector<double> row_lower_, row_upper_;
    std::vector<Eigen::Triplet<double>> triplets_;
    mutable Eigen::SparseMatrix<double> matrix_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Numerical, IterationLimit };

std::string to_string(SolveStatus s);

struct LpSolution {
    SolveStatus status = SolveStatus::Numerical;
    Eigen::VectorXd x;          // primal values, one per column
    double objective = 0.0;
    Eigen::VectorXd row_duals;  // y such that reduced costs c - A'y vanish on the basis
    long iterations = 0;
};

/// Pluggable LP solver. Implementations must be safe to invoke from multiple
/// threads on distinct problem instances.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual LpSolution solve(const LpProblem& lp) const = 0;
};

/// Known backends: "simplex". Throws BackendError for anything else.
std::unique_ptr<SolverBackend> make_backend(const std::string& name);

/// Row activities A x.
Eigen::VectorXd row_activity(const LpProblem& lp, const Eigen::VectorXd& x);

/// Writes the problem in CPLEX LP text format with the problem's own
/// deterministic row/column names.
void write_lp_format(const LpProblem& lp, const std::string& path);

}  // namespace cem
