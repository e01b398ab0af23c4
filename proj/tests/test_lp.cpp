#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cem/lp.hpp"

using cem::kInf;
using cem::LpProblem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("problem assembly and activities") {
    LpProblem lp;
    const int a = lp.add_col("a", 0.0, 2.0, 1.0);
    const int b = lp.add_col("b", -1.0, kInf, -0.5);
    const int r = lp.add_row("mix", "mix", 0.0, 4.0, {{a, 2.0}, {b, 1.0}, {a, 0.0}});
    CHECK(lp.num_cols() == 2);
    CHECK(lp.num_rows() == 1);
    CHECK(lp.row_families()[r] == "mix");

    Eigen::VectorXd x(2);
    x << 1.0, 3.0;
    CHECK(cem::row_activity(lp, x)[0] == doctest::Approx(5.0));
    CHECK(lp.objective_value(x) == doctest::Approx(-0.5));

    CHECK_THROWS_AS(lp.add_row("bad", "mix", 0.0, 1.0, {{7, 1.0}}), cem::ModelBuildError);
}

TEST_CASE("matrix rebuilds after rows are added post-access") {
    LpProblem lp;
    const int a = lp.add_col("a", 0.0, 1.0, 0.0);
    lp.add_row("r0", "r", 0.0, 1.0, {{a, 1.0}});
    CHECK(lp.matrix().rows() == 1);
    lp.add_row("r1", "r", 0.0, 2.0, {{a, 3.0}});
    CHECK(lp.matrix().rows() == 2);
    CHECK(lp.matrix().coeff(1, 0) == doctest::Approx(3.0));
}

TEST_CASE("backend factory") {
    CHECK(cem::make_backend("simplex")->name() == "simplex");
    CHECK_THROWS_AS(cem::make_backend("gurobi"), cem::BackendError);
    CHECK(cem::to_string(cem::SolveStatus::Optimal) == "optimal");
    CHECK(cem::to_string(cem::SolveStatus::Infeasible) == "infeasible");
}

TEST_CASE("lp text export covers rows, ranges and bounds") {
    LpProblem lp;
    const int x = lp.add_col("flow_l1", 0.0, 5.0, 2.5);
    const int y = lp.add_col("gen_g1", -kInf, kInf, -1.0);
    const int z = lp.add_col("fix_me", 3.0, 3.0, 0.0);
    lp.add_row("balance_b1", "balance", 4.0, 4.0, {{x, 1.0}, {y, 1.0}});
    lp.add_row("cap_l1", "cap", -kInf, 7.0, {{x, 2.0}, {z, -1.0}});
    lp.add_row("range_r", "range", -1.0, 1.0, {{y, 1.0}});

    const std::string path = "lp_export_test.lp";
    cem::write_lp_format(lp, path);
    const std::string text = slurp(path);
    std::remove(path.c_str());

    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("2.5 flow_l1") != std::string::npos);
    CHECK(text.find("balance_b1:") != std::string::npos);
    CHECK(text.find("= 4") != std::string::npos);
    CHECK(text.find("cap_l1: 2 flow_l1 - 1 fix_me <= 7") != std::string::npos);
    CHECK(text.find("range_r: 1 gen_g1 <= 1") != std::string::npos);
    CHECK(text.find("range_r_lb: 1 gen_g1 >= -1") != std::string::npos);
    CHECK(text.find("gen_g1 free") != std::string::npos);
    CHECK(text.find("fix_me = 3") != std::string::npos);
    CHECK(text.find("0 <= flow_l1 <= 5") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}
