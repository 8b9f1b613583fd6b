#include <doctest.h>

#include <random>
#include <sstream>

#include "test_helpers.hpp"

using namespace paretopt;

namespace {

// Hand-assembled moment instance for the quadrant fixture at z = (1,1),
// order one, written down entry by entry so it cross-checks the relaxation
// builder. Variables: y = (y00, y10, y01, y20, y11, y02), y00 pinned to 1.
SdpInstance quadrant_instance_k1(double localization_constant) {
    SdpInstance inst;
    inst.var_count = 6;
    inst.objective.resize(6);
    inst.objective << 13.0, -4.0, -1.0, 1.0, 0.0, 1.0;
    inst.objective_constant = 0.0;
    inst.fixed.emplace_back(0, 1.0);

    PsdBlock m1;
    m1.dim = 3;
    m1.entries = {
        {0, 0, 0, 1.0}, {1, 0, 1, 1.0}, {2, 0, 2, 1.0},
        {3, 1, 1, 1.0}, {4, 1, 2, 1.0}, {5, 2, 2, 1.0},
    };
    inst.psd_blocks.push_back(m1);

    PsdBlock loc;  // localization_constant - lambda^T f, paired against y
    loc.dim = 1;
    loc.entries = {
        {0, 0, 0, localization_constant - 13.0},
        {1, 0, 0, 4.0},
        {2, 0, 0, 1.0},
        {3, 0, 0, -1.0},
        {5, 0, 0, -1.0},
    };
    inst.psd_blocks.push_back(loc);

    inst.scalar_ineqs.push_back({0.0, {{1, -1.0}}});                                  // -y10 <= 0
    inst.scalar_ineqs.push_back({0.0, {{2, -1.0}}});                                  // -y01 <= 0
    inst.scalar_ineqs.push_back({-5.0, {{0, 13.0}, {1, -6.0}, {2, -4.0}, {3, 1.0}, {5, 1.0}}});
    inst.scalar_ineqs.push_back({-2.0, {{1, 1.0}, {2, 1.0}}});
    inst.scalar_ineqs.push_back({-3.0, {{1, 1.0}, {2, 2.0}}});
    return inst;
}

void check_optimal_contract(const SdpInstance& inst, const SdpSolution& sol,
                            const SdpOptions& opts) {
    REQUIRE(sol.status == SdpStatus::Optimal);
    for (const PsdBlock& b : inst.psd_blocks) {
        Eigen::MatrixXd f = b.eval(sol.y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -opts.eps_feas * (1.0 + f.norm()));
    }
    for (const ScalarIneq& s : inst.scalar_ineqs)
        CHECK(s.eval(sol.y) <= opts.eps_feas * (1.0 + std::abs(s.constant)));
    for (const auto& [i, v] : inst.fixed) CHECK(sol.y(i) == doctest::Approx(v).epsilon(1e-12));
    CHECK(std::abs(sol.objective - sol.dual_objective) <=
          opts.eps_gap * (1.0 + std::abs(sol.objective)) * 10.0);
    WeakDualityReport rep = certify_weak_duality(sol, inst, 1e-6);
    CHECK(rep.ok);
    CHECK(rep.dual_recomputed <= rep.primal + 1e-6 * (1.0 + std::abs(rep.primal)));
}

}  // namespace

TEST_SUITE("sdp") {

TEST_CASE("two-by-two correlation block forces y = -1") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = Eigen::VectorXd::Ones(1);
    PsdBlock b;
    b.dim = 2;
    b.entries = {{-1, 0, 0, 1.0}, {-1, 1, 1, 1.0}, {0, 0, 1, 1.0}};
    inst.psd_blocks.push_back(b);

    SdpOptions opts;
    SdpSolution sol = solve(inst, opts);
    check_optimal_contract(inst, sol, opts);
    CHECK(sol.y(0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("single active scalar inequality") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = Eigen::VectorXd::Ones(1);
    inst.scalar_ineqs.push_back({3.0, {{0, -1.0}}});  // 3 - y <= 0
    PsdBlock box;                                     // 10 - y >= 0 keeps the problem bounded above
    box.dim = 1;
    box.entries = {{-1, 0, 0, 10.0}, {0, 0, 0, -1.0}};
    inst.psd_blocks.push_back(box);

    SdpOptions opts;
    SdpSolution sol = solve(inst, opts);
    check_optimal_contract(inst, sol, opts);
    CHECK(sol.y(0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("hand-assembled quadrant moment instance reaches 8.875") {
    Eigen::VectorXd expected(6);
    expected << 1.0, 1.75, 0.25, 3.0625, 0.4375, 0.0625;
    for (double constant : {10.0, 9.0}) {
        SdpInstance inst = quadrant_instance_k1(constant);
        SdpOptions opts;
        SdpSolution sol = solve(inst, opts);
        check_optimal_contract(inst, sol, opts);
        CHECK(sol.objective == doctest::Approx(8.875).epsilon(1e-6));
        CHECK((sol.y - expected).cwiseAbs().maxCoeff() <= 1e-3);
        CHECK(sol.dual_objective == doctest::Approx(8.875).epsilon(1e-5));
    }
    // Tight solves sharpen the argmin as well as the value.
    SdpOptions tight;
    tight.eps_gap = 1e-11;
    tight.eps_feas = 1e-11;
    SdpSolution sol = solve(quadrant_instance_k1(10.0), tight);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK((sol.y - expected).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("infeasible pair of scalar constraints is certified") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = Eigen::VectorXd::Ones(1);
    inst.scalar_ineqs.push_back({3.0, {{0, -1.0}}});   // y >= 3
    inst.scalar_ineqs.push_back({-2.0, {{0, 1.0}}});   // y <= 2
    SdpSolution sol = solve(inst, {});
    REQUIRE(sol.status == SdpStatus::Infeasible);
    // Farkas ray: nonnegative multipliers with zero variable pairing and a
    // negative pairing against the constants.
    REQUIRE(sol.dual_ray_scalar.size() == 2);
    const double w1 = sol.dual_ray_scalar(0);
    const double w2 = sol.dual_ray_scalar(1);
    CHECK(w1 >= -1e-9);
    CHECK(w2 >= -1e-9);
    CHECK(std::abs(w1 - w2) <= 1e-4 * std::max(w1, w2));  // A*(ray) ~ 0
    CHECK(-3.0 * w1 + 2.0 * w2 < 0.0);                    // <F0, ray> < 0
}

TEST_CASE("constant violated block is infeasible without iterating") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = Eigen::VectorXd::Zero(1);
    PsdBlock b;
    b.dim = 2;
    b.entries = {{-1, 0, 0, -1.0}, {-1, 1, 1, 1.0}};  // diag(-1, 1), no variables
    inst.psd_blocks.push_back(b);
    SdpSolution sol = solve(inst, {});
    CHECK(sol.status == SdpStatus::Infeasible);
}

TEST_CASE("unbounded direction is reported with a primal ray") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = -Eigen::VectorXd::Ones(1);
    PsdBlock b;
    b.dim = 1;
    b.entries = {{0, 0, 0, 1.0}};  // y >= 0
    inst.psd_blocks.push_back(b);
    SdpSolution sol = solve(inst, {});
    REQUIRE(sol.status == SdpStatus::Unbounded);
    REQUIRE(sol.primal_ray.size() == 1);
    CHECK(sol.primal_ray(0) > 0.0);
    CHECK(inst.objective.dot(sol.primal_ray) < 0.0);
}

TEST_CASE("objective scaling keeps the argmin") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = Eigen::VectorXd::Ones(1);
    PsdBlock b;
    b.dim = 2;
    b.entries = {{-1, 0, 0, 1.0}, {-1, 1, 1, 1.0}, {0, 0, 1, 1.0}};
    inst.psd_blocks.push_back(b);
    SdpSolution base = solve(inst, {});
    REQUIRE(base.status == SdpStatus::Optimal);

    for (double t : {2.0, 17.0, 0.25}) {
        SdpInstance scaled = inst;
        scaled.objective *= t;
        SdpSolution sol = solve(scaled, {});
        REQUIRE(sol.status == SdpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(t * base.objective).epsilon(1e-6));
        CHECK((sol.y - base.y).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("zero objective with slack constraints gives primal = dual = 0") {
    SdpInstance inst;
    inst.var_count = 1;
    inst.objective = Eigen::VectorXd::Zero(1);
    inst.scalar_ineqs.push_back({-1.0, {{0, 1.0}}});   // y <= 1
    inst.scalar_ineqs.push_back({-1.0, {{0, -1.0}}});  // y >= -1
    SdpSolution sol = solve(inst, {});
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(sol.dual_objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("random strictly feasible instances satisfy the optimal contract") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const int nv = 2 + static_cast<int>(rng() % 3);
        const int dim = 2 + static_cast<int>(rng() % 3);
        Eigen::VectorXd ystar(nv);
        for (int i = 0; i < nv; ++i) ystar(i) = u(rng);

        SdpInstance inst;
        inst.var_count = nv;
        inst.objective.resize(nv);
        for (int i = 0; i < nv; ++i) inst.objective(i) = u(rng);

        PsdBlock blk;
        blk.dim = dim;
        std::vector<Eigen::MatrixXd> coeff(static_cast<std::size_t>(nv));
        for (int v = 0; v < nv; ++v) {
            Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(dim, dim, [&]() { return u(rng); });
            a = 0.5 * (a + a.transpose());
            coeff[static_cast<std::size_t>(v)] = a;
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j)
                    if (a(i, j) != 0.0) blk.entries.push_back({v, i, j, a(i, j)});
        }
        // A0 = B - sum y*_i A_i with B strictly positive definite makes y*
        // strictly feasible, so the minimum is finite and attained.
        Eigen::MatrixXd rnd = Eigen::MatrixXd::NullaryExpr(dim, dim, [&]() { return u(rng); });
        Eigen::MatrixXd a0 = rnd * rnd.transpose() + Eigen::MatrixXd::Identity(dim, dim);
        for (int v = 0; v < nv; ++v) a0 -= ystar(v) * coeff[static_cast<std::size_t>(v)];
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j)
                if (a0(i, j) != 0.0) blk.entries.push_back({-1, i, j, a0(i, j)});
        inst.psd_blocks.push_back(std::move(blk));
        // box to keep it bounded
        for (int v = 0; v < nv; ++v) {
            inst.scalar_ineqs.push_back({-10.0, {{v, 1.0}}});
            inst.scalar_ineqs.push_back({-10.0, {{v, -1.0}}});
        }

        SdpOptions opts;
        SdpSolution sol = solve(inst, opts);
        check_optimal_contract(inst, sol, opts);
        CHECK(sol.objective <= inst.objective.dot(ystar) + 1e-7 * (1.0 + std::abs(sol.objective)));
    }
}

TEST_CASE("instance validation rejects malformed data") {
    SdpInstance inst;
    inst.var_count = 2;
    inst.objective = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument);

    inst.objective = Eigen::VectorXd::Zero(2);
    PsdBlock b;
    b.dim = 2;
    b.entries = {{5, 0, 0, 1.0}};  // variable out of range
    inst.psd_blocks.push_back(b);
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument);

    inst.psd_blocks.clear();
    inst.fixed = {{0, 1.0}, {0, 2.0}};  // duplicate pin
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
}

TEST_CASE("debug dump lists every entry once") {
    SdpInstance inst = quadrant_instance_k1(10.0);
    std::ostringstream out;
    inst.dump(out);
    const std::string text = out.str();
    CHECK(text.find("paretopt sdp dump v1") == 0);
    CHECK(text.find("vars 6") != std::string::npos);
    CHECK(text.find("pin 1 1") != std::string::npos);
    std::istringstream in(text);
    std::string line;
    int entry_lines = 0;
    while (std::getline(in, line))
        if (line.rfind("entry ", 0) == 0) ++entry_lines;
    // 6 moment entries + 5 localization entries + scalar blocks (2+2+5+3+3 entries + 5 constants)
    CHECK(entry_lines == 6 + 5 + (1 + 1) + (1 + 1) + (1 + 5) + (1 + 2) + (1 + 2));
}

}  // TEST_SUITE
