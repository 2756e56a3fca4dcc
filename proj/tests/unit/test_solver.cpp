#include <cmath>
#include <random>

#include "doctest.h"
#include "nilmtree/errors.hpp"
#include "nilmtree/solver.hpp"

using namespace nilmtree;

namespace {

std::vector<Powerlet> random_block(std::mt19937_64& rng, std::size_t n, std::size_t w) {
    std::uniform_real_distribution<double> u(0, 200);
    std::vector<Powerlet> b(n, Powerlet(w));
    for (auto& c : b)
        for (auto& v : c) v = u(rng);
    return b;
}

}  // namespace

TEST_CASE("exhaustive scan finds the residual-minimal pair") {
    std::vector<Powerlet> b1{{0, 0}, {1, 0}, {0.5, 0.5}};
    std::vector<Powerlet> b2{{0, 0}, {0, 2}};
    SelectionProblem p{&b1, &b2, {1, 2}};
    auto sol = solve_exhaustive(p);
    CHECK(sol.first == 1);
    CHECK(sol.second == 1);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(!sol.relaxation);
}

TEST_CASE("exact ties go to the lexicographically smallest pair") {
    std::vector<Powerlet> b1{{5, 0}, {0, 5}};  // symmetric: both pairs tie
    std::vector<Powerlet> b2{{0, 5}, {5, 0}};
    SelectionProblem p{&b1, &b2, {5, 5}};
    auto sol = solve_exhaustive(p);
    CHECK(sol.first == 0);
    CHECK(sol.second == 0);
}

TEST_CASE("problem validation") {
    std::vector<Powerlet> ok{{1, 2}};
    std::vector<Powerlet> empty;
    std::vector<Powerlet> ragged{{1, 2}, {1}};
    SelectionProblem p{&ok, &empty, {1, 2}};
    CHECK_THROWS_AS(validate_problem(p), DataError);
    SelectionProblem q{&ok, &ragged, {1, 2}};
    CHECK_THROWS_AS(validate_problem(q), DataError);
    SelectionProblem r{&ok, &ok, {1, 2, 3}};
    CHECK_THROWS_AS(validate_problem(r), DataError);
    SelectionProblem s{nullptr, &ok, {1, 2}};
    CHECK_THROWS_AS(validate_problem(s), DataError);
}

TEST_CASE("the lifted problem has the documented shape") {
    std::mt19937_64 rng(3);
    auto b1 = random_block(rng, 3, 4);
    auto b2 = random_block(rng, 2, 4);
    SelectionProblem p{&b1, &b2, {10, 20, 30, 40}};
    auto lifted = build_sdp(p);
    const std::size_t N = 5;
    CHECK(lifted.n1 == 3);
    CHECK(lifted.n2 == 2);
    CHECK(lifted.A_hat.rows() == static_cast<Eigen::Index>(N + 1));
    CHECK(lifted.A_hat.isApprox(lifted.A_hat.transpose(), 1e-12));
    CHECK(lifted.A_hat(0, 0) == 0.0);
    // corner + one per diagonal entry + one per block
    CHECK(lifted.constraints.size() == N + 3);
    CHECK(lifted.rhs.size() == static_cast<Eigen::Index>(N + 3));
    for (const auto& c : lifted.constraints) {
        CHECK(c.rows() == static_cast<Eigen::Index>(N + 1));
        CHECK(c.isApprox(c.transpose(), 1e-12));
    }
    // the quadratic block is the candidate Gram matrix
    Eigen::MatrixXd A(4, N);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 4; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b1[j][i];
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < 4; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(3 + j)) = b2[j][i];
    CHECK(lifted.A_hat.bottomRightCorner(N, N).isApprox(A.transpose() * A, 1e-9));
    Eigen::VectorXd y(4);
    y << 10, 20, 30, 40;
    CHECK(lifted.A_hat.row(0).tail(N).transpose().isApprox(-A.transpose() * y, 1e-9));
    CHECK(lifted.y_sq == doctest::Approx(y.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("psd projection clips negative curvature and is idempotent") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5, 5);
    Eigen::MatrixXd m(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) = u(rng);
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    auto proj = project_psd(sym);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(project_psd(proj).isApprox(proj, 1e-10));
    // already-psd input passes through
    Eigen::MatrixXd psd = m * m.transpose();
    CHECK(project_psd(psd).isApprox(psd, 1e-9));
}

TEST_CASE("admm reproduces a forced selection") {
    // one candidate per block: the constraints pin x = [1, 1]
    std::vector<Powerlet> b1{{3, 0, 1}};
    std::vector<Powerlet> b2{{0, 2, 1}};
    SelectionProblem p{&b1, &b2, {3, 2, 2}};
    auto lifted = build_sdp(p);
    AdmmConfig cfg;
    auto res = admm_solve(lifted, cfg);
    CHECK(res.converged);
    CHECK(res.X_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(res.X_hat(1, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(res.X_hat(2, 0) == doctest::Approx(1.0).epsilon(1e-3));
    auto sol = solve_admm(p, cfg);
    CHECK(sol.first == 0);
    CHECK(sol.second == 0);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-9).scale(1));
    REQUIRE(sol.relaxation);
    CHECK(sol.relaxation->converged);
}

TEST_CASE("the relaxation lower-bounds the exhaustive optimum") {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<std::size_t> nd(1, 4), wd(2, 6);
    for (int trial = 0; trial < 20; ++trial) {
        auto b1 = random_block(rng, nd(rng), wd(rng));
        auto b2 = random_block(rng, nd(rng), b1.front().size());
        std::uniform_real_distribution<double> u(0, 400);
        std::vector<double> y(b1.front().size());
        for (auto& v : y) v = u(rng);
        SelectionProblem p{&b1, &b2, y};
        auto ex = solve_exhaustive(p);
        AdmmConfig cfg;
        // tight tolerances: the bound property only holds up to the
        // feasibility error of the returned iterate
        cfg.tol_primal = 1e-6;
        cfg.tol_dual = 1e-6;
        cfg.max_iter = 20000;
        auto sol = solve_admm(p, cfg);
        REQUIRE(sol.relaxation);
        // lifted objective approximates min ||y - c1 - c2||^2 from below;
        // slack scales with ||y||^2, the natural size of the objective
        double y_sq = 0;
        for (double v : y) y_sq += v * v;
        CHECK(sol.relaxation->lifted_objective <= ex.objective * ex.objective + 1e-3 * (1 + y_sq));
        // the rounded solution evaluates real pairs, so it can never beat
        // the true optimum
        CHECK(sol.objective >= ex.objective);
    }
}

TEST_CASE("rounding a degenerate one-hot relaxation recovers it exactly") {
    std::mt19937_64 rng(4);
    auto b1 = random_block(rng, 3, 5);
    auto b2 = random_block(rng, 2, 5);
    SelectionProblem p{&b1, &b2, {1, 1, 1, 1, 1}};
    Eigen::VectorXd x(5);
    x << 0, 1, 0, 0, 1;  // picks b1[1], b2[1]
    Eigen::MatrixXd X = x * x.transpose();  // zero covariance
    AdmmConfig cfg;
    cfg.n_round_samples = 8;
    auto sol = randomized_round(x, X, p, cfg);
    CHECK(sol.first == 1);
    CHECK(sol.second == 1);
}

TEST_CASE("solve_admm is deterministic for a fixed seed") {
    std::mt19937_64 rng(90);
    auto b1 = random_block(rng, 4, 6);
    auto b2 = random_block(rng, 3, 6);
    std::vector<double> y(6, 150);
    SelectionProblem p{&b1, &b2, y};
    AdmmConfig cfg;
    cfg.seed = 555;
    auto s1 = solve_admm(p, cfg);
    auto s2 = solve_admm(p, cfg);
    CHECK(s1.first == s2.first);
    CHECK(s1.second == s2.second);
    CHECK(s1.objective == s2.objective);
    CHECK(s1.relaxation->iterations == s2.relaxation->iterations);
}

TEST_CASE("strict mode surfaces non-convergence") {
    std::mt19937_64 rng(2);
    auto b1 = random_block(rng, 4, 5);
    auto b2 = random_block(rng, 4, 5);
    SelectionProblem p{&b1, &b2, {100, 100, 100, 100, 100}};
    AdmmConfig cfg;
    cfg.max_iter = 1;  // cannot possibly converge in one sweep
    cfg.strict = true;
    CHECK_THROWS_AS(solve_admm(p, cfg), SolverError);
    cfg.strict = false;
    auto sol = solve_admm(p, cfg);  // still rounds to a feasible answer
    CHECK(sol.relaxation);
    CHECK(!sol.relaxation->converged);
    CHECK(sol.first < 4);
    CHECK(sol.second < 4);
}
