#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "nilmtree/powerlet.hpp"

namespace nilmtree {

// Pick exactly one powerlet per block so the stacked column pair best
// explains y in the L2 sense. Blocks are column sets of the two child
// pseudo-devices; every column has length w = y.size().
struct SelectionProblem {
    const std::vector<Powerlet>* block1 = nullptr;
    const std::vector<Powerlet>* block2 = nullptr;
    std::vector<double> y;
};

void validate_problem(const SelectionProblem& p);

struct AdmmConfig {
    double mu = 1.0;            // Moreau-Yosida regularization weight
    double tol_primal = 1e-4;
    double tol_dual = 1e-4;
    int max_iter = 1000;
    int n_round_samples = 100;
    std::uint64_t seed = 1;
    bool strict = false;        // non-convergence throws SolverError
};

// Diagnostics from the relaxation path.
struct RelaxationInfo {
    Eigen::VectorXd x;        // first-order block of the lifted solution
    Eigen::MatrixXd X;        // second-order block
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    double lifted_objective = 0.0;  // Tr(A_hat X_hat) + ||y||^2, comparable to objective^2
};

struct SelectionSolution {
    std::size_t first = 0;   // column index into block1
    std::size_t second = 0;  // column index into block2
    double objective = 0.0;  // ||y - c1 - c2||_2
    std::optional<RelaxationInfo> relaxation;
};

// Scans all |block1| * |block2| pairs; the lexicographically smallest
// pair wins exact objective ties. This is the reference backend.
SelectionSolution solve_exhaustive(const SelectionProblem& p);

// Lifted reformulation: minimize Tr(A_hat X_hat) over X_hat >= 0
// (elementwise), X_hat PSD, with linear constraints fixing the corner,
// tying diag(X) to x, and summing each block of x to one.
struct LiftedProblem {
    Eigen::MatrixXd A_hat;                      // (N+1)x(N+1) symmetric
    std::vector<Eigen::MatrixXd> constraints;   // m symmetric constraint matrices
    Eigen::VectorXd rhs;                        // length m
    std::size_t n1 = 0, n2 = 0;
    double y_sq = 0.0;                          // constant dropped by the lift
};
LiftedProblem build_sdp(const SelectionProblem& p);

struct AdmmResult {
    Eigen::MatrixXd X_hat;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
};

// Three-way splitting with quadratic (Moreau-Yosida) coupling: affine
// step absorbing the linear objective, spectral projection onto the PSD
// cone, projection onto the nonnegative orthant, running duals. Stops
// when both residuals drop below tolerance or at max_iter.
AdmmResult admm_solve(const LiftedProblem& lifted, const AdmmConfig& cfg);

// Gaussian rounding: sample z ~ N(x*, X* - x* x*^T) (covariance clipped
// PSD), repair each block to one-hot at its largest coordinate, keep the
// sample with the lowest objective. Deterministic for a fixed seed.
SelectionSolution randomized_round(const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                                   const SelectionProblem& p, const AdmmConfig& cfg);

// build_sdp + admm_solve + randomized_round, diagnostics attached.
SelectionSolution solve_admm(const SelectionProblem& p, const AdmmConfig& cfg);

// Spectral projection onto the PSD cone (negative eigenvalues clipped).
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& sym);

}  // namespace nilmtree
