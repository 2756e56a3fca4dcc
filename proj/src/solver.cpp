#include "nilmtree/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nilmtree/errors.hpp"
#include "nilmtree/kernels.hpp"

namespace nilmtree {

void validate_problem(const SelectionProblem& p) {
    if (!p.block1 || !p.block2) throw DataError("selection problem: missing blocks");
    if (p.block1->empty() || p.block2->empty()) throw DataError("selection problem: empty block");
    if (p.y.empty()) throw DataError("selection problem: empty target window");
    for (const auto* blk : {p.block1, p.block2})
        for (const auto& col : *blk)
            if (col.size() != p.y.size())
                throw DataError("selection problem: column length disagrees with window");
}

SelectionSolution solve_exhaustive(const SelectionProblem& p) {
    validate_problem(p);
    const auto& b1 = *p.block1;
    const auto& b2 = *p.block2;
    const auto& ops = kernels::active();
    SelectionSolution best;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b1.size(); ++j) {
        for (std::size_t k = 0; k < b2.size(); ++k) {
            double sq = ops.pair_residual_sq(p.y.data(), b1[j].data(), b2[k].data(), p.y.size());
            if (sq < best_sq) {  // strict: lexicographically first pair keeps ties
                best_sq = sq;
                best.first = j;
                best.second = k;
            }
        }
    }
    best.objective = std::sqrt(best_sq);
    return best;
}

LiftedProblem build_sdp(const SelectionProblem& p) {
    validate_problem(p);
    const std::size_t n1 = p.block1->size();
    const std::size_t n2 = p.block2->size();
    const std::size_t N = n1 + n2;
    const std::size_t w = p.y.size();

    Eigen::MatrixXd A(w, N);
    for (std::size_t j = 0; j < n1; ++j)
        for (std::size_t i = 0; i < w; ++i) A(i, j) = (*p.block1)[j][i];
    for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t i = 0; i < w; ++i) A(i, n1 + k) = (*p.block2)[k][i];
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(p.y.data(), static_cast<long>(w));

    LiftedProblem lp;
    lp.n1 = n1;
    lp.n2 = n2;
    lp.y_sq = b.squaredNorm();
    const long M = static_cast<long>(N) + 1;
    lp.A_hat = Eigen::MatrixXd::Zero(M, M);
    Eigen::RowVectorXd btA = b.transpose() * A;
    lp.A_hat.block(0, 1, 1, static_cast<long>(N)) = -btA;
    lp.A_hat.block(1, 0, static_cast<long>(N), 1) = -btA.transpose();
    lp.A_hat.block(1, 1, static_cast<long>(N), static_cast<long>(N)) = A.transpose() * A;

    // corner, diag(X) = x, and one-hot row sums per block
    auto sym = [M] { return Eigen::MatrixXd::Zero(M, M).eval(); };
    {
        auto C = sym();
        C(0, 0) = 1.0;
        lp.constraints.push_back(C);
    }
    for (std::size_t i = 1; i <= N; ++i) {
        auto C = sym();
        long li = static_cast<long>(i);
        C(li, li) = 1.0;
        C(0, li) = -0.5;
        C(li, 0) = -0.5;
        lp.constraints.push_back(C);
    }
    for (int blk = 0; blk < 2; ++blk) {
        auto C = sym();
        std::size_t lo = blk == 0 ? 1 : n1 + 1;
        std::size_t hi = blk == 0 ? n1 : N;
        for (std::size_t i = lo; i <= hi; ++i) {
            C(0, static_cast<long>(i)) = 0.5;
            C(static_cast<long>(i), 0) = 0.5;
        }
        lp.constraints.push_back(C);
    }
    lp.rhs = Eigen::VectorXd::Zero(static_cast<long>(lp.constraints.size()));
    lp.rhs(0) = 1.0;
    lp.rhs(static_cast<long>(N) + 1) = 1.0;
    lp.rhs(static_cast<long>(N) + 2) = 1.0;
    return lp;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& sym) {
    Eigen::MatrixXd S = 0.5 * (sym + sym.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw SolverError("eigendecomposition failed in PSD projection");
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

AdmmResult admm_solve(const LiftedProblem& lifted, const AdmmConfig& cfg) {
    if (cfg.mu <= 0) throw ConfigError("admm: mu must be positive");
    if (cfg.max_iter < 1) throw ConfigError("admm: max_iter must be >= 1");
    const long M = lifted.A_hat.rows();
    const std::size_t m = lifted.constraints.size();

    // objective scaling only conditions the iteration; the feasible set
    // and argmin are unchanged
    double scale = lifted.A_hat.norm();
    Eigen::MatrixXd C = lifted.A_hat / (scale > 1.0 ? scale : 1.0);

    Eigen::MatrixXd G(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j)
            G(static_cast<long>(i), static_cast<long>(j)) = G(static_cast<long>(j), static_cast<long>(i)) =
                lifted.constraints[i].cwiseProduct(lifted.constraints[j]).sum();
    Eigen::LDLT<Eigen::MatrixXd> gram(G);
    if (gram.info() != Eigen::Success) throw SolverError("admm: constraint Gram factorization failed");

    auto apply = [&](const Eigen::MatrixXd& V) {
        Eigen::VectorXd out(static_cast<long>(m));
        for (std::size_t i = 0; i < m; ++i)
            out(static_cast<long>(i)) = lifted.constraints[i].cwiseProduct(V).sum();
        return out;
    };
    auto adjoint = [&](const Eigen::VectorXd& u) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(M, M);
        for (std::size_t i = 0; i < m; ++i) out += u(static_cast<long>(i)) * lifted.constraints[i];
        return out;
    };
    auto proj_affine = [&](const Eigen::MatrixXd& V) {
        return (V - adjoint(gram.solve(apply(V) - lifted.rhs))).eval();
    };

    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(M, M);
    Eigen::MatrixXd U1 = Z, U2 = Z, U3 = Z;
    AdmmResult res;
    const double mu = cfg.mu;
    for (res.iterations = 1; res.iterations <= cfg.max_iter; ++res.iterations) {
        Eigen::MatrixXd X1 = proj_affine(Z - U1 - mu * C);
        Eigen::MatrixXd X2 = project_psd(Z - U2);
        Eigen::MatrixXd X3 = (Z - U3).cwiseMax(0.0);
        Eigen::MatrixXd Zold = Z;
        Z = ((X1 + U1) + (X2 + U2) + (X3 + U3)) / 3.0;
        U1 += X1 - Z;
        U2 += X2 - Z;
        U3 += X3 - Z;
        res.primal_residual =
            std::max({(X1 - Z).norm(), (X2 - Z).norm(), (X3 - Z).norm()});
        res.dual_residual = std::sqrt(3.0) / mu * (Z - Zold).norm();
        if (res.primal_residual < cfg.tol_primal && res.dual_residual < cfg.tol_dual) {
            res.converged = true;
            break;
        }
    }
    if (res.iterations > cfg.max_iter) res.iterations = cfg.max_iter;
    res.X_hat = std::move(Z);
    if (cfg.strict && !res.converged)
        throw SolverError("admm did not converge within " + std::to_string(cfg.max_iter) +
                          " iterations (primal " + std::to_string(res.primal_residual) +
                          ", dual " + std::to_string(res.dual_residual) + ")");
    return res;
}

SelectionSolution randomized_round(const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                                   const SelectionProblem& p, const AdmmConfig& cfg) {
    validate_problem(p);
    const std::size_t n1 = p.block1->size();
    const std::size_t n2 = p.block2->size();
    const long N = static_cast<long>(n1 + n2);
    if (x.size() != N || X.rows() != N || X.cols() != N)
        throw DataError("randomized_round: dimension mismatch");

    Eigen::VectorXd mean = x.cwiseMax(0.0).cwiseMin(1.0);
    Eigen::MatrixXd cov = X - mean * mean.transpose();
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success)
        throw SolverError("eigendecomposition failed in rounding covariance");
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd root = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto& ops = kernels::active();

    auto repair = [&](const Eigen::VectorXd& z, std::size_t lo, std::size_t n) {
        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double v = z(static_cast<long>(lo + i));
            if (v > best) {  // ties keep the lowest index
                best = v;
                arg = i;
            }
        }
        return arg;
    };

    SelectionSolution best;
    double best_sq = std::numeric_limits<double>::infinity();
    int samples = cfg.n_round_samples < 1 ? 1 : cfg.n_round_samples;
    Eigen::VectorXd g(N);
    for (int s = 0; s < samples; ++s) {
        for (long i = 0; i < N; ++i) g(i) = gauss(rng);
        Eigen::VectorXd z = mean + root * g;
        std::size_t j = repair(z, 0, n1);
        std::size_t k = repair(z, n1, n2);
        double sq =
            ops.pair_residual_sq(p.y.data(), (*p.block1)[j].data(), (*p.block2)[k].data(), p.y.size());
        if (sq < best_sq) {
            best_sq = sq;
            best.first = j;
            best.second = k;
        }
    }
    best.objective = std::sqrt(best_sq);
    return best;
}

SelectionSolution solve_admm(const SelectionProblem& p, const AdmmConfig& cfg) {
    LiftedProblem lifted = build_sdp(p);
    AdmmResult admm = admm_solve(lifted, cfg);
    const long N = static_cast<long>(lifted.n1 + lifted.n2);
    RelaxationInfo info;
    info.x = admm.X_hat.block(1, 0, N, 1);
    info.X = admm.X_hat.block(1, 1, N, N);
    info.iterations = admm.iterations;
    info.primal_residual = admm.primal_residual;
    info.dual_residual = admm.dual_residual;
    info.converged = admm.converged;
    info.lifted_objective = lifted.A_hat.cwiseProduct(admm.X_hat).sum() + lifted.y_sq;

    SelectionSolution sol = randomized_round(info.x, info.X, p, cfg);
    sol.relaxation = std::move(info);
    return sol;
}

}  // namespace nilmtree
