#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include <hybridgd/errors.hpp>

namespace hybridgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Contract every objective consumed by the simulator satisfies: value,
// gradient, strong-convexity constant beta, gradient Lipschitz constant,
// and the unique minimizer.
template <class T>
concept ObjectiveFunction = requires(const T& f, const Vector& x) {
    { f.dimension() } -> std::convertible_to<Index>;
    { f.value(x) } -> std::convertible_to<double>;
    { f.gradient(x) } -> std::convertible_to<Vector>;
    { f.beta() } -> std::convertible_to<double>;
    { f.lipschitz() } -> std::convertible_to<double>;
    { f.minimizer() } -> std::convertible_to<Vector>;
};

// Requested spectrum for a seeded random quadratic instance. The generated
// matrix carries exactly these eigenvalues; the smallest is the strong
// convexity constant beta, the largest the Lipschitz constant K.
struct SpectrumSpec {
    Index n = 0;
    std::vector<double> eigenvalues;  // ascending, all > 0
    std::uint64_t seed = 0;

    void validate() const {
        if (n <= 0) throw config_error("SpectrumSpec: n must be positive");
        if (static_cast<Index>(eigenvalues.size()) != n)
            throw config_error("SpectrumSpec: need exactly n eigenvalues");
        for (double ev : eigenvalues)
            if (!(ev > 0.0))
                throw config_error("SpectrumSpec: eigenvalues must be strictly positive");
        if (!std::is_sorted(eigenvalues.begin(), eigenvalues.end()))
            throw config_error("SpectrumSpec: eigenvalues must be sorted ascending");
    }

    // n eigenvalues spaced linearly over [beta, lipschitz].
    static SpectrumSpec linear(Index n, double beta, double lipschitz, std::uint64_t seed) {
        if (n <= 0) throw config_error("SpectrumSpec: n must be positive");
        if (!(beta > 0.0) || !(lipschitz >= beta))
            throw config_error("SpectrumSpec: need 0 < beta <= lipschitz");
        SpectrumSpec spec;
        spec.n = n;
        spec.seed = seed;
        spec.eigenvalues.resize(static_cast<std::size_t>(n));
        if (n == 1) {
            if (beta != lipschitz)
                throw config_error("SpectrumSpec: n=1 requires beta == lipschitz");
            spec.eigenvalues[0] = beta;
        } else {
            for (Index i = 0; i < n; ++i)
                spec.eigenvalues[static_cast<std::size_t>(i)] =
                    beta + (lipschitz - beta) * static_cast<double>(i) / static_cast<double>(n - 1);
            spec.eigenvalues.front() = beta;      // keep extremes exact
            spec.eigenvalues.back() = lipschitz;
        }
        return spec;
    }
};

// Contiguous split of the n coordinates into agent-owned blocks.
struct BlockPartition {
    Index total = 0;
    std::vector<Index> sizes;
    std::vector<Index> offsets;

    Index agents() const { return static_cast<Index>(sizes.size()); }
    Index offset(Index i) const { return offsets[static_cast<std::size_t>(i)]; }
    Index size(Index i) const { return sizes[static_cast<std::size_t>(i)]; }

    static BlockPartition from_sizes(std::vector<Index> block_sizes) {
        if (block_sizes.empty())
            throw config_error("BlockPartition: need at least one block");
        BlockPartition p;
        p.sizes = std::move(block_sizes);
        p.offsets.resize(p.sizes.size());
        Index running = 0;
        for (std::size_t i = 0; i < p.sizes.size(); ++i) {
            if (p.sizes[i] <= 0)
                throw config_error("BlockPartition: block sizes must be positive");
            p.offsets[i] = running;
            running += p.sizes[i];
        }
        p.total = running;
        return p;
    }

    // N contiguous blocks of floor(n/N), remainder spread over the first
    // n mod N agents.
    static BlockPartition contiguous(Index n, Index agents) {
        if (n <= 0 || agents <= 0 || agents > n)
            throw config_error("BlockPartition: need 1 <= agents <= n");
        std::vector<Index> sizes(static_cast<std::size_t>(agents), n / agents);
        for (Index i = 0; i < n % agents; ++i) sizes[static_cast<std::size_t>(i)] += 1;
        return from_sizes(std::move(sizes));
    }
};

// L(x) = 0.5 x'Qx + b'x with Q symmetric positive definite. beta and the
// Lipschitz constant come from the requested spectrum; the minimizer solves
// Q x* = -b at construction.
class QuadraticObjective {
public:
    QuadraticObjective(Matrix Q, Vector b, double beta, double lipschitz)
        : Q_(std::move(Q)), b_(std::move(b)), beta_(beta), lipschitz_(lipschitz) {
        const Index n = Q_.rows();
        if (n <= 0 || Q_.cols() != n)
            throw config_error("QuadraticObjective: Q must be square and nonempty");
        if (b_.size() != n)
            throw dimension_error("QuadraticObjective: b size does not match Q");
        if (!(beta_ > 0.0) || !(lipschitz_ >= beta_))
            throw config_error("QuadraticObjective: need 0 < beta <= lipschitz");
        const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
        if ((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw config_error("QuadraticObjective: Q is not symmetric");

        Eigen::LDLT<Matrix> solver(Q_);
        if (solver.info() != Eigen::Success)
            throw numerical_error("QuadraticObjective: factorization of Q failed");
        x_star_ = solver.solve(-b_);
        const double residual = (Q_ * x_star_ + b_).norm();
        if (residual > 1e-9 * std::max(1.0, b_.norm()))
            throw numerical_error("QuadraticObjective: minimizer residual too large");
    }

    Index dimension() const { return Q_.rows(); }
    const Matrix& matrix() const { return Q_; }
    const Vector& linear_term() const { return b_; }
    double beta() const { return beta_; }
    double lipschitz() const { return lipschitz_; }
    const Vector& minimizer() const { return x_star_; }

    double value(const Vector& x) const {
        check_dim(x);
        return 0.5 * x.dot(Q_ * x) + b_.dot(x);
    }

    Vector gradient(const Vector& x) const {
        check_dim(x);
        return Q_ * x + b_;
    }

    // Recomputes the spectrum extremes and asserts they agree with the
    // requested beta/K within 1e-9.
    void validate_spectrum() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Q_, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw numerical_error("QuadraticObjective: eigenvalue computation failed");
        const auto& ev = es.eigenvalues();
        if (ev.minCoeff() < beta_ - 1e-9 || ev.maxCoeff() > lipschitz_ + 1e-9 ||
            std::abs(ev.minCoeff() - beta_) > 1e-9 * std::max(1.0, beta_) ||
            std::abs(ev.maxCoeff() - lipschitz_) > 1e-9 * std::max(1.0, lipschitz_))
            throw numerical_error("QuadraticObjective: spectrum extremes disagree with beta/K");
    }

private:
    void check_dim(const Vector& x) const {
        if (x.size() != Q_.rows()) {
            std::ostringstream msg;
            msg << "QuadraticObjective: expected vector of size " << Q_.rows()
                << ", got " << x.size();
            throw dimension_error(msg.str());
        }
    }

    Matrix Q_;
    Vector b_;
    double beta_, lipschitz_;
    Vector x_star_;
};

static_assert(ObjectiveFunction<QuadraticObjective>);

// Orthogonal factor of a standard-normal matrix drawn from `rng`. The QR
// sign convention (nonnegative R diagonal) fixes the factor uniquely, so
// the same stream gives the same U on any linear-algebra backend.
inline Matrix seeded_orthogonal(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix raw(n, n);
    for (Index col = 0; col < n; ++col)
        for (Index row = 0; row < n; ++row) raw(row, col) = gauss(rng);

    Eigen::HouseholderQR<Matrix> qr(raw);
    Matrix U = qr.householderQ();
    const Matrix& packed = qr.matrixQR();
    for (Index k = 0; k < n; ++k)
        if (packed(k, k) < 0.0) U.col(k) = -U.col(k);
    return U;
}

// Q = U' D U with U drawn by seeded_orthogonal and D the requested
// spectrum. b is drawn uniformly from [1, 5] out of the same seed stream
// unless overridden.
inline QuadraticObjective build_quadratic(const SpectrumSpec& spec,
                                          std::optional<Vector> b_override = std::nullopt) {
    spec.validate();
    const Index n = spec.n;

    std::mt19937_64 rng(spec.seed);
    Matrix U = seeded_orthogonal(n, rng);

    Eigen::Map<const Vector> spectrum(spec.eigenvalues.data(), n);
    Matrix Q = U.transpose() * spectrum.asDiagonal() * U;
    Q = ((Q + Q.transpose()) * 0.5).eval();  // exact symmetry

    Vector b;
    if (b_override) {
        b = std::move(*b_override);
        if (b.size() != n)
            throw dimension_error("build_quadratic: b override has wrong size");
    } else {
        std::uniform_real_distribution<double> unif(1.0, 5.0);
        b.resize(n);
        for (Index i = 0; i < n; ++i) b(i) = unif(rng);
    }

    return QuadraticObjective(std::move(Q), std::move(b),
                              spec.eigenvalues.front(), spec.eigenvalues.back());
}

// Block i of the full gradient at eta. Defined as the literal slice so the
// concatenation over all agents reproduces gradient(eta) bit for bit.
template <ObjectiveFunction Objective>
Vector block_gradient(const Objective& obj, const Vector& eta,
                      const BlockPartition& partition, Index agent) {
    if (partition.total != obj.dimension())
        throw dimension_error("block_gradient: partition does not cover the objective");
    if (agent < 0 || agent >= partition.agents())
        throw config_error("block_gradient: agent index out of range");
    Vector full = obj.gradient(eta);
    return full.segment(partition.offset(agent), partition.size(agent));
}

} // namespace hybridgd
