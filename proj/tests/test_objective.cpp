#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <hybridgd/objective.hpp>

using namespace hybridgd;

TEST_CASE("build_quadratic: 1-D identity case") {
    SpectrumSpec spec{1, {1.0}, 7};
    auto obj = build_quadratic(spec, Vector::Zero(1));
    REQUIRE(obj.matrix()(0, 0) == 1.0);
    REQUIRE(obj.minimizer()(0) == 0.0);
    REQUIRE(obj.beta() == 1.0);
    REQUIRE(obj.lipschitz() == 1.0);
}

TEST_CASE("build_quadratic: requested spectrum is realized") {
    SpectrumSpec spec{2, {2.0, 4.0}, 42};
    auto obj = build_quadratic(spec);
    Eigen::SelfAdjointEigenSolver<Matrix> es(obj.matrix());
    REQUIRE(std::abs(es.eigenvalues()(0) - 2.0) < 1e-10);
    REQUIRE(std::abs(es.eigenvalues()(1) - 4.0) < 1e-10);
    REQUIRE_NOTHROW(obj.validate_spectrum());
}

TEST_CASE("build_quadratic: minimizer residual") {
    SpectrumSpec spec{3, {1.0, 2.0, 5.0}, 1234};
    auto obj = build_quadratic(spec);
    // direct matrix-vector oracle
    const double residual = (obj.matrix() * obj.minimizer() + obj.linear_term()).norm();
    REQUIRE(residual <= 1e-9);
}

TEST_CASE("build_quadratic: b entries in [1,5], symmetric Q, orthogonal U") {
    SpectrumSpec spec{8, {1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5}, 99};
    auto obj = build_quadratic(spec);
    for (Index i = 0; i < 8; ++i) {
        REQUIRE(obj.linear_term()(i) >= 1.0);
        REQUIRE(obj.linear_term()(i) <= 5.0);
    }
    REQUIRE((obj.matrix() - obj.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("seeded orthogonal factor: orthogonality and sign convention") {
    std::mt19937_64 rng(99);
    const Matrix U = seeded_orthogonal(8, rng);
    REQUIRE((U.transpose() * U - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);

    std::mt19937_64 rng2(99);
    const Matrix V = seeded_orthogonal(8, rng2);
    REQUIRE((U.array() == V.array()).all());
}

TEST_CASE("build_quadratic: deterministic per seed") {
    SpectrumSpec spec{5, {1, 2, 3, 4, 5}, 2024};
    auto a = build_quadratic(spec);
    auto b = build_quadratic(spec);
    REQUIRE((a.matrix().array() == b.matrix().array()).all());
    REQUIRE((a.linear_term().array() == b.linear_term().array()).all());

    spec.seed = 2025;
    auto c = build_quadratic(spec);
    REQUIRE((a.matrix().array() != c.matrix().array()).any());
}

TEST_CASE("build_quadratic: invalid spectra rejected") {
    REQUIRE_THROWS_AS(build_quadratic(SpectrumSpec{2, {0.0, 1.0}, 0}), config_error);
    REQUIRE_THROWS_AS(build_quadratic(SpectrumSpec{2, {-1.0, 1.0}, 0}), config_error);
    REQUIRE_THROWS_AS(build_quadratic(SpectrumSpec{2, {2.0, 1.0}, 0}), config_error);
    REQUIRE_THROWS_AS(build_quadratic(SpectrumSpec{3, {1.0, 2.0}, 0}), config_error);
}

TEST_CASE("value: hand-checked points") {
    auto obj1 = build_quadratic(SpectrumSpec{1, {1.0}, 0}, Vector::Zero(1));
    REQUIRE(obj1.value(Vector::Zero(1)) == 0.0);
    REQUIRE(obj1.value(Vector::Constant(1, 2.0)) == 2.0);  // 0.5 * 1 * 4

    Matrix Q(2, 2);
    Q << 2, 0, 0, 4;
    QuadraticObjective obj2(Q, Vector::Ones(2), 2.0, 4.0);
    REQUIRE(obj2.value(Vector::Zero(2)) == 0.0);

    REQUIRE_THROWS_AS(obj2.value(Vector::Zero(3)), dimension_error);
}

TEST_CASE("gradient: hand point, fixed point, finite differences") {
    auto obj1 = build_quadratic(SpectrumSpec{1, {1.0}, 0}, Vector::Zero(1));
    REQUIRE(obj1.gradient(Vector::Ones(1))(0) == 1.0);

    SpectrumSpec spec{5, {1, 2, 3, 4, 5}, 321};
    auto obj = build_quadratic(spec);
    REQUIRE(obj.gradient(obj.minimizer()).norm() <= 1e-9);

    // central-difference oracle
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    Vector x(5);
    for (Index i = 0; i < 5; ++i) x(i) = coord(rng);
    const Vector grad = obj.gradient(x);
    const double h = 1e-6;
    for (Index i = 0; i < 5; ++i) {
        Vector hi = x, lo = x;
        hi(i) += h;
        lo(i) -= h;
        const double fd = (obj.value(hi) - obj.value(lo)) / (2.0 * h);
        REQUIRE(std::abs(fd - grad(i)) <= 1e-5 * std::max(1.0, std::abs(grad(i))));
    }

    REQUIRE_THROWS_AS(obj.gradient(Vector::Zero(4)), dimension_error);
}

TEST_CASE("block_gradient: slices concatenate to the full gradient") {
    SpectrumSpec spec{4, {1, 2, 3, 4}, 5};
    auto obj = build_quadratic(spec);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    Vector eta(4);
    for (Index i = 0; i < 4; ++i) eta(i) = coord(rng);

    SECTION("scalar blocks match components") {
        auto part = BlockPartition::contiguous(4, 4);
        const Vector full = obj.gradient(eta);
        for (Index i = 0; i < 4; ++i) {
            const Vector g = block_gradient(obj, eta, part, i);
            REQUIRE(g.size() == 1);
            REQUIRE(g(0) == full(i));
        }
    }
    SECTION("two blocks of two concatenate bitwise") {
        auto part = BlockPartition::from_sizes({2, 2});
        Vector cat(4);
        cat << block_gradient(obj, eta, part, 0), block_gradient(obj, eta, part, 1);
        REQUIRE((cat.array() == obj.gradient(eta).array()).all());
    }
    SECTION("zero at the minimizer") {
        auto part = BlockPartition::from_sizes({1, 3});
        for (Index i = 0; i < 2; ++i)
            REQUIRE(block_gradient(obj, obj.minimizer(), part, i).norm() <= 1e-9);
    }
    SECTION("index out of range") {
        auto part = BlockPartition::contiguous(4, 2);
        REQUIRE_THROWS_AS(block_gradient(obj, eta, part, 2), config_error);
        REQUIRE_THROWS_AS(block_gradient(obj, eta, part, -1), config_error);
    }
}

TEST_CASE("block partition: construction rules") {
    auto p = BlockPartition::contiguous(10, 3);
    REQUIRE(p.sizes == std::vector<Index>{4, 3, 3});
    REQUIRE(p.offsets == std::vector<Index>{0, 4, 7});
    REQUIRE(p.total == 10);

    REQUIRE_THROWS_AS(BlockPartition::contiguous(3, 4), config_error);
    REQUIRE_THROWS_AS(BlockPartition::from_sizes({2, 0, 1}), config_error);
    REQUIRE_THROWS_AS(BlockPartition::contiguous(0, 0), config_error);
}

TEST_CASE("strong convexity and smoothness over seeded pairs") {
    SpectrumSpec spec{6, {0.8, 1.0, 1.7, 2.4, 3.0, 3.6}, 2718};
    auto obj = build_quadratic(spec);
    const double beta = obj.beta();
    const double K = obj.lipschitz();

    std::mt19937_64 rng(161803);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Vector x(6), y(6);
        for (Index i = 0; i < 6; ++i) {
            x(i) = coord(rng);
            y(i) = coord(rng);
        }
        const Vector dg = obj.gradient(x) - obj.gradient(y);
        const Vector dx = x - y;
        REQUIRE(dg.dot(dx) >= beta * dx.squaredNorm() - 1e-8);
        REQUIRE(dg.norm() <= K * dx.norm() + 1e-8);
    }
}

TEST_CASE("objective invariant validation") {
    Matrix bad(2, 2);
    bad << 1.0, 0.5, 0.2, 1.0;  // asymmetric
    REQUIRE_THROWS_AS(QuadraticObjective(bad, Vector::Zero(2), 1.0, 1.0), config_error);

    Matrix Q(2, 2);
    Q << 2, 0, 0, 4;
    REQUIRE_THROWS_AS(QuadraticObjective(Q, Vector::Zero(3), 2.0, 4.0), dimension_error);
    REQUIRE_THROWS_AS(QuadraticObjective(Q, Vector::Zero(2), 0.0, 4.0), config_error);
    REQUIRE_THROWS_AS(QuadraticObjective(Q, Vector::Zero(2), 5.0, 4.0), config_error);
}
