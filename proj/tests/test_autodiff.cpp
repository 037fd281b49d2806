#include <doctest.h>

#include <cmath>

#include "hgp/autodiff.hpp"
#include "hgp/errors.hpp"
#include "hgp/gradcheck.hpp"
#include "hgp/matrix.hpp"
#include "hgp/optim.hpp"
#include "support/test_utils.hpp"

using namespace hgp;

namespace {

// Independent triple-loop product for the matmul oracle.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    return out;
}

}  // namespace

TEST_CASE("matrix construction rejects non-finite entries") {
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), NumericError);
    CHECK_THROWS_AS(Matrix(1, 1, {std::numeric_limits<double>::infinity()}), NumericError);
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("matmul identity, oracle and zero cases") {
    const Matrix a{{1, 2}, {3, 4}};
    CHECK(matmul(a, Matrix::identity(2)) == a);

    const Matrix b{{5}, {6}};
    const Matrix expected{{17}, {39}};
    CHECK(matmul(a, b) == expected);
    CHECK(matmul(a, b) == naive_matmul(a, b));

    CHECK(matmul(Matrix(2, 2), a) == Matrix(2, 2));

    CHECK_THROWS_WITH_AS(matmul(a, Matrix(3, 1)), "matmul shape mismatch: 2x2 x 3x1", DimensionError);
}

TEST_CASE("matmul matches the triple-loop oracle on random shapes") {
    Rng rng(5, "matmul");
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(6), k = 1 + rng.uniform_int(6),
                          m = 1 + rng.uniform_int(6);
        const Matrix a = testutil::random_matrix(n, k, rng);
        const Matrix b = testutil::random_matrix(k, m, rng);
        const Matrix got = matmul(a, b);
        const Matrix want = naive_matmul(a, b);
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("row_softmax examples") {
    const auto s = ad::row_softmax(ad::constant(Matrix{{0, 0}}));
    CHECK(s.value()(0, 0) == doctest::Approx(0.5));
    CHECK(s.value()(0, 1) == doctest::Approx(0.5));

    const auto shift = ad::row_softmax(ad::constant(Matrix{{7.5, 7.5, 7.5}}));
    for (std::size_t j = 0; j < 3; ++j) CHECK(shift.value()(0, j) == doctest::Approx(1.0 / 3));

    const auto direct = ad::row_softmax(ad::constant(Matrix{{0, std::log(3.0)}}));
    CHECK(direct.value()(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(direct.value()(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("row_softmax rows sum to 1 for large-magnitude inputs") {
    Rng rng(11, "softmax");
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix m = testutil::random_matrix(4, 5, rng, -1e3, 1e3);
        const auto s = ad::row_softmax(ad::constant(m));
        for (std::size_t i = 0; i < 4; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < 5; ++j) {
                sum += s.value()(i, j);
                CHECK(s.value()(i, j) > 0.0);
                CHECK(s.value()(i, j) < 1.0);
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("elementwise op examples") {
    const auto r = ad::relu(ad::constant(Matrix{{-1, 0, 2}}));
    CHECK(r.value() == Matrix{{0, 0, 2}});

    CHECK(ad::sigmoid(ad::constant(Matrix{{0}})).value()(0, 0) == doctest::Approx(0.5));

    const auto h = ad::hadamard(ad::constant(Matrix{{2, 3}}), ad::constant(Matrix{{4, 5}}));
    CHECK(h.value() == Matrix{{8, 15}});

    CHECK_THROWS_AS(ad::hadamard(ad::constant(Matrix(1, 2)), ad::constant(Matrix(2, 1))), DimensionError);
    CHECK_THROWS_AS(ad::add(ad::constant(Matrix(1, 2)), ad::constant(Matrix(1, 3))), DimensionError);
}

TEST_CASE("reduce examples") {
    const Matrix m{{1, 3}, {5, 7}};
    CHECK(ad::reduce(ad::constant(m), ad::Axis::Rows, ad::Reduce::Mean).value() == Matrix{{3, 5}});

    const Matrix row{{4, 1, 9}};
    CHECK(ad::reduce(ad::constant(row), ad::Axis::Cols, ad::Reduce::Max).value() == Matrix{{9}});

    CHECK(ad::reduce(ad::constant(Matrix(3, 2)), ad::Axis::Rows, ad::Reduce::Sum).value() == Matrix(1, 2));

    CHECK_THROWS_AS(ad::reduce(ad::constant(Matrix{}), ad::Axis::Rows, ad::Reduce::Sum), DimensionError);
}

TEST_CASE("max reduction routes gradient to the lowest-index maximizer") {
    ParamStore store;
    Param& p = store.create("x", 3, 1);
    p.value = Matrix{{2}, {2}, {1}};
    const auto loss = ad::sum_all(ad::reduce(ad::param(store, "x"), ad::Axis::Rows, ad::Reduce::Max));
    ad::backward(loss, store);
    CHECK(store.get("x").grad == Matrix{{1}, {0}, {0}});
}

TEST_CASE("backward computes the quadratic gradient") {
    ParamStore store;
    Param& p = store.create("x", 1, 2);
    p.value = Matrix{{1, 2}};
    const auto f = [&] {
        const auto x = ad::param(store, "x");
        return ad::sum_all(ad::hadamard(x, x));
    };
    ad::backward(f(), store);
    CHECK(store.get("x").grad(0, 0) == doctest::Approx(2.0));
    CHECK(store.get("x").grad(0, 1) == doctest::Approx(4.0));
    CHECK(grad_check(f, store) < 1e-8);
}

TEST_CASE("backward leaves disconnected parameters at zero") {
    ParamStore store;
    store.create("used", 1, 1).value = Matrix{{3}};
    store.create("unused", 2, 2).value = Matrix::constant(2, 2, 5.0);
    const auto x = ad::param(store, "used");
    ad::backward(ad::sum_all(ad::hadamard(x, x)), store);
    CHECK(store.get("unused").grad == Matrix(2, 2));
    CHECK(store.get("used").grad(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("backward of sum(A*B) matches ones times B transpose") {
    Rng rng(17, "sumAB");
    ParamStore store;
    Param& a = store.create("a", 3, 4);
    a.value = testutil::random_matrix(3, 4, rng);
    const Matrix b = testutil::random_matrix(4, 2, rng);
    const auto f = [&] { return ad::sum_all(ad::matmul(ad::param(store, "a"), ad::constant(b))); };
    ad::backward(f(), store);
    // d/dA sum(AB) = 1 B^T
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double expected = 0.0;
            for (std::size_t c = 0; c < 2; ++c) expected += b(j, c);
            CHECK(store.get("a").grad(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    CHECK(grad_check(f, store) < 1e-8);
}

TEST_CASE("backward twice without a new forward is idempotent") {
    ParamStore store;
    store.create("x", 2, 2).value = Matrix{{1, 2}, {3, 4}};
    const auto x = ad::param(store, "x");
    const auto root = ad::sum_all(ad::hadamard(x, x));
    ad::backward(root, store);
    const Matrix first = store.get("x").grad;
    ad::backward(root, store);
    CHECK(store.get("x").grad == first);
}

TEST_CASE("backward rejects non-scalar roots") {
    ParamStore store;
    store.create("x", 2, 2);
    CHECK_THROWS_AS(ad::backward(ad::param(store, "x"), store), DimensionError);
}

TEST_CASE("every op passes grad_check at randomized points") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed, "opcheck");
        ParamStore store;
        store.create("a", 3, 4).value = testutil::random_matrix(3, 4, rng, 0.2, 1.5);
        store.create("b", 3, 4).value = testutil::random_matrix(3, 4, rng, 0.2, 1.5);
        store.create("m", 4, 3).value = testutil::random_matrix(4, 3, rng);
        store.create("row", 1, 4).value = testutil::random_matrix(1, 4, rng);
        store.create("s", 3, 1).value = testutil::random_matrix(3, 1, rng, 0.5, 1.5);
        const Matrix probe = testutil::random_matrix(3, 4, rng);
        const auto with_probe = [&](const ad::Var& v, const Matrix& w) {
            return ad::sum_all(ad::hadamard(v, ad::constant(w)));
        };

        const auto a = [&] { return ad::param(store, "a"); };
        const auto b = [&] { return ad::param(store, "b"); };

        CHECK(grad_check([&] { return with_probe(ad::matmul(a(), ad::param(store, "m")),
                                                 testutil::random_matrix(3, 3, rng)); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::add(a(), b()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::sub(a(), b()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::hadamard(a(), b()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::scale(a(), -1.7), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::add_row(a(), ad::param(store, "row")), probe); },
                         store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::relu(a()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::sigmoid(a()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::tanh(a()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::row_softmax(a()), probe); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::transpose(a()),
                                                 testutil::random_matrix(4, 3, rng)); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::reshape(a(), 4, 3),
                                                 testutil::random_matrix(4, 3, rng)); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::row_scale(a(), ad::param(store, "s")), probe); },
                         store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::gather_rows(a(), {2, 0, 2}),
                                                 testutil::random_matrix(3, 4, rng)); }, store) < 1e-5);
        CHECK(grad_check([&] { return with_probe(ad::concat_cols({a(), b()}),
                                                 testutil::random_matrix(3, 8, rng)); }, store) < 1e-5);
        CHECK(grad_check([&] {
            return ad::cross_entropy(ad::row_softmax(a()), {1, 0, 3});
        }, store) < 1e-5);
        CHECK(grad_check([&] {
            return with_probe(ad::reduce(a(), ad::Axis::Rows, ad::Reduce::Mean),
                              testutil::random_matrix(1, 4, rng));
        }, store) < 1e-5);
        CHECK(grad_check([&] {
            return with_probe(ad::reduce(a(), ad::Axis::Cols, ad::Reduce::Sum),
                              testutil::random_matrix(3, 1, rng));
        }, store) < 1e-5);
        CHECK(grad_check([&] {
            return with_probe(ad::reduce(a(), ad::Axis::Cols, ad::Reduce::Max),
                              testutil::random_matrix(3, 1, rng));
        }, store) < 1e-5);
    }
}

TEST_CASE("adam: fixed point on zero gradient and zero decay") {
    ParamStore store;
    Param& p = store.create("w", 2, 2);
    p.value = Matrix{{1, -2}, {3, 4}};
    const Matrix before = p.value;
    p.grad = Matrix(2, 2);
    p.grad_ready = true;
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    adam_step(store, cfg);
    CHECK(store.get("w").value == before);
}

TEST_CASE("adam: first step moves by -lr * sign(g) when epsilon is negligible") {
    ParamStore store;
    Param& p = store.create("w", 1, 3);
    p.value = Matrix{{0.5, -0.25, 2.0}};
    p.grad = Matrix{{0.3, -0.7, 0.0001}};
    p.grad_ready = true;
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.weight_decay = 0.0;
    cfg.epsilon = 1e-12;
    adam_step(store, cfg);
    CHECK(store.get("w").value(0, 0) == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
    CHECK(store.get("w").value(0, 1) == doctest::Approx(-0.25 + 0.01).epsilon(1e-6));
    CHECK(store.get("w").value(0, 2) == doctest::Approx(2.0 - 0.01).epsilon(1e-6));
}

TEST_CASE("adam: zero learning rate never changes parameters but advances moments") {
    ParamStore store;
    Param& p = store.create("w", 1, 2);
    p.value = Matrix{{1, 2}};
    p.grad = Matrix{{0.5, -0.5}};
    p.grad_ready = true;
    AdamConfig cfg;
    cfg.learning_rate = 0.0;
    adam_step(store, cfg);
    CHECK(store.get("w").value == Matrix{{1, 2}});
    CHECK(store.get("w").moment1(0, 0) != 0.0);
    CHECK(store.get("w").step == 1);
}

TEST_CASE("adam: missing gradient is a configuration error") {
    ParamStore store;
    store.create("w", 1, 1);
    CHECK_THROWS_AS(adam_step(store, AdamConfig{}), ConfigError);
}
