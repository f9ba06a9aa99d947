#include <cmath>
#include <vector>

#include "doctest.h"
#include "superrl/distributions.hpp"
#include "superrl/errors.hpp"
#include "superrl/gradcheck.hpp"
#include "superrl/matrix.hpp"
#include "superrl/mlp.hpp"
#include "superrl/rng.hpp"

using namespace superrl;

TEST_CASE("matvec hand example and shape errors") {
    Matrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    const std::vector<double> x{1.0, 0.0, -1.0};
    const std::vector<double> y = matvec(a, x);
    CHECK(y[0] == doctest::Approx(-2.0));
    CHECK(y[1] == doctest::Approx(-2.0));
    const std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(matvec(a, bad), ShapeError);
}

TEST_CASE("mlp: all-zero weights map any input to zero logits") {
    const MlpParams p = MlpParams::zeros(4, 3, 2);
    const std::vector<double> x{0.3, -0.7, 1.0, 2.0};
    for (double v : mlp_forward(p, x)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("mlp: 1x1 identity net evaluates tanh") {
    MlpParams p = MlpParams::zeros(1, 1, 1);
    p.w1(0, 0) = 1.0;
    p.w2(0, 0) = 1.0;
    const std::vector<double> out = mlp_forward(p, std::vector<double>{0.5});
    CHECK(out[0] == doctest::Approx(0.46211715726).epsilon(1e-9));
}

TEST_CASE("mlp: b2-only net is a constant map") {
    MlpParams p = MlpParams::zeros(3, 2, 2);
    p.b2 = {1.0, 2.0};
    for (double v : {-1.0, 0.0, 5.0}) {
        const std::vector<double> out = mlp_forward(p, std::vector<double>{v, v, v});
        CHECK(out[0] == doctest::Approx(1.0));
        CHECK(out[1] == doctest::Approx(2.0));
    }
}

TEST_CASE("mlp backward: zero grad_logits gives zero gradient") {
    Rng rng(3);
    const MlpParams p = MlpParams::random_init(4, 3, 2, 0.5, rng);
    MlpCache cache;
    mlp_forward(p, std::vector<double>{1, 2, 3, 4}, &cache);
    const MlpParams g = mlp_backward(p, cache, std::vector<double>{0.0, 0.0});
    for (double v : g.flatten()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("mlp backward: dW2 is the outer product grad_logits x hidden") {
    Rng rng(5);
    const MlpParams p = MlpParams::random_init(2, 2, 2, 0.8, rng);
    MlpCache cache;
    mlp_forward(p, std::vector<double>{0.4, -1.2}, &cache);
    const std::vector<double> g{0.7, -0.3};
    const MlpParams grad = mlp_backward(p, cache, g);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(grad.w2(i, j) == doctest::Approx(g[i] * cache.hidden[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("mlp backward matches central finite differences") {
    Rng rng(11);
    const std::size_t in = 3, hid = 3, out = 3;
    MlpParams p = MlpParams::random_init(in, hid, out, 0.6, rng);
    std::vector<double> x(in), c(out);
    for (double& v : x) v = rng.gaussian();
    for (double& v : c) v = rng.gaussian();

    // loss = logits . c
    const LossWithGrad loss = [&](std::span<const double> flat) {
        const MlpParams q = MlpParams::from_flat(flat, in, hid, out);
        MlpCache cache;
        const std::vector<double> logits = mlp_forward(q, x, &cache);
        double value = 0.0;
        for (std::size_t i = 0; i < out; ++i) value += logits[i] * c[i];
        return std::make_pair(value, mlp_backward(q, cache, c).flatten());
    };
    CHECK(check_gradients(loss, p.flatten(), 1e-5) < 1e-6);
}

TEST_CASE("check_gradients: quadratic loss") {
    std::vector<double> theta{0.3, -1.2, 4.0};
    const LossWithGrad loss = [](std::span<const double> t) {
        double v = 0.0;
        std::vector<double> g(t.begin(), t.end());
        for (double x : t) v += 0.5 * x * x;
        return std::make_pair(v, g);
    };
    CHECK(check_gradients(loss, theta, 1e-5) < 1e-8);
}

TEST_CASE("check_gradients: constant loss has zero error") {
    std::vector<double> theta{1.0, 2.0};
    const LossWithGrad loss = [](std::span<const double> t) {
        return std::make_pair(3.0, std::vector<double>(t.size(), 0.0));
    };
    CHECK(check_gradients(loss, theta, 1e-5) == 0.0);
}

TEST_CASE("check_gradients: softmax cross-entropy on raw logits") {
    Rng rng(21);
    std::vector<double> z(5);
    for (double& v : z) v = rng.gaussian();
    const std::size_t target = 2;
    const LossWithGrad loss = [&](std::span<const double> t) {
        const std::vector<double> lp = log_softmax(t);
        std::vector<double> g(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            g[i] = std::exp(lp[i]) - (i == target ? 1.0 : 0.0);
        }
        return std::make_pair(-lp[target], g);
    };
    CHECK(check_gradients(loss, z, 1e-5) < 1e-6);
}

TEST_CASE("check_gradients rejects non-finite losses") {
    std::vector<double> theta{1.0};
    const LossWithGrad loss = [](std::span<const double>) {
        return std::make_pair(std::numeric_limits<double>::quiet_NaN(),
                              std::vector<double>{0.0});
    };
    CHECK_THROWS_AS(check_gradients(loss, theta, 1e-5), NumericError);
}

TEST_CASE("log_softmax: uniform, stability, proportionality") {
    const std::vector<double> lp0 = log_softmax(std::vector<double>{0, 0, 0, 0});
    for (double v : lp0) {
        CHECK(v == doctest::Approx(std::log(0.25)).epsilon(1e-12));
    }

    const std::vector<double> lp1 = log_softmax(std::vector<double>{1000.0, 0.0});
    CHECK(lp1[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(lp1[1] == doctest::Approx(-1000.0).epsilon(1e-9));

    const std::vector<double> lp2 = log_softmax(std::vector<double>{1.0, 2.0, 3.0});
    CHECK(lp2[1] - lp2[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp2[2] - lp2[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_softmax exponentials sum to one for random inputs") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> z(1 + rng.uniform_index(8));
        for (double& v : z) v = 100.0 * rng.gaussian();
        const std::vector<double> lp = log_softmax(z);
        double sum = 0.0;
        for (double v : lp) sum += std::exp(v);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("sample_categorical: one-hot always returns its index") {
    std::vector<double> lp(4, -1e9);
    lp[2] = 0.0;
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        CHECK(sample_categorical(lp, rng) == 2);
    }
}

TEST_CASE("sample_categorical: uniform frequencies within 3 sigma") {
    const std::vector<double> lp = log_softmax(std::vector<double>{0, 0, 0, 0});
    Rng rng(2024);
    const int n = 100000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) {
        ++counts[sample_categorical(lp, rng)];
    }
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    for (int c : counts) {
        CHECK(std::abs(static_cast<double>(c) / n - 0.25) < 3.0 * sigma);
    }
}

TEST_CASE("sample_categorical: fixed seed replays the sample sequence") {
    const std::vector<double> lp = log_softmax(std::vector<double>{0.5, -0.2, 1.0});
    Rng a(33), b(33);
    for (int i = 0; i < 500; ++i) {
        CHECK(sample_categorical(lp, a) == sample_categorical(lp, b));
    }
}

TEST_CASE("entropy gradient matches finite differences") {
    Rng rng(29);
    std::vector<double> z(6);
    for (double& v : z) v = rng.gaussian();
    const LossWithGrad loss = [](std::span<const double> t) {
        const std::vector<double> lp = log_softmax(t);
        std::vector<double> g(t.size(), 0.0);
        entropy_backward(lp, 1.0, g);
        return std::make_pair(entropy_from_log_probs(lp), g);
    };
    CHECK(check_gradients(loss, z, 1e-5) < 1e-6);
}

TEST_CASE("exact categorical KL basics") {
    const std::vector<double> p = log_softmax(std::vector<double>{0.1, 0.9, -0.4});
    CHECK(exact_categorical_kl(p, p) == doctest::Approx(0.0).epsilon(1e-14));
    const std::vector<double> q = log_softmax(std::vector<double>{1.0, -1.0, 0.0});
    CHECK(exact_categorical_kl(p, q) > 0.0);
}
