#include <doctest.h>

#include <cmath>

#include "amnav/nn.hpp"

using namespace amnav;
using nn::Activation;

namespace {

// Independent oracle: central finite differences of a scalar loss L = sum(w_out * y)
// with respect to every parameter.
double loss_of(const nn::DenseNetwork& net, const std::vector<double>& input,
               const std::vector<double>& out_weights) {
    const auto y = nn::forward(net, input);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += out_weights[i] * y[i];
    return l;
}

void check_gradients_fd(nn::DenseNetwork net, const std::vector<double>& input,
                        const std::vector<double>& out_weights, double h = 1e-5,
                        double tol = 1e-4) {
    nn::ForwardCache cache;
    nn::forward(net, input, &cache);
    const auto grads = nn::backward(net, cache, out_weights);
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
        auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
            for (std::size_t i = 0; i < params.size(); i += std::max<std::size_t>(1, params.size() / 7)) {
                const double saved = params[i];
                params[i] = saved + h;
                const double lp = loss_of(net, input, out_weights);
                params[i] = saved - h;
                const double lm = loss_of(net, input, out_weights);
                params[i] = saved;
                const double fd = (lp - lm) / (2.0 * h);
                const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
                CHECK(std::abs(fd - analytic[i]) / scale < tol);
            }
        };
        probe(net.layers()[li].weights, grads.dweights[li]);
        probe(net.layers()[li].bias, grads.dbias[li]);
    }
}

}  // namespace

TEST_CASE("fan-in init bounds") {
    Rng rng(42);
    CHECK(2.0 / std::sqrt(400.0) == doctest::Approx(0.1));
    CHECK(2.0 / std::sqrt(300.0) == doctest::Approx(0.11547).epsilon(1e-4));
    const double bound13 = 2.0 / std::sqrt(13.0);
    CHECK(bound13 == doctest::Approx(0.55470).epsilon(1e-4));

    double max_abs = 0.0, sum = 0.0;
    const int n = 10000;
    const auto w = nn::init_fanin(100, 13, rng);  // only 1300 entries, draw more
    std::vector<double> draws;
    for (int i = 0; i < n / 1300 + 1; ++i) {
        const auto wi = nn::init_fanin(100, 13, rng);
        draws.insert(draws.end(), wi.begin(), wi.end());
    }
    for (double x : draws) {
        max_abs = std::max(max_abs, std::abs(x));
        sum += x;
    }
    CHECK(max_abs <= bound13);
    // mean within 3 standard errors of 0; uniform std = bound/sqrt(3)
    const double se = bound13 / std::sqrt(3.0) / std::sqrt(static_cast<double>(draws.size()));
    CHECK(std::abs(sum / static_cast<double>(draws.size())) < 3.0 * se);
}

TEST_CASE("forward: ReLU and Tanh basics") {
    Rng rng(1);
    nn::DenseNetwork net({2, 2}, {Activation::ReLU}, rng);
    // identity weights
    net.layers()[0].weights = {1.0, 0.0, 0.0, 1.0};
    net.layers()[0].bias = {0.0, 0.0};
    const auto y = nn::forward(net, {-1.0, 2.0});
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 2.0);

    nn::DenseNetwork tanh_net({1, 1}, {Activation::Tanh}, rng);
    tanh_net.layers()[0].weights = {1.0};
    CHECK(nn::forward(tanh_net, {0.0})[0] == 0.0);

    nn::DenseNetwork mlp({13, 40, 30, 3}, {Activation::ReLU, Activation::ReLU, Activation::Tanh},
                         rng);
    std::vector<double> input(13);
    for (double& x : input) x = rng.uniform(-2.0, 2.0);
    for (double v : nn::forward(mlp, input)) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("forward rejects dimension mismatch") {
    Rng rng(1);
    nn::DenseNetwork net({3, 2}, {Activation::Identity}, rng);
    CHECK_THROWS_AS(nn::forward(net, {1.0, 2.0}), ContractViolation);
}

TEST_CASE("backward matches finite differences") {
    Rng rng(7);
    for (int probe = 0; probe < 5; ++probe) {
        nn::DenseNetwork actor({13, 16, 16, 3},
                               {Activation::ReLU, Activation::ReLU, Activation::Tanh}, rng);
        std::vector<double> input(13), ow{rng.normal(), rng.normal(), rng.normal()};
        for (double& x : input) x = rng.uniform(-1.0, 1.0);
        check_gradients_fd(actor, input, ow);

        nn::DenseNetwork critic({16, 20, 10, 1},
                                {Activation::ReLU, Activation::ReLU, Activation::Identity}, rng);
        std::vector<double> cin(16);
        for (double& x : cin) x = rng.uniform(-1.0, 1.0);
        check_gradients_fd(critic, cin, {rng.normal()});
    }
}

TEST_CASE("backward: zero output gradient and linear chain rule") {
    Rng rng(3);
    nn::DenseNetwork net({4, 4, 2}, {Activation::ReLU, Activation::Identity}, rng);
    nn::ForwardCache cache;
    nn::forward(net, {0.5, -0.5, 1.0, 2.0}, &cache);
    const auto g = nn::backward(net, cache, {0.0, 0.0});
    for (const auto& v : g.dweights)
        for (double x : v) CHECK(x == 0.0);

    // single linear neuron: dL/dw = x * dL/dy
    nn::DenseNetwork neuron({1, 1}, {Activation::Identity}, rng);
    neuron.layers()[0].weights = {0.3};
    nn::forward(neuron, {2.5}, &cache);
    const auto gn = nn::backward(neuron, cache, {1.7});
    CHECK(gn.dweights[0][0] == doctest::Approx(2.5 * 1.7));
}

TEST_CASE("backward supplies input gradient") {
    Rng rng(5);
    nn::DenseNetwork net({2, 1}, {Activation::Identity}, rng);
    net.layers()[0].weights = {3.0, -2.0};
    nn::ForwardCache cache;
    nn::forward(net, {1.0, 1.0}, &cache);
    std::vector<double> dx;
    nn::backward(net, cache, {1.0}, &dx);
    CHECK(dx[0] == doctest::Approx(3.0));
    CHECK(dx[1] == doctest::Approx(-2.0));
}

TEST_CASE("gradient clipping: global norm, direction preserved") {
    Rng rng(2);
    nn::DenseNetwork net({2, 1}, {Activation::Identity}, rng);
    nn::GradientSet g = nn::GradientSet::zeros_like(net);

    SUBCASE("under threshold unchanged") {
        g.dweights[0] = {0.3, 0.4};  // norm 0.5
        auto before = g.dweights[0];
        nn::clip_gradients(g, 1.0);
        CHECK(g.dweights[0] == before);
    }
    SUBCASE("over threshold rescaled") {
        g.dweights[0] = {0.0, 4.0};  // norm 4
        nn::clip_gradients(g, 1.0);
        CHECK(g.dweights[0][1] == doctest::Approx(1.0));
        CHECK(nn::global_norm(g) == doctest::Approx(1.0));
    }
    SUBCASE("zero unchanged") {
        nn::clip_gradients(g, 1.0);
        CHECK(nn::global_norm(g) == 0.0);
    }
    SUBCASE("cosine similarity preserved") {
        g.dweights[0] = {3.0, -7.0};
        g.dbias[0] = {2.0};
        const auto before_w = g.dweights[0];
        const double n_before = nn::global_norm(g);
        nn::clip_gradients(g, 0.5);
        CHECK(nn::global_norm(g) <= 0.5 + 1e-12);
        // each component scaled by the same factor
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(g.dweights[0][i] / before_w[i] == doctest::Approx(0.5 / n_before));
    }
}

TEST_CASE("adam: first-step scalar oracle, fixed point, determinism") {
    Rng rng(9);
    nn::DenseNetwork net({1, 1}, {Activation::Identity}, rng);
    net.layers()[0].weights = {1.0};
    auto opt = nn::AdamState::for_network(net, 1e-3);
    nn::GradientSet g = nn::GradientSet::zeros_like(net);
    g.dweights[0] = {0.5};
    nn::adam_step(net, g, opt);
    // bias-corrected first step moves by ~lr regardless of gradient scale
    CHECK(net.layers()[0].weights[0] == doctest::Approx(1.0 - 1e-3 * 0.5 / (0.5 + 1e-8)).epsilon(1e-9));

    // zero gradient: parameters unchanged
    nn::DenseNetwork net2({2, 2}, {Activation::Tanh}, rng);
    auto snapshot = net2.layers()[0].weights;
    auto opt2 = nn::AdamState::for_network(net2);
    nn::GradientSet zero = nn::GradientSet::zeros_like(net2);
    for (int i = 0; i < 10; ++i) nn::adam_step(net2, zero, opt2);
    CHECK(net2.layers()[0].weights == snapshot);

    // determinism
    nn::DenseNetwork a({2, 2}, {Activation::ReLU}, rng);
    nn::DenseNetwork b = a;
    auto oa = nn::AdamState::for_network(a);
    auto ob = nn::AdamState::for_network(b);
    nn::GradientSet gg = nn::GradientSet::zeros_like(a);
    gg.dweights[0] = {0.1, -0.2, 0.3, -0.4};
    nn::adam_step(a, gg, oa);
    nn::adam_step(b, gg, ob);
    CHECK(a.layers()[0].weights == b.layers()[0].weights);
}

TEST_CASE("adam fuzz: parameters stay finite over many random steps") {
    Rng rng(11);
    nn::DenseNetwork net({4, 8, 2}, {Activation::ReLU, Activation::Tanh}, rng);
    auto opt = nn::AdamState::for_network(net);
    for (int step = 0; step < 10000; ++step) {
        nn::GradientSet g = nn::GradientSet::zeros_like(net);
        for (auto& v : g.dweights)
            for (double& x : v) x = rng.normal(0.0, 10.0);
        for (auto& v : g.dbias)
            for (double& x : v) x = rng.normal(0.0, 10.0);
        nn::clip_gradients(g, 1.0);
        nn::adam_step(net, g, opt);
    }
    for (const auto& l : net.layers()) {
        for (double w : l.weights) CHECK(std::isfinite(w));
        for (double b : l.bias) CHECK(std::isfinite(b));
    }
}

TEST_CASE("soft update") {
    Rng rng(13);
    nn::DenseNetwork online({1, 1}, {Activation::Identity}, rng);
    nn::DenseNetwork target = online;
    target.layers()[0].weights = {0.0};
    online.layers()[0].weights = {1.0};
    nn::soft_update(target, online, 5e-3);
    CHECK(target.layers()[0].weights[0] == doctest::Approx(0.005));

    nn::soft_update(target, online, 1.0);
    CHECK(target.layers()[0].weights[0] == 1.0);

    // online == target: unchanged
    nn::DenseNetwork same = online;
    nn::soft_update(same, online, 0.37);
    CHECK(same.layers()[0].weights[0] == online.layers()[0].weights[0]);

    nn::DenseNetwork other({2, 1}, {Activation::Identity}, rng);
    CHECK_THROWS_AS(nn::soft_update(other, online, 0.5), ContractViolation);
}
