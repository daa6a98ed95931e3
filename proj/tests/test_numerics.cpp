#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testing.hpp"
#include "weave/ops.hpp"
#include "weave/optim.hpp"
#include "weave/tape.hpp"

using namespace weave;
namespace op = weave::ops;

namespace {

// Independent reference: classic triple loop, same row-major accumulation
// order the implementation claims to use.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
    const Dim m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({m, n});
    for (Dim i = 0; i < m; ++i)
        for (Dim j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Dim l = 0; l < k; ++l) acc += a.at(i, l) * b.at(l, j);
            out.data()[i * n + j] = acc;
        }
    return out;
}

// Direct per-row log-softmax, no shared code with the op under test.
double ce_oracle(const Tensor& logits, const std::vector<op::TokenId>& targets,
                 op::TokenId ignore) {
    const Dim v = logits.cols();
    double total = 0.0;
    int count = 0;
    for (Dim i = 0; i < logits.rows(); ++i) {
        op::TokenId t = targets[static_cast<std::size_t>(i)];
        if (t == ignore) continue;
        double denom = 0.0;
        for (Dim j = 0; j < v; ++j) denom += std::exp(logits.at(i, j));
        total += -std::log(std::exp(logits.at(i, t)) / denom);
        ++count;
    }
    return total / count;
}

} // namespace

TEST_CASE("matmul identity and hand cases") {
    Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    Tensor b = Tensor::from_data({2, 2}, {3, 4, 5, 6});
    Tensor r = op::matmul(nullptr, eye, b);
    CHECK(r.data() == std::vector<double>{3, 4, 5, 6});

    Tensor row = Tensor::from_data({1, 2}, {1, 2});
    Tensor col = Tensor::from_data({2, 1}, {3, 4});
    CHECK(op::matmul(nullptr, row, col).item() == 11.0); // 1*3 + 2*4, exact
}

TEST_CASE("matmul matches triple-loop oracle bit for bit") {
    Rng rng(7);
    Tensor a = testing::rand_tensor({4, 5}, rng);
    Tensor b = testing::rand_tensor({5, 3}, rng);
    Tensor got = op::matmul(nullptr, a, b);
    Tensor want = matmul_oracle(a, b);
    for (std::size_t i = 0; i < got.data().size(); ++i)
        CHECK(got.data()[i] == want.data()[i]);

    // all shapes up to 8x8
    for (Dim m = 1; m <= 8; ++m)
        for (Dim k = 1; k <= 8; ++k)
            for (Dim n = 1; n <= 8; ++n) {
                Tensor x = testing::rand_tensor({m, k}, rng);
                Tensor y = testing::rand_tensor({k, n}, rng);
                Tensor g = op::matmul(nullptr, x, y);
                Tensor w = matmul_oracle(x, y);
                for (std::size_t i = 0; i < g.data().size(); ++i)
                    REQUIRE(g.data()[i] == w.data()[i]);
            }
}

TEST_CASE("matmul shape error names both shapes") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4, 2});
    try {
        op::matmul(nullptr, a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2x3]") != std::string::npos);
        CHECK(msg.find("[4x2]") != std::string::npos);
    }
}

TEST_CASE("cross entropy uniform logits gives ln(V)") {
    Tensor logits = Tensor::full({1, 4}, 0.7);
    Tensor loss = op::softmax_cross_entropy_ignore(nullptr, logits, {2});
    CHECK(loss.item() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy drops ignored positions") {
    Rng rng(11);
    Tensor logits = testing::rand_tensor({2, 5}, rng);
    Tensor both = op::softmax_cross_entropy_ignore(nullptr, logits, {2, -100});
    Tensor first = Tensor::from_data({1, 5}, std::vector<double>(
        logits.data().begin(), logits.data().begin() + 5));
    Tensor solo = op::softmax_cross_entropy_ignore(nullptr, first, {2});
    CHECK(both.item() == solo.item());
}

TEST_CASE("cross entropy matches brute-force oracle") {
    Rng rng(13);
    Tensor logits = testing::rand_tensor({3, 5}, rng, -2.0, 2.0);
    std::vector<op::TokenId> targets = {1, -100, 4};
    Tensor loss = op::softmax_cross_entropy_ignore(nullptr, logits, targets);
    CHECK(loss.item() ==
          doctest::Approx(ce_oracle(logits, targets, -100)).epsilon(1e-12));
}

TEST_CASE("cross entropy rejects fully masked input") {
    Tensor logits = Tensor::zeros({2, 3});
    CHECK_THROWS_AS(
        op::softmax_cross_entropy_ignore(nullptr, logits, {-100, -100}),
        NoSupervisedTokens);
}

TEST_CASE("ignored rows are inert bit for bit") {
    Rng rng(17);
    Tensor logits = testing::rand_tensor({3, 4}, rng, -1.0, 1.0, true);
    std::vector<op::TokenId> targets = {2, -100, 1};
    double base = op::softmax_cross_entropy_ignore(nullptr, logits, targets).item();

    logits.at(1, 0) += 123.456; // perturb the masked row only
    logits.at(1, 3) = 1e9;
    double perturbed =
        op::softmax_cross_entropy_ignore(nullptr, logits, targets).item();
    CHECK(base == perturbed);

    // and no gradient lands on the masked row
    Tape tape;
    Tensor loss = op::softmax_cross_entropy_ignore(&tape, logits, targets);
    tape.backward(loss);
    for (Dim j = 0; j < 4; ++j) CHECK(logits.grad()[1 * 4 + j] == 0.0);
}

TEST_CASE("backward on linear and quadratic hand cases") {
    Tape tape;
    Tensor x = Tensor::from_data({3}, {5, -1, 2}, true);
    Tensor loss = op::sum(&tape, x);
    tape.backward(loss);
    CHECK(x.grad() == std::vector<double>{1, 1, 1});

    Tensor y = Tensor::from_data({2}, {1, 2}, true);
    Tensor sq = op::mul(&tape, y, y);
    Tensor loss2 = op::sum(&tape, sq);
    tape.backward(loss2);
    CHECK(y.grad() == std::vector<double>{2, 4});
    CHECK(tape.size() == 0); // tape cleared after backward
}

TEST_CASE("backward rejects non-scalar loss") {
    Tape tape;
    Tensor x = Tensor::from_data({2}, {1, 2}, true);
    Tensor y = op::scale(&tape, x, 2.0);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
}

TEST_CASE("gradient check per primitive op") {
    Rng rng(23);

    auto check = [&](const std::function<double(Tape*)>& run,
                     std::vector<Tensor> params) {
        for (Tensor& p : params) p.drop_grad();
        {
            Tape tape;
            run(&tape); // populates analytic grads
        }
        double worst = testing::fd_worst_rel_err(
            params, [&]() { return run(nullptr); });
        CHECK(worst < 1e-4);
    };

    SUBCASE("matmul") {
        Tensor a = testing::rand_tensor({3, 4}, rng, -1, 1, true);
        Tensor b = testing::rand_tensor({4, 2}, rng, -1, 1, true);
        check(
            [&](Tape* t) {
                Tensor m = op::matmul(t, a, b);
                Tensor l = op::sum(t, op::mul(t, m, m));
                if (t) t->backward(l);
                return l.item();
            },
            {a, b});
    }
    SUBCASE("matmul_nt") {
        Tensor a = testing::rand_tensor({3, 4}, rng, -1, 1, true);
        Tensor b = testing::rand_tensor({2, 4}, rng, -1, 1, true);
        check(
            [&](Tape* t) {
                Tensor m = op::matmul_nt(t, a, b);
                Tensor l = op::sum(t, op::mul(t, m, m));
                if (t) t->backward(l);
                return l.item();
            },
            {a, b});
    }
    SUBCASE("add mul scale bias") {
        Tensor a = testing::rand_tensor({2, 3}, rng, -1, 1, true);
        Tensor b = testing::rand_tensor({2, 3}, rng, -1, 1, true);
        Tensor bias = testing::rand_tensor({3}, rng, -1, 1, true);
        check(
            [&](Tape* t) {
                Tensor s = op::add(t, a, b);
                Tensor u = op::mul(t, s, a);
                Tensor w = op::add_bias(t, op::scale(t, u, 1.7), bias);
                Tensor l = op::sum(t, op::mul(t, w, w));
                if (t) t->backward(l);
                return l.item();
            },
            {a, b, bias});
    }
    SUBCASE("silu rmsnorm") {
        Tensor x = testing::rand_tensor({2, 4}, rng, -1, 1, true);
        Tensor g = testing::rand_tensor({4}, rng, 0.5, 1.5, true);
        check(
            [&](Tape* t) {
                Tensor n = op::rmsnorm(t, x, g);
                Tensor s = op::silu(t, n);
                Tensor l = op::sum(t, op::mul(t, s, s));
                if (t) t->backward(l);
                return l.item();
            },
            {x, g});
    }
    SUBCASE("causal softmax") {
        Tensor s = testing::rand_tensor({4, 4}, rng, -1, 1, true);
        Tensor w = testing::rand_tensor({4, 4}, rng, -1, 1, false);
        check(
            [&](Tape* t) {
                Tensor a = op::causal_softmax(t, s);
                Tensor l = op::sum(t, op::mul(t, a, op::mul(t, w, w)));
                if (t) t->backward(l);
                return l.item();
            },
            {s});
    }
    SUBCASE("embedding and slices") {
        Tensor table = testing::rand_tensor({5, 4}, rng, -1, 1, true);
        std::vector<op::TokenId> ids = {3, 0, 3};
        check(
            [&](Tape* t) {
                Tensor e = op::embedding_rows(t, table, ids);
                Tensor left = op::slice_cols(t, e, 0, 2);
                Tensor right = op::slice_cols(t, e, 2, 2);
                Tensor back = op::concat_cols(t, {right, left});
                Tensor l = op::sum(t, op::mul(t, back, back));
                if (t) t->backward(l);
                return l.item();
            },
            {table});
    }
    SUBCASE("cross entropy") {
        Tensor logits = testing::rand_tensor({4, 5}, rng, -1, 1, true);
        std::vector<op::TokenId> targets = {1, -100, 4, 0};
        check(
            [&](Tape* t) {
                Tensor l =
                    op::softmax_cross_entropy_ignore(t, logits, targets);
                if (t) t->backward(l);
                return l.item();
            },
            {logits});
    }
    SUBCASE("cross entropy sum reduction") {
        Tensor logits = testing::rand_tensor({3, 4}, rng, -1, 1, true);
        std::vector<op::TokenId> targets = {2, 1, -100};
        check(
            [&](Tape* t) {
                Tensor l = op::softmax_cross_entropy_ignore(
                    t, logits, targets, -100, op::Reduction::Sum);
                if (t) t->backward(l);
                return l.item();
            },
            {logits});
    }
}

TEST_CASE("composite graph matches finite differences") {
    Rng rng(31);
    Tensor w1 = testing::rand_tensor({4, 3}, rng, -0.5, 0.5, true);
    Tensor w2 = testing::rand_tensor({3, 2}, rng, -0.5, 0.5, true);
    Tensor x = testing::rand_tensor({2, 4}, rng, -1, 1, false);

    auto run = [&](Tape* t) {
        Tensor h = op::silu(t, op::matmul(t, x, w1));
        Tensor y = op::matmul(t, h, w2);
        Tensor l = op::mean(t, op::mul(t, y, y));
        if (t) t->backward(l);
        return l.item();
    };
    {
        Tape t;
        run(&t);
    }
    CHECK(testing::fd_worst_rel_err({w1, w2}, [&] { return run(nullptr); }) <
          1e-4);
}

TEST_CASE("causal softmax rows sum to one and mask the future") {
    Rng rng(37);
    Tensor s = testing::rand_tensor({6, 6}, rng, -3, 3);
    Tensor w = op::causal_softmax(nullptr, s);
    for (Dim r = 0; r < 6; ++r) {
        double total = 0.0;
        for (Dim c = 0; c <= r; ++c) total += w.at(r, c);
        CHECK(std::fabs(total - 1.0) < 1e-12);
        for (Dim c = r + 1; c < 6; ++c) CHECK(w.at(r, c) == 0.0);
    }
}

TEST_CASE("frozen tensors keep grads absent") {
    Tape tape;
    Tensor frozen = Tensor::from_data({2, 2}, {1, 2, 3, 4}, false);
    Tensor live = Tensor::from_data({2, 2}, {1, 1, 1, 1}, true);
    Tensor out = op::matmul(&tape, frozen, live);
    Tensor loss = op::sum(&tape, out);
    tape.backward(loss);
    CHECK(!frozen.has_grad());
    CHECK(live.has_grad());
}

TEST_CASE("adam minimizes a quadratic") {
    Tensor x = Tensor::from_data({3}, {5, -3, 2}, true);
    Adam adam({x}, {.lr = 0.1});
    for (int i = 0; i < 400; ++i) {
        adam.zero_grad();
        Tape tape;
        Tensor loss = op::sum(&tape, op::mul(&tape, x, x));
        tape.backward(loss);
        adam.step();
    }
    for (double v : x.data()) CHECK(std::fabs(v) < 1e-3);
}
