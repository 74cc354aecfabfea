#include "torch_doctest.hpp"

#include <cmath>
#include <random>

#include "mpgan/train/losses.hpp"

using namespace mpgan;
using namespace mpgan::train;
using torch::Tensor;

namespace {

const auto kF64 = torch::TensorOptions().dtype(torch::kFloat64);

Tensor randn(std::vector<int64_t> shape, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Tensor t = torch::empty(shape, kF64);
  double* p = t.data_ptr<double>();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = nd(rng);
  return t;
}

std::vector<double> values(const Tensor& t) {
  const Tensor c = t.detach().to(torch::kFloat64).contiguous();
  return {c.data_ptr<double>(), c.data_ptr<double>() + c.numel()};
}

double log_sigmoid(double z) { return std::log(1.0 / (1.0 + std::exp(-z))); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Tiny two-layer critic D(z) = w2 . leaky(W1 z + b1) + b2 on flattened input.
struct TinyCritic {
  Tensor w1, b1, w2, b2;
  Tensor operator()(const Tensor& z) const {
    const Tensor h = torch::leaky_relu(torch::matmul(z.flatten(1), w1.t()) + b1, 0.2);
    return torch::matmul(h, w2) + b2;
  }
  double scalar(const std::vector<double>& z) const {
    const auto W1 = w1.accessor<double, 2>();
    const auto B1 = b1.accessor<double, 1>();
    const auto W2 = w2.accessor<double, 1>();
    double out = b2.item<double>();
    for (int64_t k = 0; k < w1.size(0); ++k) {
      double a = B1[k];
      for (std::size_t i = 0; i < z.size(); ++i) a += W1[k][static_cast<int64_t>(i)] * z[i];
      out += W2[k] * (a > 0 ? a : 0.2 * a);
    }
    return out;
  }
};

TinyCritic tiny_critic(std::mt19937_64& rng, int in, bool grad = false) {
  TinyCritic c{randn({8, in}, rng, 0.7), randn({8}, rng, 0.3), randn({8}, rng, 0.7), randn({}, rng)};
  if (grad) {
    c.w1.requires_grad_(true);
    c.b1.requires_grad_(true);
    c.w2.requires_grad_(true);
  }
  return c;
}

}  // namespace

TEST_CASE("loss weights") {
  const LossWeights w = LossWeights::defaults(LossKind::WganGp);
  CHECK(w.l1 == 20.0);
  CHECK(w.gp == 10.0);
  CHECK(w.feature.empty());
  CHECK(LossWeights::defaults(LossKind::Tempo, 4).feature == std::vector<double>(4, 0.25));
  LossWeights bad = w;
  bad.feature = {1.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = w;
  bad.l1 = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(parse_loss_kind("lsgan") == LossKind::Lsgan);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), ValidationError);
}

TEST_CASE("2D advection warp") {
  const int n = 64;
  Tensor blob = torch::empty({1, 1, n, n}, kF64);
  auto B = blob.accessor<double, 4>();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) B[0][0][y][x] = std::exp(-((x - 31.5) * (x - 31.5) + (y - 30.0) * (y - 30.0)) / 72.0);

  SUBCASE("zero velocity and constant tiles are fixed points") {
    CHECK(torch::equal(nets::warp2d(blob, torch::zeros({1, 2, n, n}, kF64), 0.5), blob));
    const Tensor c = torch::full({1, 1, n, n}, 0.3, kF64);
    std::mt19937_64 rng(1);
    CHECK((nets::warp2d(c, randn({1, 2, n, n}, rng, 3.0), 0.5) - 0.3).abs().max().item<double>() < 1e-15);
  }
  SUBCASE("+v then -v returns the blob within interpolation error") {
    Tensor v = torch::empty({1, 2, n, n}, kF64);
    v.select(1, 0).fill_(2.6);
    v.select(1, 1).fill_(-1.4);
    const Tensor there = nets::warp2d(blob, v, 0.5);
    const Tensor back = nets::warp2d(there, v, -0.5);
    const double range = (blob.max() - blob.min()).item<double>();
    const double err = (back - blob).abs().max().item<double>();
    MESSAGE("round-trip Linf ", err, " of range ", range);
    CHECK(err <= 0.05 * range);
    CHECK((there - blob).abs().max().item<double>() > 0.05 * range);  // the warp really moved it
  }
  SUBCASE("triplet layout") {
    std::mt19937_64 rng(2);
    const Tensor a = randn({2, 1, 8, 8}, rng), b = randn({2, 1, 8, 8}, rng), c = randn({2, 1, 8, 8}, rng);
    const Tensor fp = randn({2, 2, 8, 8}, rng), fn = randn({2, 2, 8, 8}, rng);
    const Tensor t = warped_triplet(a, b, c, fp, fn, 0.5);
    CHECK(t.sizes().vec() == std::vector<int64_t>{2, 3, 8, 8});
    CHECK(torch::equal(t.narrow(1, 0, 1), nets::warp2d(a, fp, 0.5)));
    CHECK(torch::equal(t.narrow(1, 1, 1), b));
    CHECK(torch::equal(t.narrow(1, 2, 1), nets::warp2d(c, fn, -0.5)));
  }
}

TEST_CASE("tempo objective") {
  std::mt19937_64 rng(3);
  SUBCASE("perfect output zeroes L1 and feature terms") {
    const Tensor y = randn({4, 1, 8, 8}, rng);
    const std::vector<Tensor> taps = {randn({4, 3, 4, 4}, rng), randn({4, 2, 2, 2}, rng)};
    const auto t = generator_objective(LossWeights::defaults(LossKind::Tempo), torch::zeros({4}, kF64),
                                       torch::zeros({4}, kF64), taps, taps, y, y);
    CHECK(t.l1.item<double>() == 0.0);
    CHECK(t.feature.item<double>() == 0.0);
  }
  SUBCASE("D = 1/2 everywhere gives log 2 per adversarial term") {
    const Tensor half = torch::zeros({5}, kF64);
    CHECK(tempo_generator_term(half).item<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(tempo_critic_loss(half, half).item<double>() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("random case matches a term-by-term scalar expansion") {
    const Tensor ds = randn({6}, rng, 2.0), dt = randn({6}, rng, 2.0);
    const Tensor g = randn({6, 1, 4, 4}, rng), y = randn({6, 1, 4, 4}, rng);
    const std::vector<Tensor> ff = {randn({6, 3, 2, 2}, rng), randn({6, 4, 1, 1}, rng)};
    const std::vector<Tensor> fr = {randn({6, 3, 2, 2}, rng), randn({6, 4, 1, 1}, rng)};
    LossWeights w = LossWeights::defaults(LossKind::Tempo);
    w.feature = {0.3, 0.7};
    const auto t = generator_objective(w, ds, dt, ff, fr, g, y);

    double adv_s = 0, adv_t = 0;
    for (double z : values(ds)) adv_s -= log_sigmoid(z);
    for (double z : values(dt)) adv_t -= log_sigmoid(z);
    adv_s /= 6;
    adv_t /= 6;
    double feat = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      const auto a = values(ff[j]), b = values(fr[j]);
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      feat += w.feature[j] * s / static_cast<double>(a.size());
    }
    const auto gv = values(g), yv = values(y);
    double l1 = 0;
    for (std::size_t i = 0; i < gv.size(); ++i) l1 += std::abs(gv[i] - yv[i]);
    l1 /= static_cast<double>(gv.size());
    const double expect = adv_s + adv_t + feat + 20.0 * l1;
    CHECK(t.total.item<double>() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(t.feature.item<double>() == doctest::Approx(feat).epsilon(1e-12));

    // Critic side: -log D(real) - log(1 - D(fake)).
    const Tensor real = randn({6}, rng, 2.0);
    double d = 0;
    const auto rv = values(real), fv = values(ds);
    for (std::size_t i = 0; i < 6; ++i) d += -log_sigmoid(rv[i]) - std::log(1 - sigmoid(fv[i]));
    CHECK(tempo_critic_loss(real, ds).item<double>() == doctest::Approx(d / 6).epsilon(1e-12));
  }
  SUBCASE("without L1 and feature terms the critic loss is the negated minimax value") {
    const Tensor r = randn({7}, rng), f = randn({7}, rng);
    double v = 0;
    const auto rv = values(r), fv = values(f);
    for (std::size_t i = 0; i < 7; ++i) v += std::log(sigmoid(rv[i])) + std::log(1 - sigmoid(fv[i]));
    CHECK(tempo_critic_loss(r, f).item<double>() == doctest::Approx(-v / 7).epsilon(1e-12));
    LossWeights w = LossWeights::defaults(LossKind::Tempo);
    w.l1 = 0;
    const auto t = generator_objective(w, f, Tensor(), {}, {}, randn({7, 1, 2, 2}, rng), randn({7, 1, 2, 2}, rng));
    CHECK(t.total.item<double>() == doctest::Approx(-mean([&] {
                                                      std::vector<double> o;
                                                      for (double z : fv) o.push_back(log_sigmoid(z));
                                                      return o;
                                                    }()))
                                        .epsilon(1e-12));
  }
  SUBCASE("feature loss is invariant to batch permutation") {
    const std::vector<Tensor> a = {randn({5, 3, 2, 2}, rng)}, b = {randn({5, 3, 2, 2}, rng)};
    const Tensor perm = torch::tensor({3, 0, 4, 1, 2});
    const double base = feature_loss(a, b, {1.0}).item<double>();
    const double permuted = feature_loss({a[0].index_select(0, perm)}, {b[0].index_select(0, perm)}, {1.0}).item<double>();
    CHECK(permuted == doctest::Approx(base).epsilon(1e-14));
  }
}

TEST_CASE("L1 term is zero exactly at equality") {
  std::mt19937_64 rng(4);
  const Tensor y = randn({3, 1, 5, 5}, rng);
  CHECK(l1_term(y, y).item<double>() == 0.0);
  Tensor z = y.clone();
  z[1][0][2][3] += 1e-9;
  CHECK(l1_term(z, y).item<double>() > 0.0);
}

TEST_CASE("least-squares objective") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(lsgan_critic_loss(torch::full({3}, inf, kF64), torch::full({3}, -inf, kF64)).item<double>() == 0.0);
  CHECK(lsgan_critic_loss(torch::zeros({4}, kF64), torch::zeros({4}, kF64)).item<double>() == 0.25);
  std::mt19937_64 rng(5);
  const Tensor r = randn({9}, rng), f = randn({9}, rng);
  double d = 0, g = 0;
  for (double z : values(r)) d += 0.5 * (sigmoid(z) - 1) * (sigmoid(z) - 1) / 9;
  for (double z : values(f)) {
    d += 0.5 * sigmoid(z) * sigmoid(z) / 9;
    g += 0.5 * (sigmoid(z) - 1) * (sigmoid(z) - 1) / 9;
  }
  CHECK(lsgan_critic_loss(r, f).item<double>() == doctest::Approx(d).epsilon(1e-12));
  CHECK(lsgan_generator_term(f).item<double>() == doctest::Approx(g).epsilon(1e-12));
}

TEST_CASE("gradient penalty") {
  std::mt19937_64 rng(6);
  SUBCASE("unit-slope linear critic has zero penalty") {
    const Tensor a = torch::full({4}, 0.5, kF64);  // |a| = 1 exactly
    const CriticFn lin = [&](const Tensor& z) { return torch::matmul(z.flatten(1), a); };
    const auto gp = gradient_penalty(lin, randn({6, 1, 2, 2}, rng), randn({6, 1, 2, 2}, rng),
                                     draw_mix_weights(6, rng, torch::kFloat64));
    CHECK(gp.penalty.item<double>() == 0.0);
  }
  SUBCASE("R endpoints select fake and real") {
    const Tensor real = randn({3, 4}, rng), fake = randn({3, 4}, rng);
    const CriticFn sum = [](const Tensor& z) { return z.sum(1); };
    CHECK(torch::equal(gradient_penalty(sum, real, fake, torch::zeros({3}, kF64)).interpolate, fake));
    CHECK(torch::equal(gradient_penalty(sum, real, fake, torch::ones({3}, kF64)).interpolate, real));
    const auto mixed = gradient_penalty(sum, real, fake, torch::tensor({0.0, 1.0, 0.25}, kF64)).interpolate;
    CHECK(torch::equal(mixed[0], fake[0]));
    CHECK(torch::equal(mixed[1], real[1]));
  }
  SUBCASE("R is drawn per sample") {
    const Tensor r = draw_mix_weights(1000, rng, torch::kFloat64);
    CHECK(r.min().item<double>() >= 0.0);
    CHECK(r.max().item<double>() < 1.0);
    CHECK(std::abs(r.mean().item<double>() - 0.5) < 0.05);
    CHECK(std::get<0>(torch::unique_dim(r, 0)).size(0) == 1000);
  }
  SUBCASE("analytic gradients match central differences on 100 tiny critics") {
    int checked = 0;
    double worst_input = 0, worst_param = 0;
    for (int inst = 0; inst < 100; ++inst) {
      TinyCritic c = tiny_critic(rng, 6, true);
      const CriticFn fn = [&](const Tensor& z) { return c(z); };
      const Tensor real = randn({3, 6}, rng), fake = randn({3, 6}, rng);
      const Tensor r = draw_mix_weights(3, rng, torch::kFloat64);
      const auto gp = gradient_penalty(fn, real, fake, r);

      // Input gradient norm per sample vs central differences of the scalar critic.
      const double h = 1e-6;
      for (int s = 0; s < 3; ++s) {
        std::vector<double> z = values(gp.interpolate[s]);
        double sq = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
          std::vector<double> zp = z, zm = z;
          zp[i] += h;
          zm[i] -= h;
          const double d = (c.scalar(zp) - c.scalar(zm)) / (2 * h);
          sq += d * d;
        }
        const double fd = std::sqrt(sq), an = gp.grad_norms[s].item<double>();
        worst_input = std::max(worst_input, std::abs(fd - an) / std::max(fd, 1e-12));
      }

      // Second-order path: d(penalty)/d(W1) through the input gradient.
      const Tensor dw = torch::autograd::grad({gp.penalty}, {c.w1})[0];
      auto penalty_at = [&](int64_t k, int64_t i, double delta) {
        TinyCritic p{c.w1.detach().clone(), c.b1.detach(), c.w2.detach(), c.b2};
        p.w1[k][i] += delta;
        const Tensor z = gp.interpolate.detach().clone().requires_grad_(true);
        const Tensor g = torch::autograd::grad({p(z).sum()}, {z})[0];
        return (g.norm(2, 1) - 1).pow(2).mean().item<double>();
      };
      const int64_t k = inst % 8, i = inst % 6;
      const double fd = (penalty_at(k, i, h) - penalty_at(k, i, -h)) / (2 * h);
      const double an = dw[k][i].item<double>();
      worst_param = std::max(worst_param, std::abs(fd - an) / std::max(std::abs(fd), 1e-6));
      ++checked;
    }
    MESSAGE("worst relative error: input gradient ", worst_input, ", penalty parameter gradient ", worst_param);
    CHECK(checked == 100);
    CHECK(worst_input < 1e-3);
    CHECK(worst_param < 1e-3);
  }
  SUBCASE("critic objective adds the weighted penalty") {
    TinyCritic c = tiny_critic(rng, 4);
    const CriticFn fn = [&](const Tensor& z) { return c(z); };
    const Tensor real = randn({5, 4}, rng), fake = randn({5, 4}, rng);
    std::mt19937_64 r1(9), r2(9);
    const auto terms = critic_objective(LossWeights::defaults(LossKind::WganGp), fn, real, fake, r1);
    const auto gp = gradient_penalty(fn, real, fake, draw_mix_weights(5, r2, torch::kFloat64));
    const double expect = (fn(fake).mean() - fn(real).mean()).item<double>() + 10.0 * gp.penalty.item<double>();
    CHECK(terms.loss.item<double>() == doctest::Approx(expect).epsilon(1e-12));
    CHECK_FALSE(critic_objective(LossWeights::defaults(LossKind::Tempo), fn, real, fake, r1).penalty.defined());
  }
  SUBCASE("non-finite values are reported") {
    CHECK_THROWS_AS(require_finite(torch::tensor({1.0, std::nan("")}), "loss"), NumericalError);
    CHECK_NOTHROW(require_finite(torch::tensor({1.0, 2.0}), "loss"));
  }
}
