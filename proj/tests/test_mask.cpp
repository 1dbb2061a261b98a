#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "dctcrn/mask.h"
#include "dctcrn/rng.h"
#include "doctest.h"

using namespace dctcrn;

namespace {

Mat<double> random_mat(int r, int c, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Mat<double> m(r, c);
  Rng rng(seed);
  for (auto& v : m.v) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("ideal mask ratio, clamp and tiny-denominator guard") {
  Mat<double> s(1, 5), y(1, 5);
  s.v = {2.0, -3.0, 0.0, 300.0, -300.0};
  y.v = {1.0, 1e-12, 1e-12, 1.0, 1.0};
  auto m = ideal_cosine_mask(s, y, 100.0);
  CHECK(m.v[0] == 2.0);
  CHECK(m.v[1] == -100.0);  // guard: sign(clean) * clamp
  CHECK(m.v[2] == 0.0);     // sign(0) = 0
  CHECK(m.v[3] == 100.0);   // ratio clipped
  CHECK(m.v[4] == -100.0);

  CHECK_THROWS(ideal_cosine_mask(s, y, 0.0));
}

TEST_CASE("ideal mask recovers the clean spectrogram away from the guards") {
  auto s = random_mat(4, 16, 100);
  auto y = random_mat(4, 16, 101);
  for (auto& v : y.v) v += (v >= 0 ? 0.5 : -0.5);  // keep |y| >= 0.5
  auto m = ideal_cosine_mask(s, y, 100.0);
  for (size_t i = 0; i < s.v.size(); ++i)
    CHECK(m.v[i] * y.v[i] == doctest::Approx(s.v[i]).epsilon(1e-12));
}

TEST_CASE("mask activations hit known values") {
  CHECK(mask_activation(MaskVariant::Sigmoid, 0.0, 0.25) == doctest::Approx(0.5));
  CHECK(mask_activation(MaskVariant::Sigmoid, 1.0, 0.25) ==
        doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(mask_activation(MaskVariant::Tanh, 1.0, 0.25) ==
        doctest::Approx(0.7615941559557649).epsilon(1e-14));
  CHECK(mask_activation(MaskVariant::Tanh, 0.0, 0.25) == 0.0);
  CHECK(mask_activation(MaskVariant::PReLU, 2.0, 0.25) == 2.0);
  CHECK(mask_activation(MaskVariant::PReLU, -2.0, 0.25) == -0.5);
  CHECK(mask_activation(MaskVariant::Identity, -2.0, 0.25) == -2.0);
}

TEST_CASE("identity variant applies raw mask values") {
  auto s = random_mat(3, 8, 200);
  auto y = random_mat(3, 8, 201);
  for (auto& v : y.v) v += (v >= 0 ? 0.5 : -0.5);
  auto icm = ideal_cosine_mask(s, y, 100.0);
  auto est = apply_mask(icm, y, MaskVariant::Identity);
  for (size_t i = 0; i < s.v.size(); ++i)
    CHECK(est.v[i] == doctest::Approx(s.v[i]).epsilon(1e-12));
}

TEST_CASE("mask backward agrees with finite differences") {
  const double h = 1e-6;
  auto logits = random_mat(4, 6, 300, -2.0, 2.0);
  auto noisy = random_mat(4, 6, 301, -2.0, 2.0);
  auto r = random_mat(4, 6, 302);  // random projection defines the loss
  const double alpha = 0.3;

  for (MaskVariant v :
       {MaskVariant::PReLU, MaskVariant::Sigmoid, MaskVariant::Tanh, MaskVariant::Identity}) {
    CAPTURE(mask_variant_name(v));
    auto loss = [&](const Mat<double>& lg, double a) {
      auto est = apply_mask(lg, noisy, v, a);
      double acc = 0.0;
      for (size_t i = 0; i < est.v.size(); ++i) acc += r.v[i] * est.v[i];
      return acc;
    };

    Mat<double> d_logits;
    double d_alpha = 0.0;
    apply_mask_backward(logits, noisy, v, alpha, r, d_logits, &d_alpha);

    for (size_t i = 0; i < logits.v.size(); ++i) {
      auto pert = logits;
      pert.v[i] += h;
      const double fp = loss(pert, alpha);
      pert.v[i] -= 2 * h;
      const double fm = loss(pert, alpha);
      const double fd = (fp - fm) / (2 * h);
      CHECK(std::abs(fd - d_logits.v[i]) < 1e-6 * std::max({1.0, std::abs(fd)}));
    }
    if (v == MaskVariant::PReLU) {
      const double fd = (loss(logits, alpha + h) - loss(logits, alpha - h)) / (2 * h);
      CHECK(std::abs(fd - d_alpha) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("amplitude clip keeps estimates inside the noisy envelope") {
  auto est = random_mat(4, 8, 400, -3.0, 3.0);
  auto noisy = random_mat(4, 8, 401, -1.0, 1.0);
  auto clipped = clip_postprocess(est, noisy);
  for (size_t i = 0; i < est.v.size(); ++i) {
    CHECK(std::abs(clipped.v[i]) <= std::abs(noisy.v[i]) + 1e-15);
    if (std::abs(est.v[i]) <= std::abs(noisy.v[i]))
      CHECK(clipped.v[i] == est.v[i]);
    else
      CHECK(clipped.v[i] == doctest::Approx(sign_of(est.v[i]) * std::abs(noisy.v[i])));
  }
  // idempotent
  auto twice = clip_postprocess(clipped, noisy);
  for (size_t i = 0; i < est.v.size(); ++i) CHECK(twice.v[i] == clipped.v[i]);
}
