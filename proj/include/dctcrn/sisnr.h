#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dctcrn/common.h"

namespace dctcrn {

// Scale-invariant SNR in dB. The reference is projected onto the estimate's
// span (s_target = <est,ref>/|ref|^2 * ref) so a pure gain change scores the
// same; the residual is measured against that projection unless
// plain_residual asks for the raw difference est - ref instead.
struct SiSnrOptions {
  bool zero_mean = true;
  double eps = 1e-8;
  double cap_db = 60.0;      // clamp the score; gradient is zero when capped
  bool plain_residual = false;
};

namespace detail {

struct SiSnrParts {
  double value = 0.0;
  bool capped = false;
  double alpha = 0.0;
  double ref_energy = 0.0;  // guarded: |ref|^2 + eps
  double num = 0.0;
  double den = 0.0;
};

template <typename T>
SiSnrParts si_snr_parts(const T* est, const T* ref, size_t n, const SiSnrOptions& opt,
                        std::vector<double>* u_out, std::vector<double>* s_out) {
  require(n > 0, "si_snr: empty signals");
  std::vector<double> u(n), s(n);
  double mu_e = 0.0, mu_r = 0.0;
  if (opt.zero_mean) {
    for (size_t i = 0; i < n; ++i) {
      mu_e += double(est[i]);
      mu_r += double(ref[i]);
    }
    mu_e /= double(n);
    mu_r /= double(n);
  }
  for (size_t i = 0; i < n; ++i) {
    u[i] = double(est[i]) - mu_e;
    s[i] = double(ref[i]) - mu_r;
  }

  SiSnrParts p;
  double dot = 0.0, ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    dot += u[i] * s[i];
    ss += s[i] * s[i];
  }
  p.ref_energy = ss + opt.eps;
  p.alpha = dot / p.ref_energy;
  p.num = p.alpha * p.alpha * ss;
  for (size_t i = 0; i < n; ++i) {
    const double e = u[i] - (opt.plain_residual ? s[i] : p.alpha * s[i]);
    p.den += e * e;
  }
  p.value = 10.0 * std::log10((p.num + opt.eps) / (p.den + opt.eps));
  if (p.value > opt.cap_db) {
    p.value = opt.cap_db;
    p.capped = true;
  } else if (p.value < -opt.cap_db) {
    p.value = -opt.cap_db;
    p.capped = true;
  }
  if (u_out) *u_out = std::move(u);
  if (s_out) *s_out = std::move(s);
  return p;
}

}  // namespace detail

template <typename T>
double si_snr_db(const std::vector<T>& est, const std::vector<T>& ref,
                 const SiSnrOptions& opt = {}) {
  require(est.size() == ref.size(), "si_snr: length mismatch");
  return detail::si_snr_parts(est.data(), ref.data(), est.size(), opt, nullptr, nullptr).value;
}

// Value plus d(si_snr)/d(est). Written, not accumulated.
template <typename T>
double si_snr_db_grad(const std::vector<T>& est, const std::vector<T>& ref,
                      const SiSnrOptions& opt, std::vector<T>& grad) {
  require(est.size() == ref.size(), "si_snr: length mismatch");
  const size_t n = est.size();
  grad.assign(n, T(0));
  std::vector<double> u, s;
  const auto p = detail::si_snr_parts(est.data(), ref.data(), n, opt, &u, &s);
  if (p.capped) return p.value;

  const double scale = 10.0 / std::log(10.0);
  const double ss = p.ref_energy - opt.eps;
  std::vector<double> g(n);
  // d(num)/du comes through alpha only: num = alpha^2 |s|^2.
  const double dnum_coef = 2.0 * p.alpha * ss / p.ref_energy / (p.num + opt.eps);
  if (opt.plain_residual) {
    for (size_t i = 0; i < n; ++i) {
      const double e = u[i] - s[i];
      g[i] = scale * (dnum_coef * s[i] - 2.0 * e / (p.den + opt.eps));
    }
  } else {
    double es = 0.0;
    for (size_t i = 0; i < n; ++i) es += (u[i] - p.alpha * s[i]) * s[i];
    for (size_t i = 0; i < n; ++i) {
      const double e = u[i] - p.alpha * s[i];
      const double dden = 2.0 * e - 2.0 * (es / p.ref_energy) * s[i];
      g[i] = scale * (dnum_coef * s[i] - dden / (p.den + opt.eps));
    }
  }
  if (opt.zero_mean) {
    double mean_g = 0.0;
    for (double v : g) mean_g += v;
    mean_g /= double(n);
    for (size_t i = 0; i < n; ++i) grad[i] = T(g[i] - mean_g);
  } else {
    for (size_t i = 0; i < n; ++i) grad[i] = T(g[i]);
  }
  return p.value;
}

// Plain (scale-sensitive) SNR against a reference, for evaluation reports.
template <typename T>
double snr_db(const std::vector<T>& est, const std::vector<T>& ref, double eps = 1e-8) {
  require(est.size() == ref.size(), "snr: length mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    const double r = double(ref[i]);
    const double d = double(est[i]) - r;
    num += r * r;
    den += d * d;
  }
  return 10.0 * std::log10((num + eps) / (den + eps));
}

}  // namespace dctcrn
