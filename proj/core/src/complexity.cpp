#include "seqlab/complexity.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace seqlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxTerms = 10'000'000;

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_weight_s(std::size_t i, double R) {
  return 1.75 * std::log(static_cast<double>(i + 1)) + static_cast<double>(i) * std::log(R);
}

// Truncate an entire function's expansion for evaluation radius R.
TaylorSeries truncated(std::string name, std::function<double(std::size_t)> log_abs,
                       std::function<double(std::size_t)> sign, double R, double peak) {
  TaylorSeries s;
  s.name = std::move(name);
  double partial = 0.0;
  for (std::size_t i = 0;; ++i) {
    const double la = log_abs(i);
    const double c = la == kNegInf ? 0.0 : sign(i) * std::exp(la);
    s.coeffs.push_back(c);
    if (la != kNegInf) partial += std::exp(log_weight_s(i, R) + la);
    // Tail test on the first nonzero coefficient after i.
    std::size_t j = i + 1;
    while (log_abs(j) == kNegInf && j < i + 4) ++j;
    const double next = log_weight_s(j, R) + log_abs(j);
    if (next < std::log(1e-16 * std::max(1.0, partial)) && static_cast<double>(j) > peak) break;
    if (i > kMaxTerms) throw std::runtime_error("taylor_preset: truncation did not converge");
  }
  s.log_abs_coeff = std::move(log_abs);
  return s;
}

}  // namespace

double TaylorSeries::operator()(double z) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double TaylorSeries::derivative(double z) const noexcept {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) acc = acc * z + static_cast<double>(i) * coeffs[i];
  return acc;
}

std::vector<std::string> taylor_preset_names() {
  return {"monomial:1", "monomial:2", "monomial:3", "sin", "cos", "exp", "quadratic_2z_minus_z2", "cos_pi"};
}

TaylorSeries taylor_preset(std::string_view name, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("taylor_preset: R must be positive");
  auto log_fact = [](std::size_t i) { return std::lgamma(static_cast<double>(i) + 1.0); };
  if (name.starts_with("monomial:")) {
    const std::string_view digits = name.substr(9);
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size() || n > 10000) {
      throw std::invalid_argument("taylor_preset: bad monomial degree in '" + std::string(name) + "'");
    }
    TaylorSeries s{std::string(name), std::vector<double>(n + 1, 0.0), {}};
    s.coeffs[n] = 1.0;
    return s;
  }
  if (name == "quadratic_2z_minus_z2") return TaylorSeries{std::string(name), {0.0, 2.0, -1.0}, {}};
  if (name == "exp") {
    return truncated("exp", [=](std::size_t i) { return -log_fact(i); },
                     [](std::size_t) { return 1.0; }, R, R);
  }
  if (name == "sin") {
    return truncated(
        "sin", [=](std::size_t i) { return i % 2 == 1 ? -log_fact(i) : kNegInf; },
        [](std::size_t i) { return (i / 2) % 2 == 0 ? 1.0 : -1.0; }, R, R);
  }
  if (name == "cos") {
    return truncated(
        "cos", [=](std::size_t i) { return i % 2 == 0 ? -log_fact(i) : kNegInf; },
        [](std::size_t i) { return (i / 2) % 2 == 0 ? 1.0 : -1.0; }, R, R);
  }
  if (name == "cos_pi") {
    const double log_pi = std::log(std::numbers::pi);
    return truncated(
        "cos_pi",
        [=](std::size_t i) {
          return i % 2 == 0 ? static_cast<double>(i) * log_pi - log_fact(i) : kNegInf;
        },
        [](std::size_t i) { return (i / 2) % 2 == 0 ? 1.0 : -1.0; }, R, R * std::numbers::pi);
  }
  throw std::invalid_argument("taylor_preset: unknown preset '" + std::string(name) + "'");
}

ComplexityReport complexity_report(const TaylorSeries& series, double R, double eps) {
  if (!(R > 0.0)) throw std::invalid_argument("complexity_report: R must be positive");
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("complexity_report: eps must lie in (0, 1)");
  for (double c : series.coeffs) {
    if (!std::isfinite(c)) throw std::invalid_argument("complexity_report: non-finite coefficient");
  }
  ComplexityReport rep;
  rep.name = series.name;
  rep.R = R;
  rep.eps = eps;
  rep.K = series.K();

  const double log_scale = std::log(kComplexityScale);
  const double log_cr = log_scale + std::log(R);
  const double log_log_inv_eps = std::log(std::log(1.0 / eps));

  auto log_abs = [&](std::size_t i) {
    if (series.log_abs_coeff) return series.log_abs_coeff(i);
    if (i >= series.coeffs.size() || series.coeffs[i] == 0.0) return kNegInf;
    return std::log(std::abs(series.coeffs[i]));
  };
  auto log_eps_term = [&](std::size_t i, double la) {
    if (la == kNegInf) return kNegInf;
    const double first = static_cast<double>(i) * log_cr + la;
    if (i == 0) return log_add(first, la);
    const double di = static_cast<double>(i);
    const double second = di * (0.5 * log_log_inv_eps - 0.5 * std::log(di) + log_cr) + la;
    return log_add(first, second);
  };

  // C_s over the stored coefficients.
  double log_s = kNegInf;
  for (std::size_t i = 0; i <= rep.K && !series.coeffs.empty(); ++i) {
    const double la = series.coeffs[i] == 0.0 ? kNegInf : std::log(std::abs(series.coeffs[i]));
    if (la != kNegInf) log_s = log_add(log_s, log_weight_s(i, R) + la);
  }
  rep.log_c_s = log_s == kNegInf ? kNegInf : log_s + log_scale;
  rep.c_s = std::exp(rep.log_c_s);

  // C_eps, continuing past K for entire functions.
  double log_e = kNegInf;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0;; ++i) {
    if (!series.log_abs_coeff && i > rep.K) break;
    const double t = log_eps_term(i, log_abs(i));
    log_e = log_add(log_e, t);
    if (series.log_abs_coeff && i > rep.K && t != kNegInf) {
      if (t < prev && t < log_e - 50.0) break;
      prev = t;
    }
    if (i > kMaxTerms) throw std::runtime_error("complexity_report: C_eps sum did not converge");
  }
  rep.log_c_eps = log_e;
  rep.c_eps = std::exp(log_e);

  // Truncation tail of C_s.
  if (series.log_abs_coeff) {
    double log_tail = kNegInf;
    prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = rep.K + 1; i < rep.K + kMaxTerms; ++i) {
      const double la = series.log_abs_coeff(i);
      if (la == kNegInf) continue;
      const double t = log_weight_s(i, R) + la;
      log_tail = log_add(log_tail, t);
      if (t < prev && t < log_tail - 50.0) break;
      prev = t;
    }
    rep.truncation_tail_bound = std::exp(log_tail + log_scale);
  }
  return rep;
}

}  // namespace seqlab
