#include "mpcm/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mpcm {

namespace {

double check_finite(double v) {
  if (!std::isfinite(v))
    throw NumericError("grad_check: non-finite function value " + std::to_string(v));
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor(Tape&)>& f,
                           const std::vector<std::pair<std::string, Tensor>>& points, double step,
                           double tol) {
  GradCheckReport report;
  report.tolerance = tol;

  // Analytic pass.
  std::vector<std::vector<double>> analytic;
  {
    Tape tape(true);
    Tensor loss = f(tape);
    if (!loss.is_scalar())
      throw InvalidInputError("grad_check: function under test must return a scalar");
    check_finite(static_cast<double>(loss.item()));
    for (const auto& [name, t] : points) {
      (void)name;
      Tensor(t).zero_grad();
    }
    tape.backward(loss);
    analytic.reserve(points.size());
    for (const auto& [name, t] : points) {
      (void)name;
      Tensor tt(t);
      analytic.emplace_back(tt.grad().begin(), tt.grad().end());
    }
  }

  auto eval = [&f]() {
    Tape tape(false);
    Tensor loss = f(tape);
    return check_finite(static_cast<double>(loss.item()));
  };

  // Numeric pass, one coordinate at a time.
  for (std::size_t p = 0; p < points.size(); ++p) {
    Tensor t = points[p].second;
    real_t* vals = t.data();
    for (std::size_t c = 0; c < t.size(); ++c) {
      const real_t saved = vals[c];
      vals[c] = saved + static_cast<real_t>(step);
      const double fp = eval();
      vals[c] = saved - static_cast<real_t>(step);
      const double fm = eval();
      vals[c] = saved;

      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[p][c];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      ++report.coordinates_checked;
      if (err > report.max_error) report.max_error = err;
      if (report.worst.empty() || report.worst.size() < 8 || err > report.worst.back().error) {
        report.worst.push_back({points[p].first, c, a, numeric, err});
        std::sort(report.worst.begin(), report.worst.end(),
                  [](const GradCheckEntry& x, const GradCheckEntry& y) { return x.error > y.error; });
        if (report.worst.size() > 8) report.worst.resize(8);
      }
    }
  }
  report.pass = report.max_error < tol;
  return report;
}

GradCheckReport grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                           const Tensor& point, double step, double tol) {
  auto wrapped = [&f, point](Tape& tape) { return f(tape, point); };
  return grad_check(wrapped, {{"point", point}}, step, tol);
}

}  // namespace mpcm
