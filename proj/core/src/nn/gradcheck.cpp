#include "boneloc/nn/gradcheck.hpp"

#include <cmath>

namespace boneloc::nn {

GradCheckReport gradient_check(const std::function<double()>& loss,
                               const std::function<void()>& compute_grads,
                               const std::vector<Tensor*>& params, double h, double floor) {
  for (Tensor* p : params) {
    p->ensure_grad();
    p->zero_grad();
  }
  compute_grads();

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = *params[pi];
    for (size_t j = 0; j < p.values.size(); ++j) {
      const double saved = p.values[j];
      p.values[j] = saved + h;
      const double lp = loss();
      p.values[j] = saved - h;
      const double lm = loss();
      p.values[j] = saved;

      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = p.grad[j];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_location =
            "param " + std::to_string(pi) + "[" + std::to_string(j) + "] analytic=" +
            std::to_string(analytic) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return report;
}

}  // namespace boneloc::nn
