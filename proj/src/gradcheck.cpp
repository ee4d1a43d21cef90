#include "metatag/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "metatag/error.hpp"

namespace metatag {

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g;
  const Tensor& v = g.value(loss(g));
  if (v.size() != 1) throw ArgumentError("grad_check: loss is not scalar");
  return v[0];
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> parameters,
                           double eps) {
  if (!(eps > 0.0)) throw ArgumentError("grad_check: step must be positive");
  for (Parameter* p : parameters) p->zero_grad();
  {
    Graph g;
    g.backward(loss(g));
  }
  GradCheckReport report;
  for (Parameter* p : parameters) {
    const Tensor analytic = p->grad();
    GradCheckReport::Entry entry{p->name(), 0.0};
    for (std::size_t i = 0; i < p->value().size(); ++i) {
      const double saved = p->value()[i];
      p->value()[i] = saved + eps;
      const double up = evaluate(loss);
      p->value()[i] = saved - eps;
      const double down = evaluate(loss);
      p->value()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("grad_check: non-finite loss probing " + p->name() + "[" +
                           std::to_string(i) + "]");
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      entry.max_error = std::max(entry.max_error, err);
    }
    report.max_error = std::max(report.max_error, entry.max_error);
    report.per_parameter.push_back(std::move(entry));
  }
  return report;
}

}  // namespace metatag
