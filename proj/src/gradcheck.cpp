#include "fanc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fanc/errors.hpp"
#include "fanc/training.hpp"

namespace fanc {

double GradientCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& g : groups) worst = std::max(worst, g.max_relative_error);
  return worst;
}

GradientCheckReport finite_difference_check(const Objective& f, const std::vector<Array>& point,
                                            const std::vector<Array>& analytic,
                                            const std::vector<std::string>& names, double step,
                                            double tolerance) {
  FANC_REQUIRE(point.size() == analytic.size() && point.size() == names.size(),
               "finite_difference_check: group count mismatch");
  FANC_REQUIRE(step > 0.0, "finite_difference_check: step must be positive");
  GradientCheckReport report;
  report.tolerance = tolerance;
  std::vector<Array> x = point;
  for (std::size_t g = 0; g < x.size(); ++g) {
    FANC_REQUIRE(x[g].shape() == analytic[g].shape(),
                 "finite_difference_check: analytic gradient shape mismatch for " + names[g]);
    GroupError err{names[g], 0.0, 0};
    for (std::size_t i = 0; i < x[g].size(); ++i) {
      const double original = x[g][i];
      x[g][i] = original + step;
      const double plus = f(x);
      x[g][i] = original - step;
      const double minus = f(x);
      x[g][i] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        report.failure = "non-finite objective when perturbing " + names[g] + "[" +
                         std::to_string(i) + "]";
        report.groups.push_back(err);
        return report;
      }
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = analytic[g][i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (rel > err.max_relative_error) {
        err.max_relative_error = rel;
        err.worst_index = i;
      }
    }
    report.groups.push_back(err);
  }
  report.passed = report.max_relative_error() < tolerance;
  return report;
}

GradcheckInstance make_gradcheck_instance(const GradcheckInstanceConfig& config) {
  FANC_REQUIRE(config.dims.n_items >= 2, "gradcheck instance: need at least 2 items");
  std::mt19937_64 rng(config.seed);
  GradcheckInstance inst;
  inst.model = ModelParameters::initialize(config.dims, rng());
  // Spread the items and masses so gravity and the softmax both matter.
  std::normal_distribution<double> spread(0.0, 1.0);
  for (double& v : inst.model.weights.embeddings.values()) v = spread(rng);
  std::uniform_real_distribution<double> mass(-0.5, 0.5);
  for (double& v : inst.model.weights.log_mass.values()) v += mass(rng);

  std::uniform_int_distribution<std::size_t> item(0, config.dims.n_items - 1);
  std::uniform_real_distribution<double> interval(1.05, 1.5);
  for (std::size_t s = 0; s < config.n_sequences; ++s) {
    BehaviourSequence seq;
    seq.id = std::to_string(s);
    double t = 0.0;
    seq.steps.push_back({item(rng), t});
    for (std::size_t j = 0; j < config.L; ++j) {
      t += interval(rng);
      seq.steps.push_back({item(rng), t});
    }
    inst.sequences.push_back(std::move(seq));
  }
  inst.options.steps_per_unit = config.steps_per_unit;
  inst.options.gravity.epsilon = config.epsilon;
  inst.options.gravity.clamp = config.clamp;
  return inst;
}

GradientCheckReport check_model_gradients(const GradcheckInstance& instance, double step,
                                          double tolerance) {
  const auto analytic = loss_and_gradient(instance.model, instance.sequences, instance.options);
  std::vector<Array> point, grads;
  std::vector<std::string> names;
  instance.model.weights.visit([&](std::string_view name, const Array& a) {
    names.emplace_back(name);
    point.push_back(a);
  });
  analytic.gradient.visit([&](std::string_view, const Array& g) { grads.push_back(g); });

  ModelParameters probe = instance.model;
  auto objective = [&](const std::vector<Array>& x) {
    std::size_t k = 0;
    probe.weights.visit([&](std::string_view, Array& a) { a = x[k++]; });
    return total_loss(probe, instance.sequences, instance.options);
  };
  return finite_difference_check(objective, point, grads, names, step, tolerance);
}

}  // namespace fanc
