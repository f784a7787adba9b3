#include "fanc/unconscious.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fanc/errors.hpp"
#include "fanc/kernels.hpp"
#include "ops_detail.hpp"

namespace fanc {

double potential(const GravityField& field, const Array& u) {
  const std::size_t d = field.dim();
  FANC_REQUIRE(d > 2, "potential: requires d_u > 2, got " + std::to_string(d));
  FANC_REQUIRE(u.size() == d, "potential: position dimension mismatch");
  const std::size_t n = field.embeddings.rows();
  Array sq{Shape(n)};
  kernels::active().squared_distances(field.embeddings.data(), n, d, u.data(), sq.data());
  const double eps2 = field.options.epsilon * field.options.epsilon;
  const double power = 0.5 * static_cast<double>(d - 2);
  double phi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    phi -= std::exp(field.log_mass[i]) / (static_cast<double>(d - 2) * std::pow(sq[i] + eps2, power));
  return phi;
}

double specific_energy(const GravityField& field, const Array& h) {
  const std::size_t d = field.dim();
  return 0.5 * squared_norm(slice(h, d, d)) + potential(field, slice(h, 0, d));
}

FloatPlan per_interval_plan(double dt, double steps_per_unit) {
  FANC_REQUIRE(dt >= 0.0, "float: negative interval");
  FANC_REQUIRE(steps_per_unit > 0.0, "float: steps_per_unit must be positive");
  if (dt == 0.0) return {};
  // The relative slack keeps products like 10 * 0.30000000000000004 from
  // rounding up to an extra step.
  const double raw = steps_per_unit * dt * (1.0 - 1e-12);
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(raw)));
  return {dt / static_cast<double>(n), n, n};
}

std::size_t grid_index(double dt, double pad, std::size_t steps_for_pad) {
  FANC_REQUIRE(steps_for_pad >= 1 && pad > 0.0, "grid: pad and steps must be positive");
  // Intervals recovered by differencing absolute times may overshoot by an ulp.
  const double slack = 1e-9 * pad;
  FANC_REQUIRE(dt >= -slack && dt <= pad + slack, "grid: interval " + std::to_string(dt) +
                                           " outside [0, pad=" + std::to_string(pad) + "]");
  const double step = pad / static_cast<double>(steps_for_pad);
  return std::min(steps_for_pad, static_cast<std::size_t>(std::llround(std::max(dt, 0.0) / step)));
}

FloatPlan grid_plan(double dt, double pad, std::size_t steps_for_pad) {
  const std::size_t k = grid_index(dt, pad, steps_for_pad);
  return {pad / static_cast<double>(steps_for_pad), k, steps_for_pad};
}

Array float_state(const GravityField& field, const Array& h_shift, double dt,
                  double steps_per_unit) {
  return float_with_plan(field, h_shift, per_interval_plan(dt, steps_per_unit));
}

Array float_state_steps(const GravityField& field, const Array& h_shift, double dt,
                        std::size_t n_steps) {
  FANC_REQUIRE(dt >= 0.0 && n_steps >= 1, "float: need dt >= 0 and n_steps >= 1");
  if (dt == 0.0) return h_shift;
  return float_with_plan(field, h_shift, {dt / static_cast<double>(n_steps), n_steps, n_steps});
}

std::vector<Array> float_batch_padded(const GravityField& field, const std::vector<Array>& h_batch,
                                      const std::vector<double>& dts, double pad,
                                      std::size_t steps_for_pad) {
  FANC_REQUIRE(h_batch.size() == dts.size(), "float_batch_padded: batch/interval count mismatch");
  std::vector<std::size_t> index(dts.size());
  for (std::size_t b = 0; b < dts.size(); ++b) index[b] = grid_index(dts[b], pad, steps_for_pad);

  const double step = pad / static_cast<double>(steps_for_pad);
  auto f = [&](const Array& y) { return phase_velocity(field, y); };
  std::vector<Array> out;
  out.reserve(h_batch.size());
  for (std::size_t b = 0; b < h_batch.size(); ++b) {
    const auto trajectory = rk4_steps(f, h_batch[b], step, steps_for_pad);
    out.push_back(trajectory[index[b]]);
  }
  return out;
}

}  // namespace fanc
