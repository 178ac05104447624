#include "lunarkit/gan_math.hpp"

#include <algorithm>
#include <cmath>

#include "lunarkit/error.hpp"
#include "lunarkit/kernels.hpp"

namespace lunarkit::gan {

namespace {

double mean_log(std::span<const double> ps) {
  double sum = 0.0;
  for (double p : ps) sum += std::log(clamp_probability(p));
  return sum / static_cast<double>(ps.size());
}

double mean_log_complement(std::span<const double> ps) {
  double sum = 0.0;
  for (double p : ps) sum += std::log(1.0 - clamp_probability(p));
  return sum / static_cast<double>(ps.size());
}

void require_non_empty(std::span<const double> v, const char* what) {
  if (v.empty()) fail(ErrorCode::EmptyBatch, std::string(what) + " is empty");
}

}  // namespace

double clamp_probability(double p) {
  if (std::isnan(p)) fail(ErrorCode::NonFinite, "probability is NaN");
  if (p < 0.0 || p > 1.0) fail(ErrorCode::RangeError, "probability " + std::to_string(p) + " outside [0, 1]");
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double gan_value_estimate(const ProbBatch& b) {
  require_non_empty(b.d_real, "d_real");
  require_non_empty(b.d_fake, "d_fake");
  return mean_log(b.d_real) + mean_log_complement(b.d_fake);
}

double discriminator_loss(const ProbBatch& b) { return -gan_value_estimate(b); }

double generator_loss(std::span<const double> d_fake, GeneratorVariant variant) {
  require_non_empty(d_fake, "d_fake");
  return variant == GeneratorVariant::saturating ? mean_log_complement(d_fake) : -mean_log(d_fake);
}

std::vector<double> generator_loss_gradient(std::span<const double> d_fake, GeneratorVariant variant) {
  require_non_empty(d_fake, "d_fake");
  const double n = static_cast<double>(d_fake.size());
  std::vector<double> grad(d_fake.size(), 0.0);
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    const double p = d_fake[i];
    if (clamp_probability(p) != p) continue;
    grad[i] = variant == GeneratorVariant::saturating ? -1.0 / (n * (1.0 - p)) : -1.0 / (n * p);
  }
  return grad;
}

double cycle_loss(std::span<const double> x, std::span<const double> x_rec) {
  if (x.size() != x_rec.size()) {
    fail(ErrorCode::ShapeMismatch, std::to_string(x.size()) + " vs " + std::to_string(x_rec.size()) + " elements");
  }
  if (x.empty()) fail(ErrorCode::ShapeMismatch, "empty arrays");
  return kernels::omp::abs_diff_sum(x, x_rec) / static_cast<double>(x.size());
}

double cycle_loss(const ImageRaster& x, const ImageRaster& x_rec) {
  if (x.width != x_rec.width || x.height != x_rec.height || x.bands != x_rec.bands) {
    fail(ErrorCode::ShapeMismatch, "raster shapes differ");
  }
  return cycle_loss(std::span<const double>(x.samples), std::span<const double>(x_rec.samples));
}

double combined_objective(double adv_g_xy, double adv_g_yx, double cyc_fwd, double cyc_bwd, double lambda_cyc) {
  for (double v : {adv_g_xy, adv_g_yx, cyc_fwd, cyc_bwd, lambda_cyc}) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "objective input is not finite");
  }
  if (lambda_cyc < 0.0) fail(ErrorCode::InvalidArgument, "lambda_cyc must be non-negative");
  return adv_g_xy + adv_g_yx + lambda_cyc * (cyc_fwd + cyc_bwd);
}

LossReport make_loss_report(const ProbBatch& batch_y, const ProbBatch& batch_x, double cycle_forward,
                            double cycle_backward, double lambda_cyc, GeneratorVariant variant) {
  LossReport r;
  r.value_estimate = gan_value_estimate(batch_y) + gan_value_estimate(batch_x);
  r.d_loss = discriminator_loss(batch_y) + discriminator_loss(batch_x);
  const double g_xy = generator_loss(batch_y.d_fake, variant);
  const double g_yx = generator_loss(batch_x.d_fake, variant);
  r.g_loss = g_xy + g_yx;
  r.cycle_forward = cycle_forward;
  r.cycle_backward = cycle_backward;
  r.lambda_cyc = lambda_cyc;
  r.total = combined_objective(g_xy, g_yx, cycle_forward, cycle_backward, lambda_cyc);
  return r;
}

nlohmann::ordered_json to_json(const LossReport& r) {
  return nlohmann::ordered_json{
      {"value_estimate", r.value_estimate}, {"d_loss", r.d_loss},
      {"g_loss", r.g_loss},                 {"cycle_forward", r.cycle_forward},
      {"cycle_backward", r.cycle_backward}, {"total", r.total},
      {"lambda_cyc", r.lambda_cyc},
  };
}

LossReport loss_report_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::SchemaError, "loss record is not an object");
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) fail(ErrorCode::SchemaError, std::string("missing numeric ") + key);
    return j[key].get<double>();
  };
  LossReport r;
  r.value_estimate = num("value_estimate");
  r.d_loss = num("d_loss");
  r.g_loss = num("g_loss");
  r.cycle_forward = num("cycle_forward");
  r.cycle_backward = num("cycle_backward");
  r.total = num("total");
  r.lambda_cyc = num("lambda_cyc");
  return r;
}

LossCheck check_loss_report(const LossReport& r) {
  LossCheck c;
  if (r.cycle_forward < 0.0 || r.cycle_backward < 0.0) {
    c.ok = false;
    c.problem = "negative cycle loss";
    return c;
  }
  try {
    c.recomputed_total = combined_objective(r.g_loss, 0.0, r.cycle_forward, r.cycle_backward, r.lambda_cyc);
  } catch (const Error& e) {
    c.ok = false;
    c.problem = e.what();
    return c;
  }
  const double diff = std::abs(c.recomputed_total - r.total);
  const double scale = std::max(std::abs(c.recomputed_total), std::abs(r.total));
  if (diff > kLossCheckRelTol * scale) {
    c.ok = false;
    c.problem = "total " + std::to_string(r.total) + " != recomputed " + std::to_string(c.recomputed_total);
  }
  return c;
}

}  // namespace lunarkit::gan
