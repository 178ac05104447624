#pragma once

// Adversarial and cycle-consistency objectives on plain numbers.
//
// The value function of the two-player game is
//
//   V(D, G) = E_x[log D(x)] + E_z[log(1 - D(G(z)))]
//
// estimated here by batch means of discriminator outputs. The discriminator
// maximizes V (its loss is -V); the generator minimizes it. The cycle penalty
// is the mean absolute difference between an image and its reconstruction
// through both maps. All logarithms are natural.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lunarkit/raster.hpp"

namespace lunarkit::gan {

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before any log.
inline constexpr double kProbEpsilon = 1e-7;
inline constexpr double kDefaultLambdaCyc = 10.0;

struct ProbBatch {
  std::vector<double> d_real;  // D(x), x ~ p_data
  std::vector<double> d_fake;  // D(G(z)), z ~ p_z
};

enum class GeneratorVariant { saturating, non_saturating };

// Throws Error{RangeError} outside [0, 1] and Error{NonFinite} for NaN.
double clamp_probability(double p);

// mean(log d_real) + mean(log(1 - d_fake)). Throws Error{EmptyBatch}.
double gan_value_estimate(const ProbBatch& b);
// -gan_value_estimate(b)
double discriminator_loss(const ProbBatch& b);
// saturating: mean(log(1 - d)); non_saturating: -mean(log d).
double generator_loss(std::span<const double> d_fake, GeneratorVariant variant);
// d generator_loss / d d_fake[i]; zero where clamping is active.
std::vector<double> generator_loss_gradient(std::span<const double> d_fake, GeneratorVariant variant);

// Mean absolute difference. Throws Error{ShapeMismatch}.
double cycle_loss(std::span<const double> x, std::span<const double> x_rec);
// Shapes must agree in width, height and bands.
double cycle_loss(const ImageRaster& x, const ImageRaster& x_rec);

// adv_g_xy + adv_g_yx + lambda_cyc * (cyc_fwd + cyc_bwd).
// Throws Error{NonFinite, InvalidArgument (lambda_cyc < 0)}.
double combined_objective(double adv_g_xy, double adv_g_yx, double cyc_fwd, double cyc_bwd, double lambda_cyc);

// One training step's losses. Both translation directions are summed:
// value_estimate and d_loss add the two games, g_loss adds the two
// generators' adversarial losses, so total = g_loss + lambda_cyc *
// (cycle_forward + cycle_backward).
struct LossReport {
  double value_estimate = 0.0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double cycle_forward = 0.0;
  double cycle_backward = 0.0;
  double total = 0.0;
  double lambda_cyc = kDefaultLambdaCyc;
};

// batch_y: D_Y on real y and on G(x); batch_x: D_X on real x and on F(y).
LossReport make_loss_report(const ProbBatch& batch_y, const ProbBatch& batch_x, double cycle_forward,
                            double cycle_backward, double lambda_cyc, GeneratorVariant variant);

nlohmann::ordered_json to_json(const LossReport& r);
// Requires the seven LossReport fields as numbers; other keys are ignored.
// Throws Error{SchemaError}.
LossReport loss_report_from_json(const nlohmann::json& j);

struct LossCheck {
  bool ok = true;
  double recomputed_total = 0.0;
  std::string problem;
};

inline constexpr double kLossCheckRelTol = 1e-9;

// Recomputes total with combined_objective(g_loss, 0, ...) and flags a
// relative difference above kLossCheckRelTol or a negative cycle loss.
LossCheck check_loss_report(const LossReport& r);

}  // namespace lunarkit::gan
