#include "sidnn/cells.hpp"
#include "sidnn/errors.hpp"

namespace sidnn {

namespace {
void check_probability(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
}
}  // namespace

Vector dropout_mask(std::size_t n, double p, SeededRng& rng) {
  check_probability(p);
  const double keep_scale = 1.0 / (1.0 - p);
  Vector mask(n);
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  return mask;
}

Vector apply_dropout(std::span<const double> x, double p, SeededRng& rng, bool training) {
  check_probability(p);
  Vector out(x.begin(), x.end());
  if (!training || p == 0.0) return out;
  const Vector mask = dropout_mask(x.size(), p, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

}  // namespace sidnn
