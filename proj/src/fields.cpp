#include "gge/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "gge/rng.hpp"

namespace gge {

std::vector<double> synthesize(const FieldSpec& spec, const Graph& g) {
  if (g.n <= 0) throw std::invalid_argument("synthesize: empty graph");
  std::vector<double> x(g.n, 0.0);
  switch (spec.kind) {
    case FieldKind::gaussian_bumps: {
      if (!g.has_locations())
        throw std::invalid_argument("synthesize: gaussian_bumps needs locations");
      if (spec.bumps.empty())
        throw std::invalid_argument("synthesize: gaussian_bumps needs at least one bump");
      for (const auto& b : spec.bumps)
        if (!(b.sigma > 0.0))
          throw std::invalid_argument("synthesize: bump sigma must be positive");
      for (int i = 0; i < g.n; ++i) {
        double v = 0.0;
        for (const auto& b : spec.bumps) {
          double dx = g.locations[i][0] - b.cx;
          double dy = g.locations[i][1] - b.cy;
          v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
        }
        x[i] = v;
      }
      break;
    }
    case FieldKind::linear: {
      if (!g.has_locations())
        throw std::invalid_argument("synthesize: linear needs locations");
      for (int i = 0; i < g.n; ++i) x[i] = g.locations[i][0] + g.locations[i][1];
      break;
    }
    case FieldKind::spike: {
      Rng rng(mix_seed(spec.seed, hash_label("spike")));
      x[rng.pick(g.n)] = 1.0;
      break;
    }
    case FieldKind::iid_gaussian: {
      Rng rng(mix_seed(spec.seed, hash_label("iid_gaussian")));
      for (int i = 0; i < g.n; ++i) x[i] = rng.normal();
      break;
    }
  }
  return x;
}

}  // namespace gge
