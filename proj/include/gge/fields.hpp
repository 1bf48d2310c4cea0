#pragma once

#include <cstdint>
#include <vector>

#include "gge/topology.hpp"

namespace gge {

enum class FieldKind { gaussian_bumps, linear, spike, iid_gaussian };

struct GaussianBump {
  double amplitude;
  double cx;
  double cy;
  double sigma;
};

struct FieldSpec {
  FieldKind kind = FieldKind::gaussian_bumps;
  // defaults: unit bumps of opposite sign in opposite quadrants
  std::vector<GaussianBump> bumps = {{1.0, 0.25, 0.25, 0.15},
                                     {-1.0, 0.75, 0.75, 0.15}};
  std::uint64_t seed = 0;  // consumed by spike and iid_gaussian
};

// Initial measurement vector for a graph. Deterministic: identical
// (spec, graph) pairs give identical vectors. gaussian_bumps and linear
// require node locations.
std::vector<double> synthesize(const FieldSpec& spec, const Graph& g);

}  // namespace gge
