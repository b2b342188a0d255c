#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "canal4d/errors.hpp"

namespace canal4d {

/// count samples from min to max; with endpoint == false the max is excluded
/// (periodic axes).
struct Axis {
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  bool endpoint = true;

  std::vector<double> values() const {
    if (count < 1) throw DomainError("grid axis: count must be at least 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
      out[0] = min;
      return out;
    }
    const int div = endpoint ? count - 1 : count;
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = min + (max - min) * i / div;
    if (endpoint) out.back() = max;
    return out;
  }
};

/// Row-major parameter grid: u outer, v middle, w inner.
struct Grid {
  Axis u, v, w;

  std::size_t size() const {
    return static_cast<std::size_t>(u.count) * static_cast<std::size_t>(v.count) *
           static_cast<std::size_t>(w.count);
  }

  std::vector<std::array<double, 3>> nodes() const {
    const auto us = u.values(), vs = v.values(), ws = w.values();
    std::vector<std::array<double, 3>> out;
    out.reserve(us.size() * vs.size() * ws.size());
    for (double a : us)
      for (double b : vs)
        for (double c : ws) out.push_back({a, b, c});
    return out;
  }
};

}  // namespace canal4d
