#pragma once

#include "lanecast/network.hpp"
#include "test_support.hpp"

namespace lanecast::testing {

// Sign pattern of every pre-activation. Within one pattern the network is
// smooth, so a finite difference that changes the pattern is not comparable.
inline std::vector<bool> activation_pattern(const Network<double>& net, const Tensor3<double>& input,
                                     std::span<const double> maneuvers) {
  ForwardCache<double> cache;
  net.forward(input, maneuvers, &cache);
  std::vector<bool> out;
  for (const auto& t : cache.conv_pre)
    for (double v : t.values()) out.push_back(v >= 0.0);
  for (double v : cache.hidden_pre) out.push_back(v >= 0.0);
  return out;
}

struct CheckSummary {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double worst = 0.0;
};

// Checks a stratified subset of parameters: the same number from every
// weight and bias tensor of the layout.
inline CheckSummary check_network(Network<double>& net, const std::function<double(std::span<double>)>& objective,
                           const std::function<std::vector<bool>()>& pattern, std::mt19937_64& rng,
                           std::size_t per_entry) {
  std::vector<double> grad(net.parameter_count(), 0.0);
  objective(grad);
  const auto base = pattern();
  CheckSummary s;
  auto params = net.parameters();
  for (const auto& e : net.layout()) {
    std::uniform_int_distribution<std::size_t> pick(0, e.size - 1);
    for (std::size_t n = 0; n < std::min(per_entry, e.size); ++n) {
      const std::size_t i = e.offset + pick(rng);
      const double saved = params[i];
      const double h = 1e-6;
      params[i] = saved + h;
      const double up = objective({});
      const bool same_up = pattern() == base;
      params[i] = saved - h;
      const double down = objective({});
      const bool same_down = pattern() == base;
      params[i] = saved;
      if (!same_up || !same_down) {
        ++s.skipped;
        continue;
      }
      const double err = relative_error(grad[i], (up - down) / (2.0 * h));
      s.worst = std::max(s.worst, err);
      ++s.checked;
    }
  }
  return s;
}

}  // namespace lanecast::testing
