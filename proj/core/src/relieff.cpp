#include "wifimode/relieff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wifimode/errors.hpp"
#include "wifimode/rng.hpp"

namespace wifimode {

std::size_t FeatureWeights::rank_of(std::size_t j) const {
  for (std::size_t r = 0; r < ranking.size(); ++r)
    if (ranking[r] == j + 1) return r + 1;
  return 0;
}

FeatureWeights relieff_rank(const Dataset& ds, const ReliefFParams& p) {
  const std::size_t n = ds.size();
  const std::size_t width = ds.width();
  const std::size_t k = p.k_neighbors;
  if (k == 0) throw ConfigError("relieff: k_neighbors must be at least 1");
  if (width == 0) throw DataError("relieff: dataset has no features");

  const auto counts = ds.class_counts();
  std::size_t present = 0;
  for (std::size_t c = 0; c < kNumModes; ++c) {
    if (counts[c] == 0) continue;
    ++present;
    if (counts[c] <= k)
      throw DataError("relieff: class '" + std::string(to_string(mode_from_index(c))) + "' has " +
                      std::to_string(counts[c]) + " rows, need more than k = " + std::to_string(k));
  }
  if (present < 2) throw DataError("relieff: need at least two classes");

  // Canonical row order.
  std::vector<std::size_t> canon(n);
  std::iota(canon.begin(), canon.end(), std::size_t{0});
  std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    if (ds[a].values != ds[b].values) return ds[a].values < ds[b].values;
    return ds[a].label < ds[b].label;
  });

  std::vector<double> lo(width), range(width);
  for (std::size_t f = 0; f < width; ++f) {
    double mn = ds[0].values[f], mx = mn;
    for (const auto& row : ds.rows()) {
      mn = std::min(mn, row.values[f]);
      mx = std::max(mx, row.values[f]);
    }
    lo[f] = mn;
    range[f] = mx - mn;
  }

  // scaled[i * width + f], rows in canonical order; constant features scale to 0.
  std::vector<double> scaled(n * width);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = ds[canon[i]];
    label[i] = index_of(row.label);
    for (std::size_t f = 0; f < width; ++f)
      scaled[i * width + f] = range[f] > 0.0 ? (row.values[f] - lo[f]) / range[f] : 0.0;
  }
  auto at = [&](std::size_t i, std::size_t f) { return scaled[i * width + f]; };

  std::vector<std::size_t> sampled;
  if (p.sample_count == 0 || p.sample_count >= n) {
    sampled.resize(n);
    std::iota(sampled.begin(), sampled.end(), std::size_t{0});
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(p.seed);
    for (std::size_t i = 0; i < p.sample_count; ++i) std::swap(all[i], all[i + rng.uniform_index(n - i)]);
    sampled.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(p.sample_count));
    std::sort(sampled.begin(), sampled.end());
  }
  const double m = static_cast<double>(sampled.size());

  std::array<double, kNumModes> prior{};
  for (std::size_t c = 0; c < kNumModes; ++c) prior[c] = static_cast<double>(counts[c]) / static_cast<double>(n);

  std::vector<double> weights(width, 0.0);
  std::vector<double> dist(n);
  std::vector<double> delta(width);
  std::array<std::vector<std::size_t>, kNumModes> candidates;
  for (std::size_t r : sampled) {
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.0;
      for (std::size_t f = 0; f < width; ++f) d += std::abs(at(r, f) - at(j, f));
      dist[j] = d;
    }
    for (auto& c : candidates) c.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != r) candidates[label[j]].push_back(j);

    std::fill(delta.begin(), delta.end(), 0.0);
    for (std::size_t c = 0; c < kNumModes; ++c) {
      auto& cand = candidates[c];
      if (cand.empty()) continue;
      const std::size_t take = std::min(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                        [&](std::size_t a, std::size_t b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; });
      const double scale =
          c == label[r] ? -1.0 / (m * static_cast<double>(k))
                        : prior[c] / (1.0 - prior[label[r]]) / (m * static_cast<double>(k));
      for (std::size_t f = 0; f < width; ++f) {
        double s = 0.0;
        for (std::size_t t = 0; t < take; ++t) s += std::abs(at(r, f) - at(cand[t], f));
        delta[f] += scale * s;
      }
    }
    for (std::size_t f = 0; f < width; ++f) weights[f] += delta[f];
  }

  FeatureWeights out;
  out.weights = std::move(weights);
  out.ranking.resize(width);
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{1});
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.weights[a - 1] > out.weights[b - 1];
  });
  return out;
}

}  // namespace wifimode
