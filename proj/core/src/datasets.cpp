#include "bregman/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "bregman/rng.hpp"

namespace bregman {

void Dataset::validate() const {
  if (labels.size() != features.rows()) {
    throw DimensionError("Dataset '" + name + "': labels length != feature rows");
  }
  if (class_count < 1) throw NumericError("Dataset '" + name + "': class_count < 1");
  std::vector<std::size_t> counts(class_count, 0);
  for (int y : labels) {
    if (y < 0 || y >= class_count) {
      throw NumericError("Dataset '" + name + "': label " + std::to_string(y) + " out of range");
    }
    ++counts[y];
  }
  for (int c = 0; c < class_count; ++c) {
    if (counts[c] == 0) {
      throw NumericError("Dataset '" + name + "': class " + std::to_string(c) + " is empty");
    }
  }
  check_finite(features.storage(), "Dataset '" + name + "' features");
}

Dataset make_blobs(std::size_t n, int classes, std::size_t dim, double spread,
                   std::uint64_t seed) {
  if (classes < 2 || n < static_cast<std::size_t>(classes)) {
    throw NumericError("make_blobs: need n >= classes >= 2");
  }
  if (!(spread > 0.0) || dim < 1) throw NumericError("make_blobs: invalid spread or dim");
  RngStream rng(seed);
  constexpr double kRadius = 3.0;
  Matrix centers(classes, dim);
  for (int c = 0; c < classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / classes;
    centers(c, 0) = kRadius * std::cos(angle);
    if (dim > 1) centers(c, 1) = kRadius * std::sin(angle);
  }
  Dataset ds;
  ds.name = "blobs";
  ds.class_count = classes;
  ds.features = Matrix(n, dim);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % classes);  // round-robin: counts differ by <= 1
    ds.labels[i] = c;
    for (std::size_t j = 0; j < dim; ++j) {
      ds.features(i, j) = centers(c, j) + rng.normal(0.0, spread);
    }
  }
  ds.validate();
  return ds;
}

Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 4 || noise < 0.0) throw NumericError("make_two_moons: need n >= 4 and noise >= 0");
  RngStream rng(seed);
  const std::size_t n0 = (n + 1) / 2;
  const std::size_t n1 = n - n0;
  Dataset ds;
  ds.name = "two_moons";
  ds.class_count = 2;
  ds.features = Matrix(n, 2);
  ds.labels.resize(n);
  auto arc_t = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1)
                     : 0.0;
  };
  for (std::size_t i = 0; i < n0; ++i) {
    const double t = arc_t(i, n0);
    ds.features(i, 0) = std::cos(t);
    ds.features(i, 1) = std::sin(t);
    ds.labels[i] = 0;
  }
  for (std::size_t i = 0; i < n1; ++i) {
    const double t = arc_t(i, n1);
    ds.features(n0 + i, 0) = 1.0 - std::cos(t);
    ds.features(n0 + i, 1) = 0.5 - std::sin(t);
    ds.labels[n0 + i] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 2; ++j) ds.features(i, j) += rng.normal(0.0, noise);
  }
  ds.validate();
  return ds;
}

// Frozen constants of the matching map; changing them invalidates the
// calibrated baseline-gap threshold.
namespace {
constexpr double kMatchBase = 0.12;    // displacement magnitude
constexpr double kMatchAmp = 0.7;      // sin(pi x) magnitude modulation
constexpr double kMatchTheta0 = 0.35;  // base displacement angle (rad)
constexpr double kMatchOmega = 0.25;   // angle drift per unit y
}  // namespace

Vector nonlinear_matching_map(double x, double y) {
  const double mag = kMatchBase * (1.0 + kMatchAmp * std::sin(std::numbers::pi * x));
  const double theta = kMatchTheta0 + kMatchOmega * y;
  return {x + mag * std::cos(theta), y + mag * std::sin(theta)};
}

std::vector<std::size_t> lexicographic_derangement(const std::vector<VecPair>& pairs) {
  const std::size_t n = pairs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a].left < pairs[b].left;
  });
  std::vector<std::size_t> der(n);
  for (std::size_t r = 0; r < n; ++r) {
    der[order[r]] = order[(r + 1) % n];
  }
  return der;
}

MatchingTask make_nonlinear_matching(std::size_t grid_size, double noise, std::uint64_t seed) {
  if (grid_size < 4 || noise < 0.0) {
    throw NumericError("make_nonlinear_matching: need grid_size >= 4 and noise >= 0");
  }
  RngStream rng(seed);
  std::vector<VecPair> all;
  all.reserve(grid_size * grid_size);
  for (std::size_t ix = 0; ix < grid_size; ++ix) {
    for (std::size_t iy = 0; iy < grid_size; ++iy) {
      const double x = -1.0 + 2.0 * static_cast<double>(ix) / static_cast<double>(grid_size - 1);
      const double y = -1.0 + 2.0 * static_cast<double>(iy) / static_cast<double>(grid_size - 1);
      Vector right = nonlinear_matching_map(x, y);
      right[0] += rng.normal(0.0, noise);
      right[1] += rng.normal(0.0, noise);
      all.push_back({{x, y}, std::move(right)});
    }
  }
  std::vector<std::size_t> perm = rng.permutation(all.size());
  const std::size_t half = all.size() / 2;

  MatchingTask task;
  for (std::size_t i = 0; i < half; ++i) task.support_pairs.push_back(all[perm[i]]);
  std::vector<VecPair> query_matches;
  for (std::size_t i = half; i < all.size(); ++i) query_matches.push_back(all[perm[i]]);

  const std::vector<std::size_t> der = lexicographic_derangement(query_matches);
  for (std::size_t i = 0; i < query_matches.size(); ++i) {
    task.query_pairs.push_back(query_matches[i]);
    task.query_labels.push_back(1);
    task.query_pairs.push_back({query_matches[i].left, query_matches[der[i]].right});
    task.query_labels.push_back(0);
  }
  return task;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_csv: " + path.string() + " is empty");

  auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(text);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!text.empty() && text.back() == ',') fields.emplace_back();
    return fields;
  };

  const std::vector<std::string> header = split(line);
  if (header.size() < 2 || header.back() != "label") {
    throw ParseError("load_csv line 1: header must end with a 'label' column");
  }
  const std::size_t p = header.size() - 1;
  for (std::size_t j = 0; j < p; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw ParseError("load_csv line 1: expected column 'f" + std::to_string(j) + "', got '" +
                       header[j] + "'");
    }
  }

  std::vector<double> values;
  std::vector<long> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() != p + 1) {
      throw ParseError("load_csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(p + 1) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < p; ++j) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[j], &pos);
        if (pos != fields[j].size()) throw std::invalid_argument("trailing");
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("load_csv line " + std::to_string(line_no) + ": non-numeric feature '" +
                         fields[j] + "' in column f" + std::to_string(j));
      }
    }
    try {
      std::size_t pos = 0;
      raw_labels.push_back(std::stol(fields[p], &pos));
      if (pos != fields[p].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("load_csv line " + std::to_string(line_no) + ": non-integer label '" +
                       fields[p] + "'");
    }
  }
  if (raw_labels.empty()) throw ParseError("load_csv: " + path.string() + " has no data rows");

  // Dense remap in sorted order, e.g. {5, 9} -> {0, 1}.
  std::map<long, int> remap;
  for (long y : raw_labels) remap.emplace(y, 0);
  int next = 0;
  for (auto& [raw, id] : remap) id = next++;

  Dataset ds;
  ds.name = path.filename().string();
  ds.class_count = next;
  const std::size_t n = raw_labels.size();
  ds.features = Matrix(n, p);
  std::copy(values.begin(), values.end(), ds.features.data());
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = remap.at(raw_labels[i]);
  ds.validate();
  return ds;
}

}  // namespace bregman
