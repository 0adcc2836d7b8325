#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inkpipe/example.hpp"

namespace inkpipe {

// Name -> share, shares non-negative and summing to 1 within 1e-9.
class WeightTable {
 public:
  WeightTable() = default;
  // Throws ValidationError unless the invariant already holds.
  explicit WeightTable(std::map<std::string, double> entries);
  // Scales arbitrary non-negative weights (e.g. percentages) to sum to 1.
  static WeightTable normalized(const std::map<std::string, double>& raw);

  const std::map<std::string, double>& entries() const { return entries_; }
  double at(const std::string& name) const { return entries_.at(name); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const WeightTable&, const WeightTable&) = default;

 private:
  std::map<std::string, double> entries_;
};

inline constexpr double kDefaultLanguageFloor = 0.01;

// Water-filling: entries below `floor` are raised to it and the remaining mass
// is spread over the others in proportion to their input shares, repeated
// until no entry falls below the floor. Throws ValidationError when
// floor * size > 1.
WeightTable rebalance(const WeightTable& shares, double floor = kDefaultLanguageFloor);

// Default classification sub-task weights (QuickDraw, shapes, script ID), or
// the override when one is given.
WeightTable classification_weighting(const std::optional<WeightTable>& override_weights = std::nullopt);

// Default task weights of the training mixture.
WeightTable default_task_weights();

struct MixtureSpec {
  WeightTable task_weights;
  // Recognition languages; rebalanced with `floor` before sampling.
  WeightTable language_weights;
  double floor = kDefaultLanguageFloor;
  std::uint64_t seed = 0;
  // Optional sub-source weights for tasks other than recognition, used as-is.
  std::map<std::string, WeightTable> subtask_weights;
};

// Identifies one example source: a task and, for recognition, a language.
struct SourceKey {
  std::string task;
  std::string sub;

  std::string str() const { return sub.empty() ? task : task + "/" + sub; }
  static SourceKey parse(const std::string& s);

  friend auto operator<=>(const SourceKey&, const SourceKey&) = default;
};

// Uniform double in [0, 1) from (seed, counter). Stateless, so any draw index
// can be computed independently of the others.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

// Precomputed cumulative tables for a MixtureSpec.
class MixtureSampler {
 public:
  explicit MixtureSampler(const MixtureSpec& spec);

  SourceKey key_at(std::uint64_t draw_index) const;
  // Keys with non-zero probability.
  std::vector<SourceKey> reachable_keys() const;

 private:
  struct Cumulative {
    std::vector<std::string> names;
    std::vector<double> bounds;
    const std::string& pick(double u) const;
  };

  std::uint64_t seed_;
  Cumulative tasks_;
  std::map<std::string, Cumulative> subs_;
};

using SourceMap = std::map<SourceKey, std::vector<TaskExample>>;

// Draws indices [begin, end) of the stream. Each draw picks a task, then a
// language (recognition) or sub-source, then the next example of that source;
// exhausted sources wrap around. Throws ValidationError naming a missing or
// empty source.
std::vector<TaskExample> sample_range(const MixtureSpec& spec, const SourceMap& sources, std::uint64_t begin,
                                      std::uint64_t end);

std::vector<TaskExample> sample_stream(const MixtureSpec& spec, const SourceMap& sources, std::size_t n);

// Mixture config file: weights, floor, seed and per-source JSONL paths.
struct MixtureConfig {
  MixtureSpec spec;
  std::map<SourceKey, std::filesystem::path> sources;
};

MixtureConfig load_mixture_config(const std::filesystem::path& path);
SourceMap load_sources(const MixtureConfig& config);

}  // namespace inkpipe
