#include "inkpipe/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "inkpipe/config.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/ingest.hpp"

namespace inkpipe {
namespace {

constexpr double kSumTolerance = 1e-9;

void check_weights(const std::map<std::string, double>& raw) {
  for (const auto& [name, w] : raw) {
    if (!std::isfinite(w) || w < 0.0) {
      std::ostringstream msg;
      msg << "weight for '" << name << "' must be finite and non-negative, got " << w;
      throw ValidationError(msg.str());
    }
  }
}

double total(const std::map<std::string, double>& m) {
  double s = 0.0;
  for (const auto& [_, w] : m) s += w;
  return s;
}

}  // namespace

WeightTable::WeightTable(std::map<std::string, double> entries) : entries_(std::move(entries)) {
  check_weights(entries_);
  const double s = total(entries_);
  if (std::abs(s - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << s << ", expected 1";
    throw ValidationError(msg.str());
  }
}

WeightTable WeightTable::normalized(const std::map<std::string, double>& raw) {
  check_weights(raw);
  const double s = total(raw);
  if (!(s > 0.0)) throw ValidationError("weights must have a positive total");
  std::map<std::string, double> out;
  for (const auto& [name, w] : raw) out[name] = w / s;
  return WeightTable(std::move(out));
}

WeightTable rebalance(const WeightTable& shares, double floor) {
  const auto& raw = shares.entries();
  const double n = static_cast<double>(raw.size());
  if (!(floor >= 0.0)) throw ValidationError("floor must be non-negative");
  if (floor * n > 1.0 + kSumTolerance) {
    std::ostringstream msg;
    msg << "infeasible floor: floor*n = " << floor << "*" << raw.size() << " = " << floor * n << " > 1";
    throw ValidationError(msg.str());
  }

  std::set<std::string> pinned;
  double free_mass = 1.0;
  double free_raw = 0.0;
  // Each pass pins at least one more entry, so this runs at most n times.
  while (true) {
    free_mass = 1.0 - floor * static_cast<double>(pinned.size());
    free_raw = 0.0;
    for (const auto& [name, w] : raw) {
      if (!pinned.contains(name)) free_raw += w;
    }
    bool changed = false;
    for (const auto& [name, w] : raw) {
      if (pinned.contains(name)) continue;
      const double scaled = free_raw > 0.0 ? w * free_mass / free_raw : 0.0;
      // Entries already sitting on the floor stay pinned there.
      if (scaled < floor * (1.0 + 1e-12)) {
        pinned.insert(name);
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::map<std::string, double> out;
  for (const auto& [name, w] : raw) {
    out[name] = pinned.contains(name) ? floor : w * free_mass / free_raw;
  }
  return WeightTable(std::move(out));
}

WeightTable classification_weighting(const std::optional<WeightTable>& override_weights) {
  if (override_weights) return *override_weights;
  return WeightTable({{"quickdraw", 0.48}, {"shape", 0.11}, {"languages", 0.41}});
}

WeightTable default_task_weights() {
  return WeightTable({{"segmentation", 0.15}, {"recognition", 0.50}, {"math", 0.15}, {"classification", 0.20}});
}

SourceKey SourceKey::parse(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return {s, ""};
  return {s.substr(0, slash), s.substr(slash + 1)};
}

// ---- sampling ----------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::string kRecognition = "recognition";

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ splitmix64(counter ^ 0x5851f42d4c957f2dULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

const std::string& MixtureSampler::Cumulative::pick(double u) const {
  const auto it = std::upper_bound(bounds.begin(), bounds.end(), u);
  if (it == bounds.end()) {
    // u landed past the last bound through rounding; take the last entry
    // with positive weight.
    for (std::size_t i = bounds.size(); i-- > 0;) {
      if (i == 0 || bounds[i] > bounds[i - 1]) return names[i];
    }
  }
  return names[static_cast<std::size_t>(it - bounds.begin())];
}

MixtureSampler::MixtureSampler(const MixtureSpec& spec) : seed_(spec.seed) {
  auto build = [](const WeightTable& t) {
    Cumulative c;
    double acc = 0.0;
    for (const auto& [name, w] : t.entries()) {
      acc += w;
      c.names.push_back(name);
      c.bounds.push_back(acc);
    }
    return c;
  };
  if (spec.task_weights.empty()) throw ValidationError("mixture has no task weights");
  tasks_ = build(spec.task_weights);
  for (const auto& [task, table] : spec.subtask_weights) {
    if (task != kRecognition && !table.empty()) subs_[task] = build(table);
  }
  if (spec.task_weights.entries().contains(kRecognition) && !spec.language_weights.empty()) {
    subs_[kRecognition] = build(rebalance(spec.language_weights, spec.floor));
  }
}

SourceKey MixtureSampler::key_at(std::uint64_t draw_index) const {
  SourceKey key{tasks_.pick(counter_uniform(seed_, 2 * draw_index)), ""};
  if (const auto it = subs_.find(key.task); it != subs_.end()) {
    key.sub = it->second.pick(counter_uniform(seed_, 2 * draw_index + 1));
  }
  return key;
}

std::vector<SourceKey> MixtureSampler::reachable_keys() const {
  std::vector<SourceKey> keys;
  auto positive = [](const Cumulative& c, std::size_t i) {
    return c.bounds[i] > (i == 0 ? 0.0 : c.bounds[i - 1]);
  };
  for (std::size_t i = 0; i < tasks_.names.size(); ++i) {
    if (!positive(tasks_, i)) continue;
    const auto it = subs_.find(tasks_.names[i]);
    if (it == subs_.end()) {
      keys.push_back({tasks_.names[i], ""});
      continue;
    }
    for (std::size_t j = 0; j < it->second.names.size(); ++j) {
      if (positive(it->second, j)) keys.push_back({tasks_.names[i], it->second.names[j]});
    }
  }
  return keys;
}

std::vector<TaskExample> sample_range(const MixtureSpec& spec, const SourceMap& sources, std::uint64_t begin,
                                      std::uint64_t end) {
  if (end <= begin) return {};
  const MixtureSampler sampler(spec);
  for (const auto& key : sampler.reachable_keys()) {
    const auto it = sources.find(key);
    if (it == sources.end()) throw ValidationError("missing example source '" + key.str() + "'");
    if (it->second.empty()) throw ValidationError("example source '" + key.str() + "' is empty");
  }

  // Replay earlier draws to know how far into each source this shard starts.
  std::map<SourceKey, std::uint64_t> consumed;
  for (std::uint64_t i = 0; i < begin; ++i) ++consumed[sampler.key_at(i)];

  std::vector<TaskExample> out;
  out.reserve(static_cast<std::size_t>(end - begin));
  for (std::uint64_t i = begin; i < end; ++i) {
    const SourceKey key = sampler.key_at(i);
    const auto& examples = sources.at(key);
    std::uint64_t& k = consumed[key];
    out.push_back(examples[static_cast<std::size_t>(k % examples.size())]);
    ++k;
  }
  return out;
}

std::vector<TaskExample> sample_stream(const MixtureSpec& spec, const SourceMap& sources, std::size_t n) {
  return sample_range(spec, sources, 0, n);
}

// ---- config ------------------------------------------------------------------

namespace {

std::map<std::string, double> weight_map(const nlohmann::json& j, std::string_view field) {
  if (!j.is_object()) throw ValidationError(std::string(field) + " must be an object of name -> weight");
  std::map<std::string, double> out;
  for (const auto& [name, w] : j.items()) {
    if (!w.is_number()) throw ValidationError(std::string(field) + "." + name + " must be a number");
    out[name] = w.get<double>();
  }
  return out;
}

}  // namespace

MixtureConfig load_mixture_config(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_object()) throw ValidationError(path.string() + ": mixture spec must be a JSON object");
  reject_unknown_keys(j, {"task_weights", "language_weights", "subtask_weights", "floor", "seed", "sources"},
                      path.string());
  MixtureConfig cfg;
  try {
    cfg.spec.task_weights = j.contains("task_weights") ? WeightTable::normalized(weight_map(j["task_weights"], "task_weights"))
                                                       : default_task_weights();
    if (j.contains("language_weights")) {
      cfg.spec.language_weights = WeightTable::normalized(weight_map(j["language_weights"], "language_weights"));
    }
    if (j.contains("subtask_weights")) {
      for (const auto& [task, table] : j["subtask_weights"].items()) {
        cfg.spec.subtask_weights[task] = WeightTable::normalized(weight_map(table, "subtask_weights." + task));
      }
    }
    cfg.spec.floor = j.value("floor", kDefaultLanguageFloor);
    cfg.spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (j.contains("sources")) {
    for (const auto& [key, p] : j["sources"].items()) {
      if (!p.is_string()) throw ValidationError(path.string() + ": sources." + key + " must be a path string");
      std::filesystem::path source = p.get<std::string>();
      if (source.is_relative()) source = path.parent_path() / source;
      cfg.sources[SourceKey::parse(key)] = source;
    }
  }
  return cfg;
}

SourceMap load_sources(const MixtureConfig& config) {
  SourceMap out;
  for (const auto& [key, path] : config.sources) out[key] = read_examples_jsonl(path);
  return out;
}

}  // namespace inkpipe
