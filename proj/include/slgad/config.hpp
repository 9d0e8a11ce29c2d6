#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "slgad/sampler.hpp"

namespace slgad {

// Which terms of the objective / score are active. Mirrors the ablation
// variants: contrastive only, generative only, alpha = beta = 1, and no
// score scaling.
enum class Mode { kFull, kGenOnly, kConOnly, kUnweighted, kUnscaled };

Mode parse_mode(const std::string& name);
std::string to_string(Mode mode);

struct RunConfig {
  std::size_t k = 4;
  std::size_t d_hidden = 64;
  double alpha = 1.0;
  double beta = 0.6;
  double lr = 0.001;
  std::size_t epochs = 100;
  std::size_t batch_size = 300;
  std::size_t rounds = 256;
  std::size_t negative_ratio = 1;
  std::uint64_t seed = 0;
  double restart_prob = 0.15;
  std::size_t threads = 1;
  Mode mode = Mode::kFull;
  // Min-max the generative score once over round-averaged raw errors instead
  // of within each round.
  bool scale_after_averaging = false;

  // Throws ConfigError listing every violated constraint.
  void validate() const;

  SamplerConfig sampler() const { return SamplerConfig::for_view_size(k, restart_prob, seed); }

  // alpha/beta after applying the ablation mode.
  double effective_alpha() const;
  double effective_beta() const;

  // Stable key = value serialization (sorted keys).
  std::string serialize() const;
  // FNV-1a over serialize(); `threads` excluded since it does not change results.
  std::uint64_t hash() const;

  // Applies `key = value` pairs; unknown keys throw ConfigError.
  void apply(const std::map<std::string, std::string>& values);
};

// Per-dataset learning rate and epoch count. "toy" is the small planted-anomaly
// fixture, which gets a single Adam step per epoch and so a larger rate.
struct Preset {
  double lr;
  std::size_t epochs;
  std::size_t d_hidden = 64;
  std::size_t rounds = 256;
};
Preset preset_for(const std::string& dataset);
void apply_preset(RunConfig& cfg, const std::string& dataset);

// Flat "key = value" text; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace slgad
