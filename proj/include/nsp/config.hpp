#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsp/detect.hpp"
#include "nsp/lfp_codec.hpp"

namespace nsp {

// key=value text config. '#' starts a comment line; blank lines are kept.
// Rewriting preserves line order, comments and unknown keys.
class Config {
public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);  // missing file -> empty config

  std::optional<std::string> get(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  bool contains(const std::string& key) const { return get(key).has_value(); }

  std::string str() const;
  void save(const std::string& path) const;

private:
  struct Line {
    std::string key;  // empty for comments and blank lines
    std::string text;
  };
  std::vector<Line> lines_;
};

// detector.c0, detector.c1, detector.amp_mult, detector.refractory,
// detector.verify_window, detector.warmup; with a channel id also the pinned
// ate.ch<id>.thr_neo / ate.ch<id>.thr_amp written by an ATE apply.
DetectorConfig detector_config(const Config& c);
DetectorConfig detector_config(const Config& c, std::uint8_t channel);
std::string ate_key(std::uint8_t channel, const char* field);
// cce.window_n, cce.n0
CceTrainingConfig cce_config(const Config& c);

}  // namespace nsp
