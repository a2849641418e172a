#include "nsp/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsp/core.hpp"

namespace nsp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto t = trim(raw);
    if (t.empty() || t.front() == '#') {
      c.lines_.push_back({"", raw});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::format, "config line " + std::to_string(lineno) + " has no '='");
    const auto key = trim(t.substr(0, eq));
    if (key.empty()) throw Error(Errc::format, "config line " + std::to_string(lineno) + " has an empty key");
    c.lines_.push_back({key, key + "=" + trim(t.substr(eq + 1))});
  }
  return c;
}

Config Config::load(const std::string& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream f(path);
  if (!f) throw Error(Errc::format, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  for (auto it = lines_.rbegin(); it != lines_.rend(); ++it)
    if (it->key == key) return it->text.substr(key.size() + 1);
  return std::nullopt;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || p != v->data() + v->size())
    throw Error(Errc::format, "config key " + key + " is not an integer: " + *v);
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  for (auto& l : lines_)
    if (l.key == key) {
      l.text = key + "=" + value;
      return;
    }
  lines_.push_back({key, key + "=" + value});
}

std::string Config::str() const {
  std::string out;
  for (const auto& l : lines_) out += l.text + "\n";
  return out;
}

void Config::save(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(Errc::format, "cannot write config " + path);
  f << str();
}

DetectorConfig detector_config(const Config& c) {
  DetectorConfig d;
  d.c0 = c.get_int("detector.c0", d.c0);
  d.c1 = c.get_int("detector.c1", d.c1);
  d.amp_mult = c.get_int("detector.amp_mult", d.amp_mult);
  d.refractory = static_cast<std::uint32_t>(c.get_int("detector.refractory", d.refractory));
  d.verify_window = static_cast<std::uint32_t>(c.get_int("detector.verify_window", d.verify_window));
  d.warmup = static_cast<std::uint32_t>(c.get_int("detector.warmup", d.warmup));
  d.validate();
  return d;
}

std::string ate_key(std::uint8_t channel, const char* field) {
  return "ate.ch" + std::to_string(channel) + "." + field;
}

DetectorConfig detector_config(const Config& c, std::uint8_t channel) {
  auto d = detector_config(c);
  if (const auto k = ate_key(channel, "thr_neo"); c.contains(k)) d.fixed_thr_neo = c.get_int(k, 0);
  if (const auto k = ate_key(channel, "thr_amp"); c.contains(k)) d.fixed_thr_amp = c.get_int(k, 0);
  d.validate();
  return d;
}

CceTrainingConfig cce_config(const Config& c) {
  CceTrainingConfig t;
  t.window_n = static_cast<std::uint32_t>(c.get_int("cce.window_n", t.window_n));
  t.n0 = static_cast<std::uint32_t>(c.get_int("cce.n0", t.n0));
  t.validate();
  return t;
}

}  // namespace nsp
