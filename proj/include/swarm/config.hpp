#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"

namespace swarm {

// key=value file with [section] headers. Keys are addressed as
// "section.key"; keys before the first header live at top level.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
  }

  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream in(normalize_comments(text));
    boost::property_tree::ini_parser::read_ini(in, c.tree_);
    return c;
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  template <class T>
  T get(const std::string& key, const T& fallback) const {
    if (auto v = tree_.get_optional<std::string>(key)) return parse<T>(*v, key);
    return fallback;
  }

  template <class T>
  T require(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(key)) return parse<T>(*v, key);
    throw std::runtime_error("missing config key " + key);
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) out.push_back(parse<double>(item, key));
    return out;
  }

  template <class T>
  void set(const std::string& key, const T& value) {
    std::ostringstream os;
    os << std::setprecision(17) << value;
    tree_.put(key, os.str());
  }

  // Canonical text form: sections and keys in insertion order.
  std::string canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : tree_) {
      if (v.empty()) os << k << '=' << v.data() << '\n';
    }
    for (const auto& [section, node] : tree_) {
      if (node.empty()) continue;
      os << '[' << section << "]\n";
      for (const auto& [k, v] : node) os << k << '=' << v.data() << '\n';
    }
    return os.str();
  }

  // FNV-1a of the canonical text, as 16 hex digits.
  std::string hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : canonical()) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }

  const boost::property_tree::ptree& tree() const { return tree_; }

 private:
  template <class T>
  static T parse(std::string s, const std::string& key) {
    trim(s);
    if constexpr (std::is_same_v<T, std::string>) {
      return s;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
      if (s == "false" || s == "0" || s == "no" || s == "off") return false;
      throw std::runtime_error("config key " + key + ": not a boolean: " + s);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (s == "inf" || s == "infinity") return std::numeric_limits<T>::infinity();
      std::size_t pos = 0;
      T v{};
      try {
        v = static_cast<T>(std::stod(s, &pos));
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != s.size()) throw std::runtime_error("config key " + key + ": not a number: " + s);
      return v;
    } else {
      std::size_t pos = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != s.size()) throw std::runtime_error("config key " + key + ": not an integer: " + s);
      return static_cast<T>(v);
    }
  }

  static void trim(std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  // The ini reader only knows ';' comments; accept '#' as well.
  static std::string normalize_comments(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first != std::string::npos && line[first] == '#') line[first] = ';';
      out << line << '\n';
    }
    return out.str();
  }

  boost::property_tree::ptree tree_;
};

// Reads the [model] section; missing keys keep the defaults of `base`.
inline ModelParams load_model_params(const Config& cfg, ModelParams base = {}) {
  base.a = cfg.get("model.a", base.a);
  base.tau = cfg.get("model.tau", base.tau);
  base.sigma = cfg.get("model.sigma", base.sigma);
  base.diff = cfg.get("model.diff", base.diff);
  base.radius = cfg.get("model.radius", base.radius);
  base.eps = cfg.get("model.eps", base.eps);
  base.dim = cfg.get("model.dim", base.dim);
  if (cfg.has("model.kernel_moment")) base.kernel_moment = cfg.get("model.kernel_moment", 0.0);
  base.validate();
  return base;
}

}  // namespace swarm
