#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace greenforms::cli {

// Flat INI: [section] key = value. Missing file -> MissingInput, syntax or
// conversion problems -> ConfigParse.
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  const std::string& text() const { return text_; }
  bool has(const std::string& key) const;

  std::string str(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;  // accepts inf
  int integer(const std::string& key, int fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> words(const std::string& key, std::vector<std::string> fallback) const;

 private:
  std::optional<std::string> raw(const std::string& key) const;

  boost::property_tree::ptree tree_;
  std::string text_;
};

}  // namespace greenforms::cli
