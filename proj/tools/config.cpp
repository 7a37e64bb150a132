#include "config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "greenforms/errors.hpp"

namespace greenforms::cli {

namespace pt = boost::property_tree;

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingInput, "config file " + path.string() + " not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Config Config::parse(const std::string& text) {
  Config c;
  c.text_ = text;
  std::istringstream in(text);
  try {
    pt::read_ini(in, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigParse, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  return c;
}

std::optional<std::string> Config::raw(const std::string& key) const {
  // keys are "section.name"; section names may contain '-'
  auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node) return std::nullopt;
  std::string v = node->data();
  const auto a = v.find_first_not_of(" \t");
  const auto b = v.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
}

bool Config::has(const std::string& key) const { return raw(key).has_value(); }

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

namespace {

double to_real(const std::string& key, const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorCode::ConfigParse, key + ": expected a number, got '" + s + "'");
  return v;
}

}  // namespace

double Config::real(const std::string& key, double fallback) const {
  const auto s = raw(key);
  return s ? to_real(key, *s) : fallback;
}

int Config::integer(const std::string& key, int fallback) const {
  const auto s = raw(key);
  if (!s) return fallback;
  char* end = nullptr;
  const long v = std::strtol(s->c_str(), &end, 10);
  if (s->empty() || *end != '\0') throw Error(ErrorCode::ConfigParse, key + ": expected an integer, got '" + *s + "'");
  return static_cast<int>(v);
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
  const auto s = raw(key);
  if (!s) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s->c_str(), &end, 0);
  if (s->empty() || *end != '\0' || (*s)[0] == '-')
    throw Error(ErrorCode::ConfigParse, key + ": expected an unsigned integer, got '" + *s + "'");
  return v;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto s = raw(key);
  if (!s) return fallback;
  if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
  if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
  throw Error(ErrorCode::ConfigParse, key + ": expected true or false, got '" + *s + "'");
}

std::vector<std::string> Config::words(const std::string& key, std::vector<std::string> fallback) const {
  const auto s = raw(key);
  if (!s) return fallback;
  std::istringstream in(*s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<double> Config::reals(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& w : words(key, {})) out.push_back(to_real(key, w));
  return out;
}

}  // namespace greenforms::cli
