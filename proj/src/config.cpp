#include "systolic3d/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "systolic3d/errors.hpp"

namespace systolic3d::config {

namespace pt = boost::property_tree;

namespace {

std::string strip_comment(std::string value) {
  for (const char marker : {';', '#'}) {
    auto pos = value.find(marker);
    if (pos != std::string::npos) value.erase(pos);
  }
  while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
  return value;
}

}  // namespace

Document Document::parse(std::string_view text, std::string origin) {
  Document doc;
  doc.origin_ = std::move(origin);
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, doc.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(doc.origin_ + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return doc;
}

Document Document::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

bool Document::has_section(const std::string& section) const {
  return tree_.find(section) != tree_.not_found();
}

std::vector<std::string> Document::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, child] : tree_) {
    if (!child.empty()) out.push_back(name);
  }
  return out;
}

std::optional<std::string> Document::raw(const std::string& section, const std::string& key) const {
  auto sec = tree_.find(section);
  if (sec == tree_.not_found()) return std::nullopt;
  auto it = sec->second.find(key);
  if (it == sec->second.not_found()) return std::nullopt;
  return strip_comment(it->second.data());
}

double Document::number(const std::string& section, const std::string& key) const {
  auto value = raw(section, key);
  if (!value) throw ParseError(origin_ + ": missing [" + section + "] " + key);
  try {
    std::size_t used = 0;
    double v = std::stod(*value, &used);
    if (used != value->size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin_ + ": [" + section + "] " + key + " is not a number: '" + *value + "'");
  }
}

double Document::number_or(const std::string& section, const std::string& key,
                           double fallback) const {
  return raw(section, key) ? number(section, key) : fallback;
}

std::uint64_t Document::count(const std::string& section, const std::string& key) const {
  double v = number(section, key);
  if (v < 0 || std::floor(v) != v)
    throw ParseError(origin_ + ": [" + section + "] " + key + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::uint64_t Document::count_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
  return raw(section, key) ? count(section, key) : fallback;
}

std::string Document::text(const std::string& section, const std::string& key) const {
  auto value = raw(section, key);
  if (!value) throw ParseError(origin_ + ": missing [" + section + "] " + key);
  return *value;
}

std::string Document::text_or(const std::string& section, const std::string& key,
                              std::string fallback) const {
  auto value = raw(section, key);
  return value ? *value : fallback;
}

bool Document::flag_or(const std::string& section, const std::string& key, bool fallback) const {
  auto value = raw(section, key);
  if (!value) return fallback;
  if (*value == "true" || *value == "1" || *value == "yes" || *value == "on") return true;
  if (*value == "false" || *value == "0" || *value == "no" || *value == "off") return false;
  throw ParseError(origin_ + ": [" + section + "] " + key + " is not a boolean");
}

std::vector<double> Document::numbers(const std::string& section, const std::string& key) const {
  std::string value = text(section, key);
  for (char& ch : value)
    if (ch == ',') ch = ' ';
  std::istringstream in(value);
  std::vector<double> out;
  double v = 0;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw ParseError(origin_ + ": [" + section + "] " + key + " is not a number list");
  return out;
}

}  // namespace systolic3d::config
