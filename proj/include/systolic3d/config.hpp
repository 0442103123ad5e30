#pragma once
// Thin accessors over INI-style configuration files. Every key carries its
// unit in the name (read_energy_pj, thickness_nm, ...); conversion to SI
// happens at the call site.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace systolic3d::config {

class Document {
 public:
  static Document parse(std::string_view text, std::string origin);
  static Document load(const std::filesystem::path& path);

  bool has_section(const std::string& section) const;
  // Section names in file order.
  std::vector<std::string> sections() const;

  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  // Non-negative integer; rejects fractional values.
  std::uint64_t count(const std::string& section, const std::string& key) const;
  std::uint64_t count_or(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key,
                      std::string fallback) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  // Whitespace- or comma-separated list of numbers.
  std::vector<double> numbers(const std::string& section, const std::string& key) const;

  const std::string& origin() const { return origin_; }

 private:
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;
  boost::property_tree::ptree tree_;
  std::string origin_;
};

}  // namespace systolic3d::config
