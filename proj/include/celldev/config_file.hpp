#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace celldev::harness {

// Flat key=value text with [section] headers. Keys are stored as
// "section.key"; '#' and ';' start comments.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in);
  static ConfigFile load(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace celldev::harness
