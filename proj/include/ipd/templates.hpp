#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace ipd {

/// Named text templates with `{{name}}` placeholders. The built-in set is
/// compiled from assets/templates/ so the binary never depends on the
/// working directory; a directory of overrides can be loaded instead.
class TemplateSet {
 public:
  TemplateSet() = default;
  explicit TemplateSet(std::map<std::string, std::string> templates)
      : templates_(templates.begin(), templates.end()) {}

  static const TemplateSet& builtin();
  /// Every *.txt file in `dir`, keyed by stem.
  static TemplateSet load_directory(const std::filesystem::path& dir);

  bool contains(std::string_view name) const;
  const std::string& get(std::string_view name) const;  // throws TemplateMissing
  std::string version() const;                          // "VERSION" entry, or "unversioned"

  void set(std::string name, std::string text) { templates_[std::move(name)] = std::move(text); }

  /// Fills `{{key}}` from `vars`. An unknown placeholder throws TemplateMissing.
  std::string render(std::string_view name, const std::map<std::string, std::string>& vars) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars);

}  // namespace ipd
