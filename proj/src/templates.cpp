#include "ipd/templates.hpp"

#include <fstream>
#include <sstream>

#include "ipd/errors.hpp"

namespace ipd {

// Generated at configure time from assets/templates/.
namespace builtin_templates {
extern const std::map<std::string, std::string>& all();
}

namespace {

std::string strip_trailing_newlines(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

}  // namespace

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& [name, text] : builtin_templates::all()) s.set(name, strip_trailing_newlines(text));
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::TemplateMissing, "no template directory at " + dir.string());
  }
  TemplateSet s;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    s.set(entry.path().stem().string(), strip_trailing_newlines(buf.str()));
  }
  return s;
}

bool TemplateSet::contains(std::string_view name) const {
  return templates_.find(name) != templates_.end();
}

const std::string& TemplateSet::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorKind::TemplateMissing, "no template named '" + std::string(name) + "'");
  }
  return it->second;
}

std::string TemplateSet::version() const {
  return contains("VERSION") ? get("VERSION") : "unversioned";
}

std::string TemplateSet::render(std::string_view name,
                                const std::map<std::string, std::string>& vars) const {
  return render_template(get(name), vars);
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::TemplateMissing, "unterminated placeholder in template");
    }
    out.append(text.substr(pos, open - pos));
    const std::string key(text.substr(open + 2, close - open - 2));
    const auto it = vars.find(key);
    if (it == vars.end()) throw Error(ErrorKind::TemplateMissing, "no value for placeholder '" + key + "'");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

}  // namespace ipd
