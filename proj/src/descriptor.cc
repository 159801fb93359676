#include <fstream>
#include <sstream>

#include "json.hpp"

#include "openness/errors.h"
#include "openness/systems.h"

namespace openness {
namespace {

using nlohmann::json;

// Line/column of a byte offset, both 1-based.
std::pair<std::size_t, std::size_t> LineColumn(std::string_view text,
                                               std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void FieldError(const std::string& field, const std::string& what) {
  throw ParseError("descriptor field '" + field + "': " + what);
}

int ReadDim(const json& doc, const char* key, int min_value) {
  if (!doc.contains(key)) FieldError(key, "missing");
  const json& v = doc.at(key);
  if (!v.is_number_integer()) FieldError(key, "expected an integer");
  const auto value = v.get<long long>();
  if (value < min_value) {
    FieldError(key, "must be >= " + std::to_string(min_value));
  }
  return static_cast<int>(value);
}

}  // namespace

PolynomialSystem ParseDescriptor(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = LineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("descriptor is not valid JSON at line " +
                     std::to_string(line) + ", column " + std::to_string(col) +
                     ": " + e.what());
  }
  if (!doc.is_object()) FieldError("<root>", "expected a JSON object");

  const int n = ReadDim(doc, "state_dim", 1);
  const int m = ReadDim(doc, "control_dim", 0);
  if (!doc.contains("components")) FieldError("components", "missing");
  const json& comps = doc.at("components");
  if (!comps.is_array()) FieldError("components", "expected an array");
  if (static_cast<int>(comps.size()) != n) {
    FieldError("components", "expected " + std::to_string(n) +
                                 " entries (state_dim), got " +
                                 std::to_string(comps.size()));
  }

  std::vector<std::vector<Term>> components(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string where = "components[" + std::to_string(i) + "]";
    if (!comps[i].is_array()) FieldError(where, "expected an array of terms");
    for (std::size_t k = 0; k < comps[i].size(); ++k) {
      const json& t = comps[i][k];
      const std::string tw = where + "[" + std::to_string(k) + "]";
      if (!t.is_object()) FieldError(tw, "expected an object");
      if (!t.contains("coeff") || !t.at("coeff").is_number()) {
        FieldError(tw + ".coeff", "missing or not a number");
      }
      if (!t.contains("exponents") || !t.at("exponents").is_array()) {
        FieldError(tw + ".exponents", "missing or not an array");
      }
      const json& ex = t.at("exponents");
      if (static_cast<int>(ex.size()) != n + m) {
        FieldError(tw + ".exponents",
                   "length " + std::to_string(ex.size()) +
                       " != state_dim + control_dim = " +
                       std::to_string(n + m));
      }
      Term term;
      term.coeff = t.at("coeff").get<double>();
      for (const json& e : ex) {
        if (!e.is_number_integer() || e.get<long long>() < 0) {
          FieldError(tw + ".exponents", "entries must be nonnegative integers");
        }
        term.exponents.push_back(static_cast<int>(e.get<long long>()));
      }
      components[i].push_back(std::move(term));
    }
  }
  PolynomialSystem sys(n, m, std::move(components));
  sys.RequireEquilibriumAtOrigin();
  return sys;
}

PolynomialSystem LoadDescriptor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open descriptor " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseDescriptor(buf.str());
}

std::string SaveDescriptor(const PolynomialSystem& sys) {
  json doc;
  doc["state_dim"] = sys.state_dim();
  doc["control_dim"] = sys.control_dim();
  json comps = json::array();
  for (const auto& comp : sys.components()) {
    json terms = json::array();
    for (const auto& t : comp) {
      terms.push_back({{"coeff", t.coeff}, {"exponents", t.exponents}});
    }
    comps.push_back(std::move(terms));
  }
  doc["components"] = std::move(comps);
  return doc.dump(2) + "\n";
}

void WriteDescriptor(const PolynomialSystem& sys,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write descriptor " + path.string());
  out << SaveDescriptor(sys);
}

}  // namespace openness
