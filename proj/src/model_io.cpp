#include "r0kit/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace r0kit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "+inf" || lower == "infinity") return kInfinity;
  double value = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ParseError("cannot parse number '" + s + "' for " + what);
  }
  return value;
}

std::vector<double> parse_list(const std::string& s, std::size_t expected,
                               const std::string& what) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(item, what));
  if (out.size() != expected) {
    throw ParseError(what + " expects " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

}  // namespace

RateFunction load_rate_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open rate table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("rate table " + path.string() + " is empty");
  std::vector<double> xs;
  std::vector<double> vs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected x,value");
    }
    xs.push_back(parse_number(t.substr(0, comma), "table x"));
    vs.push_back(parse_number(t.substr(comma + 1), "table value"));
  }
  if (xs.empty()) throw ParseError("rate table " + path.string() + " has no rows");
  return RateFunction::tabulated(std::move(xs), std::move(vs));
}

RateFunction parse_rate(const std::string& text, const std::filesystem::path& base_dir) {
  const std::string s = trim(text);
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ParseError("rate '" + s + "' lacks a family prefix");
  const std::string family = trim(s.substr(0, colon));
  const std::string args = trim(s.substr(colon + 1));
  if (family == "const") return RateFunction::constant(parse_number(args, "const"));
  if (family == "powexp") {
    const auto v = parse_list(args, 3, "powexp");
    return RateFunction::power_exp(v[0], v[1], v[2]);
  }
  if (family == "step") {
    const auto v = parse_list(args, 2, "step");
    return RateFunction::step(v[0], v[1]);
  }
  if (family == "prop_mu") return RateFunction::proportional_to_mu(parse_number(args, "prop_mu"));
  if (family == "table") {
    std::filesystem::path p(args);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return load_rate_table(p);
  }
  throw ParseError("unknown rate family '" + family + "'");
}

ModelSpec parse_model(const std::string& text, const std::filesystem::path& base_dir) {
  static const std::map<std::string, std::set<std::string>> kKeys = {
      {"domain", {"x0", "x_max", "x_min"}},
      {"rates", {"gamma", "mu", "beta", "sigma"}},
      {"diffusion", {"D"}},
      {"birth", {"multiplicity", "sample_point"}},
  };
  ModelSpec m;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto where = "line " + std::to_string(line_no) + ": ";
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kKeys.contains(section)) throw ParseError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    if (section.empty()) throw ParseError(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKeys.at(section).contains(key)) {
      throw ParseError(where + "unknown key '" + key + "' in [" + section + "]");
    }
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) throw ParseError(where + "duplicate key " + full);
    try {
      if (full == "domain.x0") m.x0 = parse_number(value, key);
      else if (full == "domain.x_max") m.x_max = parse_number(value, key);
      else if (full == "domain.x_min") m.x_min = parse_number(value, key);
      else if (full == "rates.gamma") m.gamma = parse_rate(value, base_dir);
      else if (full == "rates.mu") m.mu = parse_rate(value, base_dir);
      else if (full == "rates.beta") m.beta = parse_rate(value, base_dir);
      else if (full == "rates.sigma") m.size_weight = parse_rate(value, base_dir);
      else if (full == "diffusion.D") m.diffusion = parse_number(value, key);
      else if (full == "birth.multiplicity") m.birth_multiplicity = parse_number(value, key);
      else if (full == "birth.sample_point") m.birth_sample_point = parse_number(value, key);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  for (const char* required : {"domain.x0", "rates.gamma", "rates.mu", "rates.beta"}) {
    if (!seen.contains(required)) throw ParseError(std::string("missing required key ") + required);
  }
  return m;
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), path.parent_path());
}

}  // namespace r0kit
