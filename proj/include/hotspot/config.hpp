#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hotspot/dynamics.hpp"
#include "hotspot/error.hpp"
#include "hotspot/grid.hpp"
#include "hotspot/material.hpp"

namespace hotspot {

/// Formats with 17 significant digits so values round-trip exactly.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

inline double to_number(const std::string& text, const std::string& field) {
  const auto s = unquote(trim(text));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(field, "expected a number, got '" + s + "'");
  }
}

}  // namespace detail

/// Sectioned key = value text: `[section]` headers, `#` or `;` comments,
/// optional quotes around values. Keys before the first header are global.
class RawConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static RawConfig parse(std::istream& in) {
    RawConfig cfg;
    std::string section;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      auto text = line;
      bool in_quote = false;
      for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '"') in_quote = !in_quote;
        if (!in_quote && (text[i] == '#' || text[i] == ';')) {
          text.resize(i);
          break;
        }
      }
      text = detail::trim(text);
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']') throw ParseError("unterminated section header", number);
        section = detail::trim(std::string_view(text).substr(1, text.size() - 2));
        if (section.empty()) throw ParseError("empty section name", number);
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
      const auto key = detail::trim(std::string_view(text).substr(0, eq));
      const auto value = detail::trim(std::string_view(text).substr(eq + 1));
      if (key.empty()) throw ParseError("missing key", number);
      if (value.empty()) throw ParseError("missing value for '" + key + "'", number);
      auto& sec = cfg.sections_[section];
      if (sec.contains(key)) throw ParseError("duplicate key '" + key + "'", number);
      sec[key] = Entry{value, number};
    }
    return cfg;
  }

  static RawConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return detail::unquote(k->second.value);
  }

  void set(const std::string& section, const std::string& key, std::string value) {
    sections_[section][key] = Entry{std::move(value), 0};
  }

  const std::map<std::string, std::map<std::string, Entry>>& sections() const noexcept {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Named initial profile: zero | const{value} | sine{amplitude, mode}
/// | cosine{offset, amplitude, mode} | hat{center, width, height} | csv{path}.
struct Profile {
  std::string kind = "zero";
  std::map<std::string, double> params;
  std::string path;

  static const std::vector<std::string>& parameter_names(const std::string& kind) {
    static const std::map<std::string, std::vector<std::string>> names = {
        {"zero", {}},
        {"const", {"value"}},
        {"sine", {"amplitude", "mode"}},
        {"cosine", {"offset", "amplitude", "mode"}},
        {"hat", {"center", "width", "height"}},
        {"csv", {"path"}}};
    auto it = names.find(kind);
    if (it == names.end()) throw ValidationError("profile", "unknown profile '" + kind + "'");
    return it->second;
  }

  static Profile parse(const std::string& text, const std::string& field) {
    Profile p;
    const auto s = detail::unquote(detail::trim(text));
    const auto brace = s.find('{');
    p.kind = detail::trim(s.substr(0, brace));
    const auto& names = parameter_names(p.kind);
    if (brace == std::string::npos) {
      if (!names.empty()) throw ValidationError(field, "profile '" + p.kind + "' needs {...}");
      return p;
    }
    if (s.back() != '}') throw ValidationError(field, "unterminated '{' in profile");
    const auto body = s.substr(brace + 1, s.size() - brace - 2);
    std::vector<std::string> parts;
    std::stringstream ss(body);
    for (std::string part; std::getline(ss, part, ',');)
      if (!detail::trim(part).empty()) parts.push_back(detail::trim(part));
    if (parts.size() != names.size())
      throw ValidationError(field, "profile '" + p.kind + "' takes " +
                                       std::to_string(names.size()) + " parameter(s)");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::string name = names[i];
      std::string value = parts[i];
      if (auto eq = parts[i].find('='); eq != std::string::npos) {
        name = detail::trim(parts[i].substr(0, eq));
        value = detail::trim(parts[i].substr(eq + 1));
        if (std::find(names.begin(), names.end(), name) == names.end())
          throw ValidationError(field, "unknown parameter '" + name + "'");
      }
      if (name == "path")
        p.path = detail::unquote(value);
      else
        p.params[name] = detail::to_number(value, field + "." + name);
    }
    if (p.kind != "csv" && p.params.size() != names.size())
      throw ValidationError(field, "duplicate or missing profile parameters");
    return p;
  }

  std::string to_string() const {
    const auto& names = parameter_names(kind);
    if (names.empty()) return kind;
    std::string out = kind + "{";
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out += ", ";
      out += names[i] + "=";
      out += names[i] == "path" ? path : format_double(params.at(names[i]));
    }
    return out + "}";
  }

  double param(const std::string& name) const { return params.at(name); }

  std::vector<double> evaluate(const Grid1D& grid) const {
    std::vector<double> out(grid.n_nodes(), 0.0);
    const double L = grid.measure();
    constexpr double pi = 3.14159265358979323846;
    if (kind == "csv") return load_csv(grid);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x = grid.node(i);
      const double s = (x - grid.x_left()) / L;
      if (kind == "const") {
        out[i] = param("value");
      } else if (kind == "sine") {
        out[i] = param("amplitude") * std::sin(param("mode") * pi * s);
      } else if (kind == "cosine") {
        out[i] = param("offset") + param("amplitude") * std::cos(param("mode") * pi * s);
      } else if (kind == "hat") {
        out[i] = param("height") *
                 std::max(0.0, 1.0 - std::abs(x - param("center")) / param("width"));
      }
    }
    // sin(k pi) is not exactly zero in floating point.
    if (kind == "sine" && std::abs(param("mode") - std::round(param("mode"))) == 0.0) {
      out.front() = 0.0;
      out.back() = 0.0;
    }
    return out;
  }

 private:
  /// Two-column CSV (x,value) with header, linearly interpolated onto the grid.
  std::vector<double> load_csv(const Grid1D& grid) const {
    std::ifstream in(path);
    if (!in) throw ValidationError("profile.csv", "cannot open '" + path + "'");
    std::vector<double> xs, ys;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (detail::trim(line).empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw ValidationError("profile.csv", "expected 'x,value' rows in '" + path + "'");
      xs.push_back(detail::to_number(line.substr(0, comma), "profile.csv"));
      ys.push_back(detail::to_number(line.substr(comma + 1), "profile.csv"));
    }
    if (xs.size() < 2) throw ValidationError("profile.csv", "need at least two rows");
    std::vector<double> out(grid.n_nodes());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x = grid.node(i);
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      auto k = std::clamp<std::ptrdiff_t>(std::distance(xs.begin(), it), 1,
                                          static_cast<std::ptrdiff_t>(xs.size()) - 1);
      const double w = std::clamp((x - xs[k - 1]) / (xs[k] - xs[k - 1]), 0.0, 1.0);
      out[i] = (1.0 - w) * ys[k - 1] + w * ys[k];
    }
    return out;
  }
};

struct MaterialConfig {
  std::string kind = "power_law";
  double gamma_star = 1.0;
  double mu = 2.0;
  double f_star = 0.0;
  std::string table;  // custom: CSV with columns xi,gamma,f

  CoefficientLaw law() const {
    if (kind == "power_law") return CoefficientLaw::power_law(gamma_star, mu, f_star);
    std::ifstream in(table);
    if (!in) throw ValidationError("material.table", "cannot open '" + table + "'");
    TabulatedLaw t;
    std::string line;
    std::getline(in, line);
    if (detail::trim(line) != "xi,gamma,f")
      throw ValidationError("material.table", "header must be 'xi,gamma,f'");
    while (std::getline(in, line)) {
      if (detail::trim(line).empty()) continue;
      std::stringstream ss(line);
      std::string a, b, c;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
        throw ValidationError("material.table", "expected three columns");
      t.xi.push_back(detail::to_number(a, "material.table"));
      t.gamma.push_back(detail::to_number(b, "material.table"));
      t.f.push_back(detail::to_number(c, "material.table"));
    }
    return CoefficientLaw::tabulated(std::move(t));
  }
};

struct RunConfig {
  MaterialConfig material;
  double x_left = 0.0, x_right = 1.0;
  int n_cells = 256;
  double a = 1.0, D = 1.0, T = 1.0;
  Profile u0, u0t;
  Profile theta0{"const", {{"value", 0.0}}, {}};
  double dt_init = 1e-4, dt_min = 1e-14, dt_max = 1e-2;
  double step_rel_tol = 1e-5;
  double theta_blowup_threshold = 1e8;
  double checkpoint_every = 0.0;
  double ode_c = 1.0;
  std::optional<double> ode_theta0;
  std::optional<double> certify_eta, certify_M;
  double audit_tol = 0.02;
  std::uint64_t seed = 0;

  Grid1D grid() const { return Grid1D(x_left, x_right, n_cells); }

  Params params() const {
    Params p;
    p.a = a;
    p.D = D;
    p.law = material.law();
    p.horizon = T;
    p.dt_init = dt_init;
    p.dt_min = dt_min;
    p.dt_max = dt_max;
    p.theta_blowup_threshold = theta_blowup_threshold;
    p.step_rel_tol = step_rel_tol;
    p.checkpoint_every = checkpoint_every;
    return p;
  }

  State initial_state() const {
    const auto g = grid();
    return make_initial_state(g, u0.evaluate(g), u0t.evaluate(g), theta0.evaluate(g), a);
  }

  /// Checks every constraint, including the initial-data conditions.
  void validate() const {
    if (material.kind != "power_law" && material.kind != "custom")
      throw ValidationError("material.kind", "must be power_law or custom");
    if (material.kind == "power_law" && !(material.gamma_star > 0.0))
      throw ValidationError("material.gamma_star", "must be positive");
    if (material.kind == "power_law" && material.mu < 0.0)
      throw ValidationError("material.mu", "must be nonnegative");
    if (material.kind == "custom" && material.table.empty())
      throw ValidationError("material.table", "custom law needs a table path");
    const auto g = grid();
    params().validate();
    if (u0.kind == "hat" && !(u0.param("width") > 0.0))
      throw ValidationError("initial.u0", "hat width must be positive");
    if (u0t.kind == "hat" && !(u0t.param("width") > 0.0))
      throw ValidationError("initial.u0t", "hat width must be positive");
    auto vanish = [](const std::vector<double>& w, const char* field) {
      const double scale = std::max(1.0, *std::max_element(w.begin(), w.end(), [](double x, double y) {
        return std::abs(x) < std::abs(y);
      }));
      if (std::abs(w.front()) > 1e-12 * scale || std::abs(w.back()) > 1e-12 * scale)
        throw ValidationError(field, "must vanish at both endpoints");
    };
    vanish(u0.evaluate(g), "initial.u0");
    vanish(u0t.evaluate(g), "initial.u0t");
    const auto th = theta0.evaluate(g);
    for (double v : th)
      if (!(v >= 0.0)) throw ValidationError("initial.theta0", "theta0 nonnegative");
    if (!(ode_c > 0.0)) throw ValidationError("ode.c", "must be positive");
    if (ode_theta0 && *ode_theta0 < 0.0) throw ValidationError("ode.theta0", "must be nonnegative");
    if (!(audit_tol >= 0.0)) throw ValidationError("verify.audit_tol", "must be nonnegative");
  }

  /// Canonical text form with every default filled in.
  std::string to_text() const {
    std::ostringstream o;
    o << "seed = " << seed << "\n\n[material]\nkind = \"" << material.kind << "\"\n";
    if (material.kind == "power_law")
      o << "gamma_star = " << format_double(material.gamma_star)
        << "\nmu = " << format_double(material.mu)
        << "\nf_star = " << format_double(material.f_star) << "\n";
    else
      o << "table = \"" << material.table << "\"\n";
    o << "\n[domain]\nx_left = " << format_double(x_left) << "\nx_right = " << format_double(x_right)
      << "\nn_cells = " << n_cells << "\n\n[physics]\na = " << format_double(a)
      << "\nD = " << format_double(D) << "\nT = " << format_double(T) << "\n\n[initial]\nu0 = "
      << u0.to_string() << "\nu0t = " << u0t.to_string() << "\ntheta0 = " << theta0.to_string()
      << "\n\n[solver]\ndt_init = " << format_double(dt_init)
      << "\ndt_min = " << format_double(dt_min) << "\ndt_max = " << format_double(dt_max)
      << "\nstep_rel_tol = " << format_double(step_rel_tol)
      << "\ntheta_blowup_threshold = " << format_double(theta_blowup_threshold)
      << "\ncheckpoint_every = " << format_double(checkpoint_every) << "\n\n[ode]\nc = "
      << format_double(ode_c) << "\n";
    if (ode_theta0) o << "theta0 = " << format_double(*ode_theta0) << "\n";
    o << "\n[certify]\n";
    if (certify_eta) o << "eta = " << format_double(*certify_eta) << "\n";
    if (certify_M) o << "M = " << format_double(*certify_M) << "\n";
    o << "\n[verify]\naudit_tol = " << format_double(audit_tol) << "\n";
    return o.str();
  }
};

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"", {"seed"}},
      {"material", {"kind", "gamma_star", "mu", "f_star", "table"}},
      {"domain", {"x_left", "x_right", "n_cells"}},
      {"physics", {"a", "D", "T"}},
      {"initial", {"u0", "u0t", "theta0"}},
      {"solver",
       {"dt_init", "dt_min", "dt_max", "step_rel_tol", "theta_blowup_threshold",
        "checkpoint_every"}},
      {"ode", {"c", "theta0"}},
      {"certify", {"eta", "M"}},
      {"verify", {"audit_tol"}}};
  return keys;
}

}  // namespace detail

/// Builds and validates a RunConfig. Relative file paths resolve against
/// base_dir.
inline RunConfig build_config(const RawConfig& raw, const std::filesystem::path& base_dir = {}) {
  for (const auto& [section, entries] : raw.sections()) {
    auto known = detail::known_keys().find(section);
    if (known == detail::known_keys().end())
      throw ParseError("unknown section [" + section + "]", entries.begin()->second.line);
    for (const auto& [key, entry] : entries)
      if (std::find(known->second.begin(), known->second.end(), key) == known->second.end())
        throw ParseError("unknown key '" + key + "' in [" + section + "]", entry.line);
  }

  RunConfig c;
  auto num = [&raw](const std::string& s, const std::string& k, double& target) {
    if (auto v = raw.get(s, k)) target = detail::to_number(*v, s + "." + k);
  };
  auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return path.lexically_normal().string();
  };

  if (auto v = raw.get("", "seed"))
    c.seed = static_cast<std::uint64_t>(detail::to_number(*v, "seed"));
  if (auto v = raw.get("material", "kind")) c.material.kind = *v;
  num("material", "gamma_star", c.material.gamma_star);
  num("material", "mu", c.material.mu);
  num("material", "f_star", c.material.f_star);
  if (auto v = raw.get("material", "table")) c.material.table = resolve(*v);
  num("domain", "x_left", c.x_left);
  num("domain", "x_right", c.x_right);
  if (auto v = raw.get("domain", "n_cells")) {
    const double n = detail::to_number(*v, "domain.n_cells");
    if (n != std::floor(n)) throw ValidationError("domain.n_cells", "must be an integer");
    c.n_cells = static_cast<int>(n);
  }
  num("physics", "a", c.a);
  num("physics", "D", c.D);
  num("physics", "T", c.T);
  auto profile = [&](const char* key, Profile& target) {
    if (auto v = raw.get("initial", key)) {
      target = Profile::parse(*v, std::string("initial.") + key);
      if (target.kind == "csv") target.path = resolve(target.path);
    }
  };
  profile("u0", c.u0);
  profile("u0t", c.u0t);
  profile("theta0", c.theta0);
  num("solver", "dt_init", c.dt_init);
  num("solver", "dt_min", c.dt_min);
  num("solver", "dt_max", c.dt_max);
  num("solver", "step_rel_tol", c.step_rel_tol);
  num("solver", "theta_blowup_threshold", c.theta_blowup_threshold);
  num("solver", "checkpoint_every", c.checkpoint_every);
  num("ode", "c", c.ode_c);
  if (auto v = raw.get("ode", "theta0")) c.ode_theta0 = detail::to_number(*v, "ode.theta0");
  if (auto v = raw.get("certify", "eta")) c.certify_eta = detail::to_number(*v, "certify.eta");
  if (auto v = raw.get("certify", "M")) c.certify_M = detail::to_number(*v, "certify.M");
  num("verify", "audit_tol", c.audit_tol);
  c.validate();
  return c;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path.string() + "'");
  return build_config(RawConfig::parse(in), path.parent_path());
}

inline RunConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir = {}) {
  return build_config(RawConfig::parse_text(text), base_dir);
}

/// Overrides one value addressed as `section.key` or `initial.<profile>.<param>`.
inline void override_value(RawConfig& raw, const std::string& path, double value) {
  const auto first = path.find('.');
  if (first == std::string::npos)
    throw ValidationError("sweep.param", "expected section.key, got '" + path + "'");
  const auto section = path.substr(0, first);
  const auto rest = path.substr(first + 1);
  const auto second = rest.find('.');
  if (second == std::string::npos) {
    raw.set(section, rest, format_double(value));
    return;
  }
  if (section != "initial")
    throw ValidationError("sweep.param", "only initial profiles take a third path component");
  const auto key = rest.substr(0, second);
  const auto param = rest.substr(second + 1);
  auto current = raw.get(section, key);
  Profile p = current ? Profile::parse(*current, path) : Profile{};
  const auto& names = Profile::parameter_names(p.kind);
  if (std::find(names.begin(), names.end(), param) == names.end() || param == "path")
    throw ValidationError("sweep.param", "profile '" + p.kind + "' has no parameter '" + param + "'");
  p.params[param] = value;
  raw.set(section, key, p.to_string());
}

}  // namespace hotspot
