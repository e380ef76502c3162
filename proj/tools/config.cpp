#include "config.hpp"

#include <functional>
#include <map>
#include <sstream>

#include "toml.hpp"

namespace dcg::cli {

RhoReading parse_rho_reading(const std::string& s) {
  if (s == "2m") return RhoReading::TwoM;
  if (s == "2/m") return RhoReading::TwoOverM;
  throw ConfigError("rho_reading must be \"2m\" or \"2/m\", got \"" + s + "\"");
}

ZetaMode parse_zeta_mode(const std::string& s) {
  if (s == "coupled") return ZetaMode::Coupled;
  if (s == "jacobi") return ZetaMode::Jacobi;
  throw ConfigError("zeta_mode must be \"coupled\" or \"jacobi\", got \"" + s + "\"");
}

namespace {

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double real(const toml::node& n, const std::string& at) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError(at + ": expected a number");
}

int integer(const toml::node& n, const std::string& at) {
  if (auto v = n.value<std::int64_t>()) return static_cast<int>(*v);
  throw ConfigError(at + ": expected an integer");
}

std::string text(const toml::node& n, const std::string& at) {
  if (auto v = n.value<std::string>()) return *v;
  throw ConfigError(at + ": expected a string");
}

bool boolean(const toml::node& n, const std::string& at) {
  if (auto v = n.value<bool>()) return *v;
  throw ConfigError(at + ": expected true or false");
}

using Setter = std::function<void(const toml::node&, const std::string&)>;

void apply(const toml::table& root, const std::string& section, const std::map<std::string, Setter>& keys) {
  const toml::node* node = root.get(section);
  if (!node) return;
  const toml::table* t = node->as_table();
  if (!t) throw ConfigError("[" + section + "] must be a table");
  for (auto&& [k, v] : *t) {
    const std::string key(k.str());
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown key " + where(section, key));
    it->second(v, where(section, key));
  }
}

}  // namespace

CliConfig load_config(const std::string& path) {
  toml::table root;
  try {
    root = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    std::ostringstream s;
    s << path << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(s.str());
  }
  for (auto&& [k, v] : root) {
    const std::string key(k.str());
    if (key != "construction" && key != "solve" && key != "output") throw ConfigError("unknown section [" + key + "]");
  }

  CliConfig c;
  ConstructionConfig& cc = c.construction;
  apply(root, "construction",
        {{"m", [&](auto& n, auto& at) { cc.m = integer(n, at); }},
         {"zeta", [&](auto& n, auto& at) { cc.zeta = real(n, at); }},
         {"b", [&](auto& n, auto& at) { cc.b = real(n, at); }},
         {"gamma", [&](auto& n, auto& at) { cc.gamma = real(n, at); }},
         {"rho_reading", [&](auto& n, auto& at) { cc.reading = parse_rho_reading(text(n, at)); }},
         {"n_theta", [&](auto& n, auto& at) { cc.res.n_theta = integer(n, at); }},
         {"n_axial", [&](auto& n, auto& at) { cc.res.n_axial = integer(n, at); }},
         {"n_square", [&](auto& n, auto& at) { cc.res.n_square = integer(n, at); }},
         {"band_boost", [&](auto& n, auto& at) { cc.res.band_boost = real(n, at); }},
         {"corner_round", [&](auto& n, auto& at) { cc.res.corner_round = real(n, at); }}});
  SolveOptions& so = c.solve;
  apply(root, "solve",
        {{"tol_H", [&](auto& n, auto& at) { so.tol_H = real(n, at); }},
         {"tol_F", [&](auto& n, auto& at) { so.tol_F = real(n, at); }},
         {"max_iter", [&](auto& n, auto& at) { so.max_iter = integer(n, at); }},
         {"c_bar", [&](auto& n, auto& at) { cc.c_bar = real(n, at); }},
         {"max_zeta_step", [&](auto& n, auto& at) { so.max_zeta_step = real(n, at); }},
         {"zeta_fd", [&](auto& n, auto& at) { so.zeta_fd = real(n, at); }},
         {"gmres_tol", [&](auto& n, auto& at) { so.gmres_tol = real(n, at); }},
         {"gmres_max", [&](auto& n, auto& at) { so.gmres_max = integer(n, at); }},
         {"zeta_mode", [&](auto& n, auto& at) { so.zeta_mode = parse_zeta_mode(text(n, at)); }}});
  apply(root, "output",
        {{"dir", [&](auto& n, auto& at) { c.out_dir = text(n, at); }},
         {"report", [&](auto& n, auto& at) { c.report = text(n, at); }},
         {"timings", [&](auto& n, auto& at) { c.timings = boolean(n, at); }}});
  return c;
}

}  // namespace dcg::cli
