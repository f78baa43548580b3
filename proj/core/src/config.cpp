// Config parsing and resolution into a validated CaseConfig.
#include "gyropic/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace gyropic {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "config error: key '" + key +
                               "' has non-numeric value '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "config error: key '" + key +
                               "' has non-integer value '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "config error: key '" + key +
                               "' has non-integer value '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "config error: key '" + key +
                             "' has non-boolean value '" + v + "'");
}

std::vector<double> parse_tuple(const std::string& key, const std::string& v,
                                size_t n) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_double(key, trim(part)));
  if (out.size() != n)
    throw ConfigError(key, "config error: key '" + key + "' expects " +
                               std::to_string(n) + " comma-separated values");
  return out;
}

}  // namespace

ConfigMap ConfigMap::parse_text(const std::string& text,
                                const std::string& origin) {
  ConfigMap m;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("", "config error: " + origin + ":" +
                                  std::to_string(lineno) +
                                  ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("", "config error: " + origin + ":" +
                                  std::to_string(lineno) + ": empty section");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "config error: " + origin + ":" +
                                std::to_string(lineno) +
                                ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("", "config error: " + origin + ":" +
                                std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError(key, "config error: " + origin + ":" +
                                 std::to_string(lineno) + ": key '" + key +
                                 "' appears before any [section]");
    m.values_[section + "." + key] = value;
  }
  return m;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "config error: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

void ConfigMap::set(const std::string& dotted, const std::string& value) {
  if (dotted.find('.') == std::string::npos)
    throw ConfigError(dotted, "config error: override '" + dotted +
                                  "' must be section.key");
  values_[dotted] = value;
}

std::string to_string(CaseKind k) {
  switch (k) {
    case CaseKind::SingleParticle: return "single_particle";
    case CaseKind::Diocotron: return "diocotron";
    case CaseKind::DShape: return "dshape";
  }
  return "?";
}

namespace {

CaseKind case_from_string(const std::string& key, const std::string& v) {
  if (v == "single_particle") return CaseKind::SingleParticle;
  if (v == "diocotron") return CaseKind::Diocotron;
  if (v == "dshape") return CaseKind::DShape;
  throw ConfigError(key, "config error: key '" + key + "' has unknown case '" +
                             v +
                             "' (expected single_particle|diocotron|dshape)");
}

void apply_case_defaults(CaseConfig& c) {
  switch (c.kind) {
    case CaseKind::SingleParticle:
      break;  // struct defaults are the single-particle benchmark
    case CaseKind::Diocotron:
      c.eps = 0.05;
      c.dt = 0.1;
      c.t_final = 40.0;
      c.n_particles = 100000;
      c.nx = c.ny = 64;
      c.nz = 8;
      c.n0 = 4000.0;
      c.n0_means_total = true;
      c.kz = 3.0;
      break;
    case CaseKind::DShape:
      c.eps = 0.01;
      c.dt = 0.1;
      c.t_final = 10.0;
      c.n_particles = 100000;
      c.nx = 64;
      c.ny = 96;
      c.nz = 8;
      c.n0 = 5000.0;
      c.n0_means_total = false;
      c.kz = 1.0;
      break;
  }
}

}  // namespace

namespace {

std::string fmt_g(double x) {
  char buf[40];
  for (int prec : {6, 9, 12, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string fmt_tuple3(const Vec3& v) {
  return fmt_g(v.x) + "," + fmt_g(v.y) + "," + fmt_g(v.z);
}

// One row per recognized key. resolve_config dispatches through this
// table, config_echo prints from it, and config_key_docs exposes it,
// so the accepted keys, the echoed file, and the documented defaults
// cannot drift apart.
struct KeyEntry {
  const char* key;
  const char* desc;
  void (*apply)(CaseConfig&, const std::string&, const std::string&);
  std::string (*echo)(const CaseConfig&);
  bool alias = false;  // accepted and listed, but skipped by config_echo
};

void apply_scheme(CaseConfig& c, const std::string& k, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::toupper(ch); });
  try {
    c.scheme = scheme_from_string(s);
  } catch (const std::exception& e) {
    throw ConfigError(k, std::string("config error: ") + e.what());
  }
}

const KeyEntry kKeyTable[] = {
    {"run.case", "benchmark case: single_particle|diocotron|dshape",
     +[](CaseConfig&, const std::string&, const std::string&) {
       // consumed before the table pass so per-case defaults land first
     },
     +[](const CaseConfig& c) { return to_string(c.kind); }},
    {"run.eps", "magnetic stiffness; the field along z is b/eps",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.eps = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.eps); }},
    {"run.dt", "time step",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.dt = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.dt); }},
    {"run.t_final", "simulation horizon",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.t_final = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.t_final); }},
    {"run.n_particles", "marker count",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.n_particles = parse_long(k, v);
     },
     +[](const CaseConfig& c) { return std::to_string(c.n_particles); }},
    {"run.seed", "sampling seed; equal seeds give byte-identical output",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.seed = parse_u64(k, v);
     },
     +[](const CaseConfig& c) { return std::to_string(c.seed); }},
    {"run.threads", "worker threads for deposit and push",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.threads = static_cast<int>(parse_long(k, v));
     },
     +[](const CaseConfig& c) { return std::to_string(c.threads); }},
    {"run.scheme", "accepted spelling of scheme.name", apply_scheme,
     +[](const CaseConfig& c) { return to_string(c.scheme); }, true},
    {"grid.nx", "grid nodes along x",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.nx = static_cast<int>(parse_long(k, v));
     },
     +[](const CaseConfig& c) { return std::to_string(c.nx); }},
    {"grid.ny", "grid nodes along y",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.ny = static_cast<int>(parse_long(k, v));
     },
     +[](const CaseConfig& c) { return std::to_string(c.ny); }},
    {"grid.nz", "grid nodes along z (periodic)",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.nz = static_cast<int>(parse_long(k, v));
     },
     +[](const CaseConfig& c) { return std::to_string(c.nz); }},
    {"scheme.name",
     "integrator: SI1|SI2|SI3|LIMIT1|LIMIT2|LIMIT3|RK4|RK4LIMIT",
     apply_scheme,
     +[](const CaseConfig& c) { return to_string(c.scheme); }},
    {"scheme.si3_stage_times", "SI3 stage-time pairing: printed|uniform",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       if (v == "printed")
         c.si3_uniform_stage_times = false;
       else if (v == "uniform")
         c.si3_uniform_stage_times = true;
       else
         throw ConfigError(k, "config error: key '" + k +
                                  "' must be printed|uniform");
     },
     +[](const CaseConfig& c) {
       return std::string(c.si3_uniform_stage_times ? "uniform" : "printed");
     }},
    {"case.lz", "domain length along z",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.lz = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.lz); }},
    {"case.disk_radius", "disk domain radius (diocotron)",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.disk_radius = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.disk_radius); }},
    {"case.r1", "annulus inner radius (diocotron)",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.r1 = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.r1); }},
    {"case.r2", "annulus outer radius (diocotron)",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.r2 = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.r2); }},
    {"case.n0", "density amplitude; total charge when n0_means_total",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.n0 = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.n0); }},
    {"case.n0_means_total",
     "read n0 as the total charge instead of a density scale",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.n0_means_total = parse_bool(k, v);
     },
     +[](const CaseConfig& c) {
       return std::string(c.n0_means_total ? "true" : "false");
     }},
    {"case.alpha", "initial perturbation amplitude",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.alpha = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.alpha); }},
    {"case.kz", "perturbation mode count along z",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.kz = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.kz); }},
    {"case.rho0", "uniform background charge subtracted before each solve",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.rho0 = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.rho0); }},
    {"case.x0", "initial position, three comma-separated values",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       const auto t = parse_tuple(k, v, 3);
       c.x0 = {t[0], t[1], t[2]};
     },
     +[](const CaseConfig& c) { return fmt_tuple3(c.x0); }},
    {"case.v0", "initial velocity, three comma-separated values",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       const auto t = parse_tuple(k, v, 3);
       c.v0 = {t[0], t[1], t[2]};
     },
     +[](const CaseConfig& c) { return fmt_tuple3(c.v0); }},
    {"case.gauss_r0", "Gaussian bump width (dshape)",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.gauss_r0 = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.gauss_r0); }},
    {"case.gauss_x0",
     "Gaussian bump center, mirrored across the origin (dshape)",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       const auto t = parse_tuple(k, v, 2);
       c.gauss_x0 = {t[0], t[1]};
     },
     +[](const CaseConfig& c) {
       return fmt_g(c.gauss_x0.x) + "," + fmt_g(c.gauss_x0.y);
     }},
    {"case.dshape_r0", "D-shaped cross-section major radius",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.dshape_r0 = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.dshape_r0); }},
    {"output.dir", "output directory",
     +[](CaseConfig& c, const std::string&, const std::string& v) {
       c.output_dir = v;
     },
     +[](const CaseConfig& c) { return c.output_dir; }},
    {"output.diag_interval",
     "diagnostics cadence in time units; 0 emits every step",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.diag_interval = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.diag_interval); }},
    {"output.snapshot_interval",
     "density snapshot cadence in time units; 0 disables snapshots",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.snapshot_interval = parse_double(k, v);
     },
     +[](const CaseConfig& c) { return fmt_g(c.snapshot_interval); }},
    {"output.quiet", "suppress progress output",
     +[](CaseConfig& c, const std::string& k, const std::string& v) {
       c.quiet = parse_bool(k, v);
     },
     +[](const CaseConfig& c) {
       return std::string(c.quiet ? "true" : "false");
     }},
};

}  // namespace

CaseConfig resolve_config(const ConfigMap& m) {
  CaseConfig c;
  if (m.contains("run.case"))
    c.kind = case_from_string("run.case", m.values().at("run.case"));
  apply_case_defaults(c);

  for (const auto& [key, v] : m.values()) {
    const KeyEntry* hit = nullptr;
    for (const KeyEntry& e : kKeyTable) {
      if (key == e.key) {
        hit = &e;
        break;
      }
    }
    if (!hit) throw ConfigError(key, "config error: unknown key '" + key + "'");
    hit->apply(c, key, v);
  }

  auto require = [](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key, "config error: " + msg);
  };
  require(c.dt > 0.0, "run.dt", "run.dt must be > 0");
  require(c.t_final > 0.0, "run.t_final", "run.t_final must be > 0");
  require(c.eps > 0.0, "run.eps", "run.eps must be > 0");
  require(c.n_particles >= 1, "run.n_particles", "run.n_particles must be >= 1");
  require(c.threads >= 1, "run.threads", "run.threads must be >= 1");
  require(c.nx >= 8 && c.ny >= 8, "grid.nx", "grid.nx and grid.ny must be >= 8");
  require(c.nz >= 1, "grid.nz", "grid.nz must be >= 1");
  require(c.lz > 0.0, "case.lz", "case.lz must be > 0");
  require(c.diag_interval >= 0.0, "output.diag_interval",
          "output.diag_interval must be >= 0");
  require(c.snapshot_interval >= 0.0, "output.snapshot_interval",
          "output.snapshot_interval must be >= 0");
  if (c.kind == CaseKind::Diocotron) {
    require(c.disk_radius > 0.0, "case.disk_radius",
            "case.disk_radius must be > 0");
    require(0.0 <= c.r1 && c.r1 < c.r2, "case.r1",
            "annulus needs 0 <= r1 < r2");
    require(c.r2 < c.disk_radius, "case.r2",
            "annulus must sit inside the domain (r2 < disk_radius)");
  }
  if (c.kind == CaseKind::DShape) {
    require(c.dshape_r0 > 0.0, "case.dshape_r0", "case.dshape_r0 must be > 0");
    require(c.gauss_r0 > 0.0, "case.gauss_r0", "case.gauss_r0 must be > 0");
  }
  return c;
}

std::string config_echo(const CaseConfig& c, const std::string& version_line) {
  std::string out = "# " + version_line + "\n";
  std::string section;
  for (const KeyEntry& e : kKeyTable) {
    if (e.alias) continue;
    const std::string key = e.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      section = sec;
      out += "[" + section + "]\n";
    }
    out += key.substr(dot + 1) + " = " + e.echo(c) + "\n";
  }
  return out;
}

std::vector<ConfigKeyDoc> config_key_docs(CaseKind kind) {
  CaseConfig c;
  c.kind = kind;
  apply_case_defaults(c);
  std::vector<ConfigKeyDoc> docs;
  docs.reserve(std::size(kKeyTable));
  for (const KeyEntry& e : kKeyTable)
    docs.push_back({e.key, e.echo(c), e.desc});
  return docs;
}

}  // namespace gyropic
