// Run configuration: the line-oriented config format, the resolved
// per-run parameter set, and the meta-file echo used for reproducibility.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gyropic/pusher.hpp"
#include "gyropic/vec.hpp"

namespace gyropic {

struct ConfigError : std::runtime_error {
  std::string key;  // offending "section.key", empty for syntax errors
  ConfigError(std::string k, const std::string& msg)
      : std::runtime_error(msg), key(std::move(k)) {}
};

// Flat "section.key" -> value store preserving insertion order of unknown
// detection. Sections come from `[section]` headers; lines are
// `key = value`, `#` starts a comment.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_text(const std::string& text,
                              const std::string& origin = "<text>");

  // Inserts or overwrites; dotted must be "section.key".
  void set(const std::string& dotted, const std::string& value);

  bool contains(const std::string& dotted) const {
    return values_.count(dotted) != 0;
  }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class CaseKind { SingleParticle, Diocotron, DShape };

std::string to_string(CaseKind k);

struct CaseConfig {
  CaseKind kind = CaseKind::SingleParticle;

  // [run]
  double eps = 0.1;
  double dt = 0.1;
  double t_final = 10.0;
  long n_particles = 1;
  std::uint64_t seed = 12345;
  int threads = 1;

  // [grid]
  int nx = 64;
  int ny = 64;
  int nz = 8;

  // [scheme]
  Scheme scheme = Scheme::SI3;
  bool si3_uniform_stage_times = false;

  // [case]
  double lz = 1.0;
  double disk_radius = 9.0;     // diocotron cross-section radius
  double r1 = 6.0;              // annulus bounds
  double r2 = 7.0;
  double n0 = 4000.0;           // charge scale
  bool n0_means_total = true;   // n0 is the total charge, not a density
  double alpha = 1e-3;          // perturbation amplitude
  double kz = 3.0;              // axial periods of the perturbation
  double rho0 = 0.0;            // uniform background subtracted before solve
  Vec3 x0{5.0, 0.0, 0.0};       // single-particle initial position
  Vec3 v0{4.0, 3.0, 2.0};       // single-particle initial velocity
  double gauss_r0 = 3.0;        // blob width
  Vec2 gauss_x0{1.5, -1.5};     // blob centers at +/- this offset
  double dshape_r0 = 10.0;      // flux-coordinate radius of the D section

  // [output]
  std::string output_dir = "out";
  double diag_interval = 0.0;      // 0: every step
  double snapshot_interval = 0.0;  // 0: no snapshots
  bool quiet = false;
};

// Applies per-case defaults, then the explicit entries. Throws ConfigError
// on unknown keys, malformed values, or violated bounds.
CaseConfig resolve_config(const ConfigMap& m);

// Full resolved key set in config syntax; parsing it back yields the same
// CaseConfig. version_line goes in as a leading comment.
std::string config_echo(const CaseConfig& c, const std::string& version_line);

struct ConfigKeyDoc {
  std::string key;            // dotted "section.key"
  std::string default_value;  // default under `kind`, in config syntax
  std::string description;
};

// Every recognized key with its per-case default, in echo order. Backed by
// the same table resolve_config validates against, so listings derived from
// it cannot drift from what the parser accepts.
std::vector<ConfigKeyDoc> config_key_docs(CaseKind kind);

}  // namespace gyropic
