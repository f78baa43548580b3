// Conserved and adiabatic quantities of a particle ensemble plus the CSV
// writer used by simulation runs.
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "gyropic/fields.hpp"
#include "gyropic/geometry.hpp"
#include "gyropic/pic.hpp"
#include "gyropic/poisson.hpp"

namespace gyropic {

struct EnergyBreakdown {
  double ek_aug = 0.0;  // sum w (eperp + vpar^2/2)
  double ek_raw = 0.0;  // sum w |v|^2/2 from the raw velocity
  double ep = 0.0;      // field energy over interior nodes
  double et = 0.0;      // ek_aug + ep
};

// 0.5 * sum_{interior nodes} |E|^2 * cell volume.
double field_energy(const FieldState& f, const GridClassification& cl);

EnergyBreakdown energy(const std::vector<ParticleState>& particles,
                       const FieldState& f, const GridClassification& cl);

// Kinetic part alone, for runs without a grid field.
EnergyBreakdown kinetic_energy(const std::vector<ParticleState>& particles);

// mu = sum_k w_k eperp_k / b(x_perp,k).
double adiabatic(const std::vector<ParticleState>& particles, const Field& f);

struct ZeroBaseline : std::runtime_error {
  ZeroBaseline() : std::runtime_error("relative_variation: q(t0) = 0") {}
};

// (q_i - q_0)/q_0 for each element; throws ZeroBaseline when q_0 = 0.
std::vector<double> relative_variation(const std::vector<double>& q);

struct DiagnosticsRecord {
  double t = 0.0;
  double ek_aug = 0.0;
  double ek_raw = 0.0;
  double ep = 0.0;
  double et = 0.0;
  double mu = 0.0;
  // Cumulative deposition weight dropped at non-interior nodes, as a
  // fraction of the initial total charge.
  double charge_lost = 0.0;
};

class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const std::string& path);
  ~DiagnosticsWriter();
  DiagnosticsWriter(const DiagnosticsWriter&) = delete;
  DiagnosticsWriter& operator=(const DiagnosticsWriter&) = delete;

  void append(const DiagnosticsRecord& r);

 private:
  std::FILE* f_ = nullptr;
};

}  // namespace gyropic
