// Energy and adiabatic-variable reductions over particle ensembles.
#include "gyropic/diagnostics.hpp"

namespace gyropic {

double field_energy(const FieldState& f, const GridClassification& cl) {
  const Grid3& g = f.grid;
  const double vol = g.xy.dx * g.xy.dy * g.dz;
  double s = 0.0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.xy.ny; ++j)
      for (int i = 0; i < g.xy.nx; ++i) {
        if (cl.at(i, j) != NodeLabel::Interior) continue;
        s += norm2(f.E[g.index(i, j, k)]);
      }
  return 0.5 * s * vol;
}

EnergyBreakdown kinetic_energy(const std::vector<ParticleState>& particles) {
  EnergyBreakdown e;
  for (const ParticleState& p : particles) {
    e.ek_aug += p.w * (p.eperp + 0.5 * p.v.z * p.v.z);
    e.ek_raw += p.w * 0.5 * norm2(p.v);
  }
  e.et = e.ek_aug;
  return e;
}

EnergyBreakdown energy(const std::vector<ParticleState>& particles,
                       const FieldState& f, const GridClassification& cl) {
  EnergyBreakdown e = kinetic_energy(particles);
  e.ep = field_energy(f, cl);
  e.et = e.ek_aug + e.ep;
  return e;
}

double adiabatic(const std::vector<ParticleState>& particles, const Field& f) {
  double mu = 0.0;
  for (const ParticleState& p : particles) mu += p.w * p.eperp / f.b(p.x.xy());
  return mu;
}

std::vector<double> relative_variation(const std::vector<double>& q) {
  if (q.empty()) return {};
  if (q.front() == 0.0) throw ZeroBaseline();
  std::vector<double> out(q.size());
  for (size_t i = 0; i < q.size(); ++i) out[i] = (q[i] - q[0]) / q[0];
  return out;
}

DiagnosticsWriter::DiagnosticsWriter(const std::string& path) {
  f_ = std::fopen(path.c_str(), "w");
  if (!f_)
    throw std::runtime_error("diagnostics: cannot open " + path);
  std::fprintf(f_, "t,Ek_aug,Ek_raw,Ep,Et,mu,charge_lost\n");
}

DiagnosticsWriter::~DiagnosticsWriter() {
  if (f_) std::fclose(f_);
}

void DiagnosticsWriter::append(const DiagnosticsRecord& r) {
  std::fprintf(f_, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
               r.ek_aug, r.ek_raw, r.ep, r.et, r.mu, r.charge_lost);
}

}  // namespace gyropic
