// Full-run orchestration: initial sampling, the deposit/solve/push loop,
// particle bookkeeping, and output files.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gyropic/config.hpp"
#include "gyropic/diagnostics.hpp"
#include "gyropic/pic.hpp"
#include "gyropic/rng.hpp"

namespace gyropic {

struct RejectionStall : std::runtime_error {
  explicit RejectionStall(double rate)
      : std::runtime_error("initial sampling acceptance rate " +
                           std::to_string(rate) +
                           " below 1e-4; check case geometry") {}
};

// Case density sampled by rejection inside the domain; velocities are
// unit-temperature Maxwellian; weights are equal with the total charge
// either n0 itself or the Monte Carlo estimate of the density integral.
// eperp starts exactly at |v_perp|^2/2.
std::vector<ParticleState> sample_initial(const CaseConfig& c, Rng& rng);

// Cross-section domain belonging to the configured case.
DomainSpec case_domain(const CaseConfig& c);

// Node-aligned grid covering the domain box plus a two-cell margin on
// every side, so the boundary always cuts between grid nodes.
Grid3 case_grid(const CaseConfig& c, const DomainSpec& dom);

struct RunSummary {
  long steps = 0;
  long removed = 0;          // particles that left the cross-section
  double realized_t = 0.0;   // steps * dt
  double wall_seconds = 0.0;
  std::vector<DiagnosticsRecord> records;
};

// Executes the configured case and writes diagnostics.csv, run.meta, and,
// depending on the case, trajectory.csv and density snapshots into
// c.output_dir (created if missing).
RunSummary run_case(const CaseConfig& c);

}  // namespace gyropic
