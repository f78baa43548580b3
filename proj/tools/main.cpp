// gyropic-cli: front end over the simulation cases and the verification
// studies. Subcommands either run a case (single-particle, diocotron,
// dshape) or run a study (convergence, eps-consistency, poisson-test).
// Exit codes: 0 success, 1 failed study or aborted run, 2 config error.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gyropic/config.hpp"
#include "gyropic/geometry.hpp"
#include "gyropic/poisson.hpp"
#include "gyropic/sim.hpp"
#include "gyropic/verify.hpp"

namespace {

using namespace gyropic;

constexpr double kPi = 3.14159265358979323846;

struct GlobalFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  bool seed_given = false;
  bool threads_given = false;
  bool quiet = false;
};

// Precedence, lowest to highest: case defaults, config file, dedicated
// flags (--seed/--threads/--out/--quiet), --set pairs in argv order.
ConfigMap build_map(const GlobalFlags& g, const std::string& case_name) {
  ConfigMap m;
  if (!g.config_path.empty()) m = ConfigMap::parse_file(g.config_path);
  if (!case_name.empty()) m.set("run.case", case_name);
  if (g.seed_given) m.set("run.seed", std::to_string(g.seed));
  if (g.threads_given) m.set("run.threads", std::to_string(g.threads));
  if (!g.out.empty()) m.set("output.dir", g.out);
  if (g.quiet) m.set("output.quiet", "true");
  for (const std::string& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError(kv, "config error: --set expects section.key=value, got '" + kv + "'");
    m.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return m;
}

int run_sim(const GlobalFlags& g, const std::string& case_name) {
  const CaseConfig c = resolve_config(build_map(g, case_name));
  const RunSummary s = run_case(c);
  if (!c.quiet)
    std::printf("done: steps=%ld removed=%ld t=%g wall=%.1fs out=%s\n",
                s.steps, s.removed, s.realized_t, s.wall_seconds,
                c.output_dir.c_str());
  return 0;
}

int run_convergence(const GlobalFlags& g) {
  const ConfigMap m = build_map(g, "single_particle");
  const CaseConfig c = resolve_config(m);
  std::filesystem::create_directories(c.output_dir);

  std::vector<Scheme> schemes;
  if (m.contains("scheme.name") || m.contains("run.scheme"))
    schemes = {c.scheme};
  else
    schemes = {Scheme::SI1,    Scheme::SI2,    Scheme::SI3,
               Scheme::Limit1, Scheme::Limit2, Scheme::Limit3};

  bool all_pass = true;
  for (Scheme s : schemes) {
    const double eps =
        m.contains("run.eps") ? c.eps : default_convergence_eps(s);
    const StudyResult r = convergence_study(s, eps, default_dt_list(s));
    std::string name = to_string(s);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    write_study_csv(r, c.output_dir + "/convergence_" + name + ".csv");
    std::printf("%s\n", study_summary_line(r).c_str());
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int run_eps_consistency(const GlobalFlags& g) {
  const ConfigMap m = build_map(g, "single_particle");
  const CaseConfig c = resolve_config(m);
  std::filesystem::create_directories(c.output_dir);

  const double dt = m.contains("run.dt") ? c.dt : 0.1;
  bool all_pass = true;
  for (int order : {1, 2, 3}) {
    const StudyResult r =
        epsilon_consistency_study(order, dt, default_consistency_eps());
    write_study_csv(r, c.output_dir + "/consistency_order" +
                           std::to_string(order) + ".csv");
    std::printf("%s\n", study_summary_line(r).c_str());
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

// Fixed manufactured problem on the unit disk: phi* = cos(pi r^2 / 2)
// cos(2 pi z / Lz) vanishes on r = 1 and is not captured exactly by the
// stencil, so the max-node error must shrink like dx^2 under refinement.
int run_poisson_test(const GlobalFlags& g) {
  const ConfigMap m = build_map(g, "single_particle");
  const CaseConfig c = resolve_config(m);
  std::filesystem::create_directories(c.output_dir);

  const int base = m.contains("grid.nx") ? c.nx : 32;
  const int nz = c.nz;
  const double lz = c.lz;
  const DomainSpec d = DomainSpec::disk({0.0, 0.0}, 1.0, lz);

  StudyResult r;
  r.name = "poisson manufactured solution";
  std::printf("%6s %12s %14s\n", "nx", "dx", "max_error");
  for (int level = 0; level < 3; ++level) {
    const int n = base << level;
    Grid3 grid;
    grid.xy.nx = n;
    grid.xy.ny = n;
    grid.xy.x0 = -1.04;
    grid.xy.y0 = -1.04;
    grid.xy.dx = 2.08 / (n - 1);
    grid.xy.dy = 2.08 / (n - 1);
    grid.z0 = 0.0;
    grid.nz = nz;
    grid.dz = lz / nz;

    PoissonSolver solver(grid, d);
    FieldState f(grid);
    const std::size_t slab =
        static_cast<std::size_t>(grid.xy.nx) * grid.xy.ny;
    for (int mz = 0; mz < nz; ++mz) {
      const double cz = std::cos(2.0 * kPi * grid.z(mz) / lz);
      for (int j = 0; j < grid.xy.ny; ++j)
        for (int i = 0; i < grid.xy.nx; ++i) {
          const double r2 = norm2(grid.xy.node(i, j));
          const double rho2d = 2.0 * kPi * std::sin(kPi * r2 / 2.0) +
                               kPi * kPi * r2 * std::cos(kPi * r2 / 2.0);
          const double rhoz =
              std::pow(2.0 * kPi / lz, 2) * std::cos(kPi * r2 / 2.0);
          f.rho[slab * mz + grid.xy.index(i, j)] = (rho2d + rhoz) * cz;
        }
    }
    solver.solve(f);

    double emax = 0.0;
    const GridClassification& cl = solver.classification();
    for (int mz = 0; mz < nz; ++mz) {
      const double cz = std::cos(2.0 * kPi * grid.z(mz) / lz);
      for (int j = 0; j < grid.xy.ny; ++j)
        for (int i = 0; i < grid.xy.nx; ++i) {
          if (cl.at(i, j) != NodeLabel::Interior) continue;
          const double exact =
              std::cos(kPi * norm2(grid.xy.node(i, j)) / 2.0) * cz;
          emax = std::max(
              emax, std::abs(f.phi[slab * mz + grid.xy.index(i, j)] - exact));
        }
    }
    r.rows.push_back({grid.xy.dx, emax});
    std::printf("%6d %12.5e %14.6e\n", n, grid.xy.dx, emax);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const StudyRow& row : r.rows) {
    const double x = std::log(row.param), y = std::log(row.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(r.rows.size());
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const bool pass = std::isfinite(r.slope) && r.slope >= 1.8;
  write_study_csv(r, c.output_dir + "/poisson_test.csv");
  std::printf("%s %s: slope=%.3f target>=1.8\n", pass ? "PASS" : "FAIL",
              r.name.c_str(), r.slope);
  return pass ? 0 : 1;
}

std::string key_table_footer() {
  const auto sp = config_key_docs(CaseKind::SingleParticle);
  const auto di = config_key_docs(CaseKind::Diocotron);
  const auto ds = config_key_docs(CaseKind::DShape);
  std::string out =
      "Configuration keys (--set section.key=value; defaults per case):\n";
  char line[300];
  std::snprintf(line, sizeof line, "  %-26s %-17s %-17s %-14s %s\n", "key",
                "single_particle", "diocotron", "dshape", "description");
  out += line;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    std::snprintf(line, sizeof line, "  %-26s %-17s %-17s %-14s %s\n",
                  sp[i].key.c_str(), sp[i].default_value.c_str(),
                  di[i].default_value.c_str(), ds[i].default_value.c_str(),
                  sp[i].description.c_str());
    out += line;
  }
  out +=
      "\nPrecedence: --set beats --config file values beat built-in "
      "defaults.\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gyropic: particle-in-cell runs and verification studies"};
  app.require_subcommand(1);
  app.footer(key_table_footer());

  GlobalFlags g;
  CLI::Option* seed_opt =
      app.add_option("--seed", g.seed, "sampling seed (run.seed)");
  CLI::Option* threads_opt =
      app.add_option("--threads", g.threads, "worker threads (run.threads)");
  app.add_option("--out", g.out, "output directory (output.dir)");
  app.add_flag("--quiet", g.quiet, "suppress progress output (output.quiet)");

  const std::vector<std::pair<std::string, std::string>> sims = {
      {"single-particle", "integrate one particle in the analytic trap field"},
      {"diocotron", "annular charge column in a disk cross-section"},
      {"dshape", "Gaussian charge blobs in a D-shaped cross-section"},
  };
  std::vector<CLI::App*> subs;
  std::string chosen;
  for (const auto& [name, desc] : sims) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->callback([&chosen, n = name] { chosen = n; });
    subs.push_back(s);
  }
  CLI::App* conv =
      app.add_subcommand("convergence", "time-step convergence study");
  conv->callback([&chosen] { chosen = "convergence"; });
  subs.push_back(conv);
  CLI::App* cons = app.add_subcommand(
      "eps-consistency", "stiff-vs-limit deviation study in eps");
  cons->callback([&chosen] { chosen = "eps-consistency"; });
  subs.push_back(cons);
  CLI::App* ptest = app.add_subcommand(
      "poisson-test", "manufactured-solution refinement sweep");
  ptest->callback([&chosen] { chosen = "poisson-test"; });
  subs.push_back(ptest);

  for (CLI::App* s : subs) {
    s->fallthrough();
    s->add_option("--config", g.config_path, "config file");
    s->add_option("--set", g.sets, "section.key=value override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;
  g.threads_given = threads_opt->count() > 0;

  try {
    if (chosen == "convergence") return run_convergence(g);
    if (chosen == "eps-consistency") return run_eps_consistency(g);
    if (chosen == "poisson-test") return run_poisson_test(g);
    std::string case_name = chosen;
    std::replace(case_name.begin(), case_name.end(), '-', '_');
    return run_sim(g, case_name);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
