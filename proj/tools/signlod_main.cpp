// Command-line driver for the convergence studies, decay profiles and the
// coercivity probe.
#include "signlod/correctors.hpp"
#include "signlod/patches.hpp"
#include "signlod/quasi_interp.hpp"
#include "signlod/scenarios.hpp"
#include "signlod/study.hpp"
#include "signlod/tcoercivity.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace signlod;

std::vector<int> parse_range(const std::string& text)
{
  const auto dots = text.find("..");
  std::vector<int> out;
  if (dots == std::string::npos) {
    out.push_back(std::stoi(text));
    return out;
  }
  const int a = std::stoi(text.substr(0, dots));
  const int b = std::stoi(text.substr(dots + 2));
  for (int v = a; v <= b; ++v)
    out.push_back(v);
  return out;
}

void run_decay(const ProblemSpec& spec, const StudyConfig& cfg, int element)
{
  const int level = *std::max_element(cfg.coarse_levels.begin(), cfg.coarse_levels.end());
  Hierarchy h = make_hierarchy(level, cfg.fine_level, cfg.pattern);
  InterpolationOperator interp(h);
  SymmetrizationMap sym;
  const SymmetrizationMap* sym_ptr = nullptr;
  if (spec.has_symmetrization) {
    sym = build_symmetrization(spec.geom);
    sym_ptr = &sym;
  }
  FineSystem fs = build_fine_system(h, spec.coeff, interp, spec.fine_stiffness_opts, sym_ptr);

  // decay of the corrector of the first interior hat of the element
  Vector hat = Vector::Zero(h.coarse.n_vertices());
  for (int v : h.coarse.elements[element])
    if (!h.coarse.boundary_vertex[v]) {
      hat[v] = 1.0;
      break;
    }
  const DecayProfile profile = decay_profile(fs, element, hat, 4);

  std::ofstream out(cfg.out_dir + "/" + spec.name + "_decay.csv");
  out << "element_id,m,tail_h1,fit_slope\n";
  for (std::size_t m = 0; m < profile.tail.size(); ++m)
    out << element << ',' << m << ',' << profile.tail[m] << ',' << profile.slope << '\n';
  std::cout << "decay profile written (slope " << profile.slope << ")\n";
}

void run_probe(const ProblemSpec& spec, const StudyConfig& cfg, int samples)
{
  // The probe needs a coarse mesh that resolves the interface; for the flat
  // scenarios this is the l = 0.5 laboratory configuration.
  ProblemSpec probe_spec = spec;
  if (spec.geom.kind == InterfaceGeometry::Kind::flat_horizontal) {
    const double sm = spec.coeff.sigma_minus;
    probe_spec.geom = InterfaceGeometry::flat(0.5, true);
    probe_spec.coeff.geom = probe_spec.geom;
    probe_spec.coeff.eval = [sm](double, double y) { return y > 0.5 ? -sm : 1.0; };
  }
  const int level = *std::max_element(cfg.coarse_levels.begin(), cfg.coarse_levels.end());
  Hierarchy h = make_hierarchy(level, cfg.fine_level, cfg.pattern);
  InterpolationOperator interp(h);
  const VertexClasses classes = classify_vertices(h.coarse, probe_spec.geom);
  const SymmetrizationMap sym = build_symmetrization(probe_spec.geom);
  const auto duals = build_all_duals(h, interp, probe_spec.geom, classes, cfg.threads);
  const CoercivityReport report =
      coercivity_probe(h, probe_spec.coeff, sym, duals, interp, samples, cfg.seed + 1);

  std::ofstream out(cfg.out_dir + "/" + spec.name + "_coercivity.json");
  report.write_json(out);
  std::cout << "coercivity probe: sampled min " << report.alpha_sampled_min << ", median "
            << report.alpha_sampled_median << '\n';
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Localized orthogonal decomposition for sign-changing diffusion"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run a convergence study");
  std::string scenario = "flat2";
  std::string coarse_range = "1..4";
  std::string m_list = "1,2,3";
  std::string pattern = "crisscross";
  StudyConfig cfg;
  bool paper_scale = false;
  int decay_element = -1;
  int probe_samples = 0;

  run->add_option("--scenario", scenario, "flat2|flat11|square|circle|multiscale")->required();
  run->add_option("--fine-level", cfg.fine_level, "fine mesh level (default 6)");
  run->add_option("--coarse-levels", coarse_range, "coarse level range a..b (default 1..4)");
  run->add_option("--m", m_list, "comma-separated oversampling parameters (default 1,2,3)");
  run->add_option("--pattern", pattern, "crisscross|ne-diagonal");
  run->add_option("--out", cfg.out_dir, "output directory")->required();
  run->add_flag("--paper-scale", paper_scale, "fine level 8, coarse levels 1..6");
  run->add_option("--decay-element", decay_element, "emit a corrector decay profile for this element");
  run->add_option("--probe-coercivity", probe_samples, "run the coercivity probe with N samples");
  run->add_option("--seed", cfg.seed, "random seed (default 0)");
  run->add_option("--threads", cfg.threads, "worker threads (default: hardware)");
  run->add_flag("--parallel-cells", cfg.parallel_cells, "run study cells concurrently");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.coarse_levels = parse_range(coarse_range);
    cfg.m_values.clear();
    std::stringstream ms(m_list);
    for (std::string item; std::getline(ms, item, ',');)
      cfg.m_values.push_back(std::stoi(item));
    if (pattern == "ne-diagonal")
      cfg.pattern = MeshPattern::ne_diagonal;
    else if (pattern != "crisscross")
      throw std::invalid_argument("unknown mesh pattern: " + pattern);
    if (paper_scale)
      cfg.apply_paper_scale();

    const ProblemSpec spec = scenario_by_name(scenario);
    std::filesystem::create_directories(cfg.out_dir);

    const ConvergenceRecord record = run_convergence_study(spec, cfg);
    write_csv(record, std::cout);

    if (decay_element >= 0)
      run_decay(spec, cfg, decay_element);
    if (probe_samples > 0)
      run_probe(spec, cfg, probe_samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
