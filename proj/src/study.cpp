#include "signlod/study.hpp"

#include "signlod/correctors.hpp"
#include "signlod/patches.hpp"
#include "signlod/quasi_interp.hpp"
#include "signlod/tcoercivity.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace signlod {

namespace {

struct Reference {
  // exact route
  ScalarField u;
  GradientField grad_u;
  // fine-FEM route, nodal on the fine mesh
  Vector u_h;
  bool is_exact = false;
};

ErrorRecord cell_errors(const ProblemSpec& spec, const Hierarchy& h, const FineSystem& fs,
                        const Reference& ref, const LodSolution& lod, const FeFunction& baseline,
                        const Vector& best_approx_coarse)
{
  ErrorRecord rec;
  const Vector macro_fine = inject(h, lod.coarse_full);
  const Vector baseline_fine = inject(h, baseline.values);
  const Vector best_fine = inject(h, best_approx_coarse);

  if (ref.is_exact) {
    const NormValues lod_err = error_vs_exact(h.fine, lod.fine_values, ref.u, ref.grad_u,
                                              &fs.means, spec.norms_degree);
    rec.h1_lod = lod_err.h1_semi;
    rec.sigma_lod = lod_err.sigma_energy;
    rec.l2_macro =
        error_vs_exact(h.fine, macro_fine, ref.u, nullptr, nullptr, spec.norms_degree).l2;
    rec.l2_fem =
        error_vs_exact(h.fine, baseline_fine, ref.u, nullptr, nullptr, spec.norms_degree).l2;
    rec.l2_bestapprox =
        error_vs_exact(h.fine, best_fine, ref.u, nullptr, nullptr, spec.norms_degree).l2;
  } else {
    const NormValues lod_err = fe_norms(h.fine, ref.u_h - lod.fine_values, &fs.means);
    rec.h1_lod = lod_err.h1_semi;
    rec.sigma_lod = lod_err.sigma_energy;
    rec.l2_macro = fe_norms(h.fine, ref.u_h - macro_fine, nullptr).l2;
    rec.l2_fem = fe_norms(h.fine, ref.u_h - baseline_fine, nullptr).l2;
    rec.l2_bestapprox = fe_norms(h.fine, ref.u_h - best_fine, nullptr).l2;
  }
  return rec;
}

std::string csv_num(double v)
{
  if (std::isnan(v))
    return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_plot_data(const ConvergenceRecord& record, const std::string& dir)
{
  // per-figure files matching the convergence-history groupings:
  // columns H error, one file per (quantity, m) plus the m-independent ones
  std::map<int, std::ofstream> h1_files, macro_files;
  std::ofstream fem_file(dir + "/" + record.scenario + "_l2fem.dat");
  std::ofstream best_file(dir + "/" + record.scenario + "_l2best.dat");
  std::map<int, bool> seen_level;
  for (const CellResult& row : record.rows) {
    if (!row.error_message.empty())
      continue;
    const double H = std::pow(0.5, row.coarse_level);
    if (!h1_files.count(row.m)) {
      h1_files[row.m].open(dir + "/" + record.scenario + "_h1lod_m" + std::to_string(row.m) + ".dat");
      macro_files[row.m].open(dir + "/" + record.scenario + "_l2macro_m" + std::to_string(row.m) +
                              ".dat");
    }
    h1_files[row.m] << H << ' ' << row.errors.h1_lod << '\n';
    macro_files[row.m] << H << ' ' << row.errors.l2_macro << '\n';
    if (!seen_level[row.coarse_level]) {
      seen_level[row.coarse_level] = true;
      fem_file << H << ' ' << row.errors.l2_fem << '\n';
      best_file << H << ' ' << row.errors.l2_bestapprox << '\n';
    }
  }
}

} // namespace

double ConvergenceRecord::mean_eoc(double CellResult::* column, int m) const
{
  double sum = 0.0;
  int n = 0;
  for (const CellResult& row : rows) {
    if (row.m != m)
      continue;
    const double v = row.*column;
    if (!std::isnan(v)) {
      sum += v;
      ++n;
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

void compute_eoc(ConvergenceRecord& record)
{
  // consecutive coarse levels per m; EOC = log2(e_H / e_{H/2})
  for (CellResult& row : record.rows) {
    if (!row.error_message.empty())
      continue;
    for (const CellResult& prev : record.rows) {
      if (prev.m != row.m || prev.coarse_level != row.coarse_level - 1 ||
          !prev.error_message.empty())
        continue;
      auto eoc = [](double coarse_err, double fine_err) {
        if (coarse_err <= 0.0 || fine_err <= 0.0)
          return std::numeric_limits<double>::quiet_NaN();
        return std::log2(coarse_err / fine_err);
      };
      row.eoc_h1_lod = eoc(prev.errors.h1_lod, row.errors.h1_lod);
      row.eoc_l2_macro = eoc(prev.errors.l2_macro, row.errors.l2_macro);
      row.eoc_l2_bestapprox = eoc(prev.errors.l2_bestapprox, row.errors.l2_bestapprox);
    }
  }
}

void write_csv(const ConvergenceRecord& record, std::ostream& os)
{
  os << "scenario,coarse_level,m,h1_lod,l2_macro,l2_fem,l2_bestapprox,"
        "eoc_h1_lod,eoc_l2_macro,eoc_l2_bestapprox,assembly_s,solve_s\n";
  for (const CellResult& row : record.rows) {
    if (!row.error_message.empty()) {
      std::string msg = row.error_message;
      for (char& c : msg)
        if (c == ',' || c == '\n')
          c = ';';
      os << row.scenario << ',' << row.coarse_level << ',' << row.m << ",error: " << msg
         << ",,,,,,,,\n";
      continue;
    }
    os << row.scenario << ',' << row.coarse_level << ',' << row.m << ','
       << csv_num(row.errors.h1_lod) << ',' << csv_num(row.errors.l2_macro) << ','
       << csv_num(row.errors.l2_fem) << ',' << csv_num(row.errors.l2_bestapprox) << ','
       << csv_num(row.eoc_h1_lod) << ',' << csv_num(row.eoc_l2_macro) << ','
       << csv_num(row.eoc_l2_bestapprox) << ',' << csv_num(row.assembly_seconds) << ','
       << csv_num(row.solve_seconds) << '\n';
  }
}

ConvergenceRecord run_convergence_study(const ProblemSpec& spec, const StudyConfig& cfg)
{
  ConvergenceRecord record;
  record.scenario = spec.name;

  for (int level : cfg.coarse_levels)
    if (level > cfg.fine_level)
      throw std::invalid_argument("run_convergence_study: coarse levels must not exceed the fine level");

  // The fine-FEM reference is the same for every cell of one study. A
  // closed-form reference is only used when the fine mesh resolves the
  // interface; otherwise the fine solve is the honest discrete truth.
  Reference ref;
  ref.is_exact = spec.reference == ProblemSpec::Reference::exact_solution &&
                 spec.fine_level_resolves_interface(cfg.fine_level);
  if (ref.is_exact) {
    ref.u = spec.exact;
    ref.grad_u = spec.exact_grad;
  }

  for (int level : cfg.coarse_levels) {
    Hierarchy h;
    std::unique_ptr<InterpolationOperator> interp;
    FineSystem fs;
    SymmetrizationMap sym;
    Vector b_fine;
    FeFunction baseline;
    Vector best_coarse;
    std::string level_error;

    try {
      h = make_hierarchy(level, cfg.fine_level, cfg.pattern);
      interp = std::make_unique<InterpolationOperator>(h);
      const SymmetrizationMap* sym_ptr = nullptr;
      if (spec.has_symmetrization) {
        sym = build_symmetrization(spec.geom);
        sym_ptr = &sym;
      }
      fs = build_fine_system(h, spec.coeff, *interp, spec.fine_stiffness_opts, sym_ptr);
      b_fine = assemble_load(h.fine, spec.f, spec.load_opts);

      if (!ref.is_exact && ref.u_h.size() == 0)
        ref.u_h = solve_dirichlet(h.fine, fs.A_full, b_fine).values;

      baseline = fem_baseline(h.coarse, spec.coeff, spec.coarse_stiffness_opts, spec.f,
                              spec.load_opts);
      // projection onto the homogeneous-Dirichlet coarse space V_H, the space
      // the macroscopic solution lives in
      best_coarse = ref.is_exact ? l2_best_approx_exact(h, ref.u, spec.norms_degree, true)
                                 : l2_best_approx(h, ref.u_h, true);
    } catch (const std::exception& e) {
      level_error = e.what();
    }

    for (int m : cfg.m_values) {
      CellResult row;
      row.scenario = spec.name;
      row.coarse_level = level;
      row.m = m;
      if (!level_error.empty()) {
        row.error_message = level_error;
        record.rows.push_back(row);
        continue;
      }
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const CorrectorSet correctors = corrector_basis(fs, m, cfg.threads);
        const LodSystem system = assemble_lod_system(fs, correctors, b_fine);
        const LodSolution lod = solve_lod(fs, system, correctors);
        row.assembly_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() -
            lod.solve_seconds;
        row.solve_seconds = lod.solve_seconds;
        row.errors = cell_errors(spec, h, fs, ref, lod, baseline, best_coarse);
      } catch (const std::exception& e) {
        row.error_message = e.what(); // solver failures abort the row, not the study
        std::cerr << "study cell (" << spec.name << ", level " << level << ", m " << m
                  << ") failed: " << e.what() << '\n';
      }
      record.rows.push_back(row);
    }
  }

  compute_eoc(record);

  if (!cfg.out_dir.empty()) {
    namespace fsys = std::filesystem;
    fsys::create_directories(cfg.out_dir);
    std::ofstream csv(cfg.out_dir + "/" + spec.name + ".csv");
    write_csv(record, csv);

    nlohmann::json j;
    j["scenario"] = spec.name;
    j["fine_level"] = cfg.fine_level;
    j["coarse_levels"] = cfg.coarse_levels;
    j["m_values"] = cfg.m_values;
    j["pattern"] = cfg.pattern == MeshPattern::crisscross ? "crisscross" : "ne-diagonal";
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["quadrature"] = {{"fine_stiffness", spec.fine_stiffness_opts.quad_degree},
                       {"coarse_stiffness", spec.coarse_stiffness_opts.quad_degree},
                       {"load", spec.load_opts.quad_degree},
                       {"norms", spec.norms_degree}};
    j["reference"] = ref.is_exact ? "exact" : "fine-fem";
    j["library_version"] = "signlod 0.1.0";
    std::ofstream sidecar(cfg.out_dir + "/" + spec.name + "_config.json");
    sidecar << j.dump(2) << '\n';

    write_plot_data(record, cfg.out_dir);
  }
  return record;
}

} // namespace signlod
