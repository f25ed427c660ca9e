// Convergence-study driver: runs (coarse level, m) cells, computes EOCs and
// writes the CSV / JSON / plot-data outputs.
#ifndef SIGNLOD_STUDY_HPP
#define SIGNLOD_STUDY_HPP

#include "signlod/lod.hpp"
#include "signlod/scenarios.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace signlod {

struct StudyConfig {
  std::vector<int> coarse_levels{1, 2, 3, 4};
  int fine_level = 6;
  std::vector<int> m_values{1, 2, 3};
  MeshPattern pattern = MeshPattern::crisscross;
  std::string out_dir;  // empty: no files written
  unsigned seed = 0;
  int threads = 0;      // 0: hardware concurrency
  std::optional<int> decay_element;
  int probe_samples = 0;
  bool parallel_cells = false; // cells run sequentially by default

  void apply_paper_scale()
  {
    fine_level = 8;
    coarse_levels = {1, 2, 3, 4, 5, 6};
    m_values = {1, 2, 3};
  }
};

struct CellResult {
  std::string scenario;
  int coarse_level = 0;
  int m = 0;
  ErrorRecord errors;
  double eoc_h1_lod = std::numeric_limits<double>::quiet_NaN();
  double eoc_l2_macro = std::numeric_limits<double>::quiet_NaN();
  double eoc_l2_bestapprox = std::numeric_limits<double>::quiet_NaN();
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  std::string error_message; // non-empty if this cell failed
};

struct ConvergenceRecord {
  std::string scenario;
  std::vector<CellResult> rows;

  /// Mean EOC of one column for a fixed m; column selected by pointer to
  /// member.
  double mean_eoc(double CellResult::* column, int m) const;
};

ConvergenceRecord run_convergence_study(const ProblemSpec& spec, const StudyConfig& cfg);

/// Fills the EOC columns (log2 error ratios of consecutive levels per m).
void compute_eoc(ConvergenceRecord& record);

void write_csv(const ConvergenceRecord& record, std::ostream& os);

} // namespace signlod

#endif
