#pragma once

#include <string>

#include "scorematch/diagnostics.hpp"
#include "scorematch/eval.hpp"
#include "scorematch/simulate.hpp"
#include "scorematch/solvers.hpp"
#include "scorematch/tuning.hpp"

namespace scorematch::io {

// Headerless CSV (rows = samples) or a JSON envelope {n, m, values}.
DataMatrix read_data(const std::string& path);
void write_data_csv(const std::string& path, const DataMatrix& data);

void write_truth_json(const std::string& path, const TruthSpec& truth);
TruthSpec read_truth_json(const std::string& path);

void write_estimate_json(const std::string& path, const Estimate& estimate);
Estimate read_estimate_json(const std::string& path, const LayoutPtr& layout);

void write_path_json(const std::string& path, const SolutionPath& solution_path);
SolutionPath read_path_json(const std::string& path, const LayoutPtr& layout);

// Long-format knot table: lambda, t = sum of |pair coordinates| over ordered
// pairs, coordinate name, value.
void write_path_csv(const std::string& path, const SolutionPath& solution_path);

void write_loss_json(const std::string& path, const QuadraticLoss& loss);

void write_roc_csv(const std::string& path, const RocCurve& curve);
void write_recovery_csv(const std::string& path, const RecoveryTable& table);
void write_selection_json(const std::string& path, const EbicSelection& selection, double gamma,
                          bool refit);
void write_selection_csv(const std::string& path, const EbicSelection& selection);
void write_theory_report_json(const std::string& path, const TheoryReport& report,
                              const std::string& extra_note = "");

// Layout reconstruction for reading estimates/paths back.
LayoutPtr layout_for_family(Family family, int m);

}  // namespace scorematch::io
