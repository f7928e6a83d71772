#pragma once

#include <string>

#include "pivotmt/config.hpp"
#include "pivotmt/runner.hpp"

namespace pivotmt {

/// Ablation table in the layout of the published grids: Model, Source,
/// [Pivot,] Target, k, BLEU, chrF++ (two decimals; the pivot column
/// appears only in the pivot condition).
std::string ablation_csv(const ExperimentResult& result);

/// Human-readable summary: full grid, best-k row (chosen by chrF++),
/// metric signatures, and the configured external reference baselines.
std::string summary_text(const ExperimentResult& result,
                         const ExperimentConfig& config);

std::string to_json_string(const ExperimentResult& result);
ExperimentResult experiment_result_from_json(const std::string& body);

/// Writes result.json, ablation.csv and summary.txt under `out_dir`
/// (crash-safe; byte-stable for identical results).
void write_experiment_outputs(const ExperimentResult& result,
                              const ExperimentConfig& config,
                              const std::string& out_dir);

std::string jaccard_csv(const std::vector<JaccardRow>& rows);
std::string fertility_csv(const std::vector<FertilityRow>& rows);
std::string deviation_csv(const std::vector<DeviationRow>& rows);

/// Significance table row: one (language, model, k) comparison with its
/// BLEU and chrF++ bootstrap reports.
struct SignificanceRow {
  std::string lang;
  std::string model;
  int k = 0;
  BootstrapReport bleu;
  BootstrapReport chrfpp;
};

/// "Lang,Model,k,dBLEU,p,dchrF++,p" layout.
std::string significance_csv(const std::vector<SignificanceRow>& rows);

/// Headline comparison: zero-shot, direct best-k and pivot best-k rows for
/// one model (best k chosen by chrF++), plus an optional external baseline
/// row. "Model,Setting,BLEU,chrF++" layout.
std::string headline_csv(const ExperimentResult& direct,
                         const ExperimentResult& pivot,
                         const ReferenceBaseline* baseline);

}  // namespace pivotmt
