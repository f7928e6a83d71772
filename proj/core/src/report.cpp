#include "pivotmt/report.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"

namespace pivotmt {

using nlohmann::json;

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string cap_code(const std::string& code) {
  if (code.empty()) return code;
  std::string out = code;
  if (out[0] >= 'a' && out[0] <= 'z') out[0] = out[0] - 'a' + 'A';
  return out;
}

json stats_to_json(const BleuSegmentStats& s) {
  return json{{"match", s.match_counts},
              {"total", s.total_counts},
              {"hyp_len", s.hyp_len},
              {"ref_len", s.ref_len}};
}

BleuSegmentStats bleu_stats_from_json(const json& j) {
  BleuSegmentStats s;
  const auto match = j.at("match").get<std::vector<int64_t>>();
  const auto total = j.at("total").get<std::vector<int64_t>>();
  if (match.size() != 4 || total.size() != 4) {
    throw ParseError("bleu stats must carry four orders");
  }
  std::copy(match.begin(), match.end(), s.match_counts.begin());
  std::copy(total.begin(), total.end(), s.total_counts.begin());
  s.hyp_len = j.at("hyp_len").get<int64_t>();
  s.ref_len = j.at("ref_len").get<int64_t>();
  return s;
}

json stats_to_json(const ChrfSegmentStats& s) {
  json orders = json::array();
  for (const auto& t : s.orders) {
    orders.push_back({t.hyp_ngrams, t.ref_ngrams, t.matched});
  }
  return json{{"orders", std::move(orders)},
              {"nc", s.char_order},
              {"nw", s.word_order},
              {"beta", s.beta}};
}

ChrfSegmentStats chrf_stats_from_json(const json& j) {
  ChrfSegmentStats s;
  s.char_order = j.at("nc").get<int>();
  s.word_order = j.at("nw").get<int>();
  s.beta = j.at("beta").get<double>();
  for (const auto& t : j.at("orders")) {
    s.orders.push_back({t.at(0).get<int64_t>(), t.at(1).get<int64_t>(),
                        t.at(2).get<int64_t>()});
  }
  return s;
}

}  // namespace

std::string ablation_csv(const ExperimentResult& result) {
  const bool pivot = result.condition == Condition::kPivot;
  std::ostringstream out;
  out << "Model,Source," << (pivot ? "Pivot," : "") << "Target,k,BLEU,chrF++\n";
  for (const auto& cell : result.cells) {
    out << csv_escape(result.model_id) << "," << cap_code(result.source_lang)
        << ",";
    if (pivot) out << cap_code(result.pivot_lang) << ",";
    out << cap_code(result.target_lang) << "," << cell.row.k << ",";
    if (cell.row.error.empty()) {
      out << fixed2(cell.row.report.bleu) << ","
          << fixed2(cell.row.report.chrfpp) << "\n";
    } else {
      out << "ERROR,ERROR\n";
    }
  }
  return out.str();
}

std::string summary_text(const ExperimentResult& result,
                         const ExperimentConfig& config) {
  std::ostringstream out;
  out << "Experiment: " << result.corpus_name << " | " << result.model_id
      << " | " << cap_code(result.source_lang);
  if (result.condition == Condition::kPivot) {
    out << " -> " << cap_code(result.pivot_lang);
  }
  out << " -> " << cap_code(result.target_lang) << " | condition "
      << to_string(result.condition) << "\n";
  out << "Config digest: " << result.config_digest << "\n\n";

  out << "Ablation over the number of in-context examples (k)\n";
  out << "  k   BLEU    chrF++  empty  overflow\n";
  const CellResult* best = nullptr;
  for (const auto& cell : result.cells) {
    char line[128];
    if (cell.row.error.empty()) {
      std::snprintf(line, sizeof(line), "  %-3d %-7.2f %-7.2f %-6lld %lld\n",
                    cell.row.k, cell.row.report.bleu, cell.row.report.chrfpp,
                    static_cast<long long>(cell.row.report.n_empty_hyps),
                    static_cast<long long>(cell.row.n_context_overflows));
      out << line;
      if (best == nullptr ||
          cell.row.report.chrfpp > best->row.report.chrfpp) {
        best = &cell;
      }
    } else {
      std::snprintf(line, sizeof(line), "  %-3d ERROR: %s\n", cell.row.k,
                    cell.row.error.c_str());
      out << line;
    }
  }
  if (best != nullptr) {
    out << "\nBest k by chrF++: k=" << best->row.k << " (BLEU "
        << fixed2(best->row.report.bleu) << ", chrF++ "
        << fixed2(best->row.report.chrfpp) << ")\n";
  }

  out << "\nSignatures:\n";
  out << "  BLEU   " << bleu_signature() << "\n";
  out << "  chrF++ " << chrf_signature(6, 2) << "\n";

  if (!config.reference_baselines.empty()) {
    out << "\nExternal reference baselines (reported constants, not computed "
           "here):\n";
    for (const auto& rb : config.reference_baselines) {
      out << "  " << rb.pair << ": BLEU " << fixed2(rb.bleu) << ", chrF++ "
          << fixed2(rb.chrfpp) << "\n";
    }
  }
  return out.str();
}

std::string to_json_string(const ExperimentResult& result) {
  json j;
  j["config_digest"] = result.config_digest;
  j["corpus_name"] = result.corpus_name;
  j["model_id"] = result.model_id;
  j["source_lang"] = result.source_lang;
  j["pivot_lang"] = result.pivot_lang;
  j["target_lang"] = result.target_lang;
  j["condition"] = to_string(result.condition);
  json cells = json::array();
  for (const auto& cell : result.cells) {
    json c;
    c["k"] = cell.row.k;
    c["condition"] = to_string(cell.row.condition);
    c["bleu"] = cell.row.report.bleu;
    c["chrfpp"] = cell.row.report.chrfpp;
    c["bleu_sig"] = cell.row.report.bleu_sig;
    c["chrf_sig"] = cell.row.report.chrf_sig;
    c["n_segments"] = cell.row.report.n_segments;
    c["n_empty_hyps"] = cell.row.report.n_empty_hyps;
    c["n_generations"] = cell.row.n_generations;
    c["n_errors"] = cell.row.n_errors;
    c["n_context_overflows"] = cell.row.n_context_overflows;
    c["error"] = cell.row.error;
    json segments = json::array();
    for (const auto& seg : cell.segments) {
      segments.push_back({{"query_id", seg.query_id},
                          {"prompt_hash", seg.prompt_hash},
                          {"hypothesis", seg.hypothesis},
                          {"context_overflow", seg.context_overflow}});
    }
    c["segments"] = std::move(segments);
    json bleu_stats = json::array();
    for (const auto& s : cell.bleu_stats) bleu_stats.push_back(stats_to_json(s));
    c["bleu_stats"] = std::move(bleu_stats);
    json chrf_stats = json::array();
    for (const auto& s : cell.chrf_stats) chrf_stats.push_back(stats_to_json(s));
    c["chrf_stats"] = std::move(chrf_stats);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j.dump(2);
}

ExperimentResult experiment_result_from_json(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed result JSON: ") + e.what());
  }
  ExperimentResult result;
  result.config_digest = j.at("config_digest").get<std::string>();
  result.corpus_name = j.at("corpus_name").get<std::string>();
  result.model_id = j.at("model_id").get<std::string>();
  result.source_lang = j.at("source_lang").get<std::string>();
  result.pivot_lang = j.at("pivot_lang").get<std::string>();
  result.target_lang = j.at("target_lang").get<std::string>();
  result.condition = condition_from_string(j.at("condition").get<std::string>());
  for (const auto& c : j.at("cells")) {
    CellResult cell;
    cell.row.k = c.at("k").get<int>();
    cell.row.condition = condition_from_string(c.at("condition").get<std::string>());
    cell.row.report.bleu = c.at("bleu").get<double>();
    cell.row.report.chrfpp = c.at("chrfpp").get<double>();
    cell.row.report.bleu_sig = c.at("bleu_sig").get<std::string>();
    cell.row.report.chrf_sig = c.at("chrf_sig").get<std::string>();
    cell.row.report.n_segments = c.at("n_segments").get<int64_t>();
    cell.row.report.n_empty_hyps = c.at("n_empty_hyps").get<int64_t>();
    cell.row.n_generations = c.at("n_generations").get<int64_t>();
    cell.row.n_errors = c.at("n_errors").get<int64_t>();
    cell.row.n_context_overflows = c.at("n_context_overflows").get<int64_t>();
    cell.row.error = c.at("error").get<std::string>();
    for (const auto& seg : c.at("segments")) {
      cell.segments.push_back({seg.at("query_id").get<int64_t>(),
                               seg.at("prompt_hash").get<std::string>(),
                               seg.at("hypothesis").get<std::string>(),
                               seg.at("context_overflow").get<bool>()});
    }
    for (const auto& s : c.at("bleu_stats")) {
      cell.bleu_stats.push_back(bleu_stats_from_json(s));
    }
    for (const auto& s : c.at("chrf_stats")) {
      cell.chrf_stats.push_back(chrf_stats_from_json(s));
    }
    result.cells.push_back(std::move(cell));
  }
  return result;
}

void write_experiment_outputs(const ExperimentResult& result,
                              const ExperimentConfig& config,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  io::write_file_atomic((fs::path(out_dir) / "result.json").string(),
                        to_json_string(result));
  io::write_file_atomic((fs::path(out_dir) / "ablation.csv").string(),
                        ablation_csv(result));
  io::write_file_atomic((fs::path(out_dir) / "summary.txt").string(),
                        summary_text(result, config));
}

std::string jaccard_csv(const std::vector<JaccardRow>& rows) {
  std::ostringstream out;
  out << "Language Pair,Jaccard Similarity,Vocab A,Vocab B\n";
  for (const auto& row : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", row.similarity);
    out << row.pair << "," << buf << "," << row.vocab_a << "," << row.vocab_b
        << "\n";
  }
  return out.str();
}

std::string fertility_csv(const std::vector<FertilityRow>& rows) {
  std::ostringstream out;
  out << "Dataset,Language,TokensPerWord\n";
  for (const auto& row : rows) {
    out << row.dataset << "," << row.language << "," << fixed2(row.fertility)
        << "\n";
  }
  return out.str();
}

std::string deviation_csv(const std::vector<DeviationRow>& rows) {
  std::ostringstream out;
  out << "k,chrF\n";
  for (const auto& row : rows) {
    out << row.k << "," << fixed2(row.chrf) << "\n";
  }
  return out.str();
}

std::string significance_csv(const std::vector<SignificanceRow>& rows) {
  std::ostringstream out;
  out << "Lang,Model,k,dBLEU,p,dchrF++,p\n";
  for (const auto& row : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%+.2f,%.4f,%+.2f,%.4f",
                  row.bleu.delta_observed, row.bleu.p_value,
                  row.chrfpp.delta_observed, row.chrfpp.p_value);
    out << row.lang << "," << csv_escape(row.model) << "," << row.k << ","
        << buf << "\n";
  }
  return out.str();
}

namespace {

const CellResult* best_cell_by_chrfpp(const ExperimentResult& result) {
  const CellResult* best = nullptr;
  for (const auto& cell : result.cells) {
    if (!cell.row.error.empty()) continue;
    if (best == nullptr || cell.row.report.chrfpp > best->row.report.chrfpp) {
      best = &cell;
    }
  }
  return best;
}

}  // namespace

std::string headline_csv(const ExperimentResult& direct,
                         const ExperimentResult& pivot,
                         const ReferenceBaseline* baseline) {
  std::ostringstream out;
  out << "Model,Setting,BLEU,chrF++\n";
  if (baseline != nullptr) {
    out << "Baseline," << baseline->pair << " reference,"
        << fixed2(baseline->bleu) << "," << fixed2(baseline->chrfpp) << "\n";
  }
  if (const CellResult* zero = direct.find_cell(0)) {
    out << csv_escape(direct.model_id) << ",Zero-shot (k=0),"
        << fixed2(zero->row.report.bleu) << ","
        << fixed2(zero->row.report.chrfpp) << "\n";
  }
  if (const CellResult* best = best_cell_by_chrfpp(direct)) {
    out << csv_escape(direct.model_id) << ",Direct (Best k=" << best->row.k
        << ")," << fixed2(best->row.report.bleu) << ","
        << fixed2(best->row.report.chrfpp) << "\n";
  }
  if (const CellResult* best = best_cell_by_chrfpp(pivot)) {
    out << csv_escape(pivot.model_id) << ",With Pivot (Best k=" << best->row.k
        << ")," << fixed2(best->row.report.bleu) << ","
        << fixed2(best->row.report.chrfpp) << "\n";
  }
  return out.str();
}

}  // namespace pivotmt
