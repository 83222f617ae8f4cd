// vfvr: simulate, analyze, calibrate, anova and tlx subcommands.
//
// Exit status: 0 success, 2 input error, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "vfvr/calibrate.hpp"
#include "vfvr/cli_io.hpp"
#include "vfvr/reports.hpp"

namespace fs = std::filesystem;
using namespace vfvr;

namespace {

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_path,
                 const std::string& jsonl_path, unsigned threads) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  if (seed) cfg.master_seed = *seed;
  const MotorParams params = load_motor_params(cfg.motor_params);
  const auto records = simulate_experiment(cfg.plan(), params, cfg.master_seed, threads);

  std::vector<TrialLogRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_log_row(r));
  std::ostringstream csv;
  write_trial_log_csv(csv, rows);
  write_file_atomic(out_path, csv.str());
  if (!jsonl_path.empty()) {
    std::ostringstream jl;
    write_trial_log_jsonl(jl, rows);
    write_file_atomic(jsonl_path, jl.str());
  }
  const Json manifest{{"config_hash", config_hash(cfg)},
                      {"master_seed", cfg.master_seed},
                      {"motor_params_hash", hex64(fnv1a64(to_json(params).dump()))},
                      {"rows", rows.size()},
                      {"config", to_json(cfg)}};
  write_file_atomic(out_path + ".manifest.json", manifest.dump(2) + "\n");
  std::cerr << "simulate: " << rows.size() << " trials -> " << out_path << "\n";
  return 0;
}

int run_analyze(const std::string& log_path, const std::string& out_dir) {
  const auto rows = load_trial_log(log_path);
  std::vector<TrialRecord> trials;
  trials.reserve(rows.size());
  for (const auto& r : rows) trials.push_back(to_record(r));
  AnalysisCounts counts;
  const auto seqs = summarize_sequences(trials, &counts);
  const fs::path dir(out_dir);
  write_file_atomic(dir / "sequences.csv", summaries_csv(seqs, true));
  write_file_atomic(dir / "participant_conditions.csv", summaries_csv(participant_condition_means(seqs), false));
  write_file_atomic(dir / "table2.csv", table2_csv(seqs));
  write_file_atomic(dir / "table3.csv", table3_csv(seqs));
  write_file_atomic(dir / "fitts.csv", fitts_csv(seqs));
  write_file_atomic(dir / "scatter.csv", scatter_csv(trials));
  write_file_atomic(dir / "analysis.json", counts_json(counts));
  std::cerr << "analyze: " << counts.trials << " trials, " << counts.outliers << " outliers excluded, "
            << counts.sequences << " sequences\n";
  return 0;
}

int run_calibrate(const std::string& targets_path, const std::string& out_path, std::string report_path,
                  const std::string& init_path, int trials, std::optional<std::uint64_t> seed) {
  const auto targets = load_calibration_targets(targets_path);
  CalibrationOptions opt;
  opt.trials_per_condition = trials;
  if (seed) opt.seed = *seed;
  const auto result = calibrate(targets, opt, load_motor_params(init_path));
  write_file_atomic(out_path, to_json(result.params).dump(2) + "\n");
  if (report_path.empty()) report_path = (fs::path(out_path).replace_extension("").string() + "_residuals.csv");
  write_file_atomic(report_path, residual_report_csv(result.residuals));
  std::cerr << "calibrate: objective " << fmt_num(result.objective) << " after " << result.evaluations
            << " evaluations -> " << out_path << "\n";
  return 0;
}

int run_anova(const std::string& path, const std::string& measure, const std::string& out_path,
              const std::string& full_path, const std::string& posthoc_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  const auto obs = read_anova_observations(in, measure);
  const AnovaTable tab = anova_blocked(obs);
  write_file_atomic(out_path, anova_table1_csv(tab, measure));
  if (!full_path.empty()) write_file_atomic(full_path, anova_full_csv(tab));
  if (!posthoc_path.empty()) write_file_atomic(posthoc_path, posthoc_csv(obs, tab));
  std::cerr << "anova: " << measure << ", error df " << tab.error().df << "\n";
  return 0;
}

int run_tlx(const std::string& path, const std::string& out_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  write_file_atomic(out_path, tlx_scores_csv(read_tlx_responses(in)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ViewfinderVR selection simulator and Fitts' law analysis"};
  app.require_subcommand(1);

  std::string config, out, jsonl, log, targets, report, init, summaries, measure, full, posthoc, responses;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  int trials = 20000;

  auto* sim = app.add_subcommand("simulate", "synthesize a trial log");
  sim->add_option("--config", config, "experiment config JSON (defaults when omitted)");
  sim->add_option("--seed", seed, "master seed, overrides the config");
  sim->add_option("--out", out, "trial log CSV")->required();
  sim->add_option("--jsonl", jsonl, "also write JSON lines");
  sim->add_option("--threads", threads, "worker threads, 0 = all cores");

  auto* ana = app.add_subcommand("analyze", "summaries and tables from a trial log");
  ana->add_option("--log", log, "trial log CSV")->required();
  ana->add_option("--out", out, "output directory")->required();

  auto* cal = app.add_subcommand("calibrate", "fit motor parameters to condition means");
  cal->add_option("--targets", targets, "targets CSV")->required();
  cal->add_option("--out", out, "fitted parameters JSON")->required();
  cal->add_option("--report", report, "residual report CSV");
  cal->add_option("--init", init, "starting parameters JSON");
  cal->add_option("--trials", trials, "simulated trials per condition")->check(CLI::Range(100, 10000000));
  cal->add_option("--seed", seed, "calibration seed");

  auto* an = app.add_subcommand("anova", "participant-blocked ANOVA on a summaries CSV");
  an->add_option("--summaries", summaries, "sequences.csv or participant_conditions.csv")->required();
  an->add_option("--measure", measure, "response column")->required();
  an->add_option("--out", out, "F/p/eta-squared table CSV")->required();
  an->add_option("--full", full, "full ANOVA table CSV");
  an->add_option("--posthoc", posthoc, "technique grouping letters CSV");

  auto* tl = app.add_subcommand("tlx", "raw and weighted NASA-TLX scores");
  tl->add_option("--responses", responses, "responses CSV")->required();
  tl->add_option("--out", out, "scores CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) return run_simulate(config, seed, out, jsonl, threads);
    if (*ana) return run_analyze(log, out);
    if (*cal) return run_calibrate(targets, out, report, init, trials, seed);
    if (*an) return run_anova(summaries, measure, out, full, posthoc);
    if (*tl) return run_tlx(responses, out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
