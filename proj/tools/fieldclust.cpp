// fieldclust: cluster message segments of binary protocols into pseudo data
// types and score the result against ground truth.

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "fieldclust/error.hpp"
#include "fieldclust/pipeline.hpp"
#include "fieldclust/report.hpp"

using namespace fieldclust;

namespace {

struct InputOptions {
  std::string input;
  std::string format = "hex";
  std::string filter = "raw";
  std::size_t limit = 0;
  std::string segmenter = "heuristic";
  std::string segments;
  std::string protocol;
  double kneedle_s = 1.0;
  double spline_s = 0.1;
  double epsilon_shift = 0.0;
  std::string dump_matrix;
  std::string dump_ecdf;
  std::string dump_segments;
  unsigned threads = 1;
};

void add_input_options(CLI::App* cmd, InputOptions& o) {
  cmd->add_option("--input", o.input, "Trace file (pcap or hex lines)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"pcap", "hex"}))
      ->capture_default_str();
  cmd->add_option("--filter", o.filter, "udp:<port>, tcp:<port> or raw (pcap only)")->capture_default_str();
  cmd->add_option("--limit", o.limit, "Keep the first N messages after de-duplication (0 = all)")
      ->capture_default_str();
  cmd->add_option("--protocol", o.protocol, "Protocol name for the report (default: input file stem)");
  cmd->add_option("--segmenter", o.segmenter, "Segment source")
      ->check(CLI::IsMember({"heuristic", "import"}))
      ->capture_default_str();
  cmd->add_option("--segments", o.segments,
                  "Segmentation JSON; imported segments, or ground truth for the heuristic segmenter")
      ->check(CLI::ExistingFile);
  cmd->add_option("--kneedle-s", o.kneedle_s, "Kneedle sensitivity S")->capture_default_str();
  cmd->add_option("--spline-s", o.spline_s, "Spline smoothing factor s (residual sum of squares held at s * n)")
      ->capture_default_str();
  cmd->add_option("--epsilon-shift", o.epsilon_shift, "Offset added to the detected knee")
      ->capture_default_str();
  cmd->add_option("--dump-matrix", o.dump_matrix, "Write the dissimilarity matrix as CSV");
  cmd->add_option("--dump-ecdf", o.dump_ecdf, "Write k-NN ECDF curves as CSV");
  cmd->add_option("--dump-segments", o.dump_segments, "Write the segmentation as JSON");
  cmd->add_option("--threads", o.threads, "Upper bound on worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

PipelineConfig to_config(const InputOptions& o) {
  PipelineConfig c;
  c.input = o.input;
  c.format = o.format == "pcap" ? InputFormat::pcap : InputFormat::hex;
  c.filter = ProtocolFilter::parse(o.filter);
  c.limit = o.limit;
  c.protocol = o.protocol;
  c.segmenter = o.segmenter == "import" ? SegmenterChoice::import : SegmenterChoice::heuristic;
  c.segments = o.segments;
  c.autoconf.sensitivity = o.kneedle_s;
  c.autoconf.smoothing = o.spline_s;
  c.autoconf.epsilon_shift = o.epsilon_shift;
  c.dump_matrix = o.dump_matrix;
  c.dump_ecdf = o.dump_ecdf;
  c.dump_segments = o.dump_segments;
  c.threads = o.threads;
  return c;
}

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::empty_analysis ? kExitEmptyAnalysis : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster binary protocol message segments into pseudo data types"};
  app.require_subcommand(1);

  InputOptions analyze_opts;
  std::string out_json;
  std::string out_table;
  bool no_refine = false;
  bool no_eval = false;
  bool quiet = false;
  auto* analyze = app.add_subcommand("analyze", "Run the full clustering pipeline");
  add_input_options(analyze, analyze_opts);
  analyze->add_flag("--no-refine", no_refine, "Skip cluster merging and splitting");
  analyze->add_flag("--no-eval", no_eval, "Skip evaluation even when ground truth is available");
  analyze->add_option("--out-json", out_json, "Write the JSON report");
  analyze->add_option("--out-table", out_table, "Write the text summary table");
  analyze->add_flag("--quiet,-q", quiet, "Do not print the summary table");

  std::string eval_report;
  std::string eval_truth;
  std::string eval_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a JSON report against ground truth");
  evaluate_cmd->add_option("--report", eval_report, "JSON report from analyze")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--segments", eval_truth, "Ground-truth segmentation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out-json", eval_out, "Write a report with the metrics attached");

  InputOptions ecdf_opts;
  auto* ecdf_cmd = app.add_subcommand("ecdf", "Epsilon auto-configuration diagnostics only");
  add_input_options(ecdf_cmd, ecdf_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      PipelineConfig config = to_config(analyze_opts);
      config.refine = !no_refine;
      config.evaluate = !no_eval;
      config.out_json = out_json;
      config.out_table = out_table;
      auto report = run(config);
      if (!quiet) write_table(std::cout, report);
    } else if (evaluate_cmd->parsed()) {
      auto report = read_report(eval_report);
      report.metrics = evaluate_report(report, eval_truth);
      write_table(std::cout, report);
      const auto& m = *report.metrics;
      std::cout << "tp " << m.tp << "  fp " << m.fp << "  fn " << m.fn << "  tn+fn " << m.tn_plus_fn
                << "  coverage " << m.coverage << '\n';
      if (!eval_out.empty()) emit_report(report, eval_out, {});
    } else if (ecdf_cmd->parsed()) {
      auto result = prepare(to_config(ecdf_opts));
      const auto& cfg = result.selection.config;
      std::cout << "unique values " << result.values.size() << "\n";
      for (const auto& c : result.selection.curves)
        std::cout << "k=" << c.raw.k << "  max increase " << round6(c.max_increase) << "\n";
      std::cout << "chosen k " << cfg.chosen_k << "  knee " << round6(cfg.knee_x) << "  epsilon "
                << round6(cfg.epsilon) << "  min_samples " << cfg.min_samples
                << (cfg.fallback ? "  (fallback: median 2-NN)" : "") << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
