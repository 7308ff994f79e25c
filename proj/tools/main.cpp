#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

namespace cli = pidparse::cli;

int main(int argc, char** argv) {
  CLI::App app{"Raster P&ID digitization: dataset generation, digitization, evaluation and overlays"};
  app.require_subcommand(1);

  cli::GenerateOptions gen;
  std::string gen_config, gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic annotated dataset");
  generate->add_option("-c,--config", gen_config, "Generator or pipeline JSON (defaults when omitted)");
  generate->add_option("-o,--out", gen_out, "Output directory")->required();
  generate->add_option("-n,--count", gen.count, "Number of sheets (overrides the config)");
  generate->add_option("-s,--seed", gen.seed, "Master seed (overrides the config)");
  generate->add_option("-j,--threads", gen.threads, "Worker threads (PID_THREADS caps this)");

  cli::DigitizeOptions dig;
  std::vector<std::string> dig_sheets;
  std::string dig_config, dig_out;
  auto* digitize = app.add_subcommand("digitize", "Digitize sheets into symbol and pipeline tables");
  digitize->add_option("sheets", dig_sheets, "Sheet images")->required();
  digitize->add_option("-c,--config", dig_config, "Pipeline JSON (defaults when omitted)");
  digitize->add_option("-o,--out", dig_out, "Output directory; one folder per sheet")->required();
  digitize->add_flag("-g,--graph", dig.write_graph, "Also write graph.json");
  digitize->add_option("-j,--threads", dig.threads, "Worker threads (PID_THREADS caps this)");
  digitize->add_option("--resize-width", dig.resize_width, "Working width; 0 keeps the input size");

  cli::EvaluateOptions ev;
  std::string ev_pred, ev_truth, ev_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against annotations");
  evaluate->add_option("-p,--pred", ev_pred, "Directory written by digitize")->required();
  evaluate->add_option("-t,--truth", ev_truth, "Dataset root or folder of annotation JSON")->required();
  evaluate->add_option("-o,--out", ev_out, "Where report.json and confusion.csv go (default: --pred)");
  evaluate->add_option("--split", ev.split, "Only sheets of this manifest split (train or test)");
  evaluate->add_option("--text-iou", ev.text_ious, "IOU thresholds for text detection")->expected(1, -1);

  cli::OverlayOptions ov;
  std::string ov_sheet, ov_result, ov_out;
  auto* overlay = app.add_subcommand("overlay", "Draw a result over its sheet");
  overlay->add_option("sheet", ov_sheet, "Sheet image")->required();
  overlay->add_option("-r,--result", ov_result, "Result folder written by digitize");
  overlay->add_option("-o,--out", ov_out, "Output PNG")->required();
  overlay->add_flag("--compare-hough", ov.compare_hough, "Kernel lines and Hough lines side by side");

  cli::AssetsOptions as;
  std::string as_out;
  auto* assets = app.add_subcommand("assets", "Write default configuration files and the template bank");
  assets->add_option("-o,--out", as_out, "Output directory")->required();
  assets->add_option("-w,--width", as.sheet_width, "Sheet width the templates are sized for");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsageError;
  }

  if (generate->parsed()) {
    gen.config = gen_config;
    gen.out_dir = gen_out;
    return cli::cmd_generate(gen, std::cout, std::cerr);
  }
  if (digitize->parsed()) {
    for (const auto& s : dig_sheets) dig.sheets.emplace_back(s);
    dig.config = dig_config;
    dig.out_dir = dig_out;
    return cli::cmd_digitize(dig, std::cout, std::cerr);
  }
  if (evaluate->parsed()) {
    ev.pred_dir = ev_pred;
    ev.truth_dir = ev_truth;
    ev.out_dir = ev_out;
    return cli::cmd_evaluate(ev, std::cout, std::cerr);
  }
  if (overlay->parsed()) {
    if (ov_result.empty() && !ov.compare_hough) {
      std::cerr << "overlay needs --result or --compare-hough\n";
      return cli::kUsageError;
    }
    ov.sheet = ov_sheet;
    ov.result_dir = ov_result;
    ov.out_png = ov_out;
    return cli::cmd_overlay(ov, std::cout, std::cerr);
  }
  as.out_dir = as_out;
  return cli::cmd_assets(as, std::cout, std::cerr);
}
