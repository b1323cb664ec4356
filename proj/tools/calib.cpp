// calib: calibration bands and calibration tests for EDF mean estimates.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "calib/cli.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("CALIB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

// Keys outside any [section] belong to the subcommand being run.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(std::string section) : section_(std::move(section)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigINI::from_config(in);
    if (section_.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty() && item.name != "++" && item.name != "--" && item.name != "config") {
        item.parents = {section_};
      }
    }
    return items;
  }

 private:
  std::string section_;
};

std::string invoked_subcommand(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "band" || a == "simulate") return a;
  }
  return {};
}

void print_offending(const calib::TestReport& r, const std::vector<calib::BandRecord>& rec) {
  std::size_t shown = 0;
  for (std::size_t i : r.offending) {
    if (shown++ == 10) {
      std::cerr << "    ...\n";
      break;
    }
    std::cerr << "    record " << i + 1 << ": rank " << rec[i].rank << ", mu_hat " << rec[i].mu_hat
              << ", band [" << rec[i].lower << ", " << rec[i].upper << "]\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Simultaneous calibration bands for exponential dispersion family means"};
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
  app.config_formatter(std::make_shared<FlatConfig>(invoked_subcommand(argc, argv)));
  app.require_subcommand(1);

  auto* band = app.add_subcommand("band", "build a band from a CSV of y, v, mu_hat[, rank]");
  std::string family = "normal", pairs = "full", dispersion = "fixed:1", plot, scale = "linear",
              input, out;
  double alpha = 0.05;
  int bins = 0, q = 0;
  double eps = 0.0;
  bool repair = false;
  band->add_option("--family", family, "binomial|poisson|negbin|gamma|normal|inverse-gaussian")
      ->capture_default_str();
  band->add_option("--alpha", alpha, "1 - confidence level")->capture_default_str();
  band->add_option("--pairs", pairs, "full|distinct|nbh:<s>|dist:<d>")->capture_default_str();
  band->add_option("--bins", bins, "weighted quantile binning into L bins");
  band->add_option("--dispersion", dispersion, "fixed:<phi>|pearson|deviance|mle-ig")
      ->capture_default_str();
  band->add_option("--q", q, "number of estimated parameters for dispersion estimates")
      ->capture_default_str();
  band->add_flag("--repair", repair, "widen the band by the isotonic fit where it crosses");
  band->add_option("--eps", eps, "also run the eps-miscalibration test");
  band->add_option("--plot", plot, "write an SVG calibration plot");
  band->add_option("--scale", scale, "plot scale: linear|log")
      ->check(CLI::IsMember({"linear", "log"}))
      ->capture_default_str();
  band->add_option("--out", out, "band CSV path (default stdout)");
  band->add_option("input", input, "input CSV")->required();

  auto* sim = app.add_subcommand("simulate", "run a seeded simulation preset");
  for (CLI::App* a : {&app, band, sim}) a->allow_config_extras(CLI::config_extras_mode::error);
  std::string preset;
  int reps = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> sets;
  std::string metrics_out;
  sim->add_option("--preset", preset, "example1|example3|example5")
      ->required()
      ->check(CLI::IsMember({"example1", "example3", "example5"}));
  sim->add_option("--reps", reps, "replications")->capture_default_str();
  sim->add_option("--seed", seed, "seed")->capture_default_str();
  sim->add_option("--set", sets, "preset override key=value (repeatable)");
  sim->add_option("--out", metrics_out, "metrics CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*band) {
      calib::RunConfig cfg;
      cfg.family = calib::parse_family(family);
      cfg.alpha = alpha;
      cfg.pairs = pairs;
      cfg.q = q;
      cfg.repair = repair;
      calib::parse_dispersion(dispersion, cfg);
      if (band->count("--bins")) cfg.bins = bins;
      if (band->count("--eps")) cfg.eps = eps;

      std::ifstream in(input, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open '" + input + "'");
      const calib::CsvTable table = calib::read_csv(in);
      const calib::BandRun run = calib::run_band(table, cfg);

      if (out.empty()) {
        calib::write_band_csv(std::cout, run.records);
      } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + out + "'");
        calib::write_band_csv(f, run.records);
      }
      if (!plot.empty()) calib::emit_plot(run.records, plot, scale == "log");

      std::cerr << "family " << family << ", phi " << run.phi << ", |J| " << run.pair_count
                << ", delta " << run.delta << (run.crossed ? ", band crossed" : "")
                << (run.repaired ? " (repaired)" : "") << "\n";
      if (run.binned) {
        std::cerr << "note: binned responses are in general not EDF realizations; the band is "
                     "approximate\n";
      }
      std::cerr << "calibration test (auto-calibration under a correct ranking): "
                << (run.calibration.rejected() ? "reject" : "do not reject") << ", "
                << run.calibration.offending.size() << " estimate(s) outside the band\n";
      print_offending(run.calibration, run.records);
      if (run.epsilon) {
        std::cerr << "eps-test (eps = " << *run.epsilon->epsilon << "): "
                  << (run.epsilon->rejected() ? "reject eps-miscalibration" : "do not reject")
                  << ", " << run.epsilon->offending.size() << " record(s) with band inside +-eps\n";
      }
      return run.calibration.rejected() ? 2 : 0;
    }

    std::map<std::string, std::string> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("override '" + s + "' is not key=value");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    const auto metrics = calib::run_simulate(preset, overrides, reps, seed);
    if (metrics_out.empty()) {
      calib::write_metrics_csv(std::cout, metrics);
    } else {
      std::ofstream f(metrics_out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write '" + metrics_out + "'");
      calib::write_metrics_csv(f, metrics);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
