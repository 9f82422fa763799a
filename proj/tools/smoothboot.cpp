#include "smoothboot/cli.hpp"

#include "CLI11.hpp"

#include <map>
#include <string>

using smoothboot::Estimator;
using smoothboot::NwSigma;
using smoothboot::cli::Command;
using smoothboot::cli::Format;
using smoothboot::cli::RunConfig;

namespace {

void add_common(CLI::App* sub, RunConfig& cfg)
{
  sub->add_option("--output", cfg.output, "Output file (default: stdout)");
  sub->add_option("--format", cfg.format, "Output format")
    ->transform(CLI::CheckedTransformer(
      std::map<std::string, Format>{ { "csv", Format::csv }, { "json", Format::json } }));
  sub->add_option("--estimator", cfg.estimator, "slse or nw")
    ->transform(CLI::CheckedTransformer(
      std::map<std::string, Estimator>{ { "slse", Estimator::slse }, { "nw", Estimator::nw } }));
  sub->add_flag("--studentized", cfg.studentized, "Studentize the bootstrap differences");
  sub->add_option("--sigma", cfg.sigma, "NW Studentization scale: hall-kay or residual")
    ->transform(CLI::CheckedTransformer(std::map<std::string, NwSigma>{
      { "hall-kay", NwSigma::hall_kay }, { "residual", NwSigma::residual } }));
  sub->add_option("--c", cfg.c, "Bandwidth constant, h = c n^(-1/5)")->capture_default_str();
  sub->add_option("--c0", cfg.c0, "Pilot constant, h0 = c0 n^(-1/9)")->capture_default_str();
  sub->add_option("--B", cfg.B, "Bootstrap replications")->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "1 - confidence level")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sub->add_option("--grid-step", cfg.grid_step, "Spacing of the t grid")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")
    ->capture_default_str();
}

void add_input(CLI::App* sub, RunConfig& cfg)
{
  sub->add_option("--input", cfg.input, "CSV file with header x,y")->required();
  sub->add_flag("--mendota", cfg.mendota, "Input columns are year,days; rescale and reverse");
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Smoothed-bootstrap confidence intervals for monotone regression" };
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit = app.add_subcommand("fit", "Isotonic LSE and smoothed curve on the t grid");
  add_common(fit, cfg);
  add_input(fit, cfg);
  fit->add_option("--step-output", cfg.step_output, "Also write the LSE step function here");

  auto* band = app.add_subcommand("band", "Pointwise bootstrap confidence band");
  add_common(band, cfg);
  add_input(band, cfg);

  auto* bw = app.add_subcommand("bandwidth", "Bootstrap MISE bandwidth selection");
  add_common(bw, cfg);
  add_input(bw, cfg);
  std::string cgrid;
  bw->add_option("--c-grid", cgrid, "start:stop:step of the constants c (default 0.01:1:0.01)");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo coverage experiment");
  add_common(sim, cfg);
  sim->add_option("--scenario", cfg.scenario, "quadratic or logistic")
    ->check(CLI::IsMember({ "quadratic", "logistic" }))
    ->capture_default_str();
  sim->add_option("--n", cfg.n, "Sample size")->capture_default_str();
  sim->add_option("--M", cfg.M, "Outer replications")->capture_default_str();
  sim->add_option("--sigma0", cfg.sigma0, "Noise standard deviation")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*fit) {
    cfg.command = Command::fit;
  } else if (*band) {
    cfg.command = Command::band;
  } else if (*bw) {
    cfg.command = Command::bandwidth;
    if (!cgrid.empty()) {
      double a = 0, b = 0, s = 0;
      char c1 = 0, c2 = 0;
      std::istringstream in(cgrid);
      if (!(in >> a >> c1 >> b >> c2 >> s) || c1 != ':' || c2 != ':') {
        std::cerr << R"({"error":"--c-grid expects start:stop:step"})" << '\n';
        return 1;
      }
      cfg.c_min = a;
      cfg.c_max = b;
      cfg.c_step = s;
    }
  } else {
    cfg.command = Command::simulate;
  }
  return smoothboot::cli::run(cfg);
}
