#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rotlab/config.hpp"
#include "rotlab/error.hpp"
#include "rotlab/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  std::string format = "json";
  std::string input;
};

void add_common(CLI::App* sub, Flags& f, bool config_required) {
  auto* c = sub->add_option("--config", f.config, "experiment config (key = value sections)");
  if (config_required) c->required();
  sub->add_option("--seed", f.seed, "seed overriding [experiment] seed");
  sub->add_option("--out", f.out, "output directory (default [output] dir, else out)");
  sub->add_option("--threads", f.threads, "worker cap")->check(CLI::PositiveNumber);
  sub->add_option("--format", f.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotation-set laboratory on the two-torus"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[][2] = {
      {"hull", "estimate the rotation hull"},
      {"deviation", "measure directional deviations"},
      {"pseudo", "search pseudo-periodic orbits"},
      {"close", "close four pseudo-orbits of a rotation (close-rigid)"},
      {"grow", "chain orbit segments into a labelled loop"},
      {"certify", "certify Brouwer lines and the cone they confine"},
      {"replay", "reload a closed system and re-verify it"},
  };
  for (auto& n : names) {
    auto* sub = app.add_subcommand(n[0], n[1]);
    add_common(sub, flags, std::string(n[0]) != "replay");
    if (std::string(n[0]) == "replay") sub->add_option("system", flags.input, "closed system JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    rotlab::config::ConfigFile cfg;
    if (!flags.config.empty()) cfg = rotlab::config::ConfigFile::load(flags.config);
    else if (flags.input.empty())
      throw rotlab::Error(rotlab::ErrorKind::Config, "cli", "replay needs --config or a system file");
    rotlab::experiments::RunContext ctx;
    ctx.seed = flags.seed;
    ctx.threads = flags.threads;
    if (!flags.input.empty()) ctx.input = flags.input;
    auto format = rotlab::experiments::parse_format(flags.format);
    std::string dir = !flags.out.empty() ? flags.out : cfg.get_string("output", "dir", std::string("out"));

    auto out = rotlab::experiments::run_experiment(cmd, cfg, ctx);
    rotlab::experiments::write_outputs(out, dir, format);
    std::cout << out.summary;
    return out.status;
  } catch (const rotlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rotlab::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
