#include <CLI11.hpp>

#include "ranrc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Event-driven simulator for Newton-Raphson consensus over lossy broadcast networks"};
  app.require_subcommand(1);

  struct SubSpec {
    const char* name;
    const char* help;
    int (*fn)(const ranrc::cli::CommandOptions&);
  };
  const SubSpec specs[] = {
      {"run", "single simulation run against the centralized oracle", ranrc::cli::cmd_run},
      {"sweep-eps", "one run per epsilon in [sweep] eps_values", ranrc::cli::cmd_sweep_eps},
      {"sweep-loss", "one run per loss probability in [sweep] loss_values",
       ranrc::cli::cmd_sweep_loss},
      {"compare", "grid both algorithms and report the best of each",
       ranrc::cli::cmd_compare},
      {"oracle", "centralized Newton solve only", ranrc::cli::cmd_oracle},
      {"audit", "per-event mass-conservation audit", ranrc::cli::cmd_audit},
  };

  struct Parsed {
    ranrc::cli::CommandOptions opts;
    int (*fn)(const ranrc::cli::CommandOptions&) = nullptr;
  } parsed;

  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    auto opts = std::make_shared<ranrc::cli::CommandOptions>();
    opts->out_dir = ranrc::cli::default_out_dir();
    sub->add_option("--config,-c", opts->config_path, "experiment config file")->required();
    sub->add_option("--out,-o", opts->out_dir, "output directory");
    auto seed = std::make_shared<std::uint64_t>();
    auto* seed_opt = sub->add_option("--seed", *seed, "override [run] master_seed");
    auto fn = spec.fn;
    sub->callback([&parsed, opts, seed, seed_opt, fn] {
      parsed.opts = *opts;
      if (seed_opt->count() > 0) parsed.opts.seed_override = *seed;
      parsed.fn = fn;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return parsed.fn(parsed.opts);
}
