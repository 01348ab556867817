#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "liepoisson/harness.hpp"

namespace lh = liepoisson::harness;

namespace {

struct Flag {
  const char* name;  // settings key, also the long flag name
  const char* help;
};

constexpr Flag kSharedFlags[] = {
    {"method", "euler|modified_euler|trapezoid|midpoint|rk|ruth|lie_trotter|lie_trotter_frozen|strang|yoshida[N]"},
    {"system", "rigid_body|harmonic_oscillator|example31"},
    {"I1", "principal inertia I1 = I2"},
    {"I3", "axial inertia I3"},
    {"A", "example31: coefficient of x1 in H"},
    {"B", "example31: coefficient of x2 in H"},
    {"a-coef", "example31: one-stage RK coefficient a"},
    {"b-coef", "example31: one-stage RK weight b"},
    {"m0", "initial state, comma separated"},
    {"h", "step size"},
    {"steps", "number of steps"},
    {"sample-every", "write every n-th step"},
    {"seed", "seed for sampled states"},
    {"fd-eps", "finite-difference step for Jacobians"},
    {"output", "output path, '-' for stdout"},
    {"check", "poisson|symplectic2d|drift[:observable]|tableau"},
    {"observable", "drift observable: hamiltonian|casimir"},
    {"samples", "random states checked in addition to m0"},
    {"tableau", "rk4|midpoint|euler|trapezoid or inline 'a11,..;..|b1,..'"},
    {"order", "yoshida order (even, >= 4)"},
    {"h-list", "comma separated step sizes for order"},
    {"T", "final time for order"},
    {"tolerance", "implicit solver tolerance"},
    {"max-iterations", "implicit solver iteration cap"},
    {"solver", "fixed_point|newton_fd"},
};

struct Subcommand {
  CLI::App* app;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  bool frozen = false;
  CLI::Option* frozen_opt = nullptr;
};

void add_flags(Subcommand& sub) {
  for (const auto& f : kSharedFlags) {
    sub.options[f.name] =
        sub.app->add_option(std::string("--") + f.name, sub.values[f.name], f.help);
  }
  sub.frozen_opt = sub.app->add_flag("--frozen", sub.frozen,
                                     "lie_trotter: freeze all angles at the input state");
  sub.app->add_option("--config", sub.config_path, "file of 'key = value' lines; flags override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving integrators for Lie-Poisson systems"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  const std::pair<const char*, const char*> names[] = {
      {"integrate", "run a trajectory and write CSV"},
      {"verify", "run a structural check"},
      {"order", "estimate the convergence order against the exact solution"},
      {"eig", "characteristic roots of R = M N P"},
  };
  std::map<std::string, Subcommand> subs;
  for (const auto& [name, desc] : names) {
    Subcommand& s = subs[name];
    s.app = app.add_subcommand(name, desc);
    add_flags(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lh::kExitConfigError;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;

    lh::RunConfig cfg;
    try {
      lh::Settings settings;
      if (!sub.config_path.empty()) {
        std::ifstream in(sub.config_path);
        if (!in) throw lh::ConfigError("cannot open config file " + sub.config_path);
        settings = lh::read_settings(in);
      }
      for (const auto& [key, opt] : sub.options) {
        if (opt->count() > 0) settings[key] = sub.values[key];
      }
      if (sub.frozen_opt->count() > 0) settings["frozen"] = sub.frozen ? "true" : "false";
      cfg = lh::config_from_settings(settings);
    } catch (const lh::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return lh::kExitConfigError;
    }

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.output != "-") {
      file.open(cfg.output);
      if (!file) {
        std::cerr << "config error: cannot open output " << cfg.output << '\n';
        return lh::kExitConfigError;
      }
      out = &file;
    }

    if (name == "integrate") return lh::cmd_integrate(cfg, *out, std::cerr);
    if (name == "verify") return lh::cmd_verify(cfg, *out, std::cerr);
    if (name == "order") return lh::cmd_order(cfg, *out, std::cerr);
    return lh::cmd_eig(cfg, *out, std::cerr);
  }
  return lh::kExitConfigError;
}
