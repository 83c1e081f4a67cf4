#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <conegeo/examples.hpp>
#include <conegeo/report_json.hpp>

using namespace conegeo;

namespace {

// "name" or "name:k=v,k2=v2" -> (name, params)
std::pair<std::string, std::map<std::string, double>> parse_example_spec(
    const std::string& spec) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::map<std::string, double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw CLI::ValidationError("--example", "expected k=v in '" + item + "'");
      params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
  }
  return {name, params};
}

ChartDomain parse_grid(const ChartDomain& base, const std::string& text) {
  auto x = text.find('x');
  int nx = std::stoi(text.substr(0, x));
  int ny = x == std::string::npos ? nx : std::stoi(text.substr(x + 1));
  return base.with_resolution(nx, ny);
}

std::vector<std::pair<int, int>> parse_grid_ladder(const ChartDomain& base,
                                                   const std::string& list) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(list);
  std::string item;
  double aspect = double(base.ny - 1) / double(base.nx - 1);
  while (std::getline(ss, item, ',')) {
    auto x = item.find('x');
    int nx = std::stoi(item.substr(0, x));
    int ny = x == std::string::npos ? 1 + int(std::lround((nx - 1) * aspect))
                                    : std::stoi(item.substr(x + 1));
    out.push_back({nx, ny});
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + out_path + "'");
  f << text;
}

struct CommonFlags {
  std::string example_spec, grid, backend = "analytic", profile, out, potential_expr;
  double h_fd = 0.0;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_backend = true) {
  cmd->add_option("--example", f.example_spec, "example NAME[:k=v,...]");
  cmd->add_option("--grid", f.grid, "grid as NxM (or N for square)");
  if (with_backend) {
    cmd->add_option("--backend", f.backend, "jet backend")
        ->check(CLI::IsMember({"analytic", "fd"}));
    cmd->add_option("--h-fd", f.h_fd, "fd jet step (0: tie to grid spacing)");
    cmd->add_option("--tol-profile", f.profile, "tolerance profile name");
  }
  cmd->add_option("--seed", f.seed, "probe-point seed");
  cmd->add_option("--out", f.out, "output path (default: stdout)");
  cmd->add_option("--potential", f.potential_expr, "potential expression u(t, theta)");
  cmd->add_option("--alpha", [&f](const std::vector<std::string>& v) {
    f.alpha = std::stod(v.front());
    return true;
  }, "cone angle parameter override")->expected(1);
  cmd->add_flag("--timing", f.timing, "emit wall-clock time (breaks byte determinism)");
}

Example build_example(const CommonFlags& f, const std::string& fallback = "") {
  std::string spec = f.example_spec.empty() ? fallback : f.example_spec;
  if (spec.empty()) throw CLI::ValidationError("--example", "an example name is required");
  auto [name, params] = parse_example_spec(spec);
  if (f.alpha) params["alpha"] = *f.alpha;
  return make_example(name, params, f.potential_expr);
}

SuiteOptions suite_options(const Example& e, const CommonFlags& f) {
  SuiteOptions opt;
  if (!f.grid.empty()) opt.grid = parse_grid(e.domain, f.grid);
  opt.backend = f.backend;
  opt.profile = f.profile;
  opt.h_fd = f.h_fd;
  opt.seed = f.seed;
  return opt;
}

int cmd_verify(const CommonFlags& f) {
  if (!f.example_spec.empty()) {
    Example e = build_example(f);
    SuiteResult r = run_suite(e, suite_options(e, f));
    write_text(f.out, report_to_json(e, r, f.timing).dump(2) + "\n");
    return r.report.pass() ? 0 : 1;
  }
  // whole registry: positives must pass, negative controls must fail with
  // their declared residual names
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  bool ok = true;
  for (const std::string& name : registry_names()) {
    Example e = make_example(name);
    SuiteResult r = run_suite(e, suite_options(e, f));
    all.push_back(report_to_json(e, r, f.timing));
    if (!e.negative()) {
      ok = ok && r.report.pass();
    } else {
      auto failing = r.report.failing();
      bool declared = !r.report.pass();
      for (const std::string& want : e.expected_failures)
        declared = declared &&
                   std::find(failing.begin(), failing.end(), want) != failing.end();
      ok = ok && declared;
    }
  }
  write_text(f.out, all.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_converge(const CommonFlags& f, const std::string& residual,
                 const std::string& grids) {
  Example e = build_example(f);
  SuiteOptions opt = suite_options(e, f);
  ConvergeResult c = converge_study(e, residual, parse_grid_ladder(e.domain, grids), opt);
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["example"] = e.name;
  j["residual"] = c.residual;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : c.rows) {
    nlohmann::ordered_json row;
    row["grid"] = std::to_string(r.nx) + "x" + std::to_string(r.ny);
    row["h"] = r.h;
    row["max"] = r.max;
    j["rows"].push_back(row);
  }
  j["order"] = c.order;
  j["warning"] = c.warning;
  write_text(f.out, j.dump(2) + "\n");
  return 0;
}

int cmd_maxprinciple(const CommonFlags& f, const std::string& epsilons) {
  Example e = build_example(f, "revolution");
  ChartDomain grid = ChartDomain::log_polar(-6.0, -0.5, 2.0 * M_PI, 33, 33);
  if (!f.grid.empty()) grid = parse_grid(grid, f.grid);
  ProbeReport pr = max_principle_for(e, parse_double_list(epsilons), grid);
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["example"] = e.name;
  j["interior_max"] = pr.interior_max;
  j["boundary_max"] = pr.boundary_max;
  j["gap"] = pr.gap();
  j["epsilon_rows"] = nlohmann::ordered_json::array();
  for (const auto& row : pr.epsilon_rows) {
    nlohmann::ordered_json r;
    r["epsilon"] = row[0];
    r["interior_max"] = row[1];
    r["boundary_max"] = row[2];
    j["epsilon_rows"].push_back(r);
  }
  j["laplacian_positive"] = pr.laplacian_positive;
  j["laplacian_nonpositive"] = pr.laplacian_nonpositive;
  j["inconclusive"] = pr.inconclusive;
  bool ok = !pr.inconclusive && pr.gap() <= 1e-6;
  for (const auto& row : pr.epsilon_rows) ok = ok && row[1] <= row[2] + 1e-6;
  j["pass"] = ok;
  write_text(f.out, j.dump(2) + "\n");
  return ok ? 0 : 1;
}

// CSV point cloud: chart coordinates, immersion point, unit normal.
int cmd_synthesize(const CommonFlags& f) {
  Example e = build_example(f, "revolution");
  ChartDomain grid = e.domain;
  if (!f.grid.empty()) grid = parse_grid(grid, f.grid);
  std::string csv = "t,theta,x,y,z,nx,ny,nz\n";
  auto emit = [&csv](const Vec2& p, const Vec3& x, const Vec3& n) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p(0), p(1), x(0),
                  x(1), x(2), n(0), n(1), n(2));
    csv += buf;
  };
  if (e.rev) {
    Map3 im = e.rev->immersion();
    Map3 nu = e.rev->gauss_map();
    for (const Vec2& p : grid.nodes()) emit(p, im.at(p).value(), nu.at(p).value());
  } else if (e.patch && e.potential) {
    Immersion3 im = build_sigma(*e.potential, *e.patch);
    for (const Vec2& p : grid.nodes()) emit(p, im.value(p), im.normal(p));
  } else {
    throw CLI::ValidationError("--example", "example '" + e.name + "' has no surface to sample");
  }
  write_text(f.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification suite for minimal Lagrangian maps between spherical cone surfaces"};
  app.require_subcommand(1);
  // key=value configuration, grouped by subcommand name in [sections];
  // command-line flags override config values
  app.set_config("--config", "", "plain-text key=value configuration file");

  CommonFlags fv, fc, fm, fs;
  std::string residual = "laplacian_identity";
  std::string grids = "33,65,129";
  std::string epsilons = "0.01,0.001";

  CLI::App* verify = app.add_subcommand("verify", "run residual suites and emit JSON reports");
  add_common(verify, fv);

  CLI::App* converge = app.add_subcommand("converge", "grid-refinement order study");
  add_common(converge, fc);
  converge->add_option("--residual", residual, "residual family member to track");
  converge->add_option("--grids", grids, "comma-separated grid ladder (N or NxM entries)");

  CLI::App* maxp = app.add_subcommand("maxprinciple", "cone-end maximum-principle probe");
  add_common(maxp, fm, false);
  maxp->add_option("--epsilon", epsilons, "comma-separated epsilon list for chi + eps t");

  CLI::App* synth = app.add_subcommand("synthesize", "CSV point cloud of an example surface");
  add_common(synth, fs, false);

  CLI::App* list = app.add_subcommand("list", "list registered examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(fv);
    if (converge->parsed()) return cmd_converge(fc, residual, grids);
    if (maxp->parsed()) return cmd_maxprinciple(fm, epsilons);
    if (synth->parsed()) return cmd_synthesize(fs);
    if (list->parsed()) {
      for (const std::string& name : registry_names()) {
        Example e = make_example(name);
        std::cout << name;
        for (const auto& [k, v] : e.params) std::cout << " " << k << "=" << v;
        if (!e.potential_expr.empty()) std::cout << " u=\"" << e.potential_expr << "\"";
        if (e.negative()) std::cout << " (negative control)";
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
