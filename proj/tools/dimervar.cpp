// dimervar: command-line front end for the dimer library.
//
// Exit codes: 0 success, 2 invalid input, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <dimervar/enumerate.hpp>
#include <dimervar/io.hpp>
#include <dimervar/lattice.hpp>
#include <dimervar/sampler.hpp>
#include <dimervar/svg.hpp>
#include <dimervar/thermo.hpp>
#include <dimervar/torus.hpp>
#include <dimervar/variational.hpp>

namespace dv = dimervar;
using dv::io::json;

namespace {

struct Config {
  // inputs
  std::string region, boundary, tiling;
  std::vector<double> weights, tilt;
  std::vector<int> disp;
  int n = 2;
  bool log = false;
  // limits and tolerances
  std::size_t limit = 100000;
  std::size_t max_cells = 64;
  int mesh = 64;
  double mu_min = 1e-10;
  double tol = 1e-10;
  int max_iterations = 2000;
  double eta = 1e-3;
  std::uint64_t initial_sweeps = 16;
  std::uint64_t max_updates = std::uint64_t{1} << 30;
  // sampling
  std::uint64_t seed = 42;
  std::size_t count = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  // outputs
  std::string out, svg;
};

dv::WeightVector weights_of(const std::vector<double>& v) {
  if (v.size() != 4) throw dv::InvalidWeights("--weights needs four values a,b,c,d");
  return {v[0], v[1], v[2], v[3]};
}

dv::Tilt tilt_of(const std::vector<double>& v) {
  if (v.size() != 2) throw dv::TiltOutOfRange("--tilt needs two values s,t");
  return {v[0], v[1]};
}

json probs_json(const dv::EdgeProbabilities& p) { return {{"pa", p.pa}, {"pb", p.pb}, {"pc", p.pc}, {"pd", p.pd}}; }

void emit(const Config& cfg, const json& j) {
  const std::string s = dv::io::format(j);
  if (cfg.out.empty()) {
    std::cout << s << '\n';
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw dv::InvalidRegion("cannot write " + cfg.out);
  f << s << '\n';
}

void write_svg(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw dv::InvalidRegion("cannot write " + path);
  f << body;
}

dv::Region load_region(const Config& cfg) {
  if (cfg.region.empty()) throw dv::InvalidRegion("--region is required");
  return dv::io::region_from_json(dv::io::read_json(cfg.region));
}

int cmd_count(const Config& cfg) {
  const auto R = load_region(cfg);
  const auto c = dv::count_tilings(R, cfg.max_cells);
  emit(cfg, {{"count", c.str()}});
  std::cerr << R.area() << " cells, " << c << " tilings\n";
  return 0;
}

int cmd_enumerate(const Config& cfg) {
  const auto R = load_region(cfg);
  const auto ts = dv::enumerate_tilings(R, cfg.limit);
  std::ostringstream os;
  for (const auto& t : ts) os << dv::io::format(dv::io::to_json(t)) << '\n';
  if (cfg.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw dv::InvalidRegion("cannot write " + cfg.out);
    f << os.str();
  }
  std::cerr << ts.size() << " tilings\n";
  return 0;
}

int cmd_torus_z(const Config& cfg) {
  const auto w = weights_of(cfg.weights);
  const auto pc = dv::partition_components(cfg.n, w);
  json j{{"n", cfg.n}, {"log_Z", pc.log_Z}};
  json comps = json::array();
  for (int l = 0; l < 4; ++l) comps.push_back({{"sign", pc.sign[l]}, {"log_abs", pc.log_abs[l]}});
  j["P"] = comps;
  if (!cfg.log) j["Z"] = dv::torus_partition(cfg.n, w);
  emit(cfg, j);
  std::cerr << "torus " << 2 * cfg.n << "x" << 2 * cfg.n << ", log Z = " << pc.log_Z << '\n';
  return 0;
}

int cmd_torus_prob(const Config& cfg) {
  const auto p = dv::edge_probability_finite(cfg.n, weights_of(cfg.weights));
  auto j = probs_json(p);
  j["n"] = cfg.n;
  emit(cfg, j);
  return 0;
}

int cmd_ent(const Config& cfg) {
  emit(cfg, {{"ent", dv::ent_from_tilt(tilt_of(cfg.tilt))}});
  return 0;
}

int cmd_probs(const Config& cfg) {
  if (cfg.weights.empty() == cfg.tilt.empty()) throw dv::InvalidWeights("give exactly one of --weights or --tilt");
  const auto p = cfg.tilt.empty() ? dv::probs_from_weights(weights_of(cfg.weights)) : dv::probs_from_tilt(tilt_of(cfg.tilt));
  emit(cfg, probs_json(p));
  return 0;
}

int cmd_logz(const Config& cfg) {
  emit(cfg, {{"log_Z", dv::log_Z(weights_of(cfg.weights))}});
  return 0;
}

int cmd_coupling(const Config& cfg) {
  if (cfg.disp.size() != 2) throw dv::ParityViolation("--disp needs two integers dx,dy");
  const auto P = dv::coupling_P(cfg.disp[0], cfg.disp[1], weights_of(cfg.weights));
  emit(cfg, {{"re", P.real()}, {"im", P.imag()}});
  return 0;
}

int cmd_solve(const Config& cfg) {
  if (cfg.region.empty() || cfg.boundary.empty()) throw dv::InvalidRegion("--region and --boundary are required");
  if (cfg.mesh < 1) throw dv::InvalidRegion("--mesh must be positive");
  const auto R = dv::io::polygon_from_json(dv::io::read_json(cfg.region));
  const auto B = dv::io::boundary_from_json(dv::io::read_json(cfg.boundary));
  auto F = dv::discretize(R, B, 1.0 / cfg.mesh);
  dv::SolverConfig sc;
  sc.mu_min = cfg.mu_min;
  sc.tol = cfg.tol;
  sc.max_iterations = cfg.max_iterations;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = dv::maximize_entropy(F, sc);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(cfg, dv::io::to_json(F, rep));
  if (!cfg.svg.empty()) {
    std::ostringstream os;
    dv::svg::render_field(os, F, cfg.eta);
    write_svg(cfg.svg, os.str());
  }
  std::cerr << F.nodes.size() << " nodes, Ent = " << rep.ent << ", residual = " << rep.residual_norm << ", "
            << rep.iterations << " Newton steps, " << secs << " s\n";
  return 0;
}

int cmd_sample(const Config& cfg) {
  const auto R = load_region(cfg);
  if (cfg.count == 0) throw dv::InvalidRegion("--count must be positive");
  dv::CftpOptions opt;
  opt.initial_sweeps = cfg.initial_sweeps;
  opt.max_updates = cfg.max_updates;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = dv::cftp_samples(R, cfg.seed, cfg.count, cfg.threads, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  for (std::size_t i = 0; i < res.size(); ++i) {
    auto j = dv::io::to_json(res[i].tiling);
    j["sample"] = i;
    j["seed"] = cfg.seed;
    j["sweeps"] = res[i].sweeps;
    os << dv::io::format(j) << '\n';
  }
  if (cfg.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw dv::InvalidRegion("cannot write " + cfg.out);
    f << os.str();
  }
  if (!cfg.svg.empty()) {
    std::ostringstream s;
    dv::svg::render_tiling(s, res.front().tiling);
    write_svg(cfg.svg, s.str());
  }
  std::cerr << res.size() << " samples in " << secs << " s\n";
  return 0;
}

int cmd_render(const Config& cfg) {
  if (cfg.tiling.empty() || cfg.svg.empty()) throw dv::InvalidTiling("--tiling and --svg are required");
  std::ifstream in(cfg.tiling);
  if (!in) throw dv::InvalidTiling("cannot open " + cfg.tiling);
  // Accepts a single tiling object or a JSON-lines file (first line used).
  std::string line;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    std::istringstream ls(text);
    std::getline(ls, line);
    j = json::parse(line);
  }
  std::ostringstream os;
  dv::svg::render_tiling(os, dv::io::tiling_from_json(j));
  write_svg(cfg.svg, os.str());
  std::cerr << "wrote " << cfg.svg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"Domino tilings: counting, torus partition functions, local entropy, limit shapes and exact sampling"};
  app.set_config("--config", "", "TOML/INI file; keys are flag names, one section per subcommand");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  auto region = [&](CLI::App* s, const char* help) { s->add_option("--region", cfg.region, help); };
  auto weights = [&](CLI::App* s) {
    s->add_option("--weights", cfg.weights, "edge weights a,b,c,d")->delimiter(',')->expected(4);
  };
  auto out = [&](CLI::App* s) { s->add_option("--out", cfg.out, "output file (default stdout)"); };

  auto* count = app.add_subcommand("count", "number of domino tilings of a region");
  region(count, "region JSON");
  count->add_option("--max-cells", cfg.max_cells, "largest region accepted");
  out(count);

  auto* enumerate = app.add_subcommand("enumerate", "list tilings as JSON lines");
  region(enumerate, "region JSON");
  enumerate->add_option("--limit", cfg.limit, "fail if there are more tilings than this");
  out(enumerate);

  auto* tz = app.add_subcommand("torus-z", "partition function of the 2n x 2n torus");
  tz->add_option("--n", cfg.n, "half side length (even)");
  weights(tz);
  tz->add_flag("--log", cfg.log, "report log Z only");
  out(tz);

  auto* tp = app.add_subcommand("torus-prob", "edge probabilities on the 2n x 2n torus");
  tp->add_option("--n", cfg.n, "half side length (even)");
  weights(tp);
  out(tp);

  auto* ent = app.add_subcommand("ent", "local entropy at a tilt");
  ent->add_option("--tilt", cfg.tilt, "tilt s,t with |s| + |t| <= 2")->delimiter(',')->expected(2)->required();
  out(ent);

  auto* probs = app.add_subcommand("probs", "limiting edge probabilities");
  weights(probs);
  probs->add_option("--tilt", cfg.tilt, "tilt s,t")->delimiter(',')->expected(2);
  out(probs);

  auto* logz = app.add_subcommand("logz", "free energy per fundamental domain");
  weights(logz);
  out(logz);

  auto* coupling = app.add_subcommand("coupling", "coupling function P at a white-to-black displacement");
  weights(coupling);
  coupling->add_option("--disp", cfg.disp, "displacement dx,dy with dx + dy odd")->delimiter(',')->expected(2)->required();
  out(coupling);

  auto* solve = app.add_subcommand("solve", "limit shape of a polygonal region");
  region(solve, "polygon JSON {\"polygon\": [[x,y],...]}");
  solve->add_option("--boundary", cfg.boundary, "boundary heights {\"samples\": [[x,y,h],...]}");
  solve->add_option("--mesh", cfg.mesh, "grid cells per unit length (spacing 1/mesh)");
  solve->add_option("--mu-min", cfg.mu_min, "final barrier weight");
  solve->add_option("--tol", cfg.tol, "relative Newton decrement at the final weight");
  solve->add_option("--max-iterations", cfg.max_iterations, "total Newton step cap");
  solve->add_option("--eta", cfg.eta, "extremal tilt threshold for the frontier");
  solve->add_option("--svg", cfg.svg, "tilt heat map with the frozen frontier");
  out(solve);

  auto* sample = app.add_subcommand("sample", "exact uniform tilings by coupling from the past");
  region(sample, "region JSON");
  sample->add_option("--seed", cfg.seed, "random seed");
  sample->add_option("--count", cfg.count, "number of samples");
  sample->add_option("--threads", cfg.threads, "worker threads (output does not depend on this)");
  sample->add_option("--initial-sweeps", cfg.initial_sweeps, "length of the first epoch");
  sample->add_option("--max-updates", cfg.max_updates, "cap on single-site updates per chain");
  sample->add_option("--svg", cfg.svg, "render the first sample");
  out(sample);

  auto* render = app.add_subcommand("render", "SVG of a tiling");
  render->add_option("--tiling", cfg.tiling, "tiling JSON or JSON lines");
  render->add_option("--svg", cfg.svg, "output SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    auto* s = app.get_subcommands().front();
    const std::string name = s->get_name();
    if (name == "count") return cmd_count(cfg);
    if (name == "enumerate") return cmd_enumerate(cfg);
    if (name == "torus-z") return cmd_torus_z(cfg);
    if (name == "torus-prob") return cmd_torus_prob(cfg);
    if (name == "ent") return cmd_ent(cfg);
    if (name == "probs") return cmd_probs(cfg);
    if (name == "logz") return cmd_logz(cfg);
    if (name == "coupling") return cmd_coupling(cfg);
    if (name == "solve") return cmd_solve(cfg);
    if (name == "sample") return cmd_sample(cfg);
    if (name == "render") return cmd_render(cfg);
  } catch (const dv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == dv::ErrorKind::validation ? 2 : 3;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
