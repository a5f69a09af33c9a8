// lapshape command-line front end.
//
// Every subcommand records a provenance line (version, argv, config, seeds
// and SHA-256 of every input file). It goes to stderr and into each output
// file as a comment, and `lapshape replay FILE` re-runs the recorded argv.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lapshape/config.hpp"
#include "lapshape/eigensolver.hpp"
#include "lapshape/error.hpp"
#include "lapshape/hash.hpp"
#include "lapshape/io.hpp"
#include "lapshape/laplacian.hpp"
#include "lapshape/normals.hpp"
#include "lapshape/retrieval.hpp"
#include "lapshape/segmentation.hpp"
#include "lapshape/signatures.hpp"
#include "lapshape/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lapshape;

namespace {

constexpr const char* kProvenanceTag = "lapshape-provenance ";

struct Provenance {
  std::string command;
  std::vector<std::string> argv;  // without the program name
  std::optional<RunConfig> config;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();

  void add_input(const std::string& path) { inputs[path] = sha256_file(path); }

  std::string line() const {
    nlohmann::ordered_json j;
    j["version"] = LAPSHAPE_VERSION;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config ? nlohmann::ordered_json(to_json(*config)) : nlohmann::ordered_json(nullptr);
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    return kProvenanceTag + j.dump();
  }

  CommentLines comments() const { return {line()}; }
  void announce() const { std::cerr << line() << '\n'; }
};

// Flags shared by every subcommand that runs the operator pipeline. Values
// given on the command line override the config file.
struct ConfigFlags {
  std::string file;
  RunConfig flags;
  double radius = 0.0;
  double eps = 0.0;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", file, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--radius-factor", flags.radius_factor, "ball radius in units of the spacing h");
    sub->add_option("--bandwidth-factor", flags.bandwidth_factor, "Gaussian bandwidth in units of h");
    sub->add_option("--radius", radius, "absolute ball radius (overrides --radius-factor)");
    sub->add_option("--eps", eps, "absolute bandwidth (default min(bandwidth-factor * h, r / 2))");
    sub->add_option("-k,--eigs", flags.eig_count, "number of eigenpairs");
    sub->add_option("-m,--scales", flags.scale_count, "number of default t-scales");
    sub->add_option("--reference-scale", flags.reference_scale, "t-scale index used for segmentation");
    sub->add_option("--nu", flags.nu, "neighbors per point in the segmentation graph");
    sub->add_option("--cull-fraction", flags.cull_fraction, "outlier component size fraction");
    sub->add_option("--eig-seed", flags.eig_seed, "eigensolver start-block seed");
    sub->add_option("--eig-tol", flags.eig_tolerance, "eigensolver relative residual tolerance");
    sub->add_option("--max-kernel-points", flags.max_kernel_points, "dense heat kernel size cap (0 lifts it)");
    sub->add_option("--metric", metric, "feature vector distance: hungarian | sorted-frobenius");
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  RunConfig resolve(RunConfig base = {}) const {
    RunConfig c = file.empty() ? base : load_config_file(file, base);
    if (given("--radius-factor")) c.radius_factor = flags.radius_factor;
    if (given("--bandwidth-factor")) c.bandwidth_factor = flags.bandwidth_factor;
    if (given("--eigs")) c.eig_count = flags.eig_count;
    if (given("--scales")) c.scale_count = flags.scale_count;
    if (given("--reference-scale")) c.reference_scale = flags.reference_scale;
    if (given("--nu")) c.nu = flags.nu;
    if (given("--cull-fraction")) c.cull_fraction = flags.cull_fraction;
    if (given("--eig-seed")) c.eig_seed = flags.eig_seed;
    if (given("--eig-tol")) c.eig_tolerance = flags.eig_tolerance;
    if (given("--max-kernel-points")) c.max_kernel_points = flags.max_kernel_points;
    if (given("--metric")) c.metric = parse_distance_metric(metric);
    c.validate();
    return c;
  }

  double radius_for(const RunConfig& c, double h) const { return radius > 0.0 ? radius : c.radius(h); }
  double eps_for(const RunConfig& c, double h) const {
    if (eps > 0.0) return eps;
    if (radius > 0.0) return default_bandwidth(radius, h);
    return c.bandwidth(h);
  }

  std::string metric;
};

std::string lower_extension(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

PointCloud read_cloud(const std::string& path) {
  const std::string ext = lower_extension(path);
  PointCloud cloud;
  if (ext == ".ply") {
    cloud = PointCloud::from_points(read_ply(path).points);
  } else if (ext == ".stl") {
    throw Error(ErrorCode::UnsupportedFormat, path + ": STL is a mesh; sample it first with `lapshape sample`");
  } else {
    std::vector<std::string> warnings;
    cloud = read_xyz(path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  }
  if (cloud.size() < 4) throw Error(ErrorCode::InvalidInput, path + ": fewer than 4 distinct points");
  return cloud;
}

struct Pipeline {
  SpclOperator op;
  EigenSystem eigs;
  HksField hks;
};

SpclOperator assemble(const PointCloud& cloud, const ConfigFlags& cf, const RunConfig& c) {
  const double h = cloud.spacing();
  return assemble_spcl(cloud, cf.radius_for(c, h), cf.eps_for(c, h));
}

EigenSystem eigensolve(const SpclOperator& op, const RunConfig& c) {
  EigenOptions opt;
  opt.seed = c.eig_seed;
  opt.tolerance = c.eig_tolerance;
  return solve_eigs(op, c.eig_count, opt);
}

Pipeline run_pipeline(const PointCloud& cloud, const ConfigFlags& cf, const RunConfig& c,
                      const std::vector<double>& explicit_t = {}) {
  Pipeline p;
  p.op = assemble(cloud, cf, c);
  p.eigs = eigensolve(p.op, c);
  const auto ts = explicit_t.empty() ? default_t_scales(p.eigs, c.scale_count) : explicit_t;
  p.hks = compute_hks(p.eigs, ts);
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string default_diagram_path(const std::string& out) { return out + ".persistence.csv"; }

// ---------------------------------------------------------------- commands

struct Cli {
  CLI::App app{"Spectral shape analysis of point clouds", "lapshape"};
  Provenance prov;

  // spcl
  ConfigFlags spcl_cfg;
  std::string spcl_in, spcl_out, spcl_eigvals;
  bool spcl_solve = false;

  // hks
  ConfigFlags hks_cfg;
  std::string hks_in, hks_out;
  std::vector<double> hks_t;

  // segment
  ConfigFlags seg_cfg;
  std::string seg_in, seg_out, seg_diagram;
  double seg_tau = 0.0;
  std::size_t seg_count = 0;
  CLI::Option* seg_tau_opt = nullptr;

  // heatwalk
  ConfigFlags hw_cfg;
  std::string hw_in, hw_out;
  double hw_t = 0.0;
  CLI::Option* hw_t_opt = nullptr;

  // curvseg
  std::string cs_in, cs_out;
  double cs_radius_factor = 3.0;
  double cs_radius = 0.0;
  double cs_edge_deg = 30.0;
  std::size_t cs_seeds = 3;
  std::size_t cs_target = 0;
  double cs_max_edge = std::numeric_limits<double>::infinity();

  // recluster
  std::string rc_seg, rc_hks, rc_out;
  std::size_t rc_scale = 0;
  std::size_t rc_types = 0;
  double rc_threshold = std::numeric_limits<double>::infinity();
  bool rc_auto = false;
  std::size_t rc_kmax = 10;

  // index / query
  ConfigFlags idx_cfg;
  std::vector<std::string> idx_inputs;
  std::string idx_out;
  std::size_t idx_jobs = 0;
  ConfigFlags q_cfg;
  std::string q_index, q_in;
  std::size_t q_top = 5;

  // noise
  std::string nz_in, nz_out;
  double nz_sigma = 0.0, nz_mu = 0.0, nz_mu_h = 0.0, nz_h = 0.0;
  std::uint64_t nz_seed = 1;

  // sample / gen
  std::string sm_in, sm_out;
  std::size_t sm_n = 10000;
  std::uint64_t sm_seed = 1;
  std::string gen_kind, gen_out, gen_labels;
  std::size_t gen_n = 2000;
  std::uint64_t gen_seed = 1;
  double gen_gap = 0.5;

  // replay
  std::string replay_file;

  Cli() {
    app.require_subcommand(1);
    app.set_version_flag("--version", LAPSHAPE_VERSION);

    auto* spcl = app.add_subcommand("spcl", "assemble the operator and write a sparse dump");
    spcl_cfg.attach(spcl);
    spcl->add_option("input", spcl_in, "point cloud (.xyz or .ply)")->required()->check(CLI::ExistingFile);
    spcl->add_option("-o,--out", spcl_out, "sparse dump path")->required();
    spcl->add_flag("--solve", spcl_solve, "also time the eigensolve for k eigenpairs");
    spcl->add_option("--eigenvalues", spcl_eigvals, "write eigenvalues (implies --solve)");

    auto* hks = app.add_subcommand("hks", "heat kernel signature per point");
    hks_cfg.attach(hks);
    hks->add_option("input", hks_in)->required()->check(CLI::ExistingFile);
    hks->add_option("-o,--out", hks_out, "CSV path")->required();
    hks->add_option("--t", hks_t, "explicit diffusion times instead of the default scales");

    auto* seg = app.add_subcommand("segment", "persistence segmentation of the HKS field");
    seg_cfg.attach(seg);
    seg->add_option("input", seg_in)->required()->check(CLI::ExistingFile);
    seg->add_option("-o,--out", seg_out, "labeled PLY path (a .labels.csv sidecar is written next to it)")
        ->required();
    seg->add_option("--diagram", seg_diagram, "persistence pairs CSV (default <out>.persistence.csv)");
    seg_tau_opt = seg->add_option("--tau", seg_tau, "merge threshold");
    auto* seg_s = seg->add_option("--segments", seg_count, "requested segment count");
    seg_tau_opt->excludes(seg_s);
    seg_s->excludes(seg_tau_opt);

    auto* hw = app.add_subcommand("heatwalk", "Heat Walk accumulator/dissipator segmentation");
    hw_cfg.attach(hw);
    hw->add_option("input", hw_in)->required()->check(CLI::ExistingFile);
    hw->add_option("-o,--out", hw_out, "labeled PLY path")->required();
    hw_t_opt = hw->add_option("--t", hw_t, "diffusion time (default: the median default scale)");

    auto* cs = app.add_subcommand("curvseg", "curvature-driven region growing");
    cs->add_option("--radius-factor", cs_radius_factor, "normal estimation radius in units of h");
    cs->add_option("--radius", cs_radius, "absolute normal estimation radius");
    cs->add_option("input", cs_in)->required()->check(CLI::ExistingFile);
    cs->add_option("-o,--out", cs_out, "labeled PLY path")->required();
    cs->add_option("--edge-angle", cs_edge_deg, "sharp edge threshold in degrees");
    cs->add_option("--seeds", cs_seeds, "curvature classes for seeding");
    cs->add_option("--segments", cs_target, "stop merging at this many regions");
    cs->add_option("--max-edge-value", cs_max_edge, "stop merging when the cheapest edge exceeds this");

    auto* rc = app.add_subcommand("recluster", "group segments into types by their HKS maxima");
    rc->add_option("--segmentation", rc_seg, "segmentation CSV")->required()->check(CLI::ExistingFile);
    rc->add_option("--hks", rc_hks, "HKS CSV")->required()->check(CLI::ExistingFile);
    rc->add_option("-o,--out", rc_out, "segmentation CSV with a type column")->required();
    rc->add_option("--scale-index", rc_scale, "HKS column used as the criterion");
    auto* rc_t = rc->add_option("--types", rc_types, "number of types");
    auto* rc_th = rc->add_option("--threshold", rc_threshold, "largest merge gap");
    auto* rc_a = rc->add_flag("--auto-balance", rc_auto, "pick the type count minimizing clustering balance");
    rc->add_option("--kmax", rc_kmax, "largest type count tried by --auto-balance");
    rc_t->excludes(rc_th)->excludes(rc_a);
    rc_th->excludes(rc_a);

    auto* idx = app.add_subcommand("index", "build a descriptor index");
    idx_cfg.attach(idx);
    idx->add_option("inputs", idx_inputs, "point clouds or directories of them")->required();
    idx->add_option("-o,--out", idx_out, "index file")->required();
    idx->add_option("-j,--jobs", idx_jobs, "concurrent models (default: hardware threads)");

    auto* q = app.add_subcommand("query", "rank index models against a point cloud");
    q_cfg.attach(q);
    q->add_option("--index", q_index, "index file")->required()->check(CLI::ExistingFile);
    q->add_option("input", q_in)->required()->check(CLI::ExistingFile);
    q->add_option("--top", q_top, "number of matches to print");

    auto* nz = app.add_subcommand("noise", "add Gaussian noise scaled by the sample spacing");
    nz->add_option("input", nz_in)->required()->check(CLI::ExistingFile);
    nz->add_option("-o,--out", nz_out, "XYZ path")->required();
    nz->add_option("--sigma", nz_sigma, "standard deviation in units of h");
    auto* mu = nz->add_option("--mu", nz_mu, "mean displacement per axis (model units)");
    auto* mu_h = nz->add_option("--mu-h", nz_mu_h, "mean displacement per axis in units of h");
    mu->excludes(mu_h);
    nz->add_option("--spacing", nz_h, "spacing to scale by (default: spacing of the input)");
    nz->add_option("--seed", nz_seed);

    auto* sm = app.add_subcommand("sample", "Monte Carlo sample an STL mesh");
    sm->add_option("input", sm_in)->required()->check(CLI::ExistingFile);
    sm->add_option("-o,--out", sm_out, "XYZ path")->required();
    sm->add_option("-n,--points", sm_n);
    sm->add_option("--seed", sm_seed);

    auto* gen = app.add_subcommand("gen", "generate a synthetic primitive");
    gen->add_option("kind", gen_kind,
                    "sphere | cube-surface | cylinder | fused-spheres | dumbbell | twin-cylinders | limbed")
        ->required();
    gen->add_option("-o,--out", gen_out, "XYZ path")->required();
    gen->add_option("--labels", gen_labels, "ground-truth component labels CSV");
    gen->add_option("-n,--points", gen_n);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--gap", gen_gap, "twin-cylinders surface gap");

    auto* rp = app.add_subcommand("replay", "re-run the command recorded in an output's provenance line");
    rp->add_option("file", replay_file)->required()->check(CLI::ExistingFile);
  }

  int dispatch(const std::vector<std::string>& args);

  int cmd_spcl();
  int cmd_hks();
  int cmd_segment();
  int cmd_heatwalk();
  int cmd_curvseg();
  int cmd_recluster();
  int cmd_index();
  int cmd_query();
  int cmd_noise();
  int cmd_sample();
  int cmd_gen();
  int cmd_replay();
};

int Cli::cmd_spcl() {
  const RunConfig c = spcl_cfg.resolve();
  prov.config = c;
  prov.seeds["eig_seed"] = c.eig_seed;
  prov.add_input(spcl_in);
  prov.announce();
  const PointCloud cloud = read_cloud(spcl_in);
  const auto t0 = std::chrono::steady_clock::now();
  const SpclOperator op = assemble(cloud, spcl_cfg, c);
  const double t_assembly = seconds_since(t0);
  write_sparse_dump(op, spcl_out, prov.comments());
  std::cout << "points " << op.size() << "\n"
            << "nonzeros " << op.stiffness.nonZeros() << "\n"
            << "radius " << format_double(op.radius) << "\n"
            << "bandwidth " << format_double(op.bandwidth) << "\n"
            << "assembly_seconds " << t_assembly << "\n";
  if (spcl_solve || !spcl_eigvals.empty()) {
    const auto t1 = std::chrono::steady_clock::now();
    const EigenSystem eigs = eigensolve(op, c);
    std::cout << "eigensolve_seconds " << seconds_since(t1) << "\n";
    if (!spcl_eigvals.empty()) {
      std::ofstream out(spcl_eigvals, std::ios::binary);
      if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + spcl_eigvals);
      out << "# " << prov.line() << '\n';
      for (Eigen::Index i = 0; i < eigs.eigenvalues.size(); ++i) out << format_double(eigs.eigenvalues[i]) << '\n';
    }
  }
  return 0;
}

int Cli::cmd_hks() {
  const RunConfig c = hks_cfg.resolve();
  prov.config = c;
  prov.seeds["eig_seed"] = c.eig_seed;
  prov.add_input(hks_in);
  prov.announce();
  for (double t : hks_t)
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidInput, "--t values must be positive");
  std::vector<double> ts = hks_t;
  std::sort(ts.begin(), ts.end());
  const Pipeline p = run_pipeline(read_cloud(hks_in), hks_cfg, c, ts);
  write_hks_csv(p.hks, hks_out, prov.comments());
  return 0;
}

int Cli::cmd_segment() {
  const RunConfig c = seg_cfg.resolve();
  prov.config = c;
  prov.seeds["eig_seed"] = c.eig_seed;
  prov.add_input(seg_in);
  prov.announce();
  if (!seg_tau_opt->count() && seg_count == 0)
    throw Error(ErrorCode::InvalidInput, "segment needs --tau or --segments");
  const PointCloud cloud = read_cloud(seg_in);
  const Pipeline p = run_pipeline(cloud, seg_cfg, c);
  const Eigen::VectorXd field = p.hks.column(c.reference_scale);
  const NeighborGraph graph = nu_graph(p.op, c.nu);
  const PersistenceResult sweep = persistence_segment(graph, field, 0.0);
  const double tau = seg_tau_opt->count() ? seg_tau : tau_for_segment_count(sweep.pairs, seg_count);
  PersistenceResult result = persistence_segment(graph, field, tau);
  result.segmentation.nu = c.nu;
  write_labeled_ply(cloud, result.segmentation.labels, seg_out, prov.comments());
  write_persistence_csv(sweep.pairs, seg_diagram.empty() ? default_diagram_path(seg_out) : seg_diagram,
                        prov.comments());
  std::cout << "tau " << format_double(tau) << "\n"
            << "segments " << result.segmentation.segment_count() << "\n"
            << "components " << result.segmentation.component_count << "\n"
            << "t " << format_double(p.hks.t_scales[c.reference_scale]) << "\n";
  return 0;
}

int Cli::cmd_heatwalk() {
  const RunConfig c = hw_cfg.resolve();
  prov.config = c;
  prov.seeds["eig_seed"] = c.eig_seed;
  prov.add_input(hw_in);
  prov.announce();
  const PointCloud cloud = read_cloud(hw_in);
  if (c.max_kernel_points != 0 && cloud.size() > c.max_kernel_points)
    throw Error(ErrorCode::MemoryGuard, "heat walk needs a dense " + std::to_string(cloud.size()) + "^2 kernel; " +
                                            "raise --max-kernel-points to allow it");
  const SpclOperator op = assemble(cloud, hw_cfg, c);
  const EigenSystem eigs = eigensolve(op, c);
  double t = hw_t;
  if (hw_t_opt->count()) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidInput, "--t must be positive");
  } else {
    const auto ts = default_t_scales(eigs, c.scale_count);
    t = ts[ts.size() / 2];
  }
  const HeatKernelMatrix K = compute_heat_kernel(eigs, t, c.max_kernel_points);
  const HeatWalkResult walk = heat_walk(K);
  write_labeled_ply(cloud, walk.assignment, hw_out, prov.comments());
  const auto dissipators = std::count(walk.assignment.begin(), walk.assignment.end(), kDissipator);
  std::cout << "t " << format_double(t) << "\n"
            << "regions " << walk.region_count() << "\n"
            << "dissipators " << dissipators << "\n"
            << "iterations " << walk.iterations << "\n"
            << "converged " << (walk.converged ? "yes" : "no") << "\n";
  if (walk.clamped_negative) std::cerr << "warning: negative heat kernel entries were clamped to 0\n";
  if (!walk.converged) std::cerr << "warning: heat walk stopped at the iteration cap\n";
  return 0;
}

int Cli::cmd_curvseg() {
  prov.add_input(cs_in);
  prov.announce();
  const PointCloud cloud = read_cloud(cs_in);
  if (!(cs_radius_factor > 0.0)) throw Error(ErrorCode::InvalidInput, "--radius-factor must be positive");
  const double r = cs_radius > 0.0 ? cs_radius : cs_radius_factor * cloud.spacing();
  const auto normals = estimate_normals(cloud, r);
  const auto kappa = max_normal_angle(cloud, normals, r);
  const double threshold = cs_edge_deg * std::acos(-1.0) / 180.0;
  std::vector<PointId> edges;
  for (PointId i = 0; i < cloud.size(); ++i)
    if (kappa[i] > threshold) edges.push_back(i);
  CurvatureStop stop;
  stop.target_count = cs_target;
  stop.max_edge_value = cs_max_edge;
  const Segmentation seg = curvature_segment(cloud, r, edges, kappa, cs_seeds, stop);
  write_labeled_ply(cloud, seg.labels, cs_out, prov.comments());
  std::cout << "edge_points " << edges.size() << "\n"
            << "segments " << seg.segment_count() << "\n";
  return 0;
}

int Cli::cmd_recluster() {
  prov.add_input(rc_seg);
  prov.add_input(rc_hks);
  prov.announce();
  const std::vector<int> labels = read_segmentation_csv(rc_seg);
  const HksField hks = read_hks_csv(rc_hks);
  if (hks.points() != labels.size())
    throw Error(ErrorCode::InvalidInput, "segmentation has " + std::to_string(labels.size()) +
                                             " points but the HKS file has " + std::to_string(hks.points()));
  if (rc_scale >= hks.scales())
    throw Error(ErrorCode::InvalidInput, "--scale-index " + std::to_string(rc_scale) + " but the HKS file has " +
                                             std::to_string(hks.scales()) + " scales");
  int segments = 0;
  for (int l : labels) segments = std::max(segments, l + 1);
  if (segments == 0) throw Error(ErrorCode::InvalidInput, "segmentation has no segments");
  std::vector<double> criterion(static_cast<std::size_t>(segments), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto& v = criterion[static_cast<std::size_t>(labels[i])];
    v = std::max(v, hks.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(rc_scale)));
  }
  for (std::size_t s = 0; s < criterion.size(); ++s)
    if (!std::isfinite(criterion[s])) throw Error(ErrorCode::InvalidInput, "segment " + std::to_string(s) + " is empty");

  TypeStop stop;
  if (rc_auto) {
    const BalanceResult bal = clustering_balance(criterion, 1, rc_kmax);
    for (std::size_t i = 0; i < bal.ks.size(); ++i)
      std::cout << "balance " << bal.ks[i] << " " << format_double(bal.scores[i]) << "\n";
    stop.type_count = bal.argmin;
  } else if (rc_types > 0) {
    stop.type_count = rc_types;
  } else {
    stop.threshold = rc_threshold;
  }
  const TypeGrouping g = recluster_by_type(criterion, stop);
  std::vector<int> types(labels.size(), kCulled);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) types[i] = g.segment_type[static_cast<std::size_t>(labels[i])];
  write_segmentation_csv(labels, rc_out, prov.comments(), types);
  std::cout << "types " << g.type_count << "\n";
  return 0;
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        const std::string ext = lower_extension(entry.path().string());
        if (entry.is_regular_file() && (ext == ".xyz" || ext == ".ply" || ext == ".txt"))
          found.push_back(entry.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw Error(ErrorCode::IoFailure, "no such file or directory: " + in);
    }
  }
  if (files.empty()) throw Error(ErrorCode::InvalidInput, "no point clouds to index");
  return files;
}

std::string model_id_for(const std::string& path) { return fs::path(path).stem().string(); }

int Cli::cmd_index() {
  const RunConfig c = idx_cfg.resolve();
  prov.config = c;
  prov.seeds["eig_seed"] = c.eig_seed;
  const auto files = expand_inputs(idx_inputs);
  for (const auto& f : files) prov.add_input(f);
  prov.announce();

  // Models are independent; a failing model is reported and left out.
  struct Outcome {
    std::optional<DescriptorRecord> record;
    std::optional<Error> error;
  };
  auto describe_one = [&](const std::string& path) {
    Outcome o;
    try {
      o.record = index_model(read_cloud(path), c, model_id_for(path), sha256_file(path));
    } catch (const Error& e) {
      o.error = Error(e.code(), path + ": " + e.detail(), e.ids());
    }
    return o;
  };
  std::size_t jobs = idx_jobs ? idx_jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<Outcome> outcomes(files.size());
  for (std::size_t start = 0; start < files.size(); start += jobs) {
    std::vector<std::future<Outcome>> batch;
    for (std::size_t i = start; i < std::min(files.size(), start + jobs); ++i)
      batch.push_back(std::async(std::launch::async, describe_one, files[i]));
    for (std::size_t i = 0; i < batch.size(); ++i) outcomes[start + i] = batch[i].get();
  }

  DescriptorIndex index;
  int status = 0;
  for (auto& o : outcomes) {
    if (o.error) {
      std::cerr << "error: " << o.error->what() << '\n';
      if (status == 0) status = exit_code_for(o.error->code());
      continue;
    }
    index.add(std::move(*o.record));
  }
  write_index(index, idx_out, prov.comments());
  std::cout << "indexed " << index.size() << " of " << files.size() << "\n";
  return status;
}

int Cli::cmd_query() {
  prov.add_input(q_index);
  prov.add_input(q_in);
  const DescriptorIndex index = read_index(q_index);
  if (index.size() == 0) throw Error(ErrorCode::InvalidInput, q_index + " holds no records");
  const RunConfig c = q_cfg.resolve(index.records().front().params);
  prov.config = c;
  prov.seeds["eig_seed"] = c.eig_seed;
  prov.announce();
  const DescriptorRecord query = index_model(read_cloud(q_in), c, model_id_for(q_in), sha256_file(q_in));
  if (query.fingerprint != index.fingerprint())
    throw Error(ErrorCode::IncompatibleParameters,
                "query parameters (" + query.fingerprint + ") differ from the index (" + index.fingerprint() + ")");
  const auto matches = retrieve_top_k(index, query, std::min(q_top, index.size()), c.metric);
  for (std::size_t i = 0; i < matches.size(); ++i)
    std::cout << i + 1 << " " << matches[i].model_id << " " << format_double(matches[i].score) << "\n";
  return 0;
}

int Cli::cmd_noise() {
  prov.add_input(nz_in);
  prov.seeds["noise_seed"] = nz_seed;
  prov.announce();
  if (nz_sigma < 0.0) throw Error(ErrorCode::InvalidInput, "--sigma must be non-negative");
  const PointCloud cloud = read_cloud(nz_in);
  const double h = nz_h > 0.0 ? nz_h : cloud.spacing();
  NoiseSpec spec;
  spec.sigma_p = nz_sigma;
  spec.mu = nz_mu != 0.0 ? nz_mu : nz_mu_h * h;
  spec.seed = nz_seed;
  const PointCloud noisy = add_noise(cloud, spec, h);
  CommentLines comments = prov.comments();
  comments.push_back("h " + format_double(h));
  write_xyz(noisy, nz_out, comments);
  return 0;
}

int Cli::cmd_sample() {
  prov.add_input(sm_in);
  prov.seeds["sample_seed"] = sm_seed;
  prov.announce();
  if (sm_n < 4) throw Error(ErrorCode::InvalidInput, "--points must be at least 4");
  write_xyz(sample_stl(sm_in, sm_n, sm_seed), sm_out, prov.comments());
  return 0;
}

int Cli::cmd_gen() {
  prov.seeds["gen_seed"] = gen_seed;
  prov.announce();
  const auto kind = parse_primitive_kind(gen_kind);
  if (!kind) throw Error(ErrorCode::InvalidInput, "unknown primitive '" + gen_kind + "'");
  if (gen_n < 100) throw Error(ErrorCode::InvalidInput, "--points must be at least 100");
  PrimitiveOptions opt;
  opt.gap = gen_gap;
  const LabeledCloud lc = generate_primitive(*kind, gen_n, gen_seed, opt);
  write_xyz(lc.cloud, gen_out, prov.comments());
  if (!gen_labels.empty()) {
    const std::vector<int> labels = lc.labels.empty() ? std::vector<int>(lc.cloud.size(), 0) : lc.labels;
    write_segmentation_csv(labels, gen_labels, prov.comments());
  }
  return 0;
}

int run(const std::vector<std::string>& args);

int Cli::cmd_replay() {
  std::ifstream in(replay_file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + replay_file);
  std::string line;
  while (std::getline(in, line)) {
    const auto at = line.find(kProvenanceTag);
    if (at == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line.substr(at + std::string(kProvenanceTag).size()));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidInput, replay_file + ": malformed provenance line: " + e.what());
    }
    const std::string version = j.value("version", "");
    if (version != LAPSHAPE_VERSION)
      std::cerr << "warning: recorded by version " << version << ", replaying with " << LAPSHAPE_VERSION << '\n';
    for (const auto& [path, hash] : j.at("inputs").items()) {
      if (!fs::exists(path)) throw Error(ErrorCode::IoFailure, "recorded input " + path + " is missing");
      if (sha256_file(path) != hash.get<std::string>())
        throw Error(ErrorCode::InvalidInput, "recorded input " + path + " has changed since the run");
    }
    return run(j.at("argv").get<std::vector<std::string>>());
  }
  throw Error(ErrorCode::InvalidInput, replay_file + ": no provenance line found");
}

int Cli::dispatch(const std::vector<std::string>& args) {
  prov.argv = args;
  for (auto* sub : app.get_subcommands()) {
    prov.command = sub->get_name();
    if (prov.command == "spcl") return cmd_spcl();
    if (prov.command == "hks") return cmd_hks();
    if (prov.command == "segment") return cmd_segment();
    if (prov.command == "heatwalk") return cmd_heatwalk();
    if (prov.command == "curvseg") return cmd_curvseg();
    if (prov.command == "recluster") return cmd_recluster();
    if (prov.command == "index") return cmd_index();
    if (prov.command == "query") return cmd_query();
    if (prov.command == "noise") return cmd_noise();
    if (prov.command == "sample") return cmd_sample();
    if (prov.command == "gen") return cmd_gen();
    if (prov.command == "replay") return cmd_replay();
  }
  return 2;
}

int run(const std::vector<std::string>& args) {
  Cli cli;
  try {
    // CLI11 parses a reversed argument vector.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = cli.app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return cli.dispatch(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
