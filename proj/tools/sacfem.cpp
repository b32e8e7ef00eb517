#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sacfem/bench.hpp"
#include "sacfem/comm.hpp"
#include "sacfem/config.hpp"
#include "sacfem/errors.hpp"
#include "sacfem/mesh.hpp"
#include "sacfem/nn/model_io.hpp"
#include "sacfem/partition.hpp"
#include "sacfem/pipeline/dataset.hpp"
#include "sacfem/pipeline/evaluate.hpp"
#include "sacfem/pipeline/metrics.hpp"
#include "sacfem/pipeline/sync_avoid.hpp"
#include "sacfem/pipeline/train.hpp"
#include "sacfem/stability.hpp"
#include "sacfem/trajectory_io.hpp"
#include "sacfem/version.hpp"

namespace fs = std::filesystem;
using namespace sacfem;

namespace {

struct Setup {
  RunConfig cfg;
  Mesh mesh;
  Partition part;
  std::vector<RankContext> ranks;
  Material mat;
  LoadSpec load;
  double dt = 0.0;
  InitialConditions ic;
};

Setup make_setup(const std::string& mesh_path, const std::string& config_path, int cores_override = 0) {
  Setup s;
  s.cfg = config_path.empty() ? RunConfig{} : parse_config(config_path);
  if (cores_override > 0) s.cfg.cores = cores_override;
  validate(s.cfg);
  s.mesh = mesh_path.empty() ? generate_beam_mesh(s.cfg.L, s.cfg.W, s.cfg.H, s.cfg.nx, s.cfg.ny, s.cfg.nz)
                             : read_mesh_file(mesh_path);
  s.mat = s.cfg.material();
  s.load = s.cfg.load();
  if (s.cfg.beta > 1.0) {
    const auto scaled = mass_scale(s.mesh, s.mat, s.cfg.beta, s.cfg.alpha_s, s.cfg.h_measure);
    s.ic.rho_e = scaled.rho_hat;
    s.dt = scaled.dt_hat;
    std::clog << "mass scaling: beta=" << s.cfg.beta << " R_m=" << scaled.mass_increase_pct << "%\n";
  } else {
    s.dt = cfl_time_step(s.mesh, s.mat, s.cfg.alpha_s, s.cfg.h_measure);
  }
  if (s.cfg.dt) s.dt = *s.cfg.dt;
  s.part = partition_mesh(s.mesh, s.cfg.cores);
  s.ranks = make_rank_contexts(s.mesh, s.part, s.cfg.latency_us * 1e-6);
  return s;
}

pipeline::SampleConfig sample_config(const RunConfig& cfg) { return {cfg.n_s, cfg.n_p, cfg.n_f, cfg.n_ts}; }

pipeline::TrainConfig train_config(const RunConfig& cfg) {
  pipeline::TrainConfig tc;
  tc.n_B = cfg.n_B;
  tc.eta0 = cfg.eta0;
  tc.gamma = cfg.gamma;
  tc.eta_min = cfg.eta_min;
  tc.seed = cfg.seed;
  return tc;
}

nn::ModelDims arch(const RunConfig& cfg) {
  nn::ModelDims d;
  d.k = cfg.k;
  d.n_H = cfg.n_H;
  d.n_rep = cfg.n_rep;
  return d;
}

std::string meta_path(const std::string& out) {
  fs::path p(out);
  if (fs::is_directory(p)) return (p / "meta.json").string();
  return out + ".meta.json";
}

void write_meta(const std::string& out, const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["config"] = emit_config(cfg);
  std::ofstream(meta_path(out)) << j.dump(2) << '\n';
}

Eigen::MatrixXd rows_of(const Trajectory& traj, const std::vector<int>& dofs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dofs.size()), traj.d.cols());
  for (std::size_t i = 0; i < dofs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = traj.d.row(dofs[i]);
  return out;
}

std::string rank_model_path(const std::string& dir, int r) {
  return (fs::path(dir) / ("rank_" + std::to_string(r) + ".json")).string();
}

std::vector<nn::EncDecParams> load_rank_models(const std::string& dir, int n_ranks) {
  std::vector<nn::EncDecParams> out;
  for (int r = 0; r < n_ranks; ++r) out.push_back(nn::load_model(rank_model_path(dir, r)));
  return out;
}

std::vector<pipeline::EncDecModel> wrap_models(const std::vector<nn::EncDecParams>& params,
                                               std::optional<double> alpha_f) {
  std::vector<pipeline::EncDecModel> out;
  for (const auto& p : params) out.emplace_back(p, p.dims.conditional ? alpha_f : std::nullopt);
  return out;
}

std::vector<const pipeline::SequenceModel*> pointers(const std::vector<pipeline::EncDecModel>& models) {
  std::vector<const pipeline::SequenceModel*> out;
  for (const auto& m : models) out.push_back(&m);
  return out;
}

LoadSpec load_for(const Setup& s, std::optional<double> alpha_f) {
  LoadSpec load = s.load;
  if (alpha_f) {
    load.body_force = Eigen::Vector3d(0.0, 0.0, -*alpha_f);
    load.alpha_f = alpha_f;
  }
  return load;
}

DistributedOptions options_for(const Setup& s) {
  DistributedOptions o;
  o.mode = s.cfg.mode;
  o.latency = s.cfg.latency_us * 1e-6;
  o.ic = s.ic;
  return o;
}

std::vector<long> parse_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stol(item));
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const DegenerateElementError*>(&e)) return "degenerate_element";
  if (dynamic_cast<const InstabilityError*>(&e)) return "instability";
  if (dynamic_cast<const CommunicationError*>(&e)) return "communication";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  if (dynamic_cast<const InvalidStateError*>(&e)) return "invalid_state";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  return "runtime";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit elastodynamics with learned synchronization avoidance"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // mesh gen
  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* gen = mesh_cmd->add_subcommand("gen", "Generate a structured beam mesh");
  double L = 25, W = 1, H = 1;
  int nx = 25, ny = 1, nz = 1;
  std::string mesh_out;
  gen->add_option("--L", L, "Length along x [cm]");
  gen->add_option("--W", W, "Width along y [cm]");
  gen->add_option("--H", H, "Height along z [cm]");
  gen->add_option("--nx", nx, "Cells along x");
  gen->add_option("--ny", ny, "Cells along y");
  gen->add_option("--nz", nz, "Cells along z");
  gen->add_option("--out", mesh_out, "Output mesh file")->required();

  // shared options
  std::string mesh_path, config_path, out_path, models_dir, traj_path, model_path;
  int cores = 0, repeat = 1, eval_N = 60;
  double latency_us = -1.0;
  std::string mode;
  std::optional<double> alpha_f;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--mesh", mesh_path, "Mesh file (generated from the config when omitted)");
    c->add_option("--config", config_path, "key = value config file");
  };
  auto add_parallel = [&](CLI::App* c) {
    c->add_option("--cores", cores, "Rank count");
    c->add_option("--latency-us", latency_us, "Injected latency per message [us]");
    c->add_option("--mode", mode, "pre | nopre")->check(CLI::IsMember({"pre", "nopre"}));
  };

  auto* sim = app.add_subcommand("simulate", "Run the explicit solver");
  add_common(sim);
  add_parallel(sim);
  long steps = 0;
  std::string timing_out;
  sim->add_option("--steps", steps, "Number of steps (default n_T)");
  sim->add_option("--out", out_path, "Trajectory output file")->required();
  sim->add_option("--timing", timing_out, "Per-step timing CSV");
  sim->add_option("--alpha-f", alpha_f, "Downward load magnitude");

  auto* train = app.add_subcommand("train", "Train encoder-decoder models");
  std::vector<std::string> data_paths;
  std::vector<double> data_alphas;
  std::string rank_sel = "all", dataset_out;
  train->add_option("--data", data_paths, "Dataset or trajectory file(s)")->required();
  train->add_option("--alpha-f", data_alphas, "Load parameter per trajectory (conditional models)");
  add_common(train);
  train->add_option("--rank", rank_sel, "Rank index or 'all'");
  train->add_option("--out-model", out_path, "Model file, or directory when --rank all")->required();
  train->add_option("--dataset-out", dataset_out, "Also write the assembled dataset");

  auto* eval = app.add_subcommand("eval-offline", "Recursive offline error of a model");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--traj", traj_path, "Reference trajectory")->required();
  eval->add_option("--N", eval_N, "Recursive applications");
  int eval_rank = 0;
  eval->add_option("--rank", eval_rank, "Rank whose shared dofs the model predicts");
  eval->add_option("--alpha-f", alpha_f, "Load parameter for conditional models");
  add_common(eval);

  auto* sync = app.add_subcommand("run-sync-avoid", "Synchronization-avoiding run");
  add_common(sync);
  add_parallel(sync);
  sync->add_option("--models-dir", models_dir, "Directory with rank_<r>.json")->required();
  sync->add_option("--out", out_path, "Output directory");
  sync->add_option("--alpha-f", alpha_f, "Load parameter");

  auto* bench = app.add_subcommand("bench", "Max-average timing summary and speedup");
  add_common(bench);
  add_parallel(bench);
  bench->add_option("--models-dir", models_dir, "Models for the sync-avoiding run");
  bench->add_option("--repeat", repeat, "Median of k runs")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_path, "Output prefix for .json/.csv");

  auto* metrics = app.add_subcommand("metrics", "Error metrics of a sync-avoiding run");
  add_common(metrics);
  std::string pred_dir;
  metrics->add_option("--truth", traj_path, "Synchronized reference trajectory")->required();
  metrics->add_option("--pred-dir", pred_dir, "Output directory of run-sync-avoid")->required();
  metrics->add_option("--out", out_path, "Metrics CSV");

  auto* sweep = app.add_subcommand("sweep-ns", "Train and evaluate over sampling strides");
  add_common(sweep);
  std::string ns_list = "20,40,80";
  sweep->add_option("--ns", ns_list, "Comma separated n_s values");
  sweep->add_option("--out", out_path, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: kind=usage msg=\"" << e.what() << "\"\n" << app.help();
    return 2;
  }

  const std::string cmdline = [&] {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
  }();

  try {
    if (*gen) {
      const Mesh mesh = generate_beam_mesh(L, W, H, nx, ny, nz);
      write_mesh_file(mesh_out, mesh);
      std::clog << "mesh: " << mesh.n_nodes() << " nodes, " << mesh.n_elems() << " tets\n";
      return 0;
    }

    Setup s = make_setup(mesh_path, config_path, cores);
    if (latency_us >= 0) s.cfg.latency_us = latency_us;
    if (!mode.empty()) s.cfg.mode = mode == "pre" ? AssemblyMode::PreAssembled : AssemblyMode::PerStep;

    if (*sim) {
      const long n = steps > 0 ? steps : s.cfg.n_T;
      const LoadSpec load = load_for(s, alpha_f);
      Trajectory traj;
      if (s.cfg.cores == 1 && timing_out.empty()) {
        traj = serial_solve(s.mesh, s.mat, load, s.dt, n, s.ic);
      } else {
        auto res = distributed_solve(s.mesh, s.part, s.mat, load, s.dt, n, options_for(s));
        traj = std::move(res.trajectory);
        if (!timing_out.empty()) {
          std::ofstream t(timing_out);
          write_timing_csv(t, res.timings);
        }
      }
      write_trajectory_file(out_path, traj);
      write_meta(out_path, s.cfg, cmdline);
      std::clog << "simulate: " << n << " steps, dt=" << s.dt << "\n";
      return 0;
    }

    if (*train) {
      if (s.cfg.conditional && data_alphas.size() != data_paths.size())
        throw std::invalid_argument("train: conditional models need one --alpha-f per --data file");
      std::vector<int> rank_ids;
      if (rank_sel == "all")
        for (int r = 0; r < s.cfg.cores; ++r) rank_ids.push_back(r);
      else
        rank_ids.push_back(std::stoi(rank_sel));
      std::vector<pipeline::Dataset> sets(rank_ids.size());
      for (std::size_t f = 0; f < data_paths.size(); ++f) {
        const std::optional<double> a =
            s.cfg.conditional ? std::optional<double>(data_alphas[f]) : std::nullopt;
        if (peek_magic(data_paths[f]) == pipeline::kDatasetMagic) {
          if (rank_ids.size() != 1) throw std::invalid_argument("train: dataset files need a single --rank");
          sets[0].append(pipeline::read_dataset_file(data_paths[f]));
          continue;
        }
        const Trajectory traj = read_trajectory_file(data_paths[f]);
        for (std::size_t i = 0; i < rank_ids.size(); ++i)
          sets[i].append(pipeline::build_dataset(
              traj, s.ranks.at(static_cast<std::size_t>(rank_ids[i])).shared_global_dofs, sample_config(s.cfg), a));
      }
      if (!dataset_out.empty()) pipeline::write_dataset_file(dataset_out, sets.front());
      if (rank_ids.size() > 1) fs::create_directories(out_path);
      for (std::size_t i = 0; i < rank_ids.size(); ++i) {
        pipeline::TrainConfig tc = train_config(s.cfg);
        tc.seed = s.cfg.seed + static_cast<std::uint64_t>(rank_ids[i]);
        const int r = rank_ids[i];
        const long n_epochs = tc.epochs();
        auto res = pipeline::train_model(sets[i], arch(s.cfg), tc, [&](long e, double l) {
          if (e % 100 == 0 || e + 1 == n_epochs)
            std::clog << "train rank=" << r << " epoch=" << e << " loss=" << l << "\n";
        });
        const std::string path = rank_ids.size() > 1 ? rank_model_path(out_path, r) : out_path;
        nn::save_model(res.params, path);
      }
      write_meta(out_path, s.cfg, cmdline);
      return 0;
    }

    if (*eval) {
      const auto params = nn::load_model(model_path);
      const Trajectory traj = read_trajectory_file(traj_path);
      const auto& dofs = s.ranks.at(static_cast<std::size_t>(eval_rank)).shared_global_dofs;
      const Eigen::MatrixXd series = pipeline::sampled_series(rows_of(traj, dofs), s.cfg.n_s);
      const long start = static_cast<long>(pipeline::sampled_steps(traj.n_rows(), sample_config(s.cfg)).size());
      pipeline::EncDecModel model(params, params.dims.conditional ? alpha_f : std::nullopt);
      const double e = pipeline::e_mse(model, series, std::max<long>(start, params.dims.n_p), eval_N);
      nlohmann::ordered_json j;
      j["e_mse"] = e;
      j["sqrt_e_mse"] = std::sqrt(e);
      j["peak"] = series.cwiseAbs().maxCoeff();
      j["N"] = eval_N;
      std::cout << j.dump() << '\n';
      return 0;
    }

    if (*sync) {
      const auto params = load_rank_models(models_dir, s.cfg.cores);
      const auto models = wrap_models(params, alpha_f);
      const LoadSpec load = load_for(s, alpha_f);
      pipeline::SyncAvoidConfig sc{s.cfg.n_s, s.cfg.resolved_n_cri()};
      auto res = pipeline::sync_avoiding_solve(s.mesh, s.part, s.mat, load, s.dt, s.cfg.n_T, pointers(models), sc,
                                               options_for(s));
      const std::string dir = out_path.empty() ? "sync_avoid_out" : out_path;
      fs::create_directories(dir);
      write_trajectory_file((fs::path(dir) / "trajectory.bin").string(), res.trajectory);
      for (std::size_t r = 0; r < res.shared_histories.size(); ++r)
        write_trajectory_file((fs::path(dir) / ("shared_rank_" + std::to_string(r) + ".bin")).string(),
                              Trajectory{s.dt, res.shared_histories[r]});
      std::ofstream t((fs::path(dir) / "timing.csv").string());
      write_timing_csv(t, res.timings);

      const auto ref = distributed_solve(s.mesh, s.part, s.mat, load, s.dt, s.cfg.n_T, options_for(s));
      const auto map = pipeline::shared_node_map(s.ranks);
      const auto m = pipeline::error_metrics(ref.trajectory.d, res.trajectory.d, res.shared_histories, map,
                                             res.n_cri + 1, s.cfg.n_T + 1);
      std::ofstream mcsv((fs::path(dir) / "metrics.csv").string());
      pipeline::write_metrics_csv(mcsv, m);
      write_meta(dir, s.cfg, cmdline);
      nlohmann::ordered_json j;
      j["n_cri"] = res.n_cri;
      j["final_e_l2"] = m.e_l2[m.e_l2.size() - 1];
      j["corr_es_bar_es_hat"] = pipeline::correlation(m.es_bar, m.es_hat);
      std::cout << j.dump() << '\n';
      return 0;
    }

    if (*metrics) {
      const Trajectory truth = read_trajectory_file(traj_path);
      const Trajectory pred = read_trajectory_file((fs::path(pred_dir) / "trajectory.bin").string());
      std::vector<Eigen::MatrixXd> shared;
      for (int r = 0; r < s.cfg.cores; ++r)
        shared.push_back(
            read_trajectory_file((fs::path(pred_dir) / ("shared_rank_" + std::to_string(r) + ".bin")).string()).d);
      const long last = std::min(truth.n_rows(), pred.n_rows());
      const auto m = pipeline::error_metrics(truth.d, pred.d, shared, pipeline::shared_node_map(s.ranks),
                                             s.cfg.resolved_n_cri() + 1, last);
      if (out_path.empty()) {
        pipeline::write_metrics_csv(std::cout, m);
      } else {
        std::ofstream out(out_path);
        pipeline::write_metrics_csv(out, m);
      }
      std::clog << "metrics: corr(es_bar, es_hat)=" << pipeline::correlation(m.es_bar, m.es_hat) << "\n";
      return 0;
    }

    if (*bench) {
      std::vector<nn::EncDecParams> params;
      std::vector<pipeline::EncDecModel> models;
      if (!models_dir.empty()) {
        params = load_rank_models(models_dir, s.cfg.cores);
        models = wrap_models(params, alpha_f);
      }
      std::vector<PerfSummary> base_runs, fast_runs;
      for (int k = 0; k < repeat; ++k) {
        auto base = distributed_solve(s.mesh, s.part, s.mat, s.load, s.dt, s.cfg.n_T, options_for(s));
        base_runs.push_back(max_average(base.timings, kWarmupSteps));
        if (!models.empty()) {
          pipeline::SyncAvoidConfig sc{s.cfg.n_s, s.cfg.resolved_n_cri()};
          auto fast = pipeline::sync_avoiding_solve(s.mesh, s.part, s.mat, s.load, s.dt, s.cfg.n_T,
                                                    pointers(models), sc, options_for(s));
          fast_runs.push_back(max_average(fast.timings, std::max(kWarmupSteps, sc.n_cri)));
        }
      }
      const int n_a = static_cast<int>(s.part.all_shared_nodes().size());
      PerfSummary base = median_summary(base_runs);
      base.n_a = n_a;
      nlohmann::ordered_json j;
      j["baseline"] = nlohmann::ordered_json::parse(to_json(base));
      std::ostringstream csv;
      write_csv_header(csv);
      write_csv_row(csv, "baseline", base);
      if (!fast_runs.empty()) {
        PerfSummary fast = median_summary(fast_runs);
        fast.n_a = n_a;
        fast.zeta = speedup(base, fast);
        j["sync_avoid"] = nlohmann::ordered_json::parse(to_json(fast));
        write_csv_row(csv, "sync_avoid", fast);
      }
      std::cout << j.dump(2) << '\n';
      if (!out_path.empty()) {
        std::ofstream(out_path + ".json") << j.dump(2) << '\n';
        std::ofstream(out_path + ".csv") << csv.str();
        write_meta(out_path, s.cfg, cmdline);
      }
      return 0;
    }

    if (*sweep) {
      const Trajectory traj = serial_solve(s.mesh, s.mat, s.load, s.dt, s.cfg.n_T, s.ic);
      const auto& dofs = s.ranks.front().shared_global_dofs;
      std::ostringstream csv;
      csv << "n_s,windows,final_loss,sqrt_e_mse\n";
      for (long ns : parse_list(ns_list)) {
        RunConfig c = s.cfg;
        c.n_s = static_cast<int>(ns);
        const auto data = pipeline::build_dataset(traj, dofs, sample_config(c));
        auto res = pipeline::train_model(data, arch(c), train_config(c));
        const Eigen::MatrixXd series = pipeline::sampled_series(rows_of(traj, dofs), c.n_s);
        const long start = static_cast<long>(pipeline::sampled_steps(traj.n_rows(), sample_config(c)).size());
        pipeline::EncDecModel model(res.params);
        const long room = (series.cols() - start) / c.n_f;
        double e = std::nan("");
        if (room >= 1) e = pipeline::e_mse(model, series, start, static_cast<int>(std::min<long>(room, 60)));
        csv << ns << ',' << data.windows.size() << ',' << res.loss_history.back() << ',' << std::sqrt(e) << '\n';
        std::clog << "sweep-ns: n_s=" << ns << " sqrt_e_mse=" << std::sqrt(e) << "\n";
      }
      if (out_path.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream(out_path) << csv.str();
        write_meta(out_path, s.cfg, cmdline);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), '"', '\'');
    std::cerr << "error: kind=" << error_kind(e) << " msg=\"" << msg << "\"\n";
    return 1;
  }
  return 0;
}
