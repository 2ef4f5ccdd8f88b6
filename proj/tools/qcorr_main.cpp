// qcorr: dataset generation, training and evaluation pipeline for two-qubit
// correlation-class prediction from collective measurements.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <thread>

#include "qcorr/ann.hpp"
#include "qcorr/collective.hpp"
#include "qcorr/correlations.hpp"
#include "qcorr/dataset.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/manifest.hpp"
#include "qcorr/metrics.hpp"
#include "qcorr/qmath.hpp"
#include "qcorr/states.hpp"
#include "qcorr/sweep.hpp"

namespace {

using namespace qcorr;

struct GlobalOpts {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  bool deterministic = false;

  int effective_threads() const { return deterministic ? 1 : std::max(1, threads); }
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<int> parse_plan(const std::string& plan, int n_features) {
  if (plan == "paper") return reduction_plan().retained_set(n_features);
  if (plan.rfind("custom:", 0) == 0) {
    std::vector<int> retained;
    std::stringstream ss(plan.substr(7));
    std::string item;
    while (std::getline(ss, item, ',')) retained.push_back(std::stoi(item));
    std::sort(retained.begin(), retained.end());
    if (retained.empty() ||
        std::unique(retained.begin(), retained.end()) != retained.end())
      throw PreconditionError("--plan custom: needs unique feature indices");
    for (int idx : retained)
      if (idx < 0 || idx >= kFeatureCount)
        throw PreconditionError("--plan custom: index out of range 0..9");
    return retained;
  }
  throw PreconditionError("--plan must be 'paper' or 'custom:<i,j,...>'");
}

TrainConfig make_train_config(std::uint64_t seed, int max_epochs, int patience,
                              double lr, int batch1, int batch2) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.max_epochs = max_epochs;
  cfg.patience = patience;
  cfg.learning_rate = lr;
  cfg.batch_phase1 = batch1;
  cfg.batch_phase2 = batch2;
  cfg.verbose = true;
  return cfg;
}

// ---------------------------------------------------------------------------

int cmd_gen(const GlobalOpts& g, std::uint64_t seed, std::uint64_t count,
            const std::string& out, const std::string& csv) {
  const Dataset ds = generate(count, StateSeed{seed, 0}, g.effective_threads());
  write_dataset(ds, out);
  std::printf("wrote %" PRIu64 " records to %s\n", ds.header.record_count, out.c_str());
  std::printf("class counts:");
  for (int c = 0; c < kClassCount; ++c)
    std::printf(" %s=%" PRIu64, kClassNames[c], ds.header.class_counts[c]);
  std::printf("\n");
  if (!csv.empty()) write_csv(ds, csv);

  RunManifest manifest("gen", {{"seed", std::to_string(seed)},
                               {"count", std::to_string(count)},
                               {"threads", std::to_string(g.effective_threads())},
                               {"deterministic", g.deterministic ? "1" : "0"},
                               {"out", out}});
  manifest.add_output(out);
  if (!csv.empty()) manifest.add_output(csv);
  manifest.write(out + ".manifest.json");
  return 0;
}

int cmd_equalize(const GlobalOpts& g, std::uint64_t seed, const std::string& dataset,
                 const std::string& out, const std::string& csv) {
  const Dataset raw = read_dataset(dataset);
  const Dataset eq = equalize(raw, seed);
  write_dataset(eq, out);
  std::printf("equalized %" PRIu64 " -> %" PRIu64 " records (%.4f of raw)\n",
              raw.header.record_count, eq.header.record_count,
              static_cast<double>(eq.header.record_count) /
                  static_cast<double>(raw.header.record_count));
  if (!csv.empty()) write_csv(eq, csv);

  RunManifest manifest("equalize", {{"seed", std::to_string(seed)},
                                    {"dataset", dataset},
                                    {"deterministic", g.deterministic ? "1" : "0"},
                                    {"out", out}});
  manifest.add_input(dataset);
  manifest.add_output(out);
  if (!csv.empty()) manifest.add_output(csv);
  manifest.write(out + ".manifest.json");
  return 0;
}

int cmd_split(const GlobalOpts& g, std::uint64_t seed, const std::string& dataset,
              const std::string& out) {
  const Dataset eq = read_dataset(dataset);
  const SplitResult parts = split(eq, seed);
  write_dataset(parts.train, out + ".train.qds");
  write_dataset(parts.validation, out + ".val.qds");
  write_dataset(parts.test, out + ".test.qds");
  std::printf("split %" PRIu64 " -> train %zu / val %zu / test %zu\n",
              eq.header.record_count, parts.train.records.size(),
              parts.validation.records.size(), parts.test.records.size());

  RunManifest manifest("split", {{"seed", std::to_string(seed)},
                                 {"dataset", dataset},
                                 {"deterministic", g.deterministic ? "1" : "0"},
                                 {"out", out}});
  manifest.add_input(dataset);
  for (const char* part : {".train.qds", ".val.qds", ".test.qds"})
    manifest.add_output(out + part);
  manifest.write(out + ".split.manifest.json");
  return 0;
}

int cmd_train(const GlobalOpts& g, std::uint64_t seed, const std::string& dataset,
              const std::string& out, int n_features, const std::string& plan,
              const std::string& bn_input, int max_epochs, int patience, double lr,
              int batch1, int batch2) {
  const std::vector<int> retained = parse_plan(plan, n_features);
  const Dataset train_ds = read_dataset(dataset + ".train.qds");
  const Dataset val_ds = read_dataset(dataset + ".val.qds");
  const TrainConfig cfg = make_train_config(seed, max_epochs, patience, lr, batch1, batch2);

  TrainedModel trained = train_on(train_ds, val_ds, retained, cfg, bn_input == "on");
  trained.model.save(out);
  const std::string history_path =
      std::filesystem::path(out).replace_extension(".history.csv").string();
  write_text_file(history_path, history_csv(trained.result));
  std::printf("trained n=%zu model: best val loss %.6f at epoch %d (%zu epochs)\n",
              retained.size(), trained.result.best_val_loss,
              trained.result.best_epoch, trained.result.history.size());

  RunManifest manifest("train", {{"seed", std::to_string(seed)},
                                 {"dataset", dataset},
                                 {"n_features", std::to_string(n_features)},
                                 {"plan", plan},
                                 {"bn_input", bn_input},
                                 {"max_epochs", std::to_string(max_epochs)},
                                 {"patience", std::to_string(patience)},
                                 {"lr", std::to_string(lr)},
                                 {"batch1", std::to_string(batch1)},
                                 {"batch2", std::to_string(batch2)},
                                 {"threads", std::to_string(g.effective_threads())},
                                 {"deterministic", g.deterministic ? "1" : "0"},
                                 {"out", out}});
  manifest.add_input(dataset + ".train.qds");
  manifest.add_input(dataset + ".val.qds");
  manifest.add_output(out);
  manifest.add_output(history_path);
  manifest.write(out + ".manifest.json");
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& model_path,
             const std::string& dataset, const std::string& out, int subsets,
             std::uint64_t seed) {
  const MlpModel model = MlpModel::load(model_path);
  const Dataset test_ds = read_dataset(dataset);
  const EvalOutput eval = evaluate_on(model, test_ds, subsets, seed);

  std::printf("%s", format_report(eval.subsets).c_str());
  std::printf("full-test accuracy %.4f, relaxed %.4f\n", eval.point.accuracy.mean,
              eval.point.relaxed_accuracy.mean);
  write_text_file(out + ".scores.csv", scores_csv(eval.subsets));
  write_text_file(out + ".confusion.csv", confusion_csv(eval.cm));

  RunManifest manifest("eval", {{"model", model_path},
                                {"dataset", dataset},
                                {"subsets", std::to_string(subsets)},
                                {"seed", std::to_string(seed)},
                                {"deterministic", g.deterministic ? "1" : "0"},
                                {"out", out}});
  manifest.add_input(model_path);
  manifest.add_input(dataset);
  manifest.add_output(out + ".scores.csv");
  manifest.add_output(out + ".confusion.csv");
  manifest.write(out + ".eval.manifest.json");
  return 0;
}

int cmd_sweep(const GlobalOpts& g, std::uint64_t seed, const std::string& dataset,
              const std::string& out_dir, const std::string& bn_input, int max_epochs,
              int patience, double lr, int batch1, int batch2, int subsets) {
  const Dataset train_ds = read_dataset(dataset + ".train.qds");
  const Dataset val_ds = read_dataset(dataset + ".val.qds");
  const Dataset test_ds = read_dataset(dataset + ".test.qds");
  const TrainConfig cfg = make_train_config(seed, max_epochs, patience, lr, batch1, batch2);

  SweepOptions opts;
  opts.bn_input = bn_input == "on";
  opts.subsets = subsets;
  opts.out_dir = out_dir;
  sweep(train_ds, val_ds, test_ds, cfg, opts);

  RunManifest manifest("sweep", {{"seed", std::to_string(seed)},
                                 {"dataset", dataset},
                                 {"bn_input", bn_input},
                                 {"max_epochs", std::to_string(max_epochs)},
                                 {"patience", std::to_string(patience)},
                                 {"lr", std::to_string(lr)},
                                 {"batch1", std::to_string(batch1)},
                                 {"batch2", std::to_string(batch2)},
                                 {"subsets", std::to_string(subsets)},
                                 {"threads", std::to_string(g.effective_threads())},
                                 {"deterministic", g.deterministic ? "1" : "0"},
                                 {"out", out_dir}});
  for (const char* part : {".train.qds", ".val.qds", ".test.qds"})
    manifest.add_input(dataset + part);
  manifest.add_output(out_dir + "/accuracy_vs_n.csv");
  manifest.add_output(out_dir + "/f1_vs_n.csv");
  for (int n = 1; n <= kFeatureCount; ++n) {
    manifest.add_output(out_dir + "/model_n" + std::to_string(n) + ".qnn");
    manifest.add_output(out_dir + "/scores_n" + std::to_string(n) + ".csv");
    manifest.add_output(out_dir + "/confusion_n" + std::to_string(n) + ".csv");
  }
  manifest.write(out_dir + "/sweep.manifest.json");
  return 0;
}

int cmd_report(const std::string& sweep_dir, const std::string& dataset,
               const std::string& csv) {
  if (!dataset.empty()) {
    if (csv.empty()) throw PreconditionError("report --dataset needs --csv <path>");
    write_csv(read_dataset(dataset), csv);
    std::printf("exported %s -> %s\n", dataset.c_str(), csv.c_str());
    return 0;
  }
  if (sweep_dir.empty())
    throw PreconditionError("report: pass --sweep <dir> or --dataset <file> --csv <path>");
  std::ifstream acc(sweep_dir + "/accuracy_vs_n.csv");
  if (!acc) throw IoError("report: " + sweep_dir + "/accuracy_vs_n.csv not found");
  std::printf("accuracy vs number of measurements (%s)\n", sweep_dir.c_str());
  std::string line;
  while (std::getline(acc, line)) std::printf("  %s\n", line.c_str());
  std::ifstream f1(sweep_dir + "/f1_vs_n.csv");
  if (f1) {
    std::printf("per-class F1 vs number of measurements\n");
    while (std::getline(f1, line)) std::printf("  %s\n", line.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: condensed oracle and invariant suite

int cmd_selftest(const GlobalOpts& g) {
  int failures = 0;
  auto check = [&](bool ok, const std::string& name) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
    if (!ok) ++failures;
  };

  {  // eigensolver identities on seeded random states
    bool trace_ok = true, involution_ok = true;
    for (int k = 0; k < 200; ++k) {
      GaussianStream gs(StateSeed{7, static_cast<std::uint64_t>(k)});
      const ComplexMatrix4 rho = random_state(gs);
      const auto eigs = hermitian_eigenvalues(rho);
      double sum = 0, sumsq = 0;
      for (double e : eigs) sum += e, sumsq += e * e;
      trace_ok = trace_ok && std::abs(sum - rho.trace().real()) < 1e-10 &&
                 std::abs(sumsq - (rho * rho).trace().real()) < 1e-10;
      involution_ok =
          involution_ok &&
          (partial_transpose(partial_transpose(rho)).array() == rho.array()).all();
    }
    check(trace_ok, "hermitian eigenvalues match trace identities");
    check(involution_ok, "partial transpose is an involution");
  }

  try {  // construction re-runs the 1e-14 invariant checks
    MinimalBasis::instance();
    check(true, "minimal basis invariants");
  } catch (const std::exception&) {
    check(false, "minimal basis invariants");
  }

  {  // singlet closed forms
    Eigen::Vector4cd psi;
    psi << 0, 1, -1, 0;
    psi /= std::sqrt(2.0);
    const ComplexMatrix4 singlet = psi * psi.adjoint();
    const QuantRecord q = analyze(singlet);
    check(std::abs(q.negativity - 1) < 1e-12 && std::abs(q.fef_witness - 1) < 1e-12 &&
              std::abs(q.steering - 1) < 1e-12 && std::abs(q.bell - 1) < 1e-12 &&
              q.label == ClassLabel::Bell,
          "singlet quantities N=FEFw=S3=B=1, class Bell");
    check((collective_r(singlet) - RealSym3::Identity()).cwiseAbs().maxCoeff() < 1e-12,
          "collective R of the singlet is the identity");
  }

  {  // spectrum equivalence and reconstruction round trip
    double max_spec = 0, max_quant = 0;
    for (int k = 0; k < 500; ++k) {
      GaussianStream gs(StateSeed{11, static_cast<std::uint64_t>(k)});
      const ComplexMatrix4 rho = random_state(gs);
      const Eigen::Matrix3d t = t_matrix(rho);
      const auto direct = sym3_spectrum(RealSym3(t.transpose() * t));
      const auto swap = sym3_spectrum(collective_r(rho));
      for (int i = 0; i < 3; ++i)
        max_spec = std::max(max_spec,
                            std::abs(direct.eigenvalues[i] - swap.eigenvalues[i]));
      const RQuantities a = quantities_from_r(RealSym3(t.transpose() * t));
      const RQuantities b = quantities_from_r(reconstruct_r(features(rho)));
      max_quant = std::max({max_quant, std::abs(a.fef_witness - b.fef_witness),
                            std::abs(a.steering - b.steering),
                            std::abs(a.bell - b.bell)});
    }
    check(max_spec < 1e-10, "collective R spectrum matches T^T T (max dev " +
                                std::to_string(max_spec) + ")");
    check(max_quant < 1e-8, "reconstruction round trip within 1e-8");
  }

  {  // hierarchy on random states
    std::uint64_t violations = 0;
    const std::uint64_t n = 20000;
    for (std::uint64_t k = 0; k < n; ++k) {
      const QuantRecord q = analyze(random_state(StateSeed{13, k}));
      const double eps = kClassifyEps;
      if ((q.bell > eps && q.steering <= eps) ||
          (q.steering > eps && q.fef_witness <= eps) ||
          (q.fef_witness > eps && q.negativity <= eps))
        ++violations;
    }
    check(violations == 0, "hierarchy B>0 => S3>0 => FEFw>0 => N>0 on 2e4 states");
  }

  {  // Werner thresholds by bisection
    auto werner = [](double p) {
      Eigen::Vector4cd psi;
      psi << 0, 1, -1, 0;
      psi /= std::sqrt(2.0);
      return ComplexMatrix4(p * (psi * psi.adjoint()) +
                            (1 - p) * 0.25 * ComplexMatrix4::Identity());
    };
    auto boundary = [&](auto indicator) {
      double lo = 0, hi = 1;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (indicator(analyze(werner(mid))) ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    };
    const double p_fef =
        boundary([](const QuantRecord& q) { return q.fef_witness > kClassifyEps; });
    const double p_steer =
        boundary([](const QuantRecord& q) { return q.steering > kClassifyEps; });
    const double p_bell =
        boundary([](const QuantRecord& q) { return q.bell > kClassifyEps; });
    check(std::abs(p_fef - 1.0 / 3.0) < 1e-6 &&
              std::abs(p_steer - 1.0 / std::sqrt(3.0)) < 1e-6 &&
              std::abs(p_bell - 1.0 / std::sqrt(2.0)) < 1e-6,
          "Werner class boundaries at 1/3, 1/sqrt3, 1/sqrt2");
  }

  {  // analytic gradients vs finite differences, small double models
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      MlpConfig cfg;
      cfg.input_dim = 4 + k;
      cfg.hidden = {8, 8};
      cfg.bn_input = true;
      cfg.init_seed = 100 + k;
      Mlp<double> model(cfg);
      std::mt19937_64 rng(200 + k);
      std::normal_distribution<double> dist;
      Eigen::MatrixXd x(cfg.input_dim, 12);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = dist(rng);
      std::vector<std::uint8_t> y(12);
      for (auto& v : y) v = static_cast<std::uint8_t>(rng() % kClassCount);
      worst = std::max(worst, gradient_check(model, x, y));
    }
    check(worst < 1e-4,
          "gradient check, max relative error " + std::to_string(worst));
  }

  {  // reduction plan shape
    const auto& plan = reduction_plan();
    bool ok = true;
    for (int n = 1; n <= kFeatureCount; ++n)
      ok = ok && static_cast<int>(plan.retained_set(n).size()) == n;
    for (int n = 5; n < kFeatureCount; ++n)
      for (int idx : plan.retained_set(n))
        ok = ok && std::find(plan.retained_set(n + 1).begin(),
                             plan.retained_set(n + 1).end(),
                             idx) != plan.retained_set(n + 1).end();
    check(ok, "reduction plan sizes and nesting for n in [5,10]");
  }

  (void)g;
  std::printf(failures == 0 ? "selftest: all checks passed\n"
                            : "selftest: %d check(s) FAILED\n",
              failures);
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-qubit correlation-class pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  GlobalOpts g;
  app.add_option("--threads", g.threads, "worker threads (default: hardware)");
  app.add_flag("--deterministic", g.deterministic,
               "single-threaded bitwise-reproducible mode");

  std::uint64_t seed = 1;
  std::uint64_t count = 1000000;
  std::string dataset, out, csv, model_path, plan = "paper", bn_input = "on",
                                sweep_dir;
  int n_features = kFeatureCount;
  int max_epochs = 4096, patience = 10, batch1 = 4096, batch2 = 1 << 18,
      subsets = 12;
  double lr = 1e-4;

  auto* gen = app.add_subcommand("gen", "generate a labelled random-state dataset");
  gen->fallthrough();
  gen->add_option("--seed", seed);
  gen->add_option("--count", count);
  gen->add_option("--out", out)->required();
  gen->add_option("--csv", csv, "also export CSV");

  auto* equalize = app.add_subcommand("equalize", "balance class populations");
  equalize->fallthrough();
  equalize->add_option("--seed", seed);
  equalize->add_option("--dataset", dataset)->required();
  equalize->add_option("--out", out)->required();
  equalize->add_option("--csv", csv);

  auto* split = app.add_subcommand("split", "12:3:1 stratified train/val/test split");
  split->fallthrough();
  split->add_option("--seed", seed);
  split->add_option("--dataset", dataset)->required();
  split->add_option("--out", out, "output prefix")->required();

  auto* train = app.add_subcommand("train", "train one classifier");
  train->fallthrough();
  train->add_option("--seed", seed);
  train->add_option("--dataset", dataset, "split prefix")->required();
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--n-features", n_features);
  train->add_option("--plan", plan, "paper | custom:<i,j,...>");
  train->add_option("--bn-input", bn_input)->check(CLI::IsMember({"on", "off"}));
  train->add_option("--max-epochs", max_epochs);
  train->add_option("--patience", patience);
  train->add_option("--lr", lr);
  train->add_option("--batch1", batch1);
  train->add_option("--batch2", batch2);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->fallthrough();
  eval->add_option("--seed", seed);
  eval->add_option("--model", model_path)->required();
  eval->add_option("--dataset", dataset)->required();
  eval->add_option("--out", out, "report prefix")->required();
  eval->add_option("--subsets", subsets);

  auto* sweep_cmd = app.add_subcommand("sweep", "reduction study n = 10 .. 1");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("--seed", seed);
  sweep_cmd->add_option("--dataset", dataset, "split prefix")->required();
  sweep_cmd->add_option("--out", out, "output directory")->required();
  sweep_cmd->add_option("--bn-input", bn_input)->check(CLI::IsMember({"on", "off"}));
  sweep_cmd->add_option("--max-epochs", max_epochs);
  sweep_cmd->add_option("--patience", patience);
  sweep_cmd->add_option("--lr", lr);
  sweep_cmd->add_option("--batch1", batch1);
  sweep_cmd->add_option("--batch2", batch2);
  sweep_cmd->add_option("--subsets", subsets);

  auto* report = app.add_subcommand("report", "print sweep tables / export CSV");
  report->fallthrough();
  report->add_option("--sweep", sweep_dir, "sweep output directory");
  report->add_option("--dataset", dataset, "dataset to export");
  report->add_option("--csv", csv, "CSV destination for --dataset");

  auto* selftest = app.add_subcommand("selftest", "oracle and invariant suite");
  selftest->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Eigen::setNbThreads(g.effective_threads());

  try {
    if (gen->parsed()) return cmd_gen(g, seed, count, out, csv);
    if (equalize->parsed()) return cmd_equalize(g, seed, dataset, out, csv);
    if (split->parsed()) return cmd_split(g, seed, dataset, out);
    if (train->parsed())
      return cmd_train(g, seed, dataset, out, n_features, plan, bn_input, max_epochs,
                       patience, lr, batch1, batch2);
    if (eval->parsed()) return cmd_eval(g, model_path, dataset, out, subsets, seed);
    if (sweep_cmd->parsed())
      return cmd_sweep(g, seed, dataset, out, bn_input, max_epochs, patience, lr,
                       batch1, batch2, subsets);
    if (report->parsed()) return cmd_report(sweep_dir, dataset, csv);
    if (selftest->parsed()) return cmd_selftest(g);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericsError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
