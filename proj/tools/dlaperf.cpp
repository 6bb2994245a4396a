// Copyright 2026 The dlaperf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dlaperf command-line interface.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlaperf/algorithms.hpp"
#include "dlaperf/config.hpp"
#include "dlaperf/error.hpp"
#include "dlaperf/format.hpp"
#include "dlaperf/modeler.hpp"
#include "dlaperf/modelstore.hpp"
#include "dlaperf/predictor.hpp"
#include "dlaperf/trace.hpp"
#include "dlaperf/tuner.hpp"
#include "json.hpp"

namespace {

using namespace dlaperf;
using nlohmann::json;

std::vector<std::int64_t> parse_point(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "bad coordinate '" + part + "' in --point");
    }
  }
  if (out.empty()) fail(ErrorKind::InvalidArgument, "--point is empty");
  return out;
}

// Writes to `path`, or stdout when the path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) fail(ErrorKind::ResourceError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct Common {
  std::string config_path;
  std::string backend;
  Config config;
  bool has_config = false;

  void load() {
    if (!config_path.empty()) {
      config = Config::from_file(config_path);
      has_config = true;
    }
    if (!backend.empty()) config.backend = parse_backend_kind(backend);
  }
};

struct AlgArgs {
  std::string alg;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t b = 0;

  void add(CLI::App* cmd, bool with_b) {
    cmd->add_option("--alg", alg, "qr_blocked, chol_alg1, chol_alg2, dpotrf, chol_alg3, chol_recursive")
        ->required();
    cmd->add_option("--m", m, "rows (defaults to n)");
    cmd->add_option("--n", n, "columns")->required();
    if (with_b) cmd->add_option("--b", b, "block size (default per algorithm)");
  }
  AlgorithmSpec spec() const { return {alg, m > 0 ? m : n, n, b}; }
};

// Machine profile: the config's when given, otherwise the one recorded in
// the model of the trace's first kernel.
MachineProfile resolve_machine(const Common& common, ModelLibrary& lib, const Trace& t) {
  if (common.has_config || t.size() == 0) return common.config.machine;
  return lib.model(t[0].kernel).metadata().machine;
}

void install_builder(ModelLibrary& lib, const Common& common,
                     std::shared_ptr<Backend>& backend) {
  const KernelRegistry& reg = KernelRegistry::builtin();
  backend = common.config.make_backend(reg);
  Backend* be = backend.get();
  const Config cfg = common.config;
  lib.set_builder([be, cfg](const KernelSignature& sig, const VariantKey& v) {
    std::cerr << "building missing model " << sig.id << " " << v.str() << "\n";
    return build_variant(*be, sig, v, cfg.domain_for(sig), cfg.refinement);
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Kernel performance models, cache-aware runtime prediction and block-size tuning"};
  app.require_subcommand(1);
  const KernelRegistry& registry = KernelRegistry::builtin();

  // model ------------------------------------------------------------------
  CLI::App* model = app.add_subcommand("model", "build, evaluate and sweep kernel models");
  model->require_subcommand(1);

  Common build_common;
  std::string build_kernel, build_out, build_partition, build_timestamp;
  std::vector<std::string> build_variants;
  std::optional<std::uint64_t> build_seed;
  CLI::App* build = model->add_subcommand("build", "build a kernel model by adaptive refinement");
  build->add_option("--kernel", build_kernel, "kernel id")->required();
  build->add_option("--config", build_common.config_path, "config file")->required();
  build->add_option("--backend", build_common.backend, "synthetic, reference or external");
  build->add_option("--out", build_out, "model file to write")->required();
  build->add_option("--variant", build_variants, "variant to model (repeatable)");
  build->add_option("--partition", build_partition, "write the patch partition as CSV");
  build->add_option("--seed", build_seed, "synthetic backend seed");
  build->add_option("--timestamp", build_timestamp, "timestamp recorded in the file");

  std::string eval_model, eval_variant, eval_point, eval_condition = "oc";
  CLI::App* eval = model->add_subcommand("eval", "evaluate a model at one point");
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--variant", eval_variant, "variant key")->required();
  eval->add_option("--point", eval_point, "sizes, e.g. 64,64,64")->required();
  eval->add_option("--condition", eval_condition, "ic or oc")
      ->check(CLI::IsMember({"ic", "oc"}));

  Common sweep_common;
  std::string sweep_kernel, sweep_variant, sweep_condition = "oc", sweep_out;
  std::int64_t sweep_stride = 8;
  CLI::App* sweep = model->add_subcommand("sweep-config", "accuracy vs samples over refinement configs");
  sweep->add_option("--kernel", sweep_kernel, "kernel id")->required();
  sweep->add_option("--config", sweep_common.config_path, "config file")->required();
  sweep->add_option("--backend", sweep_common.backend, "synthetic, reference or external");
  sweep->add_option("--variant", sweep_variant, "variant key (default: first modeled variant)");
  sweep->add_option("--condition", sweep_condition, "ic or oc")
      ->check(CLI::IsMember({"ic", "oc"}));
  sweep->add_option("--stride", sweep_stride, "evaluation grid stride");
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");

  // predict ----------------------------------------------------------------
  Common pred_common;
  AlgArgs pred_alg;
  std::string pred_models, pred_mode = "blended", pred_out;
  bool pred_build = false;
  CLI::App* predict = app.add_subcommand("predict", "predict an algorithm's runtime");
  pred_alg.add(predict, true);
  predict->add_option("--models", pred_models, "model directory")->required();
  predict->add_option("--mode", pred_mode, "blended, ic or oc")
      ->check(CLI::IsMember({"blended", "ic", "oc"}));
  predict->add_option("--config", pred_common.config_path, "config (machine profile, backend)");
  predict->add_flag("--build-missing", pred_build, "build missing variants with the config backend");
  predict->add_option("--out", pred_out, "CSV output (default stdout)");

  // tune-b -----------------------------------------------------------------
  Common tune_common;
  AlgArgs tune_alg;
  std::string tune_models, tune_range = "8:288:8", tune_mode = "blended", tune_out;
  bool tune_build = false;
  CLI::App* tune = app.add_subcommand("tune-b", "pick the block size with the lowest predicted runtime");
  tune_alg.add(tune, false);
  tune->add_option("--b-range", tune_range, "LO:HI:STEP");
  tune->add_option("--models", tune_models, "model directory")->required();
  tune->add_option("--mode", tune_mode, "blended, ic or oc")
      ->check(CLI::IsMember({"blended", "ic", "oc"}));
  tune->add_option("--config", tune_common.config_path, "config (machine profile, backend)");
  tune->add_flag("--build-missing", tune_build, "build missing variants with the config backend");
  tune->add_option("--out", tune_out, "curve CSV output (default stdout)");

  // rank -------------------------------------------------------------------
  Common rank_common;
  std::string rank_specs, rank_models, rank_mode = "blended", rank_range;
  CLI::App* rank = app.add_subcommand("rank", "rank algorithm variants by predicted runtime");
  rank->add_option("--specs", rank_specs, "JSON list of {algorithm, m, n, b}")->required();
  rank->add_option("--models", rank_models, "model directory")->required();
  rank->add_option("--mode", rank_mode, "blended, ic or oc")
      ->check(CLI::IsMember({"blended", "ic", "oc"}));
  rank->add_option("--config", rank_common.config_path, "config (machine profile)");
  rank->add_option("--tune", rank_range, "tune b per spec over LO:HI:STEP instead of fixed b");

  // trace ------------------------------------------------------------------
  CLI::App* trace = app.add_subcommand("trace", "inspect algorithm traces");
  trace->require_subcommand(1);
  AlgArgs dump_alg;
  std::string dump_out;
  CLI::App* dump = trace->add_subcommand("dump", "write a trace as line-delimited JSON");
  dump_alg.add(dump, true);
  dump->add_option("--out", dump_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (build->parsed()) {
    build_common.load();
    Config& cfg = build_common.config;
    const KernelSignature& sig = registry.get(build_kernel);
    std::vector<VariantKey> variants;
    for (const auto& v : build_variants) variants.push_back(parse_variant(sig, v));
    if (variants.empty()) variants = cfg.variants_for(sig);
    if (build_seed) {
      json s = json::parse(cfg.synthetic_json);
      s["seed"] = *build_seed;
      cfg.synthetic_json = s.dump();
    }
    auto backend = cfg.make_backend(registry);
    PerfModel m = build_model(*backend, sig, variants, cfg.domain_for(sig), cfg.refinement,
                              cfg.machine);
    m.metadata().timestamp = build_timestamp;
    m.save(build_out);
    std::cout << "kernel " << sig.id << ": " << m.variants().size() << " variants, "
              << m.metadata().total_samples << " samples\n";
    std::cout << "variant,condition,patches,max_fit_error\n";
    std::ofstream partition;
    if (!build_partition.empty()) {
      partition.open(build_partition);
      if (!partition) fail(ErrorKind::ResourceError, "cannot write " + build_partition);
      partition << "variant,condition,";
    }
    bool header = false;
    for (const auto& [key, vm] : m.variants()) {
      for (CacheCondition c : {CacheCondition::InCache, CacheCondition::OutOfCache}) {
        const auto& pw = vm.at(c);
        double worst = 0;
        for (const auto& p : pw.patches()) worst = std::max(worst, p.fit_error);
        std::cout << key.str() << ',' << to_string(c) << ',' << pw.patches().size() << ','
                  << format_number(worst) << '\n';
        if (partition.is_open()) {
          std::ostringstream rows;
          write_partition_csv(rows, pw.patches(), sig.sizes);
          std::string line;
          std::istringstream in(rows.str());
          std::getline(in, line);
          if (!header) {
            partition << line << '\n';
            header = true;
          }
          while (std::getline(in, line)) {
            partition << '"' << key.str() << "\"," << to_string(c) << ',' << line << '\n';
          }
        }
      }
    }
    return 0;
  }

  if (eval->parsed()) {
    const PerfModel m = PerfModel::load(eval_model);
    const KernelSignature& sig = registry.get(m.kernel());
    const VariantKey v = parse_variant(sig, eval_variant);
    const auto point = parse_point(eval_point);
    if (point.size() != sig.dims()) {
      fail(ErrorKind::InvalidArgument, sig.id + " takes " + std::to_string(sig.dims()) +
                                           " sizes");
    }
    std::cout << format_number(m.estimate(v, parse_condition(eval_condition), point)) << '\n';
    return 0;
  }

  if (sweep->parsed()) {
    sweep_common.load();
    const Config& cfg = sweep_common.config;
    const KernelSignature& sig = registry.get(sweep_kernel);
    const VariantKey v = sweep_variant.empty() ? cfg.variants_for(sig).front()
                                               : parse_variant(sig, sweep_variant);
    const CacheCondition cond = parse_condition(sweep_condition);
    auto backend = cfg.make_backend(registry);
    const auto domain = cfg.domain_for(sig);

    std::vector<std::pair<std::string, RefinementConfig>> configs;
    RefinementConfig base = cfg.refinement;
    RefinementConfig rough = base;
    rough.oversample = 0;
    rough.error_metric = ErrorMetric::AvgRelative;
    configs.emplace_back("rough", rough);
    for (double target : {0.2, 0.1, 0.05, 0.02, 0.01}) {
      for (int over : {0, 1, 2}) {
        RefinementConfig c = base;
        c.target_error = target;
        c.oversample = over;
        configs.emplace_back("target=" + format_number(target) + ";oversample=" +
                                 std::to_string(over),
                             c);
      }
    }
    const Sampler sampler = [&](std::span<const std::int64_t> p) {
      return measure(*backend, sig, v, p, cond, base.repetitions).median_cycles;
    };
    PointFunction oracle;
    if (auto* synth = dynamic_cast<SyntheticBackend*>(backend.get())) {
      oracle = [&, synth](std::span<const std::int64_t> p) { return synth->cost(sig, v, cond, p); };
    } else {
      oracle = sampler;
    }
    const auto rows = sweep_configs(configs, domain, sampler, oracle, sweep_stride);
    Output out(sweep_out);
    write_sweep_csv(out.stream(), rows);
    return 0;
  }

  if (predict->parsed()) {
    pred_common.load();
    ModelLibrary lib(pred_models);
    std::shared_ptr<Backend> backend;
    if (pred_build) install_builder(lib, pred_common, backend);
    const Trace t = make_trace(pred_alg.spec());
    const MachineProfile machine = resolve_machine(pred_common, lib, t);
    const Prediction p = predict_trace(t, lib, machine, parse_mode(pred_mode));
    Output out(pred_out);
    write_prediction_csv(out.stream(), t, p);
    return 0;
  }

  if (tune->parsed()) {
    tune_common.load();
    ModelLibrary lib(tune_models);
    std::shared_ptr<Backend> backend;
    if (tune_build) install_builder(lib, tune_common, backend);
    const AlgorithmSpec spec = tune_alg.spec();
    const BlockRange range = BlockRange::parse(tune_range);
    const Trace probe = make_trace({spec.algorithm, spec.m, spec.n, range.lo});
    const MachineProfile machine = resolve_machine(tune_common, lib, probe);
    const TuneResult r =
        tune_blocksize(spec.algorithm, spec.m, spec.n, range, lib, machine, parse_mode(tune_mode));
    if (!verify_argmin(r)) fail(ErrorKind::InvalidArgument, "argmin certificate failed");
    std::cout << "b_best=" << r.best_b << " cycles=" << format_number(r.best_cycles) << '\n';
    Output out(tune_out);
    write_curve_csv(out.stream(), r.curve);
    return 0;
  }

  if (rank->parsed()) {
    rank_common.load();
    std::ifstream in(rank_specs);
    if (!in) fail(ErrorKind::ParseError, "cannot open " + rank_specs);
    std::vector<AlgorithmSpec> specs;
    try {
      const json doc = json::parse(in);
      const json& list = doc.is_object() ? doc.at("specs") : doc;
      for (const json& s : list) {
        AlgorithmSpec a;
        a.algorithm = s.at("algorithm").get<std::string>();
        a.n = s.at("n").get<std::int64_t>();
        a.m = s.value("m", a.n);
        a.b = s.value("b", std::int64_t{0});
        specs.push_back(a);
      }
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError, rank_specs + ": " + e.what());
    }
    if (specs.empty()) fail(ErrorKind::InvalidSpec, rank_specs + " lists no algorithms");
    ModelLibrary lib(rank_models);
    const MachineProfile machine =
        resolve_machine(rank_common, lib, make_trace(specs.front()));
    const PredictionMode mode = parse_mode(rank_mode);
    if (!rank_range.empty()) {
      const BlockRange range = BlockRange::parse(rank_range);
      for (AlgorithmSpec& s : specs) {
        s.b = tune_blocksize(s.algorithm, s.m, s.n, range, lib, machine, mode).best_b;
      }
    }
    const auto ranking = rank_algorithms(specs, lib, machine, mode);
    std::cout << "algorithm,b,cycles,efficiency\n";
    for (const RankEntry& e : ranking) {
      std::cout << e.spec.algorithm << ',' << e.spec.b << ',' << format_number(e.cycles) << ','
                << format_number(e.efficiency) << '\n';
    }
    return 0;
  }

  if (dump->parsed()) {
    const Trace t = make_trace(dump_alg.spec());
    Output out(dump_out);
    write_trace(out.stream(), t);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const dlaperf::Error& e) {
    std::cerr << "dlaperf: " << e.what() << '\n';
    return e.kind() == dlaperf::ErrorKind::InvalidArgument ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "dlaperf: " << e.what() << '\n';
    return 2;
  }
}
