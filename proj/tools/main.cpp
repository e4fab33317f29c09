// handsynth CLI: dataset generation, training, evaluation, verification,
// label parsing, and single-record debugging.
//
// Exit codes: 0 success, 2 usage, 3 I/O failure, 4 validation failure.
// Option precedence: command line > HANDSYNTH_* environment > --config file
// > built-in defaults.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "handsynth/codec.hpp"
#include "handsynth/errors.hpp"
#include "handsynth/eval.hpp"
#include "handsynth/image_io.hpp"
#include "handsynth/joint_space.hpp"
#include "handsynth/pipeline.hpp"
#include "handsynth/regressor.hpp"
#include "handsynth/render.hpp"

namespace {

using namespace handsynth;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string env_name(const std::string& option) {
  std::string out = "HANDSYNTH_";
  for (char c : option) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

struct ConfigBinding {
  CLI::Option* opt = nullptr;
  std::function<void(const std::string&)> set;
};

using BindingMap = std::map<std::string, ConfigBinding>;

template <typename T>
CLI::Option* add_opt(CLI::App* sub, BindingMap& bindings, const std::string& name, T& var,
                  const std::string& desc) {
  CLI::Option* opt = sub->add_option("--" + name, var, desc)->envname(env_name(name));
  bindings[name] = {opt, [&var, name](const std::string& s) {
                      T parsed{};
                      if (!CLI::detail::lexical_cast(s, parsed))
                        throw UsageError("config: invalid value for '" + name + "': " + s);
                      var = parsed;
                    }};
  return opt;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config " + path + " line " + std::to_string(line_no) +
                       ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw UsageError("config " + path + " line " + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

struct GenOpts {
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  std::string out;
  int workers = 1;
  std::uint64_t val_count = UINT64_MAX;  // sentinel: derive from count
  std::string joint_def;
  int width = 224;
  int height = 224;
};

struct TrainOpts {
  std::string dataset;
  std::string out;
  TrainConfig config;
};

struct EvalOpts {
  std::string checkpoints;
  std::string dataset;
  std::string units = "radians";
  std::string format = "csv";
  std::string out;
};

struct VerifyOpts {
  std::string dataset;
};

struct ParseOpts {
  std::string file;
  std::string mode = "strict";
  std::string joint_def;
};

struct RenderOneOpts {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::string out;
  std::string joint_def;
  int width = 224;
  int height = 224;
};

JointSpace resolve_space(const std::string& joint_def) {
  return joint_def.empty() ? default_joint_space() : load_joint_space(joint_def);
}

int run_gen(const GenOpts& o) {
  JointSpace space = resolve_space(o.joint_def);
  std::uint64_t val_count = o.val_count == UINT64_MAX ? default_val_count(o.count) : o.val_count;
  std::cerr << "gen: seed=" << o.seed << " count=" << o.count << " out=" << o.out
            << " workers=" << o.workers << " val_count=" << val_count << " width=" << o.width
            << " height=" << o.height << " joint_def="
            << (o.joint_def.empty() ? "<built-in>" : o.joint_def) << "\n";
  DatasetManifest manifest = make_manifest(space, o.seed, o.count, val_count,
                                           default_camera(o.width, o.height), default_light());
  GenerationSummary summary = generate_dataset(space, manifest, o.out, o.workers);
  std::cerr << "gen: wrote " << summary.count << " records (" << summary.bytes_written
            << " bytes) in " << summary.wall_time_s << " s\n";
  return 0;
}

int run_train(const TrainOpts& o) {
  const TrainConfig& c = o.config;
  std::cerr << "train: dataset=" << o.dataset << " out=" << o.out << " steps=" << c.steps
            << " batch_size=" << c.batch_size << " lr=" << c.learning_rate
            << " hidden=" << c.hidden_size << " checkpoint_every=" << c.checkpoint_every
            << " seed=" << c.seed << " feature_width=" << c.feature_width
            << " feature_height=" << c.feature_height << "\n";
  std::vector<Checkpoint> checkpoints = train(o.dataset, c, o.out);
  for (const Checkpoint& cp : checkpoints)
    std::cerr << "train: step " << cp.step << " train_loss " << cp.train_loss << "\n";
  return 0;
}

int run_eval(const EvalOpts& o) {
  MseUnits units;
  if (o.units == "radians") units = MseUnits::radians_squared;
  else if (o.units == "normalized") units = MseUnits::normalized_squared;
  else throw UsageError("--units must be 'radians' or 'normalized'");
  ReportFormat format;
  if (o.format == "csv") format = ReportFormat::csv;
  else if (o.format == "json") format = ReportFormat::json;
  else throw UsageError("--format must be 'csv' or 'json'");

  std::cerr << "eval: checkpoints=" << o.checkpoints << " dataset=" << o.dataset
            << " units=" << o.units << " format=" << o.format << " out="
            << (o.out.empty() ? "<stdout>" : o.out) << "\n";
  EvalDataset val = load_val_split(o.dataset);
  EvalReport report = sweep_checkpoints(o.checkpoints, val, units);
  if (report.rows.empty()) throw ValidationError("eval: no readable checkpoints found");
  if (o.out.empty())
    emit_report(report, format, std::cout);
  else
    emit_report(report, format, std::filesystem::path(o.out));
  std::uint64_t best = best_checkpoint(report);
  for (const EvalRow& r : report.rows) {
    if (r.checkpoint_step == best)
      std::cerr << "eval: best checkpoint " << best << " (avg_mse " << r.avg_mse << ")\n";
  }
  return 0;
}

int run_verify(const VerifyOpts& o) {
  std::cerr << "verify: dataset=" << o.dataset << "\n";
  VerificationReport report = verify_dataset(o.dataset);
  std::size_t shown = 0;
  for (const VerificationFailure& f : report.failures) {
    if (shown++ == 50) {
      std::cerr << "verify: ... " << report.failures.size() - 50 << " more failures\n";
      break;
    }
    if (f.index == UINT64_MAX)
      std::cerr << "verify: dataset: " << f.cause << "\n";
    else
      std::cerr << "verify: record " << f.index << ": " << f.cause << "\n";
  }
  std::cerr << "verify: checked " << report.records_checked << " records, "
            << report.failures.size() << " failures\n";
  return report.ok() ? 0 : 4;
}

int run_parse(const ParseOpts& o) {
  JointSpace space = resolve_space(o.joint_def);
  std::ifstream in(o.file, std::ios::binary);
  if (!in) throw IoError("cannot open label file: " + o.file);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading label file: " + o.file);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ' ||
                           text.back() == '\t'))
    text.pop_back();

  std::cerr << "parse: file=" << o.file << " mode=" << o.mode << " joint_def="
            << (o.joint_def.empty() ? "<built-in>" : o.joint_def) << "\n";
  ParseReport report;
  if (o.mode == "strict") report = parse_angles_strict(space, text);
  else if (o.mode == "lenient") report = parse_angles_lenient(space, text);
  else throw UsageError("--mode must be 'strict' or 'lenient'");

  nlohmann::json j;
  j["ok"] = report.ok();
  if (report.ok()) {
    nlohmann::json vec = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.vector->size(); ++i) vec.push_back((*report.vector)[i]);
    j["vector"] = vec;
  } else {
    j["vector"] = nullptr;
  }
  j["issues"] = nlohmann::json::array();
  for (const ParseIssue& issue : report.issues) {
    j["issues"].push_back({{"kind", to_string(issue.kind)},
                           {"joint", issue.joint},
                           {"position", issue.position},
                           {"fatal", issue.fatal}});
  }
  std::cout << j.dump(2) << "\n";
  return report.ok() ? 0 : 4;
}

int run_render_one(const RenderOneOpts& o) {
  JointSpace space = resolve_space(o.joint_def);
  std::cerr << "render-one: seed=" << o.seed << " index=" << o.index << " out=" << o.out
            << " width=" << o.width << " height=" << o.height << " joint_def="
            << (o.joint_def.empty() ? "<built-in>" : o.joint_def) << "\n";
  DatasetManifest manifest = make_manifest(space, o.seed, o.index + 1, 0,
                                           default_camera(o.width, o.height), default_light());
  auto [image, label] = make_record(space, manifest, o.index);
  write_record(o.out, o.index, image, label);
  RecordPaths paths = record_paths(o.out, o.index);
  std::cerr << "render-one: wrote " << paths.image.string() << " and " << paths.label.string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic articulated-hand dataset tools"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value config file (lowest precedence after flags and environment)")
      ->envname("HANDSYNTH_CONFIG");

  GenOpts gen_opts;
  TrainOpts train_opts;
  EvalOpts eval_opts;
  VerifyOpts verify_opts;
  ParseOpts parse_opts;
  RenderOneOpts render_opts;
  std::map<CLI::App*, BindingMap> bindings;

  CLI::App* gen = app.add_subcommand("gen", "generate a seeded dataset");
  add_opt(gen, bindings[gen], "seed", gen_opts.seed, "master seed");
  add_opt(gen, bindings[gen], "count", gen_opts.count, "number of records");
  add_opt(gen, bindings[gen], "out", gen_opts.out, "output dataset directory");
  add_opt(gen, bindings[gen], "workers", gen_opts.workers, "worker threads")
      ->check(CLI::Range(1, 256));
  add_opt(gen, bindings[gen], "val-count", gen_opts.val_count,
       "validation records (default min(500, count/5))");
  add_opt(gen, bindings[gen], "joint-def", gen_opts.joint_def, "joint definition file");
  add_opt(gen, bindings[gen], "width", gen_opts.width, "image width")->check(CLI::Range(1, 4096));
  add_opt(gen, bindings[gen], "height", gen_opts.height, "image height")->check(CLI::Range(1, 4096));

  CLI::App* train = app.add_subcommand("train", "train the MLP regressor");
  add_opt(train, bindings[train], "dataset", train_opts.dataset, "dataset directory");
  add_opt(train, bindings[train], "out", train_opts.out, "checkpoint output directory");
  add_opt(train, bindings[train], "steps", train_opts.config.steps, "SGD steps");
  add_opt(train, bindings[train], "batch-size", train_opts.config.batch_size, "minibatch size")
      ->check(CLI::Range(1, 1 << 20));
  add_opt(train, bindings[train], "lr", train_opts.config.learning_rate, "learning rate");
  add_opt(train, bindings[train], "hidden", train_opts.config.hidden_size, "hidden units")
      ->check(CLI::Range(1, 1 << 20));
  add_opt(train, bindings[train], "checkpoint-every", train_opts.config.checkpoint_every,
       "checkpoint interval in steps");
  add_opt(train, bindings[train], "seed", train_opts.config.seed, "training seed");
  add_opt(train, bindings[train], "feature-width", train_opts.config.feature_width,
       "feature grid width")->check(CLI::Range(1, 4096));
  add_opt(train, bindings[train], "feature-height", train_opts.config.feature_height,
       "feature grid height")->check(CLI::Range(1, 4096));

  CLI::App* eval = app.add_subcommand("eval", "evaluate checkpoints on the validation split");
  add_opt(eval, bindings[eval], "checkpoints", eval_opts.checkpoints, "checkpoint directory");
  add_opt(eval, bindings[eval], "dataset", eval_opts.dataset, "dataset directory");
  add_opt(eval, bindings[eval], "units", eval_opts.units, "radians | normalized")
      ->check(CLI::IsMember({"radians", "normalized"}));
  add_opt(eval, bindings[eval], "format", eval_opts.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  add_opt(eval, bindings[eval], "out", eval_opts.out, "report file (default stdout)");

  CLI::App* verify = app.add_subcommand("verify", "verify dataset integrity");
  add_opt(verify, bindings[verify], "dataset", verify_opts.dataset, "dataset directory");

  CLI::App* parse = app.add_subcommand("parse", "parse an angle-string label file");
  add_opt(parse, bindings[parse], "file", parse_opts.file, "label file");
  add_opt(parse, bindings[parse], "mode", parse_opts.mode, "strict | lenient")
      ->check(CLI::IsMember({"strict", "lenient"}));
  add_opt(parse, bindings[parse], "joint-def", parse_opts.joint_def, "joint definition file");

  CLI::App* render_one = app.add_subcommand("render-one", "regenerate one record from seeds");
  add_opt(render_one, bindings[render_one], "seed", render_opts.seed, "master seed");
  add_opt(render_one, bindings[render_one], "index", render_opts.index, "sample index");
  add_opt(render_one, bindings[render_one], "out", render_opts.out, "output directory");
  add_opt(render_one, bindings[render_one], "joint-def", render_opts.joint_def,
       "joint definition file");
  add_opt(render_one, bindings[render_one], "width", render_opts.width, "image width")
      ->check(CLI::Range(1, 4096));
  add_opt(render_one, bindings[render_one], "height", render_opts.height, "image height")
      ->check(CLI::Range(1, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    std::set<std::string> config_set;
    if (!config_path.empty()) {
      for (const auto& [key, value] : read_config_file(config_path)) {
        auto it = bindings[sub].find(key);
        if (it == bindings[sub].end()) {
          bool known = false;
          for (const auto& [other, map] : bindings)
            if (map.count(key) != 0) known = true;
          if (!known) std::cerr << "config: ignoring unknown key '" << key << "'\n";
          continue;
        }
        if (it->second.opt->count() > 0) continue;  // flag or environment wins
        it->second.set(value);
        config_set.insert(key);
      }
    }

    auto require = [&](const char* name) {
      auto& binding = bindings[sub].at(name);
      if (binding.opt->count() == 0 && config_set.count(name) == 0)
        throw UsageError(std::string("missing required option --") + name + " for " +
                         sub->get_name());
    };

    if (sub == gen) { require("count"); require("out"); return run_gen(gen_opts); }
    if (sub == train) { require("dataset"); require("out"); return run_train(train_opts); }
    if (sub == eval) { require("checkpoints"); require("dataset"); return run_eval(eval_opts); }
    if (sub == verify) { require("dataset"); return run_verify(verify_opts); }
    if (sub == parse) { require("file"); return run_parse(parse_opts); }
    if (sub == render_one) { require("out"); return run_render_one(render_opts); }
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
