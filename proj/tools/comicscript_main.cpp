#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "comicscript/errors.hpp"
#include "comicscript/pipeline.hpp"

namespace {

using comicscript::PipelineConfig;

// Shared flags; only values the user actually passed override the config
// file, so precedence is defaults < config file < command line.
struct CommonFlags {
  std::string config_file;
  std::string out_dir;
  std::string images_dir;
  std::string vectors;
  std::string script;
  std::string cassette;
  bool record = false;
  std::string model;
  std::string endpoint;
  double min_height_ratio = 0.0;
  double min_slope = 0.0;
  int min_cluster_size = 0;
  int min_samples = 0;
  int target_dim = 0;
  std::string reducer;
  std::string describe_pages;
  bool first_name_only = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "key = value config file");
  cmd->add_option("--out", flags.out_dir, "output directory (default: out)");
  cmd->add_option("--images", flags.images_dir, "directory of panel crops");
  cmd->add_option("--vectors", flags.vectors, "precomputed embedding vectors (JSON)");
  cmd->add_option("--script", flags.script, "input script file (overrides the artifact)");
  cmd->add_option("--cassette", flags.cassette, "cassette file; implies replay mode");
  cmd->add_flag("--record", flags.record, "record live responses into the cassette");
  cmd->add_option("--model", flags.model, "chat model id");
  cmd->add_option("--endpoint", flags.endpoint, "model endpoint base URL");
  cmd->add_option("--min-height-ratio", flags.min_height_ratio,
                  "sound height threshold as a fraction of page width");
  cmd->add_option("--min-slope", flags.min_slope, "sound baseline slope threshold");
  cmd->add_option("--min-cluster-size", flags.min_cluster_size, "HDBSCAN minimum cluster size");
  cmd->add_option("--min-samples", flags.min_samples, "HDBSCAN min_samples");
  cmd->add_option("--target-dim", flags.target_dim, "reduced dimensionality");
  cmd->add_option("--reducer", flags.reducer, "pca or external");
  cmd->add_option("--pages", flags.describe_pages, "comma-separated pages to describe");
  cmd->add_flag("--first-name-only", flags.first_name_only,
                "use first names as speaker tags in renamed scripts");
}

PipelineConfig build_config(const CLI::App* cmd, const CommonFlags& flags,
                            const std::string& annotations) {
  PipelineConfig config;
  if (!flags.config_file.empty()) comicscript::load_config_file(config, flags.config_file);

  auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
  auto set = [&](const std::string& key, const std::string& value) {
    comicscript::apply_setting(config, key, value);
  };

  if (!annotations.empty()) config.annotations_path = annotations;
  if (passed("--out")) set("out_dir", flags.out_dir);
  if (passed("--images")) set("images_dir", flags.images_dir);
  if (passed("--vectors")) set("vectors", flags.vectors);
  if (passed("--script")) set("script", flags.script);
  if (passed("--cassette")) set("cassette", flags.cassette);
  if (flags.record) set("cassette_mode", "record");
  if (passed("--model")) set("model", flags.model);
  if (passed("--endpoint")) set("endpoint", flags.endpoint);
  if (passed("--min-height-ratio"))
    set("min_height_ratio", std::to_string(flags.min_height_ratio));
  if (passed("--min-slope")) set("min_slope", std::to_string(flags.min_slope));
  if (passed("--min-cluster-size"))
    set("min_cluster_size", std::to_string(flags.min_cluster_size));
  if (passed("--min-samples")) set("min_samples", std::to_string(flags.min_samples));
  if (passed("--target-dim")) set("target_dim", std::to_string(flags.target_dim));
  if (passed("--reducer")) set("reducer", flags.reducer);
  if (passed("--pages")) set("describe_pages", flags.describe_pages);
  if (flags.first_name_only) set("use_first_name_only", "true");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comicscript: comic page annotations to illustrated scripts"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* cmd = nullptr;
    CommonFlags flags;
    std::string annotations;
  };

  auto make_sub = [&](const char* name, const char* help, bool needs_annotations) {
    Sub sub;
    sub.cmd = app.add_subcommand(name, help);
    add_common_flags(sub.cmd, sub.flags);
    auto* opt = sub.cmd->add_option("annotations", sub.annotations, "annotation JSON file");
    if (needs_annotations) opt->required();
    return sub;
  };

  Sub validate = make_sub("validate", "check an annotation file", true);
  Sub classify = make_sub("classify", "classify text into sound/dialogue/caption", true);
  Sub cluster = make_sub("cluster", "cluster character instances into speakers", true);
  Sub script = make_sub("script", "assemble the cluster-id script", true);
  Sub infer_names = make_sub("infer-names", "infer character names from the script", false);
  Sub describe = make_sub("describe", "label panels and add panel descriptions", true);
  Sub eval = make_sub("eval", "score artifacts against annotation ground truth", false);
  std::string eval_pred, eval_gt;
  eval.cmd->add_option("--pred", eval_pred, "directory of predicted artifacts (same as --out)");
  eval.cmd->add_option("--gt", eval_gt, "ground-truth annotation file (same as the positional)");
  Sub pipeline = make_sub("pipeline", "run all stages in order", true);
  std::string stop_after_name;
  pipeline.cmd->add_option("--stop-after", stop_after_name,
                           "last stage to run (validate, classify, cluster, script, "
                           "infer-names, describe)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate.cmd->parsed()) {
      auto config = build_config(validate.cmd, validate.flags, validate.annotations);
      comicscript::stage_validate(config, std::cout);
    } else if (classify.cmd->parsed()) {
      auto config = build_config(classify.cmd, classify.flags, classify.annotations);
      comicscript::stage_classify(config, std::cout);
    } else if (cluster.cmd->parsed()) {
      auto config = build_config(cluster.cmd, cluster.flags, cluster.annotations);
      comicscript::stage_cluster(config, std::cout);
    } else if (script.cmd->parsed()) {
      auto config = build_config(script.cmd, script.flags, script.annotations);
      comicscript::stage_script(config, std::cout);
    } else if (infer_names.cmd->parsed()) {
      auto config =
          build_config(infer_names.cmd, infer_names.flags, infer_names.annotations);
      comicscript::stage_infer_names(config, std::cout);
    } else if (describe.cmd->parsed()) {
      auto config = build_config(describe.cmd, describe.flags, describe.annotations);
      comicscript::stage_describe(config, std::cout);
    } else if (eval.cmd->parsed()) {
      auto config = build_config(eval.cmd, eval.flags, eval.annotations);
      if (!eval_pred.empty()) config.out_dir = eval_pred;
      if (!eval_gt.empty()) config.annotations_path = eval_gt;
      if (config.annotations_path.empty())
        throw comicscript::ValidationError("eval needs an annotation file (positional or --gt)");
      std::string text = comicscript::run_eval(config, std::cerr);
      std::cout << text;
    } else if (pipeline.cmd->parsed()) {
      auto config = build_config(pipeline.cmd, pipeline.flags, pipeline.annotations);
      std::optional<comicscript::Stage> stop_after;
      if (!stop_after_name.empty()) {
        stop_after = comicscript::stage_from_string(stop_after_name);
        if (!stop_after)
          throw comicscript::ValidationError("unknown stage \"" + stop_after_name + "\"");
      }
      comicscript::run_pipeline(config, std::cout, stop_after);
    }
  } catch (const comicscript::CassetteMissError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const comicscript::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const comicscript::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
