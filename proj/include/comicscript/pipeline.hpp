#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "comicscript/config.hpp"
#include "comicscript/describe.hpp"
#include "comicscript/eval.hpp"
#include "comicscript/llm.hpp"
#include "comicscript/naming.hpp"
#include "comicscript/script.hpp"
#include "comicscript/textrole.hpp"

namespace comicscript {

// Staged artifact names inside the output directory.
namespace artifacts {
inline constexpr const char* kRoles = "roles.json";
inline constexpr const char* kAssignment = "assignment.json";
inline constexpr const char* kEmbeddings = "embeddings.json";
inline constexpr const char* kScript1 = "_script_1_.md";
inline constexpr const char* kScript2 = "_script_2_.md";
inline constexpr const char* kScript3 = "_script_3_.md";
inline constexpr const char* kNames = "names.json";
inline constexpr const char* kOverlays = "overlays";
inline constexpr const char* kEvalJson = "eval.json";
inline constexpr const char* kEvalText = "eval.txt";
}  // namespace artifacts

// Stages in pipeline order. Eval runs separately, on demand.
enum class Stage { Validate, Classify, Cluster, Script, InferNames, Describe };

std::optional<Stage> stage_from_string(const std::string& name);
const char* to_string(Stage stage);

// Parses and validates the configured annotation file, resolving balloon
// containment on every page. This is the entry point every stage uses.
BookAnnotation load_annotations(const PipelineConfig& config);

// Opens the configured cassette (if any) and builds a chat client around
// it. `transport` is a test seam; live runs leave it empty.
struct LlmRuntime {
  std::unique_ptr<Cassette> cassette;
  std::unique_ptr<ChatClient> client;
};
LlmRuntime make_llm_runtime(const PipelineConfig& config, Transport transport = {});

// Each stage reads its inputs (annotations and earlier artifacts), writes
// its artifact into out_dir, and logs one summary line to `log`.
void stage_validate(const PipelineConfig& config, std::ostream& log);
void stage_classify(const PipelineConfig& config, std::ostream& log);
void stage_cluster(const PipelineConfig& config, std::ostream& log, Transport transport = {});
void stage_script(const PipelineConfig& config, std::ostream& log);
void stage_infer_names(const PipelineConfig& config, std::ostream& log,
                       Transport transport = {});
void stage_describe(const PipelineConfig& config, std::ostream& log,
                    Transport transport = {});

void run_pipeline(const PipelineConfig& config, std::ostream& log,
                  std::optional<Stage> stop_after = {}, Transport transport = {});

// Builds the evaluation report from artifacts and ground-truth annotation
// keys; writes eval.json / eval.txt and returns the text form.
std::string run_eval(const PipelineConfig& config, std::ostream& log,
                     Transport transport = {});

// Artifact (de)serialization helpers, shared by stages and tests.
void write_units_file(const std::string& path, const std::vector<TextUnit>& units);
std::vector<TextUnit> read_units_file(const std::string& path);
void write_assignment_file(const std::string& path, const ClusterAssignment& assignment);
ClusterAssignment read_assignment_file(const std::string& path);

}  // namespace comicscript
