#pragma once

#include <string>
#include <vector>

#include "comicscript/clustering.hpp"
#include "comicscript/llm.hpp"
#include "comicscript/textrole.hpp"

namespace comicscript {

struct PipelineConfig {
  std::string annotations_path;
  std::string images_dir;
  std::string out_dir = "out";
  std::string vectors_path;  // precomputed embeddings; skips live fetching
  std::string script_path;   // overrides the stage's default input script
  RoleThresholds thresholds;
  ClusterParams cluster;
  LlmConfig llm;
  std::string cassette_path;
  CassetteMode cassette_mode = CassetteMode::Passthrough;
  std::vector<int> describe_pages;    // empty = all
  bool use_first_name_only = false;   // "Bill Patterson" -> "Bill" in scripts
};

// Applies one "key = value" setting; throws ValidationError for unknown
// keys or unreadable values. Keys mirror the CLI flag names.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

// Reads a config file of "key = value" lines ('#' starts a comment).
// Settings land on top of whatever `config` already holds.
void load_config_file(PipelineConfig& config, const std::string& path);

}  // namespace comicscript
