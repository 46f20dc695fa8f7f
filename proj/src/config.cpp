#include "comicscript/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "comicscript/errors.hpp"

namespace comicscript {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config key \"" + key + "\": \"" + value + "\" is not a number");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config key \"" + key + "\": \"" + value + "\" is not an integer");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config key \"" + key + "\": \"" + value + "\" is not a boolean");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::string cur;
  std::istringstream in(value);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(parse_int(key, cur));
  }
  return out;
}

}  // namespace

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  if (key == "annotations") {
    config.annotations_path = value;
  } else if (key == "images_dir") {
    config.images_dir = value;
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "vectors") {
    config.vectors_path = value;
  } else if (key == "script") {
    config.script_path = value;
  } else if (key == "min_height_ratio") {
    config.thresholds.min_height_ratio = parse_double(key, value);
  } else if (key == "min_slope") {
    config.thresholds.min_slope = parse_double(key, value);
  } else if (key == "min_cluster_size") {
    config.cluster.min_cluster_size = parse_int(key, value);
  } else if (key == "min_samples") {
    config.cluster.min_samples = parse_int(key, value);
  } else if (key == "target_dim") {
    config.cluster.target_dim = parse_int(key, value);
  } else if (key == "reducer") {
    if (value == "pca") {
      config.cluster.reducer = Reducer::PCA;
    } else if (value == "external") {
      config.cluster.reducer = Reducer::External;
    } else {
      throw ValidationError("config key \"reducer\": expected pca or external");
    }
  } else if (key == "normalize_embeddings") {
    config.cluster.normalize_embeddings = parse_bool(key, value);
  } else if (key == "endpoint") {
    config.llm.endpoint = value;
  } else if (key == "model") {
    config.llm.model = value;
  } else if (key == "vision_model") {
    config.llm.vision_model = value;
  } else if (key == "embed_model") {
    config.llm.embed_model = value;
  } else if (key == "api_key_env") {
    config.llm.api_key_env = value;
  } else if (key == "system_prompt") {
    config.llm.system_prompt = value;
  } else if (key == "max_retries") {
    config.llm.max_retries = parse_int(key, value);
  } else if (key == "retry_backoff_ms") {
    config.llm.retry_backoff_ms = parse_int(key, value);
  } else if (key == "max_in_flight") {
    config.llm.max_in_flight = parse_int(key, value);
  } else if (key == "cassette") {
    config.cassette_path = value;
    if (config.cassette_mode == CassetteMode::Passthrough)
      config.cassette_mode = CassetteMode::Replay;
  } else if (key == "cassette_mode") {
    if (value == "record") {
      config.cassette_mode = CassetteMode::Record;
    } else if (value == "replay") {
      config.cassette_mode = CassetteMode::Replay;
    } else if (value == "passthrough") {
      config.cassette_mode = CassetteMode::Passthrough;
    } else {
      throw ValidationError("config key \"cassette_mode\": expected record, replay, or "
                            "passthrough");
    }
  } else if (key == "describe_pages") {
    config.describe_pages = parse_int_list(key, value);
  } else if (key == "use_first_name_only") {
    config.use_first_name_only = parse_bool(key, value);
  } else {
    throw ValidationError("unknown config key \"" + key + "\"");
  }
}

void load_config_file(PipelineConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config file " + path + ": expected key = value", lineno);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("config file " + path + ": empty key", lineno);
    apply_setting(config, key, value);
  }
}

}  // namespace comicscript
