#include "comicscript/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "comicscript/errors.hpp"
#include "comicscript/fsio.hpp"
#include "json.hpp"

namespace comicscript {

using nlohmann::json;

std::optional<Stage> stage_from_string(const std::string& name) {
  if (name == "validate") return Stage::Validate;
  if (name == "classify") return Stage::Classify;
  if (name == "cluster") return Stage::Cluster;
  if (name == "script") return Stage::Script;
  if (name == "infer-names") return Stage::InferNames;
  if (name == "describe") return Stage::Describe;
  return std::nullopt;
}

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::Validate:
      return "validate";
    case Stage::Classify:
      return "classify";
    case Stage::Cluster:
      return "cluster";
    case Stage::Script:
      return "script";
    case Stage::InferNames:
      return "infer-names";
    case Stage::Describe:
      return "describe";
  }
  return "?";
}

BookAnnotation load_annotations(const PipelineConfig& config) {
  if (config.annotations_path.empty())
    throw ValidationError("no annotation file configured");
  BookAnnotation book = parse_book(read_text_file(config.annotations_path));
  for (auto& page : book.pages) associate_text(page);
  return book;
}

LlmRuntime make_llm_runtime(const PipelineConfig& config, Transport transport) {
  LlmRuntime rt;
  if (config.cassette_mode != CassetteMode::Passthrough) {
    if (config.cassette_path.empty())
      throw ValidationError("cassette mode needs a cassette path");
    rt.cassette = std::make_unique<Cassette>(Cassette::open(config.cassette_path));
  }
  rt.client = std::make_unique<ChatClient>(config.llm, config.cassette_mode,
                                           rt.cassette.get(), std::move(transport));
  return rt;
}

namespace {

std::string out_path(const PipelineConfig& config, const char* name) {
  return config.out_dir + "/" + name;
}

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

Rect rect_from_json(const json& v) {
  return {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>(),
          v.at(3).get<double>()};
}

void require_artifact(const PipelineConfig& config, const char* name, const char* producer) {
  if (!file_exists(out_path(config, name)))
    throw ValidationError(std::string(name) + " not found in " + config.out_dir +
                          "; run the " + producer + " stage first");
}

}  // namespace

void write_units_file(const std::string& path, const std::vector<TextUnit>& units) {
  json arr = json::array();
  for (const auto& u : units)
    arr.push_back(json{{"id", u.id},
                       {"block_id", u.block_id},
                       {"text", u.text},
                       {"bbox", rect_json(u.bbox)},
                       {"role", to_string(u.role)}});
  write_text_file(path, arr.dump(1) + "\n");
}

std::vector<TextUnit> read_units_file(const std::string& path) {
  json arr = json::parse(read_text_file(path));
  std::vector<TextUnit> units;
  for (const auto& j : arr) {
    TextUnit u;
    u.id = j.at("id").get<std::string>();
    u.block_id = j.at("block_id").get<std::string>();
    u.text = j.at("text").get<std::string>();
    u.bbox = rect_from_json(j.at("bbox"));
    u.role = role_from_string(j.at("role").get<std::string>());
    units.push_back(std::move(u));
  }
  return units;
}

void write_assignment_file(const std::string& path, const ClusterAssignment& assignment) {
  json j;
  j["labels"] = json::object();
  for (const auto& [id, label] : assignment.labels) j["labels"][id] = label;
  j["speakers"] = json::object();
  for (const auto& [label, speaker] : assignment.speakers)
    j["speakers"][std::to_string(label)] = speaker.render();
  write_text_file(path, j.dump(1) + "\n");
}

ClusterAssignment read_assignment_file(const std::string& path) {
  json j = json::parse(read_text_file(path));
  ClusterAssignment out;
  for (const auto& [id, label] : j.at("labels").items())
    out.labels[id] = label.get<int>();
  for (const auto& [label, speaker] : j.at("speakers").items())
    out.speakers[std::stoi(label)] = SpeakerId::parse(speaker.get<std::string>());
  return out;
}

void stage_validate(const PipelineConfig& config, std::ostream& log) {
  BookAnnotation book = load_annotations(config);
  size_t panels = 0, blocks = 0, balloons = 0, characters = 0;
  for (const auto& page : book.pages) {
    panels += page.panels.size();
    blocks += page.text_blocks.size();
    balloons += page.balloons.size();
    characters += page.characters.size();
  }
  log << "validate: book \"" << book.book_id << "\" ok: " << book.pages.size()
      << " pages, " << panels << " panels, " << blocks << " text blocks, " << balloons
      << " balloons, " << characters << " character instances\n";
}

void stage_classify(const PipelineConfig& config, std::ostream& log) {
  BookAnnotation book = load_annotations(config);
  ensure_directory(config.out_dir);
  auto units = classify_book(book, config.thresholds);
  write_units_file(out_path(config, artifacts::kRoles), units);
  size_t sounds = 0, dialogues = 0, captions = 0;
  for (const auto& u : units) {
    if (u.role == TextRole::Sound) ++sounds;
    if (u.role == TextRole::Dialogue) ++dialogues;
    if (u.role == TextRole::Caption) ++captions;
  }
  log << "classify: " << units.size() << " text units (" << sounds << " sound, "
      << dialogues << " dialogue, " << captions << " caption)\n";
}

namespace {

// Crops every clusterable instance out of its panel image and encodes it
// back to PNG for embedding.
std::vector<std::vector<std::uint8_t>> crop_instances(
    const BookAnnotation& book, const std::string& images_dir,
    const std::vector<const CharacterInstance*>& instances) {
  if (images_dir.empty())
    throw ValidationError("images directory is required to fetch embeddings");

  std::vector<std::vector<std::uint8_t>> crops;
  crops.reserve(instances.size());
  for (const CharacterInstance* inst : instances) {
    const PageAnnotation* page = nullptr;
    const Panel* panel = nullptr;
    for (const auto& p : book.pages) {
      if (const CharacterInstance* found = p.find_character(inst->id);
          found == inst) {
        page = &p;
        panel = p.find_panel(inst->panel_id);
        break;
      }
    }
    if (!page || !panel)
      throw ValidationError("instance " + inst->id + " has no resolvable panel");

    auto ordered = panels_in_reading_order(*page);
    int number = 0;
    for (size_t k = 0; k < ordered.size(); ++k)
      if (ordered[k] == panel) number = static_cast<int>(k) + 1;
    Image img = decode_png(
        read_binary_file(images_dir + "/" + panel_image_name(page->index, number)));

    double sx = panel->bbox.w > 0 ? img.width / panel->bbox.w : 1.0;
    double sy = panel->bbox.h > 0 ? img.height / panel->bbox.h : 1.0;
    int x0 = std::clamp(static_cast<int>(std::lround((inst->body_bbox.x - panel->bbox.x) * sx)),
                        0, img.width - 1);
    int y0 = std::clamp(static_cast<int>(std::lround((inst->body_bbox.y - panel->bbox.y) * sy)),
                        0, img.height - 1);
    int x1 = std::clamp(
        static_cast<int>(std::lround((inst->body_bbox.right() - panel->bbox.x) * sx)), x0 + 1,
        img.width);
    int y1 = std::clamp(
        static_cast<int>(std::lround((inst->body_bbox.bottom() - panel->bbox.y) * sy)),
        y0 + 1, img.height);

    Image crop;
    crop.width = x1 - x0;
    crop.height = y1 - y0;
    crop.pixels.resize(size_t(crop.width) * crop.height * 3);
    for (int y = y0; y < y1; ++y)
      std::copy(img.px(x0, y), img.px(x0, y) + size_t(crop.width) * 3,
                crop.px(0, y - y0));
    crops.push_back(encode_png(crop));
  }
  return crops;
}

}  // namespace

void stage_cluster(const PipelineConfig& config, std::ostream& log, Transport transport) {
  BookAnnotation book = load_annotations(config);
  ensure_directory(config.out_dir);

  std::vector<EmbeddingVector> vectors;
  if (!config.vectors_path.empty()) {
    vectors = load_vectors_file(config.vectors_path, book);
  } else {
    auto instances = clusterable_instances(book);
    auto crops = crop_instances(book, config.images_dir, instances);
    LlmRuntime rt = make_llm_runtime(config, std::move(transport));
    auto embedded = rt.client->embed_images(crops);
    for (size_t i = 0; i < instances.size(); ++i) {
      EmbeddingVector v;
      v.instance_id = instances[i]->id;
      v.values = Eigen::Map<const Eigen::VectorXf>(embedded[i].data(),
                                                   static_cast<Eigen::Index>(
                                                       embedded[i].size()));
      vectors.push_back(std::move(v));
    }
    write_vectors_file(out_path(config, artifacts::kEmbeddings), vectors);
  }

  ClusterResult result = cluster_instances(vectors, book, config.cluster);
  write_assignment_file(out_path(config, artifacts::kAssignment), result.assignment);

  std::set<int> clusters;
  size_t noise = 0;
  for (int label : result.raw_labels) {
    if (label == kNoise)
      ++noise;
    else
      clusters.insert(label);
  }
  log << "cluster: " << result.raw_labels.size() << " instances -> " << clusters.size()
      << " clusters, " << noise << " unassigned\n";
}

void stage_script(const PipelineConfig& config, std::ostream& log) {
  BookAnnotation book = load_annotations(config);
  require_artifact(config, artifacts::kRoles, "classify");
  require_artifact(config, artifacts::kAssignment, "cluster");
  auto units = read_units_file(out_path(config, artifacts::kRoles));
  auto assignment = read_assignment_file(out_path(config, artifacts::kAssignment));

  std::map<std::string, SpeakerId> speaker_by_character;
  for (const auto& [instance_id, label] : assignment.labels) {
    auto it = assignment.speakers.find(label);
    speaker_by_character[instance_id] =
        it != assignment.speakers.end() ? it->second : SpeakerId::unknown();
  }

  Script script = build_script(book, units, speaker_by_character);
  write_text_file(out_path(config, artifacts::kScript1), serialize_markdown(script));
  size_t dialogues = 0;
  for (const auto& page : script.pages)
    for (const auto& panel : page.panels) dialogues += panel.dialogues.size();
  log << "script: wrote " << artifacts::kScript1 << " (" << script.pages.size()
      << " pages, " << dialogues << " dialogue lines)\n";
}

void stage_infer_names(const PipelineConfig& config, std::ostream& log,
                       Transport transport) {
  std::string in_path = config.script_path;
  if (in_path.empty()) {
    require_artifact(config, artifacts::kScript1, "script");
    in_path = out_path(config, artifacts::kScript1);
  }
  Script script = parse_markdown(read_text_file(in_path));

  LlmRuntime rt = make_llm_runtime(config, std::move(transport));
  NameMap names = infer_names(script, *rt.client, config.llm.model);
  if (names.entries.empty())
    log << "infer-names: warning: no names parsed; keeping cluster ids\n";
  ensure_directory(config.out_dir);
  write_text_file(out_path(config, artifacts::kNames), to_json(names).dump(1) + "\n");

  Script renamed =
      rename_speakers(std::move(script), names.simple(config.use_first_name_only));
  write_text_file(out_path(config, artifacts::kScript2), serialize_markdown(renamed));
  log << "infer-names: " << names.entries.size() << " identifiers bound, "
      << names.conflicts.size() << " conflicts\n";
}

void stage_describe(const PipelineConfig& config, std::ostream& log, Transport transport) {
  BookAnnotation book = load_annotations(config);
  std::string in_path = config.script_path;
  if (in_path.empty()) {
    require_artifact(config, artifacts::kScript2, "infer-names");
    in_path = out_path(config, artifacts::kScript2);
  }
  require_artifact(config, artifacts::kAssignment, "cluster");
  require_artifact(config, artifacts::kNames, "infer-names");
  Script script = parse_markdown(read_text_file(in_path));
  auto assignment = read_assignment_file(out_path(config, artifacts::kAssignment));
  NameMap names =
      name_map_from_json(json::parse(read_text_file(out_path(config, artifacts::kNames))));

  if (config.images_dir.empty())
    throw ValidationError("images directory is required for panel descriptions");

  LlmRuntime rt = make_llm_runtime(config, std::move(transport));
  DescribeOptions options;
  options.pages = config.describe_pages;
  Script described =
      describe_book(book, script, assignment, names, config.images_dir,
                    out_path(config, artifacts::kOverlays), *rt.client, options);
  write_text_file(out_path(config, artifacts::kScript3), serialize_markdown(described));

  size_t described_panels = 0;
  for (const auto& page : described.pages)
    for (const auto& panel : page.panels)
      if (panel.description) ++described_panels;
  log << "describe: " << described_panels << " panels described, overlays in "
      << out_path(config, artifacts::kOverlays) << "\n";
}

void run_pipeline(const PipelineConfig& config, std::ostream& log,
                  std::optional<Stage> stop_after, Transport transport) {
  PipelineConfig staged = config;
  staged.script_path.clear();  // stages chain through their own artifacts
  stage_validate(staged, log);
  if (stop_after == Stage::Validate) return;
  stage_classify(staged, log);
  if (stop_after == Stage::Classify) return;
  stage_cluster(staged, log, transport);
  if (stop_after == Stage::Cluster) return;
  stage_script(staged, log);
  if (stop_after == Stage::Script) return;
  stage_infer_names(staged, log, transport);
  if (stop_after == Stage::InferNames) return;
  stage_describe(staged, log, transport);
}

std::string run_eval(const PipelineConfig& config, std::ostream& log, Transport transport) {
  BookAnnotation book = load_annotations(config);
  json report = json::object();
  std::string text;

  // Text role confusion against role_gt keys, joined on unit id.
  if (file_exists(out_path(config, artifacts::kRoles))) {
    auto units = read_units_file(out_path(config, artifacts::kRoles));
    std::map<std::string, TextRole> reference;
    for (const auto& page : book.pages) {
      for (const auto& block : page.text_blocks) {
        if (block.role_gt) reference[block.id] = role_from_string(*block.role_gt);
        for (size_t i = 0; i < block.lines.size(); ++i)
          if (block.lines[i].role_gt)
            reference[block.id + "/L" + std::to_string(i + 1)] =
                role_from_string(*block.lines[i].role_gt);
      }
    }
    if (!reference.empty()) {
      TextTypeResult r = text_type_confusion(role_map(units), reference);
      report["text_types"] = to_json(r);
      text += render_text_report(r) + "\n";
    }
  } else {
    log << "eval: no " << artifacts::kRoles << ", skipping text types\n";
  }

  // Clustering confusion against reference identities.
  if (file_exists(out_path(config, artifacts::kAssignment))) {
    auto assignment = read_assignment_file(out_path(config, artifacts::kAssignment));
    std::map<std::string, std::string> reference;
    for (const auto& page : book.pages)
      for (const auto& c : page.characters)
        if (c.reference_identity && !c.excluded) reference[c.id] = *c.reference_identity;
    if (!reference.empty()) {
      ClusterConfusionResult r = cluster_confusion(assignment, reference);
      report["clusters"] = to_json(r);
      text += render_cluster_report(r) + "\n";
    }
  } else {
    log << "eval: no " << artifacts::kAssignment << ", skipping clusters\n";
  }

  // Balloon association accuracy: geometric prediction vs annotation.
  {
    std::map<std::string, std::string> predicted;
    for (const auto& page : book.pages) {
      auto page_pred = predict_associations(page);
      predicted.insert(page_pred.begin(), page_pred.end());
    }
    auto reference = reference_associations(book);
    if (!reference.empty()) {
      double acc = association_accuracy(predicted, reference);
      report["association_accuracy"] = acc;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", acc);
      text += "Association accuracy: " + std::string(buf) + " (" +
              std::to_string(reference.size()) + " balloons)\n\n";
    }
  }

  // Description similarity: embeddings of predicted vs reference text.
  if (file_exists(out_path(config, artifacts::kScript3))) {
    Script script = parse_markdown(read_text_file(out_path(config, artifacts::kScript3)));
    std::vector<std::string> keys;
    std::vector<std::string> to_embed;
    for (const auto& page : book.pages) {
      auto ordered = panels_in_reading_order(page);
      const ScriptPage* sp = nullptr;
      for (const auto& p : script.pages)
        if (p.page_index == page.index) sp = &p;
      if (!sp) continue;
      for (size_t k = 0; k < ordered.size() && k < sp->panels.size(); ++k) {
        if (!ordered[k]->description_gt || !sp->panels[k].description) continue;
        keys.push_back("page" + std::to_string(page.index) + "_panel" +
                       std::to_string(k + 1));
        to_embed.push_back(*sp->panels[k].description);
        to_embed.push_back(*ordered[k]->description_gt);
      }
    }
    if (!keys.empty()) {
      LlmRuntime rt = make_llm_runtime(config, std::move(transport));
      auto embedded = rt.client->embed_texts(to_embed);
      std::vector<std::pair<std::string, std::pair<Eigen::VectorXf, Eigen::VectorXf>>> pairs;
      for (size_t i = 0; i < keys.size(); ++i) {
        auto vec = [&](size_t at) {
          return Eigen::Map<const Eigen::VectorXf>(
              embedded[at].data(), static_cast<Eigen::Index>(embedded[at].size()));
        };
        pairs.push_back({keys[i], {vec(2 * i), vec(2 * i + 1)}});
      }
      SimilarityReport r = similarity_report(pairs);
      report["similarity"] = to_json(r);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", r.mean);
      text += "Description similarity (cosine): mean " + std::string(buf) + " over " +
              std::to_string(r.entries.size()) + " panels\n";
      for (const auto& e : r.entries) {
        std::snprintf(buf, sizeof(buf), "%.4f", e.similarity);
        text += "  " + e.key + ": " + std::string(buf) + "\n";
      }
    }
  } else {
    log << "eval: no " << artifacts::kScript3 << ", skipping description similarity\n";
  }

  ensure_directory(config.out_dir);
  write_text_file(out_path(config, artifacts::kEvalJson), report.dump(1) + "\n");
  write_text_file(out_path(config, artifacts::kEvalText), text);
  log << "eval: wrote " << artifacts::kEvalJson << " and " << artifacts::kEvalText << "\n";
  return text;
}

}  // namespace comicscript
