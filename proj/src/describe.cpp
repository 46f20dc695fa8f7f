#include "comicscript/describe.hpp"

#include <algorithm>
#include <set>

#include "comicscript/errors.hpp"
#include "comicscript/fsio.hpp"

namespace comicscript {

namespace {

std::string soften_triple_quotes(std::string text) {
  size_t pos = 0;
  while ((pos = text.find("\"\"\"", pos)) != std::string::npos) {
    text.replace(pos, 3, "'''");
    pos += 3;
  }
  return text;
}

}  // namespace

std::vector<ChatMessage> description_chain(ImageRef labeled_panel,
                                           const std::string& script_extract) {
  ChatMessage look;
  look.role = ChatRole::User;
  look.content =
      "Please describe this comic book panel using character's names written in white "
      "rectangles.";
  look.image = std::move(labeled_panel);

  ChatMessage rephrase = ChatMessage::user(
      "Please rephrase considering character's settings and interaction only, naming "
      "characters and citing all text from the following script extract: \"\"\"" +
      soften_triple_quotes(script_extract) + "\"\"\"");
  return {std::move(look), std::move(rephrase)};
}

std::string describe_panel(ChatClient& client, const std::string& vision_model,
                           ImageRef labeled_panel, const std::string& script_extract) {
  auto chain = description_chain(std::move(labeled_panel), script_extract);
  auto replies = client.run_chain(chain, vision_model);
  return replies.at(1).content;
}

std::string panel_image_name(int page_index, int panel_number) {
  return "page" + std::to_string(page_index) + "_panel" + std::to_string(panel_number) +
         ".png";
}

std::vector<std::uint8_t> overlay_panel(const std::vector<std::uint8_t>& png,
                                        const PageAnnotation& page, const Panel& panel,
                                        const ClusterAssignment& assignment,
                                        const NameMap& names) {
  std::vector<LabelSpec> labels;
  Image decoded;  // deferred until a label makes decoding necessary
  bool have_image = false;

  for (const auto& c : page.characters) {
    if (c.excluded || c.panel_id != panel.id) continue;
    if (!have_image) {
      decoded = decode_png(png);
      have_image = true;
    }
    SpeakerId speaker = assignment.speaker_for(c.id);
    std::string text = speaker.render();
    if (speaker.kind() == SpeakerId::Kind::Cluster) {
      auto it = names.entries.find(speaker.cluster_index());
      if (it != names.entries.end()) text = it->second.name;
    }
    double sx = panel.bbox.w > 0 ? decoded.width / panel.bbox.w : 1.0;
    double sy = panel.bbox.h > 0 ? decoded.height / panel.bbox.h : 1.0;
    Point center = c.body_bbox.center();
    labels.push_back({text, {(center.x - panel.bbox.x) * sx, (center.y - panel.bbox.y) * sy}});
  }

  if (labels.empty()) return png;  // nothing to draw: bytes pass through
  return encode_png(overlay_labels(decoded, labels));
}

Script describe_book(const BookAnnotation& book, const Script& named_script,
                     const ClusterAssignment& assignment, const NameMap& names,
                     const std::string& images_dir, const std::string& overlays_dir,
                     ChatClient& client, const DescribeOptions& options) {
  std::set<int> wanted(options.pages.begin(), options.pages.end());
  ensure_directory(overlays_dir);

  Script result = named_script;
  for (const auto& page : book.pages) {
    if (!wanted.empty() && !wanted.count(page.index)) continue;

    const ScriptPage* script_page = nullptr;
    for (const auto& sp : named_script.pages)
      if (sp.page_index == page.index) script_page = &sp;
    if (!script_page)
      throw ValidationError("script has no page " + std::to_string(page.index));

    auto ordered = panels_in_reading_order(page);
    if (script_page->panels.size() != ordered.size())
      throw ValidationError("script and annotation disagree on panel count for page " +
                            std::to_string(page.index));

    for (size_t k = 0; k < ordered.size(); ++k) {
      int number = static_cast<int>(k) + 1;
      std::string name = panel_image_name(page.index, number);
      auto png = read_binary_file(images_dir + "/" + name);
      auto labeled = overlay_panel(png, page, *ordered[k], assignment, names);
      write_binary_file(overlays_dir + "/" + name, labeled);

      std::string extract = serialize_panel_sections(script_page->panels[k]);
      ImageRef image{"image/png", labeled};
      std::string description;
      try {
        description = describe_panel(client, client.config().vision_model,
                                     std::move(image), extract);
      } catch (const ProviderError& e) {
        throw ProviderError("page " + std::to_string(page.index) + " panel " +
                            std::to_string(number) + ": " + e.what());
      }
      result = insert_description(std::move(result), page.index, number, description);
    }
  }
  return result;
}

}  // namespace comicscript
