// Builds the bundled two-page fixture book and records its request
// cassette, so the whole chain (clustering, naming, description, eval)
// replays offline and byte-stably. Outputs land in tests/fixtures/book:
//   book.json       annotations
//   images/         one PNG crop per panel
//   vectors.json    character-instance embeddings
//   cassette.jsonl  recorded chat + embedding exchanges
// Rerunning regenerates everything from scratch. The stub transport below
// is a pure function of the request, so recording is reproducible.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "comicscript/annotations.hpp"
#include "comicscript/clustering.hpp"
#include "comicscript/fsio.hpp"
#include "comicscript/image.hpp"
#include "comicscript/pipeline.hpp"
#include "json.hpp"

using namespace comicscript;
using nlohmann::json;

namespace {

struct PanelSpec {
  std::vector<std::string> cast;  // identities, left to right
  std::string caption;            // empty = none
  std::string sound;              // empty = none
  std::vector<std::pair<std::string, std::string>> speech;
  std::string description;
};

// A weekend-trip two-pager. Four recurring characters plus two walk-ons
// that stay unclustered.
std::vector<std::vector<PanelSpec>> story() {
  std::vector<PanelSpec> page1 = {
      {{"curt", "bill"},
       "A quiet street on the edge of town.",
       "",
       {{"curt", "SOME PARTY, EH, BILL?"}, {"bill", "THE LIVELIEST IN TOWN."}},
       "Curt and Bill chat on the sidewalk outside a brightly lit house."},
      {{"cynthia"},
       "",
       "",
       {{"cynthia", "DID SOMEONE MENTION A PARTY?"}},
       "Cynthia leans through a doorway with a grin."},
      {{"bill", "curt"},
       "",
       "CRASH!",
       {{"bill", "WHAT WAS THAT?"}},
       "A loud crash startles Bill and Curt in the hallway."},
      {{"gloria", "curt"},
       "",
       "",
       {{"gloria", "SORRY! THE PUNCH BOWL SLIPPED."}, {"curt", "IT ALWAYS DOES, GLORIA."}},
       "Gloria stands over a spilled punch bowl while Curt shakes his head."},
      {{"cynthia", "bill"},
       "Later, on the porch.",
       "",
       {{"cynthia", "YOU TWO NEVER CHANGE."}},
       "Cynthia and Bill sit on the porch steps at dusk."},
      {{"bill", "cynthia"},
       "",
       "",
       {{"bill", "WOULD YOU WANT US TO?"}, {"cynthia", "NOT REALLY."}},
       "Bill smiles at Cynthia under the porch light."},
      {{"curt", "extra1"},
       "The telephone again.",
       "RING!",
       {{"curt", "I'LL GET IT."}},
       "Curt crosses the living room toward a ringing telephone."},
  };
  std::vector<PanelSpec> page2 = {
      {{"cynthia", "gloria"},
       "Sunday morning.",
       "",
       {{"cynthia", "PACK YOUR BAGS, WE LEAVE AT NOON."}},
       "Cynthia waves a folded map while Gloria clutches a suitcase."},
      {{"curt", "cynthia"},
       "",
       "",
       {{"curt", "WHERE TO THIS TIME?"}, {"cynthia", "THE COAST."}},
       "Curt raises an eyebrow at Cynthia across the kitchen table."},
      {{"bill"},
       "",
       "HONK! HONK!",
       {{"bill", "THAT WOULD BE OUR RIDE."}},
       "Bill looks out the window as a horn sounds in the street."},
      {{"gloria"},
       "",
       "",
       {{"gloria", "WAIT FOR ME!"}},
       "Gloria runs down the front steps with her hat in hand."},
      {{"bill", "curt"},
       "The road south.",
       "",
       {{"bill", "MAP SAYS TWO HOURS."}, {"curt", "THE MAP LIES."}},
       "Bill and Curt argue over a road map in the back seat."},
      {{"cynthia", "extra2"},
       "",
       "",
       {{"cynthia", "STOP BICKERING, BOTH OF YOU."}},
       "Cynthia turns around from the front seat, unimpressed."},
      {{"gloria"},
       "And off they went.",
       "VROOM!",
       {{"gloria", "NEXT STOP, THE COAST!"}},
       "The loaded car roars off down the coast road."},
  };
  return {page1, page2};
}

bool is_extra(const std::string& identity) { return identity.rfind("extra", 0) == 0; }

// Page geometry: 900x1200, three two-panel rows plus one wide bottom row.
Rect panel_rect(size_t k) {
  if (k == 6) return {30, 900, 840, 260};
  double x = (k % 2 == 0) ? 30 : 470;
  double y = 30 + 290 * static_cast<double>(k / 2);
  return {x, y, 400, 260};
}

Rect body_rect(const Rect& panel, size_t slot, size_t cast_size) {
  double step = cast_size > 1 ? (panel.w - 150) / static_cast<double>(cast_size - 1) : 0;
  double x = panel.x + 40 + step * static_cast<double>(slot);
  return {x, panel.y + 130, 70, 110};
}

BookAnnotation build_book() {
  BookAnnotation book;
  book.book_id = "escape-with-me-mini";
  auto pages = story();
  for (size_t pi = 0; pi < pages.size(); ++pi) {
    PageAnnotation page;
    page.index = static_cast<int>(pi) + 1;
    page.width = 900;
    page.height = 1200;
    for (size_t k = 0; k < pages[pi].size(); ++k) {
      const PanelSpec& spec = pages[pi][k];
      std::string tag = "p" + std::to_string(page.index) + "_" + std::to_string(k + 1);
      Rect pr = panel_rect(k);

      Panel panel;
      panel.id = tag;
      panel.bbox = pr;
      panel.reading_order = static_cast<int>(k);
      panel.description_gt = spec.description;
      page.panels.push_back(panel);

      std::map<std::string, std::string> cast_instance;  // identity -> instance id
      for (size_t slot = 0; slot < spec.cast.size(); ++slot) {
        CharacterInstance inst;
        inst.id = "ch_" + tag + "_" + std::to_string(slot + 1);
        inst.panel_id = tag;
        inst.body_bbox = body_rect(pr, slot, spec.cast.size());
        if (!is_extra(spec.cast[slot])) inst.reference_identity = spec.cast[slot];
        cast_instance[spec.cast[slot]] = inst.id;
        page.characters.push_back(inst);
      }

      int block_no = 0;
      if (!spec.caption.empty()) {
        TextBlock cap;
        cap.id = "t_" + tag + "_" + std::to_string(++block_no);
        cap.bbox = {pr.x + 12, pr.y + 8, 240, 18};
        cap.transcription = spec.caption;
        cap.lines.push_back({spec.caption, {pr.x + 12, pr.y + 9, 236, 16}, 0.0, {}});
        cap.role_gt = "Caption";
        page.text_blocks.push_back(cap);
      }
      for (size_t d = 0; d < spec.speech.size(); ++d) {
        const auto& [who, text] = spec.speech[d];
        std::string bid = "b_" + tag + "_" + std::to_string(d + 1);
        Rect tb = {pr.x + 60 + 18 * static_cast<double>(d),
                   pr.y + 36 + 46 * static_cast<double>(d), 210, 18};

        TextBlock block;
        block.id = "t_" + tag + "_" + std::to_string(++block_no);
        block.bbox = tb;
        block.transcription = text;
        block.lines.push_back({text, tb, 0.0, {}});
        block.balloon_id = bid;
        block.role_gt = "Dialogue";
        page.text_blocks.push_back(block);

        Balloon balloon;
        balloon.id = bid;
        balloon.contour = {{tb.x - 8, tb.y - 8},
                           {tb.x + tb.w + 8, tb.y - 8},
                           {tb.x + tb.w + 8, tb.y + tb.h + 8},
                           {tb.x - 8, tb.y + tb.h + 8}};
        Rect body = page.find_character(cast_instance.at(who))->body_bbox;
        balloon.tail_tip = Point{body.x + 35, body.y + 8};
        page.balloons.push_back(balloon);
        page.associations.push_back({bid, cast_instance.at(who)});
      }
      if (!spec.sound.empty()) {
        TextBlock sfx;
        sfx.id = "t_" + tag + "_" + std::to_string(++block_no);
        sfx.bbox = {pr.x + 150, pr.y + 88, 150, 40};
        sfx.transcription = spec.sound;
        sfx.lines.push_back({spec.sound, {pr.x + 150, pr.y + 88, 150, 40}, 0.12,
                             std::optional<std::string>("Sound")});
        page.text_blocks.push_back(sfx);
      }
    }
    book.pages.push_back(std::move(page));
  }
  return book;
}

void fill_rect(Image& img, int x, int y, int w, int h, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  for (int yy = y; yy < y + h; ++yy)
    for (int xx = x; xx < x + w; ++xx) {
      if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) continue;
      std::uint8_t* p = img.px(xx, yy);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
}

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb identity_color(const std::string& identity) {
  if (identity == "curt") return {150, 90, 40};
  if (identity == "bill") return {120, 120, 130};
  if (identity == "cynthia") return {230, 200, 60};
  if (identity == "gloria") return {90, 160, 90};
  return {100, 110, 160};
}

// Paints flat stand-in art for each panel crop at 1:1 page scale:
// backdrop, one colored figure per cast slot, white balloons and caption
// strips with their text.
void write_panel_images(const std::string& images_dir) {
  ensure_directory(images_dir);
  auto pages = story();
  for (size_t pi = 0; pi < pages.size(); ++pi) {
    for (size_t k = 0; k < pages[pi].size(); ++k) {
      const PanelSpec& spec = pages[pi][k];
      Rect pr = panel_rect(k);
      int w = static_cast<int>(pr.w);
      int h = static_cast<int>(pr.h);
      size_t n = pi * 7 + k;
      Image img = Image::filled(w, h, static_cast<std::uint8_t>(160 + 12 * (n % 5)),
                                static_cast<std::uint8_t>(170 + 9 * (n % 7)),
                                static_cast<std::uint8_t>(150 + 7 * (n % 11)));
      fill_rect(img, 0, h - 30, w, 30, 110, 100, 90);  // floor line
      for (size_t slot = 0; slot < spec.cast.size(); ++slot) {
        Rect body = body_rect(pr, slot, spec.cast.size());
        Rgb c = identity_color(spec.cast[slot]);
        fill_rect(img, static_cast<int>(body.x - pr.x), static_cast<int>(body.y - pr.y),
                  static_cast<int>(body.w), static_cast<int>(body.h), c.r, c.g, c.b);
      }
      if (!spec.caption.empty()) {
        fill_rect(img, 10, 6, 246, 22, 250, 245, 220);
        draw_text(img, 14, 10, spec.caption, 12);
      }
      for (size_t d = 0; d < spec.speech.size(); ++d) {
        int bx = 52 + 18 * static_cast<int>(d);
        int by = 28 + 46 * static_cast<int>(d);
        fill_rect(img, bx, by, 226, 34, 255, 255, 255);
        draw_text(img, bx + 8, by + 11, spec.speech[d].second, 12);
      }
      if (!spec.sound.empty()) draw_text(img, 150, 92, spec.sound, 24);
      write_binary_file(images_dir + "/" +
                            panel_image_name(static_cast<int>(pi) + 1,
                                             static_cast<int>(k) + 1),
                        encode_png(img));
    }
  }
}

// Tight per-identity blobs on distinct axes, plus two far-off walk-ons
// that have no blob to join.
void write_vectors(const std::string& path, const BookAnnotation& book) {
  std::map<std::string, int> axis = {{"curt", 0}, {"bill", 1}, {"cynthia", 2}, {"gloria", 3}};
  std::vector<EmbeddingVector> vectors;
  int i = 0;
  for (const auto& page : book.pages) {
    for (const auto& inst : page.characters) {
      Eigen::VectorXf v = Eigen::VectorXf::Zero(6);
      if (inst.reference_identity) {
        v[axis.at(*inst.reference_identity)] = 1.0f;
        v[4] = 0.01f * static_cast<float>((i * 7) % 3);
        v[5] = 0.01f * static_cast<float>((i * 11) % 3);
      } else if (inst.id.find("p1_") != std::string::npos) {
        // Walk-ons point away from every identity axis. After
        // normalization they are ~1.73 from each blob while blobs merge
        // at ~1.41, so the pair sheds off the root and ends up as noise.
        v << -1.0f, -1.0f, -1.0f, -1.0f, 0.02f, 0.0f;
      } else {
        v << -1.0f, -1.0f, -1.0f, -1.0f, 0.0f, 0.02f;
      }
      vectors.push_back({inst.id, v});
      ++i;
    }
  }
  write_vectors_file(path, vectors);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Deterministic stand-in for the rephrase turn: reads the script extract
// back as prose.
std::string invent_description(const std::string& extract) {
  std::vector<std::string> speakers, quotes, captions, sounds;
  std::string section;
  std::istringstream in(extract);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("### ", 0) == 0) {
      section = line.substr(4);
      continue;
    }
    if (line.empty()) continue;
    if (section == "DIALOGUE") {
      size_t colon = line.find(": ");
      if (colon == std::string::npos) continue;
      std::string who = line.substr(0, colon);
      if (std::find(speakers.begin(), speakers.end(), who) == speakers.end())
        speakers.push_back(who);
      quotes.push_back(who + " says \"" + line.substr(colon + 2) + "\"");
    } else if (section == "CAPTION") {
      captions.push_back(line);
    } else if (section == "SOUND") {
      sounds.push_back(line);
    }
  }
  std::string out = "In this panel, ";
  out += speakers.empty() ? "nobody speaks" : join(speakers, " and ") + " talk";
  out += ". ";
  for (const auto& q : quotes) out += q + ". ";
  for (const auto& c : captions) out += "A caption reads \"" + c + "\". ";
  for (const auto& s : sounds) out += "A sound effect goes \"" + s + "\". ";
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

json chat_reply(const std::string& text) {
  return json{{"choices", json::array({json{{"message", json{{"content", text}}}}})}};
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Pure function of the request body, so recorded responses are stable.
json stub_transport(const WireRequest& request) {
  if (request.path == "/v1/embeddings") {
    std::string input = request.body.at("input").at(0).get<std::string>();
    json values = json::array();
    for (int k = 0; k < 8; ++k) {
      std::uint64_t h = fnv1a(input + static_cast<char>('a' + k));
      double v = static_cast<double>(h % 2001) / 1000.0 - 1.0;
      values.push_back(v);
    }
    return json{{"data", json::array({json{{"embedding", values}}})}};
  }

  const json& messages = request.body.at("messages");
  bool has_image = false;
  for (const auto& m : messages)
    if (m.at("content").is_array()) has_image = true;

  if (has_image) {
    if (messages.size() == 1)
      return chat_reply(
          "I see a comic panel with characters marked by white name rectangles.");
    return chat_reply(invent_description(messages.at(2).at("content").get<std::string>()));
  }

  switch (messages.size()) {
    case 1:
      return chat_reply(
          "This reads as a light weekend story: a lively house party, a dropped punch "
          "bowl, and a drive to the coast the next morning.");
    case 3:
      return chat_reply("The characters are Curt, Bill Patterson, Cynthia Allen, and Gloria.");
    case 5:
      return chat_reply(
          "1. Curt (c0) - Dry-witted and steady, he answers the telephone and needles "
          "the others.\n"
          "2. Bill Patterson (c1) - Easygoing company at the party and in the back "
          "seat.\n"
          "3. Cynthia Allen (c2) - The planner of the group, she calls the trip and "
          "keeps order.\n"
          "4. Gloria (c3) - Cheerful and clumsy, she drops the punch bowl and nearly "
          "misses the car.");
    default:
      return chat_reply(
          "Curt and Cynthia trade jabs like old friends, Bill keeps the peace, and "
          "Gloria tags along happily; the four read as one close-knit circle.");
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir =
      argc > 1 ? argv[1] : std::string(COMICSCRIPT_TESTS_DIR) + "/fixtures/book";
  try {
    ensure_directory(dir);
    BookAnnotation book = build_book();
    write_text_file(dir + "/book.json", write_book(book));
    write_panel_images(dir + "/images");
    write_vectors(dir + "/vectors.json", book);

    std::string cassette = dir + "/cassette.jsonl";
    std::filesystem::remove(cassette);

    // Keep this config in sync with the acceptance runner's fixture config.
    PipelineConfig config;
    config.annotations_path = dir + "/book.json";
    config.images_dir = dir + "/images";
    config.vectors_path = dir + "/vectors.json";
    config.out_dir = dir + "/_record_work";
    config.cassette_path = cassette;
    config.cassette_mode = CassetteMode::Record;
    config.cluster.min_cluster_size = 4;
    config.cluster.target_dim = 4;
    config.llm.retry_backoff_ms = 0;
    config.llm.max_in_flight = 1;  // sequential, so the cassette file order is stable

    run_pipeline(config, std::cout, {}, stub_transport);
    run_eval(config, std::cout, stub_transport);
    std::filesystem::remove_all(config.out_dir);
    std::cout << "fixture book written to " << dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fixturegen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
