#include "comicscript/script.hpp"

#include <random>
#include <string>

#include "comicscript/errors.hpp"
#include "doctest.h"

using namespace comicscript;

TEST_CASE("speaker ids") {
  CHECK(SpeakerId::cluster(0).render() == "c0");
  CHECK(SpeakerId::cluster(12).render() == "c12");
  CHECK(SpeakerId::unknown().render() == "?");
  CHECK(SpeakerId::named("Gloria").render() == "Gloria");

  CHECK(SpeakerId::parse("c3") == SpeakerId::cluster(3));
  CHECK(SpeakerId::parse("?") == SpeakerId::unknown());
  CHECK(SpeakerId::parse("Bill Patterson") == SpeakerId::named("Bill Patterson"));
  // Only "c" + digits is a cluster id.
  CHECK(SpeakerId::parse("c").kind() == SpeakerId::Kind::Named);
  CHECK(SpeakerId::parse("c3x").kind() == SpeakerId::Kind::Named);
  CHECK(SpeakerId::parse("C3").kind() == SpeakerId::Kind::Named);

  CHECK(SpeakerId::cluster(1) < SpeakerId::cluster(2));
  CHECK_FALSE(SpeakerId::cluster(2) < SpeakerId::cluster(2));
}

TEST_CASE("markdown golden") {
  Script script;
  ScriptPage page;
  page.page_index = 1;
  ScriptPanel panel;
  panel.dialogues.push_back({SpeakerId::cluster(0), "..."});
  panel.dialogues.push_back({SpeakerId::cluster(1), "..."});
  page.panels.push_back(panel);
  script.pages.push_back(page);

  CHECK(serialize_markdown(script) ==
        "# PAGE 1 - 1 PANEL:\n"
        "## PANEL 1\n"
        "### SOUND\n"
        "### CAPTION\n"
        "### DIALOGUE\n"
        "c0: ...\n"
        "c1: ...\n");
}

TEST_CASE("full page golden with every section") {
  Script script;
  ScriptPage page;
  page.page_index = 7;
  ScriptPanel p1;
  p1.sounds = {"KRAK"};
  p1.captions = {"Later that night."};
  p1.dialogues.push_back({SpeakerId::named("Curt"), "We have to go."});
  p1.dialogues.push_back({SpeakerId::unknown(), "Now?"});
  p1.description = "Two figures by a window.\nRain outside.";
  ScriptPanel p2;  // entirely empty panel still prints its sections
  page.panels = {p1, p2};
  script.pages.push_back(page);

  std::string expected =
      "# PAGE 7 - 2 PANELS:\n"
      "## PANEL 1\n"
      "### SOUND\n"
      "KRAK\n"
      "### CAPTION\n"
      "Later that night.\n"
      "### DIALOGUE\n"
      "Curt: We have to go.\n"
      "?: Now?\n"
      "### DESCRIPTION\n"
      "Two figures by a window.\nRain outside.\n"
      "## PANEL 2\n"
      "### SOUND\n"
      "### CAPTION\n"
      "### DIALOGUE\n";
  CHECK(serialize_markdown(script) == expected);
  CHECK(parse_markdown(expected) == script);
  // Serializing the parse gives back the identical bytes.
  CHECK(serialize_markdown(parse_markdown(expected)) == expected);
}

TEST_CASE("panel sections serializer matches the markdown body") {
  ScriptPanel panel;
  panel.sounds = {"WHAM"};
  panel.dialogues.push_back({SpeakerId::cluster(2), "hello"});
  CHECK(serialize_panel_sections(panel) ==
        "### SOUND\nWHAM\n### CAPTION\n### DIALOGUE\nc2: hello\n");

  Script script;
  script.pages.push_back({3, {panel}});
  std::string md = serialize_markdown(script);
  CHECK(md.find(serialize_panel_sections(panel)) != std::string::npos);
}

TEST_CASE("empty script serializes to empty text and back") {
  CHECK(serialize_markdown(Script{}) == "");
  Script parsed = parse_markdown("");
  CHECK(parsed.pages.empty());
  CHECK(parsed.book_id == "");
}

TEST_CASE("a zero-panel page is legal") {
  Script script;
  script.pages.push_back({4, {}});
  std::string md = serialize_markdown(script);
  CHECK(md == "# PAGE 4 - 0 PANELS:\n");
  CHECK(parse_markdown(md) == script);
}

TEST_CASE("parse rejects structural damage") {
  const std::string good =
      "# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n### DIALOGUE\n";
  CHECK_NOTHROW(parse_markdown(good));

  SUBCASE("missing trailing newline") {
    try {
      parse_markdown("# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n### DIALOGUE");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("plural on a one-panel page") {
    CHECK_THROWS_AS(parse_markdown("# PAGE 2 - 1 PANELS:\n## PANEL 1\n### SOUND\n"
                                   "### CAPTION\n### DIALOGUE\n"),
                    ParseError);
  }
  SUBCASE("singular on a two-panel page") {
    CHECK_THROWS_AS(
        parse_markdown("# PAGE 2 - 2 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n"
                       "### DIALOGUE\n## PANEL 2\n### SOUND\n### CAPTION\n### DIALOGUE\n"),
        ParseError);
  }
  SUBCASE("page indices must increase") {
    std::string two_pages =
        "# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n### DIALOGUE\n"
        "# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n### DIALOGUE\n";
    try {
      parse_markdown(two_pages);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("page index zero") {
    CHECK_THROWS_AS(parse_markdown("# PAGE 0 - 1 PANEL:\n## PANEL 1\n### SOUND\n"
                                   "### CAPTION\n### DIALOGUE\n"),
                    ParseError);
  }
  SUBCASE("panel numbers must be sequential from one") {
    CHECK_THROWS_AS(parse_markdown("# PAGE 2 - 1 PANEL:\n## PANEL 2\n### SOUND\n"
                                   "### CAPTION\n### DIALOGUE\n"),
                    ParseError);
  }
  SUBCASE("sections in the wrong order") {
    CHECK_THROWS_AS(parse_markdown("# PAGE 2 - 1 PANEL:\n## PANEL 1\n### CAPTION\n"
                                   "### SOUND\n### DIALOGUE\n"),
                    ParseError);
  }
  SUBCASE("missing dialogue section") {
    CHECK_THROWS_AS(parse_markdown("# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n"
                                   "### CAPTION\n"),
                    ParseError);
  }
  SUBCASE("dialogue line without a speaker separator") {
    std::string bad =
        "# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n### DIALOGUE\n"
        "no separator here\n";
    try {
      parse_markdown(bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("colon without a following space") {
    CHECK_THROWS_AS(parse_markdown("# PAGE 2 - 1 PANEL:\n## PANEL 1\n### SOUND\n"
                                   "### CAPTION\n### DIALOGUE\nc0:nope\n"),
                    ParseError);
  }
  SUBCASE("stray text before the first page") {
    CHECK_THROWS_AS(parse_markdown("hello\n"), ParseError);
  }
}

TEST_CASE("dialogue text may itself contain colons") {
  std::string md =
      "# PAGE 1 - 1 PANEL:\n## PANEL 1\n### SOUND\n### CAPTION\n### DIALOGUE\n"
      "c0: Warning: stay back\n";
  Script script = parse_markdown(md);
  REQUIRE(script.pages[0].panels[0].dialogues.size() == 1);
  CHECK(script.pages[0].panels[0].dialogues[0].speaker == SpeakerId::cluster(0));
  CHECK(script.pages[0].panels[0].dialogues[0].text == "Warning: stay back");
  CHECK(serialize_markdown(script) == md);
}

namespace {

// Random scripts built only from round-trippable content: single-line text
// without a leading '#', speaker names free of ':' and not shaped like ids.
Script random_script(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto word = [&]() {
    static const char* words[] = {"look", "out", "RUN", "the", "storm", "is",
                                  "close", "now", "Maria", "said", "so"};
    std::string text = words[pick(0, 10)];
    int extra = pick(0, 2);
    for (int i = 0; i < extra; ++i) text += std::string(" ") + words[pick(0, 10)];
    return text;
  };

  Script script;
  int page_index = 0;
  int pages = pick(0, 4);
  for (int p = 0; p < pages; ++p) {
    page_index += pick(1, 3);
    ScriptPage page;
    page.page_index = page_index;
    int panels = pick(0, 3);
    for (int k = 0; k < panels; ++k) {
      ScriptPanel panel;
      int sounds = pick(0, 2);
      for (int i = 0; i < sounds; ++i) panel.sounds.push_back(word());
      int captions = pick(0, 2);
      for (int i = 0; i < captions; ++i) panel.captions.push_back(word());
      int dialogues = pick(0, 3);
      for (int i = 0; i < dialogues; ++i) {
        SpeakerId speaker;
        switch (pick(0, 2)) {
          case 0:
            speaker = SpeakerId::cluster(pick(0, 9));
            break;
          case 1:
            speaker = SpeakerId::unknown();
            break;
          default:
            speaker = SpeakerId::named(pick(0, 1) ? "Gloria" : "Bill Patterson");
        }
        panel.dialogues.push_back({speaker, word()});
      }
      if (pick(0, 3) == 0) {
        std::string desc = word();
        if (pick(0, 1)) desc += "\n" + word();
        panel.description = desc;
      }
      page.panels.push_back(std::move(panel));
    }
    script.pages.push_back(std::move(page));
  }
  return script;
}

}  // namespace

TEST_CASE("parse inverts serialize on generated scripts") {
  std::mt19937 rng(20240817);
  for (int trial = 0; trial < 300; ++trial) {
    Script script = random_script(rng);
    std::string md = serialize_markdown(script);
    Script back = parse_markdown(md);
    CHECK(back == script);
    CHECK(serialize_markdown(back) == md);
  }
}

TEST_CASE("book_id is carried but never serialized") {
  Script script;
  script.book_id = "escape_with_me";
  script.pages.push_back({1, {ScriptPanel{}}});
  std::string md = serialize_markdown(script);
  CHECK(md.find("escape") == std::string::npos);
  CHECK(parse_markdown(md).book_id == "");
}

namespace {

BookAnnotation tiny_book() {
  BookAnnotation book;
  book.book_id = "tiny";
  PageAnnotation page;
  page.index = 1;
  page.width = 1000;
  page.height = 800;
  page.panels.push_back({"p1", {0, 0, 500, 800}, 1, {}});
  page.panels.push_back({"p2", {500, 0, 500, 800}, 2, {}});
  page.balloons.push_back({"b1", {{40, 40}, {300, 40}, {300, 160}, {40, 160}}, Point{80, 220}});
  page.balloons.push_back(
      {"b2", {{540, 40}, {800, 40}, {800, 160}, {540, 160}}, Point{580, 220}});
  page.characters.push_back({"ch1", "p1", {60, 240, 80, 200}, false, {}});
  page.characters.push_back({"ch2", "p2", {560, 240, 80, 200}, false, {}});
  page.associations.push_back({"b1", "ch1"});
  page.associations.push_back({"b2", "ch2"});

  TextBlock d1;
  d1.id = "t1";
  d1.bbox = {50, 50, 240, 40};
  d1.transcription = "We leave tonight.";
  d1.balloon_id = "b1";
  TextBlock d2;
  d2.id = "t2";
  d2.bbox = {550, 50, 240, 40};
  d2.transcription = "I'm ready.";
  d2.balloon_id = "b2";
  page.text_blocks = {d1, d2};
  book.pages.push_back(page);
  return book;
}

}  // namespace

TEST_CASE("build_script places units and resolves speakers") {
  BookAnnotation book = tiny_book();
  std::vector<TextUnit> units = {
      {"t1", "t1", "We leave tonight.", {50, 50, 240, 40}, TextRole::Dialogue},
      {"t2", "t2", "I'm ready.", {550, 50, 240, 40}, TextRole::Dialogue},
      {"s1", "t1", "CRASH", {400, 700, 80, 60}, TextRole::Sound},
      {"c1", "t2", "Meanwhile.", {700, 700, 120, 30}, TextRole::Caption},
  };
  std::map<std::string, SpeakerId> speakers = {
      {"ch1", SpeakerId::cluster(0)},
      // ch2 intentionally missing: its dialogue falls back to "?"
  };

  Script script = build_script(book, units, speakers);
  CHECK(script.book_id == "tiny");
  REQUIRE(script.pages.size() == 1);
  REQUIRE(script.pages[0].panels.size() == 2);

  const ScriptPanel& left = script.pages[0].panels[0];
  const ScriptPanel& right = script.pages[0].panels[1];
  REQUIRE(left.dialogues.size() == 1);
  CHECK(left.dialogues[0].speaker == SpeakerId::cluster(0));
  CHECK(left.dialogues[0].text == "We leave tonight.");
  REQUIRE(right.dialogues.size() == 1);
  CHECK(right.dialogues[0].speaker == SpeakerId::unknown());
  // The sound sits in the left panel, the caption in the right one.
  CHECK(left.sounds == std::vector<std::string>{"CRASH"});
  CHECK(right.captions == std::vector<std::string>{"Meanwhile."});
}

TEST_CASE("build_script on an empty book gives an empty script") {
  BookAnnotation book;
  book.book_id = "none";
  Script script = build_script(book, {}, {});
  CHECK(script.pages.empty());
  CHECK(serialize_markdown(script) == "");
}

TEST_CASE("rename_speakers maps cluster ids only") {
  Script script;
  ScriptPanel panel;
  panel.dialogues.push_back({SpeakerId::cluster(0), "a"});
  panel.dialogues.push_back({SpeakerId::cluster(1), "b"});
  panel.dialogues.push_back({SpeakerId::unknown(), "c"});
  panel.dialogues.push_back({SpeakerId::named("Maria"), "d"});
  script.pages.push_back({1, {panel}});

  Script renamed = rename_speakers(script, {{0, "Curt"}});
  const auto& out = renamed.pages[0].panels[0].dialogues;
  CHECK(out[0].speaker == SpeakerId::named("Curt"));
  CHECK(out[1].speaker == SpeakerId::cluster(1));  // unmapped stays
  CHECK(out[2].speaker == SpeakerId::unknown());
  CHECK(out[3].speaker == SpeakerId::named("Maria"));
}

TEST_CASE("insert_description") {
  Script script;
  script.pages.push_back({2, {ScriptPanel{}, ScriptPanel{}}});
  Script out = insert_description(script, 2, 2, "A dark alley.");
  CHECK(out.pages[0].panels[1].description == "A dark alley.");
  CHECK_FALSE(out.pages[0].panels[0].description.has_value());
  CHECK_THROWS_AS(insert_description(script, 2, 3, "x"), ValidationError);
  CHECK_THROWS_AS(insert_description(script, 9, 1, "x"), ValidationError);
}
