#include "comicscript/annotations.hpp"

#include "comicscript/errors.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace comicscript;
using nlohmann::json;

namespace {

json minimal_book() {
  return json::parse(R"({
    "format": "comicscript/1",
    "book_id": "demo",
    "pages": [
      {
        "index": 1,
        "width": 1000,
        "height": 1500,
        "panels": [
          {"id": "p1", "bbox": [0, 0, 500, 700], "reading_order": 1},
          {"id": "p2", "bbox": [500, 0, 500, 700], "reading_order": 2}
        ],
        "text_blocks": [
          {
            "id": "t1",
            "bbox": [100, 100, 200, 60],
            "transcription": "HELLO THERE",
            "lines": [
              {"text": "HELLO", "bbox": [100, 100, 200, 28]},
              {"text": "THERE", "bbox": [100, 132, 200, 28]}
            ]
          }
        ],
        "balloons": [
          {
            "id": "b1",
            "contour": [[80, 80], [320, 80], [320, 180], [80, 180]],
            "tail_tip": [150, 240]
          }
        ],
        "characters": [
          {"id": "ch1", "panel_id": "p1", "body_bbox": [120, 250, 80, 160]}
        ],
        "associations": [
          {"balloon_id": "b1", "character_id": "ch1"}
        ]
      }
    ]
  })");
}

}  // namespace

TEST_CASE("parse a well-formed book") {
  BookAnnotation book = parse_book(minimal_book().dump());
  CHECK(book.book_id == "demo");
  REQUIRE(book.pages.size() == 1);
  const PageAnnotation& page = book.pages[0];
  CHECK(page.index == 1);
  CHECK(page.width == 1000);
  REQUIRE(page.panels.size() == 2);
  CHECK(page.panels[0].reading_order == 1);
  REQUIRE(page.text_blocks.size() == 1);
  CHECK(page.text_blocks[0].lines.size() == 2);
  CHECK(page.text_blocks[0].transcription == "HELLO THERE");
  REQUIRE(page.balloons.size() == 1);
  CHECK(page.balloons[0].tail_tip.has_value());
  CHECK(page.balloons[0].tail_tip->x == 150.0);
  REQUIRE(page.associations.size() == 1);
  CHECK(page.associations[0].character_id == "ch1");
}

TEST_CASE("json syntax errors carry a position") {
  std::string text = "{\n  \"format\": \"comicscript/1\",\n  \"book_id\": oops\n}";
  try {
    parse_book(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("validation failures") {
  SUBCASE("wrong format tag") {
    json doc = minimal_book();
    doc["format"] = "comicscript/2";
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("missing book id") {
    json doc = minimal_book();
    doc.erase("book_id");
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("duplicate panel ids") {
    json doc = minimal_book();
    doc["pages"][0]["panels"][1]["id"] = "p1";
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("dangling balloon reference") {
    json doc = minimal_book();
    doc["pages"][0]["text_blocks"][0]["balloon_id"] = "nope";
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("dangling association") {
    json doc = minimal_book();
    doc["pages"][0]["associations"][0]["character_id"] = "ghost";
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("bbox outside the page") {
    json doc = minimal_book();
    doc["pages"][0]["characters"][0]["body_bbox"] = {900, 1400, 200, 200};
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("page indices must increase") {
    json doc = minimal_book();
    json page2 = doc["pages"][0];
    page2["index"] = 1;
    page2["panels"] = json::array();
    page2["text_blocks"] = json::array();
    page2["balloons"] = json::array();
    page2["characters"] = json::array();
    page2["associations"] = json::array();
    doc["pages"].push_back(page2);
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("page index zero rejected") {
    json doc = minimal_book();
    doc["pages"][0]["index"] = 0;
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("negative rect size") {
    json doc = minimal_book();
    doc["pages"][0]["panels"][0]["bbox"] = {0, 0, -5, 10};
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
  SUBCASE("polygon needs three vertices") {
    json doc = minimal_book();
    doc["pages"][0]["balloons"][0]["contour"] = {{0, 0}, {1, 1}};
    CHECK_THROWS_AS(parse_book(doc.dump()), ValidationError);
  }
}

TEST_CASE("write then parse gives the same book") {
  BookAnnotation book = parse_book(minimal_book().dump());
  std::string once = write_book(book);
  BookAnnotation again = parse_book(once);
  CHECK(write_book(again) == once);
  CHECK(again.pages[0].text_blocks[0].id == "t1");
  CHECK(again.pages[0].balloons[0].contour.size() == 4);
}

TEST_CASE("optional ground truth keys survive round trips") {
  json doc = minimal_book();
  doc["pages"][0]["panels"][0]["description_gt"] = "Two figures talk.";
  doc["pages"][0]["text_blocks"][0]["role_gt"] = "Dialogue";
  doc["pages"][0]["characters"][0]["reference_identity"] = "Curt";
  doc["pages"][0]["characters"][0]["excluded"] = true;
  BookAnnotation book = parse_book(doc.dump());
  CHECK(book.pages[0].panels[0].description_gt == "Two figures talk.");
  CHECK(book.pages[0].text_blocks[0].role_gt == "Dialogue");
  CHECK(book.pages[0].characters[0].reference_identity == "Curt");
  CHECK(book.pages[0].characters[0].excluded);
  BookAnnotation again = parse_book(write_book(book));
  CHECK(again.pages[0].panels[0].description_gt == "Two figures talk.");
  CHECK(again.pages[0].characters[0].excluded);
}

TEST_CASE("associate_text links blocks to covering balloons") {
  BookAnnotation book = parse_book(minimal_book().dump());
  PageAnnotation& page = book.pages[0];

  SUBCASE("contained block joins the balloon") {
    associate_text(page);
    REQUIRE(page.text_blocks[0].balloon_id.has_value());
    CHECK(*page.text_blocks[0].balloon_id == "b1");
  }
  SUBCASE("explicit assignment is left alone") {
    page.balloons.push_back({"b2", {{0, 0}, {999, 0}, {999, 999}, {0, 999}}, {}});
    page.text_blocks[0].balloon_id = "b2";
    associate_text(page);
    CHECK(*page.text_blocks[0].balloon_id == "b2");
  }
  SUBCASE("poor coverage stays unassigned") {
    page.text_blocks[0].bbox = {100, 100, 400, 60};  // balloon covers only ~55%
    associate_text(page);
    CHECK_FALSE(page.text_blocks[0].balloon_id.has_value());
  }
  SUBCASE("threshold is a parameter") {
    page.text_blocks[0].bbox = {100, 100, 400, 60};
    associate_text(page, 0.5);
    CHECK(page.text_blocks[0].balloon_id.has_value());
  }
  SUBCASE("coverage ties break toward the earlier balloon") {
    page.balloons.push_back(
        {"b2", {{90, 90}, {330, 90}, {330, 190}, {90, 190}}, {}});
    associate_text(page);  // both cover the block fully
    CHECK(*page.text_blocks[0].balloon_id == "b1");
  }
}

TEST_CASE("panels sort by reading order") {
  BookAnnotation book = parse_book(minimal_book().dump());
  PageAnnotation& page = book.pages[0];
  page.panels[0].reading_order = 5;
  auto ordered = panels_in_reading_order(page);
  REQUIRE(ordered.size() == 2);
  CHECK(ordered[0]->id == "p2");
  CHECK(ordered[1]->id == "p1");
}

TEST_CASE("panel slot selection") {
  BookAnnotation book = parse_book(minimal_book().dump());
  const PageAnnotation& page = book.pages[0];
  CHECK(panel_slot_for(page, Rect{100, 100, 50, 50}) == 0);
  CHECK(panel_slot_for(page, Rect{600, 100, 50, 50}) == 1);
  // Straddling box: larger overlap wins.
  CHECK(panel_slot_for(page, Rect{450, 100, 100, 50}) == 0);
  CHECK(panel_slot_for(page, Rect{430, 100, 200, 50}) == 1);
  // Gutter text below both panels: nearest center wins.
  CHECK(panel_slot_for(page, Rect{700, 800, 50, 20}) == 1);
}
