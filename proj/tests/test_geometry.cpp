#include "comicscript/geometry.hpp"

#include "doctest.h"

using namespace comicscript;

TEST_CASE("rect basics") {
  Rect r{10, 20, 30, 40};
  CHECK(r.area() == 1200.0);
  CHECK(r.right() == 40.0);
  CHECK(r.bottom() == 60.0);
  CHECK(r.center() == Point{25, 40});
  CHECK(r.contains({10, 20}));
  CHECK(r.contains({40, 60}));
  CHECK_FALSE(r.contains({41, 30}));
  CHECK(Rect{0, 0, 0, 5}.area() == 0.0);
}

TEST_CASE("rect intersection") {
  Rect a{0, 0, 10, 10};
  CHECK(intersect(a, Rect{5, 5, 10, 10}) == Rect{5, 5, 5, 5});
  CHECK(intersect(a, Rect{20, 20, 5, 5}).area() == 0.0);
  CHECK(intersect(a, Rect{10, 0, 5, 5}).area() == 0.0);  // edge touch
  CHECK(intersect(a, Rect{2, 3, 4, 5}) == Rect{2, 3, 4, 5});
}

TEST_CASE("polygon area") {
  Polygon square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  CHECK(polygon_area(square) == 16.0);
  Polygon triangle{{0, 0}, {6, 0}, {0, 6}};
  CHECK(polygon_area(triangle) == 18.0);
  Polygon reversed{{0, 4}, {4, 4}, {4, 0}, {0, 0}};
  CHECK(polygon_area(reversed) == 16.0);
  CHECK(polygon_area({}) == 0.0);
  CHECK(polygon_area({{1, 1}, {2, 2}}) == 0.0);
}

TEST_CASE("polygon clipping against a rect") {
  Polygon square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};

  SUBCASE("fully inside") {
    CHECK(intersection_area(square, Rect{-5, -5, 30, 30}) == 100.0);
  }
  SUBCASE("fully outside") {
    CHECK(intersection_area(square, Rect{20, 20, 5, 5}) == 0.0);
  }
  SUBCASE("half overlap") {
    CHECK(intersection_area(square, Rect{5, 0, 10, 10}) == 50.0);
  }
  SUBCASE("corner overlap") {
    CHECK(intersection_area(square, Rect{8, 8, 10, 10}) == 4.0);
  }
  SUBCASE("concave polygon clips piecewise") {
    // U shape: outer 10x10 minus a 4x6 notch cut from the top middle.
    Polygon u{{0, 0}, {10, 0}, {10, 10}, {7, 10}, {7, 4}, {3, 4}, {3, 10}, {0, 10}};
    CHECK(polygon_area(u) == doctest::Approx(100.0 - 24.0));
    // A band across the top (y in [4, 10]) catches the two legs only.
    CHECK(intersection_area(u, Rect{0, 4, 10, 6}) == doctest::Approx(36.0));
  }
}

TEST_CASE("coverage ratio") {
  Polygon square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  CHECK(coverage_ratio(square, Rect{1, 1, 4, 4}) == doctest::Approx(1.0));
  CHECK(coverage_ratio(square, Rect{5, 0, 10, 10}) == doctest::Approx(0.5));
  CHECK(coverage_ratio(square, Rect{0, 0, 0, 0}) == 0.0);
}

TEST_CASE("point to segment and polygon distance") {
  CHECK(point_segment_distance({0, 5}, {0, 0}, {10, 0}) == doctest::Approx(5.0));
  CHECK(point_segment_distance({-3, 4}, {0, 0}, {10, 0}) == doctest::Approx(5.0));
  CHECK(point_segment_distance({4, 0}, {0, 0}, {10, 0}) == doctest::Approx(0.0));
  CHECK(point_segment_distance({5, 5}, {2, 2}, {2, 2}) ==
        doctest::Approx(std::hypot(3.0, 3.0)));

  Polygon square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  CHECK(point_polygon_distance({5, -3}, square) == doctest::Approx(3.0));
  CHECK(point_polygon_distance({5, 5}, square) == doctest::Approx(5.0));  // boundary distance
  CHECK(point_polygon_distance({10, 5}, square) == doctest::Approx(0.0));
}

TEST_CASE("point in polygon") {
  Polygon square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  CHECK(point_in_polygon({5, 5}, square));
  CHECK_FALSE(point_in_polygon({15, 5}, square));
  Polygon triangle{{0, 0}, {10, 0}, {0, 10}};
  CHECK(point_in_polygon({2, 2}, triangle));
  CHECK_FALSE(point_in_polygon({8, 8}, triangle));
}
