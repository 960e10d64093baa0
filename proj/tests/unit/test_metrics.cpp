#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lidarsurf/metrics.hpp"
#include "lidarsurf/metrics_io.hpp"

using namespace lidarsurf;

namespace {

PointCloud empty_cloud(std::size_t rows = 4, std::size_t cols = 4, std::size_t wavelengths = 2) {
  PointCloud c;
  c.rows = rows;
  c.cols = cols;
  c.wavelengths = wavelengths;
  c.bins = 100;
  c.bin_width = 16e-12;
  return c;
}

CloudPoint pt(std::size_t row, std::size_t col, double depth, std::vector<double> intensity, long label = -1) {
  CloudPoint p;
  p.row = row;
  p.col = col;
  p.depth = depth;
  p.intensity = std::move(intensity);
  p.label = label;
  return p;
}

PointCloud random_cloud(std::uint64_t seed, std::size_t per_pixel_max = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> depth(0.0, 99.0), inten(0.0, 10.0);
  std::uniform_int_distribution<std::size_t> count(0, per_pixel_max);
  std::uniform_int_distribution<long> label(0, 2);
  PointCloud c = empty_cloud();
  for (std::size_t r = 0; r < c.rows; ++r)
    for (std::size_t cc = 0; cc < c.cols; ++cc)
      for (std::size_t i = count(rng); i > 0; --i) {
        auto p = pt(r, cc, depth(rng), {inten(rng), inten(rng)}, label(rng));
        p.slot = i - 1;
        p.gain = 1.0;
        c.points.push_back(p);
      }
  return c;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("identical clouds match completely") {
  const auto gt = random_cloud(1);
  const auto m = match_points(gt, gt, 0.0);
  CHECK(m.pairs.size() == gt.points.size());
  CHECK(m.unmatched_est.empty());
  CHECK(m.unmatched_gt.empty());
  const auto rep = evaluate(gt, gt, 0.0);
  CHECK(rep.f_true == 1.0);
  CHECK(rep.f_false == 0);
  CHECK(rep.iae == 0.0);
  CHECK(rep.dae == 0.0);
  REQUIRE(rep.accuracy.has_value());
  CHECK(*rep.accuracy == 1.0);
}

TEST_CASE("displacement beyond tau is unmatched") {
  auto gt = empty_cloud();
  gt.points.push_back(pt(1, 1, 40.0, {1.0, 2.0}));
  auto est = empty_cloud();
  est.points.push_back(pt(1, 1, 43.0, {1.0, 2.0}));
  const auto m = match_points(est, gt, 2.0);
  CHECK(m.pairs.empty());
  CHECK(m.unmatched_est.size() == 1);
  CHECK(m.unmatched_gt.size() == 1);
  CHECK(match_points(est, gt, 3.0).pairs.size() == 1);
  // Same depth in another pixel never matches.
  auto other = empty_cloud();
  other.points.push_back(pt(1, 2, 40.0, {1.0, 2.0}));
  CHECK(match_points(other, gt, 10.0).pairs.empty());
}

TEST_CASE("greedy matching equals exhaustive assignment on crossed gaps") {
  // Est 0 is nearest gt 1 and est 1 nearest gt 0.
  auto gt = empty_cloud(1, 1, 1);
  auto est = empty_cloud(1, 1, 1);
  gt.points = {pt(0, 0, 10.0, {1.0}), pt(0, 0, 20.0, {1.0})};
  est.points = {pt(0, 0, 19.0, {1.0}), pt(0, 0, 11.5, {1.0})};
  const auto m = match_points(est, gt, 5.0);
  REQUIRE(m.pairs.size() == 2);
  auto gap = [&](std::size_t e, std::size_t g) { return std::abs(est.points[e].depth - gt.points[g].depth); };
  double greedy = 0.0;
  for (auto [e, g] : m.pairs) greedy += gap(e, g);
  const double straight = gap(0, 0) + gap(1, 1), crossed = gap(0, 1) + gap(1, 0);
  CHECK(greedy == std::min(straight, crossed));
  for (auto [e, g] : m.pairs) CHECK(g == 1 - e);
}

TEST_CASE("each point is matched at most once") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto gt = random_cloud(300 + seed, 3);
    const auto est = random_cloud(400 + seed, 3);
    const double tau = 5.0;
    const auto m = match_points(est, gt, tau);
    std::vector<int> e_used(est.points.size(), 0), g_used(gt.points.size(), 0);
    for (auto [e, g] : m.pairs) {
      ++e_used[e];
      ++g_used[g];
      CHECK(est.points[e].row == gt.points[g].row);
      CHECK(est.points[e].col == gt.points[g].col);
      CHECK(std::abs(est.points[e].depth - gt.points[g].depth) <= tau);
    }
    for (auto e : m.unmatched_est) ++e_used[e];
    for (auto g : m.unmatched_gt) ++g_used[g];
    for (int v : e_used) CHECK(v == 1);
    for (int v : g_used) CHECK(v == 1);
  }
}

TEST_CASE("evaluation with missing estimates applies the penalty") {
  auto gt = empty_cloud();
  gt.points = {pt(0, 0, 10.0, {1.0, 2.0}), pt(1, 1, 20.0, {3.0, 0.5}), pt(2, 3, 30.0, {0.25, 0.25})};
  const auto est = empty_cloud();
  const auto rep = evaluate(est, gt, 2.0);
  CHECK(rep.f_true == 0.0);
  CHECK(rep.f_false == 0);
  CHECK(rep.iae == doctest::Approx((3.0 + 3.5 + 0.5) / 3.0));
  CHECK(rep.dae == 0.0);
  CHECK_FALSE(rep.accuracy.has_value());
}

TEST_CASE("hand-computed instance") {
  auto gt = empty_cloud();
  gt.points = {pt(0, 0, 10.0, {1.0, 1.0}, 0), pt(1, 1, 20.0, {2.0, 2.0}, 1), pt(2, 2, 30.0, {4.0, 4.0}, 2)};
  auto est = empty_cloud();
  est.points = {pt(0, 0, 11.0, {1.5, 1.0}, 0), pt(1, 1, 23.0, {2.0, 1.0}, 2), pt(3, 3, 5.0, {1.0, 1.0}, 0)};
  const auto rep = evaluate(est, gt, 3.0);
  CHECK(rep.matched == 2);
  CHECK(rep.f_true == doctest::Approx(2.0 / 3.0));
  CHECK(rep.f_false == 1);
  CHECK(rep.dae == doctest::Approx(2.0));
  // Matched errors 0.5 + 1, missed gt 8, false estimate 2.
  CHECK(rep.iae == doctest::Approx((0.5 + 1.0 + 8.0 + 2.0) / 3.0));
  REQUIRE(rep.accuracy.has_value());
  CHECK(*rep.accuracy == doctest::Approx(0.5));
  CHECK(rep.gt_count == 3);
  CHECK(rep.est_count == 3);
}

TEST_CASE("metric properties over random clouds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto gt = random_cloud(100 + seed);
    if (gt.points.empty()) continue;
    const auto est = random_cloud(200 + seed, 3);
    const auto reports = sweep(est, gt, {8.0, 0.0, 2.0, 1.0, 4.0, 16.0, 64.0});
    for (std::size_t i = 1; i < reports.size(); ++i) {
      CHECK(reports[i].tau > reports[i - 1].tau);
      CHECK(reports[i].f_true >= reports[i - 1].f_true);
      CHECK(reports[i].f_false <= reports[i - 1].f_false);
    }
    for (const auto& r : reports) {
      CHECK(r.f_true >= 0.0);
      CHECK(r.f_true <= 1.0);
      CHECK(r.iae >= 0.0);
    }
    // Scaling every intensity scales IAE.
    auto est2 = est;
    auto gt2 = gt;
    const double a = 2.5;
    for (auto& p : est2.points)
      for (auto& v : p.intensity) v *= a;
    for (auto& p : gt2.points)
      for (auto& v : p.intensity) v *= a;
    CHECK(evaluate(est2, gt2, 4.0).iae == doctest::Approx(a * evaluate(est, gt, 4.0).iae));
    CHECK(evaluate(est, gt, 4.0).iae > 0.0);
  }
}

TEST_CASE("IAE vanishes only for a complete identical match") {
  auto gt = random_cloud(3);
  REQUIRE(gt.points.size() > 1);
  CHECK(evaluate(gt, gt, 0.5).iae == 0.0);
  auto est = gt;
  est.points[0].intensity[0] += 0.1;
  CHECK(evaluate(est, gt, 0.5).iae > 0.0);
  est = gt;
  est.points.pop_back();
  CHECK(evaluate(est, gt, 0.5).iae > 0.0);
}

TEST_CASE("invalid inputs") {
  const auto est = random_cloud(4);
  CHECK_THROWS_AS(evaluate(est, empty_cloud(), 1.0), ValidationError);
  auto other = random_cloud(5);
  other.rows = 9;
  CHECK_THROWS_AS(evaluate(est, other, 1.0), ValidationError);
  CHECK_THROWS_AS(match_points(est, est, -1.0), ValidationError);
  auto bad = empty_cloud();
  bad.points.push_back(pt(0, 0, 200.0, {1.0, 1.0}));
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.points[0].depth = 5.0;
  bad.points[0].intensity = {-1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("millimetre conversion") {
  // 16 ps round trip is c * 8 ps of range.
  CHECK(bins_to_mm(1.0, 16e-12) == doctest::Approx(299792458.0 * 8e-12 * 1e3));
  CHECK(bins_to_mm(4.0, 0.0) == 0.0);
}

TEST_CASE("point table round trip and PLY export") {
  const auto cloud = random_cloud(6);
  std::ostringstream out;
  write_points_csv(cloud, out, 0xabcdef);
  CHECK(out.str().rfind("# config_hash 0000000000abcdef\n", 0) == 0);
  std::istringstream in(out.str());
  std::uint64_t hash = 0;
  const auto back = read_points_csv(in, &hash);
  CHECK(hash == 0xabcdef);
  CHECK(back.rows == cloud.rows);
  CHECK(back.bin_width == cloud.bin_width);
  REQUIRE(back.points.size() == cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    CHECK(back.points[i].depth == cloud.points[i].depth);
    CHECK(back.points[i].intensity == cloud.points[i].intensity);
    CHECK(back.points[i].label == cloud.points[i].label);
    CHECK(back.points[i].slot == cloud.points[i].slot);
  }
  std::ostringstream again;
  write_points_csv(back, again, 0xabcdef);
  CHECK(again.str() == out.str());

  std::ostringstream ply;
  write_points_ply(cloud, ply, 0xabcdef);
  const std::string text = ply.str();
  CHECK(text.rfind("ply\nformat ascii 1.0\n", 0) == 0);
  CHECK(text.find("comment config_hash 0000000000abcdef") != std::string::npos);
  CHECK(text.find("element vertex " + std::to_string(cloud.points.size())) != std::string::npos);
  const auto body = text.substr(text.find("end_header\n") + 11);
  CHECK(std::size_t(std::count(body.begin(), body.end(), '\n')) == cloud.points.size());

  std::istringstream broken("# cloud 2 2 1 10 0\nrow,col,slot,depth,label,h,I_0\n0,0,0,abc,0,1,1\n");
  CHECK_THROWS(read_points_csv(broken));
}

TEST_CASE("report files") {
  const auto gt = random_cloud(7);
  const auto est = random_cloud(8);
  const auto reports = sweep(est, gt, {0.0, 2.0, 1.0});
  std::ostringstream csv;
  write_reports_csv(reports, 16e-12, csv, 5);
  std::istringstream lines(csv.str());
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "tau_bins,tau_mm,f_true,f_false,iae,dae_bins,accuracy,matched,gt_count,est_count");
  CHECK(rows[1].rfind("0,", 0) == 0);
  CHECK(rows[2].rfind("1,", 0) == 0);
  CHECK(rows[3].rfind("2,", 0) == 0);

  const auto doc = nlohmann::json::parse(format_reports_json(reports, 16e-12, 5));
  CHECK(doc["config_hash"] == format_hash(5));
  REQUIRE(doc["reports"].size() == 3);
  CHECK(doc["reports"][1]["f_true"].get<double>() == doctest::Approx(reports[1].f_true));
  CHECK(doc["reports"][2]["f_false"].get<std::size_t>() == reports[2].f_false);
}

}  // TEST_SUITE
