#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tileadapt/metrics.hpp"
#include "tileadapt/rng.hpp"

using namespace tileadapt;

namespace {

BinaryMask random_mask(int w, int h, std::uint64_t seed, double p = 0.5) {
  BinaryMask m;
  m.width = w;
  m.height = h;
  m.values.resize(m.pixel_count());
  SplitMix64 rng(seed);
  for (auto& v : m.values) v = rng.unit() < p ? 1 : 0;
  return m;
}

HeightMap random_height(int w, int h, std::uint64_t seed) {
  HeightMap hm;
  hm.width = w;
  hm.height = h;
  hm.values_m.resize(hm.pixel_count());
  SplitMix64 rng(seed);
  for (auto& v : hm.values_m) v = static_cast<float>(30.0 * rng.unit());
  return hm;
}

}  // namespace

TEST_CASE("binarize") {
  SUBCASE("all ones") {
    const Raster prob(4, 4, 1, 1.0);
    const BinaryMask m = binarize(prob, 0.5);
    for (auto v : m.values) CHECK(v == 1);
  }

  SUBCASE("threshold is inclusive") {
    const Raster prob(1, 1, 1, 0.5);
    CHECK(binarize(prob, 0.5).values[0] == 1);
  }

  SUBCASE("random raster equals the elementwise oracle") {
    const Raster prob = oracle::random_raster(17, 13, 1, 42);
    const BinaryMask m = binarize(prob, 0.3);
    for (std::size_t i = 0; i < prob.values.size(); ++i)
      CHECK((m.values[i] != 0) == (prob.values[i] >= 0.3));
  }

  SUBCASE("rejects multi-channel input") {
    CHECK_THROWS_AS(binarize(Raster(2, 2, 3, 0.5), 0.5),
                    std::invalid_argument);
  }
}

TEST_CASE("iou analytic cases") {
  BinaryMask a = random_mask(8, 8, 1);
  CHECK(iou(a, a) == 1.0);

  BinaryMask left, right;
  left.width = right.width = 4;
  left.height = right.height = 1;
  left.values = {1, 1, 0, 0};
  right.values = {0, 0, 1, 1};
  CHECK(iou(left, right) == 0.0);

  BinaryMask gt, pred;
  gt.width = pred.width = 4;
  gt.height = pred.height = 1;
  gt.values = {1, 1, 1, 1};
  pred.values = {1, 1, 0, 0};
  CHECK(iou(pred, gt) == 0.5);

  BinaryMask empty;
  empty.width = 3;
  empty.height = 3;
  empty.values.assign(9, 0);
  CHECK(iou(empty, empty) == 1.0);  // both-empty convention

  BinaryMask other;
  other.width = 2;
  other.height = 2;
  other.values.assign(4, 0);
  CHECK_THROWS_AS(iou(empty, other), std::invalid_argument);
}

TEST_CASE("iou is symmetric and bounded") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BinaryMask a = random_mask(16, 16, seed * 2 + 1);
    const BinaryMask b = random_mask(16, 16, seed * 2 + 2);
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("mae analytic cases") {
  HeightMap gt = random_height(8, 8, 3);
  CHECK(mae(gt, gt) == 0.0);

  HeightMap plus = gt;
  for (auto& v : plus.values_m) v += 1.0f;
  CHECK(mae(plus, gt) == doctest::Approx(1.0).epsilon(1e-6));

  HeightMap a, b;
  a.width = b.width = 2;
  a.height = b.height = 2;
  a.values_m = {0.0f, 1.0f, 2.0f, 3.0f};
  b.values_m = {0.0f, 0.0f, 0.0f, 0.0f};
  CHECK(mae(a, b) == 1.5);
}

TEST_CASE("mae respects nodata masks") {
  HeightMap a, b;
  a.width = b.width = 2;
  a.height = b.height = 1;
  a.values_m = {1.0f, 100.0f};
  a.valid = {1, 0};
  b.values_m = {3.0f, 0.0f};
  CHECK(mae(a, b) == 2.0);  // masked pixel excluded

  a.valid = {0, 0};
  CHECK_THROWS_AS(mae(a, b), std::invalid_argument);

  HeightMap c;
  c.width = 3;
  c.height = 1;
  c.values_m = {0, 0, 0};
  CHECK_THROWS_AS(mae(a, c), std::invalid_argument);
}

TEST_CASE("mae satisfies the triangle bound on shared masks") {
  const HeightMap a = random_height(12, 12, 11);
  const HeightMap b = random_height(12, 12, 12);
  const HeightMap c = random_height(12, 12, 13);
  CHECK(mae(a, c) <= mae(a, b) + mae(b, c) + 1e-9);
}

TEST_CASE("metrics match brute-force oracles on random pairs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const BinaryMask p = random_mask(16, 16, 1000 + seed, 0.4);
    const BinaryMask g = random_mask(16, 16, 2000 + seed, 0.6);
    std::uint64_t inter = 0, uni = 0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * 16 + x;
        inter += p.values[i] && g.values[i];
        uni += p.values[i] || g.values[i];
      }
    const double expect =
        uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    CHECK(iou(p, g) == expect);

    const HeightMap hp = random_height(16, 16, 3000 + seed);
    const HeightMap hg = random_height(16, 16, 4000 + seed);
    double sum = 0.0;
    for (std::size_t i = 0; i < hp.values_m.size(); ++i)
      sum += std::abs(static_cast<double>(hp.values_m[i]) -
                      static_cast<double>(hg.values_m[i]));
    CHECK(mae(hp, hg) == sum / 256.0);
  }
}

TEST_CASE("aggregate") {
  SUBCASE("single record passes through") {
    const EvalReport r =
        aggregate({EvalRecord{"t1", 0.7, 1.25}}, "HM");
    CHECK(*r.miou == 0.7);
    CHECK(*r.mae_m == 1.25);
    CHECK(r.method_label == "HM");
  }

  SUBCASE("simple mean") {
    const EvalReport r = aggregate(
        {EvalRecord{"a", 0.4, {}}, EvalRecord{"b", 0.6, {}}}, "FDA");
    CHECK(*r.miou == doctest::Approx(0.5));
    CHECK_FALSE(r.mae_m.has_value());
  }

  SUBCASE("missing metrics drop out of their mean") {
    const EvalReport r = aggregate({EvalRecord{"a", 0.4, 1.0},
                                    EvalRecord{"b", 0.8, {}},
                                    EvalRecord{"c", 0.6, 2.0}},
                                   "PDA");
    CHECK(*r.miou == doctest::Approx((0.4 + 0.8 + 0.6) / 3.0));
    CHECK(*r.mae_m == doctest::Approx(1.5));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(aggregate({}, "x"), std::invalid_argument);
    CHECK_THROWS_AS(aggregate({EvalRecord{"a", {}, {}}}, "x"),
                    std::invalid_argument);
  }

  SUBCASE("permutation invariant") {
    std::vector<EvalRecord> records;
    SplitMix64 rng(77);
    for (int i = 0; i < 9; ++i)
      records.push_back(
          EvalRecord{"t" + std::to_string(i), rng.unit(), 10.0 * rng.unit()});
    const EvalReport before = aggregate(records, "m");
    shuffle(records, rng);
    const EvalReport after = aggregate(records, "m");
    CHECK(*before.miou == doctest::Approx(*after.miou).epsilon(1e-12));
    CHECK(*before.mae_m == doctest::Approx(*after.mae_m).epsilon(1e-12));
  }
}

TEST_CASE("render_table") {
  SUBCASE("single report takes both best marks") {
    const EvalReport r = aggregate({EvalRecord{"t", 0.5131, 0.9312}}, "PDA");
    const std::string md = render_table({r}, TableFormat::Markdown);
    CHECK(md.find("| Target | PDA | **0.5131** | **0.9312** |") !=
          std::string::npos);
  }

  SUBCASE("best bold, second underlined") {
    const EvalReport hi = aggregate({EvalRecord{"t", 0.51, {}}}, "A");
    const EvalReport lo = aggregate({EvalRecord{"t", 0.48, {}}}, "B");
    const std::string md = render_table({hi, lo}, TableFormat::Markdown);
    CHECK(md.find("**0.5100**") != std::string::npos);
    CHECK(md.find("<u>0.4800</u>") != std::string::npos);
  }

  SUBCASE("lower MAE is better") {
    const EvalReport a = aggregate({EvalRecord{"t", {}, 0.9}}, "A");
    const EvalReport b = aggregate({EvalRecord{"t", {}, 0.4}}, "B");
    const std::string md = render_table({a, b}, TableFormat::Markdown);
    CHECK(md.find("**0.4000**") != std::string::npos);
    CHECK(md.find("<u>0.9000</u>") != std::string::npos);
  }

  SUBCASE("csv round-trips at 4 decimals") {
    std::vector<EvalReport> reports;
    SplitMix64 rng(5);
    for (int i = 0; i < 4; ++i)
      reports.push_back(aggregate(
          {EvalRecord{"t", rng.unit(), 5.0 * rng.unit()}},
          "M" + std::to_string(i)));
    const std::string csv = render_table(reports, TableFormat::Csv);

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "Data,Method,mIoU,MAE(m)");
    int row = 0;
    while (std::getline(in, line)) {
      const auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
      const auto c3 = line.rfind(',');
      const double got_iou = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
      const double got_mae = std::stod(line.substr(c3 + 1));
      CHECK(std::abs(got_iou - *reports[row].miou) <= 5e-5);
      CHECK(std::abs(got_mae - *reports[row].mae_m) <= 5e-5);
      (void)c1;
      ++row;
    }
    CHECK(row == 4);
  }

  SUBCASE("json keeps the report schema") {
    const EvalReport r = aggregate({EvalRecord{"t1", 0.5, 1.0}}, "HM");
    const std::string json = render_table({r}, TableFormat::Json);
    CHECK(json.find("\"method\": \"HM\"") != std::string::npos);
    CHECK(json.find("\"miou\"") != std::string::npos);
    CHECK(json.find("\"mae_m\"") != std::string::npos);
    CHECK(json.find("\"tile_id\": \"t1\"") != std::string::npos);
  }

  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(render_table({}, TableFormat::Markdown),
                    std::invalid_argument);
  }
}
