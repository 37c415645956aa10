#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sgscn/metrics.hpp"

using namespace sgscn;

namespace {

BinaryMask from_list(std::size_t rows, std::size_t cols, std::initializer_list<int> on) {
  BinaryMask m(rows, cols);
  for (int i : on) m[static_cast<std::size_t>(i)] = 1;
  return m;
}

BinaryMask random_mask(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  BinaryMask m(n, n);
  for (auto& v : m.values) v = b(rng);
  return m;
}

}  // namespace

TEST_CASE("dsc examples") {
  const auto a = from_list(3, 3, {0, 1, 4});
  CHECK(dsc(a, a) == 1.0);
  CHECK(dsc(from_list(3, 3, {0, 1}), from_list(3, 3, {2, 3})) == 0.0);
  CHECK(dsc(from_list(4, 4, {0, 1, 2, 3}), from_list(4, 4, {2, 3, 4, 5})) == 0.5);
  CHECK(dsc(BinaryMask(2, 2), BinaryMask(2, 2)) == 1.0);
  CHECK_THROWS_AS(dsc(BinaryMask(2, 2), BinaryMask(2, 3)), ShapeError);
}

TEST_CASE("hammoude examples") {
  const auto a = from_list(3, 3, {0, 1, 4});
  CHECK(hammoude(a, a) == 0.0);
  CHECK(hammoude(from_list(3, 3, {0, 1}), from_list(3, 3, {2, 3})) == 1.0);
  // union 10, intersection 4
  CHECK(hammoude(from_list(4, 4, {0, 1, 2, 3, 4, 5, 6}), from_list(4, 4, {3, 4, 5, 6, 7, 8, 9})) ==
        doctest::Approx(0.6));
  CHECK(hammoude(BinaryMask(2, 2), BinaryMask(2, 2)) == 0.0);
}

TEST_CASE("xor examples") {
  const auto gt = from_list(5, 5, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(xor_measure(gt, gt) == 0.0);
  CHECK(xor_measure(BinaryMask(5, 5), gt) == 1.0);
  // tp 5 (0..4), fn 5 (5..9), fp 8 (10..17)
  const auto pred = from_list(5, 5, {0, 1, 2, 3, 4, 10, 11, 12, 13, 14, 15, 16, 17});
  CHECK(xor_measure(pred, gt) == doctest::Approx(1.3));
  CHECK_THROWS_AS(xor_measure(gt, BinaryMask(5, 5)), Error);
}

TEST_CASE("largest-overlap matching") {
  LabelMap labels(4, 4, 0);
  for (std::size_t i = 8; i < 16; ++i) labels[i] = 3;
  const auto gt = from_list(4, 4, {9, 10, 13});
  const auto m = match_largest_overlap(labels, gt);
  CHECK(m.cluster_id == 3);
  CHECK(m.mask[8] == 1);
  CHECK(m.mask[0] == 0);

  // 30 vs 31 pixels of overlap
  LabelMap l2(10, 10, 0);
  BinaryMask g2(10, 10);
  for (std::size_t i = 0; i < 30; ++i) l2[i] = 1, g2[i] = 1;
  for (std::size_t i = 30; i < 61; ++i) l2[i] = 2, g2[i] = 1;
  CHECK(match_largest_overlap(l2, g2).cluster_id == 2);

  // ties: smaller cluster, then smaller id
  LabelMap l3(1, 6);
  l3.values = {5, 5, 5, 7, 7, 9};
  CHECK(match_largest_overlap(l3, from_list(1, 6, {0, 3})).cluster_id == 7);
  l3.values = {5, 5, 7, 7, 9, 9};
  CHECK(match_largest_overlap(l3, from_list(1, 6, {0, 2, 4})).cluster_id == 5);

  CHECK_THROWS_AS(match_largest_overlap(l3, BinaryMask(1, 6)), Error);
  CHECK_THROWS_AS(match_largest_overlap(l3, BinaryMask(2, 3)), ShapeError);
}

TEST_CASE("evaluate examples") {
  LabelMap labels(4, 4, 0);
  BinaryMask gt(4, 4);
  for (std::size_t i = 5; i < 11; ++i) labels[i] = 1, gt[i] = 1;
  const auto exact = evaluate(labels, gt);
  CHECK(exact.dsc == 1.0);
  CHECK(exact.hm == 0.0);
  CHECK(exact.xor_ == 0.0);

  // 10x10 GT square vs the same square shifted by 5 columns
  LabelMap shifted(20, 20, 0);
  BinaryMask sq(20, 20);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 10; ++c) {
      sq(r, c) = 1;
      shifted(r, c + 5) = 1;
    }
  // cluster 1 overlaps by 50; cluster 0 also overlaps by 50 but is larger
  const auto rep = evaluate(shifted, sq);
  CHECK(rep.matched_cluster_id == 1);
  CHECK(rep.tp == 50);
  CHECK(rep.fp == 50);
  CHECK(rep.fn == 50);
  CHECK(rep.dsc == 0.5);
  CHECK(rep.hm == doctest::Approx(2.0 / 3.0));
  CHECK(rep.xor_ == 1.0);
}

TEST_CASE("metric identities on random masks") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_mask(9, 0.4, rng), b = random_mask(9, 0.5, rng);
    const auto c = confusion(a, b);
    const double d = dsc(a, b), h = hammoude(a, b);
    CHECK(d == dsc(b, a));
    CHECK(h == hammoude(b, a));
    CHECK(0.0 <= d);
    CHECK(d <= 1.0);
    CHECK(std::abs((1 - d) - double(c.fp + c.fn) / double(2 * c.tp + c.fp + c.fn)) < 1e-15);
    CHECK(h == double(c.fp + c.fn) / double(c.tp + c.fp + c.fn));
    CHECK(h >= 1 - d - 1e-15);
    if (c.tp + c.fn > 0) CHECK(xor_measure(a, b) >= 0.0);

    // joint translation (cyclic shift) and transposition
    BinaryMask as(9, 9), bs(9, 9), at(9, 9), bt(9, 9);
    for (std::size_t r = 0; r < 9; ++r)
      for (std::size_t k = 0; k < 9; ++k) {
        as((r + 3) % 9, (k + 5) % 9) = a(r, k);
        bs((r + 3) % 9, (k + 5) % 9) = b(r, k);
        at(k, r) = a(r, k);
        bt(k, r) = b(r, k);
      }
    CHECK(dsc(as, bs) == d);
    CHECK(hammoude(at, bt) == h);
    if (c.tp + c.fn > 0) CHECK(xor_measure(as, bs) == xor_measure(a, b));
  }
}

TEST_CASE("mean_std") {
  const auto ms = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == 2.5);
  CHECK(ms.std == doctest::Approx(std::sqrt(1.25)));
  CHECK(mean_std({}).mean == 0.0);
}

TEST_CASE("evaluate agrees with a per-pixel oracle") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 300; ++t) {
    const int k = 1 + static_cast<int>(rng() % 7);
    std::uniform_int_distribution<int> lab(0, k - 1);
    LabelMap labels(12, 12);
    for (auto& v : labels.values) v = lab(rng);
    BinaryMask gt = random_mask(12, 0.05 + 0.09 * (t % 10), rng);
    gt[static_cast<std::size_t>(t % 144)] = 1;
    const auto a = evaluate(labels, gt);
    const auto o = oracles::oracle_evaluate(labels, gt);
    CHECK(a.matched_cluster_id == o.cluster);
    CHECK(long(a.tp) == o.tp);
    CHECK(long(a.fp) == o.fp);
    CHECK(long(a.fn) == o.fn);
    CHECK(a.dsc == o.dsc);
    CHECK(a.hm == o.hm);
    CHECK(a.xor_ == o.xor_);
  }
}
