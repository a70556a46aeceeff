#include <doctest.h>

#include <cmath>
#include <sstream>

#include "msense/corpus.hpp"

using namespace msense;

namespace {
std::vector<std::string> toks(std::initializer_list<const char*> ws) {
  return {ws.begin(), ws.end()};
}
}  // namespace

TEST_CASE("build_vocab counts and ranks") {
  auto v = build_vocab(toks({"a", "a", "b"}), 1);
  REQUIRE(v.size() == 2);
  CHECK(v.words[0] == "a");
  CHECK(v.counts[0] == 2);
  CHECK(v.words[1] == "b");
  CHECK(v.counts[1] == 1);
  CHECK(*v.lookup("a") == 0);
  CHECK(*v.lookup("b") == 1);
  CHECK(v.total_tokens == 3);
}

TEST_CASE("build_vocab prunes below min_count") {
  auto v = build_vocab(toks({"a", "a", "b"}), 2);
  REQUIRE(v.size() == 1);
  CHECK(v.words[0] == "a");
  CHECK(v.total_tokens == 2);
  CHECK(!v.lookup("b").has_value());
}

TEST_CASE("build_vocab error cases") {
  CHECK_THROWS_WITH(build_vocab(std::span<const std::string>{}, 1),
                    "empty corpus");
  auto tokens = toks({"a", "b", "c"});
  CHECK_THROWS_WITH(build_vocab(tokens, 5), "vocabulary empty after pruning");
}

TEST_CASE("build_vocab breaks count ties by first occurrence") {
  auto v = build_vocab(toks({"z", "m", "z", "m", "q", "q"}), 1);
  CHECK(v.words == std::vector<std::string>{"z", "m", "q"});
}

TEST_CASE("tokenizer lowercases and splits sentences on newlines") {
  std::istringstream in("The CAT\n\n  sat\tMAT  \n");
  auto v = build_vocab(in, 1);
  CHECK(v.lookup("the").has_value());
  CHECK(v.lookup("cat").has_value());
  CHECK(!v.lookup("CAT").has_value());

  std::istringstream in2("x y\nz\n");
  auto v2 = build_vocab(toks({"x", "y", "z"}), 1);
  auto enc = encode(in2, v2);
  REQUIRE(enc.num_sentences() == 2);
  CHECK(enc.sentence(0).size() == 2);
  CHECK(enc.sentence(1).size() == 1);
  // windows never cross the newline
  CHECK(enc.sentence_bounds(2) == std::pair<uint64_t, uint64_t>{2, 3});
}

TEST_CASE("encode drops OOV and keeps order") {
  auto v = build_vocab(toks({"a", "a", "b"}), 1);
  auto enc = encode(toks({"a", "x", "b"}), v);
  CHECK(enc.tokens == std::vector<WordId>{0, 1});

  auto empty = encode(std::span<const std::string>{}, v);
  CHECK(empty.tokens.empty());
  CHECK(empty.num_sentences() == 0);
}

TEST_CASE("encode maps to frequency-rank ids") {
  auto v = build_vocab(toks({"b", "a", "b"}), 1);  // b:2 -> id 0, a:1 -> id 1
  auto enc = encode(toks({"b", "a", "b"}), v);
  CHECK(enc.tokens == std::vector<WordId>{0, 1, 0});
}

TEST_CASE("encode is deterministic") {
  auto tokens = toks({"c", "a", "b", "a", "c", "c"});
  auto v1 = build_vocab(tokens, 1);
  auto v2 = build_vocab(tokens, 1);
  CHECK(v1.words == v2.words);
  CHECK(encode(tokens, v1).tokens == encode(tokens, v2).tokens);
}

TEST_CASE("noise table matches count^0.75 distribution") {
  Vocabulary v;
  v.words = {"a", "b"};
  v.counts = {8, 1};
  v.total_tokens = 9;
  v.rebuild_index();
  auto table = build_noise_table(v);

  const double pa = std::pow(8.0, 0.75) / (std::pow(8.0, 0.75) + 1.0);
  CHECK(table.prob(0) == doctest::Approx(pa).epsilon(1e-12));
  CHECK(table.prob(1) == doctest::Approx(1.0 - pa).epsilon(1e-12));
  CHECK(table.prob(0) == doctest::Approx(0.8263).epsilon(1e-3));

  // table-implied probabilities reproduce the targets
  CHECK(std::abs(table.implied_prob(0) - table.prob(0)) < 1e-3);
  CHECK(std::abs(table.implied_prob(1) - table.prob(1)) < 1e-3);
}

TEST_CASE("noise table symmetric and degenerate cases") {
  Vocabulary v;
  v.words = {"a", "b"};
  v.counts = {5, 5};
  v.total_tokens = 10;
  v.rebuild_index();
  auto t = build_noise_table(v);
  CHECK(t.prob(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.prob(1) == doctest::Approx(0.5).epsilon(1e-12));

  Vocabulary one;
  one.words = {"a"};
  one.counts = {1};
  one.total_tokens = 1;
  one.rebuild_index();
  auto t1 = build_noise_table(one);
  CHECK(t1.prob(0) == doctest::Approx(1.0));
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(t1.sample(rng) == 0);
}

TEST_CASE("noise table probabilities sum to one and empirics match") {
  Vocabulary v;
  v.words = {"a", "b", "c", "d", "e"};
  v.counts = {1000, 400, 90, 33, 20};
  v.total_tokens = 1543;
  v.rebuild_index();
  auto table = build_noise_table(v);

  double sum = 0, sum_implied = 0;
  for (WordId w = 0; w < v.size(); ++w) {
    sum += table.prob(w);
    sum_implied += table.implied_prob(w);
    CHECK(std::abs(table.implied_prob(w) - table.prob(w)) < 1e-3);
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK(std::abs(sum_implied - 1.0) < 1e-9);

  // 10^6 draws: each word within 3 standard errors (fixed seed)
  const size_t n = 1'000'000;
  std::vector<size_t> hits(v.size(), 0);
  Rng rng(99);
  for (size_t i = 0; i < n; ++i) ++hits[table.sample(rng)];
  for (WordId w = 0; w < v.size(); ++w) {
    const double p = table.prob(w);
    const double se = std::sqrt(p * (1 - p) / double(n));
    CHECK(std::abs(double(hits[w]) / double(n) - p) <= 3 * se);
  }
}

TEST_CASE("sample_window truncates at boundaries and skips the center") {
  Vocabulary v = build_vocab(toks({"w0", "w1", "w2"}), 1);
  auto enc = encode(toks({"w0", "w1", "w2"}), v);

  std::vector<WordId> out;
  gather_window(enc.sentence(0), 0, 2, out);  // R drawn = 2 at position 0
  CHECK(out == std::vector<WordId>{enc.tokens[1], enc.tokens[2]});

  gather_window(enc.sentence(0), 1, 2, out);
  CHECK(out.size() == 2);  // both sides, truncated to sentence

  // middle of a length-5 sentence with R=2: both neighbors on each side
  auto v5 = build_vocab(toks({"a", "b", "c", "d", "e"}), 1);
  auto enc5 = encode(toks({"a", "b", "c", "d", "e"}), v5);
  gather_window(enc5.sentence(0), 2, 2, out);
  REQUIRE(out.size() == 4);
  CHECK(out == std::vector<WordId>{enc5.tokens[0], enc5.tokens[1],
                                   enc5.tokens[3], enc5.tokens[4]});
}

TEST_CASE("sample_window draws R uniformly from {1..N}") {
  // chi^2 over 1e5 draws, 5 bins; reject only below p=0.01 (crit 13.2767)
  std::vector<std::string> tokens(11, "t");
  for (size_t i = 0; i < tokens.size(); ++i) tokens[i] += char('a' + i);
  auto v = build_vocab(tokens, 1);
  auto enc = encode(tokens, v);

  const uint32_t N = 5;
  const size_t draws = 100'000;
  std::vector<size_t> hist(N + 1, 0);
  Rng rng(7);
  for (size_t i = 0; i < draws; ++i) {
    auto ctx = sample_window(5, enc, N, rng);  // center of 11 tokens
    REQUIRE(ctx.size() % 2 == 0);              // away from boundaries
    ++hist[ctx.size() / 2];                    // |ctx| = 2R here
  }
  const double expect = double(draws) / N;
  double chi2 = 0;
  for (uint32_t r = 1; r <= N; ++r)
    chi2 += (double(hist[r]) - expect) * (double(hist[r]) - expect) / expect;
  CHECK(chi2 < 13.2767);
}

TEST_CASE("sample_window length and range invariants") {
  std::vector<std::string> tokens;
  for (int i = 0; i < 50; ++i) tokens.push_back("w" + std::to_string(i % 7));
  auto v = build_vocab(tokens, 1);
  auto enc = encode(tokens, v);
  Rng rng(3);
  for (uint64_t pos = 0; pos < enc.size(); ++pos) {
    auto ctx = sample_window(pos, enc, 5, rng);
    CHECK(ctx.size() <= 10);
    for (WordId id : ctx) CHECK(id < v.size());
  }
  // single-token sentence: empty context
  std::istringstream in("alone\n");
  Vocabulary valone = build_vocab(toks({"alone"}), 1);
  auto enc1 = encode(in, valone);
  auto ctx = sample_window(0, enc1, 5, rng);
  CHECK(ctx.empty());
}

TEST_CASE("sample_negatives draws S per context word") {
  Vocabulary v = build_vocab(toks({"a", "a", "b", "c"}), 1);
  auto table = build_noise_table(v);
  Rng rng(5);

  auto n4 = sample_negatives(std::vector<WordId>{0, 1, 2, 0}, 1, table, rng);
  CHECK(n4.size() == 4);
  auto n6 = sample_negatives(std::vector<WordId>{0, 1, 2}, 2, table, rng);
  CHECK(n6.size() == 6);

  Vocabulary one;
  one.words = {"only"};
  one.counts = {4};
  one.total_tokens = 4;
  one.rebuild_index();
  auto t1 = build_noise_table(one);
  auto ns = sample_negatives(std::vector<WordId>{0, 0}, 3, t1, rng);
  REQUIRE(ns.size() == 6);
  for (WordId id : ns) CHECK(id == 0);
}
