#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "fibid/corpus.hpp"
#include "fibid/prover.hpp"
#include "fibid/trigraph.hpp"
#include "oracles.hpp"

using namespace fibid;

namespace {

Vec3 v3(long a, long b, long c) { return {Integer(a), Integer(b), Integer(c)}; }

const Vec3 e1 = v3(1, 0, 0), e2 = v3(0, 1, 0), e3 = v3(0, 0, 1);

// A random F-triple: a random walk through the children of the canonical seed.
Triple random_f_triple(oracle::Rng& rng) {
  Triple t = canonical_seed();
  const auto steps = rng.uniform(0, 12);
  for (std::int64_t s = 0; s < steps; ++s) t = children(t).triples[static_cast<std::size_t>(rng.uniform(0, 2))];
  return t;
}

// Is {|a|,|b|,|c|} equal to {|mn|, |m(m+n)|, |n(m+n)|} for some integers m, n?
bool in_parametrized_set(const Vec3& v) {
  std::multiset<long> want;
  long bound = 1;
  for (std::size_t i = 0; i < 3; ++i) {
    const long a = std::labs(v[i].get_si());
    want.insert(a);
    bound = std::max(bound, a);
  }
  for (long m = -bound; m <= bound; ++m)
    for (long n = -bound; n <= bound; ++n) {
      const std::multiset<long> got{std::labs(m * n), std::labs(m * (m + n)), std::labs(n * (m + n))};
      if (got == want) return true;
    }
  return false;
}

}  // namespace

TEST(FGenerate, Examples) {
  EXPECT_EQ(f_generate(e3, e2, e1), v3(-1, 2, 2));
  EXPECT_EQ(f_generate(v3(-1, 2, 2), e3, e2), v3(-2, 3, 6));
  const Vec3 a = v3(4, -7, 9);
  EXPECT_EQ(f_generate(a, a, a), Integer(3) * a);
}

TEST(FSequence, ZigzagVectors) {
  const auto seq = f_sequence(e1, e2, e3, 9);
  ASSERT_EQ(seq.size(), 9u);
  EXPECT_EQ(seq[3], v3(-1, 2, 2));
  EXPECT_EQ(seq[4], v3(-2, 3, 6));
  EXPECT_EQ(seq[5], v3(-6, 10, 15));
  EXPECT_EQ(seq[6], v3(-15, 24, 40));
  EXPECT_EQ(seq[7], v3(-40, 65, 104));
  EXPECT_EQ(seq[8], v3(-104, 168, 273));
  EXPECT_THROW(f_sequence(e1, e2, e3, 2), UsageError);
}

TEST(FSequence, ClosedFormForNineTerms) {
  const auto seq = f_sequence(e1, e2, e3, 9);
  for (std::int64_t j = 1; j <= 9; ++j) {
    const std::int64_t k = j - 3;
    const Vec3 want{-oracle::fib(k) * oracle::fib(k + 1), oracle::fib(k) * oracle::fib(k + 2),
                    oracle::fib(k + 1) * oracle::fib(k + 2)};
    EXPECT_EQ(seq[static_cast<std::size_t>(j - 1)], want) << "term " << j;
  }
}

TEST(FSequence, ConstantSeedMatchesScalarIteration) {
  const Vec3 a = v3(2, -1, 5);
  const auto seq = f_sequence(a, a, a, 14);
  std::vector<mpz_class> s{1, 1, 1};
  while (s.size() < 14) {
    const std::size_t n = s.size();
    s.push_back(2 * (s[n - 1] + s[n - 2]) - s[n - 3]);
  }
  for (std::size_t i = 0; i < 14; ++i) EXPECT_EQ(seq[i], Integer(s[i]) * a) << i;
}

TEST(IsFTriple, Examples) {
  EXPECT_TRUE(is_f_triple(Triple{e1, e2, e3}));
  EXPECT_TRUE(is_f_triple(Triple{v3(-1, 2, 2), e2, e3}));
  EXPECT_FALSE(is_f_triple(Triple{v3(1, 1, 0), e2, e3}));
  EXPECT_FALSE(is_f_triple(Triple{v3(-1, 0, 0), e2, e3}));
}

TEST(IsFTriple, StrictReadingNeedsSquareSums) {
  EXPECT_TRUE(is_f_triple(canonical_seed(), true));
  EXPECT_TRUE(is_f_triple(Triple{v3(-1, 2, 2), e2, e3}));
  EXPECT_FALSE(is_f_triple(Triple{v3(-1, 2, 2), e2, e3}, true));  // sum 3
}

TEST(HasSumNorm, NormCheckOnSixthVector) {
  const Vec3 v = v3(-6, 10, 15);
  EXPECT_EQ(v.norm2(), 361);
  EXPECT_EQ(v.sum(), 19);
  EXPECT_TRUE(has_sum_norm(v));
}

TEST(Children, Examples) {
  const Children c = children(Triple{e3, e2, e1});
  EXPECT_EQ(c.x, v3(-1, 2, 2));
  EXPECT_EQ(c.y, f_generate(e1, e2, e3));
  EXPECT_EQ(c.z, f_generate(e1, e3, e2));
  const Children s = children(Triple{e1, e1, e1});
  EXPECT_EQ(s.x, v3(3, 0, 0));
  EXPECT_EQ(s.y, v3(3, 0, 0));
  EXPECT_EQ(s.z, v3(3, 0, 0));
}

TEST(Children, DepthTwoExpansionIsAllFTriples) {
  for (const auto& n : expand_graph(canonical_seed(), 2)) EXPECT_TRUE(is_f_triple(n.triple));
}

TEST(ExpandGraph, DepthZeroAndOne) {
  const auto zero = expand_graph(canonical_seed(), 0);
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero[0].triple.key(), canonical_seed().key());
  EXPECT_FALSE(zero[0].parent);

  const auto one = expand_graph(canonical_seed(), 1);
  ASSERT_EQ(one.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(one[i].depth, 1u);
    EXPECT_EQ(one[i].parent, std::optional<std::size_t>(0));
    EXPECT_TRUE(is_f_triple(one[i].triple));
  }
}

TEST(ExpandGraph, ErrorsAndDedup) {
  EXPECT_THROW(expand_graph(Triple{v3(1, 1, 0), e2, e3}, 1), DomainError);
  EXPECT_THROW(expand_graph(canonical_seed(), kMaxGraphDepth + 1), UsageError);
  std::set<std::array<Vec3, 3>> keys;
  const auto nodes = expand_graph(canonical_seed(), 5);
  for (const auto& n : nodes) EXPECT_TRUE(keys.insert(n.triple.key()).second);
  // Parents precede their children and sit exactly one level up.
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    ASSERT_TRUE(nodes[i].parent);
    EXPECT_LT(*nodes[i].parent, i);
    EXPECT_EQ(nodes[*nodes[i].parent].depth + 1, nodes[i].depth);
  }
}

TEST(ExpandGraph, StreamingMatchesCollected) {
  std::size_t count = 0;
  expand_graph_stream(canonical_seed(), 4, [&](const TriGraphNode&, std::size_t index) { EXPECT_EQ(index, count++); });
  EXPECT_EQ(count, expand_graph(canonical_seed(), 4).size());
}

TEST(ExpandGraph, VectorsLieInParametrizedSet) {
  for (const auto& n : expand_graph(canonical_seed(), 4))
    for (const Vec3* v : {&n.triple.u, &n.triple.v, &n.triple.w}) EXPECT_TRUE(in_parametrized_set(*v)) << *v;
}

TEST(FTripleClosure, PropertyClosureAndNormIdentities) {
  oracle::Rng rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const Triple t = random_f_triple(rng);
    ASSERT_TRUE(is_f_triple(t));
    const Children c = children(t);
    for (const auto& child : c.triples) EXPECT_TRUE(is_f_triple(child)) << "trial " << trial;
    const Integer nu = t.u.sum(), nv = t.v.sum(), nw = t.w.sum();
    auto sq = [](const Integer& a) { return Integer(a * a); };
    EXPECT_EQ(c.x.norm2(), sq(2 * nu + 2 * nv - nw));
    EXPECT_EQ(c.y.norm2(), sq(2 * nw + 2 * nv - nu));
    EXPECT_EQ(c.z.norm2(), sq(2 * nw + 2 * nu - nv));
  }
}

TEST(FTripleClosure, EveryVectorSolvesSumOfSquares) {
  for (const auto& n : expand_graph(canonical_seed(), 6))
    for (const Vec3* v : {&n.triple.u, &n.triple.v, &n.triple.w}) EXPECT_EQ(v->norm2(), v->sum() * v->sum()) << *v;
}

TEST(PythagoreanParam, Examples) {
  EXPECT_EQ(pythagorean_param(1, 1), v3(-1, 2, 2));
  EXPECT_EQ(pythagorean_param(2, 3), v3(-6, 10, 15));
  EXPECT_EQ(pythagorean_param(0, 5), v3(0, 0, 25));
  for (long m = -6; m <= 6; ++m)
    for (long n = -6; n <= 6; ++n) {
      const Vec3 p = pythagorean_param(m, n);
      EXPECT_EQ(p.norm2(), p.sum() * p.sum()) << m << "," << n;
    }
}

TEST(FibTable, LookupAndFactoring) {
  const FibTable fib(90);
  EXPECT_EQ(fib.size(), 90u);
  EXPECT_EQ(fib[90], oracle::fib(90));
  EXPECT_EQ(fib.index_of(89), std::optional<std::size_t>(11));
  EXPECT_FALSE(fib.contains(4));
  const auto p = fib.product_of_two(273);
  ASSERT_TRUE(p);
  EXPECT_EQ(fib[p->first] * fib[p->second], 273);
  EXPECT_FALSE(fib.product_of_two(7 * 11));
}

TEST(Scan, CanonicalNineTerms) {
  const auto seq = f_sequence(e1, e2, e3, 9);
  EXPECT_EQ(seq[7] - seq[5], v3(-34, 55, 89));
  const ObservationReport rep = scan_observations(seq);
  for (const auto& f : rep.findings) EXPECT_TRUE(f.holds) << f.key << ": " << f.description;
  EXPECT_TRUE(rep.all_hold());
  EXPECT_FALSE(rep.closed_form_break);

  ASSERT_EQ(rep.fourth_powers.size(), 4u);
  const std::vector<std::array<long, 3>> want{{1, 15, 2}, {2, 40, 3}, {6, 104, 5}, {15, 273, 8}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rep.fourth_powers[i].a, want[i][0]);
    EXPECT_EQ(rep.fourth_powers[i].big_a, want[i][1]);
    EXPECT_EQ(rep.fourth_powers[i].base, want[i][2]);
  }

  // -1, -1-2-6, -1-2-6-15-40 are -1^2, -3^2, -8^2.
  bool from_e4_odd = false;
  for (const auto& pc : rep.first_entry_conventions) from_e4_odd |= pc.start == 4 && pc.lengths == "odd";
  EXPECT_TRUE(from_e4_odd);
}

TEST(Scan, ClosedFormContinuesOnLongSequence) {
  const auto seq = f_sequence(e1, e2, e3, 40);
  EXPECT_FALSE(scan_observations(seq).closed_form_break);
}

TEST(Scan, DetectsBrokenVector) {
  auto seq = f_sequence(e1, e2, e3, 9);
  seq[6] = v3(-15, 24, 41);
  const ObservationReport rep = scan_observations(seq);
  EXPECT_FALSE(rep.at("b").holds);
  EXPECT_FALSE(rep.all_hold());
  EXPECT_EQ(rep.closed_form_break, std::optional<std::size_t>(7));
  EXPECT_THROW((void)rep.at("nope"), UsageError);
}

// The scanner's patterns, stated as identities, are theorems.
TEST(GraphBridge, ObservationIdentitiesAreProved) {
  for (const auto& e : builtin_corpus()) {
    if (e.name.rfind("graph-", 0) != 0 && e.name != "gelin-cesaro") continue;
    const Verdict v = prove(e.identity());
    const auto* p = std::get_if<Proved>(&v);
    ASSERT_NE(p, nullptr) << e.name;
    EXPECT_TRUE(check_certificate(p->certificate).ok) << e.name;
  }
}
