#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cafde/codes.hpp"

using namespace cafde;

TEST_CASE("regular ensemble validation and design rate") {
  CHECK(RegularEnsemble(3, 6).design_rate() == doctest::Approx(0.5));
  CHECK(RegularEnsemble(3, 9).design_rate() == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(RegularEnsemble(1, 6), std::invalid_argument);
  CHECK_THROWS_AS(RegularEnsemble(6, 6), std::invalid_argument);
}

TEST_CASE("the reference (3,6,5) chain") {
  const Protograph p = Protograph::coupled(3, 6, 5);
  CHECK(p.chain_length() == 5);
  CHECK(p.k() == 2);
  CHECK(p.dhat() == 1);
  CHECK(p.num_checks() == 7);
  CHECK(p.num_variables() == 10);
  CHECK(p.design_rate() == doctest::Approx(0.3));

  // boundary checks carry proportionally reduced degree
  std::vector<int> degrees;
  int total = 0;
  for (int a = 0; a < p.num_checks(); ++a) {
    degrees.push_back(p.check_degree(a));
    total += p.check_degree(a);
  }
  CHECK(degrees == std::vector<int>{2, 4, 6, 6, 6, 4, 2});
  // edge count from the variable side equals the check side
  CHECK(total == p.chain_length() * p.k() * p.dl());

  // every bundle connects to exactly dl checks, window i..i+2*dhat
  for (int i = 0; i < p.chain_length(); ++i)
    for (int w = 0; w < p.dl(); ++w) CHECK(p.check_of_slot(i, w) == i + w);
}

TEST_CASE("degenerate short chain keeps its structure but loses rate") {
  const Protograph p = Protograph::coupled(3, 6, 1);
  CHECK(p.num_checks() == 3);
  CHECK(p.design_rate() == doctest::Approx(-0.5));
}

TEST_CASE("design rate increases with L toward the uncoupled rate") {
  double prev = -1.0;
  for (int L : {5, 10, 20, 50, 200}) {
    const double rate = Protograph::coupled(3, 6, L).design_rate();
    CHECK(rate > prev);
    prev = rate;
  }
  CHECK(Protograph::coupled(3, 6, 100000).design_rate() == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("constructor names the violated integrality constraint") {
  try {
    Protograph::coupled(3, 7, 5);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("divisible") != std::string::npos);
  }
  try {
    Protograph::coupled(4, 8, 5);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("odd") != std::string::npos);
  }
}

TEST_CASE("uncoupled base protograph recovers the regular ensemble") {
  const Protograph p = Protograph::uncoupled(3, 6);
  CHECK(p.num_checks() == 1);
  CHECK(p.check_degree(0) == 6);
  CHECK(p.design_rate() == doctest::Approx(0.5));
  CHECK(p.check_incidence(0).size() == 3);  // three slots, k parallel edges each
}

TEST_CASE("configuration-model sample has exact degrees and no double edges") {
  const CodeInstance code = sample_code(RegularEnsemble(3, 6), 1024, 7);
  CHECK(code.block_length() == 1024);
  CHECK(code.num_checks() == 512);
  for (const auto& nbrs : code.var_neighbors()) CHECK(nbrs.size() == 3);
  for (const auto& nbrs : code.check_neighbors()) {
    CHECK(nbrs.size() == 6);
    for (std::size_t i = 1; i < nbrs.size(); ++i) CHECK(nbrs[i] > nbrs[i - 1]);  // sorted, distinct
  }
}

TEST_CASE("same seed gives a bit-identical instance") {
  const CodeInstance a = sample_code(RegularEnsemble(3, 6), 256, 11);
  const CodeInstance b = sample_code(RegularEnsemble(3, 6), 256, 11);
  const CodeInstance c = sample_code(RegularEnsemble(3, 6), 256, 12);
  std::ostringstream sa, sb, sc;
  a.serialize(sa);
  b.serialize(sb);
  c.serialize(sc);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() != sc.str());
}

TEST_CASE("generator rows are codewords") {
  const CodeInstance code = sample_code(RegularEnsemble(3, 6), 256, 3);
  const auto gen = code.generator_rows();
  CHECK(static_cast<int>(gen.size()) == code.dimension());
  CHECK(code.dimension() >= code.block_length() - code.num_checks());
  for (const auto& row : gen) CHECK(code.satisfies_checks(row));
}

TEST_CASE("sampled codewords satisfy the checks and stay uniform per bit") {
  const CodeInstance code = sample_code(RegularEnsemble(3, 6), 128, 21);
  Rng rng(55);
  const int draws = 10000;
  std::vector<int> ones(code.block_length(), 0);
  BitVector prev;
  for (int i = 0; i < draws; ++i) {
    BitVector z = code.sample_codeword(rng);
    CHECK(code.satisfies_checks(z));
    if (i == 1) {
      // linearity: the xor of two codewords is a codeword
      BitVector x = z;
      x.xor_with(prev);
      CHECK(code.satisfies_checks(x));
    }
    prev = z;
    for (int t = 0; t < code.block_length(); ++t) ones[t] += z.get(t);
  }
  // each marginal within 4 standard errors of 1/2
  const double se = std::sqrt(0.25 / draws);
  for (int t = 0; t < code.block_length(); ++t)
    CHECK(std::fabs(static_cast<double>(ones[t]) / draws - 0.5) < 4.0 * se);
}

TEST_CASE("all-zero message maps to the all-zero codeword") {
  // generator rows with no row selected = zero vector; check it is a codeword
  const CodeInstance code = sample_code(RegularEnsemble(3, 6), 64, 4);
  CHECK(code.satisfies_checks(BitVector(64)));
}

TEST_CASE("protograph lift preserves degrees exactly") {
  const Protograph p = Protograph::coupled(3, 6, 5);
  const CodeInstance code = sample_code(p, 64, 13);
  CHECK(code.block_length() == 10 * 64);
  CHECK(code.num_checks() == 7 * 64);
  for (const auto& nbrs : code.var_neighbors()) CHECK(nbrs.size() == 3);
  for (int a = 0; a < p.num_checks(); ++a)
    for (int c = 0; c < 64; ++c)
      CHECK(static_cast<int>(code.check_neighbors()[a * 64 + c].size()) == p.check_degree(a));
}

TEST_CASE("serialization round trip") {
  const CodeInstance code = sample_code(RegularEnsemble(3, 6), 128, 9);
  std::stringstream ss;
  code.serialize(ss);
  const CodeInstance parsed = CodeInstance::parse(ss);
  CHECK(parsed.block_length() == code.block_length());
  CHECK(parsed.check_neighbors() == code.check_neighbors());
  CHECK(parsed.dimension() == code.dimension());
}

TEST_CASE("lift of the uncoupled base graph needs a big enough lift") {
  // lift 1 keeps the base graph's parallel edges: must fail loudly
  CHECK_THROWS_AS(sample_code(Protograph::uncoupled(3, 6), 1, 2), std::runtime_error);
  const CodeInstance ok = sample_code(Protograph::uncoupled(3, 6), 32, 2);
  for (const auto& nbrs : ok.var_neighbors()) CHECK(nbrs.size() == 3);
}
