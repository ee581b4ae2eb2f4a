#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "clusterlm/clustering.hpp"
#include "clusterlm/scoring.hpp"

using namespace clusterlm;

namespace {

ClusterModel tiny_model() {
  std::vector<EventSequence> seqs;
  seqs.push_back(extract_ngram_events({"s1", {"a", "b"}}, 2));
  seqs.push_back(extract_ngram_events({"s2", {"b", "a"}}, 2));
  seqs.push_back(extract_ngram_events({"s3", {"c"}}, 2));
  Clustering c;
  c.k = 2;
  c.ids = {"s1", "s2", "s3"};
  c.assignment = {0, 0, 1};
  return train_model(c, seqs, {EventMode::ngram, 2});
}

}  // namespace

TEST_CASE("model save/load round trip") {
  const ClusterModel m = tiny_model();
  std::ostringstream out;
  save_model(out, m);
  std::istringstream in(out.str());
  const ClusterModel loaded = load_model(in);
  CHECK(loaded.meta.mode == m.meta.mode);
  CHECK(loaded.meta.order == m.meta.order);
  REQUIRE(loaded.k() == m.k());
  for (std::size_t k = 0; k < m.k(); ++k) {
    CHECK(loaded.priors[k] == m.priors[k]);  // %.17g round-trips exactly
    CHECK(loaded.tables[k].event_count() == m.tables[k].event_count());
    for (const auto& [ctx, cc] : m.tables[k].contexts())
      for (const auto& [item, f] : cc.items)
        CHECK(loaded.tables[k].count({ctx, item}) == f);
    CHECK(loaded.tables[k].entropy_bits() ==
          doctest::Approx(m.tables[k].entropy_bits()).epsilon(1e-12));
  }
  // Saving the loaded model reproduces the bytes.
  std::ostringstream again;
  save_model(again, loaded);
  CHECK(again.str() == out.str());
}

TEST_CASE("model loader reports malformed input") {
  std::istringstream missing_header("0\t\ta\t1\n");
  CHECK_THROWS_AS(load_model(missing_header), std::runtime_error);
  std::istringstream bad_fields("# clusterlm model 1\n# mode ngram\n# order 1\n# k 1\n# priors 1\nnot-a-count-line\n");
  CHECK_THROWS_AS(load_model(bad_fields), std::runtime_error);
  std::istringstream bad_cluster(
      "# clusterlm model 1\n# mode ngram\n# order 1\n# k 1\n# priors 1\n7\t\ta\t1\n");
  CHECK_THROWS_AS(load_model(bad_cluster), std::runtime_error);
  std::istringstream bad_count(
      "# clusterlm model 1\n# mode ngram\n# order 1\n# k 1\n# priors 1\n0\t\ta\tmany\n");
  CHECK_THROWS_WITH_AS(load_model(bad_count),
                       "<model>:6: expected an integer, got `many`",
                       std::runtime_error);
}

TEST_CASE("clustering save/load round trip") {
  Clustering c;
  c.k = 3;
  c.seed = 42;
  c.mode = EventMode::rule;
  c.order = 2;
  c.fixed_point = false;
  c.rounds = 5;
  c.total_entropy_bits = 12.345678901234567;
  c.ids = {"s1", "s2", "s3", "s4"};
  c.assignment = {0, 2, 1, 0};
  std::ostringstream out;
  save_clustering(out, c);
  std::istringstream in(out.str());
  const Clustering loaded = load_clustering(in);
  CHECK(loaded.k == c.k);
  CHECK(loaded.seed == c.seed);
  CHECK(loaded.mode == c.mode);
  CHECK(loaded.order == c.order);
  CHECK(loaded.fixed_point == c.fixed_point);
  CHECK(loaded.rounds == c.rounds);
  CHECK(loaded.total_entropy_bits == c.total_entropy_bits);
  CHECK(loaded.ids == c.ids);
  CHECK(loaded.assignment == c.assignment);
}

TEST_CASE("clustering loader validates indices") {
  std::istringstream in("# clusterlm clustering 1\n# k 2\ns1\t5\n");
  CHECK_THROWS_AS(load_clustering(in), std::runtime_error);
  std::istringstream garbage("# clusterlm clustering 1\n# k 2\ns1\tnope\n");
  CHECK_THROWS_AS(load_clustering(garbage), std::runtime_error);
}
