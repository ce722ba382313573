// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hdix/similarity.h"
#include "test_util.h"

using namespace hdix;
using testutil::basis_set;

TEST_CASE("symmetric similarity averages the two directions") {
  CHECK(symmetric_similarity(31, 32) == 31.5);
  CHECK(symmetric_similarity(0, 0) == 0.0);
  CHECK(symmetric_similarity(16, 16) == 16.0);
  CHECK(symmetric_similarity(3, 4) == 3.5);
  CHECK_THROWS_AS(symmetric_similarity(-1, 4), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_similarity(4, -1), std::invalid_argument);
}

TEST_CASE("randomized count tables stay symmetric and additive") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> counts(0, 2000);

  for (int trial = 0; trial < 1000; ++trial) {
    const int x = counts(rng);
    const int y = counts(rng);
    CHECK(symmetric_similarity(x, y) == symmetric_similarity(y, x));

    // Summing per-member similarities is the same over any partition.
    double whole = 0, part1 = 0, part2 = 0;
    for (int member = 0; member < 8; ++member) {
      const double m = symmetric_similarity(counts(rng), counts(rng));
      whole += m;
      (member < 3 ? part1 : part2) += m;
    }
    CHECK(whole == part1 + part2);  // exact: members are integer halves
  }
}

TEST_CASE("match reports carry both directions") {
  // Two copies of the same descriptor collapse under the ratio test in one
  // direction only.
  const auto a = basis_set("a", {0, 0});
  const auto b = basis_set("b", {0, 5});

  const MatchReport report = make_match_report("a", "b", a, b);
  CHECK(report.id_a == "a");
  CHECK(report.id_b == "b");
  CHECK(report.m_ab == 2);
  CHECK(report.m_ba == 0);
  CHECK(report.symmetric == 1.0);
}

TEST_CASE("class similarity sums member reports") {
  const auto query = basis_set("q", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto member1 = basis_set("m1", {0, 1, 2, 3, 4, 5});
  const auto member2 = basis_set("m2", {6, 7});

  const ClassScore score = class_similarity(query, "g", {&member1, &member2});
  CHECK(score.class_id == "g");
  CHECK(score.member_count == 2);
  CHECK(score.score == 8.0);  // 6 + 2, exact in both directions

  const ClassScore self = class_similarity(query, "self", {&query});
  CHECK(self.score == double(sift::match(query, query).size()));

  const ClassScore empty = class_similarity(query, "none", {});
  CHECK(empty.member_count == 0);
  CHECK(empty.score == 0.0);
}

TEST_CASE("assign class follows the scoring rules") {
  std::vector<ClassScore> scores = {{"g1", 3, 40.0}, {"g2", 2, 12.0}};
  CHECK(assign_class(scores) == std::string("g1"));

  std::vector<ClassScore> tied = {{"b", 1, 7.0}, {"a", 1, 7.0}};
  CHECK(assign_class(tied) == std::string("a"));

  std::vector<ClassScore> zeros = {{"g1", 3, 0.0}, {"g2", 2, 0.0}};
  CHECK(!assign_class(zeros).has_value());

  CHECK_THROWS_AS(assign_class({}), std::invalid_argument);

  // Scaling every score preserves the winner.
  std::vector<ClassScore> scaled = scores;
  for (auto& s : scaled) s.score *= 3.0;
  CHECK(assign_class(scaled) == assign_class(scores));
}
