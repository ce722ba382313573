// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdix/similarity.h"

#include <stdexcept>

namespace hdix {

double symmetric_similarity(int m_ab, int m_ba) {
  if (m_ab < 0 || m_ba < 0) throw std::invalid_argument("match counts must be non-negative");
  return (m_ab + m_ba) / 2.0;
}

MatchReport make_match_report(const std::string& id_a, const std::string& id_b,
                              const sift::KeypointSet& a, const sift::KeypointSet& b,
                              const sift::MatchRule& rule) {
  MatchReport report;
  report.id_a = id_a;
  report.id_b = id_b;
  report.m_ab = int(sift::match(a, b, rule).size());
  report.m_ba = int(sift::match(b, a, rule).size());
  report.symmetric = symmetric_similarity(report.m_ab, report.m_ba);
  return report;
}

ClassScore class_similarity(const sift::KeypointSet& query, const std::string& class_id,
                            const std::vector<const sift::KeypointSet*>& members,
                            const sift::MatchRule& rule) {
  ClassScore score;
  score.class_id = class_id;
  score.member_count = int(members.size());
  for (const sift::KeypointSet* member : members) {
    const int m_qm = int(sift::match(query, *member, rule).size());
    const int m_mq = int(sift::match(*member, query, rule).size());
    score.score += symmetric_similarity(m_qm, m_mq);
  }
  return score;
}

std::optional<std::string> assign_class(const std::vector<ClassScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("at least one class is required");
  const ClassScore* best = nullptr;
  for (const ClassScore& s : scores) {
    if (!best || s.score > best->score ||
        (s.score == best->score && s.class_id < best->class_id))
      best = &s;
  }
  if (best->score <= 0) return std::nullopt;
  return best->class_id;
}

}  // namespace hdix
