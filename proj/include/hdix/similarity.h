// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hdix/sift.h"

namespace hdix {

/// Directed match counts for one image pair and their symmetric mean.
struct MatchReport {
  std::string id_a;
  std::string id_b;
  int m_ab = 0;
  int m_ba = 0;
  double symmetric = 0;
};

// (m_ab + m_ba) / 2, half-integers permitted.
double symmetric_similarity(int m_ab, int m_ba);

MatchReport make_match_report(const std::string& id_a, const std::string& id_b,
                              const sift::KeypointSet& a, const sift::KeypointSet& b,
                              const sift::MatchRule& rule = {});

struct ClassScore {
  std::string class_id;
  int member_count = 0;
  double score = 0;  // sum of symmetric similarities over the members
};

ClassScore class_similarity(const sift::KeypointSet& query, const std::string& class_id,
                            const std::vector<const sift::KeypointSet*>& members,
                            const sift::MatchRule& rule = {});

// Argmax of the scores; ties go to the lexicographically smallest class id,
// and all-zero scores yield no class at all.
std::optional<std::string> assign_class(const std::vector<ClassScore>& scores);

}  // namespace hdix
