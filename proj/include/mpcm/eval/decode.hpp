#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mpcm/model/model.hpp"

namespace mpcm::eval {

struct SpanPrediction {
  std::string id;
  int begin = 0;  // 1-based token indices, begin <= end
  int end = 0;
  std::string answer;       // original passage characters under the span
  double joint_prob = 0.0;  // p_begin[begin] * p_end[end]
};

// Argmax of p_begin[b] * p_end[e] over pairs b <= e (and e - b <
// max_span_len when the cap is set; 0 disables it). Single left-to-right
// scan tracking the running best begin, O(N); ties resolve to the smallest
// b, then the smallest e, exactly as pair-order enumeration would.
// Returned indices are 1-based.
std::pair<int, int> decode_span(const std::vector<real_t>& p_begin,
                                const std::vector<real_t>& p_end, int max_span_len = 0);

std::pair<int, int> decode_span(const model::BoundaryDistributions& dists, int max_span_len = 0);

}  // namespace mpcm::eval
