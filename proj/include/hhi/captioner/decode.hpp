#pragma once

#include <string>
#include <vector>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/serde.hpp"

namespace hhi::captioner {

inline constexpr int kDefaultBeamWidth = 32;

/// The k best beams of a width-`width` beam search, best first.
inline std::vector<std::string> decode_topk(const CaptionerModel& model, const std::string& image_ref,
                                            int width, int k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k > width) throw ValidationError("k=" + std::to_string(k) + " exceeds beam width " + std::to_string(width));
  auto set = model.decode(image_ref, width);
  set.validate();
  std::vector<std::string> out;
  for (int i = 0; i < k && i < static_cast<int>(set.beams.size()); ++i) out.push_back(set.beams[i].text);
  return out;
}

/// Row of a predictions file: the contract between captioners (or any
/// external predictor) and the metric suite.
struct Prediction {
  std::string sample_id;
  std::vector<Beam> beams;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline void to_json(Json& j, const Prediction& p) { j = Json{{"sample_id", p.sample_id}, {"beams", p.beams}}; }

inline void from_json(const Json& j, Prediction& p) {
  p.sample_id = json_detail::get_required<std::string>(j, "sample_id");
  p.beams = json_detail::get_required<std::vector<Beam>>(j, "beams");
  if (p.beams.empty()) throw ValidationError("prediction '" + p.sample_id + "' has no beams");
  for (std::size_t i = 1; i < p.beams.size(); ++i)
    if (p.beams[i].score > p.beams[i - 1].score)
      throw ValidationError("prediction '" + p.sample_id + "' beams are not sorted by score");
}

struct DecodeRequest {
  std::string sample_id;
  std::string image_ref;
};

inline std::vector<Prediction> decode_all(const CaptionerModel& model, const std::vector<DecodeRequest>& items,
                                          int width = kDefaultBeamWidth, std::size_t workers = 1) {
  return parallel_map(items.size(), workers, [&](std::size_t i) {
    auto set = model.decode(items[i].image_ref, width);
    set.validate();
    return Prediction{items[i].sample_id, std::move(set.beams)};
  });
}

}  // namespace hhi::captioner
