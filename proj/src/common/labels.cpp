#include "affect/labels.hpp"

namespace affect {

std::optional<std::size_t> emotion_index(std::string_view label) {
  for (std::size_t i = 0; i < kEmotionLabels.size(); ++i) {
    if (kEmotionLabels[i] == label) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace affect
