#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace affect {

inline constexpr std::size_t kNumEmotions = 7;

/// Emotion labels in reporting order (most to least frequent in the shared
/// task's training data). Index i is bound to vocabulary id
/// text::kFirstLabelId + i.
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionLabels = {
    "sadness", "anger", "neutral", "fear", "surprise", "disgust", "joy"};

/// Index into kEmotionLabels, or nullopt for anything else. Exact match; callers
/// normalize case first.
std::optional<std::size_t> emotion_index(std::string_view label);

}  // namespace affect
