// Copyright 2026 The mitrainer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace mitrainer {

/// Specialize with `static constexpr std::array<std::string_view, N> names`
/// listed in enumerator order. Enumerators must be 0..N-1.
template <typename E>
struct EnumNames;

template <typename E>
constexpr std::size_t enum_count() noexcept {
  return EnumNames<E>::names.size();
}

template <typename E>
constexpr std::string_view enum_name(E value) noexcept {
  const auto index = static_cast<std::size_t>(value);
  return index < enum_count<E>() ? EnumNames<E>::names[index] : std::string_view{"?"};
}

template <typename E>
constexpr std::optional<E> parse_enum(std::string_view text) noexcept {
  for (std::size_t i = 0; i < enum_count<E>(); ++i) {
    if (EnumNames<E>::names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <typename E>
constexpr std::array<E, EnumNames<E>::names.size()> enum_values() noexcept {
  std::array<E, EnumNames<E>::names.size()> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
  return out;
}

}  // namespace mitrainer
