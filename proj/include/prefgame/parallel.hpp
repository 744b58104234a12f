#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <vector>

#include <omp.h>

#include "prefgame/game.hpp"

namespace prefgame {

// Results land at their index, so the parallel and serial maps return identical vectors
// for pure `fn`. The first exception (lowest index) is rethrown after the loop.
template <class Fn>
auto serial_map(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
  return out;
}

template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      slots[static_cast<std::size_t>(i)].emplace(fn(static_cast<std::size_t>(i)));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// Duality gap of each policy. The serial version is the reference.
inline std::vector<double> batch_duality_gaps_serial(const PreferenceGame& game, std::span<const Policy> policies) {
  std::vector<double> out(policies.size());
  for (std::size_t k = 0; k < policies.size(); ++k) out[k] = duality_gap(game, policies[k]);
  return out;
}

inline std::vector<double> batch_duality_gaps_parallel(const PreferenceGame& game, std::span<const Policy> policies) {
  std::vector<double> out(policies.size());
  const auto n = static_cast<std::ptrdiff_t>(policies.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] = duality_gap(game, policies[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace prefgame
