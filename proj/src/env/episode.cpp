#include "activeview/env/episode.hpp"

#include <algorithm>
#include <string>

#include "activeview/errors.hpp"

namespace activeview {

Index uniform_index(Index n, std::mt19937_64& rng) {
  if (n < 1) throw ParameterError("uniform_index: empty range");
  std::uniform_int_distribution<Index> dist(0, n - 1);
  return dist(rng);
}

EpisodeState episode_reset(Index sample, Index view_count, std::mt19937_64& rng) {
  if (view_count < 1) throw ParameterError("episode_reset: no views");
  EpisodeState state;
  state.sample = sample;
  state.seen.assign(static_cast<std::size_t>(view_count), false);
  const Index first = uniform_index(view_count, rng);
  state.visited.push_back(first);
  state.seen[first] = true;
  return state;
}

void episode_step(EpisodeState& state, Index view, bool allow_duplicates) {
  if (state.done())
    throw EpisodeCompleteError("episode_step: episode already has " + std::to_string(state.step()) + " views");
  if (view < 0 || view >= state.horizon()) throw IndexError("episode_step: view id out of range");
  if (!allow_duplicates && state.seen[view])
    throw DuplicateViewError("episode_step: view " + std::to_string(view) + " already visited");
  state.visited.push_back(view);
  state.seen[view] = true;
}

Index random_next_view(const EpisodeState& state, bool allow_duplicates, std::mt19937_64& rng) {
  if (allow_duplicates) return uniform_index(state.horizon(), rng);
  std::vector<Index> unseen;
  for (Index v = 0; v < state.horizon(); ++v)
    if (!state.seen[v]) unseen.push_back(v);
  if (unseen.empty()) throw EpisodeCompleteError("random_next_view: every view already visited");
  return unseen[uniform_index(static_cast<Index>(unseen.size()), rng)];
}

std::vector<Index> random_permutation(Index view_count, std::mt19937_64& rng) {
  std::vector<Index> order(static_cast<std::size_t>(view_count));
  for (Index v = 0; v < view_count; ++v) order[v] = v;
  // Fisher-Yates with uniform_index so the draw sequence is explicit.
  for (Index k = view_count - 1; k > 0; --k) std::swap(order[k], order[uniform_index(k + 1, rng)]);
  return order;
}

}  // namespace activeview
