#ifndef ACTIVEVIEW_ENV_EPISODE_HPP_
#define ACTIVEVIEW_ENV_EPISODE_HPP_

#include <random>
#include <vector>

#include "activeview/numcore/types.hpp"

namespace activeview {

/// Running state of one sample's inference episode. The horizon is always the
/// number of views.
struct EpisodeState {
  Index sample = 0;
  std::vector<Index> visited;  // v_1 .. v_t in visiting order
  std::vector<bool> seen;      // seen[v] iff v appears in visited
  VectorXd hidden_e;           // carried aggregator states, empty until set
  VectorXd hidden_s;

  Index step() const { return static_cast<Index>(visited.size()); }
  Index horizon() const { return static_cast<Index>(seen.size()); }
  bool done() const { return step() >= horizon(); }
};

/// Starts an episode at a view drawn uniformly from all `view_count` views.
EpisodeState episode_reset(Index sample, Index view_count, std::mt19937_64& rng);

/// Appends `view`. Throws EpisodeCompleteError at the horizon and
/// DuplicateViewError on a revisit unless duplicates are allowed.
void episode_step(EpisodeState& state, Index view, bool allow_duplicates);

/// A uniformly random unseen view (any view when allow_duplicates).
Index random_next_view(const EpisodeState& state, bool allow_duplicates, std::mt19937_64& rng);

/// Uniformly random permutation of 0..view_count-1.
std::vector<Index> random_permutation(Index view_count, std::mt19937_64& rng);

/// Uniform integer in [0, n) drawn with std::uniform_int_distribution.
Index uniform_index(Index n, std::mt19937_64& rng);

}  // namespace activeview

#endif  // ACTIVEVIEW_ENV_EPISODE_HPP_
