#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

/// Raised when an insert cannot fit even after evicting every unpinned node.
class CacheFull : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One eviction: the tail of `prefix` starting at `keep_len` is gone.
struct Evicted {
  TokenSeq prefix;
  std::int64_t keep_len = 0;
  std::int64_t tokens = 0;
};

/// Token-level radix tree.
///
/// A local tree models one worker's KV prefix cache: it enforces a token
/// budget, pins paths used by running requests and evicts unpinned leaves
/// in LRU order. A global tree is a routing index: no budget, and every
/// node carries the set of workers believed to cache it, each tagged with
/// the time it was last inserted there.
class RadixCache {
 public:
  struct Node {
    TokenSeq edge;
    std::map<Token, std::unique_ptr<Node>> children;
    Node* parent = nullptr;
    std::int64_t ref_count = 0;
    SimTime last_access;
    std::uint64_t id = 0;
    std::int64_t depth = 0;  // path length through the end of `edge`
    std::map<WorkerId, SimTime> workers;

    bool is_leaf() const { return children.empty(); }
  };

  struct Match {
    std::int64_t length = 0;
    Node* node = nullptr;  // deepest matched node; the root when length == 0
  };

  struct Peek {
    std::int64_t length = 0;
    std::int64_t pinned_length = 0;
  };

  struct Insertion {
    std::int64_t newly_cached = 0;
    Node* node = nullptr;  // node ending at the full inserted path
    std::vector<Evicted> evicted;
  };

  struct WorkerMatch {
    std::int64_t length = 0;
    std::vector<WorkerId> workers;
  };

  /// Local tree with a token budget.
  explicit RadixCache(std::int64_t capacity_tokens);
  /// Global routing index: unbounded, tracks worker sets.
  static RadixCache global_index();

  RadixCache(RadixCache&&) noexcept = default;
  RadixCache& operator=(RadixCache&&) noexcept = default;

  /// Longest cached prefix. Splits the divergent edge so the match ends on
  /// a node boundary, and refreshes last_access along the matched path.
  Match match_prefix(TokenView tokens, SimTime now);

  /// Side-effect-free match; also reports how much of it is pinned.
  Peek peek(TokenView tokens) const;

  /// Ensures the whole path is cached. Evicts LRU leaves when the budget
  /// requires it and throws CacheFull if pinned nodes leave no room.
  Insertion insert(TokenView tokens, SimTime now, std::optional<WorkerId> worker = std::nullopt);

  /// Pin / unpin the root path ending at `node`.
  void pin(Node* node);
  void unpin(Node* node);

  /// Frees at least `needed` tokens if possible; the last leaf is trimmed
  /// from its tail so no more than `needed` tokens go.
  std::vector<Evicted> evict_lru(std::int64_t needed);

  WorkerMatch longest_match_workers(TokenView tokens) const;

  /// Drops `worker` from every node of `prefix` deeper than `keep_len`,
  /// unless the worker was re-inserted there after `evicted_at`. Nodes left
  /// without workers are pruned. Unknown prefixes are ignored.
  void evict_notify(TokenView prefix, WorkerId worker, std::int64_t keep_len = 0,
                    SimTime evicted_at = SimTime::max());

  std::int64_t capacity() const { return capacity_; }
  std::int64_t used_tokens() const { return used_; }
  std::int64_t pinned_tokens() const { return pinned_; }
  std::size_t node_count() const;
  bool is_global() const { return global_; }

  TokenSeq path_of(const Node* node) const;

  /// Deterministic pre-order listing: path, ref_count, workers, last_access.
  std::string dump() const;

  /// Empty when every structural invariant holds, else the first violation.
  std::string check_invariants() const;

 private:
  RadixCache(std::int64_t capacity, bool global);

  Node* split(Node* node, std::size_t head_len);
  void remove_leaf(Node* leaf);
  void prune_upward(Node* node);

  std::unique_ptr<Node> root_;
  std::int64_t capacity_;
  bool global_;
  std::int64_t used_ = 0;
  std::int64_t pinned_ = 0;
  std::uint64_t next_id_ = 1;
};

}  // namespace fairsched
