#include "fairsched/radix_cache.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

namespace fairsched {

namespace {

std::size_t common_prefix(TokenView a, TokenView b) {
  std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

}  // namespace

RadixCache::RadixCache(std::int64_t capacity, bool global)
    : root_(std::make_unique<Node>()), capacity_(capacity), global_(global) {
  if (capacity < 0) throw InvalidArgument("cache capacity must be non-negative");
  root_->id = 0;
}

RadixCache::RadixCache(std::int64_t capacity_tokens) : RadixCache(capacity_tokens, false) {}

RadixCache RadixCache::global_index() {
  return RadixCache(std::numeric_limits<std::int64_t>::max(), true);
}

RadixCache::Node* RadixCache::split(Node* node, std::size_t head_len) {
  // `node` keeps the tail so that outstanding handles still name the same path.
  auto head = std::make_unique<Node>();
  Node* head_raw = head.get();
  head->edge.assign(node->edge.begin(), node->edge.begin() + static_cast<std::ptrdiff_t>(head_len));
  node->edge.erase(node->edge.begin(), node->edge.begin() + static_cast<std::ptrdiff_t>(head_len));
  head->parent = node->parent;
  head->ref_count = node->ref_count;
  head->last_access = node->last_access;
  head->workers = node->workers;
  head->depth = node->depth - static_cast<std::int64_t>(node->edge.size());
  head->id = next_id_++;

  Node* parent = node->parent;
  auto owned = std::move(parent->children[head->edge.front()]);
  owned->parent = head_raw;
  head->children.emplace(owned->edge.front(), std::move(owned));
  parent->children[head_raw->edge.front()] = std::move(head);
  return head_raw;
}

RadixCache::Match RadixCache::match_prefix(TokenView tokens, SimTime now) {
  Node* node = root_.get();
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    auto it = node->children.find(tokens[pos]);
    if (it == node->children.end()) break;
    Node* child = it->second.get();
    std::size_t n = common_prefix(child->edge, tokens.subspan(pos));
    if (n < child->edge.size()) child = split(child, n);
    child->last_access = now;
    node = child;
    pos += n;
  }
  return {static_cast<std::int64_t>(pos), node};
}

RadixCache::Peek RadixCache::peek(TokenView tokens) const {
  const Node* node = root_.get();
  std::size_t pos = 0;
  std::int64_t pinned = 0;
  while (pos < tokens.size()) {
    auto it = node->children.find(tokens[pos]);
    if (it == node->children.end()) break;
    const Node* child = it->second.get();
    std::size_t n = common_prefix(child->edge, tokens.subspan(pos));
    pos += n;
    if (child->ref_count > 0) pinned = static_cast<std::int64_t>(pos);
    if (n < child->edge.size()) break;
    node = child;
  }
  return {static_cast<std::int64_t>(pos), pinned};
}

void RadixCache::pin(Node* node) {
  for (; node != nullptr && node != root_.get(); node = node->parent) {
    if (node->ref_count++ == 0) pinned_ += static_cast<std::int64_t>(node->edge.size());
  }
}

void RadixCache::unpin(Node* node) {
  for (; node != nullptr && node != root_.get(); node = node->parent) {
    if (node->ref_count <= 0) throw std::logic_error("unpin of an unpinned radix node");
    if (--node->ref_count == 0) pinned_ -= static_cast<std::int64_t>(node->edge.size());
  }
}

RadixCache::Insertion RadixCache::insert(TokenView tokens, SimTime now,
                                         std::optional<WorkerId> worker) {
  Insertion result;
  Match m = match_prefix(tokens, now);
  auto fresh = static_cast<std::int64_t>(tokens.size()) - m.length;
  Node* end = m.node;

  if (fresh > 0) {
    if (!global_) {
      pin(m.node);
      if (pinned_ + fresh > capacity_) {
        unpin(m.node);
        throw CacheFull("cannot cache " + std::to_string(fresh) + " tokens: " +
                        std::to_string(pinned_) + " of " + std::to_string(capacity_) +
                        " tokens are pinned");
      }
      if (used_ + fresh > capacity_) result.evicted = evict_lru(used_ + fresh - capacity_);
      unpin(m.node);
    }
    auto leaf = std::make_unique<Node>();
    leaf->edge.assign(tokens.begin() + m.length, tokens.end());
    leaf->parent = m.node;
    leaf->last_access = now;
    leaf->depth = static_cast<std::int64_t>(tokens.size());
    leaf->id = next_id_++;
    end = leaf.get();
    m.node->children.emplace(leaf->edge.front(), std::move(leaf));
    used_ += fresh;
  }
  if (global_ && worker) {
    for (Node* n = end; n != root_.get(); n = n->parent) n->workers[*worker] = now;
  }
  result.newly_cached = fresh;
  result.node = end;
  return result;
}

void RadixCache::remove_leaf(Node* leaf) {
  Node* parent = leaf->parent;
  used_ -= static_cast<std::int64_t>(leaf->edge.size());
  if (leaf->ref_count > 0) pinned_ -= static_cast<std::int64_t>(leaf->edge.size());
  parent->children.erase(leaf->edge.front());
}

std::vector<Evicted> RadixCache::evict_lru(std::int64_t needed) {
  std::vector<Evicted> out;
  if (needed <= 0) return out;

  using Key = std::tuple<SimTime, std::uint64_t, Node*>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> leaves;
  std::function<void(Node*)> collect = [&](Node* n) {
    for (auto& [tok, child] : n->children) collect(child.get());
    if (n != root_.get() && n->is_leaf() && n->ref_count == 0) {
      leaves.emplace(n->last_access, n->id, n);
    }
  };
  collect(root_.get());

  std::int64_t freed = 0;
  while (freed < needed && !leaves.empty()) {
    Node* leaf = std::get<2>(leaves.top());
    leaves.pop();
    auto take = std::min<std::int64_t>(static_cast<std::int64_t>(leaf->edge.size()), needed - freed);
    if (take < static_cast<std::int64_t>(leaf->edge.size())) {
      split(leaf, leaf->edge.size() - static_cast<std::size_t>(take));
    }
    Evicted ev;
    ev.prefix = path_of(leaf);
    ev.keep_len = leaf->depth - take;
    ev.tokens = take;
    Node* parent = leaf->parent;
    remove_leaf(leaf);
    freed += take;
    out.push_back(std::move(ev));
    if (parent != root_.get() && parent->is_leaf() && parent->ref_count == 0) {
      leaves.emplace(parent->last_access, parent->id, parent);
    }
  }
  return out;
}

RadixCache::WorkerMatch RadixCache::longest_match_workers(TokenView tokens) const {
  const Node* node = root_.get();
  const Node* deepest = nullptr;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    auto it = node->children.find(tokens[pos]);
    if (it == node->children.end()) break;
    const Node* child = it->second.get();
    std::size_t n = common_prefix(child->edge, tokens.subspan(pos));
    pos += n;
    deepest = child;
    if (n < child->edge.size()) break;
    node = child;
  }
  WorkerMatch out;
  out.length = static_cast<std::int64_t>(pos);
  if (deepest != nullptr && pos > 0) {
    for (const auto& [w, t] : deepest->workers) out.workers.push_back(w);
  }
  return out;
}

void RadixCache::evict_notify(TokenView prefix, WorkerId worker, std::int64_t keep_len,
                              SimTime evicted_at) {
  auto affected = [&](const Node* n) {
    auto it = n->workers.find(worker);
    return it != n->workers.end() && it->second <= evicted_at;
  };

  Node* node = root_.get();
  Node* last = nullptr;
  std::size_t pos = 0;
  while (pos < prefix.size()) {
    auto it = node->children.find(prefix[pos]);
    if (it == node->children.end()) break;
    Node* child = it->second.get();
    std::size_t n = common_prefix(child->edge, prefix.subspan(pos));
    if (n == 0) break;
    if (n < child->edge.size()) {
      // The notice only covers part of this edge; split off what it names.
      if (!affected(child)) break;
      child = split(child, n);
    }
    std::int64_t start = child->depth - static_cast<std::int64_t>(child->edge.size());
    if (start < keep_len && child->depth > keep_len && affected(child)) {
      split(child, static_cast<std::size_t>(keep_len - start));
      start = keep_len;
    }
    if (start >= keep_len && affected(child)) child->workers.erase(worker);
    node = child;
    last = child;
    pos += n;
  }
  if (last != nullptr) prune_upward(last);
}

void RadixCache::prune_upward(Node* node) {
  while (node != nullptr && node != root_.get() && node->workers.empty() && node->is_leaf() &&
         node->ref_count == 0) {
    Node* parent = node->parent;
    remove_leaf(node);
    node = parent;
  }
}

std::size_t RadixCache::node_count() const {
  std::size_t count = 0;
  std::function<void(const Node*)> walk = [&](const Node* n) {
    ++count;
    for (const auto& [tok, child] : n->children) walk(child.get());
  };
  walk(root_.get());
  return count - 1;
}

TokenSeq RadixCache::path_of(const Node* node) const {
  std::vector<const Node*> chain;
  for (; node != nullptr && node != root_.get(); node = node->parent) chain.push_back(node);
  TokenSeq out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    out.insert(out.end(), (*it)->edge.begin(), (*it)->edge.end());
  }
  return out;
}

std::string RadixCache::dump() const {
  std::ostringstream os;
  std::function<void(const Node*, const std::string&)> walk = [&](const Node* n,
                                                                  const std::string& path) {
    for (const auto& [tok, child] : n->children) {
      std::string p = path;
      for (Token t : child->edge) p += (p.empty() ? "" : ",") + std::to_string(t);
      os << "[" << p << "] ref=" << child->ref_count << " access=" << child->last_access.us();
      if (global_) {
        os << " workers={";
        bool first = true;
        for (const auto& [w, t] : child->workers) {
          os << (first ? "" : ",") << w << "@" << t.us();
          first = false;
        }
        os << "}";
      }
      os << "\n";
      walk(child.get(), p);
    }
  };
  walk(root_.get(), "");
  return os.str();
}

std::string RadixCache::check_invariants() const {
  std::string err;
  std::int64_t used = 0;
  std::int64_t pinned = 0;
  std::function<void(const Node*)> walk = [&](const Node* n) {
    for (const auto& [tok, child] : n->children) {
      if (!err.empty()) return;
      if (child->edge.empty() || child->edge.front() != tok) {
        err = "child key does not match its edge";
        return;
      }
      if (child->parent != n) err = "broken parent link";
      if (child->ref_count < 0) err = "negative ref_count";
      if (n != root_.get() && child->ref_count > n->ref_count) err = "pinned node under unpinned parent";
      if (child->depth != n->depth + static_cast<std::int64_t>(child->edge.size())) err = "bad depth";
      if (global_) {
        for (const auto& [w, t] : child->workers) {
          if (n != root_.get() && !n->workers.contains(w)) err = "worker set not prefix-closed";
        }
      }
      used += static_cast<std::int64_t>(child->edge.size());
      if (child->ref_count > 0) pinned += static_cast<std::int64_t>(child->edge.size());
      walk(child.get());
    }
  };
  walk(root_.get());
  if (!err.empty()) return err;
  if (used != used_) return "used_tokens " + std::to_string(used_) + " != edge sum " + std::to_string(used);
  if (pinned != pinned_) return "pinned_tokens out of sync";
  if (!global_ && used_ > capacity_) return "budget exceeded";
  return {};
}

}  // namespace fairsched
