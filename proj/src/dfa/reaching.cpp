// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/dfa/reaching.hpp"

#include <deque>
#include <set>

#include "msivd/common/error.hpp"

namespace msivd::dfa {
namespace {

DefSet transfer(const GenKill& gk, std::size_t n, const DefSet& in) {
  return gk.gen[n] | (in - gk.kill[n]);
}

DefSet join(const std::vector<int>& preds, const std::vector<DefSet>& out, std::size_t ndefs) {
  DefSet acc(ndefs);
  for (int p : preds) acc |= out[static_cast<std::size_t>(p)];
  return acc;
}

template <typename Worklist>
ReachSets solve(const ControlFlowGraph& cfg, Worklist& work) {
  ReachSets r;
  r.definitions = collect_definitions(cfg);
  const std::size_t nd = r.definitions.size();
  const std::size_t nn = cfg.size();
  const auto gk = gen_kill(cfg, r.definitions);
  const auto succ = cfg.successors();
  const auto pred = cfg.predecessors();
  r.in.assign(nn, DefSet(nd));
  r.out.assign(nn, DefSet(nd));
  for (std::size_t n = 0; n < nn; ++n) r.out[n] = gk.gen[n];

  while (!work.empty()) {
    const auto n = static_cast<std::size_t>(work.pop());
    r.in[n] = join(pred[n], r.out, nd);
    DefSet next = transfer(gk, n, r.in[n]);
    if (next != r.out[n]) {
      r.out[n] = std::move(next);
      for (int s : succ[n]) work.push(s);
    }
  }
  return r;
}

class FifoWork {
 public:
  explicit FifoWork(std::size_t n) : queued_(n, true) {
    for (std::size_t i = 0; i < n; ++i) q_.push_back(static_cast<int>(i));
  }
  bool empty() const { return q_.empty(); }
  int pop() {
    const int n = q_.front();
    q_.pop_front();
    queued_[static_cast<std::size_t>(n)] = false;
    return n;
  }
  void push(int n) {
    if (queued_[static_cast<std::size_t>(n)]) return;
    queued_[static_cast<std::size_t>(n)] = true;
    q_.push_back(n);
  }

 private:
  std::deque<int> q_;
  std::vector<bool> queued_;
};

class PriorityWork {
 public:
  explicit PriorityWork(std::span<const int> priority) : priority_(priority) {
    for (std::size_t i = 0; i < priority.size(); ++i) set_.emplace(priority[i], static_cast<int>(i));
  }
  bool empty() const { return set_.empty(); }
  int pop() {
    const int n = set_.begin()->second;
    set_.erase(set_.begin());
    return n;
  }
  void push(int n) { set_.emplace(priority_[static_cast<std::size_t>(n)], n); }

 private:
  std::span<const int> priority_;
  std::set<std::pair<int, int>> set_;
};

}  // namespace

GenKill gen_kill(const ControlFlowGraph& cfg, std::span<const Definition> defs) {
  GenKill gk;
  const std::size_t nd = defs.size();
  gk.gen.assign(cfg.size(), DefSet(nd));
  gk.kill.assign(cfg.size(), DefSet(nd));
  for (const auto& d : defs) {
    const auto node = static_cast<std::size_t>(d.node);
    gk.gen[node].set(static_cast<std::size_t>(d.def_id));
    for (const auto& other : defs) {
      if (other.def_id != d.def_id && other.variable == d.variable)
        gk.kill[node].set(static_cast<std::size_t>(other.def_id));
    }
  }
  return gk;
}

ReachSets reaching_definitions(const ControlFlowGraph& cfg) {
  FifoWork work(cfg.size());
  return solve(cfg, work);
}

ReachSets reaching_definitions(const ControlFlowGraph& cfg, std::span<const int> priority) {
  if (priority.size() != cfg.size())
    throw Error("priority order has " + std::to_string(priority.size()) + " entries for " +
                std::to_string(cfg.size()) + " nodes");
  PriorityWork work(priority);
  return solve(cfg, work);
}

bool is_fixpoint(const ControlFlowGraph& cfg, const ReachSets& reach) {
  const std::size_t nd = reach.definitions.size();
  const auto gk = gen_kill(cfg, reach.definitions);
  const auto pred = cfg.predecessors();
  for (std::size_t n = 0; n < cfg.size(); ++n) {
    const DefSet in = join(pred[n], reach.out, nd);
    if (in != reach.in[n] || transfer(gk, n, in) != reach.out[n]) return false;
  }
  return true;
}

std::vector<int> members(const DefSet& set) {
  std::vector<int> ids;
  for (auto i = set.find_first(); i != DefSet::npos; i = set.find_next(i))
    ids.push_back(static_cast<int>(i));
  return ids;
}

}  // namespace msivd::dfa
