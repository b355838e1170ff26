// Copyright 2026 The smv Authors
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

#include "smv/twin/twin_store.hpp"

#include <algorithm>

#include "smv/broker/topic.hpp"
#include "smv/common/error.hpp"

namespace smv::twin {

namespace {

// Derived variables may feed further rules; this bounds accidental cycles.
constexpr int kMaxFusionDepth = 8;

std::size_t tier_index(Resolution r) { return static_cast<std::size_t>(r) - 1; }

}  // namespace

TwinStore::TwinStore(std::shared_ptr<const MetadataRepository> meta, Retention retention)
    : meta_(std::move(meta)), retention_(retention) {
  if (!meta_) fail(Errc::InvalidArgument, "twin store needs a metadata repository");
}

TwinStore::~TwinStore() = default;

void TwinStore::add_rule(FusionRule rule) {
  rule.validate();
  std::lock_guard lk(rules_mu_);
  if (rules_.contains(rule.rule_id)) fail(Errc::InvalidArgument, "duplicate fusion rule " + rule.rule_id);
  auto st = std::make_shared<RuleState>();
  st->rule = std::move(rule);
  for (const auto& in : st->rule.inputs) by_input_.emplace(std::make_pair(in.asset, in.variable), st);
  rules_.emplace(st->rule.rule_id, st);
}

std::vector<FusionRule> TwinStore::rules() const {
  std::lock_guard lk(rules_mu_);
  std::vector<FusionRule> out;
  for (const auto& [_, st] : rules_) out.push_back(st->rule);
  return out;
}

void TwinStore::on_fusion(FusionListener fn) {
  std::lock_guard lk(rules_mu_);
  listeners_.push_back(std::move(fn));
}

std::shared_ptr<TwinStore::Asset> TwinStore::find(const AssetId& id) const {
  std::shared_lock lk(assets_mu_);
  auto it = assets_.find(id);
  return it == assets_.end() ? nullptr : it->second;
}

std::shared_ptr<TwinStore::Asset> TwinStore::find_or_create(const AssetId& id) {
  if (auto a = find(id)) return a;
  std::unique_lock lk(assets_mu_);
  auto& slot = assets_[id];
  if (!slot) slot = std::make_shared<Asset>();
  return slot;
}

void TwinStore::check_known(const AssetId& id) const {
  if (!meta_->is_registered(id)) fail(Errc::UnknownAsset, id.str());
}

void TwinStore::apply_locked(Asset& a, std::uint64_t ts, const std::vector<otbus::Field>& fields) {
  for (const auto& f : fields) {
    auto [it, fresh] = a.latest.try_emplace(f.name, LatestValue{f.value, ts});
    if (!fresh && ts >= it->second.ts_ns) it->second = LatestValue{f.value, ts};

    double v;
    if (!otbus::as_number(f.value, v)) continue;
    auto& var = a.vars[f.name];

    auto pos = std::upper_bound(var.raw.begin(), var.raw.end(), ts,
                                [](std::uint64_t t, const RawPoint& p) { return t < p.ts_ns; });
    var.raw.insert(pos, RawPoint{ts, v});
    while (var.raw.size() > retention_.raw_points) var.raw.pop_front();

    const std::size_t limits[3] = {retention_.buckets_1s, retention_.buckets_10s, retention_.buckets_60s};
    for (std::size_t t = 0; t < 3; ++t) {
      const std::uint64_t start = bucket_start(ts, resolution_ns(kRollupTiers[t]));
      auto& tier = var.tiers[t];
      auto [b, created] = tier.try_emplace(start);
      if (created) b->second.start_ns = start;
      b->second.add(v);
      while (tier.size() > limits[t]) tier.erase(tier.begin());
    }
  }
}

void TwinStore::ingest(const gateway::BridgeEnvelope& env) {
  try {
    (void)meta_->resolve_topic(env.asset);
  } catch (const Error& e) {
    if (e.code() != Errc::UnknownBinding) throw;
    fail(Errc::UnboundAsset, env.asset.str());
  }
  auto a = find_or_create(env.asset);
  {
    std::unique_lock lk(a->mu);
    apply_locked(*a, env.ot_ts_unix_ns, env.fields);
  }
  ingested_.fetch_add(1, std::memory_order_relaxed);

  bool any_rules;
  {
    std::lock_guard lk(rules_mu_);
    any_rules = !rules_.empty();
  }
  if (!any_rules) return;
  std::vector<FusionEvent> events;
  {
    std::lock_guard lk(fusion_mu_);
    run_rules(env.asset, env.ot_ts_unix_ns, env.fields, 0, events);
  }
  std::vector<FusionListener> listeners;
  {
    std::lock_guard lk(rules_mu_);
    listeners = listeners_;
  }
  for (const auto& ev : events)
    for (const auto& fn : listeners) fn(ev);
}

void TwinStore::run_rules(const AssetId& id, std::uint64_t ts, const std::vector<otbus::Field>& fields, int depth,
                          std::vector<FusionEvent>& events) {
  if (depth >= kMaxFusionDepth) return;
  for (const auto& f : fields) {
    double x;
    if (!otbus::as_number(f.value, x)) continue;
    std::vector<std::shared_ptr<RuleState>> hit;
    {
      std::lock_guard lk(rules_mu_);
      auto [lo, hi] = by_input_.equal_range({id, f.name});
      for (auto it = lo; it != hi; ++it) hit.push_back(it->second);
    }
    for (const auto& st : hit) {
      const auto& rule = st->rule;
      FusionEvent ev{rule.rule_id, rule.target, rule.output, 0, false, ts};
      if (const auto* z = std::get_if<ZScoreRule>(&rule.kind)) {
        const std::vector<double> window(st->history.begin(), st->history.end());
        st->history.push_back(x);
        while (st->history.size() > z->window_n) st->history.pop_front();
        if (window.size() < z->window_n) continue;
        const auto r = zscore(window, x, z->window_n, z->k);
        ev.value = r.z;
        ev.flagged = r.flagged;
      } else {
        const auto& expr = std::get<ThresholdRule>(rule.kind).expr;
        std::map<std::string, double> values;
        for (const auto& in : rule.inputs) {
          auto a = find(in.asset);
          if (!a) continue;
          std::shared_lock lk(a->mu);
          auto it = a->latest.find(in.variable);
          double v;
          if (it != a->latest.end() && otbus::as_number(it->second.value, v)) values[in.alias] = v;
        }
        if (values.size() < rule.inputs.size()) continue;
        ev.flagged = expr.test(values);
        ev.value = ev.flagged ? 1.0 : 0.0;
      }
      std::vector<otbus::Field> out{{rule.output, ev.value}};
      {
        auto target = find_or_create(rule.target);
        std::unique_lock lk(target->mu);
        apply_locked(*target, ts, out);
      }
      events.push_back(ev);
      run_rules(rule.target, ts, out, depth + 1, events);
    }
  }
}

LatestSnapshot TwinStore::query_latest(const AssetId& id) const {
  auto a = find(id);
  if (!a) {
    check_known(id);
    return {};
  }
  std::shared_lock lk(a->mu);
  return a->latest;
}

void TwinStore::select(const Variable& v, std::uint64_t from, std::uint64_t to, Resolution res, SeriesResult& out) {
  if (res == Resolution::Raw) {
    auto lo = std::lower_bound(v.raw.begin(), v.raw.end(), from,
                               [](const RawPoint& p, std::uint64_t t) { return p.ts_ns < t; });
    for (auto it = lo; it != v.raw.end() && it->ts_ns < to; ++it) out.raw.push_back(*it);
    return;
  }
  const std::uint64_t w = resolution_ns(res);
  const auto& tier = v.tiers[tier_index(res)];
  for (auto it = tier.lower_bound(from); it != tier.end() && it->first < to && to - it->first >= w; ++it)
    out.buckets.push_back(it->second);
}

SeriesResult TwinStore::query_series(const AssetId& id, const std::string& variable, std::uint64_t from_ns,
                                     std::uint64_t to_ns, Resolution res) const {
  if (from_ns > to_ns) fail(Errc::InvalidArgument, "series range starts after it ends");
  auto a = find(id);
  if (!a) {
    check_known(id);
    fail(Errc::UnknownVariable, id.str() + "/" + variable);
  }
  SeriesResult out;
  out.resolution = res;
  std::shared_lock lk(a->mu);
  auto it = a->vars.find(variable);
  if (it == a->vars.end()) fail(Errc::UnknownVariable, id.str() + "/" + variable);
  select(it->second, from_ns, to_ns, res, out);
  return out;
}

SeriesResult TwinStore::query_series(const AssetPattern& pattern, const std::string& variable, std::uint64_t from_ns,
                                     std::uint64_t to_ns, Resolution res) const {
  if (from_ns > to_ns) fail(Errc::InvalidArgument, "series range starts after it ends");
  std::set<AssetId> ids = meta_->expand(pattern);
  {
    std::shared_lock lk(assets_mu_);
    for (const auto& [id, _] : assets_)
      if (pattern.matches(id)) ids.insert(id);
  }
  if (ids.empty()) fail(Errc::UnknownAsset, pattern.str());

  SeriesResult out;
  out.resolution = res;
  bool seen = false;
  std::map<std::uint64_t, RollupBucket> merged;
  for (const auto& id : ids) {
    auto a = find(id);
    if (!a) continue;
    SeriesResult one;
    {
      std::shared_lock lk(a->mu);
      auto it = a->vars.find(variable);
      if (it == a->vars.end()) continue;
      seen = true;
      select(it->second, from_ns, to_ns, res, one);
    }
    out.raw.insert(out.raw.end(), one.raw.begin(), one.raw.end());
    for (const auto& b : one.buckets) {
      auto [m, created] = merged.try_emplace(b.start_ns, b);
      if (!created) m->second.merge(b);
    }
  }
  if (!seen) fail(Errc::UnknownVariable, pattern.str() + "/" + variable);
  std::stable_sort(out.raw.begin(), out.raw.end(),
                   [](const RawPoint& x, const RawPoint& y) { return x.ts_ns < y.ts_ns; });
  for (auto& [_, b] : merged) out.buckets.push_back(std::move(b));
  return out;
}

std::vector<std::string> TwinStore::variables(const AssetId& id) const {
  auto a = find(id);
  if (!a) {
    check_known(id);
    return {};
  }
  std::shared_lock lk(a->mu);
  std::vector<std::string> out;
  for (const auto& [name, _] : a->vars) out.push_back(name);
  return out;
}

std::set<AssetId> TwinStore::assets() const {
  std::shared_lock lk(assets_mu_);
  std::set<AssetId> out;
  for (const auto& [id, _] : assets_) out.insert(id);
  return out;
}

Bytes TwinStore::export_series(const AssetId& id, const std::string& variable) const {
  const auto s = query_series(id, variable, 0, UINT64_MAX, Resolution::Raw);
  Bytes out;
  ByteWriter w(out);
  std::uint64_t offset = 0;
  for (const auto& p : s.raw) {
    Bytes payload;
    ByteWriter(payload).f64(p.value);
    broker::write_record_frame(w, offset++, p.ts_ns, as_bytes(variable), payload);
  }
  return out;
}

}  // namespace smv::twin
