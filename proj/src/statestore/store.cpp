#include "ccep/statestore/store.hpp"

#include <algorithm>
#include <stdexcept>

#include "ccep/statestore/checkpoint.hpp"

namespace ccep {

InMemoryStateStore::InMemoryStateStore(Clock clock, TimeUs lag_us) : clock_(std::move(clock)), lag_us_(lag_us) {
  if (!clock_) throw std::invalid_argument("store needs a clock");
  if (lag_us_ < 0) throw std::invalid_argument("negative replication lag");
}

std::uint64_t InMemoryStateStore::write(const std::string& client, const std::string& key,
                                        std::optional<Bytes> value) {
  if (key.empty()) throw std::invalid_argument("empty store key");
  std::lock_guard lock(mu_);
  auto now = clock_();
  auto& k = data_[key];
  std::uint64_t v = k.history.empty() ? 1 : k.history.back().version + 1;
  k.history.push_back({v, std::move(value), now, client});
  k.seen[client] = v;
  prune(k, now);
  return v;
}

std::uint64_t InMemoryStateStore::put(const std::string& client, const std::string& key, Bytes value) {
  return write(client, key, std::move(value));
}

void InMemoryStateStore::remove(const std::string& client, const std::string& key) {
  write(client, key, std::nullopt);
}

void InMemoryStateStore::prune(Key& k, TimeUs now) const {
  // older versions than the newest replicated one are invisible to everybody
  std::size_t cut = 0;
  for (std::size_t i = 0; i < k.history.size(); ++i)
    if (k.history[i].written_at + lag_us_ <= now) cut = i;
  if (cut > 0) k.history.erase(k.history.begin(), k.history.begin() + static_cast<std::ptrdiff_t>(cut));
}

const InMemoryStateStore::Version* InMemoryStateStore::visible(Key& k, const std::string& client,
                                                               TimeUs now) const {
  const Version* best = nullptr;
  std::uint64_t floor = 0;
  if (auto s = k.seen.find(client); s != k.seen.end()) floor = s->second;
  for (const auto& v : k.history) {
    if (v.written_at + lag_us_ <= now || v.writer == client || v.version <= floor) best = &v;
  }
  if (best) k.seen[client] = std::max(floor, best->version);
  return best;
}

std::optional<StoreEntry> InMemoryStateStore::get(const std::string& client, const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = data_.find(key);
  if (it == data_.end()) return std::nullopt;
  const Version* v = visible(it->second, client, clock_());
  if (!v || !v->value) return std::nullopt;
  return StoreEntry{*v->value, v->version};
}

std::vector<std::string> InMemoryStateStore::keys(const std::string& client, const std::string& prefix) {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  auto now = clock_();
  for (auto it = data_.lower_bound(prefix); it != data_.end() && it->first.rfind(prefix, 0) == 0; ++it) {
    const Version* v = visible(it->second, client, now);
    if (v && v->value) out.push_back(it->first);
  }
  return out;
}

std::uint64_t StoreClient::checkpoint_context(const std::string& event_type, const ContextState& state) {
  TypeCheckpoint cp;
  cp.state = state;
  return put(ctx_key(event_type), encode_checkpoint(cp));
}

std::optional<ContextState> StoreClient::load_context(const std::string& event_type) {
  auto e = get(ctx_key(event_type));
  if (!e) return std::nullopt;
  return decode_checkpoint(e->value).state;
}

}  // namespace ccep
