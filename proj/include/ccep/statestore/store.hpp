#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ccep/core/clock.hpp"
#include "ccep/core/context_state.hpp"

namespace ccep {

struct StoreEntry {
  Bytes value;
  std::uint64_t version = 0;
};

/// Key-value store seen through named clients. Keys follow "meta/{type}" for
/// catalog records and "ctx/{type}" for checkpointed context.
class StateStore {
 public:
  virtual ~StateStore() = default;
  virtual std::uint64_t put(const std::string& client, const std::string& key, Bytes value) = 0;
  virtual std::optional<StoreEntry> get(const std::string& client, const std::string& key) = 0;
  /// Writes a tombstone; the version still advances.
  virtual void remove(const std::string& client, const std::string& key) = 0;
  /// Keys with the prefix that are live as seen by `client`.
  virtual std::vector<std::string> keys(const std::string& client, const std::string& prefix) = 0;
};

/// In-memory store with simulated replication lag: a write becomes visible to
/// other clients lag_us after it happened, immediately to its writer. A client
/// never observes a key going back to an older version.
class InMemoryStateStore : public StateStore {
 public:
  explicit InMemoryStateStore(Clock clock, TimeUs lag_us = 0);

  std::uint64_t put(const std::string& client, const std::string& key, Bytes value) override;
  std::optional<StoreEntry> get(const std::string& client, const std::string& key) override;
  void remove(const std::string& client, const std::string& key) override;
  std::vector<std::string> keys(const std::string& client, const std::string& prefix) override;

  TimeUs lag_us() const { return lag_us_; }

 private:
  struct Version {
    std::uint64_t version;
    std::optional<Bytes> value;  // nullopt is a tombstone
    TimeUs written_at;
    std::string writer;
  };
  struct Key {
    std::vector<Version> history;  // ascending version
    std::map<std::string, std::uint64_t> seen;  // client -> highest version observed or written
  };

  std::uint64_t write(const std::string& client, const std::string& key, std::optional<Bytes> value);
  const Version* visible(Key& k, const std::string& client, TimeUs now) const;
  void prune(Key& k, TimeUs now) const;

  Clock clock_;
  TimeUs lag_us_;
  std::mutex mu_;
  std::map<std::string, Key> data_;
};

/// A store bound to one client name.
class StoreClient {
 public:
  StoreClient(StateStore& store, std::string client) : store_(&store), client_(std::move(client)) {}

  std::uint64_t put(const std::string& key, Bytes value) { return store_->put(client_, key, std::move(value)); }
  std::optional<StoreEntry> get(const std::string& key) { return store_->get(client_, key); }
  void remove(const std::string& key) { store_->remove(client_, key); }
  std::vector<std::string> keys(const std::string& prefix) { return store_->keys(client_, prefix); }

  /// Stores the state under ctx/{event_type} with no offsets attached.
  std::uint64_t checkpoint_context(const std::string& event_type, const ContextState& state);
  /// Throws DecodeError when the stored bytes are corrupt.
  std::optional<ContextState> load_context(const std::string& event_type);

  const std::string& client() const { return client_; }
  StateStore& store() { return *store_; }

 private:
  StateStore* store_;
  std::string client_;
};

inline std::string meta_key(const std::string& type) { return "meta/" + type; }
inline std::string ctx_key(const std::string& type) { return "ctx/" + type; }

}  // namespace ccep
