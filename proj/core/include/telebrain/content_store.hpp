#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "telebrain/audio.hpp"
#include "telebrain/catalog.hpp"
#include "telebrain/error.hpp"

namespace telebrain {

struct MediaBlob {
  std::string blob_id;
  std::vector<std::uint8_t> bytes;
  std::string mime;
  MediaOrigin origin;
};

struct FetchResult {
  int status = 0;
  std::string content_type;
  std::vector<std::uint8_t> body;
};

class Fetcher {
 public:
  virtual ~Fetcher() = default;
  /// Throws Error("unreachable") when the resource cannot be retrieved.
  virtual FetchResult fetch(const std::string& url) = 0;
};

/// http:// and file:// URLs.
class HttpFetcher final : public Fetcher {
 public:
  explicit HttpFetcher(std::int64_t timeout_ms = 5000) : timeout_ms_(timeout_ms) {}
  FetchResult fetch(const std::string& url) override;

 private:
  std::int64_t timeout_ms_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(Violations v)
      : Error("invalid", describe(v)), violations_(std::move(v)) {}
  const Violations& violations() const noexcept { return violations_; }

 private:
  Violations violations_;
};

class ReferencedError : public Error {
 public:
  ReferencedError(const std::string& id, std::vector<std::string> by);
  const std::vector<std::string>& referencing_ids() const noexcept { return by_; }

 private:
  std::vector<std::string> by_;
};

struct ListFilter {
  std::optional<std::string> type;  // document type tag
  std::optional<ContentKind> content_kind;
  std::optional<CollectionKind> collection_kind;
  std::optional<std::string> folder_id;
};

/// Metadata documents under <root>/objects/<id>.json, media under
/// <root>/blobs/<blob-id> (content addressed, SHA-256).
///
/// Mutations are serialized by one writer lock. Readers work on an
/// immutable snapshot swapped in atomically after each write.
class ContentStore : public Catalog {
 public:
  struct Options {
    std::filesystem::path root;
    std::shared_ptr<Fetcher> fetcher;
    std::shared_ptr<audio::TtsAdapter> tts;
    std::optional<std::uint64_t> id_seed;
  };

  explicit ContentStore(Options options);

  // --- Ingestion ---------------------------------------------------------
  ContentObject save_web_audio(const std::string& url, std::string name = {},
                               bool copyrighted = false);
  ContentObject save_tts(const std::string& text, const std::string& language,
                         std::string name = {});
  ContentObject save_web_image(const std::string& url, std::string name = {});
  ContentObject save_upload(std::span<const std::uint8_t> bytes, std::string mime,
                            ContentKind kind, std::string name);
  ContentObject save_teleprompt(std::string name, TelepromptSpec spec);

  // --- Upserts -----------------------------------------------------------
  // An empty id creates a new object with a store-assigned id; a non-empty
  // id must name an existing, unlocked object of the same type. Lock state
  // is owned by lock()/unlock() and never taken from the argument.
  ContentObject update(ContentObject c);
  Collection save(Collection c);
  Role save(Role r);
  Venue save(Venue v);
  InterfaceObject save(InterfaceObject i);
  MultiRoleAssignment save(MultiRoleAssignment a);
  FractionalAssignment save(FractionalAssignment a);
  AlgorithmObject save(AlgorithmObject a);
  StoredObject save_object(StoredObject obj);

  // --- Queries -----------------------------------------------------------
  std::optional<StoredObject> find(const std::string& id) const override;
  /// Throws Error("not-found").
  StoredObject get(const std::string& id) const;
  template <typename T>
  T get_as(const std::string& id) const {
    auto obj = get(id);
    if (auto* v = std::get_if<T>(&obj)) return std::move(*v);
    throw Error("wrong-type", "object '" + id + "' is a " + std::string(object_type(obj)));
  }
  std::optional<StoredObject> find_by_name(std::string_view type, std::string_view name) const;
  std::vector<std::string> list(const ListFilter& filter = {}) const;
  std::vector<std::string> referencing(const std::string& id) const;

  /// Throws Error("not-found"), Error("locked") or ReferencedError.
  void remove(const std::string& id);

  /// Throws Error("already-locked").
  void lock(const std::string& id, std::string_view passcode);
  /// Throws Error("not-locked") or Error("wrong-passcode").
  void unlock(const std::string& id, std::string_view passcode);
  bool is_locked(const std::string& id) const;

  // --- Media -------------------------------------------------------------
  MediaBlob blob(const std::string& blob_id) const;
  /// Decoded samples of an audio content object or rendered collection.
  /// Throws Error("unsupported-media") for audio that is not PCM (MP3).
  audio::Pcm pcm_for(const std::string& id) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  using Objects = std::map<std::string, StoredObject, std::less<>>;
  struct Snapshot {
    Objects objects;
  };

  std::shared_ptr<const Snapshot> snapshot() const;
  void load();
  std::string new_id();
  std::string put_blob(std::span<const std::uint8_t> bytes);
  void write_document(const StoredObject& obj);
  /// Persists and publishes. Caller holds write_mutex_.
  void commit(std::shared_ptr<Snapshot> next, const StoredObject& obj);
  StoredObject upsert(StoredObject obj);
  void check_references(const StoredObject& obj, const Snapshot& snap) const;
  void render(Collection& c, const Snapshot& snap);
  ContentObject ingest_audio(std::vector<std::uint8_t> bytes, ContentKind kind, std::string name,
                             MediaOrigin origin, std::string source_url);

  std::filesystem::path root_;
  std::shared_ptr<Fetcher> fetcher_;
  std::shared_ptr<audio::TtsAdapter> tts_;
  std::mutex write_mutex_;
  std::mt19937_64 id_rng_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace telebrain
