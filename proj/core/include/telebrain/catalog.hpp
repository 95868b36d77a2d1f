#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "telebrain/domain.hpp"

namespace telebrain {

using StoredObject = std::variant<ContentObject, Collection, Role, Venue, InterfaceObject,
                                  MultiRoleAssignment, FractionalAssignment, AlgorithmObject>;

/// Document type tag: "content", "collection", "role", "venue", "interface",
/// "multi-role-assignment", "fractional-assignment", "algorithm".
std::string_view object_type(const StoredObject& obj);
const std::string& object_id(const StoredObject& obj);
const std::string& object_name(const StoredObject& obj);
const std::optional<LockRecord>& object_lock(const StoredObject& obj);
std::optional<LockRecord>& object_lock(StoredObject& obj);
void set_object_id(StoredObject& obj, std::string id);

/// Ids this object refers to (members, bound targets, assigned content...).
std::vector<std::string> references(const StoredObject& obj);

Violations validate(const StoredObject& obj);

/// {"format_version": 1, "type": ..., "value": ...}
Json to_document(const StoredObject& obj);
/// Throws Error("malformed") for an unknown type or bad fields.
StoredObject from_document(const Json& doc);
StoredObject object_from_json(std::string_view type, const Json& value);

/// Coarse media class used for capability checks and routing.
enum class MediaClass { Audio, Image, Teleprompt, Pair, Folder, Interface, Other };

/// Read-only object lookup used by routing and simulation.
class Catalog {
 public:
  virtual ~Catalog() = default;
  virtual std::optional<StoredObject> find(const std::string& id) const = 0;

  template <typename T>
  std::optional<T> find_as(const std::string& id) const {
    auto obj = find(id);
    if (!obj) return std::nullopt;
    if (auto* v = std::get_if<T>(&*obj)) return std::move(*v);
    return std::nullopt;
  }

  /// Media class of a content or collection id; nullopt if unknown.
  std::optional<MediaClass> media_class(const std::string& id) const;
  /// True for audio content and rendered sentences/layers.
  bool is_audio_id(const std::string& id) const;
};

/// In-memory catalog; useful for simulations and tests.
class MemoryCatalog : public Catalog {
 public:
  std::optional<StoredObject> find(const std::string& id) const override;
  void put(StoredObject obj);

 private:
  std::map<std::string, StoredObject, std::less<>> objects_;
};

}  // namespace telebrain
