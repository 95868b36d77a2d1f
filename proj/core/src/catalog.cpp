#include "telebrain/catalog.hpp"

#include "telebrain/error.hpp"

namespace telebrain {
namespace {

constexpr std::array<std::string_view, std::variant_size_v<StoredObject>> kTypeTags{
    "content",
    "collection",
    "role",
    "venue",
    "interface",
    "multi-role-assignment",
    "fractional-assignment",
    "algorithm",
};

void step_refs(std::vector<std::string>& out, const DistributionStep& s) {
  if (!s.target_id.empty()) out.push_back(s.target_id);
  if (s.designation.multi_role) out.push_back(*s.designation.multi_role);
  if (s.designation.fraction) out.push_back(*s.designation.fraction);
}

template <std::size_t I = 0>
StoredObject parse_indexed(std::string_view type, const Json& value) {
  if constexpr (I == std::variant_size_v<StoredObject>) {
    throw Error("malformed", "unknown document type '" + std::string(type) + "'");
  } else {
    if (kTypeTags[I] == type) {
      return StoredObject(std::in_place_index<I>,
                          value.get<std::variant_alternative_t<I, StoredObject>>());
    }
    return parse_indexed<I + 1>(type, value);
  }
}

}  // namespace

std::string_view object_type(const StoredObject& obj) { return kTypeTags[obj.index()]; }

const std::string& object_id(const StoredObject& obj) {
  return std::visit([](const auto& v) -> const std::string& { return v.id; }, obj);
}

const std::string& object_name(const StoredObject& obj) {
  return std::visit([](const auto& v) -> const std::string& { return v.name; }, obj);
}

const std::optional<LockRecord>& object_lock(const StoredObject& obj) {
  return std::visit([](const auto& v) -> const std::optional<LockRecord>& { return v.lock; }, obj);
}

std::optional<LockRecord>& object_lock(StoredObject& obj) {
  return std::visit([](auto& v) -> std::optional<LockRecord>& { return v.lock; }, obj);
}

void set_object_id(StoredObject& obj, std::string id) {
  std::visit([&](auto& v) { v.id = std::move(id); }, obj);
}

std::vector<std::string> references(const StoredObject& obj) {
  std::vector<std::string> out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Collection>) {
          out.insert(out.end(), v.members.begin(), v.members.end());
          for (const auto& l : v.layers) out.push_back(l.audio_id);
        } else if constexpr (std::is_same_v<T, InterfaceObject>) {
          for (const auto& e : v.elements) out.push_back(e.bound_target);
        } else if constexpr (std::is_same_v<T, MultiRoleAssignment>) {
          out.push_back(v.venue_id);
          for (const auto& [role, target] : v.bindings) out.push_back(target);
        } else if constexpr (std::is_same_v<T, FractionalAssignment>) {
          out.insert(out.end(), v.fractions.begin(), v.fractions.end());
        } else if constexpr (std::is_same_v<T, AlgorithmObject>) {
          if (const auto* o = std::get_if<OscBindingSpec>(&v.spec)) out.push_back(o->target_id);
          if (const auto* t = std::get_if<TimedOrganizationSpec>(&v.spec)) {
            for (const auto& e : t->entries) {
              out.push_back(e.trigger_id);
              step_refs(out, e.action);
            }
          }
          if (const auto* d = std::get_if<DistributionOrganizationSpec>(&v.spec)) {
            for (const auto& s : d->steps) step_refs(out, s);
          }
        }
      },
      obj);
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

Violations validate(const StoredObject& obj) {
  return std::visit([](const auto& v) { return validate(v); }, obj);
}

Json to_document(const StoredObject& obj) {
  Json value;
  std::visit([&](const auto& v) { value = v; }, obj);
  return Json{{"format_version", kFormatVersion}, {"type", object_type(obj)}, {"value", value}};
}

StoredObject object_from_json(std::string_view type, const Json& value) {
  try {
    return parse_indexed(type, value);
  } catch (const Json::exception& e) {
    throw Error("malformed", std::string(type) + " document: " + e.what());
  }
}

StoredObject from_document(const Json& doc) {
  if (!doc.is_object()) throw Error("malformed", "document must be a JSON object");
  const auto version = doc.value("format_version", 0);
  if (version != kFormatVersion) {
    throw Error("malformed", "unsupported format_version " + std::to_string(version));
  }
  if (!doc.contains("type") || !doc.contains("value")) {
    throw Error("malformed", "document needs type and value");
  }
  return object_from_json(doc.at("type").get<std::string>(), doc.at("value"));
}

std::optional<MediaClass> Catalog::media_class(const std::string& id) const {
  auto obj = find(id);
  if (!obj) return std::nullopt;
  if (const auto* c = std::get_if<ContentObject>(&*obj)) {
    if (is_audio(c->kind)) return MediaClass::Audio;
    if (is_image(c->kind)) return MediaClass::Image;
    return MediaClass::Teleprompt;
  }
  if (const auto* c = std::get_if<Collection>(&*obj)) {
    switch (c->kind) {
      case CollectionKind::AudioSentence:
      case CollectionKind::AudioLayer:
        return MediaClass::Audio;
      case CollectionKind::ImagePhrase:
        return MediaClass::Image;
      case CollectionKind::AudioImagePair:
        return MediaClass::Pair;
      case CollectionKind::Folder:
        return MediaClass::Folder;
    }
  }
  if (std::holds_alternative<InterfaceObject>(*obj)) return MediaClass::Interface;
  return MediaClass::Other;
}

bool Catalog::is_audio_id(const std::string& id) const {
  return media_class(id) == MediaClass::Audio;
}

std::optional<StoredObject> MemoryCatalog::find(const std::string& id) const {
  if (auto it = objects_.find(id); it != objects_.end()) return it->second;
  return std::nullopt;
}

void MemoryCatalog::put(StoredObject obj) {
  auto id = object_id(obj);
  objects_.insert_or_assign(std::move(id), std::move(obj));
}

}  // namespace telebrain
