#pragma once

#include <string>
#include <vector>

#include "telebrain/content_store.hpp"

namespace telebrain {

struct ApplyResult {
  struct Item {
    std::string type;
    std::string name;
    std::string id;
    enum class Action { Created, Updated, Unchanged } action = Action::Unchanged;
  };
  std::vector<Item> items;

  Json to_json() const;
};

/// Upserts the documents of a declarative file into the store.
///
/// The file is either a JSON array of store documents or an object with a
/// "documents" array. A document is matched to an existing object by
/// (type, name), so ids stay stable and applying the same file twice
/// changes nothing on disk. Inside a value, the string "@<type>/<name>"
/// stands for the id of the named object, which may be declared earlier in
/// the same file or already stored. A venue "passcode" may be given as plain
/// text; it is stored as a salted digest, and an existing digest that
/// verifies the same passcode is kept.
///
/// Everything is checked before anything is written. Throws ValidationError
/// listing duplicate (type, name) pairs or bad references, Error("malformed")
/// for an unparsable document and Error("unsupported") for media content,
/// which is imported rather than declared.
ApplyResult apply_declarations(ContentStore& store, const Json& file);

}  // namespace telebrain
