#include "telebrain/declarative.hpp"

#include <array>
#include <map>
#include <set>

#include "telebrain/lock.hpp"

namespace telebrain {

namespace {

constexpr std::array<std::string_view, 8> kTypes{"content",   "collection",
                                                 "role",      "venue",
                                                 "interface", "multi-role-assignment",
                                                 "fractional-assignment", "algorithm"};

using Key = std::pair<std::string, std::string>;  // (type, name)

std::optional<Key> parse_reference(const std::string& s) {
  if (s.size() < 3 || s[0] != '@') return std::nullopt;
  const auto slash = s.find('/');
  if (slash == std::string::npos || slash + 1 >= s.size()) return std::nullopt;
  Key key{s.substr(1, slash - 1), s.substr(slash + 1)};
  if (std::find(kTypes.begin(), kTypes.end(), key.first) == kTypes.end()) return std::nullopt;
  return key;
}

template <typename F>
void for_each_string(Json& j, F&& f) {
  if (j.is_string()) {
    f(j);
  } else if (j.is_array() || j.is_object()) {
    for (auto& child : j) for_each_string(child, f);
  }
}

std::string_view action_name(ApplyResult::Item::Action a) {
  switch (a) {
    case ApplyResult::Item::Action::Created: return "created";
    case ApplyResult::Item::Action::Updated: return "updated";
    case ApplyResult::Item::Action::Unchanged: return "unchanged";
  }
  return "?";
}

}  // namespace

Json ApplyResult::to_json() const {
  Json out = Json::array();
  for (const auto& i : items) {
    out.push_back(
        {{"type", i.type}, {"name", i.name}, {"id", i.id}, {"action", action_name(i.action)}});
  }
  return Json{{"applied", std::move(out)}};
}

ApplyResult apply_declarations(ContentStore& store, const Json& file) {
  const Json* docs = nullptr;
  if (file.is_array()) {
    docs = &file;
  } else if (file.is_object() && file.contains("documents") && file["documents"].is_array()) {
    docs = &file["documents"];
  } else {
    throw Error("malformed", "expected an array of documents or {\"documents\": [...]}");
  }

  struct Pending {
    std::string type;
    std::string name;
    Json value;
  };
  std::vector<Pending> pending;
  Violations problems;
  std::set<Key> declared;
  std::set<Key> duplicates;

  for (const auto& doc : *docs) {
    if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string() ||
        !doc.contains("value") || !doc["value"].is_object()) {
      throw Error("malformed", "each document needs a string type and an object value");
    }
    if (doc.contains("format_version") && doc["format_version"] != 1) {
      throw Error("malformed", "unsupported format_version " + doc["format_version"].dump());
    }
    Pending p{doc["type"].get<std::string>(), "", doc["value"]};
    if (std::find(kTypes.begin(), kTypes.end(), p.type) == kTypes.end()) {
      throw Error("malformed", "unknown document type '" + p.type + "'");
    }
    if (p.type == "content" && p.value.value("kind", "") != "teleprompt") {
      throw Error("unsupported", "media content is imported, not declared; only teleprompts");
    }
    if (!p.value.contains("name") || !p.value["name"].is_string() ||
        p.value["name"].get<std::string>().empty()) {
      problems.push_back({"name", "every declared " + p.type + " needs a name"});
      continue;
    }
    p.name = p.value["name"].get<std::string>();
    for_each_string(p.value, [&](Json& s) {
      auto ref = parse_reference(s.get<std::string>());
      if (!ref) return;
      if (!declared.count(*ref) && !store.find_by_name(ref->first, ref->second)) {
        problems.push_back({"references", "unknown reference " + s.get<std::string>()});
      }
    });
    Key key{p.type, p.name};
    if (!declared.insert(key).second) duplicates.insert(key);
    pending.push_back(std::move(p));
  }
  if (!duplicates.empty()) {
    std::map<std::string, std::vector<std::string>> by_type;
    for (const auto& [type, name] : duplicates) by_type[type].push_back(name);
    for (const auto& [type, names] : by_type) {
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      problems.push_back({type, "duplicate " + type + " names: " + list});
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  ApplyResult result;
  std::map<Key, std::string> ids;
  for (auto& p : pending) {
    for_each_string(p.value, [&](Json& s) {
      auto ref = parse_reference(s.get<std::string>());
      if (!ref) return;
      if (auto it = ids.find(*ref); it != ids.end()) {
        s = it->second;
      } else {
        s = object_id(*store.find_by_name(ref->first, ref->second));
      }
    });

    std::optional<std::string> plaintext;
    if (p.type == "venue" && p.value.contains("passcode") && p.value["passcode"].is_string()) {
      plaintext = p.value["passcode"].get<std::string>();
      p.value.erase("passcode");
    }
    p.value.erase("lock");

    const auto existing = store.find_by_name(p.type, p.name);
    if (existing) {
      p.value["id"] = object_id(*existing);
    } else {
      p.value.erase("id");
    }
    StoredObject obj = object_from_json(p.type, p.value);

    if (auto* v = std::get_if<Venue>(&obj); v && plaintext) {
      const auto* old = existing ? std::get_if<Venue>(&*existing) : nullptr;
      if (old && old->passcode && verify_passcode(*old->passcode, *plaintext)) {
        v->passcode = old->passcode;
      } else {
        v->passcode = make_lock(*plaintext);
      }
    }

    ApplyResult::Item item{p.type, p.name, "", ApplyResult::Item::Action::Created};
    if (existing) {
      object_lock(obj) = object_lock(*existing);
      if (to_document(obj) == to_document(*existing)) {
        item.action = ApplyResult::Item::Action::Unchanged;
        item.id = object_id(*existing);
      } else {
        item.action = ApplyResult::Item::Action::Updated;
        item.id = object_id(store.save_object(std::move(obj)));
      }
    } else {
      item.id = object_id(store.save_object(std::move(obj)));
    }
    ids[{p.type, p.name}] = item.id;
    result.items.push_back(std::move(item));
  }
  return result;
}

}  // namespace telebrain
