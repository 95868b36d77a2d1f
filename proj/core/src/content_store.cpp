#include "telebrain/content_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "telebrain/lock.hpp"

namespace telebrain {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool has_prefix(std::span<const std::uint8_t> b, std::initializer_list<std::uint8_t> magic) {
  if (b.size() < magic.size()) return false;
  return std::equal(magic.begin(), magic.end(), b.begin());
}

std::string sniff_image(std::span<const std::uint8_t> b) {
  if (has_prefix(b, {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) return "image/png";
  if (has_prefix(b, {0xFF, 0xD8, 0xFF})) return "image/jpeg";
  if (has_prefix(b, {'G', 'I', 'F', '8'})) return "image/gif";
  return {};
}

std::string sniff_mime(std::span<const std::uint8_t> b) {
  if (audio::looks_like_wav(b)) return "audio/wav";
  if (auto img = sniff_image(b); !img.empty()) return img;
  if (audio::looks_like_mp3(b)) return "audio/mpeg";
  return "application/octet-stream";
}

bool is_html(const FetchResult& r) {
  return lower(r.content_type).find("text/html") != std::string::npos;
}

std::string url_path(const std::string& url) {
  auto path = url;
  if (auto q = path.find_first_of("?#"); q != std::string::npos) path.resize(q);
  return path;
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("not-found", "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& p, std::span<const std::uint8_t> bytes) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("io", "short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

template <typename T>
T& as(StoredObject& obj) {
  return std::get<T>(obj);
}

}  // namespace

ReferencedError::ReferencedError(const std::string& id, std::vector<std::string> by)
    : Error("referenced",
            [&] {
              std::string msg = "'" + id + "' is referenced by: ";
              for (std::size_t i = 0; i < by.size(); ++i) msg += (i ? ", " : "") + by[i];
              return msg;
            }()),
      by_(std::move(by)) {}

ContentStore::ContentStore(Options options)
    : root_(std::move(options.root)),
      fetcher_(options.fetcher ? std::move(options.fetcher) : std::make_shared<HttpFetcher>()),
      tts_(options.tts ? std::move(options.tts) : std::make_shared<audio::ToneStubTts>()),
      id_rng_(options.id_seed ? *options.id_seed : std::random_device{}()) {
  fs::create_directories(root_ / "objects");
  fs::create_directories(root_ / "blobs");
  load();
}

std::shared_ptr<const ContentStore::Snapshot> ContentStore::snapshot() const {
  return std::atomic_load(&snapshot_);
}

void ContentStore::load() {
  auto snap = std::make_shared<Snapshot>();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root_ / "objects")) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto bytes = read_file(f);
    Json doc;
    try {
      doc = Json::parse(bytes.begin(), bytes.end());
    } catch (const Json::exception& e) {
      throw Error("malformed", f.string() + ": " + e.what());
    }
    auto obj = from_document(doc);
    auto id = object_id(obj);
    snap->objects.emplace(std::move(id), std::move(obj));
  }
  std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(snap)));
}

std::string ContentStore::new_id() {
  std::uniform_int_distribution<std::uint64_t> dist;
  auto hi = dist(id_rng_);
  auto lo = dist(id_rng_);
  hi = (hi & ~0xF000ULL) | 0x4000ULL;                      // version 4
  lo = (lo & ~(0xC0ULL << 56)) | (0x80ULL << 56);          // RFC 4122 variant
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0xFFFF), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

std::string ContentStore::put_blob(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error("invalid", "media blob must not be empty");
  auto id = sha256_hex(bytes);
  const auto path = root_ / "blobs" / id;
  if (!fs::exists(path)) write_file_atomic(path, bytes);
  return id;
}

void ContentStore::write_document(const StoredObject& obj) {
  const auto text = to_document(obj).dump(2) + "\n";
  write_file_atomic(root_ / "objects" / (object_id(obj) + ".json"),
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void ContentStore::commit(std::shared_ptr<Snapshot> next, const StoredObject& obj) {
  write_document(obj);
  std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(next)));
}

// ---------------------------------------------------------------------------
// Ingestion

ContentObject ContentStore::ingest_audio(std::vector<std::uint8_t> bytes, ContentKind kind,
                                         std::string name, MediaOrigin origin,
                                         std::string source_url) {
  ContentObject c;
  c.kind = kind;
  c.name = std::move(name);
  c.source_url = std::move(source_url);
  c.origin = std::move(origin);
  if (audio::looks_like_wav(bytes)) {
    auto pcm = audio::decode_wav(bytes);
    if (pcm.empty()) throw Error("zero-duration", "audio has no samples");
    c.duration_ms = audio::samples_to_ms(pcm.size());
    c.mime = "audio/wav";
    c.blob_id = put_blob(audio::encode_wav(pcm));
  } else if (auto ms = audio::mp3_duration_ms(bytes)) {
    c.duration_ms = *ms;
    c.mime = "audio/mpeg";
    c.blob_id = put_blob(bytes);
  } else {
    throw Error("non-audio-media", "media is not WAV or MP3 audio");
  }
  auto saved = upsert(StoredObject(std::move(c)));
  return std::get<ContentObject>(saved);
}

ContentObject ContentStore::save_web_audio(const std::string& url, std::string name,
                                           bool copyrighted) {
  if (copyrighted) throw Error("copyrighted", "copyrighted material is not allowed");
  auto res = fetcher_->fetch(url);
  if (res.status != 200) {
    throw Error("unreachable", url + " answered HTTP " + std::to_string(res.status));
  }
  if (is_html(res)) throw Error("non-audio-media", url + " returned an HTML page, not audio");
  if (name.empty()) {
    const auto path = url_path(url);
    name = path.substr(path.find_last_of('/') + 1);
    if (name.empty()) name = url;
  }
  MediaOrigin origin;
  origin.kind = MediaOrigin::Kind::WebCopy;
  origin.url = url;
  return ingest_audio(std::move(res.body), ContentKind::AudioWeb, std::move(name), origin, url);
}

ContentObject ContentStore::save_tts(const std::string& text, const std::string& language,
                                     std::string name) {
  if (language.empty()) throw Error("invalid", "text-to-speech needs a language");
  auto render = audio::render_tts(text, language, *tts_);
  MediaOrigin origin;
  origin.kind = MediaOrigin::Kind::Tts;
  origin.language = language;
  origin.text = text;
  return ingest_audio(audio::encode_wav(render.pcm), ContentKind::AudioTts,
                      name.empty() ? text : std::move(name), origin, {});
}

ContentObject ContentStore::save_web_image(const std::string& url, std::string name) {
  const auto path = lower(url_path(url));
  const auto ends_with = [&](std::string_view ext) {
    return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (!ends_with(".jpg") && !ends_with(".png")) {
    throw Error("invalid-image-url",
                "a valid image URL ends with '.jpg' or '.png' and links directly to the image, "
                "not to an HTML page containing it");
  }
  auto res = fetcher_->fetch(url);
  if (res.status != 200) {
    throw Error("unreachable", url + " answered HTTP " + std::to_string(res.status));
  }
  if (is_html(res) || res.body.empty()) {
    throw Error("non-image-media", url + " did not return image data");
  }
  ContentObject c;
  c.kind = ContentKind::ImageWeb;
  if (name.empty()) {
    const auto raw = url_path(url);
    name = raw.substr(raw.find_last_of('/') + 1);
  }
  c.name = std::move(name);
  c.source_url = url;
  c.mime = sniff_image(res.body);
  if (c.mime.empty()) c.mime = res.content_type.empty() ? "image/unknown" : res.content_type;
  c.origin = MediaOrigin{MediaOrigin::Kind::WebCopy, url, {}, {}, {}};
  c.blob_id = put_blob(res.body);
  return std::get<ContentObject>(upsert(StoredObject(std::move(c))));
}

ContentObject ContentStore::save_upload(std::span<const std::uint8_t> bytes, std::string mime,
                                        ContentKind kind, std::string name) {
  if (bytes.empty()) throw Error("invalid", "upload is empty");
  MediaOrigin origin;
  origin.kind = MediaOrigin::Kind::Upload;
  if (kind == ContentKind::AudioUpload) {
    return ingest_audio({bytes.begin(), bytes.end()}, kind, std::move(name), origin, {});
  }
  if (kind != ContentKind::ImageUpload) {
    throw Error("invalid", "uploads must be audio-upload or image-upload");
  }
  const auto sniffed = sniff_image(bytes);
  if (sniffed.empty()) {
    throw Error("non-image-media", "upload declared as '" + mime + "' is not a PNG, JPEG or GIF image");
  }
  ContentObject c;
  c.kind = kind;
  c.name = std::move(name);
  c.mime = sniffed;
  c.origin = origin;
  c.blob_id = put_blob(bytes);
  return std::get<ContentObject>(upsert(StoredObject(std::move(c))));
}

ContentObject ContentStore::save_teleprompt(std::string name, TelepromptSpec spec) {
  ContentObject c;
  c.kind = ContentKind::Teleprompt;
  c.name = std::move(name);
  c.teleprompt = std::move(spec);
  return std::get<ContentObject>(upsert(StoredObject(std::move(c))));
}

// ---------------------------------------------------------------------------
// Upserts

ContentObject ContentStore::update(ContentObject c) {
  if (c.id.empty()) throw Error("invalid", "update needs an existing id");
  return std::get<ContentObject>(upsert(StoredObject(std::move(c))));
}

Collection ContentStore::save(Collection c) { return std::get<Collection>(upsert(std::move(c))); }
Role ContentStore::save(Role r) { return std::get<Role>(upsert(std::move(r))); }
Venue ContentStore::save(Venue v) { return std::get<Venue>(upsert(std::move(v))); }
InterfaceObject ContentStore::save(InterfaceObject i) {
  return std::get<InterfaceObject>(upsert(std::move(i)));
}
MultiRoleAssignment ContentStore::save(MultiRoleAssignment a) {
  return std::get<MultiRoleAssignment>(upsert(std::move(a)));
}
FractionalAssignment ContentStore::save(FractionalAssignment a) {
  return std::get<FractionalAssignment>(upsert(std::move(a)));
}
AlgorithmObject ContentStore::save(AlgorithmObject a) {
  return std::get<AlgorithmObject>(upsert(std::move(a)));
}
StoredObject ContentStore::save_object(StoredObject obj) { return upsert(std::move(obj)); }

StoredObject ContentStore::upsert(StoredObject obj) {
  std::lock_guard guard(write_mutex_);
  auto snap = snapshot();

  const StoredObject* existing = nullptr;
  if (object_id(obj).empty()) {
    set_object_id(obj, new_id());
    object_lock(obj).reset();
  } else {
    auto it = snap->objects.find(object_id(obj));
    if (it == snap->objects.end()) throw Error("not-found", "no object '" + object_id(obj) + "'");
    existing = &it->second;
    if (existing->index() != obj.index()) {
      throw Error("wrong-type", "object '" + object_id(obj) + "' is a " +
                                    std::string(object_type(*existing)));
    }
    if (object_lock(*existing)) {
      throw Error("locked", "'" + object_name(*existing) + "' is locked; unlock it to edit");
    }
    object_lock(obj) = object_lock(*existing);
  }

  if (auto* c = std::get_if<Collection>(&obj); c && c->kind == CollectionKind::AudioSentence) {
    // Offsets are outputs of rendering; stale ones must not fail validation.
    c->offsets_ms.clear();
    c->offsets_samples.clear();
    c->blob_id.clear();
  }
  if (auto v = validate(obj); !v.empty()) throw ValidationError(std::move(v));
  check_references(obj, *snap);
  if (auto* c = std::get_if<Collection>(&obj)) render(*c, *snap);
  if (auto v = validate(obj); !v.empty()) throw ValidationError(std::move(v));

  if (existing && to_document(*existing) == to_document(obj)) return obj;

  auto next = std::make_shared<Snapshot>(*snap);
  next->objects.insert_or_assign(object_id(obj), obj);
  commit(std::move(next), obj);
  return obj;
}

void ContentStore::check_references(const StoredObject& obj, const Snapshot& snap) const {
  Violations out;
  const auto& self = object_id(obj);
  auto lookup = [&](const std::string& id) -> const StoredObject* {
    if (auto it = snap.objects.find(id); it != snap.objects.end()) return &it->second;
    return nullptr;
  };
  MemoryCatalog view;
  for (const auto& id : references(obj)) {
    if (id == self) {
      out.push_back({"references", "object cannot reference itself"});
    } else if (const auto* target = lookup(id)) {
      view.put(*target);
    } else {
      out.push_back({"references", "missing object '" + id + "'"});
    }
  }
  if (!out.empty()) throw ValidationError(std::move(out));

  auto require_class = [&](const std::string& field, const std::string& id,
                           std::initializer_list<MediaClass> allowed) {
    const auto cls = view.media_class(id);
    if (!cls || std::find(allowed.begin(), allowed.end(), *cls) == allowed.end()) {
      out.push_back({field, "'" + id + "' has the wrong media kind"});
    }
  };

  if (const auto* c = std::get_if<Collection>(&obj)) {
    switch (c->kind) {
      case CollectionKind::AudioImagePair: {
        const auto a = view.media_class(c->members[0]);
        const auto b = view.media_class(c->members[1]);
        const bool ok = (a == MediaClass::Audio && b == MediaClass::Image) ||
                        (a == MediaClass::Image && b == MediaClass::Audio);
        if (!ok) out.push_back({"members", "pair needs exactly one audio and one image member"});
        break;
      }
      case CollectionKind::AudioSentence:
        for (const auto& m : c->members) require_class("members", m, {MediaClass::Audio});
        break;
      case CollectionKind::AudioLayer:
        for (const auto& l : c->layers) require_class("layers", l.audio_id, {MediaClass::Audio});
        break;
      case CollectionKind::ImagePhrase:
        for (const auto& m : c->members) {
          require_class("members", m, {MediaClass::Image, MediaClass::Teleprompt});
        }
        break;
      case CollectionKind::Folder:
        break;
    }
  } else if (const auto* a = std::get_if<MultiRoleAssignment>(&obj)) {
    auto venue = view.find_as<Venue>(a->venue_id);
    if (!venue) {
      out.push_back({"venue_id", "'" + a->venue_id + "' is not a venue"});
    } else {
      for (const auto& [role_name, target] : a->bindings) {
        const auto* vr = venue->find_role(role_name);
        if (!vr) {
          out.push_back({"bindings." + role_name, "role not in venue '" + venue->name + "'"});
          continue;
        }
        const auto& caps = vr->role.capabilities;
        const auto cls = view.media_class(target);
        bool ok = false;
        if (cls == MediaClass::Audio) ok = caps.has(Capability::ReceiveAudio);
        if (cls == MediaClass::Image) ok = caps.has(Capability::ReceiveImage);
        if (cls == MediaClass::Teleprompt) ok = caps.has(Capability::ReceiveText);
        if (cls == MediaClass::Pair) {
          ok = caps.has(Capability::ReceiveAudio) || caps.has(Capability::ReceiveImage);
        }
        if (cls == MediaClass::Interface) ok = caps.has(Capability::ReceiveInterface);
        if (!ok) {
          out.push_back({"bindings." + role_name, "role cannot receive the assigned content"});
        }
      }
    }
  } else if (const auto* f = std::get_if<FractionalAssignment>(&obj)) {
    for (const auto& id : f->fractions) {
      require_class("fractions", id, {MediaClass::Audio, MediaClass::Image, MediaClass::Teleprompt,
                                      MediaClass::Pair});
    }
  } else if (const auto* alg = std::get_if<AlgorithmObject>(&obj)) {
    if (const auto* t = std::get_if<TimedOrganizationSpec>(&alg->spec)) {
      for (const auto& e : t->entries) {
        auto trig = view.find_as<AlgorithmObject>(e.trigger_id);
        if (!trig || !(std::holds_alternative<TimerSpec>(trig->spec) ||
                       std::holds_alternative<MetronomeSpec>(trig->spec))) {
          out.push_back({"entries.trigger_id", "'" + e.trigger_id + "' is not a timer or metronome"});
        }
      }
    }
  }
  if (!out.empty()) throw ValidationError(std::move(out));
}

void ContentStore::render(Collection& c, const Snapshot& snap) {
  if (!renders_audio(c.kind)) return;
  auto pcm_of = [&](const std::string& id) {
    (void)snap;
    return pcm_for(id);
  };
  // pcm_for reads through the published snapshot; members were verified
  // present in `snap`, which is that snapshot while the writer lock is held.
  if (c.kind == CollectionKind::AudioSentence) {
    std::vector<audio::Pcm> pcms;
    pcms.reserve(c.members.size());
    for (const auto& id : c.members) pcms.push_back(pcm_of(id));
    std::vector<audio::AudioClip> clips;
    for (std::size_t i = 0; i < c.members.size(); ++i) clips.push_back({c.members[i], pcms[i]});
    auto r = audio::concatenate_sentence(clips);
    c.offsets_ms = r.offsets_ms;
    c.offsets_samples = r.offsets_samples;
    c.duration_ms = r.total_duration_ms;
    c.blob_id = put_blob(audio::encode_wav(r.pcm));
  } else {
    std::vector<audio::Pcm> pcms;
    pcms.reserve(c.layers.size());
    for (const auto& l : c.layers) pcms.push_back(pcm_of(l.audio_id));
    std::vector<audio::LayerInput> inputs;
    for (std::size_t i = 0; i < c.layers.size(); ++i) {
      inputs.push_back({c.layers[i].audio_id, pcms[i], c.layers[i].start_ms, c.layers[i].volume});
    }
    auto r = audio::mix_layers(inputs);
    c.duration_ms = r.duration_ms;
    c.blob_id = put_blob(audio::encode_wav(r.pcm));
  }
}

// ---------------------------------------------------------------------------
// Queries

std::optional<StoredObject> ContentStore::find(const std::string& id) const {
  auto snap = snapshot();
  if (auto it = snap->objects.find(id); it != snap->objects.end()) return it->second;
  return std::nullopt;
}

StoredObject ContentStore::get(const std::string& id) const {
  if (auto obj = find(id)) return *obj;
  throw Error("not-found", "no object '" + id + "'");
}

std::optional<StoredObject> ContentStore::find_by_name(std::string_view type,
                                                       std::string_view name) const {
  auto snap = snapshot();
  for (const auto& [id, obj] : snap->objects) {
    if (object_type(obj) == type && object_name(obj) == name) return obj;
  }
  return std::nullopt;
}

std::vector<std::string> ContentStore::list(const ListFilter& filter) const {
  auto snap = snapshot();
  std::optional<std::vector<std::string>> folder_members;
  if (filter.folder_id) {
    auto it = snap->objects.find(*filter.folder_id);
    const auto* folder = it == snap->objects.end() ? nullptr : std::get_if<Collection>(&it->second);
    if (!folder || folder->kind != CollectionKind::Folder) {
      throw Error("not-found", "no folder '" + *filter.folder_id + "'");
    }
    folder_members = folder->members;
  }

  std::vector<const StoredObject*> hits;
  for (const auto& [id, obj] : snap->objects) {
    if (filter.type && object_type(obj) != *filter.type) continue;
    if (filter.content_kind) {
      const auto* c = std::get_if<ContentObject>(&obj);
      if (!c || c->kind != *filter.content_kind) continue;
    }
    if (filter.collection_kind) {
      const auto* c = std::get_if<Collection>(&obj);
      if (!c || c->kind != *filter.collection_kind) continue;
    }
    if (folder_members &&
        std::find(folder_members->begin(), folder_members->end(), id) == folder_members->end()) {
      continue;
    }
    hits.push_back(&obj);
  }
  std::sort(hits.begin(), hits.end(), [](const StoredObject* a, const StoredObject* b) {
    return std::tie(object_name(*a), object_id(*a)) < std::tie(object_name(*b), object_id(*b));
  });
  std::vector<std::string> out;
  for (const auto* h : hits) out.push_back(object_id(*h));
  return out;
}

std::vector<std::string> ContentStore::referencing(const std::string& id) const {
  auto snap = snapshot();
  std::vector<std::string> out;
  for (const auto& [other, obj] : snap->objects) {
    const auto refs = references(obj);
    if (std::find(refs.begin(), refs.end(), id) != refs.end()) out.push_back(other);
  }
  return out;
}

void ContentStore::remove(const std::string& id) {
  std::lock_guard guard(write_mutex_);
  auto snap = snapshot();
  auto it = snap->objects.find(id);
  if (it == snap->objects.end()) throw Error("not-found", "no object '" + id + "'");
  if (object_lock(it->second)) {
    throw Error("locked", "'" + object_name(it->second) + "' is locked; unlock it to delete");
  }
  if (auto by = referencing(id); !by.empty()) throw ReferencedError(id, std::move(by));
  auto next = std::make_shared<Snapshot>(*snap);
  next->objects.erase(id);
  fs::remove(root_ / "objects" / (id + ".json"));
  std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(next)));
}

void ContentStore::lock(const std::string& id, std::string_view passcode) {
  std::lock_guard guard(write_mutex_);
  auto snap = snapshot();
  auto it = snap->objects.find(id);
  if (it == snap->objects.end()) throw Error("not-found", "no object '" + id + "'");
  if (object_lock(it->second)) throw Error("already-locked", "'" + id + "' is already locked");
  auto obj = it->second;
  object_lock(obj) = make_lock(passcode);
  auto next = std::make_shared<Snapshot>(*snap);
  next->objects.insert_or_assign(id, obj);
  commit(std::move(next), obj);
}

void ContentStore::unlock(const std::string& id, std::string_view passcode) {
  std::lock_guard guard(write_mutex_);
  auto snap = snapshot();
  auto it = snap->objects.find(id);
  if (it == snap->objects.end()) throw Error("not-found", "no object '" + id + "'");
  const auto& rec = object_lock(it->second);
  if (!rec) throw Error("not-locked", "'" + id + "' is not locked");
  if (!verify_passcode(*rec, passcode)) throw Error("wrong-passcode", "passcode does not match");
  auto obj = it->second;
  object_lock(obj).reset();
  auto next = std::make_shared<Snapshot>(*snap);
  next->objects.insert_or_assign(id, obj);
  commit(std::move(next), obj);
}

bool ContentStore::is_locked(const std::string& id) const {
  return object_lock(get(id)).has_value();
}

// ---------------------------------------------------------------------------
// Media

MediaBlob ContentStore::blob(const std::string& blob_id) const {
  if (blob_id.empty() || blob_id.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw Error("not-found", "no blob '" + blob_id + "'");
  }
  const auto path = root_ / "blobs" / blob_id;
  if (!fs::exists(path)) throw Error("not-found", "no blob '" + blob_id + "'");
  MediaBlob b;
  b.blob_id = blob_id;
  b.bytes = read_file(path);
  b.mime = sniff_mime(b.bytes);
  auto snap = snapshot();
  for (const auto& [id, obj] : snap->objects) {
    if (const auto* c = std::get_if<ContentObject>(&obj); c && c->blob_id == blob_id) {
      if (c->origin) b.origin = *c->origin;
      break;
    }
    if (const auto* c = std::get_if<Collection>(&obj); c && c->blob_id == blob_id) {
      b.origin.kind = MediaOrigin::Kind::Rendered;
      b.origin.rendered = c->kind == CollectionKind::AudioSentence ? "sentence" : "layer";
      break;
    }
  }
  return b;
}

audio::Pcm ContentStore::pcm_for(const std::string& id) const {
  auto obj = get(id);
  std::string blob_id;
  if (const auto* c = std::get_if<ContentObject>(&obj); c && is_audio(c->kind)) {
    blob_id = c->blob_id;
  } else if (const auto* col = std::get_if<Collection>(&obj); col && renders_audio(col->kind)) {
    blob_id = col->blob_id;
  } else {
    throw Error("wrong-type", "'" + id + "' is not audio");
  }
  const auto bytes = read_file(root_ / "blobs" / blob_id);
  if (!audio::looks_like_wav(bytes)) {
    throw Error("unsupported-media", "'" + object_name(obj) +
                                         "' is compressed audio; sentences and layers need PCM/WAV members");
  }
  return audio::decode_wav(bytes);
}

}  // namespace telebrain
