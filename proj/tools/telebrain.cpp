// telebrain: operator command line.
//
// Data goes to stdout as JSON. Every failure prints one JSON object on a
// single stderr line and exits nonzero:
//   {"error": {"code": "...", "message": "...", "violations": [...]}}

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "telebrain/config.hpp"
#include "telebrain/content_store.hpp"
#include "telebrain/declarative.hpp"
#include "telebrain/golden.hpp"
#include "telebrain/perpl.hpp"
#include "telebrain/server.hpp"
#include "telebrain/venue_runtime.hpp"

namespace fs = std::filesystem;
using namespace telebrain;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void print_error(std::string_view code, std::string_view message, const Json& violations = {}) {
  Json err{{"code", code}, {"message", message}};
  if (!violations.is_null()) err["violations"] = violations;
  std::cerr << Json{{"error", err}}.dump() << std::endl;
}

void emit(const Json& j) { std::cout << j.dump() << std::endl; }

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const fs::path& p) {
  const auto bytes = read_file(p);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw Error("malformed", p.string() + ": " + e.what());
  }
}

/// Where the store lives and how speech is rendered, from the shared
/// --config / --data-dir options.
struct StoreSettings {
  std::string config_path;
  std::string data_dir;

  ServerConfig resolve() const {
    ServerConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
    } else {
      apply_env(cfg);
    }
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    return cfg;
  }

  ContentStore open() const {
    const auto cfg = resolve();
    std::shared_ptr<audio::TtsAdapter> tts;
    if (cfg.tts) {
      tts = std::make_shared<audio::HttpTtsAdapter>(*cfg.tts);
    } else {
      tts = std::make_shared<audio::ToneStubTts>();
    }
    return ContentStore(ContentStore::Options{cfg.data_dir, std::make_shared<HttpFetcher>(), tts,
                                              std::nullopt});
  }
};

void add_store_options(CLI::App& cmd, StoreSettings& s) {
  cmd.add_option("--config", s.config_path, "Server config file (supplies data_dir and tts)");
  cmd.add_option("--data-dir", s.data_dir,
                 "Content store directory (overrides config and TELEBRAIN_DATA_DIR)");
}

std::string audio_mime(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".mp3") return "audio/mpeg";
  return "audio/wav";
}

std::string image_mime(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

int run_serve(const std::string& config_path) {
  auto cfg = load_config(config_path);
  spdlog::set_level(spdlog::level::info);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server::Server srv(std::move(cfg));
  srv.start();
  emit(Json{{"http_port", srv.http_port()}, {"osc_port", srv.osc_port()}});

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}: shutting down", sig);
    srv.stop();
  });
  srv.run();
  // Wake the waiter if the loop ended for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

std::vector<double> shuffled_values(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i + 1);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(v[i - 1], v[runtime::bounded_draw(rng, i)]);
  }
  return v;
}

Json simulate_perpl(const Json& cfg) {
  if (!cfg.is_object()) throw Error("malformed", "simulation config must be an object");
  perpl::SimulationOptions options;
  options.sound_ms = cfg.value("sound_ms", options.sound_ms);

  std::vector<perpl::VirtualPerformer> performers;
  for (const auto& p : cfg.value("performers", Json::array())) {
    perpl::VirtualPerformer vp{p.value("name", "performer-" + std::to_string(performers.size() + 1)),
                               std::make_shared<perpl::ObedientPolicy>(),
                               {}};
    const auto posture = p.value("posture", "standing");
    if (posture != "standing" && posture != "sitting") {
      throw Error("invalid", "posture must be standing or sitting");
    }
    vp.state.posture =
        posture == "standing" ? perpl::Posture::Standing : perpl::Posture::Sitting;
    performers.push_back(std::move(vp));
  }

  auto parse_stream = [](const Json& arr) {
    if (!arr.is_array()) throw Error("malformed", "a stream must be an array of instructions");
    std::vector<perpl::PerplInstruction> out;
    for (const auto& i : arr) out.push_back(perpl::instruction_from_json(i));
    return out;
  };

  const auto mode = cfg.value("mode", "simd");
  std::vector<perpl::PerformerTimeline> timelines;
  if (mode == "simd") {
    timelines = perpl::simulate(parse_stream(cfg.value("stream", Json::array())),
                                std::move(performers), options);
  } else if (mode == "mimd") {
    std::vector<std::vector<perpl::PerplInstruction>> streams;
    for (const auto& s : cfg.value("streams", Json::array())) streams.push_back(parse_stream(s));
    timelines = perpl::simulate(streams, std::move(performers), options);
  } else {
    throw Error("invalid", "mode must be simd or mimd");
  }
  Json out = Json::array();
  for (const auto& t : timelines) out.push_back(perpl::to_json(t));
  return Json{{"mode", mode}, {"timelines", std::move(out)}};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("telebrain"));
  spdlog::set_level(spdlog::level::off);

  CLI::App app{"Telematic performatization server and tools", "telebrain"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log to stderr");

  // serve
  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket and OSC server");
  serve->add_option("--config", serve_config, "Server config file")->required();

  // import
  StoreSettings store_settings;
  auto* import = app.add_subcommand("import", "Add media content to the store");
  import->require_subcommand(1);
  std::string file, url, name, text, language = "en";
  bool copyrighted = false;
  auto* import_audio = import->add_subcommand("audio", "Upload a WAV/MP3 file or save a web URL");
  auto* audio_file = import_audio->add_option("--file", file, "Local audio file");
  auto* audio_url = import_audio->add_option("--url", url, "Web audio URL");
  audio_file->excludes(audio_url);
  import_audio->add_option("--name", name, "Content name");
  import_audio->add_flag("--copyrighted", copyrighted, "Refuse as copyrighted");
  add_store_options(*import_audio, store_settings);

  auto* import_image = import->add_subcommand("image", "Upload an image or save a web URL");
  auto* image_file = import_image->add_option("--file", file, "Local image file");
  auto* image_url = import_image->add_option("--url", url, "Web image URL (.jpg or .png)");
  image_file->excludes(image_url);
  import_image->add_option("--name", name, "Content name");
  add_store_options(*import_image, store_settings);

  auto* import_tts = import->add_subcommand("tts", "Render text to speech and store it");
  import_tts->add_option("--text", text, "Up to 100 characters")->required();
  import_tts->add_option("--language", language, "Language tag");
  import_tts->add_option("--name", name, "Content name");
  add_store_options(*import_tts, store_settings);

  // venue
  auto* venue = app.add_subcommand("venue", "Declarative venue setup");
  venue->require_subcommand(1);
  std::string venue_file;
  auto* venue_apply = venue->add_subcommand("apply", "Upsert venues, roles and assignments");
  venue_apply->add_option("file", venue_file, "Declarative JSON file")->required();
  add_store_options(*venue_apply, store_settings);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run virtual-performer simulations");
  simulate->require_subcommand(1);
  std::size_t n = 5;
  std::string policy = "obedient";
  double defiance = 0.3;
  std::uint64_t seed = 1;
  std::size_t max_iterations = perpl::kDefaultIterationCap;
  std::vector<double> values;
  std::string trace_out;
  auto* bubble = simulate->add_subcommand("bubble-sort", "Performatized bubble sort");
  bubble->add_option("--n", n, "Number of performers (values 1..n, shuffled by seed)")
      ->check(CLI::Range(1, 100000));
  bubble->add_option("--values", values, "Explicit initial values (overrides --n)")
      ->delimiter(',');
  bubble->add_option("--policy", policy, "obedient or willful")
      ->check(CLI::IsMember({"obedient", "willful"}));
  bubble->add_option("--p", defiance, "Willful defiance probability")->check(CLI::Range(0.0, 1.0));
  bubble->add_option("--seed", seed, "RNG seed for the shuffle and the willful policy");
  bubble->add_option("--max-iterations", max_iterations, "Iteration cap")
      ->check(CLI::PositiveNumber);
  bubble->add_option("--out", trace_out, "Trace file (JSON lines); default stdout");

  std::string sim_config;
  auto* sim_perpl = simulate->add_subcommand("perpl", "Run PerPL instruction streams");
  sim_perpl->add_option("--config", sim_config, "Simulation file")->required();

  // protocol
  auto* protocol = app.add_subcommand("protocol", "Wire protocol fixtures");
  protocol->require_subcommand(1);
  std::string golden_out;
  auto* golden = protocol->add_subcommand("golden", "Regenerate golden wire frames");
  golden->add_option("--out", golden_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*serve) return run_serve(serve_config);

    if (*import_audio) {
      if (file.empty() == url.empty()) throw Error("missing-field", "give --file or --url");
      auto store = store_settings.open();
      ContentObject c;
      if (!file.empty()) {
        const auto bytes = read_file(file);
        c = store.save_upload(bytes, audio_mime(file), ContentKind::AudioUpload,
                              name.empty() ? fs::path(file).stem().string() : name);
      } else {
        c = store.save_web_audio(url, name, copyrighted);
      }
      emit(to_document(c));
      return 0;
    }
    if (*import_image) {
      if (file.empty() == url.empty()) throw Error("missing-field", "give --file or --url");
      auto store = store_settings.open();
      ContentObject c;
      if (!file.empty()) {
        const auto bytes = read_file(file);
        c = store.save_upload(bytes, image_mime(file), ContentKind::ImageUpload,
                              name.empty() ? fs::path(file).stem().string() : name);
      } else {
        c = store.save_web_image(url, name);
      }
      emit(to_document(c));
      return 0;
    }
    if (*import_tts) {
      auto store = store_settings.open();
      emit(to_document(store.save_tts(text, language, name)));
      return 0;
    }
    if (*venue_apply) {
      auto store = store_settings.open();
      emit(apply_declarations(store, read_json(venue_file)).to_json());
      return 0;
    }
    if (*bubble) {
      if (values.empty()) values = shuffled_values(n, seed);
      const auto initial = values;
      std::unique_ptr<perpl::SwapPolicy> swap;
      if (policy == "willful") {
        swap = std::make_unique<perpl::WillfulSwap>(defiance, seed);
      } else {
        swap = std::make_unique<perpl::ObedientSwap>();
      }
      const auto trace = perpl::performatize_bubble_sort(values, *swap, max_iterations);
      if (trace_out.empty()) {
        std::cout << trace.to_json_lines() << std::flush;
      } else {
        std::ofstream out(trace_out, std::ios::binary | std::ios::trunc);
        out << trace.to_json_lines();
        out.close();
        if (!out) throw Error("io", "cannot write " + trace_out);
        emit(Json{{"trace", trace_out},
                  {"initial", initial},
                  {"final_order", trace.final_order},
                  {"iterations", trace.iterations.size()},
                  {"policy", trace.policy},
                  {"sorted", trace.sorted()},
                  {"verdict", perpl::to_string(trace.verdict)}});
      }
      return 0;
    }
    if (*sim_perpl) {
      emit(simulate_perpl(read_json(sim_config)));
      return 0;
    }
    if (*golden) {
      const auto scratch = fs::temp_directory_path() /
                           ("telebrain-golden-" + std::to_string(std::random_device{}()));
      fs::create_directories(scratch);
      std::vector<wire::GoldenFrame> frames;
      try {
        frames = wire::golden_corpus(scratch);
      } catch (...) {
        fs::remove_all(scratch);
        throw;
      }
      fs::remove_all(scratch);
      wire::write_golden(frames, golden_out);
      emit(Json{{"written", frames.size()}, {"dir", golden_out}});
      return 0;
    }
  } catch (const ValidationError& e) {
    Json v = Json::array();
    for (const auto& x : e.violations()) v.push_back({{"field", x.field}, {"message", x.message}});
    print_error(e.code(), e.what(), v);
    return kExitFailure;
  } catch (const ReferencedError& e) {
    print_error(e.code(), e.what(), Json{{"referenced_by", e.referencing_ids()}});
    return kExitFailure;
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    print_error("io", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitFailure;
  }
  print_error("usage", "no command given");
  return kExitUsage;
}
