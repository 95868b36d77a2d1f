#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace telebrain::wire {

struct GoldenFrame {
  std::string name;       // file stem, e.g. "03-server-join_ack"
  std::string direction;  // "client" or "server"
  std::string frame;      // exact serialized bytes
};

/// Frames of a scripted two-performer session (start, join, clock sync, a
/// cue with its activity entries and ack, a functionality change, test
/// mode, a refused send, leave), captured from the real protocol state
/// machine on a virtual clock with fixed seeds. Covers every message type
/// and is byte-stable across runs. `scratch` must be an empty directory;
/// it receives the temporary content store.
std::vector<GoldenFrame> golden_corpus(const std::filesystem::path& scratch);

/// Writes <dir>/<name>.json for each frame (no trailing newline).
void write_golden(const std::vector<GoldenFrame>& frames, const std::filesystem::path& dir);

}  // namespace telebrain::wire
