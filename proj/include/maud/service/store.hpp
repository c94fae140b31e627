#pragma once

// Directory-backed document store: one file per document plus index.json.
// Writes go to a temporary file and are renamed into place.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maud/assessment.hpp"
#include "maud/error.hpp"

namespace maud::service {

struct StoreEntry {
  std::string kind;  // "kb" | "profile"
  std::string id;
  std::string owner;
  std::string created;
  std::string fingerprint;
  std::uint64_t seq = 0;
};

inline nlohmann::json entry_to_json(const StoreEntry& e) {
  return {{"kind", e.kind}, {"id", e.id}, {"owner", e.owner}, {"created", e.created},
          {"fingerprint", e.fingerprint}, {"seq", e.seq}};
}

class DocumentStore {
 public:
  explicit DocumentStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    for (const char* sub : {"kbs", "profiles", "sessions"}) std::filesystem::create_directories(root_ / sub, ec);
    if (ec) throw Error(Errc::io, "cannot create storage directory " + root_.string() + ": " + ec.message());
    load_index();
  }

  const std::filesystem::path& root() const { return root_; }

  /// Stores an immutable document and returns its index entry.
  StoreEntry put(const std::string& kind, const std::string& bytes, const std::string& owner,
                 const std::string& fingerprint) {
    std::lock_guard lock(mu_);
    StoreEntry e;
    e.kind = kind;
    e.seq = next_seq_++;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(e.seq));
    e.id = kind + "-" + buf;
    e.owner = owner;
    e.created = detail::utc_timestamp();
    e.fingerprint = fingerprint;
    write_atomic(path_for(kind, e.id), bytes);
    entries_.push_back(e);
    save_index();
    return e;
  }

  std::optional<std::string> get(const std::string& kind, const std::string& id) const {
    std::lock_guard lock(mu_);
    for (const auto& e : entries_)
      if (e.kind == kind && e.id == id) return read_file(path_for(kind, id));
    return std::nullopt;
  }

  /// Entries of one kind in creation order.
  std::vector<StoreEntry> list(const std::string& kind) const {
    std::lock_guard lock(mu_);
    std::vector<StoreEntry> out;
    for (const auto& e : entries_)
      if (e.kind == kind) out.push_back(e);
    return out;
  }

  void put_session(const std::string& id, const std::string& bytes) {
    std::lock_guard lock(mu_);
    write_atomic(session_path(id), bytes);
  }

  std::optional<std::string> get_session(const std::string& id) const {
    if (!valid_token(id)) return std::nullopt;
    std::lock_guard lock(mu_);
    auto p = session_path(id);
    if (!std::filesystem::exists(p)) return std::nullopt;
    return read_file(p);
  }

 private:
  static bool valid_token(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
    return true;
  }

  std::filesystem::path path_for(const std::string& kind, const std::string& id) const {
    return root_ / (kind + "s") / (id + ".json");
  }
  std::filesystem::path session_path(const std::string& id) const { return root_ / "sessions" / (id + ".json"); }

  static std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void write_atomic(const std::filesystem::path& p, const std::string& bytes) {
    auto tmp = p;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw Error(Errc::io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) throw Error(Errc::io, "cannot move " + tmp.string() + " into place: " + ec.message());
  }

  void load_index() {
    auto p = root_ / "index.json";
    if (!std::filesystem::exists(p)) return;
    auto j = nlohmann::json::parse(read_file(p));
    next_seq_ = j.value("next_seq", std::uint64_t{1});
    for (const auto& e : j.at("entries"))
      entries_.push_back({e.at("kind"), e.at("id"), e.value("owner", ""), e.value("created", ""),
                          e.value("fingerprint", ""), e.value("seq", std::uint64_t{0})});
  }

  void save_index() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries_) arr.push_back(entry_to_json(e));
    write_atomic(root_ / "index.json", nlohmann::json{{"next_seq", next_seq_}, {"entries", arr}}.dump(2));
  }

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::vector<StoreEntry> entries_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace maud::service
