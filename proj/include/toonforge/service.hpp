#pragma once

#include "toonforge/modelio.hpp"
#include "toonforge/pipeline.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace toonforge {

/// Directory store. Layout under the root:
///   bundles/<content hash>/...   one bundle directory per distinct content
///   characters/<id>.json         {content_hash, parent, ops}
///   clips/<clip id>.json         {character, clip}
///   index.tsv                    one line per created record
/// Records are create-only: written to a temporary name, then renamed.
class CharacterStore {
public:
    explicit CharacterStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    struct Record {
        std::string id;
        std::string content_hash;
        std::string parent;  // empty for generated characters
    };

    /// Id = digest of (content hash, parent id, canonical ops text). Storing the
    /// same triple twice returns the existing id.
    Record put_character(const Bundle& bundle, const std::string& parent = {}, const std::string& ops = {});
    std::optional<Record> find_character(const std::string& id) const;
    std::optional<Bundle> get_bundle(const std::string& id) const;

    std::string put_clip(const std::string& character_id, const AnimationClip& clip);
    struct StoredClip {
        std::string character_id;
        AnimationClip clip;
    };
    std::optional<StoredClip> get_clip(const std::string& clip_id) const;

private:
    void append_index(const std::string& line);

    std::filesystem::path root_;
    mutable std::mutex index_mutex_;
};

/// True for 32 lowercase hex digits, the shape of every store id.
bool valid_id(const std::string& id);

struct ApiRequest {
    std::string method;  // "GET" | "POST"
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Transport-independent v1 API. Thread-safe.
class Api {
public:
    Api(std::shared_ptr<const Resources> resources, std::filesystem::path store_root);

    ApiResponse handle(const ApiRequest& request);

    CharacterStore& store() { return store_; }

private:
    std::shared_ptr<const CharacterModel> model(const std::string& id);

    std::shared_ptr<const Resources> res_;
    CharacterStore store_;
    std::mutex cache_mutex_;
    std::map<std::string, std::shared_ptr<const CharacterModel>> cache_;
};

/// HTTP transport for an Api. bind() then run() (blocking); stop() may be
/// called from any thread.
class HttpServer {
public:
    explicit HttpServer(Api& api);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks an ephemeral port. Returns the bound port.
    int bind(const std::string& host, int port);
    void run();
    void stop();
    void wait_until_ready();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Store root: $TOONFORGE_STORE if set, else `fallback`.
std::filesystem::path store_root(const std::filesystem::path& fallback);

}  // namespace toonforge
