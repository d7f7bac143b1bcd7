#pragma once

#include "toonforge/catalog.hpp"
#include "toonforge/modelio.hpp"
#include "toonforge/textparse.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline std::filesystem::path data_dir() { return TOONFORGE_DATA_DIR; }

inline const toonforge::ComponentCatalog& default_catalog() {
    static const toonforge::ComponentCatalog c = toonforge::load_catalog(data_dir() / "catalog");
    return c;
}

inline const toonforge::Lexicon& default_lexicon() {
    static const toonforge::Lexicon l = toonforge::load_lexicon(data_dir() / "lexicon.txt", default_catalog());
    return l;
}

/// The shipped fixture character.
inline const toonforge::CharacterModel& default_character() {
    static const toonforge::CharacterModel m = toonforge::load_model(data_dir() / "characters" / "default");
    return m;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("toonforge_" + tag + "_" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
