#include "support.hpp"

#include "toonforge/archive.hpp"
#include "toonforge/raster.hpp"
#include "toonforge/service.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <thread>

using namespace toonforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const Resources> resources() {
    static const auto r = std::make_shared<const Resources>(
        load_resources(testing::data_dir() / "catalog", testing::data_dir() / "lexicon.txt"));
    return r;
}

std::string digest32(const std::string& s) {
    return sha256_hex(std::vector<std::uint8_t>(s.begin(), s.end())).substr(0, 32);
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

struct Fixture {
    testing::TempDir tmp{"service"};
    Api api{resources(), tmp.path() / "store"};
    std::string id;

    Fixture() { id = api.store().put_character(encode_bundle(testing::default_character())).id; }

    ApiResponse get(const std::string& path, std::map<std::string, std::string> query = {}) {
        return api.handle({"GET", path, std::move(query), {}});
    }
    ApiResponse post(const std::string& path, const json& body) {
        return api.handle({"POST", path, {}, body.dump()});
    }
    std::vector<std::string> index_lines() {
        std::ifstream in(tmp.path() / "store" / "index.tsv");
        std::vector<std::string> lines;
        for (std::string l; std::getline(in, l);) lines.push_back(l);
        return lines;
    }
};

RasterImage expected_frame(const PoseValues& values, int width) {
    const CharacterModel& m = testing::default_character();
    const Size vp{width, width * m.canvas_size.height / m.canvas_size.width};
    return rasterize(apply_parameters(m, values), vp, Rgba{});
}

}  // namespace

TEST_CASE("ids are well formed") {
    CHECK(valid_id("0123456789abcdef0123456789abcdef"));
    CHECK_FALSE(valid_id("0123456789ABCDEF0123456789abcdef"));
    CHECK_FALSE(valid_id("../../etc/passwd"));
    CHECK_FALSE(valid_id(""));
}

TEST_CASE("create character") {
    Fixture f;
    const ApiResponse r = f.post("/v1/characters", {{"text", ""}, {"seed", 0}});
    REQUIRE(r.status == 201);
    const json j = json::parse(r.body);
    const std::string hash = bundle_digest(encode_bundle(testing::default_character()));
    CHECK(j.at("content_hash") == hash);
    CHECK(j.at("id") == digest32(hash + "\n\n"));
    // the pre-stored fixture has the same provenance, so the same id
    CHECK(j.at("id") == f.id);
    CHECK(f.index_lines() == std::vector<std::string>{"character\t" + f.id + "\t" + hash + "\t-"});

    CHECK(f.post("/v1/characters", {{"seed", -1}}).status == 422);
    CHECK(f.post("/v1/characters", {{"text", 5}}).status == 422);
    CHECK(f.api.handle({"POST", "/v1/characters", {}, "{oops"}).status == 400);
    CHECK(f.get("/v1/characters").status == 405);
}

TEST_CASE("model download") {
    Fixture f;
    const ApiResponse r = f.get("/v1/characters/" + f.id + "/model");
    REQUIRE(r.status == 200);
    CHECK(r.content_type == "application/zip");
    const Bundle b = zip_read(bytes_of(r.body));
    CHECK(decode_bundle(b) == testing::default_character());
    CHECK(bundle_digest(b) == f.api.store().find_character(f.id)->content_hash);

    CHECK(f.get("/v1/characters/0123456789abcdef0123456789abcdef/model").status == 404);
    CHECK(f.get("/v1/characters/not-an-id/model").status == 404);
    CHECK(json::parse(f.get("/v1/nowhere").body).contains("error"));
    CHECK(f.get("/v1/characters/" + f.id + "/bogus").status == 404);
    CHECK(f.api.handle({"POST", "/v1/characters/" + f.id + "/model", {}, "{}"}).status == 405);
}

TEST_CASE("edits create children") {
    Fixture f;
    const json same = {{"ops", {{{"op", "swap"}, {"slot", "top"}, {"variant", "top_hoodie"}}}}};
    const ApiResponse r = f.post("/v1/characters/" + f.id + "/edits", same);
    REQUIRE(r.status == 201);
    const json j = json::parse(r.body);
    const std::string parent_hash = f.api.store().find_character(f.id)->content_hash;
    // new record, unchanged content
    CHECK(j.at("parent") == f.id);
    CHECK(j.at("content_hash") == parent_hash);
    CHECK(j.at("id") != f.id);
    CHECK(j.at("id") == digest32(parent_hash + "\n" + f.id + "\n" + same["ops"].dump()));
    // repeating the same edit is idempotent
    CHECK(json::parse(f.post("/v1/characters/" + f.id + "/edits", same).body).at("id") == j.at("id"));
    CHECK(f.index_lines().size() == 2);

    const json recolor = {{"ops", {{{"op", "recolor"}, {"slot", "top"}, {"rgb", "pink"}}}}};
    const json k = json::parse(f.post("/v1/characters/" + f.id + "/edits", recolor).body);
    CHECK(k.at("content_hash") != parent_hash);
    const Bundle child = *f.api.store().get_bundle(k.at("id"));
    const Rgb pink = resources()->lexicon.find_color("pink")->rgb;
    CHECK(decode_bundle(child) == apply_edits(testing::default_character(), {RecolorOp{"top", pink}}, *resources()));

    RasterImage mask(testing::default_character().canvas_size.width, testing::default_character().canvas_size.height);
    mask.at(512, 300) = kMaskOn;
    const json masked = {{"ops", {{{"op", "mask_recolor"}, {"mask", base64_encode(encode_png(mask))}, {"rgb", "#00ff00"}}}}};
    CHECK(f.post("/v1/characters/" + f.id + "/edits", masked).status == 201);

    for (const json& bad : {json{{"ops", {{{"op", "swap"}, {"slot", "hat"}, {"variant", "x"}}}}},
                            json{{"ops", {{{"op", "recolor"}, {"slot", "top"}, {"rgb", "nope"}}}}},
                            json{{"ops", {{{"op", "twirl"}}}}}, json{{"ops", json::array()}}, json::object(),
                            json{{"ops", {{{"op", "mask_recolor"}, {"mask", "!!"}, {"rgb", "#000000"}}}}},
                            json{{"ops", {{{"op", "mask_recolor"}, {"mask", base64_encode(encode_png(RasterImage(4, 4)))},
                                           {"rgb", "#000000"}}}}}})
        CHECK_MESSAGE(f.post("/v1/characters/" + f.id + "/edits", bad).status == 422, bad.dump());
}

TEST_CASE("frames") {
    Fixture f;
    const std::string path = "/v1/characters/" + f.id + "/frame";
    const ApiResponse rest = f.get(path, {{"size", "128"}});
    REQUIRE(rest.status == 200);
    CHECK(rest.content_type == "image/png");
    CHECK(decode_png(bytes_of(rest.body)) == expected_frame({}, 128));

    const ApiResponse open = f.get(path, {{"size", "128"}, {"params", "MouthOpenY:1,AngleX:-12.5"}});
    REQUIRE(open.status == 200);
    CHECK(decode_png(bytes_of(open.body)) == expected_frame({{"MouthOpenY", 1}, {"AngleX", -12.5}}, 128));
    CHECK(open.body != rest.body);

    CHECK(f.get(path, {{"params", "Wiggle:1"}}).status == 422);
    CHECK(f.get(path, {{"params", "MouthOpenY"}}).status == 400);
    CHECK(f.get(path, {{"params", "MouthOpenY:abc"}}).status == 400);
    CHECK(f.get(path, {{"size", "0"}}).status == 400);
    CHECK(f.get(path, {{"size", "12px"}}).status == 400);
}

TEST_CASE("clips") {
    Fixture f;
    const std::string path = "/v1/characters/" + f.id + "/clips";
    const json events = {{"visemes", {{{"t", 0.0}, {"viseme", "A"}, {"weight", 1.0}}, {{"t", 0.25}, {"viseme", "O"}}}},
                         {"fps", 20}};
    const ApiResponse r = f.post(path, events);
    REQUIRE(r.status == 201);
    const std::string clip_id = json::parse(r.body).at("clip_id");
    CHECK(valid_id(clip_id));
    // the text form of the same timeline gives the same clip
    const ApiResponse t = f.post(path, {{"visemes", "0 A 1\n0.25 O 1\n"}, {"fps", 20}});
    CHECK(json::parse(t.body).at("clip_id") == clip_id);
    const auto stored = f.api.store().get_clip(clip_id);
    REQUIRE(stored);
    CHECK(stored->character_id == f.id);
    CHECK(clip_id == digest32(f.id + "\n" + clip_text(stored->clip)));

    const ApiResponse z = f.get("/v1/clips/" + clip_id + "/frames", {{"fps", "8"}, {"size", "64"}});
    REQUIRE(z.status == 200);
    const Bundle frames = zip_read(bytes_of(z.body));
    REQUIRE(frames.size() == frame_count(stored->clip.duration, 8));
    const CharacterModel& m = testing::default_character();
    for (std::size_t k = 0; k < frames.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05zu.png", k);
        CHECK(frames[k].path == name);
    }
    CHECK(decode_png(frames[1].bytes) ==
          rasterize(apply_parameters(m, sample_clip(stored->clip, 1.0 / 8)), {64, 64}, Rgba{}));

    std::vector<ArkitFrame> arkit(2);
    arkit[1].t = 0.5;
    arkit[1].set("jawOpen", 1.0);
    arkit[1].set("mouthSmileLeft", 0.5);
    CHECK(f.post(path, {{"arkit", write_arkit_csv(arkit)}}).status == 201);
    CHECK(f.post(path, {{"arkit", "time,jawOpen\n0,1\n"}}).status == 422);

    CHECK(f.post(path, {{"visemes", {{{"t", 0}, {"viseme", "Q"}}}}}).status == 422);
    CHECK(f.post(path, {{"visemes", {{{"t", 1}, {"viseme", "A"}}, {{"t", 0}, {"viseme", "A"}}}}}).status == 422);
    CHECK(f.post(path, {{"visemes", "0 A 1\n"}, {"fps", 0}}).status == 422);
    CHECK(f.post(path, json::object()).status == 422);
    CHECK(f.get("/v1/clips/0123456789abcdef0123456789abcdef/frames").status == 404);
    CHECK(f.get("/v1/clips/" + clip_id + "/frames", {{"fps", "0"}}).status == 400);
}

TEST_CASE("concurrent identical writes keep one record") {
    Fixture f;
    const std::string path = "/v1/characters/" + f.id + "/clips";
    std::vector<std::thread> threads;
    std::vector<std::string> ids(8);
    for (std::size_t i = 0; i < ids.size(); ++i)
        threads.emplace_back([&, i] { ids[i] = json::parse(f.post(path, {{"visemes", "0 E 0.5\n"}}).body).at("clip_id"); });
    for (auto& t : threads) t.join();
    for (const auto& id : ids) CHECK(id == ids[0]);
    CHECK(f.index_lines().size() == 2);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(f.tmp.path() / "store" / "clips")) files += e.is_regular_file();
    CHECK(files == 1);
}

TEST_CASE("store root from the environment") {
    ::unsetenv("TOONFORGE_STORE");
    CHECK(store_root("fallback") == fs::path("fallback"));
    ::setenv("TOONFORGE_STORE", "/tmp/elsewhere", 1);
    CHECK(store_root("fallback") == fs::path("/tmp/elsewhere"));
    ::unsetenv("TOONFORGE_STORE");
}

TEST_CASE("over a socket") {
    Fixture f;
    HttpServer server(f.api);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread runner([&] { server.run(); });
    server.wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    auto model = cli.Get("/v1/characters/" + f.id + "/model");
    REQUIRE(model);
    CHECK(model->status == 200);
    CHECK(model->get_header_value("Content-Type") == "application/zip");
    CHECK(model->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(decode_bundle(zip_read(bytes_of(model->body))) == testing::default_character());

    auto frame = cli.Get("/v1/characters/" + f.id + "/frame?size=96&params=MouthOpenY:1");
    REQUIRE(frame);
    CHECK(frame->status == 200);
    CHECK(decode_png(bytes_of(frame->body)) == expected_frame({{"MouthOpenY", 1}}, 96));

    auto bad = cli.Post("/v1/characters/" + f.id + "/edits", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    auto missing = cli.Get("/v2/anything");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto preflight = cli.Options("/v1/characters");
    REQUIRE(preflight);
    CHECK(preflight->status == 204);

    server.stop();
    runner.join();
}
