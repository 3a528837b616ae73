#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "raloha/image_io.hpp"
#include "raloha/noise.hpp"
#include "support/synth.hpp"

using namespace raloha;
namespace fs = std::filesystem;
namespace ts = raloha::testsupport;
using nlohmann::json;

namespace {

struct CliFixture {
  fs::path dir;

  CliFixture() {
    dir = fs::temp_directory_path() /
          ("raloha_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string file(const std::string& name) const {
    return (dir / name).string();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(RALOHA_CLI_BIN) + " " + args + " >" +
                            file("stdout.txt") + " 2>" + file("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(file(name), std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  }

  std::string out() const { return slurp("stdout.txt"); }
  std::string err() const { return slurp("stderr.txt"); }
};

void write_texture(const CliFixture& fx, const std::string& name, int n,
                   std::uint64_t seed) {
  ImageBuffer img;
  img.planes = {ts::texture_patch(n, 2, seed)};
  save_image(fx.file(name), img, 8);
}

}  // namespace

TEST_CASE("add-noise writes noisy image, mask, and manifest") {
  CliFixture fx;
  write_texture(fx, "clean.pgm", 48, 5);
  const int code =
      fx.run("add-noise " + fx.file("clean.pgm") + " " + fx.file("noisy.pgm") +
             " --kind rvin --p 0.25 --seed 7");
  REQUIRE(code == 0);
  CHECK(fs::exists(fx.file("noisy.pgm")));
  CHECK(fs::exists(fx.file("noisy_mask.pgm")));
  REQUIRE(fs::exists(fx.file("noisy.manifest.json")));

  const json manifest = json::parse(fx.slurp("noisy.manifest.json"));
  CHECK(manifest["command"] == "add-noise");
  CHECK(manifest["noise"]["kind"] == "rvin");
  CHECK(manifest["noise"]["p"] == 0.25);
  CHECK(manifest["noise"]["seed"] == 7);

  // the mask marks exactly the changed pixels as white
  const ImageBuffer clean = load_image(fx.file("clean.pgm"));
  const ImageBuffer noisy = load_image(fx.file("noisy.pgm"));
  const ImageBuffer mask = load_image(fx.file("noisy_mask.pgm"));
  for (int i = 0; i < 48; ++i) {
    for (int j = 0; j < 48; ++j) {
      if (mask.planes[0](i, j) == 0.0) {
        CHECK(clean.planes[0](i, j) == noisy.planes[0](i, j));
      }
    }
  }
}

TEST_CASE("add-noise is byte-deterministic for a fixed seed") {
  CliFixture fx;
  write_texture(fx, "clean.pgm", 40, 6);
  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " + fx.file("a.pgm") +
                 " --kind salt-pepper --p 0.3 --seed 123") == 0);
  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " + fx.file("b.pgm") +
                 " --kind salt-pepper --p 0.3 --seed 123") == 0);
  CHECK(fx.slurp("a.pgm") == fx.slurp("b.pgm"));
  CHECK(fx.slurp("a_mask.pgm") == fx.slurp("b_mask.pgm"));

  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " + fx.file("c.pgm") +
                 " --kind salt-pepper --p 0.3 --seed 124") == 0);
  CHECK(fx.slurp("a.pgm") != fx.slurp("c.pgm"));
}

TEST_CASE("out-of-range density exits 2 and names the flag") {
  CliFixture fx;
  write_texture(fx, "clean.pgm", 32, 7);
  const int code = fx.run("add-noise " + fx.file("clean.pgm") + " " +
                          fx.file("x.pgm") + " --p 1.5");
  CHECK(code == 2);
  CHECK(fx.err().find("--p") != std::string::npos);
}

TEST_CASE("missing input exits 3") {
  CliFixture fx;
  CHECK(fx.run("add-noise " + fx.file("nope.pgm") + " " + fx.file("x.pgm")) ==
        3);
  CHECK(fx.run("psnr " + fx.file("nope.pgm") + " " + fx.file("nope.pgm")) == 3);
}

TEST_CASE("denoise presets map to the published hyper-parameters") {
  CliFixture fx;
  write_texture(fx, "clean.pgm", 40, 8);
  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " +
                 fx.file("noisy.pgm") + " --kind rvin --p 0.2 --seed 3") == 0);
  REQUIRE(fx.run("denoise " + fx.file("noisy.pgm") + " " + fx.file("den.pgm") +
                 " --preset barbara") == 0);
  const json manifest = json::parse(fx.slurp("den.manifest.json"));
  CHECK(manifest["preset"] == "barbara");
  CHECK(manifest["solver"]["patch"] == json::array({25, 25}));
  CHECK(manifest["solver"]["filter"] == json::array({11, 11}));
  CHECK(manifest["solver"]["tau"] == 0.1);
  CHECK(manifest["solver"]["stride"] == json::array({12, 12}));

  SUBCASE("explicit flags override the preset") {
    REQUIRE(fx.run("denoise " + fx.file("noisy.pgm") + " " +
                   fx.file("den2.pgm") +
                   " --preset barbara --tau 0.075 --patch 16 --filter 7") == 0);
    const json m2 = json::parse(fx.slurp("den2.manifest.json"));
    CHECK(m2["solver"]["tau"] == 0.075);
    CHECK(m2["solver"]["patch"] == json::array({16, 16}));
    CHECK(m2["solver"]["filter"] == json::array({7, 7}));
  }
  SUBCASE("unknown preset exits 2") {
    CHECK(fx.run("denoise " + fx.file("noisy.pgm") + " " + fx.file("x.pgm") +
                 " --preset nonesuch") == 2);
  }
}

TEST_CASE("denoise with a reference appends a csv row and emits layers") {
  CliFixture fx;
  write_texture(fx, "clean.pgm", 40, 9);
  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " +
                 fx.file("noisy.pgm") + " --kind rvin --p 0.2 --seed 11") == 0);
  REQUIRE(fx.run("denoise " + fx.file("noisy.pgm") + " " + fx.file("den.pgm") +
                 " --patch 16 --filter 7 --stride 8 --reference " +
                 fx.file("clean.pgm") + " --p 0.2 --seed 11 --emit-layers") ==
          0);
  CHECK(fs::exists(fx.file("den_X.pgm")));
  CHECK(fs::exists(fx.file("den_E.pgm")));
  REQUIRE(fs::exists(fx.file("metrics.csv")));
  const std::string csv = fx.slurp("metrics.csv");
  CHECK(csv.find("image,noise_kind,p,seed,method,psnr_db,seconds") !=
        std::string::npos);
  CHECK(csv.find("robust-aloha") != std::string::npos);
  CHECK(fx.out().find("psnr_db=") != std::string::npos);
}

TEST_CASE("salt-pepper mode routes through detection and inpainting") {
  CliFixture fx;
  ImageBuffer img;
  img.planes = {ts::piecewise_smooth_image(40)};
  save_image(fx.file("clean.pgm"), img, 8);
  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " +
                 fx.file("noisy.pgm") +
                 " --kind salt-pepper --p 0.2 --seed 2") == 0);
  REQUIRE(fx.run("denoise " + fx.file("noisy.pgm") + " " + fx.file("den.pgm") +
                 " --mode salt-pepper --patch 16 --filter 7 --stride 8" +
                 " --reference " + fx.file("clean.pgm")) == 0);
  const json manifest = json::parse(fx.slurp("den.manifest.json"));
  CHECK(manifest["mode"] == "salt-pepper");
  const std::string csv = fx.slurp("metrics.csv");
  CHECK(csv.find("am-aloha") != std::string::npos);
}

TEST_CASE("psnr subcommand") {
  CliFixture fx;
  write_texture(fx, "a.pgm", 24, 10);

  SUBCASE("identical files print the infinity sentinel") {
    REQUIRE(fx.run("psnr " + fx.file("a.pgm") + " " + fx.file("a.pgm")) == 0);
    CHECK(fx.out().find("psnr_db=inf") != std::string::npos);
  }
  SUBCASE("dimension mismatch exits 2") {
    write_texture(fx, "b.pgm", 20, 10);
    CHECK(fx.run("psnr " + fx.file("a.pgm") + " " + fx.file("b.pgm")) == 2);
  }
  SUBCASE("a known uniform-error pair scores 20 dB") {
    ImageBuffer ref;
    ref.planes = {Patch::Constant(16, 16, 0.6)};
    ref.planes[0](0, 0) = 1.0;
    ImageBuffer cand = ref;
    cand.planes[0].array() += 0.1;
    // 16-bit storage keeps the quantization error negligible
    save_image(fx.file("ref.pgm"), ref, 16);
    save_image(fx.file("cand.pgm"), cand, 16);
    REQUIRE(fx.run("psnr " + fx.file("ref.pgm") + " " + fx.file("cand.pgm")) ==
            0);
    const std::string line = fx.out();
    const double db = std::stod(line.substr(line.find("psnr_db=") + 8));
    CHECK(db == doctest::Approx(20.0).epsilon(1e-3));
  }
}

TEST_CASE("thread count changes bytes nowhere") {
  CliFixture fx;
  write_texture(fx, "clean.pgm", 40, 12);
  REQUIRE(fx.run("add-noise " + fx.file("clean.pgm") + " " +
                 fx.file("noisy.pgm") + " --kind rvin --p 0.25 --seed 4") == 0);
  REQUIRE(fx.run("denoise " + fx.file("noisy.pgm") + " " + fx.file("t1.pgm") +
                 " --patch 16 --filter 7 --stride 8 --threads 1") == 0);
  REQUIRE(fx.run("denoise " + fx.file("noisy.pgm") + " " + fx.file("t4.pgm") +
                 " --patch 16 --filter 7 --stride 8 --threads 4") == 0);
  CHECK(fx.slurp("t1.pgm") == fx.slurp("t4.pgm"));
}
