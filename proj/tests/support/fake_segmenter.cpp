// Scripted stand-in for a segmenter child process. Reads protocol requests on
// stdin, appends each raw line to --log, and answers according to --mode.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "specseg/image.hpp"
#include "specseg/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"fake segmenter"};
  std::string mode = "ok";
  std::string log_path;
  std::string out_dir = fs::temp_directory_path() / "fake_segmenter";
  app.add_option("--mode", mode);
  app.add_option("--log", log_path);
  app.add_option("--out", out_dir);
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out_dir);

  std::string line;
  while (std::getline(std::cin, line)) {
    if (!log_path.empty()) {
      std::ofstream log(log_path, std::ios::app);
      log << line << '\n';
    }
    json request;
    try {
      request = json::parse(line);
    } catch (const json::parse_error&) {
      std::cout << json{{"id", -1}, {"error", "malformed request"}}.dump() << std::endl;
      continue;
    }
    const auto id = request.at("id").get<long long>();
    if (mode == "exit") return 3;
    if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::seconds(30));
      return 0;
    }
    if (mode == "garbage") {
      std::cout << "this is not json" << std::endl;
      continue;
    }
    if (mode == "error") {
      std::cout << json{{"id", id}, {"error", "inference failed"}}.dump() << std::endl;
      continue;
    }
    if (mode == "empty") {
      std::cout << json{{"id", id}, {"masks", json::array()}, {"scores", json::array()}}.dump() << std::endl;
      continue;
    }

    const auto image = specseg::read_image(request.at("image").get<std::string>());
    const int px = request.at("point").at("x").get<int>();
    const int py = request.at("point").at("y").get<int>();
    const int w = image.width() + (mode == "wrong-dims" ? 1 : 0);
    const int h = image.height();
    json masks = json::array();
    json scores = json::array();
    // Three nested squares around the prompt: radius 0, 2 and the whole image.
    for (int k = 0; k < 3; ++k) {
      const int r = k == 0 ? 0 : (k == 1 ? 2 : std::max(w, h));
      specseg::BinaryMask m(w, h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.at(x, y) = std::abs(x - px) <= r && std::abs(y - py) <= r;
      }
      const auto path = fs::path(out_dir) / ("req" + std::to_string(id) + "_mask" + std::to_string(k) + ".png");
      specseg::write_mask(m, path);
      masks.push_back(path.string());
      scores.push_back(0.9 - 0.1 * k);
    }
    const auto reply_id = mode == "bad-id" ? id + 1 : id;
    if (mode == "short-scores") scores.erase(scores.begin());
    std::cout << json{{"id", reply_id}, {"masks", masks}, {"scores", scores}}.dump() << std::endl;
  }
  return 0;
}
