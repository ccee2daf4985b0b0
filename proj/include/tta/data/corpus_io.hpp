#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tta/data/synthetic.hpp"
#include "tta/io/png.hpp"

namespace tta {

namespace fs = std::filesystem;

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open: " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline std::string slide_stem(int id) {
  std::ostringstream os;
  os << "slide_" << std::setw(4) << std::setfill('0') << id;
  return os.str();
}

/// Corpus directory: one lossless PNG plus one sidecar JSON per slide and a
/// corpus.json carrying the generator config, seed and pixel digest.
inline void save_corpus(const fs::path& dir, const std::vector<VirtualSlide>& slides,
                        const DataConfig& cfg, std::uint64_t seed) {
  fs::create_directories(dir);
  for (const auto& s : slides) {
    png::write_file((dir / (slide_stem(s.id) + ".png")).string(),
                    png::encode_rgb8(s.base_rgb.data(), s.size, s.size));
    Json side;
    side["id"] = s.id;
    side["size"] = s.size;
    side["cell_px"] = s.cell_px;
    side["cells"] = s.cells;
    side["class_map"] = s.class_map;
    side["gen_seed"] = s.gen_seed;
    side["mpp"] = 0.25;
    write_text_file(dir / (slide_stem(s.id) + ".json"), side.dump(2) + "\n");
  }
  Json meta;
  meta["format"] = "tta-corpus-v1";
  meta["n_slides"] = static_cast<int>(slides.size());
  meta["seed"] = seed;
  meta["config"] = cfg.to_json();
  Digest d;
  d.update_pod(corpus_digest(slides));
  meta["digest"] = d.hex();
  write_text_file(dir / "corpus.json", meta.dump(2) + "\n");
}

struct LoadedCorpus {
  std::vector<VirtualSlide> slides;
  DataConfig config;
  std::uint64_t seed = 0;
  std::string digest_hex;
};

inline LoadedCorpus load_corpus(const fs::path& dir) {
  const Json meta = Json::parse(read_text_file(dir / "corpus.json"));
  StrictObject o(meta, "corpus");
  LoadedCorpus out;
  if (o.get<std::string>("format") != "tta-corpus-v1") throw UsageError("corpus: unknown format");
  const int n = o.get<int>("n_slides");
  out.seed = o.get<std::uint64_t>("seed");
  out.config = DataConfig::from_json(o.raw("config"), "corpus.config");
  out.digest_hex = o.get<std::string>("digest");
  o.done();
  for (int i = 0; i < n; ++i) {
    const Json side = Json::parse(read_text_file(dir / (slide_stem(i) + ".json")));
    StrictObject so(side, slide_stem(i));
    VirtualSlide s;
    s.id = so.get<int>("id");
    s.size = so.get<int>("size");
    s.cell_px = so.get<int>("cell_px");
    s.cells = so.get<int>("cells");
    s.class_map = so.get<std::vector<std::uint8_t>>("class_map");
    s.gen_seed = so.get<std::uint64_t>("gen_seed");
    so.get<double>("mpp");
    so.done();
    auto img = png::decode_rgb8(png::read_file((dir / (slide_stem(i) + ".png")).string()));
    if (img.width != s.size || img.height != s.size) throw UsageError("corpus: slide size mismatch");
    s.base_rgb = std::move(img.rgb);
    out.slides.push_back(std::move(s));
  }
  Digest d;
  d.update_pod(corpus_digest(out.slides));
  if (d.hex() != out.digest_hex) throw UsageError("corpus: digest mismatch (corrupt or altered store)");
  return out;
}

}  // namespace tta
