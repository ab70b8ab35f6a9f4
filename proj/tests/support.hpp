#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "polarimeter/graph.hpp"

namespace testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("polarimeter-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
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
  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name), std::ios::binary) << text;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Bidirected unit-weight graph from an undirected pair list.
inline polarimeter::ColoredGraph undirected(std::size_t n, std::initializer_list<std::pair<int, int>> pairs,
                                            std::vector<polarimeter::ColorId> colors) {
  std::vector<polarimeter::Edge> edges;
  for (auto [a, b] : pairs) {
    edges.push_back({static_cast<polarimeter::VertexId>(a), static_cast<polarimeter::VertexId>(b), 1.0});
    edges.push_back({static_cast<polarimeter::VertexId>(b), static_cast<polarimeter::VertexId>(a), 1.0});
  }
  return polarimeter::ColoredGraph::from_edges(n, std::move(edges)).recolored(std::move(colors));
}

}  // namespace testing
