#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace risim {

// CSV with "# key value" metadata lines before the header row. Numbers are
// formatted with %.12g so repeated runs produce byte-identical files.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              const std::vector<std::pair<std::string, std::string>>& metadata);

    void row(const std::vector<std::string>& cells);
    // Flushes and reports failures. The destructor closes silently, so call
    // this when the data matters.
    void close();

    static std::string num(double v);
    static std::string num(int v);
    static std::string num(std::uint64_t v);

  private:
    std::string path_;
    std::size_t columns_ = 0;
    std::ofstream out_;
};

}  // namespace risim
