#pragma once

#include <fstream>
#include <functional>
#include <string>

namespace lobgeom {

// Formats a double with 17 significant digits (round-trip exact).
std::string fmt_g17(double v);

// Writes via a temp file in the same directory and renames into place, so
// readers never observe partial files. Creates parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

// Streaming variant of the same contract for large outputs.
class AtomicFileWriter {
public:
    explicit AtomicFileWriter(std::string path);
    ~AtomicFileWriter();  // discards the temp file unless committed

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

std::string read_file(const std::string& path);

// Index-parallel loop; results must be written to pre-sized slots so the
// outcome is identical regardless of thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace lobgeom
