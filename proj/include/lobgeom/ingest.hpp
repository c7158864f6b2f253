#pragma once

// Level-II depth ingestion: CSV (optionally gzip-compressed) reader and
// per-second snapshot construction with venue aggregation.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lobgeom/bookgeom.hpp"

namespace lobgeom {

struct DepthRecord {
    std::int64_t ts_ns = 0;
    std::string venue;
    Side side = Side::bid;
    std::int64_t price_nano = 0;  // exact decimal price in 1e-9 units
    double price = 0.0;
    double size = 0.0;
};

// Streaming reader for the depth CSV format:
//   header `ts_ns,venue,side,price,size`, side in {B, A}, price as a decimal
//   string with at most 9 fractional digits. Gzip-compressed files are
//   accepted transparently.
class DepthReader {
public:
    explicit DepthReader(const std::string& path);
    ~DepthReader();
    DepthReader(DepthReader&&) noexcept;
    DepthReader& operator=(DepthReader&&) noexcept;

    // Next record in file order; std::nullopt at end of stream.
    std::optional<DepthRecord> next();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<DepthRecord> read_depth_csv(const std::string& path);

// One snapshot per populated epoch-second. Within a second the last size per
// (venue, side, price) wins (latest ts_ns, then stream order); winning sizes
// are summed across venues at identical prices and zeroed quotes drop out.
// Records must not step back across seconds.
std::vector<BookSnapshot> build_snapshots(std::span<const DepthRecord> records,
                                          double tick_size);

}  // namespace lobgeom
