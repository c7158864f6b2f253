#include "lobgeom/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <map>
#include <tuple>

#include "lobgeom/errors.hpp"

namespace lobgeom {

namespace {

constexpr std::int64_t kNanoScale = 1000000000LL;
constexpr const char* kHeader = "ts_ns,venue,side,price,size";

struct Field {
    std::string_view text;
    int column;  // 1-based byte offset of the field start
};

// Splits a CSV line into exactly `n` comma-separated fields.
std::vector<Field> split_fields(std::string_view line, long line_no, int n) {
    std::vector<Field> fields;
    int col = 1;
    while (true) {
        const std::size_t pos = line.find(',');
        fields.push_back({line.substr(0, pos), col});
        if (pos == std::string_view::npos) break;
        col += static_cast<int>(pos) + 1;
        line.remove_prefix(pos + 1);
    }
    if (static_cast<int>(fields.size()) != n) {
        throw ParseError(line_no, 1,
                         "expected " + std::to_string(n) + " fields, found " +
                             std::to_string(fields.size()));
    }
    return fields;
}

std::int64_t parse_int(const Field& f, long line_no, const char* what) {
    std::int64_t value = 0;
    const auto* begin = f.text.data();
    const auto* end = begin + f.text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || f.text.empty()) {
        throw ParseError(line_no, f.column,
                         std::string(what) + " is not a valid integer");
    }
    return value;
}

// Exact decimal parse into nano-units; at most 9 fractional digits.
std::int64_t parse_decimal_nano(const Field& f, long line_no, const char* what) {
    std::string_view t = f.text;
    if (t.empty()) throw ParseError(line_no, f.column, std::string(what) + " is empty");
    bool negative = false;
    if (t.front() == '-') {
        negative = true;
        t.remove_prefix(1);
    } else if (t.front() == '+') {
        t.remove_prefix(1);
    }
    const std::size_t dot = t.find('.');
    const std::string_view int_part = t.substr(0, dot);
    std::string_view frac_part =
        dot == std::string_view::npos ? std::string_view{} : t.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) {
        throw ParseError(line_no, f.column, std::string(what) + " is not a number");
    }
    if (frac_part.size() > 9) {
        throw ParseError(line_no, f.column,
                         std::string(what) + " has more than 9 fractional digits");
    }
    auto digits_value = [&](std::string_view d) {
        std::int64_t v = 0;
        for (char c : d) {
            if (c < '0' || c > '9') {
                throw ParseError(line_no, f.column,
                                 std::string(what) + " is not a number");
            }
            if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
                throw ParseError(line_no, f.column, std::string(what) + " overflows");
            }
            v = v * 10 + (c - '0');
        }
        return v;
    };
    std::int64_t whole = digits_value(int_part);
    std::int64_t frac = digits_value(frac_part);
    for (std::size_t i = frac_part.size(); i < 9; ++i) frac *= 10;
    if (whole > (std::numeric_limits<std::int64_t>::max() - frac) / kNanoScale) {
        throw ParseError(line_no, f.column, std::string(what) + " overflows");
    }
    const std::int64_t nano = whole * kNanoScale + frac;
    return negative ? -nano : nano;
}

}  // namespace

struct DepthReader::Impl {
    gzFile file = nullptr;
    std::string path;
    long line_no = 0;

    ~Impl() {
        if (file != nullptr) gzclose(file);
    }

    // Reads one line (without the terminator); false at end of stream.
    bool read_line(std::string& out) {
        out.clear();
        char chunk[4096];
        while (true) {
            if (gzgets(file, chunk, sizeof chunk) == nullptr) {
                int err = 0;
                const char* msg = gzerror(file, &err);
                if (err != Z_OK && err != Z_STREAM_END) {
                    throw IoError("read error in " + path + ": " +
                                  (msg != nullptr ? msg : "unknown"));
                }
                return !out.empty();
            }
            out += chunk;
            if (!out.empty() && out.back() == '\n') {
                out.pop_back();
                if (!out.empty() && out.back() == '\r') out.pop_back();
                return true;
            }
        }
    }
};

DepthReader::DepthReader(const std::string& path) : impl_(new Impl) {
    impl_->path = path;
    impl_->file = gzopen(path.c_str(), "rb");
    if (impl_->file == nullptr) {
        throw IoError("cannot open " + path + ": " + std::strerror(errno));
    }
    std::string header;
    impl_->line_no = 1;
    if (!impl_->read_line(header) || header != kHeader) {
        throw BadHeader("expected header '" + std::string(kHeader) + "' in " + path);
    }
}

DepthReader::~DepthReader() = default;

DepthReader::DepthReader(DepthReader&&) noexcept = default;
DepthReader& DepthReader::operator=(DepthReader&&) noexcept = default;

std::optional<DepthRecord> DepthReader::next() {
    std::string line;
    while (true) {
        if (!impl_->read_line(line)) return std::nullopt;
        ++impl_->line_no;
        if (!line.empty()) break;
    }
    const long line_no = impl_->line_no;
    const auto fields = split_fields(line, line_no, 5);

    DepthRecord rec;
    rec.ts_ns = parse_int(fields[0], line_no, "ts_ns");
    if (rec.ts_ns <= 0) {
        throw ParseError(line_no, fields[0].column, "ts_ns must be > 0");
    }
    if (fields[1].text.empty() || fields[1].text.size() > 32) {
        throw ParseError(line_no, fields[1].column,
                         "venue must be 1..32 characters");
    }
    rec.venue = std::string(fields[1].text);
    if (fields[2].text == "B") {
        rec.side = Side::bid;
    } else if (fields[2].text == "A") {
        rec.side = Side::ask;
    } else {
        throw ParseError(line_no, fields[2].column, "side must be B or A");
    }
    rec.price_nano = parse_decimal_nano(fields[3], line_no, "price");
    if (rec.price_nano <= 0) {
        throw ParseError(line_no, fields[3].column, "price must be > 0");
    }
    rec.price = static_cast<double>(rec.price_nano) / kNanoScale;
    const std::int64_t size_nano = parse_decimal_nano(fields[4], line_no, "size");
    if (size_nano < 0) {
        throw ParseError(line_no, fields[4].column, "size must be >= 0");
    }
    rec.size = static_cast<double>(size_nano) / kNanoScale;
    return rec;
}

std::vector<DepthRecord> read_depth_csv(const std::string& path) {
    DepthReader reader(path);
    std::vector<DepthRecord> records;
    while (auto rec = reader.next()) records.push_back(std::move(*rec));
    return records;
}

namespace {

struct SecondBucket {
    std::int64_t second = 0;
    // (venue, side, price_nano) -> (ts_ns, stream position, size)
    std::map<std::tuple<std::string, Side, std::int64_t>,
             std::tuple<std::int64_t, std::size_t, double>>
        state;
};

BookSnapshot flush_bucket(const SecondBucket& bucket, double tick_size) {
    // Sum winning per-venue sizes across venues at identical prices.
    std::map<std::int64_t, double> bid_levels, ask_levels;
    for (const auto& [key, val] : bucket.state) {
        const auto& [venue, side, price_nano] = key;
        auto& levels = side == Side::bid ? bid_levels : ask_levels;
        levels[price_nano] += std::get<2>(val);
    }
    std::vector<Level> bids, asks;
    for (auto it = bid_levels.rbegin(); it != bid_levels.rend(); ++it) {
        if (it->second > 0.0) {
            bids.push_back({static_cast<double>(it->first) / kNanoScale, it->second});
        }
    }
    for (const auto& [price_nano, size] : ask_levels) {
        if (size > 0.0) {
            asks.push_back({static_cast<double>(price_nano) / kNanoScale, size});
        }
    }
    return make_snapshot(bucket.second, std::move(bids), std::move(asks),
                         tick_size);
}

}  // namespace

std::vector<BookSnapshot> build_snapshots(std::span<const DepthRecord> records,
                                          double tick_size) {
    if (!(tick_size > 0.0)) {
        throw DomainError("build_snapshots: tick_size must be positive");
    }
    std::vector<BookSnapshot> snaps;
    SecondBucket bucket;
    bool open = false;

    for (std::size_t pos = 0; pos < records.size(); ++pos) {
        const auto& rec = records[pos];
        const std::int64_t second = rec.ts_ns / kNanoScale;
        if (open && second < bucket.second) {
            throw UnsortedInput(
                "build_snapshots: record at ts_ns " + std::to_string(rec.ts_ns) +
                " steps back across seconds");
        }
        if (open && second > bucket.second) {
            snaps.push_back(flush_bucket(bucket, tick_size));
            bucket.state.clear();
            open = false;
        }
        if (!open) {
            bucket.second = second;
            open = true;
        }
        auto key = std::make_tuple(rec.venue, rec.side, rec.price_nano);
        auto it = bucket.state.find(key);
        if (it == bucket.state.end()) {
            bucket.state.emplace(std::move(key),
                                 std::make_tuple(rec.ts_ns, pos, rec.size));
        } else {
            // End-of-second state: latest ts_ns wins, stream order breaks ties.
            auto& [ts, at, size] = it->second;
            if (rec.ts_ns > ts || (rec.ts_ns == ts && pos > at)) {
                ts = rec.ts_ns;
                at = pos;
                size = rec.size;
            }
        }
    }
    if (open) snaps.push_back(flush_bucket(bucket, tick_size));
    return snaps;
}

}  // namespace lobgeom
